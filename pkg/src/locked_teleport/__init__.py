"""Few-qubit simulator for locked simultaneous quantum teleportation."""

__version__ = "0.1.0"

from .analysis import ChannelAudit, PPTReport, channel_audit, entanglement_entropy, ppt_check
from .config import ConfigError, InputStateSpec, LockMode, ScenarioConfig
from .core import (
    DensityMatrix,
    StateVector,
    UnitaryOperator,
    apply_operator,
    density_from_state,
    fidelity_pure,
    partial_trace,
    partial_transpose,
    project_and_renormalize,
    tensor_product,
)
from .eigen import hermitian_eigenvalues
from .gates import alice_lock_operator, bell_state, lock_operator, make_gate, pauli, unlock_operator
from .protocol import (
    ProtocolTranscript,
    bell_measure_all,
    build_initial_state,
    defection_run,
    run_protocol,
    verify_bell_decomposition,
)
