"""qherald: heralded remote entanglement by amplified heterodyne measurement.

Simulates two dispersively read-out qubits whose cavity outputs meet in a
quantum-limited phase-preserving amplifier followed by heterodyne detection,
and reconstructs the conditional two-qubit state from the record with a
closed-form quantum filter.  Includes a small SLH network compiler for the
cascaded-system bookkeeping and a CLI harness for trajectories, ensembles
and parameter sweeps.
"""

from .amplifier import AmplifierParams, gain_profile, heterodyne_increment, two_mode_transform
from .cavity import (
    CavityTrajectory,
    DriveEnvelope,
    SystemParams,
    balanced_drive,
    integrate_cavity,
    make_drive_envelope,
)
from .exceptions import ConfigError, NumericalAbort
from .kernels import DEFAULT_BACKEND, available_backends
from .qfilter import (
    FilterState,
    accumulate,
    bloch_from_filter,
    concurrence_exact,
    concurrence_filter,
    efficiency_threshold,
    integrate_record,
    most_probable_trajectory,
    optimal_lambda,
    outcome_distribution,
)
from .sme import (
    FullModel,
    FullState,
    MeasurementRecord,
    simulate_full,
    simulate_reduced,
    simulate_trajectory,
    step_full,
    step_reduced,
    wiener_pair,
)
from .slh import (
    MONITORED_CHANNELS,
    SLHTriplet,
    build_network,
    cascade,
    concatenate,
    element,
    generator_from_triplet,
)
from .states import TwoQubitState

__version__ = "0.1.0"
