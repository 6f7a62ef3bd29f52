"""Nonlinear modal decoupling of multi-oscillator systems.

A system's Taylor k-jet is moved to modal coordinates and transformed degree
by degree until every mode's pair of equations is self-contained. The
decoupled modes become real second-order oscillators used for simulation
benchmarks and energy-function stability assessment.
"""

from .decouple import (
    DecoupledJet,
    IntraModalTarget,
    TransformChain,
    build_smib_target,
    decouple_step,
    forward_map,
    inverse_map,
    run_decoupling,
)
from .energy import (
    CctReport,
    EnergyFunction,
    FaultScenario,
    Verdict,
    assess,
    cct_sweep,
    critical_energy,
    energy_function,
    find_uep,
)
from .errors import DecouplingError, NonFinite, SmallDivisor
from .io import LoadedSystem, load_system, save_system
from .modal import ModalBasis, check_resonance, eigendecompose, normalize_basis, to_modal
from .oscillators import DecoupledOscillator, simplify_undamped, smib_realize, to_real
from .poly import TrigTerm, TrigVectorField, TruncatedPolyMap, compose_truncated, invert_near_identity, taylor_trig
from .power import (
    EquilibriumJet,
    MachineParams,
    NetworkParams,
    PowerSystem,
    build_swing_field,
    find_equilibrium,
    make_jet,
    poly_jet,
)
from .simulate import Trajectory, compare_targets, error_report, integrate, reconstruct

__version__ = "0.1.0"
