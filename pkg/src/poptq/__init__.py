"""Quantum simulation of no-signalling correlations from POPT states."""

from ._accel import backend
from .chojam import MatrixMap, UnitalDecomposition, adjoint_apply, apply, map_from_popt, popt_from_map, unital_decompose
from .errors import (
    BadTrace,
    FrameSingular,
    NotPOPTWitnessed,
    NotPSD,
    PoptError,
    ResidualTooLarge,
    SingularM,
    Unbounded,
)
from .games import (
    CorrelationTable,
    check_no_signaling,
    chsh_value,
    classical_chsh_max,
    correlations_from_popt,
    popt_chsh_lp_bound,
    pr_box,
    seesaw_max_chsh,
)
from .popt import POPTState, choi_of_transpose, classify, from_quantum, min_product_overlap, partial_transpose_family
from .povm import POVM, ic_povm, qubit_projective, random_povm, validate_povm
from .quantize import QuantumSimulation, transform_povm, verify_simulation
from .reconstruct import MatrixOracle, PreparationOracle, reconstruct_popt, tabulate_omega, verify_oracle_no_signaling

__version__ = "0.1.0"
