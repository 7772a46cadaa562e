"""Generalized RSK on Thoma-parameter alphabets, exact measures and limit-theorem harnesses."""

__version__ = "0.1.0"

from .core import (
    G,
    ColLetter,
    ContLetter,
    InsertionTableau,
    LinearOrder,
    RowLetter,
    StandardTableau,
    TableauType,
    ThomaParams,
    YoungDiagram,
    compare_arrows,
    format_word,
    letter_counts,
    parse_word,
    tableau_type,
    transpose,
    validate_params,
)
from .diagnostics import (
    WalkConfig,
    conditional_covariance,
    possible_transformation,
    restrict_word,
    rho,
    walk_expectation_exact,
    walk_position,
)
from .exact import coherency_residual, measure_Mn, schur_specialization
from .rsk import RskOutput, greene_ck, greene_rk, row_insert, rsk, rsk_bijection_inverse, rsk_shape, transposed_rsk
from .sampling import (
    AmalgamationSpec,
    SeededGenerator,
    amalgamate,
    reduction_plan,
    sample_word,
    sample_word_poisson,
)
from .stats import run_clt, run_clt_poisson, run_drift, run_drift_poisson, run_lln, theoretical_covariance
