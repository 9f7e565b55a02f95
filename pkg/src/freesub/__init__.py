"""Subordination, free derivations and their numerical checks.

Subpackages and modules:

* :mod:`freesub.ncalg` exact noncommutative polynomials and derivations
* :mod:`freesub.freeprob` symbolic free traces and conditional expectations
* :mod:`freesub.transforms` Cauchy and circle transforms, half-plane tests
* :mod:`freesub.subord` additive and multiplicative subordination solvers
* :mod:`freesub.hilbreg` circular Hilbert transform of the arc density
* :mod:`freesub.rmt` random-matrix validation
"""

from .freeprob import AlgebraSpec, FreeState, MatrixState, cond_expect, tau
from .hilbreg import circular_hilbert, verify_conj_bound
from .subord import (
    SolverConfig,
    SubordResult,
    additive_subord,
    mult_series_subord,
    mult_unitary_subord,
)
from .transforms import MeasureR, MeasureT, cauchy_G, psi_transform, stieltjes_invert

__version__ = "0.1.0"

__all__ = [
    "AlgebraSpec",
    "FreeState",
    "MatrixState",
    "MeasureR",
    "MeasureT",
    "SolverConfig",
    "SubordResult",
    "additive_subord",
    "cauchy_G",
    "circular_hilbert",
    "cond_expect",
    "mult_series_subord",
    "mult_unitary_subord",
    "psi_transform",
    "stieltjes_invert",
    "tau",
    "verify_conj_bound",
]
