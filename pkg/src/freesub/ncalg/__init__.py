"""Exact noncommutative polynomial and tensor algebra with derivations."""

from .analytic import (
    DIVERGENT,
    direct_rho,
    eval_matrix,
    rho_series_eval,
    smooth_norm_bound,
    theta_contract,
)
from .derivations import (
    Derivation,
    d_unitary,
    delta,
    derive_d,
    derive_delta,
    derive_fdq,
    fdq,
    iterate_derivation,
    substitute,
    substitute_tensor,
)
from .poly import (
    GenSymbol,
    NCPoly,
    TensorPoly,
    general,
    reduce_word,
    selfadjoint,
    unitary,
    word_adjoint,
)
from .resolvent import verify_resolvent_series_d, verify_resolvent_series_delta
from .scalar import Scalar

mul = NCPoly.__mul__


def adjoint(f: NCPoly) -> NCPoly:
    return f.adjoint()


__all__ = [
    "DIVERGENT",
    "Derivation",
    "GenSymbol",
    "NCPoly",
    "Scalar",
    "TensorPoly",
    "adjoint",
    "d_unitary",
    "delta",
    "derive_d",
    "derive_delta",
    "derive_fdq",
    "direct_rho",
    "eval_matrix",
    "fdq",
    "general",
    "iterate_derivation",
    "mul",
    "reduce_word",
    "rho_series_eval",
    "selfadjoint",
    "smooth_norm_bound",
    "substitute",
    "substitute_tensor",
    "theta_contract",
    "unitary",
    "verify_resolvent_series_d",
    "verify_resolvent_series_delta",
    "word_adjoint",
]
