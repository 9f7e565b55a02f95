"""Degree-filtered checks of the resolvent identities for derivations.

The inverses ``(1+a)^{-1}`` and ``Ub(1-Ub)^{-1}`` are not polynomials, so
both checks work with truncated formal series and compare only the terms
whose degree is at most the truncation order.
"""

from __future__ import annotations

from typing import Iterable

from .derivations import delta, d_unitary
from .poly import NCPoly, TensorPoly, general, selfadjoint, unitary

__all__ = ["verify_resolvent_series_d", "verify_resolvent_series_delta"]


def _degree_in(key, tag: str) -> int:
    return sum(1 for w in key for s in w if s.tag == tag)


def _total_degree(key) -> int:
    return sum(len(w) for w in key)


def verify_resolvent_series_d(u_tag: str, b_tag: str, K: int) -> TensorPoly:
    """Residual of ``d(α) = (α+1)⊗α`` for ``α = Σ_{1<=k<=K} (Ub)^k``.

    Terms of U-degree above ``K`` are discarded before returning; the
    remainder vanishes identically when the identity holds.
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    ub = NCPoly.word([unitary(u_tag), general(b_tag)])
    alpha = NCPoly.zero()
    power = NCPoly.one()
    for _ in range(K):
        power = power * ub
        alpha = alpha + power
    lhs = d_unitary(u_tag)(alpha)
    rhs = TensorPoly.simple(alpha + 1, alpha)
    resid = lhs - rhs
    return resid.filter(lambda key: _degree_in(key, u_tag) <= K)


def verify_resolvent_series_delta(split_tags: Iterable[str], a_tag: str, K: int) -> TensorPoly:
    """Residual of ``δ(α) = -α(a⊗1 - 1⊗a)α`` for ``α = Σ_{0<=k<=K} (-a)^k``.

    ``α`` is the truncated series of ``(1+a)^{-1}``.  The residual is
    ``δ(α) + (α⊗1)(a⊗1 - 1⊗a)(1⊗α)`` with terms of total degree above ``K``
    removed.
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    split = frozenset(split_tags)
    if a_tag not in split:
        raise ValueError(f"{a_tag!r} must be one of the split tags")
    a = NCPoly.letter(selfadjoint(a_tag))
    alpha = NCPoly.zero()
    power = NCPoly.one()
    for _ in range(K + 1):
        alpha = alpha + power
        power = power * (-a)
    der = delta(split)
    da = der(a)
    sandwich = da.left_mul(alpha).right_mul(alpha)
    resid = der(alpha) + sandwich
    return resid.filter(lambda key: _total_degree(key) <= K)
