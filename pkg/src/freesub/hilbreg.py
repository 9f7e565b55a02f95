"""Arc density of ``exp(iπεS)`` and its circular Hilbert transform.

For a standard semicircular ``S`` the unitary ``U_ε = exp(iπεS)`` has
density

    p(θ) = 4/(πε²) sqrt(ε² - θ²/π²)   on |θ| <= πε

with respect to ``dθ/2π``.  Its circular Hilbert transform is the limit of

    H_δ p(θ1) = -(1/2π) ∫_{δ<|θ|<=π} p(θ1 - θ) cot(θ/2) dθ

as ``δ -> 0``.  Near zero ``½cot(θ/2) ≈ 1/θ``, so ``Hp`` is close to the
flat-line transform ``-(1/π) PV∫ p(θ1 - θ)/θ dθ`` of the semicircle of
radius ``πε``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

__all__ = [
    "ArcDensityParams",
    "HilbertValue",
    "Unstable",
    "ConjBoundResult",
    "arc_density",
    "circular_hilbert",
    "cot_partial_fraction_residual",
    "cot_remainder",
    "cot_remainder_bound",
    "cot_pointwise_check",
    "conj_bound",
    "stated_reference",
    "flat_reference",
    "flat_bound",
    "verify_conj_bound",
    "semicircle_hilbert",
    "semicircle_hilbert_quad",
    "truncated_hilbert",
]

DEFAULT_LADDER = (1e-2, 1e-3, 1e-4)


class Unstable(RuntimeError):
    """Principal-value estimates across the δ-ladder disagree."""


@dataclass(frozen=True)
class ArcDensityParams:
    epsilon: float
    quad_points: int = 201
    delta_ladder: tuple = DEFAULT_LADDER
    target_tol: float = 1e-7

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError("ε must lie in (0, 1)")
        if self.quad_points < 2:
            raise ValueError("quad_points must be >= 2")
        lad = tuple(float(d) for d in self.delta_ladder)
        if not lad or any(d <= 0 for d in lad) or any(a <= b for a, b in zip(lad, lad[1:])):
            raise ValueError("δ-ladder must be strictly decreasing and positive")
        object.__setattr__(self, "delta_ladder", lad)


def _wrap(theta):
    return (np.asarray(theta, dtype=float) + np.pi) % (2 * np.pi) - np.pi


def arc_density(eps: float, theta):
    """Density of ``exp(iπεS)`` w.r.t. ``dθ/2π`` (angles are reduced mod 2π)."""
    if not 0 < eps < 1:
        raise ValueError("ε must lie in (0, 1)")
    th = _wrap(theta)
    u = np.clip(eps * eps - (th / np.pi) ** 2, 0.0, None)
    out = 4.0 / (np.pi * eps * eps) * np.sqrt(u)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class HilbertValue:
    value: float
    spread: float
    estimates: tuple


def _pair_integrand(eps: float, theta1: float):
    def g(s):
        if s == 0.0:
            return 0.0
        return (arc_density(eps, theta1 - s) - arc_density(eps, theta1 + s)) / math.tan(s / 2)
    return g


def _breaks(eps: float, theta1: float, lo: float, hi: float) -> list[float]:
    """Points in ``(lo, hi)`` where ``θ1 ± s`` crosses a support edge."""
    r = math.pi * eps
    pts = []
    for e in (r, -r):
        for s in (theta1 - e, e - theta1, theta1 - e + 2 * math.pi, e - theta1 + 2 * math.pi,
                  theta1 - e - 2 * math.pi, e - theta1 - 2 * math.pi):
            if lo < s < hi:
                pts.append(s)
    return sorted(set(pts))


def _quad(g, lo: float, hi: float, pts) -> tuple[float, float]:
    edges = [lo, *pts, hi]
    total = err = 0.0
    for a, b in zip(edges, edges[1:]):
        if b - a <= 0:
            continue
        with warnings.catch_warnings():
            # roundoff warnings fire once the requested 1e-13 is below what g allows
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            v, e = integrate.quad(g, a, b, limit=400, epsabs=1e-13, epsrel=1e-12)
        total += v
        err += e
    return total, err


def circular_hilbert(eps: float, theta1: float, params: ArcDensityParams | None = None,
                     raise_unstable: bool = True) -> HilbertValue:
    """Principal value ``Hp(θ1)`` by symmetric pairing, checked over a δ-ladder.

    Pairing ``θ`` with ``-θ`` gives the regular integrand
    ``g(s) = [p(θ1 - s) - p(θ1 + s)] cot(s/2)`` on ``(0, π]``.  For each
    ``δ`` of the ladder the truncated integral over ``[δ, π]`` is computed
    and completed by a separate quadrature over ``(0, δ)``; the spread of
    these estimates measures the quadrature error.  ``Unstable`` is raised
    when the spread exceeds ten times ``params.target_tol``.
    """
    params = params or ArcDensityParams(eps)
    th1 = float(_wrap(theta1))
    g = _pair_integrand(eps, th1)
    ests = []
    for delta in params.delta_ladder:
        outer, _ = _quad(g, delta, math.pi, _breaks(eps, th1, delta, math.pi))
        inner, _ = _quad(g, 0.0, delta, _breaks(eps, th1, 0.0, delta))
        ests.append(-(outer + inner) / (2 * math.pi))
    spread = max(ests) - min(ests)
    if raise_unstable and spread > 10 * params.target_tol:
        raise Unstable(f"δ-ladder spread {spread:.3e} at θ1 = {th1}")
    return HilbertValue(float(np.mean(ests)), float(spread), tuple(ests))


def truncated_hilbert(eps: float, theta1: float, delta: float) -> float:
    """``H_δ p(θ1)`` itself, without completing the excluded interval."""
    th1 = float(_wrap(theta1))
    g = _pair_integrand(eps, th1)
    v, _ = _quad(g, delta, math.pi, _breaks(eps, th1, delta, math.pi))
    return -v / (2 * math.pi)


# --------------------------------------------------------------------------
# cotangent expansion


def cot_remainder(theta):
    """``½cot(θ/2) - 1/θ``; odd, and ``≈ -θ/12`` near zero."""
    th = np.asarray(theta, dtype=float)
    out = 0.5 / np.tan(th / 2) - 1.0 / th
    return float(out) if out.ndim == 0 else out


def cot_partial_fraction_residual(x: float, N: int) -> float:
    """``|½cot(x/2) - (1/x + Σ_{1<=n<=N} [1/(x+2πn) + 1/(x-2πn)])|``."""
    if not 0 < abs(x) <= 2 * math.pi * 0.99:
        raise ValueError("need 0 < |x| <= 0.99·2π")
    if N < 0:
        raise ValueError("N must be >= 0")
    n = np.arange(1, N + 1, dtype=float)
    tail = math.fsum(2 * x / (x * x - (2 * math.pi * n) ** 2))
    return abs(0.5 / math.tan(x / 2) - (1.0 / x + tail))


def cot_remainder_bound(eps: float) -> float:
    """The claimed pointwise bound ``ε(2-ε)/(2π(1-ε))``."""
    if not 0 < eps < 1:
        raise ValueError("ε must lie in (0, 1)")
    return eps * (2 - eps) / (2 * math.pi * (1 - eps))


conj_bound = cot_remainder_bound


def cot_pointwise_check(eps: float, grid_size: int = 2001) -> dict:
    """Compare ``|½cot(θ/2) - 1/θ|`` with the claimed bound on ``0 < |θ| <= 2πε``.

    The remainder is odd and increasing in ``|θ|``, so the maximum sits at
    the endpoint; ``holds_up_to`` is the largest grid ``|θ|`` at which the
    claimed bound is still respected.
    """
    th = np.linspace(0, 2 * math.pi * eps, grid_size + 1)[1:]
    rem = np.abs(cot_remainder(th))
    bound = cot_remainder_bound(eps)
    ok = rem <= bound
    return {
        "epsilon": eps,
        "max_remainder": float(rem.max()),
        "bound": bound,
        "holds": bool(ok.all()),
        "holds_up_to": float(th[ok].max()) if ok.any() else 0.0,
    }


# --------------------------------------------------------------------------
# the conjugate-variable bound


def stated_reference(eps: float, theta1):
    """The reference line ``θ1 / (2π³ε²)``."""
    return np.asarray(theta1, dtype=float) / (2 * math.pi ** 3 * eps * eps)


def flat_reference(eps: float, theta1):
    """``-(1/π) PV∫ p(θ1 - θ)/θ dθ`` in closed form: ``-4θ1/(π²ε²)``."""
    return -4.0 * np.asarray(theta1, dtype=float) / (math.pi ** 2 * eps * eps)


def flat_bound(eps: float) -> float:
    """Proven bound on ``|Hp - flat_reference|``.

    ``|Hp - ref| <= (1/π) ∫ p(θ1-θ) |½cot(θ/2) - 1/θ| dθ`` and ``∫ p dθ = 2π``,
    so the bound is twice the sup of the remainder over ``|θ| <= 2πε``.
    """
    return 2.0 * abs(float(cot_remainder(2 * math.pi * eps)))


@dataclass(frozen=True)
class ConjBoundResult:
    epsilon: float
    reference: str
    max_deviation: float
    bound: float
    quad_error: float
    ladder_spread: float
    passed: bool
    theta1: np.ndarray
    hp: np.ndarray
    ref_values: np.ndarray

    def rows(self):
        dev = np.abs(self.hp - self.ref_values)
        for t, h, r, d in zip(self.theta1, self.hp, self.ref_values, dev):
            yield {"theta1": float(t), "Hp": float(h), "reference": float(r),
                   "deviation": float(d), "bound": self.bound}


def _conj_grid(eps: float, grid_size: int) -> np.ndarray:
    return math.pi * eps * np.linspace(-1.0, 1.0, grid_size)


def verify_conj_bound(eps: float, grid_size: int = 41, reference: str = "stated",
                      params: ArcDensityParams | None = None, workers: int | None = None
                      ) -> ConjBoundResult:
    """Max over ``θ1 ∈ [-πε, πε]`` of ``|Hp(θ1) - ref(θ1)|`` against a bound.

    ``reference="stated"`` uses ``θ1/(2π³ε²)`` with the bound
    ``ε(2-ε)/(2π(1-ε))``; ``reference="flat"`` uses the closed-form flat
    transform ``-4θ1/(π²ε²)`` with :func:`flat_bound`.  The pass test allows
    the quadrature error (the ladder spread) on top of the bound.
    """
    if reference == "stated":
        ref_fn, bound = stated_reference, cot_remainder_bound(eps)
    elif reference == "flat":
        ref_fn, bound = flat_reference, flat_bound(eps)
    else:
        raise ValueError(f"unknown reference {reference!r}")
    params = params or ArcDensityParams(eps)
    th = _conj_grid(eps, grid_size)

    def one(t):
        return circular_hilbert(eps, t, params)

    if workers and workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(workers) as ex:
            vals = list(ex.map(one, th))
    else:
        vals = [one(t) for t in th]
    hp = np.array([v.value for v in vals])
    spread = max(v.spread for v in vals)
    ref = ref_fn(eps, th)
    dev = float(np.max(np.abs(hp - ref)))
    return ConjBoundResult(eps, reference, dev, bound, spread, spread,
                           dev <= bound + spread, th, hp, ref)


def semicircle_hilbert(r: float, x: float, normalization: str = "circular") -> float:
    """Hilbert transform of the radius-``r`` semicircle law at ``|x| < r``.

    ``normalization="circular"`` is ``-(1/π) PV∫ p(t)/(x - t) dt`` with ``p``
    the density w.r.t. ``dt/2π`` (the flat-line part of the circular
    transform); it equals ``-4x/r²``.  ``normalization="standard"`` is
    ``(1/π) PV∫ dμ(t)/(x - t) = 2x/(πr²)``.
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    if abs(x) >= r:
        raise ValueError("need |x| < r")
    if normalization == "circular":
        return -4.0 * x / (r * r)
    if normalization == "standard":
        return 2.0 * x / (math.pi * r * r)
    raise ValueError(f"unknown normalization {normalization!r}")


def semicircle_hilbert_quad(r: float, x: float, normalization: str = "circular") -> float:
    """Principal-value quadrature of the same quantity (independent oracle)."""
    if abs(x) >= r:
        raise ValueError("need |x| < r")

    def dens(t):  # probability density w.r.t. dt
        return 2.0 / (math.pi * r * r) * math.sqrt(max(r * r - t * t, 0.0))

    # PV∫ dens(t)/(x - t) dt via scipy's Cauchy weight: ∫ f(t)/(t - x)
    v, _ = integrate.quad(dens, -r, r, weight="cauchy", wvar=x, limit=400, epsabs=1e-13)
    pv = -v
    if normalization == "circular":
        return -2.0 * pv
    if normalization == "standard":
        return pv / math.pi
    raise ValueError(f"unknown normalization {normalization!r}")
