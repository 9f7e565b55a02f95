"""Subordination functions for free additive and multiplicative convolution.

Additive case: with ``h(w) = 1/G(w) - w`` the pair ``(ω1, ω2)`` solves

    ω1 = z + h_ν(ω2),   ω2 = z + h_μ(ω1),

and ``G_{μ⊞ν}(z) = G_μ(ω1) = G_ν(ω2)``.  The same equations hold for
matrix arguments ``b`` with ``Im b > 0`` once ``1/G`` is read as a matrix
inverse.

Multiplicative case on the disk: with ``h(w) = η(w)/w`` and
``η = ψ/(1+ψ)`` the pair solves

    ω1 = z h_V(ω2),   ω2 = z h_U(ω1),

and ``ψ_{UV}(z) = ψ_U(ω1) = ψ_V(ω2)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .freeprob import FreeState, InsufficientMomentOrder
from .ncalg.poly import NCPoly, unitary
from .ncalg.scalar import ZERO, Scalar
from .transforms import (
    NOT_MEMBER,
    MeasureR,
    MeasureT,
    _batched_resolvent,
    cauchy_G,
    half_plane_membership,
    psi_over_z,
    psi_transform,
)

__all__ = [
    "OK",
    "DEGENERATE",
    "SolverConfig",
    "SubordResult",
    "NonConvergence",
    "Degenerate",
    "additive_subord",
    "additive_subord_grid",
    "mult_unitary_subord",
    "mult_series_subord",
    "taylor_coefficients",
    "resolvent_identity_check",
]

OK = "OK"
DEGENERATE = "DEGENERATE"


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-12
    max_iter: int = 10000
    damping: float = 1.0

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")


@dataclass
class SubordResult:
    point: Any
    omega1: Any
    omega2: Any
    transform_value: Any
    residual: float
    iterations: int
    status: str = OK

    def to_json(self) -> dict:
        def enc(x):
            if x is None:
                return None
            a = np.asarray(x, dtype=complex)
            if a.ndim == 0:
                return [float(a.real), float(a.imag)]
            return [[[float(v.real), float(v.imag)] for v in row] for row in np.atleast_2d(a)]
        return {"point": enc(self.point), "omega1": enc(self.omega1), "omega2": enc(self.omega2),
                "value": enc(self.transform_value), "residual": float(self.residual),
                "iterations": int(self.iterations), "status": self.status}


class NonConvergence(RuntimeError):
    def __init__(self, message: str, result: SubordResult):
        super().__init__(message)
        self.result = result


class Degenerate(ValueError):
    """The trace-level equation does not determine the subordination function."""


def _iterate(step, w0, cfg: SolverConfig, dist):
    """Damped fixed-point iteration.

    The damping halves whenever the step grows and recovers slowly while it
    shrinks; the floor keeps an early overshoot from freezing the iterate.
    """
    w = w0
    d = cfg.damping
    floor = min(cfg.damping, 1 / 16)
    last = np.inf
    for it in range(1, cfg.max_iter + 1):
        t = step(w)
        delta = dist(t, w)
        w = w + d * (t - w) if d != 1 else t
        if delta <= cfg.tol * 1e-2:
            return w, it, True
        if delta > last:
            d = max(d / 2, floor)
        else:
            d = min(d * 1.05, cfg.damping)
        last = delta
    return w, cfg.max_iter, False


# --------------------------------------------------------------------------
# additive


def _h_scalar(mu: MeasureR, w):
    return 1.0 / cauchy_G(mu, w) - w


def _G_matrix(mu: MeasureR, W):
    return _batched_resolvent(mu, W)


def _h_matrix(mu: MeasureR, W):
    return np.linalg.inv(_G_matrix(mu, W)) - W


def additive_subord(mu: MeasureR, nu: MeasureR, z, cfg: SolverConfig = SolverConfig()) -> SubordResult:
    """Solve the additive subordination system at a scalar ``z`` or a matrix ``b``.

    Raises ``ValueError`` when the argument is outside the upper half-plane
    and :class:`NonConvergence` (carrying the last iterate) when the
    recomputed residual stays above ``cfg.tol``.
    """
    if np.ndim(z) == 2:
        return _additive_matrix(mu, nu, np.asarray(z, dtype=complex), cfg)
    z = complex(z)
    if z.imag <= 0:
        raise ValueError(f"point {z} is not in the upper half-plane")

    def step(w):
        w2 = z + _h_scalar(mu, w)
        if w2.imag <= 0:  # rounding at tiny Im; h keeps Im >= 0 in exact arithmetic
            w2 = complex(w2.real, z.imag)
        return z + _h_scalar(nu, w2)

    w1, its, _ = _iterate(step, z, cfg, lambda a, b: abs(a - b))
    w2 = z + _h_scalar(mu, w1)
    g1 = complex(cauchy_G(mu, w1))
    g2 = complex(cauchy_G(nu, w2))
    resid = max(abs(g1 - g2), abs(w1 + w2 - z - 1.0 / g1) * abs(g1) ** 2)
    res = SubordResult(z, complex(w1), complex(w2), g1, float(resid), its)
    if resid > cfg.tol:
        raise NonConvergence(f"additive subordination at z={z}: residual {resid:.3e}", res)
    return res


def _additive_matrix(mu, nu, b, cfg) -> SubordResult:
    if half_plane_membership(b) is NOT_MEMBER:
        raise ValueError("matrix argument is not in the upper half-plane")

    def step(W):
        return b + _h_matrix(nu, b + _h_matrix(mu, W))

    def dist(A, B):
        return float(np.linalg.norm(A - B, 2))

    w1, its, _ = _iterate(step, b.copy(), cfg, dist)
    w2 = b + _h_matrix(mu, w1)
    g1 = _G_matrix(mu, w1)
    g2 = _G_matrix(nu, w2)
    ident = np.linalg.inv(w1 + w2 - b)
    resid = max(dist(g1, g2), dist(ident, g1))
    res = SubordResult(b, w1, w2, g1, resid, its)
    if resid > cfg.tol:
        raise NonConvergence(f"matrix additive subordination: residual {resid:.3e}", res)
    return res


def additive_subord_grid(mu: MeasureR, nu: MeasureR, zs, cfg: SolverConfig = SolverConfig(),
                         workers: int | None = None) -> list[SubordResult]:
    """Pointwise solves over a grid; the order of the output matches ``zs``."""
    zs = list(np.asarray(zs, dtype=complex).ravel())
    if workers and workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(lambda z: additive_subord(mu, nu, z, cfg), zs))
    return [additive_subord(mu, nu, z, cfg) for z in zs]


def resolvent_identity_check(mu: MeasureR, nu: MeasureR, b, cfg: SolverConfig = SolverConfig()) -> float:
    """Operator-norm defect of the matrix-argument subordination identities.

    With ``(ω1, ω2)`` from the matrix fixed point (no eigen-decomposition
    of ``b``), the residual is the largest of ``‖G_μ(ω1) - G_ν(ω2)‖``,
    ``‖G_μ(ω1) - (ω1 + ω2 - b)^{-1}‖`` and the excess of ``‖G‖`` over
    ``1/ε``; it is infinite if ``Im ω1 >= Im b`` fails.  Reading
    ``b = z - X`` and ``ω1 = b + n``, the averaged resolvent is the
    resolvent of ``b`` shifted by ``n``, which is how the solver's ``ω``
    stands in for the analytic function of the additive theorem.
    """
    b = np.atleast_2d(np.asarray(b, dtype=complex))
    res = additive_subord(mu, nu, b, cfg)
    w1, w2, g = res.omega1, res.omega2, res.transform_value
    defects = [
        np.linalg.norm(g - _G_matrix(nu, w2), 2),
        np.linalg.norm(g - np.linalg.inv(w1 + w2 - b), 2),
    ]
    eps = half_plane_membership(b)
    gap = (w1 - b - (w1 - b).conj().T) / 2j
    if np.linalg.eigvalsh(gap).min() < -1e-12:
        defects.append(np.inf)
    defects.append(max(0.0, np.linalg.norm(g, 2) - 1.0 / eps))
    return float(max(defects))


# --------------------------------------------------------------------------
# multiplicative


def _h_circle(mu: MeasureT, w):
    """``η(w)/w = (ψ(w)/w) / (1 + ψ(w))``, regular at 0."""
    q = psi_over_z(mu, w)
    return q / (1.0 + w * q)


def _degenerate(mu_U: MeasureT, mu_V: MeasureT) -> bool:
    if mu_U.is_haar():
        return True
    return abs(mu_U.moment(1)) == 0 and abs(mu_V.moment(1)) == 0


def mult_unitary_subord(mu_U: MeasureT, mu_V: MeasureT, z, cfg: SolverConfig = SolverConfig()) -> SubordResult:
    """``ω`` with ``ψ_{UV}(z) = ψ_U(ω(z))`` for free unitaries ``U``, ``V``.

    Returns a result with status ``DEGENERATE`` (``ω`` left unset) when
    ``U`` is Haar, where ``ψ_{UV} ≡ 0`` and ``ω`` is not determined, or
    when both first moments vanish.
    """
    z = complex(z)
    if abs(z) >= 1:
        raise ValueError(f"point {z} is not in the unit disk")
    if _degenerate(mu_U, mu_V):
        value = 0j if mu_U.is_haar() or mu_V.is_haar() else complex("nan")
        return SubordResult(z, None, None, value, 0.0, 0, DEGENERATE)
    if z == 0:
        return SubordResult(z, 0j, 0j, 0j, 0.0, 0)

    def step(w):
        return z * complex(_h_circle(mu_V, z * complex(_h_circle(mu_U, w))))

    w1, its, _ = _iterate(step, z * mu_V.moment(1), cfg, lambda a, b: abs(a - b))
    w2 = z * complex(_h_circle(mu_U, w1))
    p1 = complex(psi_transform(mu_U, w1))
    p2 = complex(psi_transform(mu_V, w2))
    eta = p1 / (1 + p1)
    resid = max(abs(p1 - p2), abs(w1 * w2 - z * eta))
    res = SubordResult(z, complex(w1), complex(w2), p1, float(resid), its)
    if resid > cfg.tol:
        raise NonConvergence(f"multiplicative subordination at z={z}: residual {resid:.3e}", res)
    return res


def _series_mul(a: list, b: list, N: int) -> list:
    out = [ZERO] * (N + 1)
    for i, x in enumerate(a):
        if not x:
            continue
        for j in range(N + 1 - i):
            y = b[j]
            if y:
                out[i + j] = out[i + j] + x * y
    return out


def mult_series_subord(mu_U: MeasureT, mu_V: MeasureT, N: int) -> list[Scalar]:
    """Exact coefficients ``[ω_0, ..., ω_N]`` of ``ω`` solving ``ψ_U∘ω = ψ_{UV}``.

    ``ψ_{UV}`` has coefficients ``τ((UV)^n)`` computed by the symbolic free
    trace.  Needs ``τ(U) != 0``; otherwise :class:`Degenerate` is raised.
    """
    if N < 0:
        raise ValueError("order must be >= 0")
    try:
        sU, sV = mu_U.spec("U", max(N, 1)), mu_V.spec("V", max(N, 1))
    except ValueError as exc:
        raise InsufficientMomentOrder(str(exc)) from None
    c = [sU.moment(k) for k in range(N + 1)]
    if N >= 1 and not c[1]:
        raise Degenerate("τ(U) = 0: the coefficient equations are not solvable order by order")
    state = FreeState([sU, sV])
    uv = NCPoly.word([unitary("U"), unitary("V")])
    a = [ZERO]
    p = NCPoly.one()
    for _ in range(N):
        p = p * uv
        a.append(state.tau(p))
    w = [ZERO] * (N + 1)
    for n in range(1, N + 1):
        # [z^n] Σ_{k>=2} c_k ω^k using ω truncated below order n
        acc = ZERO
        power = w[:]
        for k in range(2, n + 1):
            power = _series_mul(power, w, N)
            acc = acc + c[k] * power[n]
        w[n] = (a[n] - acc) / c[1]
    return w


def taylor_coefficients(f, N: int, radius: float = 0.5, M: int = 64) -> np.ndarray:
    """Taylor coefficients ``0..N`` of an analytic ``f`` on the disk by a Cauchy-integral FFT."""
    if M <= N:
        raise ValueError("need more sample points than coefficients")
    zs = radius * np.exp(2j * np.pi * np.arange(M) / M)
    vals = np.array([f(z) for z in zs], dtype=complex)
    coeffs = np.fft.fft(vals) / M
    return coeffs[: N + 1] / radius ** np.arange(N + 1)
