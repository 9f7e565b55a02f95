"""Random-matrix checks of the subordination predictions.

Free elements are modelled by large matrices made asymptotically free by
an independent Haar conjugation: ``X + W Y W*`` for the additive case and
``U · W V W*`` for the multiplicative case.

Every random draw comes from a Philox counter-based generator keyed by
``(seed, trial, draw index)``, so a trial's samples do not depend on which
thread runs it or in what order trials finish.  Trial results are folded
in trial-index order.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .subord import DEGENERATE, SolverConfig, additive_subord, mult_unitary_subord
from .transforms import NOT_MEMBER, MeasureR, MeasureT, half_plane_membership

__all__ = [
    "stream",
    "sample_gue",
    "sample_haar_unitary",
    "Model",
    "gue",
    "haar_unitary",
    "diagonal",
    "haar_conjugated",
    "ValidationReport",
    "validate_additive",
    "validate_multiplicative",
    "validate_matrix_resolvent",
    "unitary_eigvals",
]

_MASK64 = (1 << 64) - 1


def stream(seed: int, trial: int, draw: int) -> np.random.Generator:
    """Independent generator for one draw of one trial."""
    if trial < 0 or draw < 0:
        raise ValueError("trial and draw indices must be nonnegative")
    key = [seed & _MASK64, ((trial & 0xFFFFFFFF) << 32) | (draw & 0xFFFFFFFF)]
    return np.random.Generator(np.random.Philox(key=key))


def _ginibre(n: int, rng: np.random.Generator) -> np.ndarray:
    """Complex Gaussian matrix with ``E|a_ij|² = 1``."""
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)


def sample_gue(n: int, rng: np.random.Generator, variance: float = 1.0) -> np.ndarray:
    """GUE matrix whose spectrum approaches the semicircle of the given variance."""
    if n < 2:
        raise ValueError("n must be >= 2")
    a = _ginibre(n, rng)
    return (a + a.conj().T) * np.sqrt(variance / (2 * n))


def sample_haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary from the QR factorization of a Ginibre matrix, phases fixed."""
    if n < 2:
        raise ValueError("n must be >= 2")
    q, r = np.linalg.qr(_ginibre(n, rng))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


# --------------------------------------------------------------------------
# matrix models


@dataclass(frozen=True)
class Model:
    """A recipe for one random matrix.

    ``kind`` is one of ``gue``, ``haar_unitary``, ``diagonal`` or
    ``haar_conjugated``; ``diagonal`` draws its entries from ``law`` (a
    :class:`MeasureR` or :class:`MeasureT`), independently per entry when
    ``sampling == "iid"`` or in exact proportions when ``"fixed"``.
    """

    kind: str
    variance: float = 1.0
    law: Any = None
    inner: "Model | None" = None
    sampling: str = "iid"

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "gue":
            return sample_gue(n, rng, self.variance)
        if self.kind == "haar_unitary":
            return sample_haar_unitary(n, rng)
        if self.kind == "diagonal":
            return np.diag(_diagonal_entries(self.law, n, rng, self.sampling))
        if self.kind == "haar_conjugated":
            x = self.inner.sample(n, rng)
            w = sample_haar_unitary(n, rng)
            return w @ x @ w.conj().T
        raise ValueError(f"unknown model kind {self.kind!r}")

    @property
    def invariant(self) -> bool:
        """Law unchanged by unitary conjugation, so an extra Haar rotation is redundant."""
        return self.kind in ("gue", "haar_unitary", "haar_conjugated")

    def conjugated(self, n: int, rng: np.random.Generator, w_rng: np.random.Generator) -> np.ndarray:
        """``W M W*`` for an independent Haar ``W`` (skipped for invariant laws)."""
        if self.invariant:
            return self.sample(n, rng)
        w = sample_haar_unitary(n, w_rng)
        if self.kind == "diagonal":
            d = _diagonal_entries(self.law, n, rng, self.sampling)
            return (w * d[None, :]) @ w.conj().T
        return w @ self.sample(n, rng) @ w.conj().T


def gue(variance: float = 1.0) -> Model:
    return Model("gue", variance=variance)


def haar_unitary() -> Model:
    return Model("haar_unitary")


def diagonal(law, sampling: str = "iid") -> Model:
    if sampling not in ("iid", "fixed"):
        raise ValueError("sampling must be 'iid' or 'fixed'")
    return Model("diagonal", law=law, sampling=sampling)


def haar_conjugated(inner: Model) -> Model:
    return Model("haar_conjugated", inner=inner)


def _law_points(law) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(law, MeasureR):
        return law.nodes.astype(complex), law.weights
    if isinstance(law, MeasureT):
        if law.atoms is None:
            raise ValueError("diagonal unitary models need an atomic circle law")
        return law._pts, law._ws
    raise TypeError(f"cannot sample from {type(law).__name__}")


def _diagonal_entries(law, n: int, rng: np.random.Generator, sampling: str) -> np.ndarray:
    pts, ws = _law_points(law)
    if sampling == "iid":
        idx = rng.choice(len(pts), size=n, p=ws)
    else:
        counts = np.floor(ws * n).astype(int)
        # largest remainders take the leftover slots, ties broken by index
        rest = n - counts.sum()
        order = np.argsort(-(ws * n - counts), kind="stable")
        counts[order[:rest]] += 1
        idx = np.repeat(np.arange(len(pts)), counts)
    out = pts[idx]
    if isinstance(law, MeasureR):
        return out.real
    return out


# --------------------------------------------------------------------------
# reports


@dataclass
class ValidationReport:
    """Outcome of one check.

    ``metrics`` holds one record per grid point; ``timing`` is wall-clock
    seconds and is left out of :meth:`canonical`, which is the part that
    must be identical for identical inputs.
    """

    check_name: str
    statement: str
    grid: list
    metrics: list
    tolerance: float
    passed: bool
    seed: int
    params: dict = field(default_factory=dict)
    status: str = "OK"
    timing: float = 0.0

    @property
    def max_error(self) -> float:
        return max((m["error"] for m in self.metrics), default=0.0)

    def canonical(self) -> dict:
        return {
            "check_name": self.check_name,
            "statement": self.statement,
            "params": self.params,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "status": self.status,
            "max_error": self.max_error,
            "pass": self.passed,
            "grid": self.grid,
            "metrics": self.metrics,
        }

    def to_json(self, include_timing: bool = False) -> dict:
        doc = self.canonical()
        if include_timing:
            doc["timing"] = self.timing
        return doc


def _pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _run_trials(fn: Callable[[int], Any], trials: int, workers: int | None) -> list:
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(fn, range(trials)))
    return [fn(t) for t in range(trials)]


def _fold_mean(parts: list) -> np.ndarray:
    acc = np.zeros_like(parts[0])
    for p in parts:
        acc = acc + p
    return acc / len(parts)


def _spectrum_sum(x_model: Model, y_model: Model, n: int, seed: int, trial: int) -> np.ndarray:
    """Eigenvalues of ``X + W Y W*`` for one trial."""
    x = x_model.sample(n, stream(seed, trial, 0))
    h = x + y_model.conjugated(n, stream(seed, trial, 1), stream(seed, trial, 2))
    h = (h + h.conj().T) / 2
    return np.linalg.eigvalsh(h)


def unitary_eigvals(q: np.ndarray) -> np.ndarray:
    """Eigenvalues of a unitary through its Cayley transform.

    ``A = i(1 - Q)(1 + Q)^{-1}`` is Hermitian and ``λ = (i - a)/(i + a)``;
    a Hermitian eigen-solve is several times cheaper than a general one.
    A fixed rotation keeps ``-1`` away from the spectrum in practice.
    """
    n = q.shape[0]
    rot = np.exp(0.5j)
    qr = rot * q
    one = np.eye(n)
    a = 1j * np.linalg.solve((one + qr).T, (one - qr).T).T
    a = (a + a.conj().T) / 2
    ev = np.linalg.eigvalsh(a)
    return (1j - ev) / (1j + ev) / rot


def validate_additive(mu: MeasureR, nu: MeasureR, x_model: Model, y_model: Model, n: int,
                      trials: int, zs: Sequence[complex], seed: int, tol: float = 0.02,
                      cfg: SolverConfig = SolverConfig(), workers: int | None = None,
                      target: Callable | None = None) -> ValidationReport:
    """Averaged empirical ``G`` of ``X + W Y W*`` against ``G_μ(ω1(z))``.

    ``target`` overrides the solver prediction (e.g. with a closed form).
    """
    t0 = time.perf_counter()
    zs = np.asarray(zs, dtype=complex)

    def trial(t):
        lam = _spectrum_sum(x_model, y_model, n, seed, t)
        g = (1.0 / (zs[:, None] - lam[None, :])).mean(axis=1)
        if np.any(g.imag > 0):
            raise AssertionError("empirical Cauchy transform left the lower half-plane")
        return g

    emp = _fold_mean(_run_trials(trial, trials, workers))
    if target is None:
        pred = np.array([additive_subord(mu, nu, z, cfg).transform_value for z in zs])
    else:
        pred = np.asarray(target(zs), dtype=complex)
    err = np.abs(emp - pred)
    metrics = [{"z": _pair(z), "empirical": _pair(e), "predicted": _pair(p), "error": float(d)}
               for z, e, p, d in zip(zs, emp, pred, err)]
    return ValidationReport(
        "additive", "G_{mu boxplus nu}(z) = G_mu(omega1(z)) for X + W Y W*",
        [_pair(z) for z in zs], metrics, tol, bool(err.max() <= tol), seed,
        {"n": n, "trials": trials}, timing=time.perf_counter() - t0)


def _psi_of_spectrum(zs: np.ndarray, lam: np.ndarray) -> np.ndarray:
    return (zs[:, None] * lam[None, :] / (1.0 - zs[:, None] * lam[None, :])).mean(axis=1)


def validate_multiplicative(mu_U: MeasureT, mu_V: MeasureT, n: int, trials: int,
                            zs: Sequence[complex], seed: int, tol: float = 0.02,
                            cfg: SolverConfig = SolverConfig(), workers: int | None = None,
                            u_model: Model | None = None, v_model: Model | None = None
                            ) -> ValidationReport:
    """Empirical ``ψ_{UV}`` from the spectrum of ``U · W V W*`` against ``ψ_U(ω(z))``.

    When the solver reports ``DEGENERATE`` the check becomes ``ψ_{UV} ≡ 0``.
    """
    t0 = time.perf_counter()
    zs = np.asarray(zs, dtype=complex)
    u_model = u_model or (haar_unitary() if mu_U.haar else diagonal(mu_U))
    v_model = v_model or (haar_unitary() if mu_V.haar else diagonal(mu_V))

    def trial(t):
        if u_model.invariant:
            # spec(U W V W*) = spec((W* U W) V) and W* U W has the law of U
            return _psi_of_spectrum(zs, unitary_eigvals(
                u_model.sample(n, stream(seed, t, 0)) @ v_model.sample(n, stream(seed, t, 1))))
        v = v_model.conjugated(n, stream(seed, t, 1), stream(seed, t, 2))
        if u_model.kind == "diagonal":
            d = _diagonal_entries(u_model.law, n, stream(seed, t, 0), u_model.sampling)
            prod = d[:, None] * v
        else:
            prod = u_model.sample(n, stream(seed, t, 0)) @ v
        return _psi_of_spectrum(zs, unitary_eigvals(prod))

    emp = _fold_mean(_run_trials(trial, trials, workers))
    results = [mult_unitary_subord(mu_U, mu_V, z, cfg) for z in zs]
    degenerate = any(r.status == DEGENERATE for r in results)
    if degenerate:
        pred = np.zeros_like(emp)
    else:
        pred = np.array([r.transform_value for r in results])
    err = np.abs(emp - pred)
    metrics = [{"z": _pair(z), "empirical": _pair(e), "predicted": _pair(p), "error": float(d)}
               for z, e, p, d in zip(zs, emp, pred, err)]
    statement = ("psi_{UV} = 0 when U is Haar" if degenerate
                 else "psi_{UV}(z) = psi_U(omega(z)) with |omega(z)| <= |z|")
    bound_ok = degenerate or all(abs(r.omega1) <= abs(r.point) + 1e-12 for r in results)
    return ValidationReport(
        "multiplicative", statement, [_pair(z) for z in zs], metrics, tol,
        bool(err.max() <= tol and bound_ok), seed, {"n": n, "trials": trials},
        DEGENERATE if degenerate else "OK", time.perf_counter() - t0)


def validate_matrix_resolvent(mu: MeasureR, nu: MeasureR, x_model: Model, y_model: Model,
                              bs: Sequence, n: int, trials: int, seed: int, tol: float = 0.05,
                              cfg: SolverConfig = SolverConfig(), workers: int | None = None
                              ) -> ValidationReport:
    """``(id ⊗ tr)((b⊗1 - 1⊗H)^{-1})`` for ``H = X + W Y W*`` against the matrix solver.

    With ``H = Σ λ_i P_i`` the partial trace is ``(1/n) Σ (b - λ_i)^{-1}``.
    Each trial's average must respect ``‖G(b)‖ <= 1/ε``.
    """
    t0 = time.perf_counter()
    bs = [np.atleast_2d(np.asarray(b, dtype=complex)) for b in bs]
    eps = []
    for b in bs:
        e = half_plane_membership(b)
        if e is NOT_MEMBER:
            raise ValueError("every b must lie in the upper half-plane")
        eps.append(e)

    def trial(t):
        lam = _spectrum_sum(x_model, y_model, n, seed, t)
        out = []
        for b, e in zip(bs, eps):
            k = b.shape[0]
            stack = b[None] - lam[:, None, None] * np.eye(k)[None]
            g = np.linalg.inv(stack).mean(axis=0)
            if np.linalg.norm(g, 2) > 1.0 / e + 1e-9:
                raise AssertionError("resolvent bound ‖G‖ <= 1/ε violated")
            out.append(g)
        return np.array(out)

    emp = _fold_mean(_run_trials(trial, trials, workers))
    metrics = []
    for b, g in zip(bs, emp):
        pred = additive_subord(mu, nu, b, cfg).transform_value
        metrics.append({"b": _mat(b), "empirical": _mat(g), "predicted": _mat(pred),
                        "error": float(np.linalg.norm(g - pred, 2))})
    err = max(m["error"] for m in metrics)
    return ValidationReport(
        "matrix_resolvent", "E(b - H)^{-1} = G_mu(omega1(b)) at matrix arguments",
        [_mat(b) for b in bs], metrics, tol, bool(err <= tol), seed,
        {"n": n, "trials": trials, "k": int(bs[0].shape[0])}, timing=time.perf_counter() - t0)


def _mat(a) -> list:
    return [[_pair(v) for v in row] for row in np.atleast_2d(a)]
