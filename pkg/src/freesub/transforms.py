"""Probability laws on the line and the circle and their analytic transforms.

Sign conventions: ``G(z) = ∫ dμ(t)/(z - t)`` maps the upper half-plane to
the lower one, and ``ψ(z) = ∫ zζ/(1 - zζ) dμ(ζ) = Σ_{n>=1} c_n z^n`` for a
law on the unit circle.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .freeprob import AlgebraSpec
from .ncalg.scalar import Scalar, parse_rational

__all__ = [
    "NOT_MEMBER",
    "MeasureR",
    "MeasureT",
    "DensityEstimate",
    "cauchy_G",
    "F_transform",
    "matrix_cauchy_G",
    "psi_transform",
    "psi_over_z",
    "eta_transform",
    "stieltjes_invert",
    "stieltjes_invert_ladder",
    "half_plane_membership",
    "disk_criterion",
    "disk_criterion_ii",
    "half_plane_inverse_bounds",
    "semicircle_G",
    "arcsine_G",
]

DEFAULT_NODES = 2048


class _NotMember(enum.Enum):
    NOT_MEMBER = "NOT_MEMBER"

    def __repr__(self):
        return "NOT_MEMBER"


NOT_MEMBER = _NotMember.NOT_MEMBER


def _real(x) -> float:
    if isinstance(x, str):
        return float(parse_rational(x))
    return float(x)


# --------------------------------------------------------------------------
# laws on R


@dataclass(frozen=True, eq=False)
class MeasureR:
    """A probability law on R, stored as weighted nodes.

    Atoms are exact nodes; absolutely continuous laws are stored as
    quadrature nodes whose weights integrate smooth functions against the
    density.  ``kind`` records which closed form (if any) produced the
    nodes, and ``support`` is an interval containing every node.
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: str = "atoms"
    support: tuple[float, float] = (0.0, 0.0)
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.nodes, dtype=float).ravel()
        w = np.asarray(self.weights, dtype=float).ravel()
        if t.shape != w.shape or t.size == 0:
            raise ValueError("nodes and weights must be nonempty and of equal length")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        object.__setattr__(self, "nodes", t)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "support", (float(t.min()), float(t.max()))
                           if self.support == (0.0, 0.0) else tuple(map(float, self.support)))

    # constructors
    @classmethod
    def atoms(cls, pairs: Iterable) -> "MeasureR":
        pairs = [(_real(t), _real(w)) for t, w in pairs]
        t = np.array([p[0] for p in pairs])
        w = np.array([p[1] for p in pairs])
        return cls(t, w, "atoms")

    @classmethod
    def dirac(cls, c: float = 0.0) -> "MeasureR":
        return cls.atoms([(c, 1.0)])

    @classmethod
    def bernoulli(cls, a: float = 1.0) -> "MeasureR":
        """Symmetric two-point law ``(δ_{-a} + δ_a)/2``."""
        return cls.atoms([(-a, 0.5), (a, 0.5)])

    @classmethod
    def semicircle(cls, radius: float = 2.0, center: float = 0.0,
                   n: int = DEFAULT_NODES) -> "MeasureR":
        """Semicircle law on ``[center - radius, center + radius]``.

        Gauss-Chebyshev nodes of the second kind absorb the square-root
        endpoint behaviour, so smooth integrands converge geometrically.
        """
        k = np.arange(1, n + 1)
        ang = k * np.pi / (n + 1)
        x = np.cos(ang)
        w = 2.0 / (n + 1) * np.sin(ang) ** 2
        w = w / w.sum()
        return cls(center + radius * x, w, "semicircle",
                   (center - radius, center + radius), {"radius": radius, "center": center})

    @classmethod
    def arcsine(cls, a: float, b: float, n: int = DEFAULT_NODES) -> "MeasureR":
        """Arcsine law ``dt / (π sqrt((t-a)(b-t)))`` via Chebyshev nodes of the first kind."""
        if not a < b:
            raise ValueError("arcsine support needs a < b")
        k = np.arange(1, n + 1)
        x = np.cos((2 * k - 1) * np.pi / (2 * n))
        mid, half = (a + b) / 2, (b - a) / 2
        return cls(mid + half * x, np.full(n, 1.0 / n), "arcsine", (a, b), {"a": a, "b": b})

    @classmethod
    def grid(cls, x: Sequence[float], density: Sequence[float]) -> "MeasureR":
        """Density sampled on a grid, integrated with the trapezoid rule and renormalized."""
        x = np.asarray(x, dtype=float)
        p = np.asarray(density, dtype=float)
        if x.ndim != 1 or x.shape != p.shape or x.size < 2 or np.any(np.diff(x) <= 0):
            raise ValueError("grid needs increasing x and a matching density")
        if np.any(p < 0):
            raise ValueError("density must be nonnegative")
        dx = np.diff(x)
        w = np.zeros_like(x)
        w[:-1] += dx / 2 * p[:-1]
        w[1:] += dx / 2 * p[1:]
        keep = w > 0
        w = w[keep] / w[keep].sum()
        return cls(x[keep], w, "grid", (float(x[0]), float(x[-1])))

    @classmethod
    def from_json(cls, doc: Mapping) -> "MeasureR":
        typ = doc["type"]
        if typ == "atoms":
            return cls.atoms(doc["atoms"])
        if typ == "density":
            d = doc["density"]
            kind = d["kind"]
            n = int(d.get("nodes", DEFAULT_NODES))
            if kind in ("semicircle", "arcsine"):
                a, b = map(_real, d["support"])
                if kind == "semicircle":
                    return cls.semicircle((b - a) / 2, (a + b) / 2, n)
                return cls.arcsine(a, b, n)
            if kind == "grid":
                return cls.grid(d["x"], d["values"])
            raise ValueError(f"unknown density kind {kind!r}")
        raise ValueError(f"unknown measure type {typ!r}")

    @property
    def is_atomic(self) -> bool:
        return self.kind == "atoms"

    def moment(self, k: int) -> float:
        return float(self.weights @ self.nodes ** k)

    def mean(self) -> float:
        return self.moment(1)

    def density(self, x) -> np.ndarray:
        """Closed-form density for semicircle/arcsine laws."""
        x = np.asarray(x, dtype=float)
        if self.kind == "semicircle":
            r, c = self.params["radius"], self.params["center"]
            u = np.clip(r * r - (x - c) ** 2, 0.0, None)
            return 2.0 / (np.pi * r * r) * np.sqrt(u)
        if self.kind == "arcsine":
            a, b = self.params["a"], self.params["b"]
            out = np.zeros_like(x)
            inside = (x > a) & (x < b)
            out[inside] = 1.0 / (np.pi * np.sqrt((x[inside] - a) * (b - x[inside])))
            return out
        raise ValueError(f"no closed-form density for a {self.kind} law")


def semicircle_G(z, variance: float = 1.0):
    """Closed-form Cauchy transform of the centered semicircle, principal branch."""
    z = np.asarray(z, dtype=complex)
    r = 2.0 * np.sqrt(variance)
    return (z - np.sqrt(z - r) * np.sqrt(z + r)) / (2.0 * variance)


def arcsine_G(z, a: float, b: float):
    z = np.asarray(z, dtype=complex)
    return 1.0 / (np.sqrt(z - a) * np.sqrt(z - b))


def cauchy_G(mu: MeasureR, z, exact: bool = True):
    """``∫ dμ(t) / (z - t)`` for ``Im z > 0`` (scalar or array).

    Semicircle and arcsine laws use their closed forms unless ``exact`` is
    off; quadrature nodes cannot resolve ``z`` closer to the support than
    the node spacing.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise ValueError("cauchy_G needs Im z > 0")
    if exact and mu.kind == "semicircle":
        r, c = mu.params["radius"], mu.params["center"]
        out = semicircle_G(z - c, r * r / 4)
    elif exact and mu.kind == "arcsine":
        out = arcsine_G(z, mu.params["a"], mu.params["b"])
    else:
        out = (mu.weights / (z[..., None] - mu.nodes)).sum(axis=-1)
    return out[()] if out.ndim == 0 else out


def F_transform(mu: MeasureR, z):
    return 1.0 / cauchy_G(mu, z)


def _batched_resolvent(mu: MeasureR, b: np.ndarray) -> np.ndarray:
    k = b.shape[0]
    stack = b[None, :, :] - mu.nodes[:, None, None] * np.eye(k)[None]
    inv = np.linalg.inv(stack)
    return np.tensordot(mu.weights, inv, axes=(0, 0))


def matrix_cauchy_G(mu: MeasureR, b) -> np.ndarray:
    """``∫ (b - t)^{-1} dμ(t)`` for ``b`` with ``Im b >= ε > 0``."""
    b = np.atleast_2d(np.asarray(b, dtype=complex))
    if half_plane_membership(b) is NOT_MEMBER:
        raise ValueError("matrix_cauchy_G needs Im b positive definite")
    return _batched_resolvent(mu, b)


# --------------------------------------------------------------------------
# laws on T


@dataclass(frozen=True, eq=False)
class MeasureT:
    """A probability law on the unit circle.

    Exactly one of ``atoms`` (exact Gaussian-rational points and weights),
    ``moments`` (``c_0..c_N`` as complex numbers) or ``haar`` describes
    it; ``density`` optionally holds ``(theta, values)`` on ``[-π, π)``
    with respect to ``dθ/2π``.
    """

    atoms: tuple | None = None
    moments: tuple | None = None
    haar: bool = False
    density: tuple | None = None

    def __post_init__(self):
        given = sum(x is not None and x is not False for x in (self.atoms, self.moments, self.haar or None))
        if given == 0 and self.density is None:
            raise ValueError("MeasureT needs atoms, moments, haar or a density")
        if self.atoms is not None:
            spec = AlgebraSpec.from_atoms("_", "unitary", self.atoms)
            object.__setattr__(self, "atoms", spec.atoms)
            object.__setattr__(self, "_spec", spec)
            pts = np.array([complex(p) for p, _ in spec.atoms])
            ws = np.array([float(w.re) for _, w in spec.atoms])
            object.__setattr__(self, "_pts", pts)
            object.__setattr__(self, "_ws", ws)
        if self.moments is not None:
            ms = tuple(complex(m) for m in self.moments)
            if abs(ms[0] - 1) > 1e-12:
                raise ValueError("circle moments must start with c0 = 1")
            object.__setattr__(self, "moments", ms)
        if self.density is not None:
            th, vals = (np.asarray(a, dtype=float) for a in self.density)
            if th.shape != vals.shape:
                raise ValueError("density grid and values differ in shape")
            object.__setattr__(self, "density", (th, vals))

    @classmethod
    def from_atoms(cls, atoms: Iterable) -> "MeasureT":
        return cls(atoms=tuple(atoms))

    @classmethod
    def dirac(cls, point=1) -> "MeasureT":
        return cls(atoms=((point, 1),))

    @classmethod
    def haar_measure(cls) -> "MeasureT":
        return cls(haar=True)

    @classmethod
    def from_moments(cls, moments: Sequence) -> "MeasureT":
        return cls(moments=tuple(moments))

    @classmethod
    def from_density(cls, theta, values) -> "MeasureT":
        """Density on a uniform periodic grid over ``[-π, π)``, w.r.t. ``dθ/2π``."""
        return cls(density=(theta, values))

    @classmethod
    def from_json(cls, doc: Mapping) -> "MeasureT":
        typ = doc["type"]
        if typ == "haar":
            return cls.haar_measure()
        if typ == "atoms":
            return cls.from_atoms(tuple((tuple(p) if isinstance(p, list) else p, w)
                                        for p, w in doc["atoms"]))
        if typ == "moments":
            return cls.from_moments([complex(_real(m[0]), _real(m[1])) if isinstance(m, list)
                                     else _real(m) for m in doc["moments"]])
        raise ValueError(f"unknown circle measure type {typ!r}")

    # exact data
    @property
    def is_exact(self) -> bool:
        return self.atoms is not None or self.haar

    def spec(self, tag: str, order: int = 16) -> AlgebraSpec:
        """Exact :class:`AlgebraSpec` for the generator with this law."""
        if self.haar:
            return AlgebraSpec.haar(tag, order)
        if self.atoms is not None:
            return AlgebraSpec.from_atoms(tag, "unitary", self.atoms)
        raise ValueError("exact moments need atoms or a Haar law")

    def exact_moment(self, n: int) -> Scalar:
        return self.spec("_").moment(n)

    def moment(self, n: int) -> complex:
        if n == 0:
            return 1.0 + 0j
        if self.haar:
            return 0j
        if self.atoms is not None:
            return complex(self._ws @ self._pts ** n)
        if self.moments is not None:
            k = abs(n)
            if k >= len(self.moments):
                raise ValueError(f"moment {n} beyond available order {len(self.moments) - 1}")
            return self.moments[k] if n > 0 else self.moments[k].conjugate()
        th, vals = self.density
        return complex(np.mean(vals * np.exp(1j * n * th)))

    def is_haar(self, tol: float = 0.0) -> bool:
        if self.haar:
            return True
        if self.atoms is not None:
            return False
        order = len(self.moments) - 1 if self.moments is not None else 32
        return all(abs(self.moment(k)) <= tol for k in range(1, order + 1))


def _check_disk(z):
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1):
        raise ValueError("ψ-transform needs |z| < 1")
    return z


def psi_over_z(mu: MeasureT, z, with_bound: bool = False):
    """``ψ(z)/z = ∫ ζ/(1 - zζ) dμ(ζ)``, regular at ``z = 0``."""
    z = _check_disk(z)
    bound = 0.0
    if mu.haar:
        out = np.zeros_like(z)
    elif mu.atoms is not None:
        out = (mu._ws * mu._pts / (1.0 - z[..., None] * mu._pts)).sum(axis=-1)
    elif mu.density is not None:
        th, vals = mu.density
        zeta = np.exp(1j * th)
        out = (vals * zeta / (1.0 - z[..., None] * zeta)).mean(axis=-1)
    else:
        N = len(mu.moments) - 1
        out = np.zeros_like(z)
        for n in range(N, 0, -1):
            out = out * z + mu.moments[n]
        r = np.abs(z)
        bound = np.max(r ** N / (1.0 - r)) if z.size else 0.0
    out = out[()] if out.ndim == 0 else out
    return (out, float(bound)) if with_bound else out


def psi_transform(mu: MeasureT, z, with_bound: bool = False):
    """``ψ_μ(z) = Σ_{n>=1} c_n z^n`` for ``|z| < 1``.

    Atomic and density laws use the integral form; a bare moment list
    uses the truncated series, whose tail ``|z|^{N+1}/(1-|z|)`` is returned
    when ``with_bound`` is set.
    """
    z = _check_disk(z)
    q, bound = psi_over_z(mu, z, with_bound=True)
    out = z * q
    out = out[()] if np.ndim(out) == 0 else out
    bound = float(np.max(np.abs(z)) * bound) if bound else 0.0
    return (out, bound) if with_bound else out


def eta_transform(mu: MeasureT, z):
    p = psi_transform(mu, z)
    return p / (1.0 + p)


# --------------------------------------------------------------------------
# inversion


@dataclass(frozen=True)
class DensityEstimate:
    x: np.ndarray
    density: np.ndarray
    eta: float
    atomic: bool
    unstable: bool = False
    ladder_spread: float = 0.0


def stieltjes_invert(G_values, x, eta: float, atom_mass: float = 0.05) -> DensityEstimate:
    """Density estimate ``-Im G(x + iη)/π`` on a grid.

    A point mass ``m`` shows up as a spike of height ``m/(πη)``; the
    estimate is flagged atomic when some grid value carries apparent mass
    ``π η ρ(x) >= atom_mass``.
    """
    if eta <= 0:
        raise ValueError("η must be positive")
    G = np.asarray(G_values, dtype=complex)
    x = np.asarray(x, dtype=float)
    if G.shape != x.shape:
        raise ValueError("G values and grid differ in shape")
    rho = -G.imag / np.pi
    atomic = bool(rho.size and np.max(rho) * np.pi * eta >= atom_mass)
    return DensityEstimate(x, rho, float(eta), atomic)


def stieltjes_invert_ladder(G_fn, x, etas=(1e-1, 1e-2, 1e-3), tol: float = 5e-3,
                            atom_mass: float = 0.05) -> DensityEstimate:
    """Invert at each η of a decreasing ladder and keep the smallest-η estimate.

    Consecutive estimates are compared; the result is marked unstable when
    the last two disagree by more than ``10 * tol`` in sup norm.  An atom
    makes the peak height grow like ``1/η`` down the ladder, whereas a
    bounded density saturates; the ladder flags the former.
    """
    x = np.asarray(x, dtype=float)
    ests = [stieltjes_invert(G_fn(x + 1j * eta), x, eta, atom_mass) for eta in etas]
    last = ests[-1]
    if len(ests) < 2:
        return last
    spread = float(np.max(np.abs(last.density - ests[-2].density)))
    heights = _peak_heights(G_fn, x[np.argmax(ests[0].density)], etas)
    growth = heights[-1] / max(heights[-2], 1e-300)
    atomic = bool(growth >= 0.5 * etas[-2] / etas[-1]
                  and heights[-1] * np.pi * etas[-1] >= atom_mass)
    return DensityEstimate(x, last.density, last.eta, atomic, spread > 10 * tol, spread)


def _peak_heights(G_fn, x0: float, etas) -> list[float]:
    """Track the tallest peak down the η ladder on locally refined grids."""
    heights = []
    width = 20 * etas[0]
    for eta in etas:
        loc = x0 + np.linspace(-width, width, int(8 * width / eta) + 1)
        rho = -np.asarray(G_fn(loc + 1j * eta)).imag / np.pi
        i = int(np.argmax(rho))
        x0 = float(loc[i])
        heights.append(float(rho[i]))
        width = 20 * eta
    return heights


# --------------------------------------------------------------------------
# half-plane and disk lemmas


def _im_part(T: np.ndarray) -> np.ndarray:
    return (T - T.conj().T) / 2j


def _re_part(T: np.ndarray) -> np.ndarray:
    return (T + T.conj().T) / 2


def half_plane_membership(T):
    """Largest ``ε`` with ``Im T >= ε``, or :data:`NOT_MEMBER` when it is not positive."""
    T = np.atleast_2d(np.asarray(T, dtype=complex))
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise ValueError("square matrix required")
    eps = float(np.linalg.eigvalsh(_im_part(T)).min())
    return eps if eps > 0 else NOT_MEMBER


def disk_criterion_ii(x, margin: float = 0.0) -> bool:
    """``1 - x`` invertible and ``2 Re (1 - x)^{-1} >= (1 + ε)`` for some ``ε > 0``.

    Since ``2 Re (1-x)^{-1} - 1 = y* (1 - x*x) y`` with ``y = (1-x)^{-1}``,
    this holds exactly when ``‖x‖ < 1``.
    """
    x = np.atleast_2d(np.asarray(x, dtype=complex))
    k = x.shape[0]
    one_x = np.eye(k) - x
    if np.linalg.matrix_rank(one_x) < k:
        return False
    try:
        y = np.linalg.inv(one_x)
    except np.linalg.LinAlgError:
        return False
    if not np.all(np.isfinite(y)):
        return False
    lam = np.linalg.eigvalsh(2 * _re_part(y) - np.eye(k)).min()
    return bool(lam > margin)


class DiskCriteriaMismatch(RuntimeError):
    """The norm test and the resolvent test disagree."""


def disk_criterion(x) -> bool:
    """``‖x‖ < 1``, cross-checked against :func:`disk_criterion_ii`."""
    x = np.atleast_2d(np.asarray(x, dtype=complex))
    first = bool(np.linalg.norm(x, 2) < 1)
    second = disk_criterion_ii(x)
    if first != second:
        raise DiskCriteriaMismatch(f"‖x‖ = {np.linalg.norm(x, 2)!r}: criteria disagree")
    return first


def half_plane_inverse_bounds(T) -> dict:
    """Measured and predicted bounds for ``T^{-1}`` with ``Im T >= ε``.

    Returns a dict with the membership ``eps``, ``norm_inv = ‖T^{-1}‖``,
    its bound ``1/ε``, ``im_inv_top`` (largest eigenvalue of
    ``Im T^{-1}``) and its bound ``-(ε + ‖T‖²/ε)^{-1}``.
    """
    T = np.atleast_2d(np.asarray(T, dtype=complex))
    eps = half_plane_membership(T)
    if eps is NOT_MEMBER:
        raise ValueError("T is not in the upper half-plane")
    inv = np.linalg.inv(T)
    nT = float(np.linalg.norm(T, 2))
    return {
        "eps": eps,
        "norm_inv": float(np.linalg.norm(inv, 2)),
        "norm_inv_bound": 1.0 / eps,
        "im_inv_top": float(np.linalg.eigvalsh(_im_part(inv)).max()),
        "im_inv_bound": -1.0 / (eps + nT * nT / eps),
    }
