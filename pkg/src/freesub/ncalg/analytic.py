"""Bridges from the exact algebra to matrices: evaluation, contractions,
the conjugation series and the smooth-norm upper bound."""

from __future__ import annotations

import enum
from typing import Iterable, Mapping

import numpy as np

from .derivations import delta
from .poly import UNITARY, NCPoly, TensorPoly, Word

__all__ = [
    "DIVERGENT",
    "Divergent",
    "eval_matrix",
    "theta_contract",
    "direct_rho",
    "rho_series_eval",
    "smooth_norm_bound",
    "run_count",
    "run_tail_factor",
]


class Divergent(enum.Enum):
    DIVERGENT = "DIVERGENT"

    def __repr__(self):
        return "DIVERGENT"


DIVERGENT = Divergent.DIVERGENT

UNITARY_TOL = 1e-12


def _key(k) -> tuple[str, int]:
    if isinstance(k, str):
        return (k, 0)
    return (k[0], int(k[1]))


class _Evaluator:
    def __init__(self, assignment: Mapping, symbols: Iterable = ()):
        mats = {_key(k): np.asarray(v) for k, v in assignment.items()}
        dims = {m.shape for m in mats.values()}
        if not mats:
            raise ValueError("empty assignment")
        if len(dims) != 1:
            raise ValueError(f"assignment matrices disagree in shape: {sorted(dims)}")
        (shape,) = dims
        if len(shape) != 2 or shape[0] != shape[1]:
            raise ValueError(f"assignment matrices must be square, got {shape}")
        self.n = shape[0]
        self.mats = mats
        self.dtype = np.result_type(*mats.values(), np.complex128)
        if self.dtype == object:
            self.dtype = object
        self._checked: set = set()
        self._cache: dict = {(): np.eye(self.n, dtype=self.dtype)}
        for s in symbols:
            self.letter(s)

    def letter(self, s) -> np.ndarray:
        try:
            m = self.mats[s.base]
        except KeyError:
            raise ValueError(f"no matrix assigned to generator {s.tag}[{s.index}]") from None
        if s.kind == UNITARY and s.base not in self._checked:
            if m.dtype != object:
                err = np.linalg.norm(m.conj().T @ m - np.eye(self.n), 2)
                if err > UNITARY_TOL:
                    raise ValueError(f"matrix for unitary {s.tag} is not unitary (error {err:.2e})")
            self._checked.add(s.base)
        if s.starred:
            return m.conj().T
        return m

    def word(self, w: Word) -> np.ndarray:
        hit = self._cache.get(w)
        if hit is not None:
            return hit
        out = self.word(w[:-1]) @ self.letter(w[-1])
        self._cache[w] = out
        return out

    def coeff(self, c):
        if self.dtype == object:
            return c
        return complex(c)


def eval_matrix(f, assignment: Mapping) -> np.ndarray:
    """Evaluate a polynomial, or a tensor in the Kronecker product space.

    ``assignment`` maps a tag (index 0) or a ``(tag, index)`` pair to a
    square matrix.  Object-dtype matrices holding :class:`Scalar` entries
    evaluate exactly.
    """
    ev = _Evaluator(assignment)
    if isinstance(f, NCPoly):
        out = np.zeros((ev.n, ev.n), dtype=ev.dtype)
        if ev.dtype == object:
            out[...] = 0
        for w, c in f.terms.items():
            out = out + ev.coeff(c) * ev.word(w)
        return out
    if isinstance(f, TensorPoly):
        size = ev.n ** f.order
        out = np.zeros((size, size), dtype=ev.dtype)
        for key, c in f.terms.items():
            k = ev.word(key[0])
            for w in key[1:]:
                k = np.kron(k, ev.word(w))
            out = out + ev.coeff(c) * k
        return out
    raise TypeError(f"cannot evaluate {type(f).__name__}")


def theta_contract(ms, t: TensorPoly, assignment: Mapping) -> np.ndarray:
    """Linear extension of ``w1⊗...⊗w_{s+1} -> w1 m1 w2 m2 ... ms w_{s+1}``."""
    ms = [np.asarray(m) for m in ms]
    if t.order != len(ms) + 1:
        raise ValueError(f"need {t.order - 1} matrices for an order-{t.order} tensor, got {len(ms)}")
    ev = _Evaluator(assignment)
    for m in ms:
        if m.shape != (ev.n, ev.n):
            raise ValueError(f"contraction matrix has shape {m.shape}, expected {(ev.n, ev.n)}")
    return _contract(ev, ms, t)


def _contract(ev: _Evaluator, ms, t: TensorPoly) -> np.ndarray:
    out = np.zeros((ev.n, ev.n), dtype=np.result_type(ev.dtype, *ms))
    for key, c in t.terms.items():
        acc = ev.word(key[0])
        for m, w in zip(ms, key[1:]):
            acc = acc @ m @ ev.word(w)
        out = out + ev.coeff(c) * acc
    return out


def direct_rho(f: NCPoly, m, assignment: Mapping, split_tags: Iterable[str]) -> np.ndarray:
    """Evaluate ``f`` with every split letter conjugated: ``x -> (1-m) x (1-m)^{-1}``.

    Starred split letters are conjugated as letters in their own right, so
    the result is the homomorphic image, not an adjoint.
    """
    m = np.asarray(m, dtype=complex)
    split = frozenset(split_tags)
    ev = _Evaluator(assignment)
    one_m = np.eye(ev.n) - m
    inv = np.linalg.inv(one_m)
    out = np.zeros((ev.n, ev.n), dtype=complex)
    cache: dict = {}
    for w, c in f.terms.items():
        acc = np.eye(ev.n, dtype=complex)
        for s in w:
            x = cache.get(s)
            if x is None:
                x = np.asarray(ev.letter(s), dtype=complex)
                if s.tag in split:
                    x = one_m @ x @ inv
                cache[s] = x
            acc = acc @ x
        out += complex(c) * acc
    return out


def rho_series_eval(f: NCPoly, m, assignment: Mapping, split_tags: Iterable[str],
                    p_max: int = 40) -> tuple[np.ndarray, float]:
    """Partial sum ``Σ_{p<=p_max} θ_p[m,...,m](δ^{(p)}(f))`` and a certified tail bound.

    The tail bound is the smooth-norm tail at ``R = ‖m‖`` with generator
    norms taken from the assigned matrices.
    """
    m = np.asarray(m, dtype=complex)
    norm_m = float(np.linalg.norm(m, 2))
    if norm_m >= 1:
        raise ValueError(f"series needs ‖m‖ < 1, got {norm_m:.6g}")
    if p_max < 0:
        raise ValueError("p_max must be >= 0")
    split = frozenset(split_tags)
    ev = _Evaluator(assignment)
    if m.shape != (ev.n, ev.n):
        raise ValueError(f"m has shape {m.shape}, expected {(ev.n, ev.n)}")
    der = delta(split)
    t = TensorPoly.embed(f)
    total = np.zeros((ev.n, ev.n), dtype=complex)
    for p in range(p_max + 1):
        if t.is_zero():
            break
        total = total + _contract(ev, [m] * p, t)
        if p < p_max:
            t = der.apply_leftmost(t)
    gen_norms = {k: float(np.linalg.norm(np.asarray(v, dtype=complex), 2))
                 for k, v in ev.mats.items()}
    for s in f.letters():
        if s.kind == UNITARY:
            gen_norms[s.base] = 1.0
    tail = _tail_bound(t, norm_m, p_max, gen_norms, split, "runs")
    return total, tail


def run_count(w: Word, split: frozenset) -> int:
    """Number of maximal runs of split letters in a word."""
    runs = 0
    inside = False
    for s in w:
        if s.tag in split:
            if not inside:
                runs += 1
                inside = True
        else:
            inside = False
    return runs


def run_tail_factor(r: int, R: float) -> float:
    """``Σ_{j>=1} B_j(r) R^j``, where ``B_j(r)`` bounds the number of terms of
    ``δ^{(j)}(x)`` for a word ``x`` with ``r`` runs of split letters.

    Each run of a leftmost word contributes exactly two terms under δ (the
    inner terms telescope), one keeping the run and one dropping it, which
    gives ``G_r = [1 + R(1 + 2 Σ_{i<r} G_i)] / (1 - R)`` with ``G_0 = 1``.
    """
    if r == 0:
        return 0.0
    g = [1.0]
    for k in range(1, r + 1):
        g.append((1.0 + R * (1.0 + 2.0 * sum(g[1:k]))) / (1.0 - R))
    return g[r] - 1.0


def _word_norm(w: Word, gen_norms: Mapping) -> float:
    out = 1.0
    for s in w:
        out *= gen_norms[s.base]
    return out


def _term_bound(key, gen_norms) -> float:
    out = 1.0
    for w in key:
        out *= _word_norm(w, gen_norms)
    return out


def _level_bound(t: TensorPoly, gen_norms) -> float:
    return sum(abs(complex(c)) * _term_bound(key, gen_norms) for key, c in t.terms.items())


def _tail_bound(t: TensorPoly, R: float, P: int, gen_norms, split, mode: str):
    """Bound on ``Σ_{p>P} ‖δ^{(p)}(f)‖ R^p`` given ``t = δ^{(P)}(f)``."""
    if t.is_zero():
        return 0.0
    if mode == "runs":
        if R >= 1:
            return DIVERGENT
        tail = 0.0
        for key, c in t.terms.items():
            r = run_count(key[0], split)
            if r:
                tail += abs(complex(c)) * _term_bound(key, gen_norms) * run_tail_factor(r, R)
        return tail * R ** P
    if mode == "geometric":
        k = max(sum(1 for s in key[0] if s.tag in split) for key in t.terms)
        if k == 0:
            return 0.0
        q = 2 * k * R
        if q >= 1:
            return DIVERGENT
        return _level_bound(t, gen_norms) * R ** P * q / (1 - q)
    raise ValueError(f"unknown tail mode {mode!r}")


def smooth_norm_bound(f: NCPoly, R, gen_norms: Mapping, split_tags: Iterable[str],
                      cutoff: int = 16, tail: str = "runs"):
    """Upper bound on ``Σ_p ‖δ^{(p)}(f)‖ R^p`` with word-expansion tensor norms.

    Levels ``p <= cutoff`` are computed from the exact iterates; the rest is
    bounded by a tail estimate.  ``tail="runs"`` counts runs of split letters
    in the leftmost slot and is valid for every ``R < 1``;
    ``tail="geometric"`` uses the cruder ``(2k)^p`` term count and is only
    valid when ``2kR < 1``.  Returns :data:`DIVERGENT` when the chosen tail
    estimate does not converge.
    """
    R = float(R)
    if R <= 0:
        raise ValueError("R must be positive")
    split = frozenset(split_tags)
    norms = {_key(k): float(v) for k, v in gen_norms.items()}
    for s in f.letters():
        if s.base not in norms:
            raise ValueError(f"no norm given for generator {s.tag}[{s.index}]")
        if norms[s.base] < 0:
            raise ValueError("generator norms must be nonnegative")
        if s.kind == UNITARY and norms[s.base] != 1.0:
            raise ValueError(f"unitary generator {s.tag} must have norm 1")
    der = delta(split)
    t = TensorPoly.embed(f)
    total = 0.0
    for p in range(cutoff + 1):
        total += _level_bound(t, norms) * R ** p
        if t.is_zero():
            return total
        if p < cutoff:
            t = der.apply_leftmost(t)
    rest = _tail_bound(t, R, cutoff, norms, split, tail)
    if rest is DIVERGENT:
        return DIVERGENT
    return total + rest
