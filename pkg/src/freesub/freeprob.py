"""Traces on free products from per-generator moment data.

Each free component is generated by a single selfadjoint or unitary
letter whose distribution is given by exact moments (or by finitely many
exact atoms).  The trace of a word is computed by recursive centering:
an alternating product of centered elements from different components has
trace zero, and everything else reduces to shorter words.

The conditional expectation onto a sub-family of components, the pairing
functionals of the derivations, and the morphism identities built on them
are all exact.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from math import comb, sqrt
from typing import Iterable, Mapping

import numpy as np

from .ncalg.derivations import d_unitary, delta, substitute, substitute_tensor
from .ncalg.poly import (
    SELFADJOINT,
    UNITARY,
    GenSymbol,
    NCPoly,
    TensorPoly,
    Word,
    reduce_word,
    selfadjoint,
    unitary,
)
from .ncalg.scalar import ONE, ZERO, Scalar, as_scalar, format_rational, parse_rational

__all__ = [
    "DEFAULT_MOMENT_ORDER",
    "InsufficientMomentOrder",
    "AlgebraSpec",
    "FreeState",
    "MatrixState",
    "tau",
    "tau_tensor",
    "cond_expect",
    "liberation_pairing",
    "conjugate_pairing",
    "check_coalgebra_delta",
    "check_coalgebra_d",
    "check_d_equals_minus_delta",
    "check_freeconj_pairing",
    "graddist_bound",
]

DEFAULT_MOMENT_ORDER = 16


class InsufficientMomentOrder(ValueError):
    """A trace needs a moment beyond the order supplied in the moment data."""


def _to_scalar(x) -> Scalar:
    if isinstance(x, Scalar):
        return x
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return Scalar(parse_rational(x[0]), parse_rational(x[1]))
    c = as_scalar(parse_rational(x) if isinstance(x, str) else x)
    if c is NotImplemented:
        raise TypeError(f"cannot read {x!r} as an exact scalar")
    return c


@dataclass(frozen=True)
class AlgebraSpec:
    """Distribution of one free generator.

    ``moments[k]`` is ``τ(x^k)`` for a selfadjoint generator and ``τ(U^k)``
    (``k >= 0``) for a unitary one; negative powers of a unitary use
    ``τ(U^{-k}) = conj τ(U^k)``.  A spec built from atoms computes moments
    of any order.
    """

    tag: str
    kind: str
    moments: tuple = ()
    atoms: tuple | None = None

    def __post_init__(self):
        if self.kind not in (SELFADJOINT, UNITARY):
            raise ValueError(f"generator kind must be selfadjoint or unitary, got {self.kind!r}")
        if self.atoms is not None:
            pts = tuple((_to_scalar(p), _to_scalar(w)) for p, w in self.atoms)
            object.__setattr__(self, "atoms", pts)
            if sum((w for _, w in pts), ZERO) != 1:
                raise ValueError(f"atom weights of {self.tag} do not sum to 1")
            for p, w in pts:
                if not w.is_real or w.re <= 0:
                    raise ValueError("atom weights must be positive rationals")
                if self.kind == SELFADJOINT and not p.is_real:
                    raise ValueError("selfadjoint atoms must be real")
                if self.kind == UNITARY and p.abs2() != 1:
                    raise ValueError(f"unitary atom {p} is not on the unit circle")
            object.__setattr__(self, "_cache", {})
        else:
            ms = tuple(_to_scalar(m) for m in self.moments)
            object.__setattr__(self, "moments", ms)
            if not ms or ms[0] != 1:
                raise ValueError(f"moment sequence of {self.tag} must start with m0 = 1")
            if self.kind == SELFADJOINT and any(not m.is_real for m in ms):
                raise ValueError("selfadjoint moments must be real")

    # constructors
    @classmethod
    def from_atoms(cls, tag: str, kind: str, atoms: Iterable) -> "AlgebraSpec":
        return cls(tag, kind, (), tuple(atoms))

    @classmethod
    def semicircle(cls, tag: str, order: int = DEFAULT_MOMENT_ORDER, variance=1) -> "AlgebraSpec":
        var = Fraction(variance)
        ms = []
        for k in range(order + 1):
            if k % 2:
                ms.append(0)
            else:
                n = k // 2
                catalan = comb(2 * n, n) // (n + 1)
                ms.append(catalan * var ** n)
        return cls(tag, SELFADJOINT, tuple(ms))

    @classmethod
    def haar(cls, tag: str, order: int = DEFAULT_MOMENT_ORDER) -> "AlgebraSpec":
        return cls(tag, UNITARY, (1,) + (0,) * order)

    @property
    def order(self) -> int | None:
        """Highest available moment order, or None when unlimited."""
        return None if self.atoms is not None else len(self.moments) - 1

    @property
    def symbol(self) -> GenSymbol:
        return unitary(self.tag) if self.kind == UNITARY else selfadjoint(self.tag)

    def moment(self, k: int) -> Scalar:
        if self.kind == SELFADJOINT and k < 0:
            raise ValueError("negative power of a selfadjoint generator")
        if k == 0:
            return ONE
        if self.atoms is not None:
            cache = self._cache
            hit = cache.get(k)
            if hit is None:
                hit = ZERO
                for p, w in self.atoms:
                    hit = hit + w * (p ** k)
                cache[k] = hit
            return hit
        kk = abs(k)
        if kk >= len(self.moments):
            raise InsufficientMomentOrder(
                f"τ({self.tag}^{k}) needs moment order {kk}, spec {self.tag} has {len(self.moments) - 1}")
        m = self.moments[kk]
        return m.conjugate() if k < 0 else m

    def check_positive(self, tol: float = 1e-12) -> bool:
        """Hankel (selfadjoint) or Toeplitz (unitary) positivity up to the available order."""
        n = self.order if self.order is not None else 12
        if self.kind == SELFADJOINT:
            h = n // 2
            mat = np.array([[float(self.moment(i + j).re) for j in range(h + 1)] for i in range(h + 1)])
        else:
            mat = np.array([[complex(self.moment(j - i)) for j in range(n + 1)] for i in range(n + 1)])
        return bool(np.linalg.eigvalsh(mat).min() >= -tol * max(1.0, np.abs(mat).max()))

    def to_json(self) -> dict:
        doc: dict = {"tag": self.tag, "kind": self.kind}
        if self.atoms is not None:
            doc["atoms"] = [[p.to_pair(), format_rational(w.re)] for p, w in self.atoms]
        else:
            doc["moments"] = [m.to_pair() if not m.is_real else format_rational(m.re)
                              for m in self.moments]
        return doc

    @classmethod
    def from_json(cls, doc: Mapping) -> "AlgebraSpec":
        if "atoms" in doc:
            return cls.from_atoms(doc["tag"], doc["kind"], [(p, w) for p, w in doc["atoms"]])
        return cls(doc["tag"], doc["kind"], tuple(doc["moments"]))


# --------------------------------------------------------------------------
# symbolic trace


class FreeState:
    """Trace on the free product of the given components.

    Memo tables are shared between threads and guarded by a lock; values
    are pure functions of their keys, so concurrent callers always see the
    same results.
    """

    def __init__(self, specs: Iterable[AlgebraSpec]):
        self.specs: dict[str, AlgebraSpec] = {}
        for s in specs:
            if s.tag in self.specs:
                raise ValueError(f"duplicate component tag {s.tag!r}")
            self.specs[s.tag] = s
        self._lock = threading.Lock()
        self._s_memo: dict = {}
        self._j_memo: dict = {}
        self._e_memo: dict = {}

    def __repr__(self):
        return f"FreeState({', '.join(f'{t}:{s.kind}' for t, s in self.specs.items())})"

    @property
    def tags(self) -> set[str]:
        return set(self.specs)

    def _moment(self, tag: str, k: int) -> Scalar:
        return self.specs[tag].moment(k)

    # words -> alternating power blocks
    def _blocks(self, w: Word) -> tuple:
        out: list = []
        for s in w:
            spec = self.specs.get(s.tag)
            if spec is None:
                raise ValueError(f"letter {s.name} belongs to no component of this state")
            if s.index != 0:
                raise ValueError(f"component {s.tag} has a single generator; got index {s.index}")
            if spec.kind == SELFADJOINT:
                e = 1
            else:
                if s.kind != UNITARY:
                    raise ValueError(f"letter {s.name} should be unitary to match its spec")
                e = -1 if s.starred else 1
            if out and out[-1][0] == s.tag:
                e += out[-1][1]
                out.pop()
                if e == 0:
                    continue
            out.append((s.tag, e))
        return tuple(out)

    def tau_word(self, w: Word) -> Scalar:
        return self._join((), self._blocks(w))

    def tau(self, f) -> Scalar:
        if isinstance(f, NCPoly):
            total = ZERO
            for w, c in f.terms.items():
                total = total + c * self.tau_word(w)
            return total
        return self.tau_word(reduce_word(f))

    def _S(self, j: int, seq: tuple) -> Scalar:
        """τ of ``seq`` with its first ``j`` blocks replaced by centered versions.

        Adjacent blocks of ``seq`` belong to different components.
        """
        key = (j, seq)
        hit = self._s_memo.get(key)
        if hit is not None:
            return hit
        n = len(seq)
        if n == 0:
            val = ONE
        elif j == n:
            val = ZERO
        else:
            tag, k = seq[j]
            c = self._moment(tag, k)
            val = self._S(j + 1, seq)
            if c:
                val = val + c * self._join(seq[:j], seq[j + 1:])
        with self._lock:
            self._s_memo[key] = val
        return val

    def _join(self, prefix: tuple, raw: tuple) -> Scalar:
        """τ(p1°...pj° r1 r2 ...) where the seam between the two parts may need merging."""
        key = (prefix, raw)
        hit = self._j_memo.get(key)
        if hit is not None:
            return hit
        if not raw:
            val = ONE if not prefix else ZERO
        elif raw[0][1] == 0:
            val = self._join(prefix, raw[1:])
        elif not prefix or prefix[-1][0] != raw[0][0]:
            val = self._S(len(prefix), prefix + raw)
        else:
            tag, a = prefix[-1]
            b = raw[0][1]
            # (x^a - τ(x^a)) x^b = x^{a+b} - τ(x^a) x^b
            val = self._join(prefix[:-1], ((tag, a + b),) + raw[1:])
            ma = self._moment(tag, a)
            if ma:
                val = val - ma * self._join(prefix[:-1], ((tag, b),) + raw[1:])
        with self._lock:
            self._j_memo[key] = val
        return val

    def tau_tensor(self, t: TensorPoly) -> Scalar:
        total = ZERO
        cache: dict = {}
        for key, c in t.terms.items():
            prod = c
            for w in key:
                v = cache.get(w)
                if v is None:
                    v = cache[w] = self.tau_word(w)
                prod = prod * v
                if not prod:
                    break
            total = total + prod
        return total

    # conditional expectation
    def cond_expect(self, f: NCPoly, target: Iterable[str]) -> NCPoly:
        target = frozenset(target)
        unknown = target - set(self.specs)
        if unknown:
            raise ValueError(f"unknown target components {sorted(unknown)}")
        out = NCPoly.zero()
        for w, c in f.terms.items():
            out = out + self._expect_word(w, target).scale(c)
        return out

    def _expect_word(self, w: Word, target: frozenset) -> NCPoly:
        for s in w:
            if s.tag not in self.specs:
                raise ValueError(f"letter {s.name} belongs to no component of this state")
        segs: list = []
        for s in w:
            inside = s.tag in target
            if segs and segs[-1][0] == inside:
                segs[-1][1].append(s)
            else:
                segs.append((inside, [s]))
        segs_t = tuple((inside, NCPoly.word(letters)) for inside, letters in segs)
        return self._expect(segs_t)

    def _expect(self, segs: tuple) -> NCPoly:
        """E onto the target algebra of an alternating product of segments.

        ``segs`` holds ``(in_target, poly)`` pairs with alternating flags.
        Outer target segments are untouched (bimodule property); all other
        segments are split into centered part plus trace, and an
        alternating product with every interior factor centered and at
        least one non-target factor maps to 0.
        """
        segs = _normalize_segments(segs)
        if isinstance(segs, NCPoly):
            return segs
        scale, segs = segs
        if not scale:
            return NCPoly.zero()
        key = segs
        hit = self._e_memo.get(key)
        if hit is None:
            hit = self._expect_normalized(segs)
            with self._lock:
                self._e_memo[key] = hit
        return hit.scale(scale)

    def _expect_normalized(self, segs: tuple) -> NCPoly:
        if all(inside for inside, _ in segs):
            out = NCPoly.one()
            for _, p in segs:
                out = out * p
            return out
        n = len(segs)
        for i, (inside, p) in enumerate(segs):
            if inside and (i == 0 or i == n - 1):
                continue
            t = self.tau(p)
            if not t:
                continue
            centered = p - t
            first = segs[:i] + ((inside, centered),) + segs[i + 1:]
            second = segs[:i] + ((inside, NCPoly.const(t)),) + segs[i + 1:]
            return self._expect(first) + self._expect(second)
        return NCPoly.zero()


def _normalize_segments(segs: tuple):
    """Merge same-side neighbours and pull out scalar segments.

    Returns ``(scale, segments)``, or a constant polynomial once nothing
    but scalars remain.  Merging can produce a scalar (``U·U* = 1``), which
    in turn exposes new same-side neighbours, so the pass repeats until
    the sequence is stable.
    """
    scale = ONE
    cur = list(segs)
    while True:
        out: list = []
        changed = False
        for inside, p in cur:
            if p.is_zero():
                return (ZERO, ())
            if p.is_scalar():
                scale = scale * p.scalar_part()
                changed = True
            elif out and out[-1][0] == inside:
                out[-1] = (inside, out[-1][1] * p)
                changed = True
            else:
                out.append((inside, p))
        cur = out
        if not changed:
            break
    if not cur:
        return NCPoly.const(scale)
    return (scale, tuple(cur))


# --------------------------------------------------------------------------
# matrix backend


class MatrixState:
    """Normalized trace of fixed matrices assigned to generators.

    Object-dtype matrices with exact entries give exact traces.
    """

    def __init__(self, assignment: Mapping):
        from .ncalg.analytic import _Evaluator

        self._ev = _Evaluator(assignment)
        self.n = self._ev.n

    def tau_word(self, w: Word) -> Scalar | complex:
        m = self._ev.word(reduce_word(w))
        tr = sum(m[i, i] for i in range(self.n))
        if self._ev.dtype == object:
            return _to_scalar(tr) / self.n
        return complex(tr) / self.n

    def tau(self, f) -> Scalar | complex:
        if isinstance(f, NCPoly):
            total = ZERO if self._ev.dtype == object else 0j
            for w, c in f.terms.items():
                v = self.tau_word(w)
                total = total + (c * v if self._ev.dtype == object else complex(c) * v)
            return total
        return self.tau_word(f)

    def tau_tensor(self, t: TensorPoly):
        exact = self._ev.dtype == object
        total = ZERO if exact else 0j
        for key, c in t.terms.items():
            prod = c if exact else complex(c)
            for w in key:
                prod = prod * self.tau_word(w)
            total = total + prod
        return total


# --------------------------------------------------------------------------
# functional API


def tau(state, w) -> Scalar:
    return state.tau(w)


def tau_tensor(state, t: TensorPoly):
    return state.tau_tensor(t)


def cond_expect(state: FreeState, f: NCPoly, target: Iterable[str]) -> NCPoly:
    return state.cond_expect(f, target)


def _as_poly(w) -> NCPoly:
    if isinstance(w, NCPoly):
        return w
    return NCPoly.word(w)


def liberation_pairing(state, split_tags: Iterable[str], w) -> Scalar:
    """``(τ⊗τ)(δ(w))``: the scalar pairing that defines the liberation gradient."""
    return state.tau_tensor(delta(frozenset(split_tags))(_as_poly(w)))


def conjugate_pairing(state, u_tag: str, w) -> Scalar:
    """``(τ⊗τ)(d_U(w))``: the scalar pairing that defines the conjugate of ``U``."""
    return state.tau_tensor(d_unitary(u_tag)(_as_poly(w)))


def _expect_tensor(state: FreeState, t: TensorPoly, target) -> TensorPoly:
    return t.map_slots(lambda w: state.cond_expect(NCPoly({w: ONE}, _trusted=True), target))


def check_coalgebra_delta(state: FreeState, split_tags: Iterable[str], bystander_tags: Iterable[str],
                          w) -> TensorPoly:
    """``(E_A⊗E_A)(δ_A(w)) - δ_A(E_A(w))`` for ``A`` free from the bystanders."""
    A = frozenset(split_tags)
    C = frozenset(bystander_tags)
    if A & C:
        raise ValueError("split and bystander components overlap")
    f = _as_poly(w)
    stray = f.tags() - A - C
    if stray:
        raise ValueError(f"word uses components outside A and C: {sorted(stray)}")
    der = delta(A)
    lhs = _expect_tensor(state, der(f), A)
    rhs = der(state.cond_expect(f, A))
    return lhs - rhs


def check_coalgebra_d(state: FreeState, u_tag: str, v_tag: str, w, w_tag: str = "W") -> TensorPoly:
    """``(E_U⊗E_U)(d_{UV}(w)) - d_U(E_U(w))`` for ``w`` in the algebra of ``UV``.

    ``w`` is a polynomial in a formal unitary letter ``w_tag`` standing for
    ``UV``; ``d_{UV}`` is applied to it formally and the substitution
    ``W -> UV`` is made afterwards.
    """
    f = _as_poly(w)
    if f.tags() - {w_tag}:
        raise ValueError(f"w must be a polynomial in the formal letter {w_tag}")
    uv = NCPoly.word([unitary(u_tag), unitary(v_tag)])
    sub = {unitary(w_tag): uv}
    d_formal = d_unitary(w_tag)(f)
    d_uv = substitute_tensor(d_formal, sub)
    lhs = _expect_tensor(state, d_uv, {u_tag})
    rhs = d_unitary(u_tag)(state.cond_expect(substitute(f, sub), {u_tag}))
    return lhs - rhs


def conj_letter(s: GenSymbol, suffix: str = "'") -> GenSymbol:
    return s._replace(tag=s.tag + suffix)


def check_d_equals_minus_delta(u_tag: str, a_tags: Iterable[str], w, suffix: str = "'",
                               state=None) -> TensorPoly:
    """``d_U(w) + δ_{UAU*}(w)`` on ``A ∨ UAU*``.

    Letters of ``w`` with tag ``t + suffix`` (``t`` in ``a_tags``) stand for
    ``U t U*``.  The derivation ``δ_{UAU*:A}`` is applied to these formal
    letters before substituting, so both sides are computed independently.
    ``state`` is accepted for interface symmetry and unused.
    """
    a_tags = frozenset(a_tags)
    f = _as_poly(w)
    conj_tags = {t + suffix for t in a_tags}
    stray = f.tags() - a_tags - conj_tags
    if stray:
        raise ValueError(f"word uses letters outside A and UAU*: {sorted(stray)}")
    U = NCPoly.letter(unitary(u_tag))
    Ustar = U.adjoint()
    sub = {}
    for s in f.letters():
        if s.tag in conj_tags:
            base = s._replace(tag=s.tag[: -len(suffix)])
            sub[s] = U * NCPoly.letter(base) * Ustar
    d_side = d_unitary(u_tag)(substitute(f, sub))
    delta_side = substitute_tensor(delta(frozenset(conj_tags))(f), sub)
    return d_side + delta_side


def check_freeconj_pairing(state: FreeState, u_tag: str, a_tags: Iterable[str], w) -> Scalar:
    """``(τ⊗τ)(d_{U:A}(w)) - (τ⊗τ)(d_U(E_{<U>}(w)))`` for ``A`` free from ``U``."""
    f = _as_poly(w)
    du = d_unitary(u_tag)
    lhs = state.tau_tensor(du(f))
    rhs = state.tau_tensor(du(state.cond_expect(f, {u_tag})))
    return lhs - rhs


def graddist_bound(norm_j: float) -> float:
    """``‖j‖ / sqrt(1 + ‖j‖²)``, the angle bound between two algebras."""
    if norm_j < 0:
        raise ValueError("norm_j must be nonnegative")
    if norm_j == float("inf"):
        return 1.0
    return norm_j / sqrt(1.0 + norm_j * norm_j)
