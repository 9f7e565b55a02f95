"""Noncommutative polynomials and elements of algebraic tensor powers.

Words are tuples of :class:`GenSymbol`.  Every word stored in an
:class:`NCPoly` or :class:`TensorPoly` is reduced: adjacent ``U U*`` or
``U* U`` pairs of a unitary generator are cancelled eagerly.
"""

from __future__ import annotations

from typing import Iterable, Mapping, NamedTuple

from .scalar import ONE, ZERO, Scalar, as_scalar

__all__ = [
    "GenSymbol",
    "Word",
    "selfadjoint",
    "unitary",
    "general",
    "reduce_word",
    "word_adjoint",
    "NCPoly",
    "TensorPoly",
]

SELFADJOINT = "selfadjoint"
UNITARY = "unitary"
GENERAL = "general"
KINDS = (SELFADJOINT, UNITARY, GENERAL)


class GenSymbol(NamedTuple):
    tag: str
    index: int = 0
    starred: bool = False
    kind: str = GENERAL

    @property
    def base(self) -> tuple[str, int]:
        return (self.tag, self.index)

    def star(self) -> "GenSymbol":
        if self.kind == SELFADJOINT:
            return self
        return self._replace(starred=not self.starred)

    @property
    def name(self) -> str:
        s = self.tag if self.index == 0 else f"{self.tag}{self.index}"
        return s + "*" if self.starred else s

    def __repr__(self):
        return self.name


Word = tuple  # tuple[GenSymbol, ...]


def selfadjoint(tag: str, index: int = 0) -> GenSymbol:
    return GenSymbol(tag, index, False, SELFADJOINT)


def unitary(tag: str, index: int = 0, starred: bool = False) -> GenSymbol:
    return GenSymbol(tag, index, starred, UNITARY)


def general(tag: str, index: int = 0, starred: bool = False) -> GenSymbol:
    return GenSymbol(tag, index, starred, GENERAL)


def _cancels(x: GenSymbol, y: GenSymbol) -> bool:
    return (x.kind == UNITARY and y.kind == UNITARY and x.tag == y.tag
            and x.index == y.index and x.starred != y.starred)


def reduce_word(letters: Iterable[GenSymbol]) -> Word:
    out: list[GenSymbol] = []
    for s in letters:
        if s.kind == SELFADJOINT and s.starred:
            s = s._replace(starred=False)
        if out and _cancels(out[-1], s):
            out.pop()
        else:
            out.append(s)
    return tuple(out)


def _concat(u: Word, v: Word) -> Word:
    # both inputs are reduced, so cancellation only happens at the seam
    if not u:
        return v
    if not v:
        return u
    i = 0
    n = min(len(u), len(v))
    while i < n and _cancels(u[-1 - i], v[i]):
        i += 1
    if i == 0:
        return u + v
    return u[: len(u) - i] + v[i:]


def word_adjoint(w: Word) -> Word:
    return tuple(s.star() for s in reversed(w))


def _add_into(acc: dict, key, c: Scalar) -> None:
    v = acc.get(key)
    if v is None:
        acc[key] = c
    else:
        v = v + c
        if v:
            acc[key] = v
        else:
            del acc[key]


class NCPoly:
    """Finite linear combination of reduced words with :class:`Scalar` coefficients."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping | None = None, *, _trusted: bool = False):
        if _trusted:
            self.terms = terms
        else:
            acc: dict = {}
            for w, c in (terms or {}).items():
                c = as_scalar(c)
                if c is NotImplemented:
                    raise TypeError(f"bad coefficient {c!r}")
                if c:
                    _add_into(acc, reduce_word(w), c)
            self.terms = acc
        self._hash = None

    # constructors
    @classmethod
    def zero(cls) -> "NCPoly":
        return cls({}, _trusted=True)

    @classmethod
    def one(cls) -> "NCPoly":
        return cls({(): ONE}, _trusted=True)

    @classmethod
    def const(cls, c) -> "NCPoly":
        c = as_scalar(c)
        return cls({(): c} if c else {}, _trusted=True)

    @classmethod
    def letter(cls, s: GenSymbol) -> "NCPoly":
        return cls({reduce_word((s,)): ONE}, _trusted=True)

    @classmethod
    def word(cls, letters: Iterable[GenSymbol], coeff=ONE) -> "NCPoly":
        return cls({tuple(letters): coeff})

    # ring structure
    def __add__(self, other):
        other = _coerce_poly(other)
        if other is NotImplemented:
            return NotImplemented
        acc = dict(self.terms)
        for w, c in other.terms.items():
            _add_into(acc, w, c)
        return NCPoly(acc, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return NCPoly({w: -c for w, c in self.terms.items()}, _trusted=True)

    def __sub__(self, other):
        other = _coerce_poly(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce_poly(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def scale(self, c) -> "NCPoly":
        c = as_scalar(c)
        if not c:
            return NCPoly.zero()
        return NCPoly({w: v * c for w, v in self.terms.items()}, _trusted=True)

    def __mul__(self, other):
        if isinstance(other, NCPoly):
            acc: dict = {}
            for u, a in self.terms.items():
                for v, b in other.terms.items():
                    _add_into(acc, _concat(u, v), a * b)
            return NCPoly(acc, _trusted=True)
        c = as_scalar(other)
        if c is NotImplemented:
            return NotImplemented
        return self.scale(c)

    def __rmul__(self, other):
        c = as_scalar(other)
        if c is NotImplemented:
            return NotImplemented
        return self.scale(c)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = NCPoly.one()
        for _ in range(k):
            out = out * self
        return out

    def adjoint(self) -> "NCPoly":
        return NCPoly({word_adjoint(w): c.conjugate() for w, c in self.terms.items()},
                      _trusted=True)

    # queries
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def coeff(self, w: Word) -> Scalar:
        return self.terms.get(reduce_word(w), ZERO)

    def letters(self) -> set[GenSymbol]:
        return {s for w in self.terms for s in w}

    def tags(self) -> set[str]:
        return {s.tag for w in self.terms for s in w}

    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=-1)

    def scalar_part(self) -> Scalar:
        return self.terms.get((), ZERO)

    def is_scalar(self) -> bool:
        return all(not w for w in self.terms)

    def __eq__(self, other):
        other = _coerce_poly(other)
        if other is NotImplemented:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __iter__(self):
        return iter(self.terms.items())

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for w, c in sorted(self.terms.items(), key=lambda t: (len(t[0]), [s.name for s in t[0]])):
            word = "".join(s.name for s in w) or "1"
            parts.append(word if c == 1 else f"{c}*{word}")
        return " + ".join(parts)


def _coerce_poly(x):
    if isinstance(x, NCPoly):
        return x
    c = as_scalar(x)
    if c is NotImplemented:
        return NotImplemented
    return NCPoly.const(c)


class TensorPoly:
    """Element of the ``order``-fold algebraic tensor power.

    Terms are keyed by tuples of reduced words, one per slot.  The
    bimodule actions multiply the first slot on the left and the last
    slot on the right; ``*`` between tensors of equal order is slotwise.
    """

    __slots__ = ("order", "terms", "_hash")

    def __init__(self, order: int, terms: Mapping | None = None, *, _trusted: bool = False):
        if order < 1:
            raise ValueError("tensor order must be >= 1")
        self.order = order
        if _trusted:
            self.terms = terms
        else:
            acc: dict = {}
            for key, c in (terms or {}).items():
                if len(key) != order:
                    raise ValueError(f"term {key!r} does not have {order} slots")
                c = as_scalar(c)
                if c:
                    _add_into(acc, tuple(reduce_word(w) for w in key), c)
            self.terms = acc
        self._hash = None

    @classmethod
    def zero(cls, order: int) -> "TensorPoly":
        return cls(order, {}, _trusted=True)

    @classmethod
    def one(cls, order: int) -> "TensorPoly":
        return cls(order, {((),) * order: ONE}, _trusted=True)

    @classmethod
    def embed(cls, f: NCPoly) -> "TensorPoly":
        return cls(1, {(w,): c for w, c in f.terms.items()}, _trusted=True)

    @classmethod
    def simple(cls, *factors: NCPoly) -> "TensorPoly":
        """``f1 ⊗ f2 ⊗ ... ⊗ fs`` expanded over words."""
        t = cls.embed(factors[0])
        for f in factors[1:]:
            t = t.tensor(cls.embed(f))
        return t

    def _check(self, other: "TensorPoly") -> None:
        if other.order != self.order:
            raise ValueError(f"order mismatch: {self.order} vs {other.order}")

    def __add__(self, other):
        if not isinstance(other, TensorPoly):
            return NotImplemented
        self._check(other)
        acc = dict(self.terms)
        for k, c in other.terms.items():
            _add_into(acc, k, c)
        return TensorPoly(self.order, acc, _trusted=True)

    def __neg__(self):
        return TensorPoly(self.order, {k: -c for k, c in self.terms.items()}, _trusted=True)

    def __sub__(self, other):
        if not isinstance(other, TensorPoly):
            return NotImplemented
        return self + (-other)

    def scale(self, c) -> "TensorPoly":
        c = as_scalar(c)
        if not c:
            return TensorPoly.zero(self.order)
        return TensorPoly(self.order, {k: v * c for k, v in self.terms.items()}, _trusted=True)

    def __mul__(self, other):
        if isinstance(other, TensorPoly):
            self._check(other)
            acc: dict = {}
            for k1, a in self.terms.items():
                for k2, b in other.terms.items():
                    key = tuple(_concat(u, v) for u, v in zip(k1, k2))
                    _add_into(acc, key, a * b)
            return TensorPoly(self.order, acc, _trusted=True)
        c = as_scalar(other)
        if c is NotImplemented:
            return NotImplemented
        return self.scale(c)

    def __rmul__(self, other):
        c = as_scalar(other)
        if c is NotImplemented:
            return NotImplemented
        return self.scale(c)

    def left_mul(self, f: NCPoly) -> "TensorPoly":
        """``(f ⊗ 1 ⊗ ... ⊗ 1) · self``."""
        acc: dict = {}
        for u, a in f.terms.items():
            for key, b in self.terms.items():
                _add_into(acc, (_concat(u, key[0]),) + key[1:], a * b)
        return TensorPoly(self.order, acc, _trusted=True)

    def right_mul(self, f: NCPoly) -> "TensorPoly":
        """``self · (1 ⊗ ... ⊗ 1 ⊗ f)``."""
        acc: dict = {}
        for key, b in self.terms.items():
            for v, a in f.terms.items():
                _add_into(acc, key[:-1] + (_concat(key[-1], v),), b * a)
        return TensorPoly(self.order, acc, _trusted=True)

    def tensor(self, other: "TensorPoly") -> "TensorPoly":
        acc: dict = {}
        for k1, a in self.terms.items():
            for k2, b in other.terms.items():
                _add_into(acc, k1 + k2, a * b)
        return TensorPoly(self.order + other.order, acc, _trusted=True)

    def pad_left(self, k: int) -> "TensorPoly":
        """``1^{⊗k} ⊗ self``."""
        if k == 0:
            return self
        return TensorPoly(self.order + k, {((),) * k + key: c for key, c in self.terms.items()},
                          _trusted=True)

    def pad_right(self, k: int) -> "TensorPoly":
        """``self ⊗ 1^{⊗k}``."""
        if k == 0:
            return self
        return TensorPoly(self.order + k, {key + ((),) * k: c for key, c in self.terms.items()},
                          _trusted=True)

    def map_slots(self, fn) -> "TensorPoly":
        """Apply a linear map ``word -> NCPoly`` independently in every slot."""
        out = TensorPoly.zero(self.order)
        cache: dict = {}
        for key, c in self.terms.items():
            parts = []
            for w in key:
                if w not in cache:
                    cache[w] = fn(w)
                parts.append(cache[w])
            if any(p.is_zero() for p in parts):
                continue
            out = out + TensorPoly.simple(*parts).scale(c)
        return out

    def filter(self, keep) -> "TensorPoly":
        return TensorPoly(self.order, {k: c for k, c in self.terms.items() if keep(k)},
                          _trusted=True)

    def to_poly(self) -> NCPoly:
        if self.order != 1:
            raise ValueError("only order-1 tensors convert to polynomials")
        return NCPoly({k[0]: c for k, c in self.terms.items()}, _trusted=True)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, TensorPoly):
            return NotImplemented
        return self.order == other.order and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.order, frozenset(self.terms.items())))
        return self._hash

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def __repr__(self):
        if not self.terms:
            return f"0[order {self.order}]"
        parts = []
        for key, c in sorted(self.terms.items(), key=lambda t: [[s.name for s in w] for w in t[0]]):
            body = "⊗".join("".join(s.name for s in w) or "1" for w in key)
            parts.append(body if c == 1 else f"{c}*{body}")
        return " + ".join(parts)
