"""Derivation-comultiplications on words and their leftmost-slot iterates.

Three derivations are provided, each determined by its values on letters
and extended by the Leibniz rule ``D(fg) = (f⊗1)·D(g) + D(f)·(1⊗g)``:

* :func:`derive_delta`: split letters ``a`` map to ``a⊗1 - 1⊗a``,
  all other letters to 0;
* :func:`derive_d`: ``U -> 1⊗U``, ``U* -> -U*⊗1``, other letters to 0;
* :func:`derive_fdq`: the free difference quotient, ``X -> 1⊗1``.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable

from .poly import SELFADJOINT, UNITARY, NCPoly, TensorPoly, Word, _add_into, _concat
from .scalar import ONE

__all__ = [
    "Derivation",
    "delta",
    "d_unitary",
    "fdq",
    "derive_delta",
    "derive_d",
    "derive_fdq",
    "iterate_derivation",
    "substitute",
    "substitute_tensor",
]

_MINUS_ONE = -ONE


class Derivation:
    """A derivation ``A -> A ⊗ A`` fixed by its letter images.

    ``letter_image(s)`` returns a list of ``(left_word, right_word, coeff)``
    triples, or an empty list when the letter is killed.
    """

    def __init__(self, name: str, key: tuple):
        self.name = name
        self.key = key
        self._word_cache: dict = {}

    def letter_image(self, s) -> list:
        raise NotImplementedError

    def __eq__(self, other):
        return isinstance(other, Derivation) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"<{self.name}>"

    def apply_word(self, w: Word) -> dict:
        """Terms ``{(left, right): coeff}`` of D applied to a single reduced word."""
        hit = self._word_cache.get(w)
        if hit is not None:
            return hit
        acc: dict = {}
        for i, s in enumerate(w):
            img = self.letter_image(s)
            if not img:
                continue
            prefix, suffix = w[:i], w[i + 1:]
            for left, right, c in img:
                _add_into(acc, (_concat(prefix, left), _concat(right, suffix)), c)
        self._word_cache[w] = acc
        return acc

    def __call__(self, f: NCPoly) -> TensorPoly:
        acc: dict = {}
        for w, c in f.terms.items():
            for key, v in self.apply_word(w).items():
                _add_into(acc, key, v * c)
        return TensorPoly(2, acc, _trusted=True)

    def apply_leftmost(self, t: TensorPoly) -> TensorPoly:
        """``(D ⊗ id^{⊗(s-1)})(t)``."""
        acc: dict = {}
        for key, c in t.terms.items():
            for (left, right), v in self.apply_word(key[0]).items():
                _add_into(acc, (left, right) + key[1:], v * c)
        return TensorPoly(t.order + 1, acc, _trusted=True)


class _Delta(Derivation):
    def __init__(self, split_tags: Iterable[str]):
        split = frozenset(split_tags)
        super().__init__(f"delta[{','.join(sorted(split))}]", ("delta", split))
        self.split = split

    def letter_image(self, s):
        if s.tag not in self.split:
            return ()
        return (((s,), (), ONE), ((), (s,), _MINUS_ONE))


class _DUnitary(Derivation):
    def __init__(self, u_tag: str):
        super().__init__(f"d[{u_tag}]", ("d", u_tag))
        self.u_tag = u_tag

    def letter_image(self, s):
        if s.tag != self.u_tag:
            return ()
        if s.kind != UNITARY:
            raise ValueError(f"letter {s.name} is not a unitary symbol")
        if s.starred:
            return (((s,), (), _MINUS_ONE),)
        return (((), (s,), ONE),)


class _FDQ(Derivation):
    def __init__(self, x_tag: str):
        super().__init__(f"fdq[{x_tag}]", ("fdq", x_tag))
        self.x_tag = x_tag

    def letter_image(self, s):
        if s.tag != self.x_tag:
            return ()
        if s.kind != SELFADJOINT:
            raise ValueError(f"free difference quotient needs a selfadjoint letter, got {s.name}")
        return (((), (), ONE),)


@lru_cache(maxsize=None)
def delta(split_tags: frozenset) -> Derivation:
    return _Delta(split_tags)


@lru_cache(maxsize=None)
def d_unitary(u_tag: str) -> Derivation:
    return _DUnitary(u_tag)


@lru_cache(maxsize=None)
def fdq(x_tag: str) -> Derivation:
    return _FDQ(x_tag)


def derive_delta(split_tags: Iterable[str], f: NCPoly) -> TensorPoly:
    return delta(frozenset(split_tags))(f)


def derive_d(u_tag: str, f: NCPoly) -> TensorPoly:
    return d_unitary(u_tag)(f)


def derive_fdq(x_tag: str, f: NCPoly) -> TensorPoly:
    return fdq(x_tag)(f)


def iterate_derivation(deriv: Derivation, p: int, f: NCPoly) -> TensorPoly:
    """``D^{(p)}(f)``, with ``D^{(0)} = id`` and ``D^{(p+1)} = (D ⊗ id^{⊗p}) ∘ D^{(p)}``."""
    if p < 0:
        raise ValueError("p must be >= 0")
    t = TensorPoly.embed(f)
    for _ in range(p):
        if t.is_zero():
            return TensorPoly.zero(p + 1)
        t = deriv.apply_leftmost(t)
    return t


def substitute(f: NCPoly, mapping: dict) -> NCPoly:
    """Algebra homomorphism sending letters (or their base) to polynomials.

    ``mapping`` is keyed by :class:`GenSymbol`; a starred letter missing from
    the mapping is sent to the adjoint of its unstarred image when present.
    Unmapped letters are left alone.
    """
    def image(s):
        if s in mapping:
            return mapping[s]
        if s.starred and s.star() in mapping:
            return mapping[s.star()].adjoint()
        return NCPoly.letter(s)

    out = NCPoly.zero()
    for w, c in f.terms.items():
        term = NCPoly.const(c)
        for s in w:
            term = term * image(s)
        out = out + term
    return out


def substitute_tensor(t: TensorPoly, mapping: dict) -> TensorPoly:
    return t.map_slots(lambda w: substitute(NCPoly({w: ONE}, _trusted=True), mapping))
