"""Traces on free products, conditional expectations and the morphism identities.

The symbolic trace is cross-checked against an independent oracle: the
moment-cumulant formula over non-crossing partitions, in which mixed free
cumulants vanish.
"""

import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from freesub.checks import all_words, random_circle_spec, random_poly, random_real_spec
from freesub.freeprob import (
    AlgebraSpec,
    FreeState,
    InsufficientMomentOrder,
    MatrixState,
    check_coalgebra_d,
    check_coalgebra_delta,
    check_d_equals_minus_delta,
    check_freeconj_pairing,
    cond_expect,
    conjugate_pairing,
    graddist_bound,
    liberation_pairing,
    tau,
    tau_tensor,
)
from freesub.ncalg import NCPoly, Scalar, TensorPoly, derive_delta, selfadjoint, unitary

seeds = st.integers(0, 2**32 - 1)
one = NCPoly.one()


def L(s):
    return NCPoly.letter(s)


# -- free cumulant oracle ----------------------------------------------------


def nc_partitions(elems):
    """All non-crossing partitions of a tuple of positions."""
    if not elems:
        yield []
        return
    first, rest = elems[0], elems[1:]
    for k in range(len(rest) + 1):
        for chosen in itertools.combinations(range(len(rest)), k):
            block = (first,) + tuple(rest[i] for i in chosen)
            # the gaps between consecutive block members are partitioned independently
            cuts = (-1,) + chosen + (len(rest),)
            gaps = [rest[cuts[j] + 1:cuts[j + 1]] for j in range(len(cuts) - 1)]
            for parts in itertools.product(*(list(nc_partitions(g)) for g in gaps)):
                yield [block] + [b for p in parts for b in p]


def free_cumulants(moment, n):
    """``κ_1..κ_n`` from ``m_k = Σ_{π ∈ NC(k)} Π κ_{|V|}``."""
    kappa = {}
    for k in range(1, n + 1):
        rest = Fraction(0)
        for p in nc_partitions(tuple(range(k))):
            if len(p) == 1:
                continue
            rest += math.prod((kappa[len(b)] for b in p), start=Fraction(1))
        kappa[k] = moment(k) - rest
    return kappa


def oracle_tau(tags, cumulants):
    """Mixed moment of a word, a tuple of component tags, via free cumulants."""
    total = Fraction(0)
    for p in nc_partitions(tuple(range(len(tags)))):
        term = Fraction(1)
        for b in p:
            col = {tags[i] for i in b}
            if len(col) > 1:
                term = 0
                break
            term *= cumulants[tags[b[0]]][len(b)]
        total += term
    return total


def real_moment(spec):
    return lambda k: spec.moment(k).re


def test_nc_partition_counts_are_catalan():
    for n in range(7):
        assert sum(1 for _ in nc_partitions(tuple(range(n)))) == math.comb(2 * n, n) // (n + 1)


def test_semicircle_cumulants():
    k = free_cumulants(real_moment(AlgebraSpec.semicircle("X")), 6)
    assert k == {1: 0, 2: 1, 3: 0, 4: 0, 5: 0, 6: 0}


# -- tau -------------------------------------------------------------------


X, Y = selfadjoint("X"), selfadjoint("Y")


@pytest.fixture(scope="module")
def semis():
    return FreeState([AlgebraSpec.semicircle("X"), AlgebraSpec.semicircle("Y")])


def test_tau_empty_word(semis):
    assert semis.tau_word(()) == Scalar(1)


def test_tau_semicircle_examples(semis):
    assert tau(semis, (X, Y, X, Y)) == 0
    assert tau(semis, (X, X, Y, Y)) == 1


def test_tau_haar_products_vanish():
    st_ = FreeState([AlgebraSpec.haar("U"), AlgebraSpec.haar("V")])
    U, V = unitary("U"), unitary("V")
    for n in range(1, 7):
        assert tau(st_, (U, V) * n) == 0


def test_insufficient_order():
    st_ = FreeState([AlgebraSpec.semicircle("X", order=4), AlgebraSpec.semicircle("Y")])
    with pytest.raises(InsufficientMomentOrder):
        tau(st_, (X,) * 6)


@given(seeds)
def test_tau_matches_cumulant_oracle(seed):
    rng = random.Random(seed)
    sx, sy = random_real_spec(rng, "X"), random_real_spec(rng, "Y")
    state = FreeState([sx, sy])
    cum = {"X": free_cumulants(real_moment(sx), 8), "Y": free_cumulants(real_moment(sy), 8)}
    n = rng.randint(1, 8)
    tags = tuple(rng.choice("XY") for _ in range(n))
    w = tuple(X if t == "X" else Y for t in tags)
    assert tau(state, w) == oracle_tau(tags, cum)


def test_tau_matches_cumulant_oracle_exhaustive(semis):
    cum = {t: free_cumulants(real_moment(AlgebraSpec.semicircle(t)), 8) for t in "XY"}
    for tags in itertools.product("XY", repeat=6):
        w = tuple(X if t == "X" else Y for t in tags)
        assert tau(semis, w) == oracle_tau(tags, cum)


@given(seeds)
def test_unitary_positive_words_match_oracle(seed):
    # words in U, V without adjoints only involve the moments τ(U^k), τ(V^k)
    rng = random.Random(seed)
    su, sv = random_circle_spec(rng, "U"), random_circle_spec(rng, "V")
    state = FreeState([su, sv])

    def cum_of(spec):
        kappa = {}
        for k in range(1, 7):
            rest = Scalar(0)
            for p in nc_partitions(tuple(range(k))):
                if len(p) > 1:
                    term = Scalar(1)
                    for b in p:
                        term = term * kappa[len(b)]
                    rest = rest + term
            kappa[k] = spec.moment(k) - rest
        return kappa

    cum = {"U": cum_of(su), "V": cum_of(sv)}
    tags = tuple(rng.choice("UV") for _ in range(rng.randint(1, 6)))
    total = Scalar(0)
    for p in nc_partitions(tuple(range(len(tags)))):
        if all(len({tags[i] for i in b}) == 1 for b in p):
            term = Scalar(1)
            for b in p:
                term = term * cum[tags[b[0]]][len(b)]
            total = total + term
    assert tau(state, tuple(unitary(t) for t in tags)) == total


@given(seeds)
def test_tau_tracial(seed):
    rng = random.Random(seed)
    state = FreeState([random_real_spec(rng, "X"), random_circle_spec(rng, "U")])
    letters = [X, unitary("U"), unitary("U").star()]
    f, g = random_poly(rng, letters, 4), random_poly(rng, letters, 4)
    assert tau(state, f * g) == tau(state, g * f)


@given(seeds)
def test_tau_positive(seed):
    rng = random.Random(seed)
    state = FreeState([random_real_spec(rng, "X"), random_real_spec(rng, "Y")])
    f = random_poly(rng, [X, Y], 3, 4)
    v = tau(state, f.adjoint() * f)
    assert v.im == 0 and v.re >= 0


def test_tau_tensor_examples():
    a = selfadjoint("a")
    state = FreeState([AlgebraSpec.from_atoms("a", "selfadjoint", [(1, Fraction(1, 3)), (2, Fraction(2, 3))]),
                       AlgebraSpec.semicircle("b")])
    assert tau_tensor(state, TensorPoly.one(2)) == 1
    t = TensorPoly.simple(L(a), one) - TensorPoly.simple(one, L(a))
    assert tau_tensor(state, t) == 0
    # δ(aba) = a⊗ba - 1⊗aba + aba⊗1 - ab⊗a, paired slot by slot
    b = selfadjoint("b")
    ta = state.tau_word((a,))
    expected = (ta * state.tau_word((b, a)) - state.tau_word((a, b, a))
                + state.tau_word((a, b, a)) - state.tau_word((a, b)) * ta)
    assert tau_tensor(state, derive_delta({"a"}, L(a) * L(b) * L(a))) == expected


# -- conditional expectation ------------------------------------------------


a_s, c_s = selfadjoint("a"), selfadjoint("c")


def _ac_state(rng):
    return FreeState([random_real_spec(rng, "a"), random_real_spec(rng, "c")])


@given(seeds)
def test_cond_expect_examples(seed):
    state = _ac_state(random.Random(seed))
    a, c = L(a_s), L(c_s)
    tc = state.tau_word((c_s,))
    ta = state.tau_word((a_s,))
    assert cond_expect(state, a, {"a"}) == a
    assert cond_expect(state, a * c, {"a"}) == a.scale(tc)
    # E_A(c a c) with c1 = c2 = c
    tcc = state.tau_word((c_s, c_s))
    expected = a.scale(tc * tc) + one.scale(ta * (tcc - tc * tc))
    assert cond_expect(state, c * a * c, {"a"}) == expected


@given(seeds)
def test_cond_expect_properties(seed):
    rng = random.Random(seed)
    state = _ac_state(rng)
    f = random_poly(rng, [a_s, c_s], 5)
    g, h = random_poly(rng, [a_s], 2, 2), random_poly(rng, [a_s], 2, 2)
    e = cond_expect(state, f, {"a"})
    assert e.tags() <= {"a"}
    assert tau(state, e) == tau(state, f)
    assert cond_expect(state, e, {"a"}) == e
    assert cond_expect(state, g * f * h, {"a"}) == g * e * h


def test_cond_expect_defining_property():
    # τ(E(f) g) = τ(f g) for every g in the target algebra
    rng = random.Random(5)
    state = _ac_state(rng)
    f = random_poly(rng, [a_s, c_s], 5)
    e = cond_expect(state, f, {"a"})
    for k in range(4):
        g = NCPoly.word([a_s] * k)
        assert tau(state, e * g) == tau(state, f * g)


# -- pairings ----------------------------------------------------------------


def test_liberation_pairing_trivial_and_free():
    rng = random.Random(11)
    state = FreeState([random_real_spec(rng, "a"), random_real_spec(rng, "b")])
    b_s = selfadjoint("b")
    assert liberation_pairing(state, {"a"}, (b_s, b_s)) == 0
    for w in all_words([a_s, b_s], 6):
        assert liberation_pairing(state, {"a"}, w) == 0


def test_liberation_pairing_detects_dependence():
    # in a matrix model m and m' are not free: pairing of m m' is -τ(m m') when τ(m) = 0
    m = np.diag([1.0, -1.0, 0.0]).astype(complex)
    rng = np.random.default_rng(3)
    h = rng.standard_normal((3, 3))
    mp = h + h.T
    state = MatrixState({"m": m, "n": mp})
    w = (selfadjoint("m"), selfadjoint("n"))
    val = liberation_pairing(state, {"m"}, w)
    assert val == pytest.approx(-np.trace(m @ mp) / 3, abs=1e-14)
    assert abs(val) > 1e-3


def test_conjugate_pairing():
    rng = random.Random(2)
    spec = random_circle_spec(rng, "U")
    state = FreeState([spec])
    U = unitary("U")
    assert conjugate_pairing(state, "U", ()) == 0
    for n in range(1, 6):
        expected = sum((spec.moment(k) * spec.moment(n - k) for k in range(n)), Scalar(0))
        assert conjugate_pairing(state, "U", (U,) * n) == expected
    haar = FreeState([AlgebraSpec.haar("U")])
    assert conjugate_pairing(haar, "U", (U, U)) == 0


# -- morphism identities -------------------------------------------------------


@given(seeds)
def test_coalgebra_delta_examples(seed):
    state = _ac_state(random.Random(seed))
    assert check_coalgebra_delta(state, {"a"}, {"c"}, (a_s, a_s)).is_zero()
    assert check_coalgebra_delta(state, {"a"}, {"c"}, (a_s, c_s)).is_zero()


@given(seeds, st.integers(0, 4))
def test_coalgebra_delta_random_words(seed, n):
    rng = random.Random(seed)
    state = _ac_state(rng)
    w = tuple(rng.choice([a_s, c_s]) for _ in range(n + 2))
    assert check_coalgebra_delta(state, {"a"}, {"c"}, w).is_zero()


def test_coalgebra_delta_rejects_overlap():
    spec = AlgebraSpec.from_atoms("a", "selfadjoint", [(1, Fraction(1, 2)), (-1, Fraction(1, 2))])
    state = FreeState([spec])
    with pytest.raises(ValueError):
        check_coalgebra_delta(state, {"a"}, {"a"}, (a_s, a_s))


@given(seeds)
def test_coalgebra_d(seed):
    rng = random.Random(seed)
    state = FreeState([random_circle_spec(rng, "U"), random_circle_spec(rng, "V")])
    W = unitary("W")
    assert check_coalgebra_d(state, "U", "V", (W,)).is_zero()
    assert check_coalgebra_d(state, "U", "V", (W, W.star())).is_zero()
    for k in range(1, 6):
        assert check_coalgebra_d(state, "U", "V", (W,) * k).is_zero()


def test_coalgebra_d_one_step():
    rng = random.Random(0)
    state = FreeState([random_circle_spec(rng, "U"), random_circle_spec(rng, "V")])
    U = NCPoly.letter(unitary("U"))
    tv = state.tau_word((unitary("V"),))
    assert cond_expect(state, U * NCPoly.letter(unitary("V")), {"U"}) == U.scale(tv)


def test_d_equals_minus_delta():
    ap = selfadjoint("a'")
    a1, a2p = selfadjoint("a1"), selfadjoint("a2'")
    assert check_d_equals_minus_delta("U", {"a"}, (ap,)).is_zero()
    assert check_d_equals_minus_delta("U", {"a"}, (a_s,)).is_zero()
    assert check_d_equals_minus_delta("U", {"a1", "a2"}, (a1, a2p)).is_zero()


@given(seeds)
def test_d_equals_minus_delta_random(seed):
    rng = random.Random(seed)
    letters = [selfadjoint("a1"), selfadjoint("a2"), selfadjoint("a1'"), selfadjoint("a2'")]
    f = random_poly(rng, letters, 6)
    assert check_d_equals_minus_delta("U", {"a1", "a2"}, f).is_zero()


@given(seeds)
def test_freeconj_pairing(seed):
    rng = random.Random(seed)
    state = FreeState([random_circle_spec(rng, "U"), random_real_spec(rng, "a")])
    U = unitary("U")
    assert check_freeconj_pairing(state, "U", {"a"}, (a_s, a_s)) == 0
    assert check_freeconj_pairing(state, "U", {"a"}, (U, a_s)) == 0
    w = tuple(rng.choice([U, U.star(), a_s]) for _ in range(rng.randint(1, 5)))
    assert check_freeconj_pairing(state, "U", {"a"}, w) == 0


# -- specs ---------------------------------------------------------------------


def test_graddist_bound():
    assert graddist_bound(0) == 0
    assert graddist_bound(1) == pytest.approx(1 / math.sqrt(2))
    xs = np.linspace(0, 50, 200)
    vals = [graddist_bound(x) for x in xs]
    assert all(u < v for u, v in zip(vals, vals[1:]))
    assert graddist_bound(float("inf")) == 1.0
    with pytest.raises(ValueError):
        graddist_bound(-1)


@given(seeds)
def test_spec_json_round_trip(seed):
    rng = random.Random(seed)
    for spec in (random_real_spec(rng, "a"), random_circle_spec(rng, "U"),
                 AlgebraSpec.semicircle("X", 8)):
        back = AlgebraSpec.from_json(spec.to_json())
        assert all(back.moment(k) == spec.moment(k) for k in range(8))


def test_spec_validation():
    with pytest.raises(ValueError):
        AlgebraSpec.from_atoms("a", "selfadjoint", [(1, Fraction(1, 2))])
    with pytest.raises(ValueError):
        AlgebraSpec.from_atoms("U", "unitary", [(2, 1)])
    assert AlgebraSpec.semicircle("X").check_positive()
    assert AlgebraSpec.haar("U").check_positive()
    assert not AlgebraSpec("X", "selfadjoint", (1, 0, -1)).check_positive()
