import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from freesub.checks import random_poly, rational_residual
from freesub.ncalg import (
    DIVERGENT,
    NCPoly,
    Scalar,
    TensorPoly,
    d_unitary,
    delta,
    derive_d,
    derive_delta,
    derive_fdq,
    direct_rho,
    eval_matrix,
    fdq,
    general,
    iterate_derivation,
    rho_series_eval,
    selfadjoint,
    smooth_norm_bound,
    theta_contract,
    unitary,
    verify_resolvent_series_d,
    verify_resolvent_series_delta,
)
from freesub.ncalg.serialize import dumps, loads

a_s, b_s, c_s = selfadjoint("a"), general("b"), general("c")
U_s, X_s = unitary("U"), selfadjoint("X")
a, b, c = NCPoly.letter(a_s), NCPoly.letter(b_s), NCPoly.letter(c_s)
U, Us, X = NCPoly.letter(U_s), NCPoly.letter(U_s.star()), NCPoly.letter(X_s)
one = NCPoly.one()
I = Scalar(0, 1)

seeds = st.integers(0, 2**32 - 1)


def T(*factors):
    return TensorPoly.simple(*factors)


# -- polynomial arithmetic --------------------------------------------------


def test_concatenation():
    assert a * b == NCPoly.word([a_s, b_s])


def test_telescoping():
    assert (one + a) * (one - a) == one - a * a


def test_unitary_reduction():
    assert U * Us == one
    assert Us * U == one
    assert (U * b * Us * U).degree() == 2


def test_adjoint_antilinear():
    f = (a * b).scale(I)
    assert f.adjoint() == (NCPoly.letter(b_s.star()) * a).scale(-I)
    assert U.adjoint() == Us


@given(seeds)
def test_adjoint_involution(seed):
    rng = random.Random(seed)
    f = random_poly(rng, [a_s, b_s, U_s, U_s.star()])
    assert f.adjoint().adjoint() == f


@given(seeds, seeds)
def test_adjoint_reverses_products(s1, s2):
    f = random_poly(random.Random(s1), [a_s, b_s, U_s])
    g = random_poly(random.Random(s2), [a_s, b_s, U_s])
    assert (f * g).adjoint() == g.adjoint() * f.adjoint()


@given(seeds)
def test_serialization_round_trip(seed):
    rng = random.Random(seed)
    f = random_poly(rng, [a_s, b_s, U_s, U_s.star()])
    assert loads(dumps(f)) == f
    t = derive_delta({"a"}, f)
    assert loads(dumps(t)) == t


# -- derivations ------------------------------------------------------------


def test_delta_letters():
    assert derive_delta({"a"}, a) == T(a, one) - T(one, a)
    assert derive_delta({"a"}, b).is_zero()


def test_delta_aba_hand_expansion():
    expected = T(a, b * a) - T(one, a * b * a) + T(a * b * a, one) - T(a * b, a)
    assert derive_delta({"a"}, a * b * a) == expected


def test_d_unitary_letters():
    assert derive_d("U", U) == T(one, U)
    assert derive_d("U", Us) == T(Us, one).scale(-1)
    assert derive_d("U", U * U) == T(one, U * U) + T(U, U)


def test_fdq():
    bp = NCPoly.letter(general("c"))
    assert derive_fdq("X", X) == T(one, one)
    assert derive_fdq("X", b * X * bp) == T(b, bp)
    assert derive_fdq("X", X * X) == T(one, X) + T(X, one)


def test_iterated_delta():
    D = delta(frozenset({"a"}))
    f = a * b + b
    assert iterate_derivation(D, 0, f) == TensorPoly.embed(f)
    assert iterate_derivation(D, 2, a) == T(a, one, one) - T(one, a, one)
    for p in range(1, 5):
        assert iterate_derivation(D, p, b).is_zero()


DERIVS = [
    (delta(frozenset({"a"})), [a_s, b_s]),
    (d_unitary("U"), [U_s, U_s.star(), b_s]),
    (fdq("X"), [X_s, b_s]),
]


@pytest.mark.parametrize("D,letters", DERIVS, ids=["delta", "d", "fdq"])
@given(seed=seeds)
def test_leibniz(D, letters, seed):
    rng = random.Random(seed)
    f, g = random_poly(rng, letters), random_poly(rng, letters)
    lhs = D(f * g)
    rhs = D(g).left_mul(f) + D(f).right_mul(g)
    assert lhs == rhs
    assert D(one).is_zero()


@pytest.mark.parametrize("D,letters", DERIVS, ids=["delta", "d", "fdq"])
@given(seed=seeds, p=st.integers(0, 4))
def test_higher_leibniz(D, letters, seed, p):
    rng = random.Random(seed)
    f, g = random_poly(rng, letters, 3, 3), random_poly(rng, letters, 3, 3)
    rhs = TensorPoly.zero(p + 1)
    for k in range(p + 1):
        rhs = rhs + iterate_derivation(D, k, f).pad_right(p - k) * iterate_derivation(D, p - k, g).pad_left(k)
    assert iterate_derivation(D, p, f * g) == rhs


@given(seeds)
def test_derivation_linear(seed):
    rng = random.Random(seed)
    f, g = random_poly(rng, [a_s, b_s]), random_poly(rng, [a_s, b_s])
    k = Scalar(Fraction(rng.randint(-4, 4), 3), Fraction(1, 2))
    D = delta(frozenset({"a"}))
    assert D(f.scale(k) + g) == D(f).scale(k) + D(g)


# -- resolvent identities ---------------------------------------------------


def test_resolvent_series_small_orders():
    assert verify_resolvent_series_d("U", "b", 0).is_zero()
    assert verify_resolvent_series_d("U", "b", 1).is_zero()
    assert verify_resolvent_series_d("U", "b", 2).is_zero()
    assert verify_resolvent_series_delta({"a"}, "a", 0).is_zero()
    assert verify_resolvent_series_delta({"a"}, "a", 1).is_zero()
    assert verify_resolvent_series_delta({"a"}, "a", 3).is_zero()


def test_resolvent_one_step_by_hand():
    ub = U * b
    assert derive_d("U", ub) == T(one, ub)
    # δ(1 - a) + (a⊗1 - 1⊗a) = 0
    assert (derive_delta({"a"}, one - a) + T(a, one) - T(one, a)).is_zero()


def test_resolvent_residual_detects_wrong_identity():
    # dropping the cross term (α⊗α) must leave a nonzero residual
    ub = U * b
    alpha = ub + ub * ub
    wrong = derive_d("U", alpha) - T(one, alpha)
    assert rational_residual(wrong) > 0


# -- matrix evaluation ------------------------------------------------------


@pytest.fixture
def mats():
    rng = np.random.default_rng(0)
    h = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    return {"a": (h + h.conj().T) / 4, "b": rng.standard_normal((4, 4)) / 2}


def test_eval_homomorphism(mats):
    assert np.allclose(eval_matrix(one, mats), np.eye(4))
    assert np.allclose(eval_matrix(a * b, mats), mats["a"] @ mats["b"])
    assert np.allclose(eval_matrix(T(a, b), mats), np.kron(mats["a"], mats["b"]))


def test_eval_exact_object_dtype():
    m = np.empty((2, 2), dtype=object)
    m[:] = [[Scalar(1), Scalar(Fraction(1, 2))], [Scalar(0), Scalar(0, 1)]]
    out = eval_matrix(a * a + one, {"a": m})
    half = Fraction(1, 2)
    assert out[0, 0] == Scalar(2)
    assert out[0, 1] == Scalar(half, half)
    assert out[1, 0] == Scalar(0)
    assert out[1, 1] == Scalar(0)


def test_theta_contract(mats):
    rng = np.random.default_rng(1)
    m = rng.standard_normal((4, 4)) * 0.1
    assert np.allclose(theta_contract([], TensorPoly.embed(a * b), mats), mats["a"] @ mats["b"])
    assert np.allclose(theta_contract([m], T(a, b), mats), mats["a"] @ m @ mats["b"])
    assert np.allclose(theta_contract([m, m], T(one, a, one), mats), m @ mats["a"] @ m)


def _contraction(n, norm, seed):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return m * norm / np.linalg.norm(m, 2)


def test_rho_series_trivial_and_split(mats):
    m = _contraction(4, 0.3, 2)
    val, tail = rho_series_eval(b, m, mats, {"a"})
    assert np.array_equal(val, eval_matrix(b, mats).astype(complex)) and tail == 0
    val, tail = rho_series_eval(a, m, mats, {"a"})
    one_m = np.eye(4) - m
    assert np.linalg.norm(val - one_m @ mats["a"] @ np.linalg.inv(one_m), 2) <= max(1e-10, tail)


def test_rho_series_ab(mats):
    m = _contraction(4, 0.3, 3)
    val, tail = rho_series_eval(a * b, m, mats, {"a"}, p_max=40)
    assert np.linalg.norm(val - direct_rho(a * b, m, mats, {"a"}), 2) <= 1e-10


@given(seeds)
def test_rho_series_matches_direct(seed):
    rng = random.Random(seed)
    f = random_poly(rng, [a_s, b_s], 3, 3)
    nrng = np.random.default_rng(seed)
    h = nrng.standard_normal((5, 5)) + 1j * nrng.standard_normal((5, 5))
    asg = {"a": (h + h.conj().T) / 4, "b": nrng.standard_normal((5, 5)) / 2}
    m = _contraction(5, 0.3 * nrng.uniform(0.1, 1), seed)
    val, tail = rho_series_eval(f, m, asg, {"a"}, p_max=40)
    assert np.linalg.norm(val - direct_rho(f, m, asg, {"a"}), 2) <= max(1e-10, tail)


# -- smooth norms -----------------------------------------------------------


def test_smooth_norm_examples():
    assert smooth_norm_bound(b, Fraction(1, 3), {"b": 2.0}, {"a"}) == 2.0
    # δ^(p)(a) has two terms of norm ‖a‖; the sum is ‖a‖(1 + 2R/(1-R))
    assert smooth_norm_bound(a, Fraction(1, 4), {"a": 1.5}, {"a"}) == pytest.approx(1.5 * 5 / 3, rel=1e-12)


def test_smooth_norm_divergent_geometric_tail():
    f = a * b * a * b * a
    assert smooth_norm_bound(f, 0.25, {"a": 1.0, "b": 1.0}, {"a"}, tail="geometric") is DIVERGENT
    assert smooth_norm_bound(f, 0.25, {"a": 1.0, "b": 1.0}, {"a"}) is not DIVERGENT


def test_smooth_norm_run_tail_dominates_truncation():
    # cutoff 16 plus tail must bound a much later cutoff sum
    f = a * b * a + b * a
    lo = smooth_norm_bound(f, 0.3, {"a": 1.0, "b": 1.0}, {"a"}, cutoff=3)
    hi = smooth_norm_bound(f, 0.3, {"a": 1.0, "b": 1.0}, {"a"}, cutoff=14)
    assert hi <= lo * (1 + 1e-12)


@given(seeds)
def test_smooth_norm_submultiplicative(seed):
    rng = random.Random(seed)
    f, g = random_poly(rng, [a_s, b_s], 3, 3), random_poly(rng, [a_s, b_s], 3, 3)
    norms = {"a": 1.5, "b": 2.0}
    R = Fraction(1, 4)
    bf, bg = smooth_norm_bound(f, R, norms, {"a"}), smooth_norm_bound(g, R, norms, {"a"})
    assert smooth_norm_bound(f * g, R, norms, {"a"}) <= bf * bg * (1 + 1e-12)
