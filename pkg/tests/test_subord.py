import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from freesub.subord import (
    DEGENERATE,
    Degenerate,
    NonConvergence,
    SolverConfig,
    additive_subord,
    additive_subord_grid,
    mult_series_subord,
    mult_unitary_subord,
    resolvent_identity_check,
    taylor_coefficients,
)
from freesub.transforms import (
    MeasureR,
    MeasureT,
    arcsine_G,
    cauchy_G,
    psi_transform,
    semicircle_G,
    stieltjes_invert,
)

upper = st.builds(complex, st.floats(-4, 4), st.floats(0.1, 4))
disk = st.builds(lambda r, t: r * cmath.exp(1j * t), st.floats(0.01, 0.9), st.floats(0, 2 * math.pi))

SC = MeasureR.semicircle()
U_LAW = MeasureT.from_atoms([(("3/5", "4/5"), "1/2"), (1, "1/2")])
V_LAW = MeasureT.from_atoms([((0, 1), "1/3"), (1, "2/3")])


def _rand_upper(rng, k, eps=0.2):
    h = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    g = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    return (h + h.conj().T) / 2 + 1j * (g @ g.conj().T / k + eps * np.eye(k))


# -- additive, scalar ---------------------------------------------------------


@given(upper, st.floats(-2, 2))
def test_shift_by_dirac(z, c):
    mu = MeasureR.atoms([(-1, 0.3), (0.5, 0.7)])
    r = additive_subord(mu, MeasureR.dirac(c), z)
    assert r.omega1 == pytest.approx(z - c, abs=1e-10)
    assert r.transform_value == pytest.approx(cauchy_G(mu, z - c), abs=1e-10)


def test_semicircle_plus_semicircle():
    rng = np.random.default_rng(0)
    zs = rng.uniform(-3, 3, 50) + 1j * rng.uniform(0.5, 3, 50)
    for z in zs:
        r = additive_subord(SC, SC, z, SolverConfig(tol=1e-13))
        assert abs(r.transform_value - semicircle_G(z, 2.0)) <= 1e-10


@pytest.mark.parametrize("a,lo", [(1.0, 2.0), (1 / math.sqrt(2), math.sqrt(2))])
def test_bernoulli_square_is_arcsine(a, lo):
    ber = MeasureR.bernoulli(a)
    for z in (0.3 + 0.5j, -1.2 + 1j, 2.5 + 0.6j, 0.1 + 2j):
        r = additive_subord(ber, ber, z)
        assert r.transform_value == pytest.approx(arcsine_G(z, -lo, lo), abs=1e-10)


def test_arcsine_density_recovered():
    ber = MeasureR.bernoulli(1 / math.sqrt(2))
    x = np.linspace(-1.3, 1.3, 27)
    eta = 1e-3
    # near the axis the contraction rate is close to 1, so allow many steps
    cfg = SolverConfig(tol=1e-8, max_iter=200_000)
    g = np.array([additive_subord(ber, ber, xi + 1j * eta, cfg).transform_value for xi in x])
    est = stieltjes_invert(g, x, eta)
    true = 1 / (math.pi * np.sqrt(2 - x * x))
    assert np.max(np.abs(est.density - true)) <= 5e-3


@given(upper)
def test_omega_gains_imaginary_part(z):
    r = additive_subord(SC, MeasureR.bernoulli(0.8), z)
    assert r.omega1.imag >= z.imag - 1e-12
    assert r.omega2.imag >= z.imag - 1e-12
    assert r.transform_value.imag < 0


def test_rejects_real_point():
    with pytest.raises(ValueError):
        additive_subord(SC, SC, 0.5)


def test_nonconvergence_carries_last_iterate():
    with pytest.raises(NonConvergence) as info:
        additive_subord(SC, MeasureR.bernoulli(1.0), 0.1 + 0.05j, SolverConfig(max_iter=1))
    assert info.value.result.iterations == 1
    assert info.value.result.residual > 0


@pytest.mark.parametrize("kw", [{"tol": 0}, {"max_iter": 0}, {"damping": 0}, {"damping": 1.5}])
def test_solver_config_validation(kw):
    with pytest.raises(ValueError):
        SolverConfig(**kw)


def test_damping_reaches_same_fixed_point():
    z = 0.4 + 0.3j
    a = additive_subord(SC, MeasureR.bernoulli(1.0), z)
    b = additive_subord(SC, MeasureR.bernoulli(1.0), z, SolverConfig(damping=0.5))
    assert a.transform_value == pytest.approx(b.transform_value, abs=1e-11)


def test_grid_workers_identical():
    zs = np.linspace(-2, 2, 9) + 0.7j
    serial = additive_subord_grid(SC, SC, zs)
    threaded = additive_subord_grid(SC, SC, zs, workers=2)
    assert [r.to_json() for r in serial] == [r.to_json() for r in threaded]


# -- additive, matrix argument --------------------------------------------------


def test_matrix_k1_matches_scalar():
    z = -0.7 + 0.45j
    mu, nu = SC, MeasureR.bernoulli(0.9)
    m = additive_subord(mu, nu, np.array([[z]]))
    s = additive_subord(mu, nu, z)
    assert m.transform_value[0, 0] == pytest.approx(s.transform_value, abs=1e-11)


def test_matrix_diagonal_decouples():
    z1, z2 = 0.3 + 0.8j, -1.1 + 0.4j
    m = additive_subord(SC, SC, np.diag([z1, z2]))
    g = m.transform_value
    assert abs(g[0, 1]) < 1e-12 and abs(g[1, 0]) < 1e-12
    assert g[0, 0] == pytest.approx(semicircle_G(z1, 2.0), abs=1e-10)
    assert g[1, 1] == pytest.approx(semicircle_G(z2, 2.0), abs=1e-10)


def _matrix_semicircle_oracle(b, variance):
    # G = (b - σ² G)^{-1}, solved by averaged iteration
    g = np.linalg.inv(b)
    for _ in range(5000):
        new = 0.5 * (g + np.linalg.inv(b - variance * g))
        if np.linalg.norm(new - g, 2) < 1e-15:
            break
        g = new
    return g


def test_matrix_semicircle_oracle():
    rng = np.random.default_rng(4)
    for _ in range(5):
        b = _rand_upper(rng, 3)
        g = additive_subord(SC, SC, b, SolverConfig(tol=1e-12)).transform_value
        assert np.linalg.norm(g - _matrix_semicircle_oracle(b, 2.0), 2) <= 1e-9


def test_resolvent_identity_random():
    rng = np.random.default_rng(5)
    nu = MeasureR.atoms([(-1.0, 0.25), (0.5, 0.75)])
    for _ in range(10):
        assert resolvent_identity_check(SC, nu, _rand_upper(rng, 2)) <= 1e-9


def test_matrix_rejects_non_member():
    with pytest.raises(ValueError):
        additive_subord(SC, SC, np.eye(2))


# -- multiplicative -----------------------------------------------------------


@given(disk)
def test_mult_schwarz(z):
    r = mult_unitary_subord(U_LAW, V_LAW, z)
    assert abs(r.omega1) <= abs(z) * (1 + 1e-12)
    assert abs(r.omega2) <= abs(z) * (1 + 1e-12)


@given(disk, st.fractions(-5, 5, max_denominator=20))
def test_mult_dirac_rotation(z, s):
    # rational point on the circle
    re, im = (1 - s * s) / (1 + s * s), 2 * s / (1 + s * s)
    lam = complex(re, im)
    r = mult_unitary_subord(U_LAW, MeasureT.from_atoms([((re, im), 1)]), z)
    # UV = λU, so ψ_{UV}(z) = ψ_U(λz)
    assert r.omega1 == pytest.approx(lam * z, abs=1e-10)
    assert r.transform_value == pytest.approx(psi_transform(U_LAW, lam * z), abs=1e-10)


def test_mult_haar_is_degenerate():
    r = mult_unitary_subord(MeasureT.haar_measure(), V_LAW, 0.3 + 0.1j)
    assert r.status == DEGENERATE and r.omega1 is None and r.transform_value == 0


def test_mult_centered_pair_is_degenerate():
    sym = MeasureT.from_atoms([(1, "1/2"), (-1, "1/2")])
    assert mult_unitary_subord(sym, sym, 0.2).status == DEGENERATE
    with pytest.raises(Degenerate):
        mult_series_subord(sym, sym, 4)


def test_mult_first_two_coefficients():
    # for free a, b: τ(ab) = τa τb and
    # τ(abab) = τ(a²) τb² + τa² τ(b²) - τa² τb²
    u1, u2 = complex(U_LAW.exact_moment(1)), complex(U_LAW.exact_moment(2))
    v1, v2 = complex(V_LAW.exact_moment(1)), complex(V_LAW.exact_moment(2))
    c = taylor_coefficients(lambda z: mult_unitary_subord(U_LAW, V_LAW, z).transform_value, 3, radius=0.3)
    assert c[0] == pytest.approx(0, abs=1e-12)
    assert c[1] == pytest.approx(u1 * v1, abs=1e-10)
    assert c[2] == pytest.approx(u2 * v1 ** 2 + u1 ** 2 * v2 - u1 ** 2 * v1 ** 2, abs=1e-10)


def test_series_first_coefficient_is_tau_V():
    w = mult_series_subord(U_LAW, V_LAW, 3)
    assert w[0] == 0 and w[1] == V_LAW.exact_moment(1)


def test_series_matches_fft_coefficients():
    N = 8
    exact = np.array([complex(c) for c in mult_series_subord(U_LAW, V_LAW, N)])
    fft = taylor_coefficients(lambda z: mult_unitary_subord(U_LAW, V_LAW, z).omega1 if z else 0j, N,
                              radius=0.4, M=64)
    assert np.max(np.abs(exact - fft)) <= 1e-6
    assert np.max(np.abs(exact[:6] - fft[:6])) <= 1e-8


def test_solver_agrees_with_series_near_zero():
    w = [complex(c) for c in mult_series_subord(U_LAW, V_LAW, 10)]
    for z in 0.15 * np.exp(2j * np.pi * np.arange(6) / 6):
        r = mult_unitary_subord(U_LAW, V_LAW, z)
        assert r.residual <= 1e-10
        assert abs(r.omega1 - sum(c * z ** k for k, c in enumerate(w))) <= 1e-7


def test_taylor_coefficients_exp():
    c = taylor_coefficients(np.exp, 6)
    assert np.allclose(c, [1 / math.factorial(k) for k in range(7)], atol=1e-13)
    with pytest.raises(ValueError):
        taylor_coefficients(np.exp, 10, M=8)


def test_mult_rejects_outside_disk():
    with pytest.raises(ValueError):
        mult_unitary_subord(U_LAW, V_LAW, 1.0)
