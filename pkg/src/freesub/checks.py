"""Check suites shared by the command line and the acceptance tests.

Each suite returns a list of :class:`CheckRecord`.  Exact suites report
their residual as a rational string (``"0/1"`` when the identity holds);
numeric suites report a float next to the tolerance it was held to.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .freeprob import (
    AlgebraSpec,
    FreeState,
    check_coalgebra_d,
    check_coalgebra_delta,
    check_d_equals_minus_delta,
    check_freeconj_pairing,
    liberation_pairing,
)
from .ncalg import (
    DIVERGENT,
    NCPoly,
    TensorPoly,
    d_unitary,
    delta,
    direct_rho,
    fdq,
    general,
    iterate_derivation,
    rho_series_eval,
    selfadjoint,
    smooth_norm_bound,
    unitary,
    verify_resolvent_series_d,
    verify_resolvent_series_delta,
)
from .ncalg.scalar import Scalar, format_rational

__all__ = [
    "CheckRecord",
    "rational_residual",
    "random_scalar",
    "random_poly",
    "random_real_spec",
    "random_circle_spec",
    "all_words",
    "algebra_suite",
    "coalgebra_suite",
    "rho_suite",
    "bounds_suite",
    "conj_record",
    "hilbert_suite",
]


@dataclass
class CheckRecord:
    name: str
    statement: str
    value: str | float
    tolerance: str | float
    passed: bool
    count: int = 1
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"check_name": self.name, "statement": self.statement, "value": self.value,
                "tolerance": self.tolerance, "pass": self.passed, "count": self.count,
                "detail": self.detail}


def rational_residual(x) -> Fraction:
    """Sum of ``|Re c| + |Im c|`` over the coefficients of a residual."""
    if isinstance(x, Scalar):
        return abs(x.re) + abs(x.im)
    return sum((abs(c.re) + abs(c.im) for _, c in x.terms.items()), Fraction(0))


def _exact(name: str, statement: str, residuals: Iterable, count: int | None = None,
           detail: dict | None = None) -> CheckRecord:
    total = Fraction(0)
    n = 0
    for r in residuals:
        total += rational_residual(r)
        n += 1
    return CheckRecord(name, statement, format_rational(total), "0/1", total == 0,
                       count if count is not None else n, detail or {})


# --------------------------------------------------------------------------
# random exact data


def random_scalar(rng: random.Random) -> Scalar:
    return Scalar(Fraction(rng.randint(-5, 5), rng.randint(1, 4)),
                  Fraction(rng.randint(-3, 3), rng.randint(1, 3)))


def random_poly(rng: random.Random, letters: Sequence, max_deg: int = 5, max_terms: int = 4) -> NCPoly:
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        w = tuple(rng.choice(letters) for _ in range(rng.randint(0, max_deg)))
        terms[w] = random_scalar(rng)
    return NCPoly(terms)


def _weights(rng: random.Random, k: int) -> list[Fraction]:
    raw = [rng.randint(1, 9) for _ in range(k)]
    s = sum(raw)
    return [Fraction(r, s) for r in raw]


def random_real_spec(rng: random.Random, tag: str, k: int = 3) -> AlgebraSpec:
    """Finitely supported law with rational atoms (moments of every order)."""
    pts = rng.sample(range(-6, 7), k)
    return AlgebraSpec.from_atoms(tag, "selfadjoint",
                                  [(Fraction(p, rng.randint(1, 3)), w)
                                   for p, w in zip(pts, _weights(rng, k))])


def _circle_point(t: Fraction) -> Scalar:
    d = 1 + t * t
    return Scalar((1 - t * t) / d, 2 * t / d)


def random_circle_spec(rng: random.Random, tag: str, k: int = 3) -> AlgebraSpec:
    """Finitely supported law on rational points of the unit circle."""
    seen = set()
    pts = []
    while len(pts) < k:
        t = Fraction(rng.randint(-4, 4), rng.randint(1, 4))
        if t not in seen:
            seen.add(t)
            pts.append(_circle_point(t))
    return AlgebraSpec.from_atoms(tag, "unitary", list(zip(pts, _weights(rng, k))))


def all_words(letters: Sequence, max_len: int, min_len: int = 0):
    for n in range(min_len, max_len + 1):
        yield from itertools.product(letters, repeat=n)


# --------------------------------------------------------------------------
# exact algebra


def _leibniz_residual(D, f: NCPoly, g: NCPoly) -> TensorPoly:
    return D(f * g) - (D(g).left_mul(f) + D(f).right_mul(g))


def _higher_leibniz_residual(D, p: int, f: NCPoly, g: NCPoly) -> TensorPoly:
    lhs = iterate_derivation(D, p, f * g)
    rhs = TensorPoly.zero(p + 1)
    for k in range(p + 1):
        left = iterate_derivation(D, k, f).pad_right(p - k)
        right = iterate_derivation(D, p - k, g).pad_left(k)
        rhs = rhs + left * right
    return lhs - rhs


def algebra_suite(seed: int, trials: int = 100, max_deg: int = 5, higher_p: int = 4,
                  higher_trials: int = 25, resolvent_K: int = 8, conj_len: int = 6) -> list[CheckRecord]:
    """Leibniz rules, ``D(1) = 0``, the resolvent series and ``d = -δ``."""
    rng = random.Random(seed)
    a, b = selfadjoint("a"), general("b")
    U, X = unitary("U"), selfadjoint("X")
    derivs = {
        "delta": (delta(frozenset({"a"})), [a, b]),
        "d": (d_unitary("U"), [U, U.star(), b]),
        "fdq": (fdq("X"), [X, b]),
    }
    out = []
    for name, (D, letters) in derivs.items():
        pairs = [(random_poly(rng, letters, max_deg), random_poly(rng, letters, max_deg))
                 for _ in range(trials)]
        out.append(_exact(f"leibniz_{name}", "D(fg) = (f⊗1)D(g) + D(f)(1⊗g)",
                          (_leibniz_residual(D, f, g) for f, g in pairs)))
        out.append(_exact(f"unit_{name}", "D(1) = 0", [D(NCPoly.one())]))
        small = [(random_poly(rng, letters, 3, 3), random_poly(rng, letters, 3, 3))
                 for _ in range(higher_trials)]
        out.append(_exact(
            f"higher_leibniz_{name}",
            "D^(p)(fg) = sum_k (D^(k)(f)⊗1^(p-k))(1^k⊗D^(p-k)(g))",
            (_higher_leibniz_residual(D, p, f, g) for f, g in small for p in range(higher_p + 1))))
    out.append(_exact("resolvent_series_d", "d(α) = (α+1)⊗α for α = Ub(1-Ub)^{-1}, degree-filtered",
                      (verify_resolvent_series_d("U", "b", K) for K in range(resolvent_K + 1))))
    out.append(_exact("resolvent_series_delta",
                      "δ((1+a)^{-1}) = -(1+a)^{-1} δ(a) (1+a)^{-1}, degree-filtered",
                      (verify_resolvent_series_delta({"a"}, "a", K) for K in range(resolvent_K + 1))))
    conj_letters = [selfadjoint("a1"), selfadjoint("a2"), selfadjoint("a1'"), selfadjoint("a2'")]
    out.append(_exact("d_equals_minus_delta", "d_U = -δ_{UAU*} on A ∨ UAU*",
                      (check_d_equals_minus_delta("U", {"a1", "a2"}, NCPoly.word(w))
                       for w in all_words(conj_letters, conj_len))))
    return out


def coalgebra_suite(seed: int, specs: int = 100, max_len: int = 6,
                    freeconj_len: int = 5) -> list[CheckRecord]:
    """Coalgebra-morphism identities and vanishing pairings over random free laws."""
    rng = random.Random(seed)
    a, c, b = selfadjoint("a"), selfadjoint("c"), selfadjoint("b")
    W = unitary("W")
    U = unitary("U")
    delta_res, d_res, lib_res, conj_res = [], [], [], []
    n_delta = n_d = n_lib = n_conj = 0
    for _ in range(specs):
        st = FreeState([random_real_spec(rng, "a"), random_real_spec(rng, "c")])
        for w in all_words([a, c], max_len):
            delta_res.append(check_coalgebra_delta(st, {"a"}, {"c"}, NCPoly.word(w)))
            n_delta += 1
        lib = FreeState([random_real_spec(rng, "a"), random_real_spec(rng, "b")])
        for w in all_words([a, b], max_len):
            lib_res.append(liberation_pairing(lib, {"a"}, NCPoly.word(w)))
            n_lib += 1
        uv = FreeState([random_circle_spec(rng, "U"), random_circle_spec(rng, "V")])
        for w in all_words([W, W.star()], max_len):
            d_res.append(check_coalgebra_d(uv, "U", "V", NCPoly.word(w)))
            n_d += 1
        ua = FreeState([random_circle_spec(rng, "U"), random_real_spec(rng, "a")])
        for w in all_words([U, U.star(), a], freeconj_len):
            conj_res.append(check_freeconj_pairing(ua, "U", {"a"}, NCPoly.word(w)))
            n_conj += 1
    return [
        _exact("coalgebra_delta", "(E_A⊗E_A)δ_A = δ_A E_A on A ∨ C, A free from C",
               delta_res, n_delta, {"specs": specs, "max_len": max_len}),
        _exact("coalgebra_d", "(E_U⊗E_U)d_{UV} = d_U E_U on the algebra of UV",
               d_res, n_d, {"specs": specs, "max_len": max_len}),
        _exact("liberation_pairing_free", "(τ⊗τ)δ_A(w) = 0 when A and B are free",
               lib_res, n_lib, {"specs": specs, "max_len": max_len}),
        _exact("freeconj_pairing", "(τ⊗τ)d_{U:A}(w) = (τ⊗τ)d_U(E_U(w)) for A free from U",
               conj_res, n_conj, {"specs": specs, "max_len": freeconj_len}),
    ]


# --------------------------------------------------------------------------
# conjugation series and smooth norms


def _contraction(rng: np.random.Generator, n: int, norm: float) -> np.ndarray:
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return m * (norm / np.linalg.norm(m, 2))


def rho_suite(seed: int, trials: int = 100, n: int = 8, max_norm: float = 0.3, max_deg: int = 3,
              p_max: int = 40, bound_pairs: int = 100, bound_R=Fraction(1, 4)) -> list[CheckRecord]:
    """Conjugation series against direct conjugation; smooth-norm submultiplicativity."""
    rng = random.Random(seed)
    nrng = np.random.default_rng(seed)
    a, b = selfadjoint("a"), general("b")
    worst = 0.0
    failures = 0
    for _ in range(trials):
        f = random_poly(rng, [a, b, a], max_deg, 4)
        ha = nrng.standard_normal((n, n)) + 1j * nrng.standard_normal((n, n))
        assignment = {"a": (ha + ha.conj().T) / 4, "b": nrng.standard_normal((n, n)) / 2}
        m = _contraction(nrng, n, max_norm * nrng.uniform(0.2, 1.0))
        series, tail = rho_series_eval(f, m, assignment, {"a"}, p_max)
        direct = direct_rho(f, m, assignment, {"a"})
        err = float(np.linalg.norm(series - direct, 2))
        allowed = max(1e-10, tail)
        worst = max(worst, err / allowed)
        failures += err > allowed
    series_rec = CheckRecord("rho_series", "Σ_p θ_p[m,...,m](δ^(p)(f)) = (1-m) f (1-m)^{-1} on split letters",
                             worst, 1.0, failures == 0, trials,
                             {"n": n, "max_norm": max_norm, "p_max": p_max,
                              "value_meaning": "max error / max(1e-10, tail bound)"})
    norms = {"a": 1.5, "b": 2.0}
    bad = 0
    worst_ratio = 0.0
    for _ in range(bound_pairs):
        f = random_poly(rng, [a, b], 3, 3)
        g = random_poly(rng, [a, b], 3, 3)
        bf = smooth_norm_bound(f, bound_R, norms, {"a"})
        bg = smooth_norm_bound(g, bound_R, norms, {"a"})
        bfg = smooth_norm_bound(f * g, bound_R, norms, {"a"})
        if DIVERGENT in (bf, bg, bfg):
            bad += 1
            continue
        ratio = bfg / (bf * bg) if bf * bg else 0.0
        worst_ratio = max(worst_ratio, ratio)
        bad += bfg > bf * bg * (1 + 1e-12)
    sub_rec = CheckRecord("smooth_norm_submultiplicative", "‖fg‖_R ≤ ‖f‖_R ‖g‖_R for the computed bounds",
                          worst_ratio, 1.0 + 1e-12, bad == 0, bound_pairs,
                          {"R": format_rational(Fraction(bound_R)),
                           "value_meaning": "max bound(fg) / (bound(f) bound(g))"})
    return [series_rec, sub_rec]


# --------------------------------------------------------------------------
# half-plane and disk lemmas


def bounds_suite(seed: int, count: int = 200, k: int = 3, tol: float = 1e-10) -> list[CheckRecord]:
    from .transforms import (
        MeasureR, disk_criterion_ii, half_plane_membership, matrix_cauchy_G,
        half_plane_inverse_bounds,
    )

    rng = np.random.default_rng(seed)
    worst_norm = worst_im = -np.inf
    for _ in range(count):
        re = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        re = (re + re.conj().T) / 2
        h = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        h = h @ h.conj().T + rng.uniform(0.05, 2.0) * np.eye(k)
        T = re + 1j * h
        r = half_plane_inverse_bounds(T)
        worst_norm = max(worst_norm, r["norm_inv"] - r["norm_inv_bound"])
        worst_im = max(worst_im, r["im_inv_top"] - r["im_inv_bound"])
    half = [
        CheckRecord("half_plane_inverse_norm", "Im T ≥ ε ⇒ ‖T^{-1}‖ ≤ 1/ε", float(worst_norm), tol,
                    worst_norm <= tol, count, {"value_meaning": "max(‖T^{-1}‖ - 1/ε)"}),
        CheckRecord("half_plane_inverse_imag", "Im T ≥ ε ⇒ Im T^{-1} ≤ -(ε + ‖T‖²/ε)^{-1}",
                    float(worst_im), tol, worst_im <= tol, count,
                    {"value_meaning": "max(λ_max(Im T^{-1}) + (ε + ‖T‖²/ε)^{-1})"}),
    ]
    agree = 0
    for _ in range(count):
        x = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        x *= rng.uniform(0.5, 1.5) / np.linalg.norm(x, 2)
        agree += bool(np.linalg.norm(x, 2) < 1) == disk_criterion_ii(x)
    disk = CheckRecord("disk_criteria_agree", "‖x‖ < 1 ⇔ 2 Re(1-x)^{-1} ≥ 1 + ε for some ε > 0",
                       float(count - agree), 0.0, agree == count, count,
                       {"value_meaning": "number of disagreements"})
    sc = MeasureR.semicircle()
    worst_g = -np.inf
    for _ in range(count // 4):
        b = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        b = b + 1j * (np.abs(np.linalg.eigvalsh((b - b.conj().T) / 2j)).max() + rng.uniform(0.1, 1.0)) * np.eye(k)
        eps = half_plane_membership(b)
        G = matrix_cauchy_G(sc, b)
        worst_g = max(worst_g, np.linalg.norm(G, 2) - 1.0 / eps)
    gate = CheckRecord("matrix_cauchy_norm", "‖G(b)‖ ≤ 1/ε for Im b ≥ ε", float(worst_g), tol,
                       worst_g <= tol, count // 4, {"value_meaning": "max(‖G(b)‖ - 1/ε)"})
    return half + [disk, gate]


# --------------------------------------------------------------------------
# Hilbert transform bound


def conj_record(r, ladder_tol: float = 1e-6) -> CheckRecord:
    """Record for one :class:`~freesub.hilbreg.ConjBoundResult`."""
    statement = ("|Hp(θ1) - θ1/(2π³ε²)| ≤ ε(2-ε)/(2π(1-ε))" if r.reference == "stated"
                 else "|Hp(θ1) + 4θ1/(π²ε²)| ≤ 2 sup|½cot(θ/2) - 1/θ|")
    return CheckRecord(f"conj_bound_eps_{r.epsilon}", statement, r.max_deviation,
                       r.bound + r.quad_error, bool(r.passed and r.ladder_spread <= ladder_tol),
                       len(r.theta1), {"epsilon": r.epsilon, "reference": r.reference,
                                       "ladder_spread": r.ladder_spread, "bound": r.bound,
                                       "ladder_tol": ladder_tol})


def hilbert_suite(epsilons: Sequence[float] = (0.05, 0.1, 0.25, 0.5, 0.75), grid_size: int = 41,
                  reference: str = "stated", ladder_tol: float = 1e-6,
                  workers: int | None = None) -> list[CheckRecord]:
    from .hilbreg import verify_conj_bound

    return [conj_record(verify_conj_bound(eps, grid_size, reference, workers=workers), ladder_tol)
            for eps in epsilons]
