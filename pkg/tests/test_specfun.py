import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from pcfm.errors import DomainError, EvaluationError
from pcfm.specfun import EvalTolerance, hyp2f3_half, poly_phase_integral, sin_integral

# frozen oracle values (see test_*_oracle below for how they were produced)
SI_1 = 0.946083070367183
SI_10 = 1.658347594218874
H_1 = 0.98181079939135809
PPI_60 = complex(-0.539864087547396046, 0.640743651688147715)


def _h_pochhammer(x, terms=30):
    s = mpmath.mpf(0)
    for k in range(terms):
        s += mpmath.rf(0.5, k) ** 2 / mpmath.rf(1.5, k) ** 3 * (-mpmath.mpf(x) ** 2 / 4) ** k / mpmath.factorial(k)
    return s


def test_si_1_oracle():
    v, _ = quad(lambda t: math.sin(t) / t if t else 1.0, 0.0, 1.0, epsabs=0, epsrel=1e-13)
    assert v == pytest.approx(SI_1, rel=1e-14)


def test_si_10_oracle():
    x = mpmath.mpf(10)
    s = sum((-1) ** k * x ** (2 * k + 1) / ((2 * k + 1) * mpmath.factorial(2 * k + 1)) for k in range(60))
    assert float(s) == pytest.approx(SI_10, rel=1e-15)


def test_h_1_oracle():
    assert float(_h_pochhammer(1.0)) == pytest.approx(H_1, rel=1e-16)


def test_phase_integral_oracle():
    c = [0.3, -0.01, 2e-4]
    f = lambda z: (c[0] + c[1] * z + c[2] * z * z) * mpmath.expj(0.7 * z)
    with mpmath.workdps(30):
        v = mpmath.quad(f, mpmath.linspace(0, 60, 40))
    assert abs(complex(v) - PPI_60) < 1e-15


def test_si_values():
    assert sin_integral(0.0) == 0.0
    assert sin_integral(1.0) == pytest.approx(SI_1, rel=1e-12)
    assert sin_integral(10.0) == pytest.approx(SI_10, rel=1e-12)


@pytest.mark.parametrize("x", [1e-8, 0.3, 3.9, 4.0, 4.1, 7.5, 25.0, 300.0, 9999.0])
def test_si_against_mpmath(x):
    assert sin_integral(x) == pytest.approx(float(mpmath.si(x)), rel=1e-12)


@given(st.floats(min_value=-1e4, max_value=1e4, allow_nan=False))
def test_si_odd(x):
    assert sin_integral(-x) == -sin_integral(x)


@given(st.floats(min_value=10.0, max_value=1e4))
def test_si_asymptote(x):
    assert abs(sin_integral(x) - math.pi / 2) <= 2.0 / x


def test_si_vectorized_and_domain():
    x = np.array([-2.0, 0.0, 5.0])
    np.testing.assert_allclose(sin_integral(x), [float(mpmath.si(v)) for v in x], rtol=1e-12)
    with pytest.raises(DomainError):
        sin_integral(float("nan"))
    with pytest.raises(DomainError):
        sin_integral(float("inf"))


def test_h_values():
    assert hyp2f3_half(0.0) == 1.0
    assert hyp2f3_half(1.0) == pytest.approx(H_1, rel=1e-10)


@pytest.mark.parametrize("x", [0.5, 3.0, 20.0])
def test_h_even(x):
    assert hyp2f3_half(-x) == hyp2f3_half(x)


@pytest.mark.parametrize("x", [0.01, 2.0, 11.9, 12.0, 12.1, 40.0, 150.0, 499.0])
def test_h_against_mpmath(x):
    ref = float(mpmath.hyp2f3(0.5, 0.5, 1.5, 1.5, 1.5, -(mpmath.mpf(x) ** 2) / 4))
    assert hyp2f3_half(x) == pytest.approx(ref, rel=1e-10)


def test_h_evaluation_error_carries_partial_sum():
    with pytest.raises(EvaluationError) as info:
        hyp2f3_half(10.0, EvalTolerance(rel_tol=1e-16, max_terms=3))
    assert info.value.terms == 3
    assert info.value.partial_sum is not None


def test_eval_tolerance_validation():
    with pytest.raises(DomainError):
        EvalTolerance(rel_tol=0.0)
    with pytest.raises(DomainError):
        EvalTolerance(max_terms=0)


def test_phase_integral_examples():
    assert poly_phase_integral([1.0], 100.0, 0.0) == pytest.approx(100.0 + 0j, rel=1e-15)
    th, L = 0.37, 80.0
    expect = (np.exp(1j * th * L) - 1) / (1j * th)
    assert abs(poly_phase_integral([1.0], L, th) - expect) <= 1e-13 * abs(expect)
    v = poly_phase_integral([0.3, -0.01, 2e-4], 60.0, 0.7)
    assert abs(v - PPI_60) <= 1e-12 * abs(PPI_60)


def test_phase_integral_theta_limit():
    c = [1.0, -0.02, 1e-4, -3e-7]
    v0 = poly_phase_integral(c, 100.0, 0.0)
    v1 = poly_phase_integral(c, 100.0, 1e-12)
    assert abs(v1 - v0) <= 1e-9 * abs(v0)


@given(
    st.lists(st.floats(-1, 1), min_size=1, max_size=10),
    st.lists(st.floats(-1, 1), min_size=1, max_size=10),
    st.floats(-2, 2),
    st.floats(-3, 3),
    st.floats(-1.0, 1.0),
)
def test_phase_integral_linear(p, q, a, b, theta):
    L = 50.0
    n = max(len(p), len(q))
    p = np.pad(p, (0, n - len(p))) / L ** np.arange(n)
    q = np.pad(q, (0, n - len(q))) / L ** np.arange(n)
    lhs = poly_phase_integral(a * p + b * q, L, theta)
    rhs = a * poly_phase_integral(p, L, theta) + b * poly_phase_integral(q, L, theta)
    scale = L * (abs(a) + abs(b)) * n
    assert abs(lhs - rhs) <= 1e-12 * scale


@given(st.floats(-5.0, 5.0), st.integers(0, 9))
def test_phase_integral_matches_mpmath(theta, deg):
    rng = np.random.default_rng(deg)
    L = 100.0
    c = rng.uniform(-1, 1, deg + 1) / L ** np.arange(deg + 1)
    with mpmath.workdps(30):
        f = lambda z: sum(float(ci) * z**i for i, ci in enumerate(c)) * mpmath.expj(theta * z)
        ref = complex(mpmath.quad(f, mpmath.linspace(0, L, 2 + int(abs(theta) * L / 3))))
    v = poly_phase_integral(c, L, theta)
    assert abs(v - ref) <= 1e-10 * max(abs(ref), L * 1e-3)


def test_phase_integral_vector_theta_and_domain():
    th = np.array([0.0, 0.1, -0.1])
    v = poly_phase_integral([1.0], 10.0, th)
    assert v.shape == (3,)
    assert v[1] == pytest.approx(np.conj(v[2]))
    with pytest.raises(DomainError):
        poly_phase_integral([1.0], 0.0, 0.1)
    with pytest.raises(DomainError):
        poly_phase_integral([np.nan], 1.0, 0.1)
