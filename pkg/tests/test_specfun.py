import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from mslevy.specfun import (
    ParamLists,
    PoleError,
    SeriesControl,
    bessel_K,
    delta_list,
    gauss_legendre_check,
    ln_gamma,
    parabolic_cylinder_D,
    pochhammer,
    phyper,
    reflection_check,
    whittaker_W,
)


# ------------------------------------------------------------ ln_gamma


@pytest.mark.parametrize("z,expected", [(1, 0.0), (0.5, math.log(math.sqrt(math.pi))), (6, math.log(120))])
def test_ln_gamma_values(z, expected):
    assert abs(ln_gamma(z) - expected) < 1e-14


def test_ln_gamma_pole():
    with pytest.raises(PoleError):
        ln_gamma(-3)


# ---------------------------------------------------------- identities


def test_reflection_half():
    assert reflection_check(0.5) < 1e-13


def test_reflection_third():
    # both sides evaluated independently here
    lhs = math.gamma(1 / 3) * math.gamma(2 / 3)
    rhs = math.pi / math.sin(math.pi / 3)
    assert abs(lhs - rhs) / rhs < 1e-14
    assert reflection_check(1 / 3) < 1e-12


def test_reflection_pole():
    with pytest.raises(PoleError):
        reflection_check(0)


def test_multiplication_trivial():
    assert gauss_legendre_check(1, 2) < 1e-13


@pytest.mark.parametrize("a,n", [(1 / 3, 3), (0.7, 4)])
def test_multiplication_derived(a, n):
    lhs = math.gamma(n * a)
    rhs = (2 * math.pi) ** (0.5 * (1 - n)) * n ** (n * a - 0.5) * math.prod(math.gamma(a + j / n) for j in range(n))
    assert abs(lhs - rhs) / lhs < 1e-13
    assert gauss_legendre_check(a, n) < 1e-12


def test_identities_random_grid():
    rng = np.random.default_rng(7)
    for _ in range(200):
        z = complex(rng.uniform(-6, 6), rng.uniform(-3, 3))
        if abs(z.imag) < 1e-3 and abs(z.real - round(z.real)) < 1e-3:
            continue
        assert reflection_check(z) < 1e-12
        a = complex(rng.uniform(0.05, 4), rng.uniform(-2, 2))
        assert gauss_legendre_check(a, int(rng.integers(1, 6))) < 1e-12


# ---------------------------------------------------------- pochhammer


def test_pochhammer_examples():
    assert pochhammer(3.7, 0) == 1
    assert pochhammer(1, 5) == 120
    assert pochhammer(0.5, 2) == 0.5 * 1.5 == 0.75


@settings(max_examples=200, deadline=None)
@given(st.floats(-5, 5, allow_nan=False), st.integers(0, 10), st.integers(0, 10))
def test_pochhammer_split(a, m, n):
    whole = pochhammer(a, m + n)
    parts = pochhammer(a, m) * pochhammer(a + m, n)
    assert abs(whole - parts) <= 1e-13 * max(abs(whole), 1e-300) or whole == parts


# -------------------------------------------------------------- phyper


def test_phyper_at_zero():
    v, _, _ = phyper(ParamLists([0.3, 1.2], [2.5]), 0.0)
    assert v == 1


def test_phyper_exponential():
    v, _, _ = phyper(ParamLists([], []), 1.0)
    assert abs(v - math.e) < 1e-15


def test_phyper_brute_force():
    a, b, x = 5 / 6, 2 / 3, -0.1
    brute = math.fsum(special.poch(a, n) / special.poch(b, n) * x**n / math.factorial(n) for n in range(50))
    v, _, _ = phyper(ParamLists([a], [b]), x)
    assert abs(v - brute) < 1e-12


def test_phyper_terminating_polynomial():
    # 2F1(-3, 1; 1; x) = (1 - x)^3
    v, n, _ = phyper(ParamLists([-3, 1], [1]), 0.4)
    assert abs(v - 0.6**3) < 1e-15
    assert n <= 4


def test_phyper_monotone_consistency():
    params = ParamLists([0.5, 1.25], [1 / 3, 1.5, 2.0])
    loose = SeriesControl(abs_tol=1e-8, rel_tol=1e-8)
    tight = SeriesControl(abs_tol=5e-9, rel_tol=5e-9)
    for x in (-3.0, -0.5, 0.7, 2.5):
        v1, _, e1 = phyper(params, x, loose)
        v2, _, _ = phyper(params, x, tight)
        assert abs(v1 - v2) <= e1


# ------------------------------------------------------------ delta_list


def test_delta_list_examples():
    assert delta_list(1, 0.7) == [0.7]
    assert delta_list(2, 1) == [0.5, 1.0]
    assert delta_list(3, 0) == [0.0, 1 / 3, 2 / 3]


@pytest.mark.parametrize("n,a", [(1, 2.5), (4, 0.3), (7, -1.0), (12, 5.0)])
def test_delta_list_mean(n, a):
    assert abs(np.mean(delta_list(n, a)) - (a / n + (n - 1) / (2 * n))) < 1e-14


# ------------------------------------------------- D, K, W vs quadrature


def _pcf_quad(nu, z):
    # D_nu(z) = sqrt(2/pi) e^{z^2/4} int_0^inf e^{-s^2/2} s^nu cos(z s - nu pi/2) ds, nu > -1
    f = lambda s: math.exp(-s * s / 2) * s**nu * math.cos(z * s - nu * math.pi / 2)
    val, _ = integrate.quad(f, 0, np.inf, epsabs=1e-14, epsrel=1e-13, limit=200)
    return math.sqrt(2 / math.pi) * math.exp(z * z / 4) * val


def test_pcf_nu0():
    oracle = _pcf_quad(0.0, 1.0)
    assert abs(oracle - math.exp(-0.25)) < 1e-12
    assert abs(parabolic_cylinder_D(0, 1) - oracle) < 1e-10
    assert abs(parabolic_cylinder_D(0, 1) - 0.7788007831) < 1e-10


def test_pcf_nu1():
    assert abs(_pcf_quad(1.0, 0.0)) < 1e-12
    assert abs(parabolic_cylinder_D(1, 0)) < 1e-14


def test_pcf_nu_half():
    oracle = _pcf_quad(0.5, 0.0)
    assert abs(parabolic_cylinder_D(0.5, 0.0) - oracle) < 1e-10 * abs(oracle)


@pytest.mark.parametrize("nu,z", [(1.5, -2.0), (3.0, 1.5), (0.25, 4.0), (7.0, -3.0)])
def test_pcf_grid(nu, z):
    oracle = _pcf_quad(nu, z)
    assert abs(parabolic_cylinder_D(nu, z) - oracle) < 1e-9 * max(abs(oracle), 1)


def _bessel_quad(nu, z):
    f = lambda u: math.exp(-z * math.cosh(u)) * math.cosh(nu * u)
    # the integrand is below 1e-300 beyond u = acosh(700 / z)
    return integrate.quad(f, 0, math.acosh(700 / z), epsabs=1e-15, epsrel=1e-13, limit=200)[0]


def test_bessel_half():
    assert abs(bessel_K(0.5, 1.0) - math.sqrt(math.pi / 2) * math.exp(-1)) < 1e-14
    assert abs(bessel_K(0.5, 1.0) - 0.4610685044) < 1e-10


def test_bessel_third_at_density_argument():
    z = 2 / 3**1.5  # t = x = 1 argument of the alpha = 1/3 closed form
    oracle = _bessel_quad(1 / 3, z)
    assert abs(bessel_K(1 / 3, z) - oracle) < 1e-10 * oracle


def test_bessel_third_large_z():
    z = 30.0
    ratio = bessel_K(1 / 3, z) / (math.sqrt(math.pi / (2 * z)) * math.exp(-z))
    assert abs(ratio - 1) < 0.01


def _whittaker_quad(kappa, mu, z):
    # W = e^{-z/2} z^{mu+1/2} U(a, b, z), U(a,b,z) = 1/Gamma(a) int e^{-zs} s^{a-1} (1+s)^{b-a-1} ds;
    # the substitution s = r^(1/a) removes the endpoint singularity
    a, b = mu - kappa + 0.5, 1 + 2 * mu
    f = lambda r: math.exp(-z * r ** (1 / a)) * (1 + r ** (1 / a)) ** (b - a - 1) / a
    U = integrate.quad(f, 0, np.inf, epsabs=1e-15, epsrel=1e-13, limit=400)[0] / math.gamma(a)
    return math.exp(-z / 2) * z ** (mu + 0.5) * U


def test_whittaker_oracle():
    oracle = _whittaker_quad(0.5, 1 / 6, 1.0)
    assert abs(whittaker_W(0.5, 1 / 6, 1.0) - oracle) < 1e-10 * oracle


def test_whittaker_small_z_finite():
    for z in (1e-3, 1e-8, 1e-14):
        assert math.isfinite(whittaker_W(0.5, 1 / 6, z))


def test_whittaker_through_two_thirds_density():
    from mslevy.oracle import MultiscaleSpec, invert_fourier
    from mslevy.stable import StableComponent

    z = 4 / 27
    oracle_w = _whittaker_quad(0.5, 1 / 6, z)
    assert abs(whittaker_W(0.5, 1 / 6, z) - oracle_w) < 1e-10 * oracle_w
    # v_{2/3}(1, 1) = sqrt(3/pi) e^{-z/2} W(z) at z = 4/27
    closed = math.sqrt(3 / math.pi) * math.exp(-z / 2) * whittaker_W(0.5, 1 / 6, z)
    fourier = invert_fourier(MultiscaleSpec([StableComponent(2 / 3, -2 / 3)]), 1.0, 1.0)
    assert abs(closed - fourier) < 1e-8


def test_evaluators_reject_out_of_range():
    with pytest.raises(ValueError):
        bessel_K(1 / 3, 0.0)
    with pytest.raises(ValueError):
        parabolic_cylinder_D(-2.0, 1.0)
    with pytest.raises(ValueError):
        whittaker_W(0.5, 1.5, 1.0)
