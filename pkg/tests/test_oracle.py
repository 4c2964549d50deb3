import cmath
import io
import math
import warnings

import numpy as np
import pytest
from scipy import integrate

from mslevy.oracle import (
    DecayWarning,
    DensityProfile,
    GridMismatchError,
    MultiscaleSpec,
    QuadControl,
    char_exponent,
    convolve_grid,
    invert_fourier,
    oracle_profile,
    read_profile_csv,
    write_profile_csv,
)
from mslevy.stable import StableComponent, density_closed


def test_spec_ordering():
    with pytest.raises(ValueError):
        MultiscaleSpec([(2, 0, 1), (1.5, -0.5, 1)])
    with pytest.raises(ValueError):
        MultiscaleSpec([])


# ------------------------------------------------------- char_exponent


def test_char_exponent_examples():
    spec = MultiscaleSpec([(2, 0, 1), (0.5, -0.5, 1)][::-1])
    assert char_exponent(spec, 0.0) == 0
    assert abs(char_exponent(MultiscaleSpec([(2, 0, 1)]), 1.0) + 1) < 1e-16
    val = char_exponent(MultiscaleSpec([(0.5, -0.5, 1)]), 1.0)
    assert abs(val + cmath.exp(-0.25j * math.pi)) < 1e-15


def test_char_exponent_hermitian_and_dissipative():
    spec = MultiscaleSpec([(0.5, -0.5, 1), (1.5, 0.3, 2.0), (2, 0, 0.5)])
    w = np.random.default_rng(3).normal(scale=10, size=10_000)
    assert np.max(np.abs(char_exponent(spec, -w) - np.conj(char_exponent(spec, w)))) < 1e-12
    grid = np.concatenate([-np.logspace(-6, 4, 200), np.logspace(-6, 4, 200)])
    for s in (spec, MultiscaleSpec([(1 / 3, -1 / 3, 1)]), MultiscaleSpec([(1.5, -0.5, 1)])):
        assert np.all(char_exponent(s, grid).real < 0)


# ------------------------------------------------------- invert_fourier


def test_invert_gauss_origin():
    assert abs(invert_fourier(MultiscaleSpec([(2, 0, 1)]), 1.0, 0.0) - 1 / (2 * math.sqrt(math.pi))) < 1e-12


def test_invert_bigauss_origin():
    v = invert_fourier(MultiscaleSpec([(2, 0, 1), (2, 0, 1)]), 1.0, 0.0)
    assert abs(v - 1 / (2 * math.sqrt(2 * math.pi))) < 1e-12
    assert abs(v - 0.1994711) < 1e-7


def test_invert_levy_smirnov():
    v, err = invert_fourier(MultiscaleSpec([(0.5, -0.5, 1)]), 1.0, 1.0, return_error=True)
    assert abs(v - math.exp(-0.25) / (2 * math.sqrt(math.pi))) < 1e-10
    assert abs(v - 0.2196956) < 1e-7
    assert err < 1e-8


def test_invert_normalisation():
    spec = MultiscaleSpec([(1.5, -0.5, 1), (2, 0, 1)])
    f = lambda x: invert_fourier(spec, 1.0, x)
    body = sum(integrate.quad(f, a, b, limit=200, epsabs=1e-12)[0] for a, b in [(-400, -20), (-20, 0), (0, 20)])
    # heavy left tail beyond -400 from the local power law, light right tail beyond 20 negligible
    tail = 400 * f(-400.0) / 1.5
    assert abs(body + tail - 1) < 1e-6


def test_quad_control_validation():
    with pytest.raises(ValueError):
        QuadControl(tol=0)
    with pytest.raises(ValueError):
        QuadControl(panels=0)


# -------------------------------------------------------- convolution


def _profile(name, t, x):
    return DensityProfile(x, [density_closed(name, t, v) for v in x], t, name, "closed:" + name)


def test_convolve_gaussians():
    N, L = 4096, 80.0
    x = np.linspace(-L, L, N + 1)
    g = _profile("gauss", 1.0, x)
    out = convolve_grid(g, g)
    exact = np.array([density_closed("gauss", 2.0, v) for v in x])
    assert np.max(np.abs(out.value - exact)) < 1e-6


def test_convolve_delta_identity():
    x = np.linspace(-20, 20, 801)
    f = _profile("gauss", 1.0, x)
    delta = np.zeros_like(x)
    delta[400] = 1 / f.dx
    out = convolve_grid(f, DensityProfile(x, delta, 1.0))
    assert np.max(np.abs(out.value - f.value)) < 1e-15


def test_convolve_levy_smirnov():
    # the convolution at x only uses values on [0, x]; truncation of the heavy tail is harmless
    x = np.linspace(-50, 50, 2**14 + 1)
    f = _profile("levy_smirnov", 1.0, x)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DecayWarning)
        out = convolve_grid(f, f)
    mask = (x > 0.5) & (x < 40)
    exact = np.array([density_closed("levy_smirnov", 2.0, v) for v in x[mask]])
    assert np.max(np.abs(out.value[mask] - exact)) < 1e-5


def test_convolve_warns_on_edge_mass():
    x = np.linspace(-10, 10, 401)
    f = _profile("levy_smirnov", 1.0, x)
    with pytest.warns(DecayWarning):
        convolve_grid(f, f)


def test_convolve_rejects_mismatch():
    a = _profile("gauss", 1.0, np.linspace(-10, 10, 201))
    b = _profile("gauss", 1.0, np.linspace(-10, 10, 401))
    with pytest.raises(GridMismatchError):
        convolve_grid(a, b)
    c = _profile("gauss", 2.0, np.linspace(-10, 10, 201))
    with pytest.raises(GridMismatchError):
        convolve_grid(a, c)


def test_convolution_product_duality():
    # both factors are negligible at the window edges, so the cropped linear
    # convolution keeps all of its mass and the discrete transforms multiply
    x = np.linspace(-40, 40, 2049)
    f = _profile("gauss", 1.0, x)
    g = DensityProfile(x, [density_closed("gauss", 0.5, v - 3.0) for v in x], 1.0)
    h = convolve_grid(f, g)

    def transform(p, k):
        return np.sum(p.value * np.exp(-1j * k * x)) * p.dx

    band = np.linspace(0, np.pi / f.dx, 41)
    for k in band:
        assert abs(transform(h, k) - transform(f, k) * transform(g, k)) < 1e-9


# ----------------------------------------------------------------- CSV


def test_profile_csv_round_trip():
    spec = MultiscaleSpec([(0.5, -0.5, 1), (2, 0, 1)])
    prof = oracle_profile(spec, 1.0, np.linspace(-3, 3, 7))
    text = write_profile_csv(prof)
    back = read_profile_csv(io.StringIO(text))
    assert np.array_equal(back.x, prof.x)
    assert np.array_equal(back.value, prof.value)
    assert np.array_equal(back.err_est, prof.err_est)
    assert back.formula_id == "oracle" and back.spec == spec.fingerprint()
    assert write_profile_csv(back) == text
