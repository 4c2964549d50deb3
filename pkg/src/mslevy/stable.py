"""Single-scale stable densities v_{alpha,beta,gamma}(t, x).

The characteristic function is exp(-t gamma |w|^alpha exp(i pi beta sgn(w)/2)).
This module holds the closed-form catalog, the one-sided series and its
small-x envelope, a generic series evaluator for any admissible component,
and the scaling and reflection identities.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from . import specfun
from ._series import KernelResult, case_a_series, case_b_series, sum_double_series
from .specfun import DEFAULT_CONTROL, SeriesControl

__all__ = [
    "StableComponent",
    "RationalExponent",
    "LowPrecisionWarning",
    "CATALOG",
    "density_closed",
    "one_sided_series",
    "small_x_asymptotic",
    "rescale",
    "reflect",
    "series_density",
    "density",
]

_ADM_TOL = 1e-12


class LowPrecisionWarning(UserWarning):
    """A value came from an asymptotic envelope rather than a converged series."""


@dataclass(frozen=True)
class StableComponent:
    """One stable multiplier: index alpha, skewness beta, scale gamma."""

    alpha: float
    beta: float = 0.0
    gamma: float = 1.0

    def __post_init__(self):
        a, b = float(self.alpha), float(self.beta)
        if not (0 < a <= 2):
            raise ValueError(f"alpha={a} must lie in (0, 2]")
        if abs(a - 1) < 1e-12:
            raise ValueError("alpha = 1 is excluded")
        bound = a if a < 1 else 2 - a
        if abs(b) > bound + _ADM_TOL:
            raise ValueError(f"|beta|={abs(b)} exceeds the admissible bound {bound} for alpha={a}")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")

    @property
    def skew(self):
        """(alpha - beta) / 2, the phase weight of the inverse-power series."""
        return (self.alpha - self.beta) / 2

    @property
    def one_sided(self) -> bool:
        """Totally skewed with support on x >= 0."""
        return self.alpha < 1 and abs(self.beta + self.alpha) <= _ADM_TOL

    @property
    def support(self) -> str:
        if self.one_sided:
            return "positive"
        if self.alpha < 1 and abs(self.beta - self.alpha) <= _ADM_TOL:
            return "negative"
        return "real"


@dataclass(frozen=True)
class RationalExponent:
    """alpha = num/den and beta = (num - 2 skew_num)/den.

    ``skew_num`` is an integer for the totally skewed cases; symmetric laws with
    odd ``num`` need a half-integer, which is stored as a Fraction.
    """

    num: int
    den: int
    skew_num: Fraction

    def __post_init__(self):
        if self.num < 1 or self.den < 1:
            raise ValueError("num and den must be positive integers")
        if math.gcd(self.num, self.den) != 1:
            raise ValueError("num/den must be in lowest terms")
        if not (0 < Fraction(self.num, self.den) <= 2):
            raise ValueError("num/den must lie in (0, 2]")
        StableComponent(self.alpha, self.beta)

    @property
    def alpha_q(self) -> Fraction:
        return Fraction(self.num, self.den)

    @property
    def beta_q(self) -> Fraction:
        return (self.num - 2 * Fraction(self.skew_num)) / self.den

    @property
    def alpha(self) -> float:
        return float(self.alpha_q)

    @property
    def beta(self) -> float:
        return float(self.beta_q)

    @property
    def skew(self) -> Fraction:
        """a/k in the notation of the rational parametrisation."""
        return Fraction(self.skew_num) / self.den

    @classmethod
    def from_component(cls, comp: StableComponent, max_den: int = 64, tol: float = 1e-9):
        fa = Fraction(comp.alpha).limit_denominator(max_den)
        if abs(float(fa) - comp.alpha) > tol:
            raise ValueError(f"alpha={comp.alpha} has no rational form with denominator <= {max_den}")
        fb = Fraction(comp.beta).limit_denominator(max_den)
        if abs(float(fb) - comp.beta) > tol:
            raise ValueError(f"beta={comp.beta} has no rational form with denominator <= {max_den}")
        skew = (fa.numerator - fb * fa.denominator) / 2
        return cls(fa.numerator, fa.denominator, Fraction(skew))


def _check_t(t):
    if not t > 0:
        raise ValueError(f"t={t} must be positive")


# ---------------------------------------------------------------- closed forms


def _gauss(t, x):
    return math.exp(-x * x / (4 * t)) / (2 * math.sqrt(math.pi * t))


def _levy_smirnov(t, x):
    if x <= 0:
        return 0.0
    return t * math.exp(-t * t / (4 * x)) / (2 * math.sqrt(math.pi) * x**1.5)


def _three_half(t, x):
    # c1 M(5/6, 2/3, z) + c2 x M(7/6, 4/3, z) with z = -4 x^3 / (27 t^2). For
    # |z| > 1 the two terms cancel (exponentially on the heavy side x < 0,
    # down to an exponentially small result for x > 0); there the pair is
    # exactly a Kummer U function, U(5/6, 2/3, z) for z > 0 and, after Kummer's
    # transformation, e^z U(-1/6, 2/3, -z) for z < 0.
    with mpmath.workdps(30):
        mx, mt = mpmath.mpf(x), mpmath.mpf(t)
        third = mpmath.mpf(1) / 3
        zz = -4 * mx**3 / (27 * mt**2)
        c1 = (2 / mt) ** (2 * third) / (3 * mpmath.sqrt(mpmath.pi))
        c1 *= mpmath.gamma(mpmath.mpf(5) / 6) / mpmath.gamma(2 * third)
        if zz > 1:
            c = c1 * mpmath.gamma(mpmath.mpf(7) / 6) / mpmath.gamma(third)
            return float(c * mpmath.hyperu(mpmath.mpf(5) / 6, 2 * third, zz))
        if zz < -1:
            c = c1 * mpmath.gamma(mpmath.mpf(1) / 6) / mpmath.gamma(third)
            return float(c * mpmath.exp(zz) * mpmath.hyperu(-mpmath.mpf(1) / 6, 2 * third, -zz))
        c2 = (2 / mt) ** (4 * third) / (9 * mpmath.sqrt(mpmath.pi))
        c2 *= mpmath.gamma(mpmath.mpf(7) / 6) / mpmath.gamma(4 * third)
        val = c1 * mpmath.hyp1f1(mpmath.mpf(5) / 6, 2 * third, zz)
        val += c2 * mx * mpmath.hyp1f1(mpmath.mpf(7) / 6, 4 * third, zz)
        return float(val)


def _one_third(t, x):
    if x <= 0:
        return 0.0
    z = 2 * t**1.5 / (3**1.5 * math.sqrt(x))
    if z > 700:
        return 0.0
    return t**1.5 / (3 * math.pi * x**1.5) * specfun.bessel_K(1 / 3, z)


def _two_thirds(t, x):
    if x <= 0:
        return 0.0
    z = 4 * t**3 / (27 * x * x)
    with mpmath.workdps(30):
        val = mpmath.sqrt(3 / mpmath.pi) * mpmath.exp(-z / 2) / x * mpmath.whitw(0.5, mpmath.mpf(1) / 6, z)
    return float(val)


CATALOG = {
    "gauss": ((2.0, 0.0), _gauss),
    "levy_smirnov": ((0.5, -0.5), _levy_smirnov),
    "three_half": ((1.5, -0.5), _three_half),
    "one_third": ((1 / 3, -1 / 3), _one_third),
    "two_thirds": ((2 / 3, -2 / 3), _two_thirds),
}


def density_closed(name: str, t: float, x: float) -> float:
    """Evaluate a catalog closed form (gamma = 1)."""
    try:
        _, fn = CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown catalog id {name!r}; choose from {sorted(CATALOG)}") from None
    _check_t(t)
    return fn(float(t), float(x))


def catalog_id(comp: StableComponent):
    """Catalog name matching ``comp`` (gamma = 1 only), or None."""
    if comp.gamma != 1:
        return None
    for name, ((a, b), _) in CATALOG.items():
        if abs(comp.alpha - a) < 1e-12 and abs(comp.beta - b) < 1e-12:
            return name
    return None


# --------------------------------------------------------- one-sided series


def _peak_index(alpha, t, x):
    """Index of the largest term of the inverse-power series (saddle estimate)."""
    return (alpha**alpha * t / x**alpha) ** (1 / (1 - alpha))


def small_x_asymptotic(alpha: float, t: float, x: float) -> float:
    """Saddle-point envelope of the one-sided density as x -> 0+.

    K t^{1/(2(1-alpha))} x^{-(2-alpha)/(2-2alpha)} exp(-A t^{1/(1-alpha)} x^{-alpha/(1-alpha)})
    with A = (1-alpha) alpha^{alpha/(1-alpha)} and
    K = alpha^{1/(2(1-alpha))} / sqrt(2 pi (1-alpha)). Exact for alpha = 1/2.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    _check_t(t)
    if x <= 0:
        return 0.0
    om = 1 - alpha
    A = om * alpha ** (alpha / om)
    K = alpha ** (1 / (2 * om)) / math.sqrt(2 * math.pi * om)
    logv = (
        math.log(K)
        + math.log(t) / (2 * om)
        - (2 - alpha) / (2 * om) * math.log(x)
        - A * t ** (1 / om) * x ** (-alpha / om)
    )
    return math.exp(logv) if logv > -745 else 0.0


def _one_sided(alpha, t, x, ctrl):
    if x <= 0:
        return KernelResult(0.0, 0, 0, 0.0, "support")
    if _peak_index(alpha, t, x) > ctrl.max_terms / 10:
        warnings.warn(
            f"one-sided density at x={x:g} below the series range; using the small-x envelope",
            LowPrecisionWarning,
            stacklevel=3,
        )
        val = small_x_asymptotic(alpha, t, x)
        return KernelResult(val, 0, 0, val, "small_x_asymptotic")
    S = sum_double_series(case_a_series([alpha], [alpha], [t], x), ctrl)
    scale = 1 / (math.pi * x)
    return KernelResult(-S.value * scale, S.n_terms, 0, S.err_est * scale, "onesided_series")


def one_sided_series(alpha: float, t: float, x: float, ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Inverse-power series of the one-sided stable density.

    Below the point where the peak term index exceeds ``ctrl.max_terms / 10``
    the small-x envelope is returned instead and a LowPrecisionWarning issued.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    _check_t(t)
    return _one_sided(alpha, t, x, ctrl).value


# ------------------------------------------------------------- identities


def rescale(v1: float, alpha: float, t: float, x: float = None) -> float:
    """Self-similarity v(t, x) = t^{-1/alpha} v(1, x t^{-1/alpha}); v1 is the t=1 value."""
    _check_t(t)
    return t ** (-1 / alpha) * v1


def reflect(component: StableComponent) -> StableComponent:
    """The law of -X: beta -> -beta."""
    return StableComponent(component.alpha, -component.beta, component.gamma)


# ---------------------------------------------------------- generic series


def _origin_value(comp, tt):
    a = comp.alpha
    return math.gamma(1 + 1 / a) * tt ** (-1 / a) * math.cos(math.pi * comp.beta / (2 * a)) / math.pi


def series_density(comp: StableComponent, t: float, x: float, ctrl: SeriesControl = DEFAULT_CONTROL) -> KernelResult:
    """Series value of v_{alpha,beta,gamma}(t, x) for any admissible component.

    Inverse powers of x for alpha < 1, powers of x for alpha > 1; negative x is
    mapped through the reflection identity. gamma enters as t -> gamma t.
    """
    _check_t(t)
    tt = comp.gamma * t
    if x < 0:
        return series_density(reflect(comp), t, -x, ctrl)
    if comp.alpha < 1:
        if x == 0:
            return KernelResult(_origin_value(comp, tt), 1, 0, 1e-16, "origin")
        if comp.one_sided:
            return _one_sided(comp.alpha, tt, x, ctrl)
        if comp.support == "negative":
            return KernelResult(0.0, 0, 0, 0.0, "support")
        if _peak_index(comp.alpha, tt, x) > ctrl.max_terms / 10:
            raise specfun.ConvergenceError(f"x={x} too close to 0 for the inverse-power series")
        S = sum_double_series(case_a_series([comp.alpha], [comp.skew], [tt], x), ctrl)
        scale = 1 / (math.pi * x)
        return KernelResult(-S.value * scale, S.n_terms, 0, S.err_est * scale, "caseA")
    M = comp.alpha
    ser = case_b_series((M, comp.skew, tt), None, x)
    S = sum_double_series(ser, ctrl)
    scale = tt ** (-1 / M) / (math.pi * M)
    return KernelResult(S.value * scale, S.n_terms, 0, S.err_est * scale, "caseB")


def density(comp: StableComponent, t: float, x: float, method: str = "auto", ctrl: SeriesControl = DEFAULT_CONTROL) -> KernelResult:
    """Density with method 'closed', 'series', 'oracle' or 'auto'.

    'auto' uses the closed form when the component is in the catalog, else
    the series, falling back to Fourier inversion when the series exceeds its
    term budget.
    """
    if method == "closed" or (method == "auto" and catalog_id(comp)):
        name = catalog_id(comp)
        if name is None:
            raise ValueError(f"no closed form for alpha={comp.alpha}, beta={comp.beta}, gamma={comp.gamma}")
        return KernelResult(density_closed(name, t, x), 0, 0, 1e-15, "closed:" + name)
    if method in ("series", "auto"):
        try:
            return series_density(comp, t, x, ctrl)
        except specfun.ConvergenceError:
            if method == "series":
                raise
    elif method != "oracle":
        raise ValueError(f"unknown method {method!r}")
    from .oracle import MultiscaleSpec, invert_fourier

    val, err = invert_fourier(MultiscaleSpec([comp]), t, x, return_error=True)
    return KernelResult(val, 0, 0, err, "oracle")


def density_grid(comp, t, xs, method="auto", ctrl: SeriesControl = DEFAULT_CONTROL):
    """Vectorised convenience wrapper returning (values, err_est) arrays."""
    res = [density(comp, t, float(x), method, ctrl) for x in np.atleast_1d(xs)]
    return np.array([r.value for r in res]), np.array([r.err_est for r in res])
