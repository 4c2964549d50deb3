"""Two-scale stable kernels.

Two-sided kernels H(t, x) have the transform exp(psi_1 + psi_2) and one-sided
kernels h(t, x) are Laplace convolutions of two totally skewed stable densities
with exponents in (0, 1). Three families of representations are implemented:

* case A, inverse powers of x, convergent when both exponents are below 1;
* case B, powers of x, convergent when the larger exponent exceeds 1;
* finite sums of generalized hypergeometric functions obtained from either
  double series by splitting one index modulo the lattice of the rational
  exponents, and for one-sided kernels a single sum of Meijer G functions.

Throughout, M and m are the larger and smaller exponent, ``lp = M * m1`` and
``m1`` is the smallest common multiple structure used in the Gauss-Legendre
reduction (see :class:`TwoScaleRational`).
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
from scipy import optimize, special

from . import specfun, stable
from ._series import (
    EPS,
    Affine,
    DoubleSeries,
    KernelResult,
    PowerBase,
    case_a_series,
    case_b_series,
    sum_double_series,
)
from .oracle import MultiscaleSpec, QuadControl, invert_fourier
from .specfun import DEFAULT_CONTROL, ConvergenceError, ParamLists, SeriesControl
from .stable import LowPrecisionWarning, RationalExponent, StableComponent

__all__ = [
    "TwoScaleRational",
    "KernelResult",
    "kernel_H",
    "kernel_H_caseA",
    "kernel_H_caseB",
    "kernel_h_onesided",
    "catalog_kernel",
    "CATALOG_KERNELS",
    "tail_mass",
    "kernel_mass",
    "origin_jets",
    "meijer_G",
]

MAX_DEN_HYPER = 12
# auto form hands over to Laplace inversion once the series would cancel this many digits
TALBOT_DIGITS = 1.5
# digits the case-B power series may cancel before the oracle takes over
CASEB_DIGITS = 8.0


@dataclass(frozen=True)
class TwoScaleRational:
    """Rational parametrisation of a pair of stable components.

    ``first = (l, k, a)`` and ``second = (p, q, b)`` give alpha_1 = l/k,
    beta_1 = (l - 2a)/k and likewise for the second component. Derived
    quantities follow the larger/smaller exponent: M, m, u (skew of the larger
    exponent), v (skew of the smaller), m1 = min(kp, lq), M1 = max(kp, lq) and
    lp = M * m1, which is always an integer.
    """

    first: RationalExponent
    second: RationalExponent

    @classmethod
    def from_components(cls, c1: StableComponent, c2: StableComponent, max_den: int = 64):
        return cls(RationalExponent.from_component(c1, max_den), RationalExponent.from_component(c2, max_den))

    @property
    def _big_small(self):
        if self.first.alpha_q >= self.second.alpha_q:
            return self.first, self.second
        return self.second, self.first

    @property
    def M(self) -> Fraction:
        return self._big_small[0].alpha_q

    @property
    def m(self) -> Fraction:
        return self._big_small[1].alpha_q

    @property
    def u(self) -> Fraction:
        return self._big_small[0].skew

    @property
    def v(self) -> Fraction:
        return self._big_small[1].skew

    @property
    def m1(self) -> int:
        big, small = self._big_small
        return min(big.den * small.num, big.num * small.den)

    @property
    def M1(self) -> int:
        big, small = self._big_small
        return max(big.den * small.num, big.num * small.den)

    @property
    def lp(self) -> int:
        val = self.M * self.m1
        assert val.denominator == 1
        return int(val)

    @property
    def equal(self) -> bool:
        return self.first.alpha_q == self.second.alpha_q

    def max_den(self):
        return max(self.first.den, self.second.den)


def _check(t):
    if not t > 0:
        raise ValueError("t must be positive")


def _as_comp(c):
    return c if isinstance(c, StableComponent) else StableComponent(*c)


# ------------------------------------------------------------ double series


def _caseA_double(c_big, c_small, t, x, ctrl):
    """H_+ by inverse powers; index n runs over the larger exponent."""
    ser = case_a_series(
        [c_small.alpha, c_big.alpha],
        [c_small.skew, c_big.skew],
        [c_small.gamma * t, c_big.gamma * t],
        x,
    )
    S = sum_double_series(ser, ctrl)
    sc = 1 / (math.pi * x)
    return KernelResult(-S.value * sc, S.n_diagonals, S.n_terms, S.err_est * sc, "caseA")


def _caseB_double(c_big, c_small, t, x, ctrl):
    tM = c_big.gamma * t
    ser = case_b_series((c_big.alpha, c_big.skew, tM), (c_small.alpha, c_small.skew, c_small.gamma * t), x)
    S = sum_double_series(ser, ctrl)
    sc = tM ** (-1 / c_big.alpha) / (math.pi * c_big.alpha)
    return KernelResult(S.value * sc, S.n_diagonals, S.n_terms, S.err_est * sc, "caseB")


def _order(c1, c2):
    return (c1, c2) if c1.alpha >= c2.alpha else (c2, c1)


# --------------------------------------------------- finite hypergeometric


def _mp_frac(f):
    f = Fraction(f)
    return mpmath.mpf(f.numerator) / f.denominator


def _hyper_outer(block, ctrl, dps0=30):
    """Sum sum_r block(r, dps) until the r-blocks settle; adaptive precision.

    ``block`` returns (value, abs_value, err) as mpmath numbers for one r.
    """
    dps = dps0
    for _ in range(4):
        with mpmath.workdps(dps):
            total = mpmath.mpf(0)
            abs_sum = 0.0
            err = 0.0
            below = 0
            peak = 0.0
            r = 0
            last = 0.0
            while True:
                if r > ctrl.max_terms:
                    raise ConvergenceError("outer hypergeometric sum did not settle", n_terms=r)
                val, mag, e = block(r, dps)
                total += val
                mag = float(mag)
                abs_sum += mag
                err += float(e)
                peak = max(peak, mag)
                if mag < ctrl.threshold(float(total)) and mag < peak:
                    below += 1
                    last = mag
                    if below >= ctrl.tail_window:
                        break
                else:
                    below = 0
                r += 1
            fval = float(total)
        lost = math.log10(max(abs_sum / max(abs(fval), 1e-300), 1.0))
        if lost + 18 <= dps or dps >= ctrl.max_dps:
            break
        dps = int(min(ctrl.max_dps, lost + 30))
    return fval, r + 1, last + err + abs_sum * 10.0 ** (-dps + 2) + EPS * abs(fval)


def _pfq_mp(upper, lower, z, dps, ctrl):
    with mpmath.workdps(dps + 10):
        val, n, err = specfun.phyper(ParamLists(upper, lower), z, SeriesControl(
            max_terms=20000, abs_tol=0.0, rel_tol=10.0 ** (-dps - 5), tail_window=ctrl.tail_window), dps=dps + 10, keep_mp=True)
    return val, n, err


def _caseA_hyper(rat: TwoScaleRational, t, x, ctrl):
    """Finite sum over j < m1 of _{1+lp}F_{m1} functions, outer sum over r."""
    M, m, u, v, m1, L0 = rat.M, rat.m, rat.u, rat.v, rat.m1, rat.lp
    inner_terms = [0]

    def block(r, dps):
        with mpmath.workdps(dps):
            mx, mt = mpmath.mpf(x), mpmath.mpf(t)
            Xn = mt * mx ** (-_mp_frac(M))
            Xr = mt * mx ** (-_mp_frac(m))
            z = (-1) ** m1 * mpmath.expjpi(_mp_frac(u * m1)) * Xn**m1 * mpmath.mpf(L0) ** L0 / mpmath.mpf(m1) ** m1
            tot = mpmath.mpf(0)
            mag = mpmath.mpf(0)
            err = 0.0
            for j in range(m1):
                s = M * j + m * r
                pre = (-1) ** (j + r) * Xn**j * Xr**r * mpmath.gamma(1 + _mp_frac(s))
                pre /= mpmath.factorial(j) * mpmath.factorial(r)
                upper = [1] + [_mp_frac((1 + s + i) / L0) for i in range(L0)]
                lower = [_mp_frac(Fraction(1 + j + i, m1)) for i in range(m1)]
                F, n, e = _pfq_mp(upper, lower, z, dps, ctrl)
                inner_terms[0] += n
                ph = mpmath.expjpi(_mp_frac(v * r + u * j))
                term = pre * mpmath.im(ph * mpmath.mpc(F))
                tot += term
                mag += abs(term)
                err += float(abs(pre)) * float(e)
            return tot, mag, err

    val, nr, err = _hyper_outer(block, ctrl)
    sc = 1 / (math.pi * x)
    return KernelResult(-val * sc, nr, inner_terms[0], err * sc, "caseA_hyper")


def _caseB_hyper(rat: TwoScaleRational, t, x, ctrl):
    """Finite sum over j < lp of _{1+m1}F_{lp} functions, outer sum over r."""
    M, m, u, v, m1, L0 = rat.M, rat.m, rat.u, rat.v, rat.m1, rat.lp
    inner_terms = [0]

    def block(r, dps):
        with mpmath.workdps(dps):
            mx, mt = mpmath.mpf(x), mpmath.mpf(t)
            Xn = mx * mt ** (-1 / _mp_frac(M))
            Xr = mt ** (1 - _mp_frac(m / M))
            z = (-1) ** L0 * mpmath.expjpi(_mp_frac(u * m1)) * Xn**L0 * mpmath.mpf(m1) ** m1 / mpmath.mpf(L0) ** L0
            tot = mpmath.mpf(0)
            mag = mpmath.mpf(0)
            err = 0.0
            for j in range(L0):
                g = Fraction(1 + j, 1) / M + (m / M) * r
                pre = (-1) ** (j + r) * Xr**r * mpmath.gamma(_mp_frac(g)) / (mpmath.factorial(j) * mpmath.factorial(r))
                if j:
                    pre *= Xn**j
                upper = [1] + [_mp_frac((g + i) / m1) for i in range(m1)]
                lower = [_mp_frac(Fraction(1 + j + i, L0)) for i in range(L0)]
                F, n, e = _pfq_mp(upper, lower, z, dps, ctrl)
                inner_terms[0] += n
                ph = mpmath.expjpi(_mp_frac(u * (1 + j) / M - r * (v - u * m / M)))
                term = pre * mpmath.im(ph * mpmath.mpc(F))
                tot += term
                mag += abs(term)
                err += float(abs(pre)) * float(e)
            return tot, mag, err

    val, nr, err = _hyper_outer(block, ctrl)
    sc = t ** (-1 / float(M)) / (math.pi * float(M))
    return KernelResult(val * sc, nr, inner_terms[0], err * sc, "caseB_hyper")


# -------------------------------------------------------------- Meijer G


def _meijer_line(a, b, z, h=None, c=None):
    """Trapezoid rule on a vertical Mellin-Barnes line; returns scaled values.

    Result is (value, err, abs_integral, log_scale): the integral equals
    value * exp(log_scale), so very large or small G stay representable.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    p, q = a.size, b.size
    if q <= p:
        raise ValueError("meijer_G needs more lower than upper parameters")
    if not z > 0:
        raise ValueError("z must be positive")
    if c is None:
        c = float(np.min(b)) - 0.5
    lz = math.log(z)
    decay = 0.5 * math.pi * (q - p)
    power = float(np.sum(b - c - 0.5) - np.sum(a - c - 0.5))
    Y = 10.0
    while decay * Y - max(power, 0) * math.log(Y) < 50 + max(power, 0):
        Y *= 1.3
    if h is None:
        h = min(0.1, 1.0 / (1.0 + abs(lz)))
    la = special.loggamma(a - c + 0j).real
    scale = float(np.sum(special.gammaln(b - c)) - np.sum(la[np.isfinite(la)]) + c * lz)

    def trap(step):
        y = np.arange(0, Y + step, step)
        s = c + 1j * y
        lg = np.sum(special.loggamma(b[:, None] - s[None, :]), axis=0)
        la = special.loggamma(a[:, None] - s[None, :])
        # 1/Gamma vanishes where the line crosses a pole of Gamma(a - s)
        la[~np.isfinite(la)] = np.inf
        lg -= np.sum(la, axis=0)
        f = np.exp(lg + s * lz - scale)
        f[~np.isfinite(f)] = 0.0
        w = np.full(y.size, step)
        w[0] = 0.5 * step
        return float(np.sum(w * f.real)) / math.pi, float(np.sum(w * np.abs(f))) / math.pi

    v1, A = trap(h)
    v2, _ = trap(2 * h)
    err = abs(v1 - v2) * 1e-3 + 64 * EPS * A
    return v1, err, A, scale


def meijer_G(a_list, b_list, z, h=None, c=None):
    """G^{q,0}_{p,q}(z | a; b) by the trapezoid rule on a vertical Mellin-Barnes line.

    The integrand is prod Gamma(b_j - s) / prod Gamma(a_i - s) z^s on
    Re s = min(b) - 1/2, which decays like exp(-pi (q - p) |Im s| / 2), so
    q > p is required. Returns (value, err_est).
    """
    v, err, _, scale = _meijer_line(a_list, b_list, z, h, c)
    f = math.exp(scale)
    return v * f, err * f


def _meijer_onesided(rat: TwoScaleRational, t, x, ctrl):
    M, m, m1, L0 = rat.M, rat.m, rat.m1, rat.lp
    kappa = L0**L0 * t**m1 / (m1**m1 * x**L0)
    a = [i / L0 for i in range(L0)]
    pref = m1 * math.sqrt(float(M)) * (2 * math.pi) ** ((L0 - m1) / 2) / x
    parts = []
    err = 0.0
    below = 0
    peak = 0.0
    r = 0
    mag = 0.0
    while True:
        if r > ctrl.max_terms:
            raise ConvergenceError("Meijer-G outer sum did not settle", n_terms=r)
        shift = float(m / M) * r
        b = [(shift + j) / m1 for j in range(m1)]
        G, eG, _, lsc = _meijer_line(a, b, kappa)
        lc = r * math.log(t) - math.lgamma(r + 1) + shift * math.log(m1 / t) + lsc
        if lc < -745:
            term, eterm = 0.0, 0.0
        else:
            w = math.exp(lc)
            term, eterm = (-1) ** r * w * G, w * eG
        if not (math.isfinite(term) and math.isfinite(eterm)):
            raise ConvergenceError(f"Meijer-G term {r} is not finite", n_terms=r)
        parts.append(term)
        total = math.fsum(parts)
        err += eterm
        mag = abs(term)
        peak = max(peak, mag)
        if mag <= ctrl.threshold(total) and mag < peak:
            below += 1
            if below >= ctrl.tail_window:
                break
        else:
            below = 0
        r += 1
    return KernelResult(total * pref, r + 1, 0, (err + mag + 4 * EPS * math.fsum(map(abs, parts))) * pref, "meijer")


# ------------------------------------------------------------ public API


def kernel_H_caseA(rat, t: float, x: float, ctrl: SeriesControl = DEFAULT_CONTROL, form: str = "double") -> KernelResult:
    """H_+(t, x) for two exponents below 1 by inverse powers of x.

    ``rat`` is a TwoScaleRational or a pair of StableComponents; ``form`` is
    'double' (the double series) or 'hyper' (finite hypergeometric sums).
    """
    _check(t)
    if not x > 0:
        raise ValueError("case A needs x > 0")
    if isinstance(rat, TwoScaleRational):
        comps = [StableComponent(rat.first.alpha, rat.first.beta), StableComponent(rat.second.alpha, rat.second.beta)]
    else:
        comps = [_as_comp(c) for c in rat]
        rat = None
    big, small = _order(*comps)
    if big.alpha >= 1:
        raise ValueError("case A needs both exponents below 1")
    if form == "double":
        return _caseA_double(big, small, t, x, ctrl)
    if form == "hyper":
        if rat is None:
            rat = TwoScaleRational.from_components(big, small)
        if rat.max_den() > MAX_DEN_HYPER:
            raise ValueError(f"denominators above {MAX_DEN_HYPER} are not supported by the finite-sum form")
        return _caseA_hyper(rat, t, x, ctrl)
    raise ValueError(f"unknown form {form!r}")


def kernel_H_caseB(rat, t: float, x: float, ctrl: SeriesControl = DEFAULT_CONTROL, form: str = "double") -> KernelResult:
    """H_+(t, x) by powers of x; the larger exponent must exceed 1."""
    _check(t)
    if x < 0:
        raise ValueError("case B is evaluated at x >= 0; use kernel_H for negative x")
    if isinstance(rat, TwoScaleRational):
        comps = [StableComponent(rat.first.alpha, rat.first.beta), StableComponent(rat.second.alpha, rat.second.beta)]
    else:
        comps = [_as_comp(c) for c in rat]
        rat = None
    big, small = _order(*comps)
    if big.alpha <= 1:
        raise ValueError("case B needs the larger exponent above 1")
    if form == "double":
        return _caseB_double(big, small, t, x, ctrl)
    if form == "hyper":
        if rat is None:
            rat = TwoScaleRational.from_components(big, small)
        if rat.max_den() > MAX_DEN_HYPER:
            raise ValueError(f"denominators above {MAX_DEN_HYPER} are not supported by the finite-sum form")
        return _caseB_hyper(rat, t, x, ctrl)
    raise ValueError(f"unknown form {form!r}")


def _oracle_result(comps, t, x):
    spec = MultiscaleSpec(sorted(comps, key=lambda c: c.alpha))
    val, err = invert_fourier(spec, t, x, QuadControl(tol=1e-11), return_error=True)
    return KernelResult(val, 0, 0, err, "oracle")


def kernel_H(c1, c2, t: float, x: float, ctrl: SeriesControl = DEFAULT_CONTROL) -> KernelResult:
    """Two-sided two-scale kernel H(t, x) with automatic regime dispatch.

    Equal components give the single-scale density at 2t. Otherwise x < 0 is
    evaluated through the beta-flipped pair, case B is used when the larger
    exponent exceeds 1 and case A when both are below 1. Points outside the
    series budget, and pairs with equal exponents but different skewness, use
    the Fourier oracle; the result's ``formula_id`` records which path ran.
    """
    _check(t)
    c1, c2 = _as_comp(c1), _as_comp(c2)
    if c1.alpha == c2.alpha and c1.beta == c2.beta:
        comp = StableComponent(c1.alpha, c1.beta, c1.gamma + c2.gamma)
        res = stable.density(comp, t, x, ctrl=ctrl)
        return KernelResult(res.value, res.n_terms_outer, 0, res.err_est, "equal:" + res.formula_id)
    if c1.alpha == c2.alpha:
        return _oracle_result([c1, c2], t, x)
    if x < 0:
        res = kernel_H(stable.reflect(c1), stable.reflect(c2), t, -x, ctrl)
        return res
    big, small = _order(c1, c2)
    if big.alpha > 1:
        if _caseB_lost_digits(big, t, x) > CASEB_DIGITS:
            return _oracle_result([c1, c2], t, x)
        try:
            return _caseB_double(big, small, t, x, ctrl)
        except ConvergenceError:
            return _oracle_result([c1, c2], t, x)
    # both exponents below 1
    if big.one_sided and small.one_sided:
        return kernel_h_onesided(big.alpha, small.alpha, t, x, ctrl, gammas=(big.gamma, small.gamma))
    if (big.support == "negative" and small.support == "negative") or x == 0:
        if big.support == "negative" and small.support == "negative" and x > 0:
            return KernelResult(0.0, 0, 0, 0.0, "support")
        return _oracle_result([c1, c2], t, x)
    if _peak_too_big(big, small, t, x, ctrl):
        return _oracle_result([c1, c2], t, x)
    try:
        return _caseA_double(big, small, t, x, ctrl)
    except ConvergenceError:
        return _oracle_result([c1, c2], t, x)


def _caseB_lost_digits(big, t, x):
    """log10 of the largest term |x|^j Gamma((1+j)/M) / (j! (gamma t)^(j/M)) of the power series."""
    if x == 0:
        return 0.0
    M = big.alpha
    lx = math.log(abs(x)) - math.log(big.gamma * t) / M
    j = np.arange(0, 4000)
    logs = j * lx + special.gammaln((1 + j) / M) - special.gammaln(j + 1)
    return max(float(np.max(logs)) - math.lgamma(1 / M), 0.0) / math.log(10)


def _peak_too_big(big, small, t, x, ctrl):
    tt = t * max(big.gamma, small.gamma)
    r_star = max(stable._peak_index(c.alpha, tt, x) for c in (big, small))
    return r_star > ctrl.max_terms / 10


def _lost_digits(comps, t, x):
    """Digits cancelled in the inverse-power series: log10 of its largest term."""
    nats = sum((1 - c.alpha) * stable._peak_index(c.alpha, c.gamma * t, x) for c in comps)
    return nats / math.log(10)


def _log_saddle(comps, t, x):
    """Saddle-point estimate of ln h(t, x) from its Laplace transform.

    phi(p) = p x - sum gamma_j t p^alpha_j is stationary where
    x = sum alpha_j gamma_j t p^(alpha_j - 1); ln h ~ phi(p*) - ln(2 pi phi''(p*)) / 2.
    """
    ts = [(c.alpha, c.gamma * t) for c in comps]

    def slope(lp):
        p = math.exp(lp)
        return sum(a * g * p ** (a - 1) for a, g in ts) - x

    lo, hi = -50.0, 50.0
    while slope(hi) > 0:
        hi *= 2
    while slope(lo) < 0:
        lo *= 2
    ps = math.exp(optimize.brentq(slope, lo, hi, xtol=1e-12))
    phi = ps * x - sum(g * ps**a for a, g in ts)
    d2 = sum(a * (1 - a) * g * ps ** (a - 2) for a, g in ts)
    return phi - 0.5 * math.log(2 * math.pi * d2)


def _talbot(comps, t, x, ctrl):
    """Laplace inversion of exp(-sum gamma_j t p^alpha_j) on Talbot's contour.

    The working precision follows the magnitude of the result and is raised
    until two consecutive precisions agree to double precision.
    """
    logenv = _log_saddle(comps, t, x)
    if logenv < -720:
        # below the double range
        return KernelResult(0.0, 0, 0, math.exp(max(logenv, -745.0)), "talbot_underflow")
    dps = int(25 + max(0.0, -logenv / math.log(10)))
    # tiny results are legitimate doubles, so the cap moves with the starting precision
    cap = max(ctrl.max_dps, dps + 60)
    prev = None
    while True:
        if dps > cap:
            raise ConvergenceError(f"Talbot inversion at x={x:g} needs more than {cap} digits")
        with mpmath.workdps(dps):
            al = [mpmath.mpf(c.alpha) for c in comps]
            ga = [mpmath.mpf(c.gamma) * t for c in comps]
            v = mpmath.invertlaplace(lambda p: mpmath.exp(-sum(g * p**a for g, a in zip(ga, al))), x, method="talbot")
        v = float(v)
        if prev is not None and abs(v - prev) <= 4 * EPS * abs(v):
            return KernelResult(v, 0, 0, abs(v - prev) + 2 * EPS * abs(v), "talbot")
        prev = v
        dps += 15


def kernel_h_onesided(alpha1: float, alpha2: float, t: float, x: float, ctrl: SeriesControl = DEFAULT_CONTROL,
                      form: str = "auto", gammas=(1.0, 1.0)) -> KernelResult:
    """One-sided kernel h(t, x), the Laplace convolution of two one-sided densities.

    ``form`` selects 'double', 'hyper', 'meijer', 'talbot' or 'auto'. Auto
    uses the single-scale density at 2t for equal exponents, or the double
    series, and switches to Talbot-contour Laplace inversion near the left
    edge of the support where the inverse-power series cancels badly. The
    result is symmetric in (alpha1, alpha2).
    """
    _check(t)
    for a in (alpha1, alpha2):
        if not 0 < a < 1:
            raise ValueError("one-sided exponents must lie in (0, 1)")
    # canonical order: larger exponent first, so both argument orders share one code path
    if (alpha2, gammas[1]) > (alpha1, gammas[0]):
        alpha1, alpha2 = alpha2, alpha1
        gammas = (gammas[1], gammas[0])
    if x <= 0:
        return KernelResult(0.0, 0, 0, 0.0, "support")
    big = StableComponent(alpha1, -alpha1, gammas[0])
    small = StableComponent(alpha2, -alpha2, gammas[1])
    if form == "talbot" or (form == "auto" and _lost_digits((big, small), t, x) > TALBOT_DIGITS):
        return _talbot((big, small), t, x, ctrl)
    if form == "auto" and alpha1 == alpha2:
        res = stable.series_density(StableComponent(alpha1, -alpha1, gammas[0] + gammas[1]), t, x, ctrl)
        return KernelResult(res.value, res.n_terms_outer, 0, res.err_est, "equal:" + res.formula_id)
    if _peak_too_big(big, small, t, x, ctrl):
        warnings.warn(f"h at x={x:g} below the series range; using the envelope bound", LowPrecisionWarning, stacklevel=2)
        env = x * stable.small_x_asymptotic(alpha1, gammas[0] * t, x) * stable.small_x_asymptotic(alpha2, gammas[1] * t, x)
        return KernelResult(env, 0, 0, env, "envelope")
    if form in ("auto", "double"):
        res = _caseA_double(big, small, t, x, ctrl)
        return KernelResult(res.value, res.n_terms_outer, res.n_terms_inner, res.err_est, "onesided_double")
    if gammas != (1.0, 1.0):
        raise ValueError("the hypergeometric and Meijer forms assume unit scales")
    rat = TwoScaleRational.from_components(big, small)
    if rat.max_den() > MAX_DEN_HYPER:
        raise ValueError(f"denominators above {MAX_DEN_HYPER} are not supported by the finite-sum forms")
    if form == "hyper":
        res = _caseA_hyper(rat, t, x, ctrl)
        return KernelResult(res.value, res.n_terms_outer, res.n_terms_inner, res.err_est, "onesided_hyper")
    if form == "meijer":
        return _meijer_onesided(rat, t, x, ctrl)
    raise ValueError(f"unknown form {form!r}")


# --------------------------------------------------------------- catalog


def _bigauss(t, x):
    return math.exp(-x * x / (8 * t)) / (2 * math.sqrt(2 * math.pi * t))


def _series_mp(term, tol=1e-18, dps=30, n_max=2000, window=4):
    """Sum term(n) (mpmath) until ``window`` consecutive terms fall below tol * |sum|."""
    for _ in range(4):
        with mpmath.workdps(dps):
            s = mpmath.mpf(0)
            big = mpmath.mpf(0)
            below = 0
            for n in range(n_max):
                a = term(n)
                s += a
                big = max(big, abs(a))
                if abs(a) <= tol * abs(s) and n > 4:
                    below += 1
                    if below >= window:
                        break
                else:
                    below = 0
            lost = float(mpmath.log10(big / abs(s))) if s != 0 else dps
            val = float(s)
        if lost + 20 <= dps:
            return val
        dps = int(lost + 30)
    return val


def _gauss_levy(t, x):
    """Parabolic-cylinder sum for the Gaussian plus Levy-Smirnov pair."""
    def term(n):
        mt = mpmath.mpf(t)
        z = -mpmath.mpf(x) / mpmath.sqrt(2 * mt)
        return (-1) ** n / mpmath.factorial(n) * (mt**3 / 2) ** (mpmath.mpf(n) / 4) * mpmath.pcfd(mpmath.mpf(n) / 2, z)

    s = _series_mp(term)
    return math.exp(-x * x / (8 * t)) / (2 * math.sqrt(math.pi * t)) * s


def _gauss_three_half(t, x):
    """Finite sum of 4F6 functions for the Gaussian plus (3/2, -1/2) pair."""
    def term(r):
        mt, mx = mpmath.mpf(t), mpmath.mpf(x)
        z = -mx**6 / (1728 * mt**3)
        out = mpmath.mpf(0)
        for j in range(6):
            g = mpmath.mpf(1 + j) / 2 + mpmath.mpf(3) * r / 4
            pre = (-1) ** (r + j) / (mpmath.factorial(r) * mpmath.factorial(j))
            pre *= (mx**j if j else 1) / mt ** (mpmath.mpf(1 + j) / 2 - mpmath.mpf(r) / 4)
            pre *= mpmath.gamma(g) * mpmath.cospi(mpmath.mpf(j) / 2 - mpmath.mpf(r) / 4)
            if pre == 0:
                continue
            F = mpmath.hyper([1] + [(g + i) / 3 for i in range(3)], [mpmath.mpf(1 + j + i) / 6 for i in range(6)], z)
            out += pre * F
        return out

    dps = 30 + int(abs(x) ** 2 / (4 * t) / math.log(10))
    return _series_mp(term, dps=dps) / (2 * math.pi)


def _half_half(t, x):
    if x <= 0:
        return 0.0
    return t / (math.sqrt(math.pi) * x**1.5) * math.exp(-t * t / x)


def _half_third(t, x):
    """Parabolic-cylinder sum for the one-sided (1/2, 1/3) pair."""
    if x <= 0:
        return 0.0

    def term(n):
        mt, mx = mpmath.mpf(t), mpmath.mpf(x)
        return (-mt) ** n / mpmath.factorial(n) * (2 * mx) ** (-mpmath.mpf(n) / 3) * mpmath.pcfd(
            1 + mpmath.mpf(2 * n) / 3, mt / mpmath.sqrt(2 * mx))

    s = _series_mp(term)
    return math.exp(-t * t / (8 * x)) / (math.sqrt(2 * math.pi) * x) * s


def _third_two_thirds(t, x):
    """Three families of 2F2 functions for the one-sided (2/3, 1/3) pair."""
    if x <= 0:
        return 0.0
    # families j = 0, 1, 2 with prefactor (-t)^{j+n} / (j! n!)
    fams = [
        (0, [(1, 2), (1, 1)], [(1, 3), (2, 3)]),
        (1, [(5, 6), (4, 3)], [(2, 3), (4, 3)]),
        (2, [(7, 6), (5, 3)], [(4, 3), (5, 3)]),
    ]

    def term(n):
        mt, mx = mpmath.mpf(t), mpmath.mpf(x)
        z = -4 * mt**3 / (27 * mx**2)
        out = mpmath.mpf(0)
        for j, up, lo in fams:
            s = mpmath.mpf(2 * j + n) / 3
            pre = (-mt) ** (j + n) / (mpmath.factorial(j) * mpmath.factorial(n)) * mx ** (-1 - s) * mpmath.rgamma(-s)
            if pre == 0:
                continue
            upper = [mpmath.mpf(a) / b + mpmath.mpf(n) / 6 for a, b in up]
            lower = [mpmath.mpf(a) / b for a, b in lo]
            out += pre * mpmath.hyper(upper, lower, z)
        return out

    dps = 30 + int(2 * (4 * t**3 / (27 * x * x)) ** 0.5 / math.log(10))
    return _series_mp(term, dps=dps)


CATALOG_KERNELS = {
    "biGauss": (((2.0, 0.0), (2.0, 0.0)), _bigauss),
    "gaussLevy": (((2.0, 0.0), (0.5, -0.5)), _gauss_levy),
    "gaussThreeHalf": (((2.0, 0.0), (1.5, -0.5)), _gauss_three_half),
    "halfHalf": (((0.5, -0.5), (0.5, -0.5)), _half_half),
    "halfThird": (((0.5, -0.5), (1 / 3, -1 / 3)), _half_third),
    "thirdTwoThirds": (((2 / 3, -2 / 3), (1 / 3, -1 / 3)), _third_two_thirds),
}


def catalog_kernel(name: str, t: float, x: float) -> float:
    """Closed or semi-closed form of a named two-scale example."""
    try:
        _, fn = CATALOG_KERNELS[name]
    except KeyError:
        raise KeyError(f"unknown catalog kernel {name!r}; choose from {sorted(CATALOG_KERNELS)}") from None
    _check(t)
    return fn(float(t), float(x))


# ------------------------------------------------------ mass and tails


def tail_mass(c1, c2, t: float, X: float, max_terms: int = 400) -> float:
    """Mass of the kernel on (X, inf) from the term-wise integrated inverse-power series.

    Integrating x^{-1-s} over (X, inf) gives X^{-s}/s, so the tail is the
    case-A series with Gamma(1+s) replaced by Gamma(s). When an exponent
    exceeds 1 the series is only asymptotic and is cut at its smallest term.
    ``c2`` may be None for a single component.
    """
    comps = [_as_comp(c1)] + ([_as_comp(c2)] if c2 is not None else [])
    idx = []
    for r in range(max_terms):
        for n in range(max_terms if len(comps) == 2 else 1):
            if r + n == 0:
                continue
            if r + n > max_terms:
                break
            idx.append((r, n))
    terms = []
    for r, n in idx:
        s = comps[0].alpha * r + (comps[1].alpha * n if len(comps) == 2 else 0)
        ph = comps[0].skew * r + (comps[1].skew * n if len(comps) == 2 else 0)
        sn = math.sin(math.pi * ph)
        lt = r * math.log(comps[0].gamma * t) - math.lgamma(r + 1) + math.lgamma(s) - s * math.log(X)
        if len(comps) == 2:
            lt += n * math.log(comps[1].gamma * t) - math.lgamma(n + 1)
        terms.append((s, (-1) ** (r + n) * math.exp(lt) * sn, math.exp(lt)))
    terms.sort(key=lambda z: z[0])
    # group by order s and stop at the smallest envelope (optimal truncation)
    out = []
    best = math.inf
    for s, val, env in terms:
        if env > best * 10 and s > 2:
            break
        best = min(best, env)
        out.append(val)
        if env < 1e-18:
            break
    return -math.fsum(out) / math.pi


def kernel_mass(fn, lo: float, hi: float, breaks=(), n_panels: int = 60, order: int = 24) -> float:
    """Composite Gauss-Legendre integral of a scalar function on [lo, hi]."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    pts = sorted(set([lo, hi] + [b for b in breaks if lo < b < hi]))
    total = []
    for a, b in zip(pts[:-1], pts[1:]):
        edges = np.linspace(a, b, n_panels + 1)
        for p, q in zip(edges[:-1], edges[1:]):
            xs = 0.5 * (q - p) * nodes + 0.5 * (q + p)
            total.append(0.5 * (q - p) * sum(w * fn(float(v)) for v, w in zip(xs, weights)))
    return math.fsum(total)


# --------------------------------------------------------- origin jets


def origin_jets(c1, c2, t: float, orders=(0, 1, 2), h: float = 1e-2, ctrl: SeriesControl = DEFAULT_CONTROL):
    """One-sided finite-difference derivatives of H_+ and H_- at the origin.

    Returns {order: (from_right, from_left)} using forward and backward
    5-point stencils of ``kernel_H``; both entries estimate d^n H / dx^n (0).
    """
    c1, c2 = _as_comp(c1), _as_comp(c2)
    xs = [k * h for k in range(5)]
    right = np.array([kernel_H(c1, c2, t, x, ctrl).value for x in xs])
    left = np.array([kernel_H(c1, c2, t, -x, ctrl).value for x in xs])
    # forward-difference stencils of order 4 accuracy (n = 0) and (5 - n) otherwise
    stencils = {
        0: np.array([1, 0, 0, 0, 0.0]),
        1: np.array([-25 / 12, 4, -3, 4 / 3, -1 / 4]),
        2: np.array([35 / 12, -26 / 3, 19 / 2, -14 / 3, 11 / 12]),
    }
    out = {}
    for n in orders:
        w = stencils[n]
        out[n] = (float(w @ right) / h**n, float((-1) ** n * (w @ left)) / h**n)
    return out
