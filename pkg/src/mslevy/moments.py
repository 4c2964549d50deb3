"""Moments of one-sided two-scale kernels and the Stieltjes moment problem.

The mu-th moment of h(t, x) is summed from its Gamma-ratio series, the
negative integer orders mu = -lp n define a Stieltjes moment sequence with
weight W(t, x) = x^(-1-1/lp) h(t, x^(-1/lp)) / lp, and the Carleman sums and
a log-convexity test give a (finite, heuristic) uniqueness diagnosis.
"""
from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy import integrate

from .multiscale import TwoScaleRational, _log_saddle, kernel_h_onesided
from .specfun import DEFAULT_CONTROL, ConvergenceError, PoleError, SeriesControl
from .stable import LowPrecisionWarning, StableComponent

__all__ = [
    "MomentSequence",
    "StieltjesWeight",
    "CarlemanResult",
    "as_spec",
    "moment_series",
    "log_stieltjes_moment",
    "moment_sequence",
    "moment_quadrature",
    "stieltjes_weight",
    "carleman_diagnostic",
    "convexity_check",
    "convex_window",
    "hankel_determinants",
    "write_moment_report",
]


def as_spec(spec) -> TwoScaleRational:
    """Accept a TwoScaleRational or a pair of one-sided exponents (floats or Fractions)."""
    if isinstance(spec, TwoScaleRational):
        return spec
    a1, a2 = spec
    comps = [StableComponent(float(a), -float(a)) for a in (a1, a2)]
    for c in comps:
        if not 0 < c.alpha < 1:
            raise ValueError("moments are defined for one-sided exponents in (0, 1)")
    return TwoScaleRational.from_components(*comps)


def _alphas(rat: TwoScaleRational):
    return float(rat.first.alpha_q), float(rat.second.alpha_q)


def _int_or_none(v, tol=1e-12):
    r = round(v)
    return int(r) if abs(v - r) <= tol else None


def _coef(r, mu, M, m):
    """Gamma((m r - mu)/M) / Gamma(-mu) in mpmath, with pole-cancelling limits.

    When mu is a non-negative integer j the denominator has a pole; the ratio
    is zero unless the numerator sits on a pole -k too, in which case the
    ratio of residues gives M (-1)^(k+j) j! / k!.
    """
    a = (m * r - mu) / M
    j = _int_or_none(mu)
    k = _int_or_none(-a)
    if j is not None and j >= 0:
        if k is not None and k >= 0:
            return M * (-1) ** (k + j) * mpmath.factorial(j) / mpmath.factorial(k)
        return mpmath.mpf(0)
    if k is not None and k >= 0:
        raise PoleError(f"moment series term r={r} hits a Gamma pole at mu={mu}")
    return mpmath.gamma(a) * mpmath.rgamma(-mu)


def _series(rat, mu, t, ctrl, log_only=False):
    M, m = mpmath.mpf(rat.M.numerator) / rat.M.denominator, mpmath.mpf(rat.m.numerator) / rat.m.denominator
    dps = 30
    for _ in range(6):
        with mpmath.workdps(dps):
            Mm, mm, mmu, mt = mpmath.mpf(M), mpmath.mpf(m), mpmath.mpf(mu), mpmath.mpf(t)
            total = mpmath.mpf(0)
            abs_sum = mpmath.mpf(0)
            peak = mpmath.mpf(0)
            below = 0
            r = 0
            while True:
                if r > ctrl.max_terms:
                    raise ConvergenceError(f"moment series for mu={mu} did not settle", n_terms=r)
                term = (-1) ** r / mpmath.factorial(r) * _coef(r, mmu, Mm, mm)
                term *= mt ** ((1 - mm / Mm) * r + mmu / Mm)
                total += term
                mag = abs(term)
                abs_sum += mag
                peak = max(peak, mag)
                if r > 0 and mag < peak and mag <= ctrl.rel_tol * abs(total) * 1e-3:
                    below += 1
                    if below >= ctrl.tail_window:
                        break
                else:
                    below = 0
                r += 1
            total = total / Mm
            abs_sum = abs_sum / Mm
        if total == 0:
            lost = 0.0
        else:
            lost = float(mpmath.log10(abs_sum / abs(total)))
        if lost + 20 <= dps:
            break
        if dps >= ctrl.max_dps:
            raise ConvergenceError(f"moment series for mu={mu} loses {lost:.0f} digits", n_terms=r)
        dps = int(min(ctrl.max_dps, lost + 30))
    return total if log_only else float(total)


def moment_series(spec, mu: float, t: float = 1.0, ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """rho(mu) = int_0^inf x^mu h(t, x) dx from the Gamma-ratio series.

    The series runs over r with terms (-1)^r / r! Gamma((m r - mu)/M) / Gamma(-mu)
    t^((1 - m/M) r + mu/M), all over M, where M > m are the two exponents.
    Equal exponents use the single-scale closed form at time 2t. The moment
    is finite only for mu < m (the heavier tail); larger mu raises ValueError.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    rat = as_spec(spec)
    M, m = float(rat.M), float(rat.m)
    if mu >= m:
        raise ValueError(f"moment of order {mu} is infinite (needs mu < {m:g})")
    if mu == 0:
        return 1.0
    if rat.M == rat.m:
        with mpmath.workdps(30):
            # Gamma(1 - mu/M) / Gamma(1 - mu) (2t)^(mu/M); mu < M keeps both arguments positive
            v = mpmath.gamma(1 - mpmath.mpf(mu) / M) * mpmath.rgamma(1 - mpmath.mpf(mu)) * (2 * mpmath.mpf(t)) ** (mu / M)
        return float(v)
    return _series(rat, mu, t, ctrl)


def log_stieltjes_moment(spec, n: int, t: float = 1.0, ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """ln rho(n) for the Stieltjes sequence rho(n) = rho(-lp n); safe for large n."""
    rat = as_spec(spec)
    if n == 0:
        return 0.0
    mu = -rat.lp * n
    if rat.M == rat.m:
        M = float(rat.M)
        return math.lgamma(1 - mu / M) - math.lgamma(1 - mu) + (mu / M) * math.log(2 * t)
    v = _series(rat, mu, t, ctrl, log_only=True)
    if not v > 0:
        raise ConvergenceError(f"moment rho({n}) is not positive ({float(v):.3g})")
    return float(mpmath.log(v))


@dataclass
class MomentSequence:
    """Stieltjes moments rho(n) = rho_h(-lp n) at the orders ``mu_values``."""

    mu_values: list
    rho: list
    t: float
    spec: TwoScaleRational
    orders: list = field(default_factory=list)
    log_rho: list = field(default_factory=list)

    def __post_init__(self):
        for mu, r in zip(self.mu_values, self.rho):
            if mu == 0 and r != 1.0:
                raise ValueError("rho(0) must equal 1")


def moment_sequence(spec, t: float, orders, ctrl: SeriesControl = DEFAULT_CONTROL) -> MomentSequence:
    """Stieltjes moments for the integer orders ``orders``."""
    rat = as_spec(spec)
    orders = [int(n) for n in orders]
    if not orders:
        raise ValueError("empty order range")
    if min(orders) < 0:
        raise ValueError("Stieltjes orders must be non-negative")
    logs = [log_stieltjes_moment(rat, n, t, ctrl) for n in orders]
    rho = [1.0 if n == 0 else (math.exp(lv) if lv < 709 else math.inf) for n, lv in zip(orders, logs)]
    return MomentSequence([-rat.lp * n for n in orders], rho, t, rat, orders, logs)


def _left_cut(a1, a2, t, mu, rel=1e-18):
    """ln x below which x^(mu+1) h(t, x) is under ``rel`` by the saddle-point estimate."""
    comps = [StableComponent(a1, -a1), StableComponent(a2, -a2)]
    s = 0.0
    while _log_saddle(comps, t, math.exp(s)) + (mu + 1) * s > math.log(rel) and s > -60:
        s -= 0.25
    return s


def _tail_coef(rat, t):
    """c in h(t, x) ~ c x^(-1-m) as x -> infinity (m the smaller exponent)."""
    m = float(rat.m)
    c = t * math.gamma(1 + m) * math.sin(math.pi * m) / math.pi
    return 2 * c if rat.M == rat.m else c


def moment_quadrature(spec, mu: float, t: float = 1.0, hi: float = 40.0) -> float:
    """int x^mu h(t, x) dx by adaptive quadrature in s = ln x.

    The integrand e^((mu+1) s) h(t, e^s) falls off double-exponentially on
    the left, where the range starts once it is below 1e-18 of its scale.
    Beyond x = e^hi the leading power-law tail is added analytically.
    """
    rat = as_spec(spec)
    a1, a2 = _alphas(rat)
    m = float(rat.m)
    if mu >= m:
        raise ValueError(f"moment of order {mu} is infinite (needs mu < {m:g})")
    lo = _left_cut(a1, a2, t, mu)

    def f(s):
        x = math.exp(s)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LowPrecisionWarning)
            return math.exp((mu + 1) * s) * kernel_h_onesided(a1, a2, t, x).value

    val, _ = integrate.quad(f, lo, hi, limit=400, epsabs=0.0, epsrel=1e-10, points=[0.0])
    X = math.exp(hi)
    return val + _tail_coef(rat, t) * X ** (mu - m) / (m - mu)


@dataclass(frozen=True)
class StieltjesWeight:
    """W(t, x) = x^(-1 - 1/lp) h(t, x^(-1/lp)) / lp as a callable of x."""

    spec: TwoScaleRational
    t: float

    def __call__(self, x):
        return stieltjes_weight(self.spec, self.t, x)

    def moment(self, n: int) -> float:
        """int_0^inf x^n W dx by quadrature in ln x.

        Large x maps to the left edge of the kernel, so the range stops where
        the saddle-point estimate of the integrand is negligible; the
        power-law end below x = e^(-40 lp) is added analytically.
        """
        lp = self.spec.lp
        a1, a2 = _alphas(self.spec)
        mu = -lp * n
        m = float(self.spec.m)
        hi = -lp * _left_cut(a1, a2, self.t, mu)
        lo = -40.0 * lp

        def f(s):
            return math.exp((n + 1) * s) * self(math.exp(s))

        val, _ = integrate.quad(f, lo, hi, limit=400, epsabs=0.0, epsrel=1e-10, points=[0.0])
        return val + _tail_coef(self.spec, self.t) * math.exp(-lo / lp * (mu - m)) / (m - mu)


def stieltjes_weight(spec, t: float, x: float) -> float:
    """The Stieltjes weight for the moment sequence rho(-lp n), at x > 0."""
    if not x > 0:
        raise ValueError("x must be positive")
    rat = as_spec(spec)
    a1, a2 = _alphas(rat)
    lp = rat.lp
    y = x ** (-1.0 / lp)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LowPrecisionWarning)
        h = kernel_h_onesided(a1, a2, t, y).value
    return h * x ** (-1.0 - 1.0 / lp) / lp


@dataclass
class CarlemanResult:
    orders: list
    terms: list
    partial_sums: list
    exponent: float
    verdict: str
    sequence: MomentSequence = None

    def __iter__(self):
        # unpacks as (partial_sums, verdict)
        return iter((self.partial_sums, self.verdict))


def carleman_diagnostic(spec, t: float, N: int = 40, ctrl: SeriesControl = DEFAULT_CONTROL,
                        y_grid=None) -> CarlemanResult:
    """Partial Carleman sums S_N = sum_{n<=N} rho(n)^(-1/(2n)) and a verdict.

    The decay exponent s of the terms (term ~ c n^-s) is fitted on the last
    decade n in [N/10, N]. s <= 1 means the sum diverges: "unique". s > 1 with
    a positive log-convexity check of the weight: "non_unique_candidate".
    Anything else is "inconclusive". This classifies finitely many terms and
    proves nothing.
    """
    if N < 10:
        raise ValueError("N must be at least 10")
    rat = as_spec(spec)
    seq = moment_sequence(rat, t, range(1, N + 1), ctrl)
    terms = [math.exp(-lv / (2 * n)) for n, lv in zip(seq.orders, seq.log_rho)]
    partial = list(np.cumsum(terms))
    n = np.arange(1, N + 1)
    sel = n >= max(N // 10, 1)
    slope = np.polyfit(np.log(n[sel]), np.log(terms)[sel], 1)[0]
    s = float(-slope)
    if s <= 1:
        verdict = "unique"
    else:
        grid = np.linspace(-2.0, 4.0, 25) if y_grid is None else y_grid
        _, ok = convexity_check(rat, t, grid)
        verdict = "non_unique_candidate" if ok else "inconclusive"
    return CarlemanResult(list(seq.orders), terms, partial, s, verdict, seq)


def _neg_log_w(rat, t, y):
    w = stieltjes_weight(rat, t, math.exp(y))
    return -math.log(w) if w > 0 else math.nan


def convexity_check(spec, t: float, y_grid, h: float = 1e-3):
    """Second derivative of psi(y) = -ln W(t, e^y) on ``y_grid``.

    Central differences with step h and h/2 are combined by Richardson
    extrapolation. Points where W is not positive give NaN and are left out
    of the ``all_positive`` flag. Returns (values, all_positive).
    """
    rat = as_spec(spec)
    vals = []
    for y in np.asarray(y_grid, dtype=float):
        d = []
        for step in (h, h / 2):
            f0 = _neg_log_w(rat, t, y)
            fp = _neg_log_w(rat, t, y + step)
            fm = _neg_log_w(rat, t, y - step)
            d.append((fp - 2 * f0 + fm) / step**2)
        vals.append((4 * d[1] - d[0]) / 3)
    vals = np.array(vals)
    good = np.isfinite(vals)
    return vals, bool(good.any() and np.all(vals[good] > 0))


def convex_window(y_grid, values):
    """Smallest y' on the grid such that the second derivative is positive for all y >= y'.

    Returns None when the last grid value is not positive.
    """
    y = np.asarray(y_grid, dtype=float)
    v = np.asarray(values, dtype=float)
    ok = np.isfinite(v) & (v > 0)
    if not ok[-1]:
        return None
    k = len(ok) - 1
    while k > 0 and ok[k - 1]:
        k -= 1
    return float(y[k])


def hankel_determinants(rho, shift: int = 0):
    """Leading Hankel determinants det[rho(i + j + shift)] of every size that fits.

    A Stieltjes moment sequence has all of them positive for shift 0 and 1.
    """
    rho = np.asarray(rho, dtype=float)[shift:]
    out = []
    size = 1
    while 2 * size - 1 <= rho.size:
        H = np.array([[rho[i + j] for j in range(size)] for i in range(size)])
        out.append(float(np.linalg.det(H)))
        size += 1
    return out


def write_moment_report(result: CarlemanResult, dest=None, header: dict | None = None) -> str:
    """CSV ``n,rho,carleman_term,partial_sum`` with a trailing verdict comment."""
    buf = io.StringIO()
    for k, v in (header or {}).items():
        buf.write(f"# {k}={v}\n")
    buf.write("n,rho,carleman_term,partial_sum\n")
    seq = result.sequence
    for i, n in enumerate(result.orders):
        buf.write(f"{n},{seq.rho[i]:.17g},{result.terms[i]:.17g},{result.partial_sums[i]:.17g}\n")
    buf.write(f"# exponent={result.exponent:.6g}\n# verdict={result.verdict}\n")
    text = buf.getvalue()
    if dest is not None:
        with open(dest, "w") as fh:
            fh.write(text)
    return text
