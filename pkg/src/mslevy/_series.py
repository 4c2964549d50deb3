"""Anti-diagonal summation of the double series behind every kernel formula.

All the stable and two-scale series in this package share one shape::

    S = sum_{r, n >= 0} (-1)^(r+n) / (r! n!) * Gamma(g(r, n)) * X_r^r * X_n^n
                        * sin(pi * theta(r, n))

with ``g`` and ``theta`` affine in ``(r, n)`` and positive bases ``X_r, X_n``
(powers of t and x). Magnitudes are handled in log space first, which gives
the truncation point and the size of the largest term before any cancellation
happens. If the largest term exceeds the expected sum by more than
``ctrl.mp_threshold`` the sum is redone with mpmath at a working precision
derived from that ratio.

Rational exponents are kept as exact integer-numerator affine maps so that the
multiprecision pass evaluates the phases and Gamma arguments exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
from scipy import special

from .specfun import ConvergenceError, SeriesControl

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Affine:
    """c0 + c_r * r + c_n * n with rational (Fraction) or float coefficients."""

    c0: object
    c_r: object
    c_n: object

    def exact(self):
        return all(isinstance(c, (int, Fraction)) for c in (self.c0, self.c_r, self.c_n))

    def as_float(self, r, n):
        return float(self.c0) + float(self.c_r) * r + float(self.c_n) * n

    def as_int_grid(self):
        """Common denominator form (N0, Nr, Nn, D)."""
        cs = [Fraction(c) for c in (self.c0, self.c_r, self.c_n)]
        den = math.lcm(*(c.denominator for c in cs))
        return tuple(int(c * den) for c in cs) + (den,)

    def as_mp(self, r, n):
        if self.exact():
            N0, Nr, Nn, D = self.as_int_grid()
            return mpmath.mpf(N0 + Nr * r + Nn * n) / D
        return mpmath.mpf(float(self.c0)) + mpmath.mpf(float(self.c_r)) * r + mpmath.mpf(float(self.c_n)) * n


@dataclass(frozen=True)
class PowerBase:
    """Product of powers ``prod value_i ** exp_i`` with values >= 0.

    A zero value with positive exponent makes the base vanish, which callers
    use to collapse a summation index to its first column.
    """

    factors: tuple = ()

    def log(self):
        out = 0.0
        for val, ex in self.factors:
            if ex == 0:
                continue
            if val == 0:
                return -math.inf if float(ex) > 0 else math.inf
            out += float(ex) * math.log(val)
        return out

    def mp(self):
        out = mpmath.mpf(1)
        for val, ex in self.factors:
            if ex == 0:
                continue
            if val == 0:
                return mpmath.mpf(0)
            out *= mpmath.power(mpmath.mpf(val), _mp_num(ex))
        return out


def _mp_num(c):
    if isinstance(c, Fraction):
        return mpmath.mpf(c.numerator) / c.denominator
    return mpmath.mpf(c)


@dataclass(frozen=True)
class DoubleSeries:
    gamma_arg: Affine
    phase: Affine  # sin(pi * phase)
    base_r: PowerBase
    base_n: PowerBase
    r_max: int | None = None  # None: unbounded; 0: single column
    n_max: int | None = None
    skip_origin: bool = False  # drop the (0, 0) term (its sine vanishes)


@dataclass(frozen=True)
class KernelResult:
    """A density or kernel value with its provenance.

    ``formula_id`` names the representation that produced ``value``;
    ``err_est`` is an absolute error estimate (truncation plus rounding).
    """

    value: float
    n_terms_outer: int
    n_terms_inner: int
    err_est: float
    formula_id: str

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "err_est", float(self.err_est))
        if not self.err_est >= 0:
            raise ValueError("err_est must be non-negative")

    def __float__(self):
        return float(self.value)


@dataclass
class SeriesSum:
    value: float
    abs_sum: float
    err_est: float
    n_diagonals: int
    n_terms: int
    dps: int | None  # None for double precision
    max_log_term: float


def _phases_float(aff: Affine, r, n):
    if aff.exact():
        N0, Nr, Nn, D = aff.as_int_grid()
        num = np.mod(N0 + Nr * r + Nn * n, 2 * D)
        return num / D
    return np.mod(aff.as_float(r, n), 2.0)


def _diag_indices(d, r_max, n_max):
    r = np.arange(d + 1)
    n = d - r
    keep = np.ones_like(r, dtype=bool)
    if r_max is not None:
        keep &= r <= r_max
    if n_max is not None:
        keep &= n <= n_max
    return r[keep], n[keep]


class _Scanner:
    """Generates anti-diagonals in double precision and tracks the envelope."""

    def __init__(self, ser: DoubleSeries, ctrl: SeriesControl):
        self.ser = ser
        self.ctrl = ctrl
        Lr = ser.base_r.log()
        Ln = ser.base_n.log()
        self.r_max = 0 if Lr == -math.inf else ser.r_max
        self.n_max = 0 if Ln == -math.inf else ser.n_max
        self.Lr = 0.0 if self.r_max == 0 else Lr
        self.Ln = 0.0 if self.n_max == 0 else Ln
        self.diags = []
        self.env_sums = []
        self.parts = []
        self.abs_sum = 0.0
        self.peak = -math.inf
        self.max_lg = 0.0
        self.n_terms = 0
        self.exhausted = False

    def _add(self, d):
        r, n = _diag_indices(d, self.r_max, self.n_max)
        if r.size == 0:
            self.exhausted = True
            return
        if d == 0 and self.ser.skip_origin:
            self.diags.append((r[:0], n[:0], np.zeros(0)))
            self.env_sums.append(0.0)
            return
        ser = self.ser
        g = np.asarray(ser.gamma_arg.as_float(r, n), dtype=float)
        lg = special.gammaln(g)
        lf = special.gammaln(r + 1.0) + special.gammaln(n + 1.0)
        logenv = lg - lf + r * self.Lr + n * self.Ln
        self.max_lg = max(self.max_lg, float(np.max(np.abs(lg))), float(np.max(lf)))
        ph = _phases_float(ser.phase, r, n)
        vals = np.where((r + n) % 2 == 0, 1.0, -1.0) * np.exp(logenv) * np.sin(np.pi * ph)
        self.diags.append((r, n, logenv))
        self.env_sums.append(float(np.sum(np.exp(logenv))))
        self.parts.extend(vals.tolist())
        self.abs_sum += float(np.sum(np.abs(vals)))
        self.n_terms += r.size
        self.peak = max(self.peak, float(np.max(logenv)))

    def total(self):
        return math.fsum(self.parts)

    def settled(self, ref):
        """True once the last tail_window diagonals sit past the peak and below tolerance."""
        if self.exhausted:
            return True
        w = self.ctrl.tail_window
        if len(self.diags) < w + 1:
            return False
        thr = self.ctrl.threshold(ref)
        for k in range(1, w + 1):
            env = self.env_sums[-k]
            le = self.diags[-k][2]
            dmax = float(np.max(le)) if le.size else -math.inf
            single = self.r_max == 0 and self.n_max == 0
            if env >= thr or (dmax >= self.peak and not single):
                return False
        return True

    def noise(self):
        """Rounding floor of the double-precision running total."""
        return self.abs_sum * EPS * (8 + self.max_lg)

    def run(self, ref_fn, exact_ref=False):
        """Add diagonals until settled relative to ``ref_fn()``.

        A double-precision running total below its own rounding floor says
        nothing about the size of the sum, so it is then treated as zero and
        only the absolute tolerance stops the scan.
        """

        def ref():
            r = ref_fn()
            return r if exact_ref or abs(r) > self.noise() else 0.0

        while not self.settled(ref()):
            d = len(self.diags)
            if d > self.ctrl.max_terms:
                raise ConvergenceError(
                    f"double series did not settle within {self.ctrl.max_terms} anti-diagonals",
                    n_terms=self.n_terms,
                    err_est=self.env_sums[-1] if self.env_sums else math.inf,
                )
            self._add(d)
            if self.exhausted:
                break
            if self.peak / math.log(10) + 20 > self.ctrl.max_dps:
                raise ConvergenceError(
                    f"largest term exceeds 1e{self.ctrl.max_dps - 20}; precision budget exhausted",
                    n_terms=self.n_terms,
                    err_est=math.inf,
                )

    def tail(self):
        if self.exhausted:
            return 0.0
        return self.env_sums[-1]


def sum_double_series(ser: DoubleSeries, ctrl: SeriesControl) -> SeriesSum:
    """Sum ``ser`` by anti-diagonals, escalating precision if needed."""
    sc = _Scanner(ser, ctrl)
    sc.run(sc.total)
    total = sc.total()
    abs_sum = sc.abs_sum
    ratio = abs_sum / max(abs(total), 1e-300)
    if ratio <= ctrl.mp_threshold:
        err = sc.tail() + abs_sum * EPS * (8 + sc.max_lg)
        return SeriesSum(total, abs_sum, err, len(sc.diags), sc.n_terms, None, sc.peak)

    peak10 = sc.peak / math.log(10)
    if peak10 + 20 > ctrl.max_dps:
        raise ConvergenceError(
            f"largest term ~1e{peak10:.0f} needs more than max_dps={ctrl.max_dps} digits",
            n_terms=sc.n_terms,
            err_est=math.inf,
        )
    lost = math.log10(max(ratio, 1.0))
    if abs(total) <= abs_sum * 1e-14:
        lost = max(lost, 18.0)
    dps = int(min(ctrl.max_dps, 20 + math.ceil(lost) + math.ceil(math.log10(8 + sc.max_lg))))
    fval = total
    for _attempt in range(6):
        val = _mp_sum(ser, sc.diags, dps, sc.peak, sc.r_max, sc.n_max)
        fval = float(val)
        # the tail criterion may need more diagonals once the true size is known
        if not sc.settled(fval):
            sc.run(lambda: fval, exact_ref=True)
            val = _mp_sum(ser, sc.diags, dps, sc.peak, sc.r_max, sc.n_max)
            fval = float(val)
        need = 20 + math.log10(max(sc.abs_sum / max(abs(fval), 1e-300), 1.0))
        if need <= dps or dps >= ctrl.max_dps:
            break
        dps = int(min(ctrl.max_dps, math.ceil(need) + 10))
    abs_sum = sc.abs_sum
    if need > dps:
        raise ConvergenceError(
            f"cancellation needs {need:.0f} digits, above max_dps={ctrl.max_dps}",
            n_terms=sc.n_terms,
            err_est=math.inf,
        )
    err = sc.tail() + abs_sum * 10.0 ** (-(dps - 2)) * (8 + sc.max_lg) + EPS * abs(fval)
    return SeriesSum(fval, abs_sum, err, len(sc.diags), sc.n_terms, dps, sc.peak)


def _mp_sum(ser: DoubleSeries, diags, dps, peak, r_max, n_max):
    with mpmath.workdps(dps):
        Xr = ser.base_r.mp() if r_max != 0 else mpmath.mpf(1)
        Xn = ser.base_n.mp() if n_max != 0 else mpmath.mpf(1)
        cut = peak - (dps + 5) * math.log(10)
        fac = [mpmath.mpf(1)]
        total = mpmath.mpf(0)
        pow_r = {}
        pow_n = {}
        for r, n, logenv in diags:
            for ri, ni, le in zip(r.tolist(), n.tolist(), logenv.tolist()):
                if le < cut:
                    continue
                while len(fac) <= max(ri, ni):
                    fac.append(fac[-1] * len(fac))
                g = ser.gamma_arg.as_mp(ri, ni)
                th = ser.phase.as_mp(ri, ni)
                s = mpmath.sinpi(th)
                if s == 0:
                    continue
                if ri not in pow_r:
                    pow_r[ri] = Xr ** ri
                if ni not in pow_n:
                    pow_n[ni] = Xn ** ni
                term = mpmath.gamma(g) * pow_r[ri] * pow_n[ni] * s / (fac[ri] * fac[ni])
                if (ri + ni) % 2:
                    term = -term
                total += term
        return +total


def _exact(v, max_den=64):
    """Fraction if ``v`` is within 1e-12 of a rational with small denominator."""
    if isinstance(v, Fraction):
        return v
    f = Fraction(v).limit_denominator(max_den)
    if abs(float(f) - v) <= 1e-12:
        return f
    return float(v)


def case_a_series(alphas, skews, scales, x):
    """Inverse-power series; value = -S / (pi x).

    ``alphas[j]``, ``skews[j] = (alpha_j - beta_j) / 2`` and ``scales[j]``
    (the product gamma_j t) describe one or two components, all alpha < 1
    for convergence. Index r belongs to the first component, n to the second.
    """
    a1, s1, t1 = _exact(alphas[0]), _exact(skews[0]), scales[0]
    if len(alphas) == 1:
        a2, s2, t2, n_max = Fraction(0), Fraction(0), 0.0, 0
    else:
        a2, s2, t2, n_max = _exact(alphas[1]), _exact(skews[1]), scales[1], None
    return DoubleSeries(
        gamma_arg=Affine(Fraction(1), a1, a2),
        phase=Affine(Fraction(0), s1, s2),
        base_r=PowerBase(((t1, 1), (x, -a1))),
        base_n=PowerBase(((t2, 1), (x, -a2))),
        n_max=n_max,
    )


def case_b_series(big, small, x):
    """Power series in x around the origin, valid when the larger alpha > 1.

    ``big = (M, u, tM)`` belongs to the larger exponent and ``small`` to the
    other one (or None for a single component); ``u = (M - beta_M) / 2`` and
    likewise ``v`` for ``small``. Value = S * tM^(-1/M) / (pi M). Index n is
    the power of x, index r the order in the smaller-exponent multiplier.
    """
    M, u, tM = _exact(big[0]), _exact(big[1]), big[2]
    if small is None:
        m, v, tm, r_max = Fraction(0), Fraction(0), 0.0, 0
    else:
        m, v, tm, r_max = _exact(small[0]), _exact(small[1]), small[2], None
    return DoubleSeries(
        gamma_arg=Affine(1 / M, m / M, 1 / M),
        phase=Affine(u / M, -(v - u * m / M), u / M),
        base_r=PowerBase(((tm, 1), (tM, -m / M))),
        base_n=PowerBase(((x, 1), (tM, -1 / M))),
        r_max=r_max,
    )
