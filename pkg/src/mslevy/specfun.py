"""Scalar special functions shared by the density and kernel evaluators.

Gamma-function identities, Pochhammer symbols, a generalized hypergeometric
series summed with an explicit stopping rule, the ``Delta(n, a)`` parameter
lists, and thin, range-checked wrappers for the parabolic cylinder, modified
Bessel K and Whittaker W functions.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np
from scipy import special

__all__ = [
    "SeriesControl",
    "ParamLists",
    "PoleError",
    "ConvergenceError",
    "ln_gamma",
    "reflection_check",
    "gauss_legendre_check",
    "pochhammer",
    "phyper",
    "delta_list",
    "parabolic_cylinder_D",
    "bessel_K",
    "whittaker_W",
]

EPS = np.finfo(float).eps


class PoleError(ValueError):
    """Argument sits on a pole of the Gamma function."""


class ConvergenceError(ArithmeticError):
    """A series or quadrature did not reach its tolerance."""

    def __init__(self, msg, n_terms=None, err_est=None):
        super().__init__(msg)
        self.n_terms = n_terms
        self.err_est = err_est


@dataclass(frozen=True)
class SeriesControl:
    """Truncation settings for every series evaluator in the package.

    A series stops once ``tail_window`` consecutive terms (or anti-diagonals,
    for double series) satisfy ``|term| < abs_tol + rel_tol * |partial sum|``.
    For double series ``max_terms`` caps the anti-diagonal index.
    ``mp_threshold`` is the ratio of the absolute sum of terms to the result
    above which summation is redone in multiprecision, with working precision
    capped at ``max_dps`` digits.
    """

    max_terms: int = 4000
    abs_tol: float = 1e-17
    rel_tol: float = 1e-16
    tail_window: int = 3
    mp_threshold: float = 1e4
    max_dps: int = 160

    def __post_init__(self):
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")
        if self.abs_tol < 0 or self.rel_tol < 0:
            raise ValueError("tolerances must be non-negative")
        if self.abs_tol == 0 and self.rel_tol == 0:
            raise ValueError("at least one of abs_tol, rel_tol must be positive")
        if self.tail_window < 1:
            raise ValueError("tail_window must be >= 1")
        if self.mp_threshold < 1:
            raise ValueError("mp_threshold must be >= 1")

    def threshold(self, partial):
        return self.abs_tol + self.rel_tol * abs(partial)


DEFAULT_CONTROL = SeriesControl()


@dataclass(frozen=True)
class ParamLists:
    """Upper and lower parameter lists of a pFq series."""

    upper: tuple = ()
    lower: tuple = ()

    def __init__(self, upper: Sequence = (), lower: Sequence = ()):
        object.__setattr__(self, "upper", tuple(upper))
        object.__setattr__(self, "lower", tuple(lower))
        for b in self.lower:
            if _is_nonpositive_integer(b):
                raise ValueError(f"lower parameter {b!r} is a non-positive integer")


def _is_nonpositive_integer(z, tol=1e-12):
    z = complex(z)
    return abs(z.imag) <= tol and z.real <= tol and abs(z.real - round(z.real)) <= tol


def ln_gamma(z):
    """Principal-branch log Gamma for real or complex ``z``."""
    if _is_nonpositive_integer(z, tol=0.0):
        raise PoleError(f"Gamma has a pole at {z!r}")
    return complex(special.loggamma(complex(z)))


def _gamma(z):
    return cmath.exp(ln_gamma(z))


def reflection_check(z) -> float:
    """Relative residual of Gamma(z) Gamma(1-z) = pi / sin(pi z)."""
    z = complex(z)
    if _is_nonpositive_integer(z, tol=0.0) or _is_nonpositive_integer(1 - z, tol=0.0):
        raise PoleError(f"reflection formula undefined at {z!r}")
    rhs = math.pi / cmath.sin(math.pi * z)
    lhs = cmath.exp(ln_gamma(z) + ln_gamma(1 - z))
    return abs(lhs - rhs) / abs(rhs)


def gauss_legendre_check(a, n: int) -> float:
    """Relative residual of the Gauss-Legendre multiplication formula."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    a = complex(a)
    args = [a + j / n for j in range(n)] + [n * a]
    for z in args:
        if _is_nonpositive_integer(z, tol=0.0):
            raise PoleError(f"multiplication formula hits a pole at {z!r}")
    log_rhs = (0.5 * (1 - n)) * math.log(2 * math.pi) + (n * a - 0.5) * math.log(n)
    log_rhs += sum(ln_gamma(z) for z in args[:-1])
    lhs = _gamma(n * a)
    rhs = cmath.exp(log_rhs)
    return abs(lhs - rhs) / abs(lhs)


def pochhammer(a, n: int):
    """Rising factorial (a)_n by direct product; exact at Gamma poles of ``a``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    out = 1.0
    for k in range(n):
        out *= a + k
    return out


def phyper(params: ParamLists, x, ctrl: SeriesControl = DEFAULT_CONTROL, dps: int | None = None, keep_mp: bool = False):
    """Generalized hypergeometric series pFq(upper; lower; x).

    Returns ``(value, n_terms, err_est)``. Consecutive terms are generated by
    the Pochhammer ratio, so no Gamma function of a large index is formed.
    ``err_est`` is the last accepted term magnitude plus a rounding bound
    proportional to the sum of absolute terms. With ``dps`` set, the terms are
    accumulated in mpmath arithmetic at that many digits and the value is
    returned as a Python float or complex, or as the mpmath number itself
    when ``keep_mp`` is true.
    """
    if not isinstance(params, ParamLists):
        params = ParamLists(*params)
    is_real = all(complex(v).imag == 0 for v in params.upper + params.lower) and complex(x).imag == 0
    if dps is None:
        conv = complex
        unit_eps = EPS
    else:
        conv = mpmath.mpc
        unit_eps = 10.0 ** (-dps)
    ctx = mpmath.workdps(dps) if dps is not None else _NullCtx()
    with ctx:
        upper = [conv(a) for a in params.upper]
        lower = [conv(b) for b in params.lower]
        x = conv(x)
        term = conv(1)
        total = conv(1)
        abs_sum = 1.0
        below = 0
        last = 1.0
        done = None
        for n in range(ctrl.max_terms):
            ratio = x / (n + 1)
            for a in upper:
                ratio *= a + n
            for b in lower:
                ratio /= b + n
            term = term * ratio
            if term == 0:
                # terminating (polynomial) series or underflow
                done = (n + 1, unit_eps * abs_sum)
                break
            total += term
            mag = float(abs(term))
            abs_sum += mag
            last = mag
            if mag < ctrl.threshold(float(abs(total))):
                below += 1
                if below >= ctrl.tail_window:
                    done = (n + 2, last + 4 * unit_eps * abs_sum)
                    break
            else:
                below = 0
        if done is None:
            raise ConvergenceError(
                f"pFq series did not converge in {ctrl.max_terms} terms (x={complex(x)})",
                n_terms=ctrl.max_terms,
                err_est=last,
            )
        if keep_mp and dps is not None:
            return total, done[0], done[1]
        val = complex(total)
    return (val.real if is_real else val), done[0], done[1]


class _NullCtx:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


def delta_list(n: int, a) -> list:
    """The list a/n, (a+1)/n, ..., (a+n-1)/n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return [(a + j) / n for j in range(n)]


def parabolic_cylinder_D(nu: float, z: float) -> float:
    """Parabolic cylinder function D_nu(z) for real nu >= -1."""
    if not (math.isfinite(nu) and math.isfinite(z)):
        raise ValueError("D_nu needs finite arguments")
    if nu < -1:
        raise ValueError(f"nu={nu} outside the supported range nu >= -1")
    val = float(mpmath.pcfd(nu, z))
    if not math.isfinite(val):
        raise OverflowError(f"D_{nu}({z}) overflows double precision")
    return val


def bessel_K(nu: float, z: float) -> float:
    """Modified Bessel function of the second kind, real order |nu| <= 2."""
    if z <= 0:
        raise ValueError("bessel_K requires z > 0")
    if abs(nu) > 2:
        raise ValueError(f"order {nu} outside the supported range |nu| <= 2")
    val = float(special.kv(nu, z))
    if not math.isfinite(val):
        raise OverflowError(f"K_{nu}({z}) overflows double precision")
    return val


def whittaker_W(kappa: float, mu: float, z: float) -> float:
    """Whittaker W_{kappa,mu}(z) for z > 0."""
    if z <= 0:
        raise ValueError("whittaker_W requires z > 0")
    if abs(mu) >= 1:
        raise ValueError(f"mu={mu} outside the supported range |mu| < 1")
    val = float(mpmath.whitw(kappa, mu, z))
    if not math.isfinite(val):
        raise OverflowError(f"W_{kappa},{mu}({z}) overflows double precision")
    return val
