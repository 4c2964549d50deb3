"""Pseudospectral solver for u_t + A u + (g(u))_x = 0 on a periodic interval.

A is the generator of a multiscale stable process, applied exactly as the
Fourier multiplier exp(tau psi); the flux term is integrated with the
second-order exponential time differencing scheme of Cox and Matthews, which
is a discretisation of the Duhamel (mild solution) formula. Helpers compare
runs against the pure linear evolution and against the Burgers source
solution, and fit the observed decay rates.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize, special

from .oracle import MultiscaleSpec, char_exponent
from .stable import StableComponent

__all__ = [
    "BlowUpError",
    "ConfigError",
    "AliasingWarning",
    "SolverConfig",
    "Trajectory",
    "grid",
    "linear_propagator",
    "linear_evolve",
    "solve",
    "norm",
    "asymptotics_report",
    "decay_fit",
    "burgers_source",
    "source_mass_constant",
    "critical_asymptotics_report",
    "hopf_cole_evolve",
    "tail_mass_estimate",
    "time_order_fit",
    "initial_profile",
    "parse_config",
    "load_config",
    "write_snapshots",
    "write_metrics",
]


class BlowUpError(RuntimeError):
    """Sup norm grew past the abort threshold."""

    def __init__(self, msg, t=None):
        super().__init__(msg)
        self.t = t


class ConfigError(ValueError):
    """Malformed run configuration."""


class AliasingWarning(UserWarning):
    """Energy in the upper third of the spectrum exceeds the alias budget."""


def _pow2(n):
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class SolverConfig:
    """Discretisation and model of one run.

    The domain is [-L, L) with N points. The flux is g(u) = c u |u|^(r-1)
    unless ``flux`` supplies a pointwise function. ``output_times`` lists
    the snapshot times (t_end is always included). ``tail_mass_budget`` caps
    the mass of the linear kernel outside [-L, L] at t_end.
    """

    L: float
    N: int
    dt: float
    t_end: float
    spec: MultiscaleSpec
    r: float = 2.0
    c: float = 1.0
    dealias: bool = True
    output_times: tuple = ()
    tail_mass_budget: float = 1e-8
    blowup_factor: float = 2.0
    alias_tol: float = 1e-6
    flux: Callable | None = None

    def __post_init__(self):
        if not self.L > 0:
            raise ConfigError("L must be positive")
        if not (isinstance(self.N, (int, np.integer)) and _pow2(int(self.N)) and self.N >= 64):
            raise ConfigError(f"N must be a power of two >= 64, got {self.N}")
        if not (self.dt > 0 and self.t_end > 0):
            raise ConfigError("dt and t_end must be positive")
        if not self.r > 1:
            raise ConfigError("the flux exponent r must exceed 1")
        if not isinstance(self.spec, MultiscaleSpec):
            object.__setattr__(self, "spec", MultiscaleSpec(self.spec))
        times = sorted(set(float(t) for t in self.output_times if 0 < t < self.t_end) | {float(self.t_end)})
        object.__setattr__(self, "output_times", tuple(times))

    @property
    def alpha(self) -> float:
        """The smallest stability index, which sets the large-time rates."""
        return min(self.spec.alphas)

    @property
    def supercritical(self) -> bool:
        return self.r > max(self.alpha, 1.0)

    @property
    def dx(self) -> float:
        return 2 * self.L / self.N

    def g(self, u):
        if self.flux is not None:
            return self.flux(u)
        if self.c == 0:
            return np.zeros_like(u)
        return self.c * u * np.abs(u) ** (self.r - 1)

    def check_tail_mass(self):
        """Raise ConfigError if the periodised linear kernel loses too much mass."""
        m = tail_mass_estimate(self.spec, self.t_end, self.L)
        if m > self.tail_mass_budget:
            raise ConfigError(
                f"linear kernel mass outside [-L, L] at t={self.t_end:g} is {m:.3g}, "
                f"above the budget {self.tail_mass_budget:.3g}; enlarge L or raise tail_mass_budget"
            )
        return m


def tail_mass_estimate(spec: MultiscaleSpec, t: float, L: float) -> float:
    """Mass of the linear kernel outside [-L, L] at time t.

    Components with alpha < 2 contribute their power-law tails
    c_pm L^(-alpha) / alpha with c = t gamma Gamma(1+alpha) sin(pi (alpha -+ beta)/2) / pi,
    the Gaussian component its exact two-sided tail. The estimate is
    asymptotic in L.
    """
    spec = spec if isinstance(spec, MultiscaleSpec) else MultiscaleSpec(spec)
    total = 0.0
    var = 0.0
    for comp in spec.components:
        a, b, g = comp.alpha, comp.beta, comp.gamma
        if a == 2:
            var += 2 * g * t
            continue
        for sgn in (1, -1):
            c = t * g * math.gamma(1 + a) * math.sin(0.5 * math.pi * (a - sgn * b)) / math.pi
            total += max(c, 0.0) * L ** (-a) / a
    if var > 0:
        total += math.erfc(L / math.sqrt(2 * var))
    return total


def grid(cfg: SolverConfig) -> np.ndarray:
    return -cfg.L + cfg.dx * np.arange(cfg.N)


def _omega(N, L):
    return np.pi * np.fft.fftfreq(N, d=1.0 / N) / L


def linear_propagator(spec, tau: float, N: int, L: float) -> np.ndarray:
    """Fourier multiplier of e^(-tau A) on the grid omega_k = pi k / L (numpy FFT order).

    With numpy's transform sum u_j exp(-i omega x_j) the multiplier is
    exp(tau psi(-omega_k)), psi being the characteristic exponent.
    """
    if tau < 0:
        raise ValueError("tau must be non-negative")
    spec = spec if isinstance(spec, MultiscaleSpec) else MultiscaleSpec(spec)
    w = _omega(N, L)
    out = np.exp(tau * char_exponent(spec, -w))
    out[0] = 1.0
    return out


def _half(mult, N):
    """rfft layout of a full-length multiplier; the Nyquist entry is made real."""
    h = mult[: N // 2 + 1].copy()
    h[-1] = abs(mult[N // 2])
    return h


def linear_evolve(u0, cfg: SolverConfig, t: float) -> np.ndarray:
    """e^(-t A) u0 on the periodic grid."""
    m = _half(linear_propagator(cfg.spec, t, cfg.N, cfg.L), cfg.N)
    return np.fft.irfft(m * np.fft.rfft(u0), n=cfg.N)


def _phi(z):
    """phi_1(z) = (e^z - 1)/z and phi_2(z) = (e^z - 1 - z)/z^2, Taylor near 0."""
    z = np.asarray(z, dtype=complex)
    p1 = np.empty_like(z)
    p2 = np.empty_like(z)
    small = np.abs(z) < 0.1
    zs = z[small]
    a1 = np.zeros_like(zs)
    a2 = np.zeros_like(zs)
    term = np.ones_like(zs)
    for k in range(12):
        # term = z^k / k!
        a1 += term / (k + 1)
        a2 += term / ((k + 1) * (k + 2))
        term = term * zs / (k + 1)
    p1[small] = a1
    p2[small] = a2
    zb = z[~small]
    em = np.expm1(zb)
    p1[~small] = em / zb
    p2[~small] = (em - zb) / zb**2
    return p1, p2


def norm(u, dx: float, p) -> float:
    """Grid L^p norm; p may be math.inf."""
    u = np.asarray(u)
    if p == math.inf or p == "inf":
        return float(np.max(np.abs(u)))
    p = float(p)
    if p < 1:
        raise ValueError("p must be >= 1")
    return float((np.sum(np.abs(u) ** p) * dx) ** (1 / p))


def _diagnostics(u, dx):
    return {
        "mass": float(math.fsum(u) * dx),
        "L1": norm(u, dx, 1),
        "L2": norm(u, dx, 2),
        "Linf": norm(u, dx, math.inf),
        "min": float(np.min(u)),
        "max": float(np.max(u)),
    }


@dataclass
class Trajectory:
    """Snapshots of one run at its output times (t = 0 first)."""

    times: list
    snapshots: list
    diagnostics: list
    x: np.ndarray
    cfg: SolverConfig = None
    n_steps: int = 0
    warnings: list = field(default_factory=list)

    @property
    def u0(self):
        return self.snapshots[0]

    def final(self):
        return self.snapshots[-1]

    def invariants(self) -> dict:
        """Observed mass drift, L^p growth and max-principle excursions."""
        d0 = self.diagnostics[0]
        mass0 = d0["mass"]
        drift = max(abs(d["mass"] - mass0) for d in self.diagnostics) / abs(mass0) if mass0 else 0.0
        growth = {}
        for key in ("L1", "L2", "Linf"):
            vals = [d[key] for d in self.diagnostics]
            growth[key] = max(max(b - a for a, b in zip(vals, vals[1:])), 0.0) if len(vals) > 1 else 0.0
        below = max(d0["min"] - d["min"] for d in self.diagnostics)
        above = max(d["max"] - d0["max"] for d in self.diagnostics)
        return {
            "mass_drift": drift,
            "lp_growth": growth,
            "below_min": max(below, 0.0),
            "above_max": max(above, 0.0),
        }


def solve(u0, cfg: SolverConfig, check_tail: bool = True) -> Trajectory:
    """Integrate from u0 to cfg.t_end with ETD-RK2; snapshots at cfg.output_times.

    Raises BlowUpError when the sup norm exceeds ``blowup_factor`` times its
    initial value, and warns (AliasingWarning) when the upper third of the
    spectrum holds more than ``alias_tol`` of the energy.
    """
    u = np.array(u0, dtype=float)
    if u.shape != (cfg.N,):
        raise ValueError(f"u0 must have {cfg.N} points")
    if check_tail:
        cfg.check_tail_mass()
    N, dx = cfg.N, cfg.dx
    scale0 = float(np.max(np.abs(u)))
    edge = (np.sum(np.abs(u[: N // 32])) + np.sum(np.abs(u[-N // 32:]))) * dx
    if scale0 > 0 and edge > 1e-8 * np.sum(np.abs(u)) * dx:
        warnings.warn("initial data carries mass near the periodic boundary", AliasingWarning, stacklevel=2)
    w = _omega(N, cfg.L)[: N // 2 + 1]
    w[-1] = abs(w[-1])
    ik = 1j * w
    mask = np.ones(N // 2 + 1)
    if cfg.dealias:
        mask[np.arange(N // 2 + 1) > N // 3] = 0.0
    mask[-1] = 0.0  # the Nyquist mode has no well-defined derivative
    lin = char_exponent(cfg.spec, -np.fft.fftfreq(N, d=1.0 / N)[: N // 2 + 1] * np.pi / cfg.L)
    lin = np.asarray(lin, dtype=complex)
    lin[0] = 0.0
    lin[-1] = lin[-1].real
    cache = {}

    def coeffs(h):
        key = round(h, 15)
        if key not in cache:
            z = h * lin
            p1, p2 = _phi(z)
            cache[key] = (np.exp(z), h * p1, h * p2)
        return cache[key]

    def nonlin(vh):
        v = np.fft.irfft(vh, n=N)
        return -ik * mask * np.fft.rfft(cfg.g(v))

    uh = np.fft.rfft(u)
    t = 0.0
    times, snaps, diags = [0.0], [u.copy()], [_diagnostics(u, dx)]
    notes = []
    warned = False
    steps = 0
    for t_out in cfg.output_times:
        span = t_out - t
        n = max(1, int(math.ceil(span / cfg.dt - 1e-9)))
        h = span / n
        E, P1, P2 = coeffs(h)
        for _ in range(n):
            Nu = nonlin(uh)
            a = E * uh + P1 * Nu
            uh = a + P2 * (nonlin(a) - Nu)
            steps += 1
        t = t_out
        u = np.fft.irfft(uh, n=N)
        sup = float(np.max(np.abs(u)))
        if not np.isfinite(sup) or (scale0 > 0 and sup > cfg.blowup_factor * scale0):
            raise BlowUpError(f"sup norm {sup:.3g} exceeds {cfg.blowup_factor:g} x initial at t={t:g}", t=t)
        energy = np.abs(uh) ** 2
        tail = energy[N // 3:].sum() / max(energy.sum(), 1e-300)
        if tail > cfg.alias_tol and not warned:
            msg = f"spectral tail holds {tail:.2e} of the energy at t={t:g}"
            warnings.warn(msg, AliasingWarning, stacklevel=2)
            notes.append(msg)
            warned = True
        times.append(t)
        snaps.append(u)
        diags.append(_diagnostics(u, dx))
    return Trajectory(times, snaps, diags, grid(cfg), cfg, steps, notes)


# ------------------------------------------------------------- asymptotics


def _p_value(p):
    if p in ("inf", "Linf") or p == math.inf:
        return math.inf
    p = float(p)
    if not p >= 1:
        raise ValueError("p must lie in [1, inf]")
    return p


def _rate(p, alpha):
    return (1 - 1 / p) / alpha if p != math.inf else 1 / alpha


def asymptotics_report(traj: Trajectory, cfg: SolverConfig, p=2):
    """(t, t^((1-1/p)/alpha) ||u(t) - e^(-tA) u0||_p) at the snapshot times t > 0.

    alpha is the smallest stability index of ``spec``.
    """
    p = _p_value(p)
    u0 = traj.u0
    out = []
    for t, u in zip(traj.times, traj.snapshots):
        if t == 0:
            continue
        gap = norm(u - linear_evolve(u0, cfg, t), cfg.dx, p)
        out.append((t, t ** _rate(p, cfg.alpha) * gap))
    return out


def decay_fit(traj: Trajectory, p=math.inf, window=(5.0, 50.0)) -> float:
    """Least-squares slope of ln ||u(t)||_p against ln t over the window."""
    p = _p_value(p)
    key = {1.0: "L1", 2.0: "L2", math.inf: "Linf"}.get(p)
    ts, vals = [], []
    for t, u, d in zip(traj.times, traj.snapshots, traj.diagnostics):
        if window[0] <= t <= window[1]:
            ts.append(t)
            vals.append(d[key] if key else norm(u, traj.cfg.dx, p))
    if len(ts) < 2:
        raise ValueError("fewer than two snapshots inside the fit window")
    return float(np.polyfit(np.log(ts), np.log(vals), 1)[0])


def time_order_fit(u0, cfg: SolverConfig, dts: Sequence[float]) -> float:
    """Observed temporal order from final snapshots at successively halved steps.

    Differences between consecutive runs shrink like dt^q; q is fitted by
    least squares on ln(difference) against ln(dt).
    """
    finals = [solve(u0, replace(cfg, dt=d, output_times=()), check_tail=False).final() for d in dts]
    diffs = [norm(a - b, cfg.dx, math.inf) for a, b in zip(finals, finals[1:])]
    return float(np.polyfit(np.log(dts[:-1]), np.log(diffs), 1)[0])


# ------------------------------------------------------------ Burgers source


def source_mass_constant(M: float) -> float:
    """K(M) in the printed source profile, fixed by int U_M(x, 1) dx = M.

    The profile is positive only for K > sqrt(pi)/2, which bounds the
    attainable masses; larger M raises ValueError.
    """
    if not M > 0:
        raise ValueError("M must be positive")
    k0 = 0.5 * math.sqrt(math.pi)

    def mass(K):
        f = lambda x: math.exp(-x * x / 4) / (K + k0 * math.erf(x / 4))
        return integrate.quad(f, -np.inf, np.inf, epsabs=0, epsrel=1e-13, limit=200)[0]

    m_max = mass(k0 * (1 + 1e-12))
    if M >= m_max:
        raise ValueError(f"the printed profile carries at most mass {m_max:.6g}")
    hi = k0 + 1.0
    while mass(hi) > M:
        hi = k0 + 2 * (hi - k0)
    return optimize.brentq(lambda K: mass(K) - M, k0 * (1 + 1e-12), hi, xtol=1e-15, rtol=1e-15)


def burgers_source(M: float, t: float, x, variant: str = "hopf_cole", K: float | None = None):
    """Source solution of u_t - u_xx + (u^2)_x = 0 with u(0) = M delta.

    ``hopf_cole``: (1 - e^-M) G / (1 - (1 - e^-M) Phi(x / sqrt(2t))) with G
    the heat kernel of variance 2t. ``printed``: e^(-x^2/4t) t^(-1/2) over
    K(M) + (1/2) int_0^(x/(2 sqrt t)) exp(-w^2/4) dw. Both are self-similar.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    x = np.asarray(x, dtype=float)
    if variant == "hopf_cole":
        q = -math.expm1(-M)
        heat = np.exp(-x * x / (4 * t)) / math.sqrt(4 * math.pi * t)
        # 1 - q Phi(z) = (1 - q) + q Phi(-z), which stays accurate on the right
        den = (1 - q) + q * special.ndtr(-x / math.sqrt(2 * t))
        out = q * heat / den
    elif variant == "printed":
        if K is None:
            K = source_mass_constant(M)
        inner = 0.5 * math.sqrt(math.pi) * special.erf(x / (4 * math.sqrt(t)))
        out = np.exp(-x * x / (4 * t)) / math.sqrt(t) / (K + inner)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return out if out.ndim else float(out)


def hopf_cole_evolve(u0: Callable, t: float, x, span: float = 60.0, n: int = 24001):
    """Exact Burgers evolution of smooth integrable data through the heat equation.

    u = -phi_x / phi with phi(0, y) = exp(-int_-inf^y u0); both phi and its
    derivative are heat-kernel integrals, done with the trapezoid rule on
    [-span, span].
    """
    y = np.linspace(-span, span, n)
    u0y = u0(y)
    cum = integrate.cumulative_trapezoid(u0y, y, initial=0.0)
    phi0 = np.exp(-cum)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    for i, xi in enumerate(x):
        d = xi - y
        G = np.exp(-d * d / (4 * t))
        out[i] = integrate.trapezoid(d / (2 * t) * G * phi0, y) / integrate.trapezoid(G * phi0, y)
    return out


def _is_classical(cfg):
    comps = cfg.spec.components
    return len(comps) == 1 and comps[0].alpha == 2 and comps[0].beta == 0 and cfg.flux is None and cfg.r == 2


def critical_asymptotics_report(traj: Trajectory, cfg: SolverConfig, p=2, t_shift: float = 0.0):
    """(t, t^((1-1/p)/2) ||u(t) - U_M(t + t_shift)||_p) against the Hopf-Cole source.

    Only the classical case A = -d^2/dx^2 with g(u) = c u^2 has a source
    solution here; c rescales it as U_{cM} / c. Fractal critical sources are
    not available and raise NotImplementedError.
    """
    if not _is_classical(cfg):
        raise NotImplementedError(
            "source solutions of fractal critical conservation laws are not available; "
            "only alpha = 2 with g(u) = c u^2 is supported"
        )
    if cfg.spec.components[0].gamma != 1:
        raise NotImplementedError("the source solution is tabulated for unit diffusion")
    p = _p_value(p)
    M = traj.diagnostics[0]["mass"]
    out = []
    for t, u in zip(traj.times, traj.snapshots):
        if t == 0:
            continue
        U = burgers_source(cfg.c * M, t + t_shift, traj.x, "hopf_cole") / cfg.c
        out.append((t, t ** _rate(p, 2.0) * norm(u - U, cfg.dx, p)))
    return out


# ---------------------------------------------------------------- configs


def initial_profile(kind: str, x, mass: float = 1.0, width: float = 1.0, center: float = 0.0):
    """Initial data on a uniform grid: 'gaussian', 'bump' (compact smooth bump) or 'box'.

    The profile is scaled so that its grid sum times dx equals ``mass``.
    """
    x = np.asarray(x, dtype=float)
    s = (x - center) / width
    if kind == "gaussian":
        f = np.exp(-0.5 * s * s)
    elif kind == "bump":
        f = np.zeros_like(s)
        inside = np.abs(s) < 1
        f[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    elif kind == "box":
        f = (np.abs(s) <= 1).astype(float)
    else:
        raise ValueError(f"unknown initial profile {kind!r}")
    total = math.fsum(f) * (x[1] - x[0])
    if total == 0:
        raise ValueError("the initial profile is not resolved by the grid")
    return mass * f / total


_SCHEMA = {
    "L": float,
    "N": int,
    "dt": float,
    "t_end": float,
    "spec": str,
    "r": float,
    "c": float,
    "dealias": bool,
    "output_times": str,
    "tail_mass_budget": float,
    "blowup_factor": float,
    "alias_tol": float,
    "u0": str,
    "u0_mass": float,
    "u0_width": float,
    "u0_center": float,
    "report_p": str,
    "linear_reference": bool,
    "source_reference": bool,
}
_REQUIRED = ("L", "N", "dt", "t_end", "spec")


def _parse_bool(s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_spec(s):
    comps = []
    for part in s.split(";"):
        part = part.strip()
        if not part:
            continue
        vals = [float(v) for v in part.split(",")]
        if not 1 <= len(vals) <= 3:
            raise ValueError(f"component {part!r} needs alpha[,beta[,gamma]]")
        comps.append(StableComponent(*vals))
    comps.sort(key=lambda c: c.alpha)
    return MultiscaleSpec(comps)


def _parse_times(s):
    s = s.strip()
    if s.startswith("geom:"):
        a, b, n = s[5:].split(":")
        return tuple(float(v) for v in np.geomspace(float(a), float(b), int(n)))
    if s.startswith("lin:"):
        a, b, n = s[4:].split(":")
        return tuple(float(v) for v in np.linspace(float(a), float(b), int(n)))
    return tuple(float(v) for v in s.split(",") if v.strip())


def parse_config(text: str):
    """Parse ``key = value`` lines (``#`` comments) into (SolverConfig, extras).

    ``extras`` holds the initial-data and reporting keys. Errors raise
    ConfigError naming the offending line.
    """
    raw = {}
    lines = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {body!r}")
        key, val = (s.strip() for s in body.split("=", 1))
        if key not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            typ = _SCHEMA[key]
            if typ is bool:
                raw[key] = _parse_bool(val)
            elif typ is int:
                raw[key] = int(val)
            elif typ is float:
                raw[key] = float(val)
            elif key == "spec":
                raw[key] = _parse_spec(val)
            elif key == "output_times":
                raw[key] = _parse_times(val)
            else:
                raw[key] = val
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
        lines[key] = lineno
    missing = [k for k in _REQUIRED if k not in raw]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    extras = {
        "u0": raw.pop("u0", "gaussian"),
        "u0_mass": raw.pop("u0_mass", 1.0),
        "u0_width": raw.pop("u0_width", 1.0),
        "u0_center": raw.pop("u0_center", 0.0),
        "report_p": raw.pop("report_p", "1,2,inf"),
        "linear_reference": raw.pop("linear_reference", False),
        "source_reference": raw.pop("source_reference", False),
    }
    if extras["u0"] not in ("gaussian", "bump", "box", "source"):
        raise ConfigError(f"line {lines.get('u0', 0)}: unknown initial profile {extras['u0']!r}")
    try:
        cfg = SolverConfig(**raw)
    except ConfigError as exc:
        key = str(exc).split()[0]
        where = f"line {lines[key]}: " if key in lines else ""
        raise ConfigError(where + str(exc)) from None
    return cfg, extras


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


def build_initial(cfg: SolverConfig, extras: dict):
    x = grid(cfg)
    if extras["u0"] == "source":
        # the Hopf-Cole source profile at t = 1
        return burgers_source(extras["u0_mass"], 1.0, x, "hopf_cole")
    return initial_profile(extras["u0"], x, extras["u0_mass"], extras["u0_width"], extras["u0_center"])


def write_snapshots(traj: Trajectory, outdir, header: dict | None = None):
    """One ``x,u`` CSV per snapshot; returns the file names."""
    import os

    os.makedirs(outdir, exist_ok=True)
    names = []
    for k, (t, u) in enumerate(zip(traj.times, traj.snapshots)):
        name = os.path.join(outdir, f"snapshot_{k:04d}.csv")
        with open(name, "w") as fh:
            for key, val in (header or {}).items():
                fh.write(f"# {key}={val}\n")
            fh.write(f"# t={t:.17g}\nx,u\n")
            for xi, ui in zip(traj.x, u):
                fh.write(f"{xi:.17g},{ui:.17g}\n")
        names.append(name)
    return names


def write_metrics(path, metrics: dict):
    with open(path, "w") as fh:
        json.dump(metrics, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
