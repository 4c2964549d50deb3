"""Quick invariant suites behind ``mslevy validate``.

Each check returns a :class:`Check` carrying the measured residual and the
threshold it was held to, so the report is machine-readable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class Check:
    suite: str
    name: str
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tol)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status},{self.suite},{self.name},{self.residual:.3e},{self.tol:.1e}"


def _specfun():
    from .specfun import ParamLists, gauss_legendre_check, phyper, reflection_check

    out = []
    for z in (0.25, 0.5, 1 / 3, 0.7 + 0.3j, -2.5, 3.75):
        out.append(Check("specfun", f"reflection z={z}", reflection_check(z), 1e-12))
    for a, n in ((0.3, 2), (0.25, 3), (1.7, 4), (0.5 + 0.5j, 3)):
        out.append(Check("specfun", f"multiplication a={a} n={n}", gauss_legendre_check(a, n), 1e-12))
    # 1F1(1; 1; x) = e^x
    v, _, _ = phyper(ParamLists([1.0], [1.0]), 2.0)
    out.append(Check("specfun", "1F1(1;1;2)=e^2", abs(v - math.exp(2)) / math.exp(2), 1e-13))
    return out


def _stable():
    from .oracle import MultiscaleSpec, invert_fourier
    from .stable import StableComponent, density

    out = []
    cases = [((2.0, 0.0), (-3.0, 0.0, 2.5)), ((1.5, -0.5), (-2.0, 0.5, 3.0)), ((0.5, -0.5), (0.3, 1.0, 4.0))]
    for (a, b), xs in cases:
        comp = StableComponent(a, b)
        res = max(abs(density(comp, 1.0, x, "closed").value - density(comp, 1.0, x, "series").value) for x in xs)
        out.append(Check("stable", f"closed vs series alpha={a:g} beta={b:g}", res, 1e-9))
        res = max(abs(density(comp, 1.0, x, "closed").value - invert_fourier(MultiscaleSpec([comp]), 1.0, x)) for x in xs)
        out.append(Check("stable", f"closed vs oracle alpha={a:g} beta={b:g}", res, 1e-6))
    comp = StableComponent(1.5, -0.5)
    t, x = 2.0, 0.7
    lhs = density(comp, t, x, "closed").value
    rhs = t ** (-1 / 1.5) * density(comp, 1.0, x * t ** (-1 / 1.5), "closed").value
    out.append(Check("stable", "self-similarity alpha=1.5", abs(lhs - rhs), 1e-12))
    return out


def _multiscale():
    from .multiscale import CATALOG_KERNELS, catalog_kernel, kernel_H, kernel_h_onesided
    from .oracle import MultiscaleSpec, invert_fourier
    from .stable import StableComponent

    out = []
    for name, xs in (("biGauss", (-2.0, 0.0, 3.0)), ("gaussLevy", (-1.0, 0.5, 2.0)), ("gaussThreeHalf", (-2.0, 0.0, 2.0))):
        (p1, p2), _ = CATALOG_KERNELS[name]
        c1, c2 = StableComponent(*p1), StableComponent(*p2)
        spec = MultiscaleSpec(sorted([c1, c2], key=lambda c: c.alpha))
        r1 = max(abs(kernel_H(c1, c2, 1.0, x).value - invert_fourier(spec, 1.0, x)) for x in xs)
        r2 = max(abs(kernel_H(c1, c2, 1.0, x).value - catalog_kernel(name, 1.0, x)) for x in xs)
        out.append(Check("multiscale", f"{name} series vs oracle", r1, 1e-6))
        out.append(Check("multiscale", f"{name} series vs catalog", r2, 1e-6))
    for name, xs in (("halfHalf", (0.5, 2.0)), ("halfThird", (0.5, 2.0)), ("thirdTwoThirds", (0.5, 2.0))):
        (p1, p2), _ = CATALOG_KERNELS[name]
        spec = MultiscaleSpec(sorted([StableComponent(*p1), StableComponent(*p2)], key=lambda c: c.alpha))
        r1 = max(abs(kernel_h_onesided(p1[0], p2[0], 1.0, x).value - invert_fourier(spec, 1.0, x)) for x in xs)
        r2 = max(abs(kernel_h_onesided(p1[0], p2[0], 1.0, x).value - catalog_kernel(name, 1.0, x)) for x in xs)
        out.append(Check("multiscale", f"{name} series vs oracle", r1, 1e-6))
        out.append(Check("multiscale", f"{name} series vs catalog", r2, 1e-6))
    return out


def _moments():
    from .moments import hankel_determinants, moment_sequence, moment_series

    out = [Check("moments", "rho(0)=1", abs(moment_series((0.5, 0.5), 0.0) - 1.0), 0.0)]
    seq = moment_sequence((0.5, 0.5), 1.0, range(0, 4))
    out.append(Check("moments", "(1/2,1/2) rho(1)=1/2", abs(seq.rho[1] - 0.5), 1e-13))
    out.append(Check("moments", "(1/2,1/2) rho(2)=3/4", abs(seq.rho[2] - 0.75), 1e-13))
    seq = moment_sequence((2 / 3, 1 / 3), 1.0, range(0, 7))
    dets = hankel_determinants(seq.rho)
    out.append(Check("moments", "(2/3,1/3) Hankel positivity", float(-min(min(dets), 0.0)), 0.0))
    return out


def _claw():
    from .claw import SolverConfig, initial_profile, solve

    cfg = SolverConfig(L=40.0, N=256, dt=0.01, t_end=1.0, spec=[(2.0, 0.0, 1.0)], c=0.0)
    x = np.linspace(-cfg.L, cfg.L, cfg.N, endpoint=False)
    u0 = np.exp(-x * x / 4) / (2 * math.sqrt(math.pi))
    traj = solve(u0, cfg)
    exact = np.exp(-x * x / 8) / (2 * math.sqrt(2 * math.pi))
    out = [Check("claw", "heat vs Gaussian t=1", float(np.max(np.abs(traj.final() - exact))), 1e-12)]
    cfg = SolverConfig(L=32.0, N=256, dt=0.01, t_end=2.0, spec=[(1.5, -0.5, 1.0), (2.0, 0.0, 1.0)], r=3,
                       tail_mass_budget=0.05)
    x = np.linspace(-cfg.L, cfg.L, cfg.N, endpoint=False)
    traj = solve(initial_profile("bump", x, 1.0, 2.0), cfg)
    inv = traj.invariants()
    out.append(Check("claw", "mass drift", inv["mass_drift"], 1e-10))
    out.append(Check("claw", "L1 growth", inv["lp_growth"]["L1"], 1e-8))
    out.append(Check("claw", "max principle", inv["above_max"], 1e-8))
    return out


SUITES = {"specfun": _specfun, "stable": _stable, "multiscale": _multiscale, "moments": _moments, "claw": _claw}


def run(suite: str = "all") -> list:
    """Run one suite (or all) and return the list of checks."""
    if suite == "all":
        return [c for fn in SUITES.values() for c in fn()]
    if suite not in SUITES:
        raise KeyError(f"unknown suite {suite!r}")
    return SUITES[suite]()
