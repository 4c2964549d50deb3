import math
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate

from mslevy.claw import (
    AliasingWarning,
    BlowUpError,
    ConfigError,
    SolverConfig,
    asymptotics_report,
    build_initial,
    burgers_source,
    critical_asymptotics_report,
    decay_fit,
    grid,
    hopf_cole_evolve,
    initial_profile,
    linear_evolve,
    linear_propagator,
    load_config,
    norm,
    parse_config,
    solve,
    source_mass_constant,
    tail_mass_estimate,
    time_order_fit,
)
from mslevy.oracle import MultiscaleSpec, oracle_profile

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
TWO_SCALE = MultiscaleSpec([(1.5, -0.5, 1), (2, 0, 1)])
HEAT = MultiscaleSpec([(2, 0, 1)])


def _check_invariants(traj, u0):
    inv = traj.invariants()
    assert inv["mass_drift"] < 1e-10
    for key in ("L1", "L2", "Linf"):
        assert inv["lp_growth"][key] <= 1e-8, key
    lo, hi = float(np.min(u0)), float(np.max(u0))
    for u in traj.snapshots:
        assert np.min(u) >= lo - 1e-6
        assert np.max(u) <= hi + 1e-6


# ------------------------------------------------------------ propagator


def test_propagator_identity():
    m = linear_propagator(TWO_SCALE, 0.0, 256, 10.0)
    assert np.array_equal(m, np.ones(256, dtype=complex))


def test_propagator_heat():
    N, L, tau = 512, 20.0, 0.3
    w = np.pi * np.fft.fftfreq(N, d=1.0 / N) / L
    m = linear_propagator(HEAT, tau, N, L)
    assert np.max(np.abs(m - np.exp(-tau * w * w))) < 1e-15


def test_propagator_semigroup():
    a = linear_propagator(TWO_SCALE, 0.3, 1024, 30.0)
    b = linear_propagator(TWO_SCALE, 0.9, 1024, 30.0)
    c = linear_propagator(TWO_SCALE, 1.2, 1024, 30.0)
    assert np.max(np.abs(a * b - c)) < 1e-13
    assert linear_propagator(TWO_SCALE, 5.0, 64, 1.0)[0] == 1


def test_propagator_rejects_negative_time():
    with pytest.raises(ValueError):
        linear_propagator(HEAT, -1.0, 64, 1.0)


def test_linear_evolve_moves_mass_like_the_oracle():
    # the skewed alpha = 3/2 component drifts mass to the left; compare against the oracle mean shape
    cfg = SolverConfig(L=256, N=2048, dt=0.1, t_end=1.0, spec=MultiscaleSpec([(1.5, -0.5, 1)]), c=0)
    x = grid(cfg)
    u0 = initial_profile("gaussian", x, width=0.5)
    u = linear_evolve(u0, cfg, 1.0)
    assert abs(math.fsum(u) * cfg.dx - 1) < 1e-12
    assert x[np.argmax(u)] > 0  # mode sits right of 0 when the heavy tail is on the left


# ----------------------------------------------------------------- solve


def test_heat_against_gaussian():
    cfg = SolverConfig(L=40, N=1024, dt=0.05, t_end=1.0, spec=HEAT, c=0)
    x = grid(cfg)
    u0 = np.exp(-x * x / 2) / math.sqrt(2 * math.pi)
    traj = solve(u0, cfg)
    var = 1 + 2 * 1.0
    exact = np.exp(-x * x / (2 * var)) / math.sqrt(2 * math.pi * var)
    assert np.max(np.abs(traj.final() - exact)) < 1e-8
    _check_invariants(traj, u0)


def test_burgers_against_hopf_cole():
    cfg = SolverConfig(L=40, N=1024, dt=1e-3, t_end=1.0, spec=HEAT, r=2, c=1)
    x = grid(cfg)
    f = lambda y: np.exp(-y * y / 2) / math.sqrt(2 * math.pi)
    traj = solve(f(x), cfg)
    mask = np.abs(x) < 15
    ref = hopf_cole_evolve(f, 1.0, x[mask])
    # g(u) = u |u| equals u^2 here because the solution stays positive
    assert np.min(traj.final()) > -1e-12
    assert np.max(np.abs(traj.final()[mask] - ref)) < 1e-5


def test_hopf_cole_heat_limit():
    # tiny data: Burgers reduces to the heat equation
    f = lambda y: 1e-8 * np.exp(-y * y / 2) / math.sqrt(2 * math.pi)
    x = np.linspace(-5, 5, 11)
    heat = 1e-8 * np.exp(-x * x / 6) / math.sqrt(6 * math.pi)
    assert np.max(np.abs(hopf_cole_evolve(f, 1.0, x) - heat)) < 1e-14


def test_zero_flux_matches_oracle_convolution():
    cfg, extras = load_config(CONFIGS / "linear.cfg")
    x = grid(cfg)
    u0 = build_initial(cfg, extras)
    traj = solve(u0, cfg)
    # oracle kernel on the lattice of differences; u0 is below 1e-300 beyond |y| = 40
    lag = np.arange(-120, 121) * cfg.dx
    src = np.abs(x) <= 40
    ys, ws = x[src], u0[src]
    for t in (1.0, 5.0):
        K = oracle_profile(cfg.spec, t, lag).value
        out = np.searchsorted(x, [-20.0, 20.0])
        xs = x[out[0]: out[1] + 1]
        ref = np.array([np.sum(np.interp(xi - ys, lag, K) * ws) * cfg.dx for xi in xs])
        u = traj.snapshots[traj.times.index(t)]
        assert np.max(np.abs(u[out[0]: out[1] + 1] - ref)) < 1e-7


def test_blowup_detection():
    # negative diffusion is not admissible, so provoke the abort with a huge flux instead
    cfg = SolverConfig(L=20, N=256, dt=0.05, t_end=2.0, spec=HEAT, r=2, c=-200.0, dealias=False, blowup_factor=1.5)
    u0 = initial_profile("gaussian", grid(cfg), mass=5.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(BlowUpError):
            solve(u0, cfg)


def test_aliasing_warning():
    cfg = SolverConfig(L=20, N=64, dt=0.01, t_end=0.05, spec=MultiscaleSpec([(1.5, 0, 1e-3)]), c=0)
    u0 = initial_profile("box", grid(cfg), width=2.0)
    with pytest.warns(AliasingWarning):
        solve(u0, cfg, check_tail=False)


def test_boundary_mass_rejected_by_budget():
    cfg = SolverConfig(L=10, N=256, dt=0.1, t_end=10.0, spec=MultiscaleSpec([(0.5, 0, 1)]))
    with pytest.raises(ConfigError):
        cfg.check_tail_mass()
    assert tail_mass_estimate(HEAT, 1.0, 10.0) == math.erfc(10 / 2)


def test_solver_is_deterministic():
    cfg = SolverConfig(L=40, N=256, dt=0.05, t_end=2.0, spec=TWO_SCALE, r=3, tail_mass_budget=1.0)
    u0 = initial_profile("bump", grid(cfg))
    a = solve(u0, cfg).final()
    b = solve(u0, cfg).final()
    assert a.tobytes() == b.tobytes()


def test_norm():
    u = np.array([1.0, -2.0, 2.0])
    assert norm(u, 1.0, math.inf) == 2
    assert norm(u, 0.5, 1) == 2.5
    assert abs(norm(u, 1.0, 2) - 3) < 1e-15
    with pytest.raises(ValueError):
        norm(u, 1.0, 0.5)


def test_time_order():
    cfg = SolverConfig(L=40, N=512, dt=0.1, t_end=1.0, spec=TWO_SCALE, r=3, c=1, tail_mass_budget=1.0)
    u0 = initial_profile("bump", grid(cfg), mass=2.0)
    q = time_order_fit(u0, cfg, [0.1, 0.05, 0.025, 0.0125])
    assert abs(q - 2) < 0.2


# ------------------------------------------------------- supercritical run


@pytest.fixture(scope="module")
def supercritical():
    cfg, extras = load_config(CONFIGS / "supercritical.cfg")
    u0 = build_initial(cfg, extras)
    return cfg, u0, solve(u0, cfg)


def test_supercritical_config(supercritical):
    cfg, _, _ = supercritical
    assert cfg.supercritical and cfg.alpha == 1.5 and cfg.r == 3


def test_supercritical_invariants(supercritical):
    cfg, u0, traj = supercritical
    _check_invariants(traj, u0)


@pytest.mark.parametrize("p", [1, 2, math.inf])
def test_supercritical_scaled_gap(supercritical, p):
    cfg, _, traj = supercritical
    rep = dict(asymptotics_report(traj, cfg, p))
    t1 = min(rep, key=lambda t: abs(t - 1))
    t30 = min(rep, key=lambda t: abs(t - 30))
    assert rep[t1] / rep[t30] >= 3
    late = [v for t, v in sorted(rep.items()) if t >= 1]
    assert all(b < a for a, b in zip(late, late[1:]))


def test_supercritical_decay(supercritical):
    cfg, _, traj = supercritical
    assert abs(decay_fit(traj, math.inf, (5, 50)) + 1 / cfg.alpha) < 0.1


def test_comparison_principle():
    cfg = SolverConfig(L=64, N=512, dt=0.02, t_end=5.0, spec=TWO_SCALE, r=3, c=1,
                       output_times=(1.0, 2.0, 3.0, 4.0), tail_mass_budget=1.0)
    x = grid(cfg)
    u0 = initial_profile("bump", x, mass=1.0)
    v0 = initial_profile("bump", x, mass=1.5)
    assert np.all(u0 <= v0)
    tu, tv = solve(u0, cfg), solve(v0, cfg)
    l1_0 = norm(u0 - v0, cfg.dx, 1)
    for u, v in zip(tu.snapshots, tv.snapshots):
        assert np.all(u <= v + 1e-6)
        assert norm(u - v, cfg.dx, 1) <= l1_0 + 1e-8


def test_zero_flux_gap_vanishes():
    cfg = SolverConfig(L=128, N=512, dt=0.1, t_end=2.0, spec=TWO_SCALE, c=0, output_times=(1.0,), tail_mass_budget=1.0)
    u0 = initial_profile("gaussian", grid(cfg))
    rep = asymptotics_report(solve(u0, cfg), cfg, 2)
    assert all(v <= 1e-12 for _, v in rep)


# ------------------------------------------------------------ Burgers source


@pytest.mark.parametrize("variant", ["hopf_cole", "printed"])
def test_source_self_similarity(variant):
    x = np.linspace(-10, 10, 21)
    for t in (1.0, 4.0):
        lhs = burgers_source(1.0, t, x, variant)
        rhs = burgers_source(1.0, 1.0, x / math.sqrt(t), variant) / math.sqrt(t)
        assert np.max(np.abs(lhs - rhs)) < 1e-10


@pytest.mark.parametrize("M", [0.1, 1.0, 3.0])
def test_source_mass_hopf_cole(M):
    f = lambda x: burgers_source(M, 1.0, x)
    mass = integrate.quad(f, -np.inf, 0, epsabs=1e-14)[0] + integrate.quad(f, 0, np.inf, epsabs=1e-14)[0]
    assert abs(mass - M) < 1e-8


def test_source_mass_printed():
    K = source_mass_constant(1.0)
    f = lambda x: burgers_source(1.0, 1.0, x, "printed", K=K)
    assert abs(integrate.quad(f, -np.inf, np.inf, epsabs=1e-13)[0] - 1) < 1e-8
    with pytest.raises(ValueError):
        source_mass_constant(100.0)


def test_source_zero_mass_limit():
    x = np.linspace(-5, 5, 11)
    sups = [np.max(burgers_source(M, 1.0, x)) for M in (1e-2, 1e-4, 1e-8)]
    assert all(b < a for a, b in zip(sups, sups[1:]))
    assert sups[-1] < 1e-8


def test_source_variants_differ():
    x = np.linspace(-10, 10, 201)
    d = np.max(np.abs(burgers_source(1.0, 1.0, x, "printed") - burgers_source(1.0, 1.0, x)))
    assert 0.05 < d < 0.1


def test_source_rejects_bad_time():
    with pytest.raises(ValueError):
        burgers_source(1.0, 0.0, 0.0)


def test_critical_narrow_bump():
    cfg, extras = load_config(CONFIGS / "burgers.cfg")
    extras = dict(extras, u0="bump", u0_width=0.5)
    u0 = build_initial(cfg, extras)
    traj = solve(u0, cfg)
    _check_invariants(traj, u0)
    for p in (1, 2, math.inf):
        rep = dict(critical_asymptotics_report(traj, cfg, p))
        t1 = min(rep, key=lambda t: abs(t - 1))
        t30 = min(rep, key=lambda t: abs(t - 30))
        assert rep[t1] / rep[t30] >= 3


def test_critical_source_start():
    cfg, extras = load_config(CONFIGS / "burgers.cfg")
    traj = solve(build_initial(cfg, extras), cfg)
    rep = critical_asymptotics_report(traj, cfg, math.inf, t_shift=1.0)
    assert max(v for _, v in rep) < 1e-6


def test_critical_rejects_fractal():
    cfg = SolverConfig(L=40, N=256, dt=0.1, t_end=1.0, spec=TWO_SCALE, r=2)
    traj = solve(initial_profile("bump", grid(cfg)), replace(cfg, tail_mass_budget=1.0), check_tail=False)
    with pytest.raises(NotImplementedError):
        critical_asymptotics_report(traj, cfg, 2)


# --------------------------------------------------------------- configs


def test_shipped_configs_parse():
    for name in ("supercritical", "linear", "burgers"):
        cfg, extras = load_config(CONFIGS / f"{name}.cfg")
        assert cfg.N >= 64 and cfg.output_times[-1] == cfg.t_end


def test_malformed_config_names_line():
    with pytest.raises(ConfigError, match="line 3"):
        load_config(CONFIGS / "malformed.cfg")


@pytest.mark.parametrize("text,msg", [
    ("L = 1\nN = 64\ndt = 0.1\nt_end = 1\n", "missing"),
    ("L = 1\nN = 64\ndt = 0.1\nt_end = 1\nspec = 2,0,1\nfoo = 3\n", "line 6"),
    ("L = 1\nN = 100\ndt = 0.1\nt_end = 1\nspec = 2,0,1\n", "line 2"),
    ("L = 1\nN = 64\ndt = 0.1\nt_end = 1\nspec = 1,0,1\n", "line 5"),
    ("L = 1\nL = 2\n", "duplicate"),
    ("L 1\n", "line 1"),
])
def test_config_errors(text, msg):
    with pytest.raises(ConfigError, match=msg):
        parse_config(text)
