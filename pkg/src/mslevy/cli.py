"""Command-line front end: ``mslevy density|kernel|moments|solve|validate``.

Every CSV starts with ``#`` manifest lines (command, parameters, library
version, formula provenance) so a file can be regenerated from its header.
Wall time goes to stderr only, which keeps identical invocations
byte-identical. Exit codes: 0 ok, 1 validation failure, 2 usage error,
3 numerical failure, 4 solver blow-up.
"""
from __future__ import annotations

import argparse
import io
import math
import os
import sys
import time
import warnings

import numpy as np

from . import __version__
from .specfun import ConvergenceError, PoleError

EXIT_OK, EXIT_VALIDATION, EXIT_USAGE, EXIT_NUMERIC, EXIT_BLOWUP = 0, 1, 2, 3, 4

FIG2_CURVES = [("I", "biGauss"), ("II", "gaussLevy"), ("III", "gaussThreeHalf")]
FIG1_CURVES = [("I", "halfHalf"), ("II", "halfThird"), ("III", "thirdTwoThirds")]
FIG3_TIMES = [("I", 0.8), ("II", 1.0), ("III", 1.2)]


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    pass


def _fmt(v) -> str:
    return "%.17g" % v


def _manifest(command, params: dict, provenance: dict) -> list:
    lines = [f"# command={command}", f"# version={__version__}"]
    for k in sorted(params):
        lines.append(f"# param.{k}={params[k]}")
    for col in sorted(provenance):
        lines.append(f"# formula_id.{col}={provenance[col]}")
    return lines


def _emit(lines, out):
    text = "\n".join(lines) + "\n"
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _grid(args):
    if args.n is None or args.n < 1:
        raise UsageError("the grid needs n >= 1 points")
    if args.x0 is None or args.x1 is None:
        raise UsageError("--x0 and --x1 are required")
    if args.n == 1 and args.x0 != args.x1:
        raise UsageError("a one-point grid needs x0 == x1")
    return np.linspace(args.x0, args.x1, args.n)


def _ids(ids):
    return "|".join(sorted(set(ids)))


# ----------------------------------------------------------------- density


def cmd_density(args):
    from .stable import StableComponent, density

    try:
        comp = StableComponent(args.alpha, args.beta, args.gamma)
    except ValueError as exc:
        raise UsageError(str(exc))
    if not args.t > 0:
        raise UsageError("t must be positive")
    xs = _grid(args)
    rows, ids = [], []
    for x in xs:
        try:
            res = density(comp, args.t, float(x), method=args.method)
        except ValueError as exc:
            if "catalog" in str(exc) or "closed form" in str(exc):
                raise UsageError(str(exc))
            raise NumericalFailure(f"density ({args.method}) failed at x={x:g}: {exc}")
        except (ConvergenceError, OverflowError, PoleError) as exc:
            raise NumericalFailure(f"density ({args.method}) failed at x={x:g}: {exc}")
        rows.append(f"{_fmt(x)},{_fmt(res.value)},{_fmt(res.err_est)}")
        ids.append(res.formula_id)
    params = dict(alpha=args.alpha, beta=args.beta, gamma=args.gamma, t=args.t, x0=args.x0, x1=args.x1, n=args.n, method=args.method)
    lines = _manifest("density", params, {"value": _ids(ids), "err_est": "plumbing"})
    _emit(lines + ["x,value,err_est"] + rows, args.out)


# ------------------------------------------------------------------ kernel


def _kernel_value(c1, c2, t, x, method, catalog=None):
    from . import multiscale
    from .oracle import MultiscaleSpec, invert_fourier

    if method == "catalog":
        return multiscale.catalog_kernel(catalog, t, x), 0.0, "catalog:" + catalog
    if method == "oracle":
        comps = sorted([c1, c2], key=lambda c: c.alpha)
        v, e = invert_fourier(MultiscaleSpec(comps), t, x, return_error=True)
        return v, e, "oracle"
    onesided = all(c.one_sided for c in (c1, c2))
    if onesided:
        res = multiscale.kernel_h_onesided(c1.alpha, c2.alpha, t, x, gammas=(c1.gamma, c2.gamma))
    else:
        res = multiscale.kernel_H(c1, c2, t, x)
    return res.value, res.err_est, res.formula_id


def _catalog_name(c1, c2):
    from .multiscale import CATALOG_KERNELS

    key = sorted([(round(c1.alpha, 9), round(c1.beta, 9)), (round(c2.alpha, 9), round(c2.beta, 9))])
    for name, (pars, _) in CATALOG_KERNELS.items():
        if sorted((round(a, 9), round(b, 9)) for a, b in pars) == key and c1.gamma == c2.gamma == 1:
            return name
    return None


def _figure_rows(fig, method):
    from .multiscale import CATALOG_KERNELS
    from .stable import StableComponent

    if fig == "fig3":
        from .moments import convexity_check

        ys = np.linspace(-2.0, 6.0, 33)
        cols, ids = [], {}
        for label, t in FIG3_TIMES:
            vals, _ = convexity_check((1 / 3, 2 / 3), t, ys)
            cols.append(vals)
            ids[f"curve_{label}"] = f"convexity:t={t:g}"
        header = "y," + ",".join(f"curve_{label}" for label, _ in FIG3_TIMES)
        rows = [",".join([_fmt(y)] + [_fmt(c[i]) for c in cols]) for i, y in enumerate(ys)]
        return header, rows, ids, dict(figure=fig, t="0.8|1|1.2")
    curves = FIG2_CURVES if fig == "fig2" else FIG1_CURVES
    xs = np.linspace(-6.0, 6.0, 121) if fig == "fig2" else np.linspace(0.05, 4.0, 80)
    cols, ids = [], {}
    for label, name in curves:
        (p1, p2), _ = CATALOG_KERNELS[name]
        c1, c2 = StableComponent(*p1), StableComponent(*p2)
        vals, used = [], []
        for x in xs:
            v, _, fid = _kernel_value(c1, c2, 1.0, float(x), method, name)
            vals.append(v)
            used.append(fid)
        cols.append(vals)
        ids[f"curve_{label}"] = _ids(used)
    header = "x," + ",".join(f"curve_{label}" for label, _ in curves)
    rows = [",".join([_fmt(x)] + [_fmt(c[i]) for c in cols]) for i, x in enumerate(xs)]
    return header, rows, ids, dict(figure=fig, t=1, method=method)


def cmd_kernel(args):
    from .stable import StableComponent

    if args.figure:
        method = args.method if args.method != "series" else "series"
        try:
            header, rows, ids, params = _figure_rows(args.figure, method)
        except (ConvergenceError, OverflowError, PoleError) as exc:
            raise NumericalFailure(f"figure {args.figure} failed: {exc}")
        _emit(_manifest("kernel", params, ids) + [header] + rows, args.out)
        return
    if args.alpha1 is None or args.alpha2 is None:
        raise UsageError("kernel needs --alpha1 and --alpha2 (or --figure)")
    try:
        c1 = StableComponent(args.alpha1, args.beta1, args.gamma1)
        c2 = StableComponent(args.alpha2, args.beta2, args.gamma2)
    except ValueError as exc:
        raise UsageError(str(exc))
    if not args.t > 0:
        raise UsageError("t must be positive")
    name = None
    if args.method == "catalog":
        name = _catalog_name(c1, c2)
        if name is None:
            raise UsageError("no catalog formula for these parameters")
    xs = _grid(args)
    rows, ids = [], []
    for x in xs:
        try:
            v, e, fid = _kernel_value(c1, c2, args.t, float(x), args.method, name)
        except (ConvergenceError, OverflowError, PoleError, ValueError) as exc:
            raise NumericalFailure(f"kernel ({args.method}) failed at x={x:g}: {exc}")
        rows.append(f"{_fmt(x)},{_fmt(v)},{_fmt(e)}")
        ids.append(fid)
    params = dict(alpha1=args.alpha1, beta1=args.beta1, gamma1=args.gamma1, alpha2=args.alpha2, beta2=args.beta2,
                  gamma2=args.gamma2, t=args.t, x0=args.x0, x1=args.x1, n=args.n, method=args.method)
    _emit(_manifest("kernel", params, {"value": _ids(ids), "err_est": "plumbing"}) + ["x,value,err_est"] + rows, args.out)


# ----------------------------------------------------------------- moments


def _orders(text):
    try:
        if ":" in text:
            a, b = text.split(":")
            lo, hi = int(a), int(b)
        elif ".." in text:
            a, b = text.split("..")
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise UsageError(f"bad order range {text!r}; use n0:n1")
    if hi < lo or lo < 0:
        raise UsageError(f"empty or negative order range {text!r}")
    return list(range(lo, hi + 1))


def cmd_moments(args):
    from . import moments

    orders = _orders(args.orders)
    try:
        spec = moments.as_spec((args.alpha1, args.alpha2))
    except ValueError as exc:
        raise UsageError(str(exc))
    if not args.t > 0:
        raise UsageError("t must be positive")
    rows = []
    logs = {}
    for n in orders:
        try:
            logs[n] = moments.log_stieltjes_moment(spec, n, args.t)
        except (ConvergenceError, PoleError, ValueError) as exc:
            raise NumericalFailure(f"moment of order n={n} diverges or failed: {exc}")
    N = max(args.carleman_n, max(orders))
    try:
        carl = moments.carleman_diagnostic(spec, args.t, N)
    except (ConvergenceError, PoleError) as exc:
        raise NumericalFailure(f"Carleman diagnostic failed: {exc}")
    partial = 0.0
    for n in orders:
        rho = 1.0 if n == 0 else math.exp(logs[n])
        if n == 0:
            term = float("nan")
        else:
            term = math.exp(-logs[n] / (2 * n))
        partial = carl.partial_sums[n - 1] if n >= 1 else 0.0
        rows.append(f"{n},{_fmt(rho)},{_fmt(term)},{_fmt(partial)}")
    params = dict(alpha1=args.alpha1, alpha2=args.alpha2, t=args.t, orders=args.orders, carleman_n=N)
    prov = {"rho": "moment_series", "carleman_term": "rho^(-1/(2n))", "partial_sum": "cumulative from n=1"}
    footer = [f"# exponent={carl.exponent:.6g}", f"# verdict={carl.verdict}"]
    _emit(_manifest("moments", params, prov) + ["n,rho,carleman_term,partial_sum"] + rows + footer, args.out)


# ------------------------------------------------------------------- solve


def cmd_solve(args):
    from . import claw

    try:
        cfg, extras = claw.load_config(args.config)
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}")
    except claw.ConfigError as exc:
        raise UsageError(f"{args.config}: {exc}")
    try:
        u0 = claw.build_initial(cfg, extras)
        traj = claw.solve(u0, cfg)
    except claw.ConfigError as exc:
        raise UsageError(f"{args.config}: {exc}")
    except claw.BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        sys.exit(EXIT_BLOWUP)
    out = args.out
    os.makedirs(out, exist_ok=True)
    header = {"command": "solve", "version": __version__, "config": os.path.basename(args.config),
              "spec": cfg.spec.fingerprint()}
    claw.write_snapshots(traj, out, header)
    ps = [claw._p_value(p.strip()) for p in extras["report_p"].split(",") if p.strip()]
    metrics = {
        "version": __version__,
        "config": os.path.basename(args.config),
        "spec": cfg.spec.fingerprint(),
        "r": cfg.r,
        "c": cfg.c,
        "supercritical": cfg.supercritical,
        "n_steps": traj.n_steps,
        "tail_mass": claw.tail_mass_estimate(cfg.spec, cfg.t_end, cfg.L),
        "invariants": traj.invariants(),
        "diagnostics": [dict(t=t, **d) for t, d in zip(traj.times, traj.diagnostics)],
        "warnings": traj.warnings,
    }
    cols = {}
    if extras["linear_reference"]:
        for p in ps:
            rep = claw.asymptotics_report(traj, cfg, p)
            cols[f"scaled_gap_p{p:g}"] = rep
        late = [t for t in traj.times if t >= 5]
        if len(late) >= 2:
            metrics["decay_fit_Linf"] = claw.decay_fit(traj, math.inf, (5.0, max(late)))
            metrics["decay_predicted_Linf"] = -1.0 / cfg.alpha
    if extras["source_reference"]:
        try:
            for p in ps:
                t_shift = 1.0 if extras["u0"] == "source" else 0.0
                cols[f"source_gap_p{p:g}"] = claw.critical_asymptotics_report(traj, cfg, p, t_shift)
        except NotImplementedError as exc:
            raise UsageError(str(exc))
    if cols:
        names = sorted(cols)
        lines = [f"# {k}={v}" for k, v in header.items()]
        lines.append("t," + ",".join(names))
        times = [t for t, _ in cols[names[0]]]
        for i, t in enumerate(times):
            lines.append(",".join([_fmt(t)] + [_fmt(cols[n][i][1]) for n in names]))
        with open(os.path.join(out, "asymptotics.csv"), "w") as fh:
            fh.write("\n".join(lines) + "\n")
        metrics["scaled_gap"] = {n: [g for _, g in cols[n]] for n in names}
        metrics["scaled_gap_times"] = times
    claw.write_metrics(os.path.join(out, "metrics.json"), metrics)


# ---------------------------------------------------------------- validate


def cmd_validate(args):
    from . import validate

    results = validate.run(args.suite)
    buf = io.StringIO()
    ok = True
    for r in results:
        ok &= r.passed
        buf.write(r.line() + "\n")
    buf.write(f"# suite={args.suite} passed={sum(r.passed for r in results)}/{len(results)}\n")
    _emit([buf.getvalue().rstrip("\n")], args.out)
    if not ok:
        sys.exit(EXIT_VALIDATION)


# ------------------------------------------------------------------ parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def build_parser():
    p = _Parser(prog="mslevy", description="Multiscale stable densities, kernels, moments and conservation-law runs.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def grid_args(sp):
        sp.add_argument("--t", type=float, default=1.0)
        sp.add_argument("--x0", type=float)
        sp.add_argument("--x1", type=float)
        sp.add_argument("--n", type=int)
        sp.add_argument("--out", default="-", help="output file (default stdout)")

    d = sub.add_parser("density", help="tabulate a single-scale stable density")
    d.add_argument("--alpha", type=float, required=True)
    d.add_argument("--beta", type=float, default=0.0)
    d.add_argument("--gamma", type=float, default=1.0)
    d.add_argument("--method", choices=["series", "closed", "oracle", "auto"], default="series")
    grid_args(d)
    d.set_defaults(func=cmd_density)

    k = sub.add_parser("kernel", help="tabulate a two-scale kernel or a figure preset")
    for i in (1, 2):
        k.add_argument(f"--alpha{i}", type=float)
        k.add_argument(f"--beta{i}", type=float, default=0.0)
        k.add_argument(f"--gamma{i}", type=float, default=1.0)
    k.add_argument("--method", choices=["series", "catalog", "oracle"], default="series")
    k.add_argument("--figure", choices=["fig1", "fig2", "fig3"])
    grid_args(k)
    k.set_defaults(func=cmd_kernel)

    m = sub.add_parser("moments", help="Stieltjes moments and the Carleman diagnostic")
    m.add_argument("--alpha1", type=float, required=True)
    m.add_argument("--alpha2", type=float, required=True)
    m.add_argument("--t", type=float, default=1.0)
    m.add_argument("--orders", default="0:5", help="order range n0:n1")
    m.add_argument("--carleman-n", dest="carleman_n", type=int, default=40)
    m.add_argument("--out", default="-")
    m.set_defaults(func=cmd_moments)

    s = sub.add_parser("solve", help="run the conservation-law solver from a config file")
    s.add_argument("config")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("validate", help="run invariant suites")
    v.add_argument("--suite", choices=["specfun", "stable", "multiscale", "moments", "claw", "all"], default="all")
    v.add_argument("--out", default="-")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # --help and --version exit 0; argument errors exit EXIT_USAGE
        return int(exc.code or 0)
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    t0 = time.perf_counter()
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            args.func(args)
    except UsageError as exc:
        print(f"mslevy {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailure as exc:
        print(f"mslevy {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SystemExit as exc:
        return int(exc.code or 0)
    print(f"# wall_time={time.perf_counter() - t0:.3f}s", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
