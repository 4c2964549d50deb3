"""The supercritical two-scale conservation law from configs/supercritical.cfg.

Prints the scaled distance to the linear evolution, which should shrink, and
the fitted sup-norm decay rate against -1/alpha.

Run:  python3 demos/supercritical_run.py
"""
import math
from pathlib import Path

from mslevy.claw import asymptotics_report, build_initial, decay_fit, load_config, solve

CFG = Path(__file__).resolve().parents[1] / "configs" / "supercritical.cfg"


def main():
    cfg, extras = load_config(CFG)
    traj = solve(build_initial(cfg, extras), cfg)
    reps = {p: dict(asymptotics_report(traj, cfg, p)) for p in (1, 2, math.inf)}
    print(f"{'t':>8} {'p=1':>12} {'p=2':>12} {'p=inf':>12}")
    for t in sorted(reps[1]):
        if t < 0.9 and t != min(reps[1]):
            continue
        print(f"{t:8.3f} " + " ".join(f"{reps[p][t]:12.4e}" for p in reps))
    print("invariants:", traj.invariants())
    print(f"sup-norm decay exponent {decay_fit(traj, math.inf, (5, 50)):.3f}, predicted {-1 / cfg.alpha:.3f}")


if __name__ == "__main__":
    main()
