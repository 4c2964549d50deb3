"""Burgers source solution: the Hopf-Cole profile against the printed variant,
and a run started from a narrow bump approaching the source profile.

Run:  python3 demos/burgers_source.py
"""
import math
from pathlib import Path

import numpy as np

from mslevy.claw import build_initial, burgers_source, critical_asymptotics_report, load_config, solve, source_mass_constant

CFG = Path(__file__).resolve().parents[1] / "configs" / "burgers.cfg"


def main():
    x = np.linspace(-8, 12, 11)
    hc = burgers_source(1.0, 1.0, x)
    pr = burgers_source(1.0, 1.0, x, "printed")
    print(f"K(1) for the printed profile: {source_mass_constant(1.0):.6f}")
    print(f"{'x':>6} {'hopf_cole':>12} {'printed':>12}")
    for row in zip(x, hc, pr):
        print("{:6.1f} {:12.6f} {:12.6f}".format(*row))

    cfg, extras = load_config(CFG)
    traj = solve(build_initial(cfg, dict(extras, u0="bump", u0_width=0.5)), cfg)
    print("\nscaled L2 gap to the source solution")
    for t, g in critical_asymptotics_report(traj, cfg, 2):
        if t >= 1:
            print(f"  t={t:7.3f}  {g:.4e}")


if __name__ == "__main__":
    main()
