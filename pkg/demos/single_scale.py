"""Single-scale stable densities three ways: closed form, series, Fourier oracle.

Run:  python3 demos/single_scale.py
"""
import numpy as np

from mslevy.oracle import MultiscaleSpec, invert_fourier
from mslevy.specfun import ConvergenceError
from mslevy.stable import StableComponent, catalog_id, density

CASES = [(2, 0), (1.5, -0.5), (0.5, -0.5), (1 / 3, -1 / 3), (2 / 3, -2 / 3)]


def main():
    print(f"{'case':>16} {'x':>6} {'closed':>14} {'series':>14} {'oracle':>14}")
    for a, b in CASES:
        comp = StableComponent(a, b)
        xs = [-3.0, 0.0, 2.0] if a > 1 else [0.2, 1.0, 5.0]
        for x in xs:
            closed = density(comp, 1.0, x, "closed").value
            try:
                series = density(comp, 1.0, x, "series").value
            except ConvergenceError:
                series = float("nan")
            oracle = invert_fourier(MultiscaleSpec([comp]), 1.0, x)
            print(f"{catalog_id(comp):>16} {x:6.2f} {closed:14.10f} {series:14.10f} {oracle:14.10f}")

    # the alpha = 1/3 density is tiny below x ~ 1e-3 and peaks near x = 0.03
    comp = StableComponent(1 / 3, -1 / 3)
    xs = np.geomspace(1e-3, 1, 7)
    print("\nalpha = 1/3 near the origin")
    for x in xs:
        print(f"  x={x:9.2e}  v={density(comp, 1.0, x, 'closed').value:.6e}")


if __name__ == "__main__":
    main()
