"""The six named two-scale kernels: series against printed forms and the oracle,
and the figure data written as CSV next to this script.

Run:  python3 demos/two_scale_kernels.py     (fig2 takes about half a minute)
"""
from pathlib import Path

from mslevy.cli import main as cli
from mslevy.multiscale import CATALOG_KERNELS, catalog_kernel, kernel_H, kernel_h_onesided
from mslevy.oracle import MultiscaleSpec, invert_fourier
from mslevy.stable import StableComponent

OUT = Path(__file__).resolve().parent / "out"


def value(p1, p2, x):
    c1, c2 = StableComponent(*p1), StableComponent(*p2)
    if c1.one_sided and c2.one_sided:
        return kernel_h_onesided(c1.alpha, c2.alpha, 1.0, x).value
    return kernel_H(c1, c2, 1.0, x).value


def main():
    for name, ((p1, p2), _) in CATALOG_KERNELS.items():
        spec = MultiscaleSpec(sorted([StableComponent(*p1), StableComponent(*p2)], key=lambda c: c.alpha))
        print(name)
        for x in (0.3, 1.0, 2.5):
            s, c, o = value(p1, p2, x), catalog_kernel(name, 1.0, x), invert_fourier(spec, 1.0, x)
            print(f"   x={x:4.1f}  series {s:.12f}  printed {c:.12f}  oracle {o:.12f}")
    OUT.mkdir(exist_ok=True)
    for fig in ("fig1", "fig2", "fig3"):
        cli(["kernel", "--figure", fig, "--out", str(OUT / f"{fig}.csv")])
        print("wrote", OUT / f"{fig}.csv")


if __name__ == "__main__":
    main()
