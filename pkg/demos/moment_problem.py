"""Stieltjes moments of the one-sided kernels and what the Carleman sums say.

The closed-form weight for (1/2, 1/2) is checked, then the Carleman partial
sums of all three pairs are printed. The (2/3, 1/3) moments grow no faster
than those of a single alpha = 2/3 law, since the sum of two positive
variables dominates each of them; the Carleman terms therefore decay like
n^(-1/2) or slower and the sum diverges.

Run:  python3 demos/moment_problem.py
"""
import math

from mslevy.moments import carleman_diagnostic, moment_sequence, stieltjes_weight

SPECS = {"(1/2,1/2)": (0.5, 0.5), "(1/2,1/3)": (0.5, 1 / 3), "(2/3,1/3)": (2 / 3, 1 / 3)}


def main():
    print("W(1/2,1/2; t=1, x=1) =", stieltjes_weight((0.5, 0.5), 1.0, 1.0), " exact", math.exp(-1) / math.sqrt(math.pi))
    for label, spec in SPECS.items():
        seq = moment_sequence(spec, 1.0, range(0, 6))
        res = carleman_diagnostic(spec, 1.0, 40)
        print(f"\n{label}: rho(0..5) = " + ", ".join(f"{r:.4g}" for r in seq.rho))
        print(f"  partial sums n=10,20,40: {res.partial_sums[9]:.3f} {res.partial_sums[19]:.3f} {res.partial_sums[39]:.3f}")
        print(f"  fitted term decay exponent {res.exponent:.3f}, verdict {res.verdict}")


if __name__ == "__main__":
    main()
