"""Run both calibration targets on a small shift box and print what they certify.

The full default box (every shift exponent in [-2, 2]) is what the command
line uses; it takes a minute or two.  Here each exponent is restricted to
{0, 1/4, 1/2} so the tour finishes in seconds.
"""
from fractions import Fraction

from elliptic_hopf.cartan import cartan_matrix
from elliptic_hopf.relations import UNKNOWNS, CheckWindow, calibrate_shifts

A2 = cartan_matrix("A2")
box = {u: [Fraction(k, 4) for k in range(3)] for u in UNKNOWNS}

for targets in (("EE", "FF", "H"), ("EF",)):
    res = calibrate_shifts(targets, A2, box, CheckWindow(3, 4))
    print(f"targets {'+'.join(targets)}: {res.scanned} assignments in {res.classes} ratio classes")
    print("  literal assignment passes:", res.literal["passed"])
    for sol in res.solutions:
        print(f"  class {sol['ratio_class']:>12}  twist {sol['e_twist']:>14}  "
              f"h+ {sol['h_plus']:>10}  h- {sol['h_minus']:>14}  [{sol['evidence']}]")
        if "residual" in sol:
            print("    other targets under this certificate:", sol["residual"])
