"""Compare the two normalizations of the Hopf coordinate z1.

Since ``B1`` is defined as ``Z - C`` the z-spinor identity holds for either
choice.  With ``z1 = p2 (s + q1)/(s - q1)`` however ``Im Z`` differs from
``Im C``, so ``B1`` is not a real 2-form and cannot serve as a gauge field;
with ``sqrt(p2)`` it is real to rounding.  Prints max residuals over sampled
points of the tube chart.
"""
import argparse

import numpy as np

from gcverify.calculus import FormField
from gcverify.examples import hopf_fixture
from gcverify.expr import evaluate_many
from gcverify.spinor import b_transform_spinor


def residuals(h, z1, Z, pts):
    im_gap = spin_gap = 0.0
    dz1_dz2 = FormField.differential(z1, 4) ^ FormField.differential(h.z2, 4)
    B = Z - h.C
    for p in pts:
        im_gap = max(im_gap, float(np.abs(Z.matrix_at(p).imag - h.C.matrix_at(p).imag).max()))
        a, b = evaluate_many([z1, h.z2], list(map(float, p)))
        zz = complex(a) * complex(b)
        lhs = b_transform_spinor(B.matrix_at(p), h.rho.at(p)) * zz
        spin_gap = max(spin_gap, (lhs - dz1_dz2.at(p) - zz).norm())
    return im_gap, spin_gap


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--samples", type=int, default=64)
    args = ap.parse_args()
    h = hopf_fixture()
    pts = h.charts["X1"].sample(np.random.default_rng(args.seed), args.samples)
    for label, z1, Z in (("sqrt(p2) (implemented)", h.z1, h.Z), ("p2 (literal)", h.z1_literal, h.Z_literal)):
        im_gap, spin_gap = residuals(h, z1, Z, pts)
        print(f"{label:24s} |Im B1| = {im_gap:.3e}   z-spinor residual = {spin_gap:.3e}")


if __name__ == "__main__":
    main()
