"""How the spherical and walk averages of a slice set depend on the base point.

Prints beta_n(A_x) for A = [a1] and a handful of periodic points x, in both
the spherical (Cesaro over spheres) and walk (Cesaro over sigma_1 powers)
families. The limit is nu([a1]) = 1/4 for every x, but the approach is slow
and point-dependent.
"""

import argparse

from prodsets.boundary import CylinderUnion, parse_point
from prodsets.sets import SliceSet, density_profile

POINTS = ["(a1 a2)", "(a2 a1)", "(a2)", "(a1)", "(a2 a1')", "(a1' a2)"]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=12)
    ap.add_argument("--family", choices=["spherical", "walk"], default="spherical")
    args = ap.parse_args()
    U = CylinderUnion.cylinder(2, (1,))
    for v in POINTS:
        x = parse_point(f"point:u=(),v={v}")
        prof = density_profile(SliceSet(U, x), args.family, args.n)
        vals = " ".join(f"{float(b):.4f}" for _, b in prof.values)
        print(f"{x.spec():28s} {vals}")


if __name__ == "__main__":
    main()
