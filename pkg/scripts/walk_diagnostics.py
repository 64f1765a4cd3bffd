"""Monte Carlo diagnostics: boundary hitting frequencies and the affine walk.

Writes CSV files (with a metadata header) into --out.
"""

import argparse
from fractions import Fraction
from pathlib import Path

from prodsets.groups import Affine, AffineModel, FreeGroup
from prodsets.measures import FiniteMeasure, sphere_measure
from prodsets.walks import WalkConfig, affine_stationary_estimate, boundary_frequency, histogram_tv, ks_diagnostic


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("walks"))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--samples", type=int, default=10_000)
    ap.add_argument("--p-half", type=Fraction, default=Fraction(2, 3), help="weight of x -> x/2; the rest goes to x -> x+1")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    cfg = WalkConfig(FreeGroup(2), sphere_measure(2, 1), 100, args.seed, args.samples)
    for depth in (1, 2):
        bf = boundary_frequency(cfg, depth)
        worst = max(abs(v - 1 / (4 * 3 ** (depth - 1))) for v in bf.frequencies().values())
        print(f"depth {depth}: {len(bf.counts)} cylinders, max deviation from uniform {worst:.4f}, discarded {bf.discarded}")

    p = FiniteMeasure.from_weights({Affine(-1, 0): args.p_half, Affine(0, 1): 1 - args.p_half})
    hs = [affine_stationary_estimate(WalkConfig(AffineModel(), p, 60, s, 100_000)) for s in (args.seed, args.seed + 1)]
    (args.out / "affine_hist.csv").write_text(hs[0].to_csv())
    print(f"affine: two-seed TV {histogram_tv(*hs):.4f}, diverged {hs[0].diverged}")
    for n, d in ks_diagnostic(p, seed=args.seed):
        print(f"  KS(n={n}) = {d:.4f}")


if __name__ == "__main__":
    main()
