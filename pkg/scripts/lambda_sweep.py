#!/usr/bin/env python3
"""Sensitivity of the industry retail fraction to the prior weight and its reduction."""
import argparse

import numpy as np

from depsplit import dgm, synth


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lams", type=float, nargs="+", default=[0.0, 0.1, 1.0, 10.0, 100.0])
    ap.add_argument("--banks", type=int, default=100)
    ap.add_argument("--steps", type=int, default=3000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    r = synth.generate_panel(synth.SynthSpec(n_banks=args.banks, seed=args.seed, macro=False))
    want = r.truth.industry_retail_fraction(r.panel.mask)
    print("reduction  lambda  max_err_pp  final_loss")
    for reduction in ("mean", "sum"):
        for lam in args.lams:
            cfg = dgm.DgmConfig(lam=lam, steps=args.steps, prior_reduction=reduction)
            fit = dgm.fit(r.panel, cfg)
            got = dgm.aggregate_industry(dgm.infer_retail(fit.nets, r.panel, cfg)).retail_fraction
            print(f"{reduction:9s}  {lam:6g}  {100 * np.abs(got - want).max():10.2f}  "
                  f"{fit.trace[-1]:10.4g}")


if __name__ == "__main__":
    main()
