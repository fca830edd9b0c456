#!/usr/bin/env python3
"""Score a bench table with each built-in proxy task and report the rank
correlations, reproducing the preset comparison at desk scale.

    python scripts/rank_presets.py --bench data/bench32.csv --seed 0
"""

import argparse
import sys
import time

import numpy as np

from regnas import bench, cnn_space, metrics, presets, proxy, rng as rngmod


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--bench", default="data/bench32.csv")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--presets", nargs="*", default=sorted(presets.PRESETS))
    a = ap.parse_args()

    table = bench.BenchTable.load(a.bench)
    ids = sorted(table.rows)
    genotypes = [cnn_space.CnnGenotype.from_id(i) for i in ids]
    gt = table.oriented(ids)

    print(f"{'preset':>8} {'rho':>7} {'tau':>7} {'rr@25%':>7} {'secs':>6}")
    for name in a.presets:
        task = presets.get_preset(name)
        t0 = time.time()
        scores = proxy.score_population(
            genotypes, task, rngmod.spawn_seed(a.seed, "proxy", name), jobs=a.jobs
        )
        pred = np.array([-s.weighted for s in scores])
        rho = metrics.spearman_rho(pred, gt)
        tau = metrics.kendall_tau(pred, gt)
        rr = metrics.retrieving_rate(pred, gt, 0.25)
        print(f"{name:>8} {rho:7.3f} {tau:7.3f} {rr:7.3f} {time.time() - t0:6.0f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
