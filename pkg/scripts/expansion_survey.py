#!/usr/bin/env python3
"""Survey boundary expansion of generated matrices at small sizes.

For each d, samples 50 matrices with 4 blocks of 16 columns (uniform
selector functions, so each block column is uniform per row), exhaustively
computes min_{|S| <= t} hw(OR of rows in S) / (k |S|), and reports the
distribution. The 0.5 threshold used by the expansion smoke test was frozen
from this survey: pass rates at gamma = 1 - 1/sqrt(4) = 0.5, t = 4 were
50/50, 50/50 and 49/50 for d = 4, 5, 6.
"""

import itertools
import pathlib
import sys
import time

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from csppke.expandergen import generate
from csppke.f2core import _row_masks
from csppke.params import GenParams
from csppke.rng import stream

GAMMA = 0.5
T = 4
SEEDS = 50


def min_ratio(G, t: int) -> float:
    masks = _row_masks(G)
    worst = 1.0
    for s in range(1, t + 1):
        combos = np.array(list(itertools.combinations(range(G.m), s)), dtype=np.int64)
        union = np.bitwise_or.reduce(masks[combos], axis=1)
        weights = np.bitwise_count(union).sum(axis=1)
        worst = min(worst, float(weights.min()) / (G.k * s))
    return worst


def main() -> None:
    for d in (4, 5, 6):
        start = time.time()
        ratios = []
        for seed in range(SEEDS):
            gen = GenParams(d=d, n=64, k=4, window_bits=4, poly_degree=d)
            gm = generate(gen, stream(seed, "exp", d))
            ratios.append(min_ratio(gm.G, T))
        r = np.array(ratios)
        passes = int((r >= GAMMA).sum())
        print(
            f"d={d}: pass {passes}/{SEEDS} at gamma={GAMMA} t={T} | "
            f"min={r.min():.3f} p10={np.percentile(r, 10):.3f} "
            f"median={np.median(r):.3f} ({time.time() - start:.1f}s)"
        )


if __name__ == "__main__":
    main()
