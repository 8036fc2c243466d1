#!/usr/bin/env python3
"""Writes data/ltr_example_matrix.csv: a synthetic 136-ranker preference matrix.

Rankers get a latent quality; pairwise win probabilities follow a logistic
link on the quality gap plus antisymmetric noise, which leaves some
near-tied rankers in preference cycles. Entries are rounded to 4 decimals
with exact complements.
"""
import argparse

import numpy as np


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="data/ltr_example_matrix.csv")
    parser.add_argument("--rankers", type=int, default=136)
    parser.add_argument("--seed", type=int, default=136)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    n = args.rankers
    quality = rng.normal(0.0, 0.3, size=n)
    noise = rng.normal(0.0, 0.04, size=(n, n))
    noise = np.triu(noise, 1)
    noise = noise - noise.T
    p = 1.0 / (1.0 + np.exp(-2.0 * (quality[:, None] - quality[None, :]))) + noise
    p = np.clip(p, 0.01, 0.99)
    p = np.round(p, 4)
    for i in range(n):
        p[i, i] = 0.5
        for j in range(i + 1, n):
            p[j, i] = round(1.0 - p[i, j], 4)

    with open(args.out, "w", encoding="utf-8") as f:
        f.write(",".join(f"r{i}" for i in range(n)) + "\n")
        for row in p:
            f.write(",".join(f"{v:.4f}" for v in row) + "\n")


if __name__ == "__main__":
    main()
