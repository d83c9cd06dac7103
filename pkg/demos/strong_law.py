"""Composition proportions converging to the stationary vector.

Simulates batches of replicas at growing horizons and prints the mean
proportions next to pi, plus the spread of the slowest eigendirection.

Run with: python3 demos/strong_law.py
"""
import numpy as np

from urnbound.process import simulate_replicas
from urnbound.spectral import decompose, validate_matrix

R = validate_matrix([[0.7, 0.3], [0.4, 0.6]])
S = decompose(R)
XI = S.structures[0].vectors[0]


def main():
    c0 = [1.0, 0.0]
    print("pi =", np.array_str(S.pi, precision=6))
    print(f"{'n':>7}  {'mean proportions':<24} {'|C_n.xi|/(n+1) median':>22}")
    for n in (100, 1_000, 10_000, 100_000):
        batch = simulate_replicas(c0, R, n, 400, seed=7, threads=2)
        proportions = batch.final_counts.mean(axis=0) / (n + 1)
        scaled = np.median(np.abs(batch.statistics(XI))) / (n + 1)
        print(f"{n:>7}  {np.array_str(proportions, precision=6):<24}"
              f" {scaled:>22.6f}")
    print()
    print("The proportions settle on pi while the projection on the")
    print("nonprincipal eigenvector shrinks relative to the urn size.")


if __name__ == "__main__":
    main()
