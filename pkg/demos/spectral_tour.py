"""Tour of the spectral layer: stationary vectors, real spectra,
eigenvectors, Jordan chains and indicator expansions.

Run with: python3 demos/spectral_tour.py
"""
import numpy as np

from urnbound.spectral import decompose, validate_matrix

MATRICES = {
    "two-color": [[0.7, 0.3], [0.4, 0.6]],
    "defective": [[5 / 8, 3 / 8, 0.0],
                  [1 / 8, 3 / 8, 1 / 2],
                  [1 / 4, 1 / 4, 1 / 2]],
    "symmetric": [[0.5, 0.25, 0.25],
                  [0.25, 0.5, 0.25],
                  [0.25, 0.25, 0.5]],
}


def show(name, rows):
    R = validate_matrix(rows)
    S = decompose(R)
    print(f"== {name} ==")
    print("matrix:")
    print(np.array_str(R.matrix, precision=4))
    print("stationary pi:", np.array_str(S.pi, precision=6))
    for lam, alg, geo in S.eigenvalues:
        print(f"eigenvalue {lam:+.4f}  algebraic {alg}  geometric {geo}")
    for st in S.structures:
        kind = "jordan chain" if st.jordan else "eigenvector(s)"
        print(f"lambda={st.value:g} {kind}:")
        for v in st.vectors:
            print("   ", np.array_str(v, precision=6))
        if st.jordan:
            xi2, xi3 = st.vectors
            m = R.matrix
            print("    chain residuals:",
                  f"{np.max(np.abs(m @ xi2 - st.value * xi2)):.2e}",
                  f"{np.max(np.abs(m @ xi3 - xi2 - st.value * xi3)):.2e}")
    print("indicator coefficients (row per color, column order = basis):")
    print(np.array_str(S.alphas, precision=6))
    # column 0 must reproduce pi: dotting the expansion with pi kills
    # every right vector
    assert np.allclose(S.alphas[:, 0], S.pi)
    print()


def main():
    for name, rows in MATRICES.items():
        show(name, rows)


if __name__ == "__main__":
    main()
