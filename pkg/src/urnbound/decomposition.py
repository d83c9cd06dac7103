"""Exact decompositions of linear urn statistics.

For a right eigenvector xi with real eigenvalue lam, one draw moves the
statistic by C_{j+1}.xi = (1 + lam/(j+1)) C_j.xi + lam (chi_{j+1}.xi -
C_j.xi/(j+1)), where the correction term has conditional mean zero.
Iterating over a trajectory of N draws gives the closed form

    C_N.xi = growth_product(lam, N) * C_0.xi
             + sum_{j=0}^{N-1} tail_product(lam, j, N-1)
               * lam * (chi_{j+1}.xi - C_j.xi/(j+1)),

an exact identity for every realization, not just in expectation.  The
same iteration for a generalized vector xi3 (R xi3 = xi2 + lam xi3) picks
up two extra pieces: a deterministic coefficient on C_0.xi2 given by
appendix_zeroth(), and nested martingale increments against xi2 carrying
the weights jordan_weight().  All weighted sums of squares needed by the
deviation bounds are available exactly (dn_exact) and through calibrated
closed-form envelopes (dn_asymptotic).

Index conventions follow the one-step recursion: weights for a statistic
observed after N draws use tail_product(lam, j, N-1) for j = 0 .. N-1,
and the empty product (j = N-1) equals 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._format import write_csv
from .errors import (
    IndexOrder,
    LambdaOutOfRange,
    NotEigenpair,
    NotJordanPair,
)
from .process import Trajectory

EIGEN_RESID_TOL = 1e-8
CALIBRATION_MAX_LOG2 = 20  # constants cover n up to 2**20


def _check_lambda(lam: float, allow_one: bool = False,
                  allow_zero: bool = True) -> float:
    lam = float(lam)
    high_ok = lam <= 1.0 if allow_one else lam < 1.0
    if not (-1.0 < lam and high_ok):
        top = "1]" if allow_one else "1)"
        raise LambdaOutOfRange(f"lam={lam} outside (-1, {top}")
    if not allow_zero and lam == 0.0:
        raise LambdaOutOfRange(
            "lam=0 is handled by the repeated-zero decomposition")
    return lam


def growth_product(lam: float, n: int) -> float:
    """prod_{j=0}^{n-1} (1 + lam/(j+1)); empty product (n=0) is 1.

    Admits lam in (-1, 1]; the right endpoint telescopes to n + 1.
    """
    lam = _check_lambda(lam, allow_one=True)
    if n < 0:
        raise IndexOrder(f"n={n} must be nonnegative")
    if n == 0:
        return 1.0
    return float(np.prod(1.0 + lam / np.arange(1, n + 1)))


def tail_product(lam: float, j: int, n: int) -> float:
    """prod_{k=j+1}^{n} (1 + lam/(k+1)); equals 1 at j = n."""
    lam = _check_lambda(lam, allow_one=True)
    if not 0 <= j <= n:
        raise IndexOrder(f"need 0 <= j <= n, got j={j}, n={n}")
    if j == n:
        return 1.0
    return float(np.prod(1.0 + lam / np.arange(j + 2, n + 2)))


def tail_products(lam: float, n: int) -> np.ndarray:
    """All tail products for j = 0 .. n in one backward pass."""
    lam = _check_lambda(lam, allow_one=True)
    if n < 0:
        raise IndexOrder(f"n={n} must be nonnegative")
    factors = 1.0 + lam / np.arange(2, n + 2)
    out = np.ones(n + 1)
    out[:n] = np.cumprod(factors[::-1])[::-1]
    return out


def _prefix_products(lam: float, m: int) -> np.ndarray:
    """growth_product(lam, k) for k = 0 .. m."""
    out = np.ones(m + 1)
    if m > 0:
        out[1:] = np.cumprod(1.0 + lam / np.arange(1, m + 1))
    return out


def zeroth_term(lam: float, n: int, c0: float) -> float:
    """Deterministic coefficient of the decomposition after n + 1 draws:
    growth_product(lam, n + 1) * c0."""
    lam = _check_lambda(lam)
    if n < 0:
        raise IndexOrder(f"n={n} must be nonnegative")
    return growth_product(lam, n + 1) * c0


@dataclass
class MartingaleExpansion:
    """Exact expansion of C_N.xi for one trajectory of N draws.

    reconstructed = zeroth + weights . increments and must match the
    simulated statistic `actual` to float accuracy.
    """

    eigenvalue: float
    zeroth: float
    weights: np.ndarray
    increments: np.ndarray
    reconstructed: float
    actual: float

    @property
    def residual(self) -> float:
        """|reconstructed - actual| / max(1, |actual|)."""
        return abs(self.reconstructed - self.actual) / max(1.0, abs(self.actual))

    def partial_sums(self) -> np.ndarray:
        return self.zeroth + np.cumsum(self.weights * self.increments)

    def to_csv(self, path) -> None:
        header = ["j", "weight", "increment", "partial_sum"]
        partial = self.partial_sums()
        rows = [[j, self.weights[j], self.increments[j], partial[j]]
                for j in range(self.weights.size)]
        write_csv(path, header, rows)


def _check_eigenpair(traj: Trajectory, xi: np.ndarray, lam: float) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    resid = np.max(np.abs(traj.matrix.matrix @ xi - lam * xi))
    if resid > EIGEN_RESID_TOL:
        raise NotEigenpair(f"||R xi - lam xi|| = {resid:.3e} for lam={lam}")
    return xi


def martingale_decompose(traj: Trajectory, xi, lam: float) -> MartingaleExpansion:
    """Split C_N.xi into its deterministic part and weighted martingale
    increments lam * (chi_{j+1}.xi - C_j.xi/(j+1))."""
    lam = _check_lambda(lam)
    xi = _check_eigenpair(traj, xi, lam)
    n_draws = traj.n_draws
    path = traj.statistic(xi)
    times = np.arange(1, n_draws + 1, dtype=float)
    increments = lam * (xi[traj.draws] - path[:n_draws] / times)
    weights = tail_products(lam, n_draws - 1) if n_draws else np.empty(0)
    zeroth = growth_product(lam, n_draws) * path[0]
    reconstructed = zeroth + float(weights @ increments)
    return MartingaleExpansion(lam, zeroth, weights, increments,
                               reconstructed, float(path[-1]))


def increment_conditional_means(traj: Trajectory, xi, lam: float) -> np.ndarray:
    """Exact conditional mean of each increment given the past.

    Averages lam * (xi_i - C_j.xi/(j+1)) over the d possible draws with
    probabilities C_j[i]/(j+1); algebraically zero at every step.
    """
    lam = _check_lambda(lam)
    xi = _check_eigenpair(traj, xi, lam)
    n_draws = traj.n_draws
    counts = traj.counts_matrix()[:n_draws]
    path = traj.statistic(xi)[:n_draws]
    times = np.arange(1, n_draws + 1, dtype=float)
    probs = counts / times[:, None]
    return lam * (probs @ xi - (path / times) * probs.sum(axis=1))


def dn_exact(lam: float, n: int) -> float:
    """Sum of squared tail products, j = 0 .. n (the exact variance scale)."""
    lam = _check_lambda(lam)
    if n < 0:
        raise IndexOrder(f"n={n} must be nonnegative")
    t = tail_products(lam, n)
    return float(t @ t)


def _regime(lam: float):
    """Regime label and growth function g(n) for the D_n envelope."""
    if abs(lam - 0.5) <= 1e-12:
        return "c", lambda n: n * (1.0 + np.log(n))
    if lam < 0.0:
        return "a", lambda n: float(n)
    if lam < 0.5:
        return "b", lambda n: float(n)
    return "d", lambda n: float(n) ** (2.0 * lam)


def _calibration_grid(limit: int):
    """1 .. 64 exhaustively, then geometric steps up to and past limit."""
    n = 1
    while n <= 64:
        yield n
        n += 1
    while n < limit:
        yield n
        n = max(n + 1, int(n * 1.2))
    yield limit


@lru_cache(maxsize=None)
def _dn_constant(lam: float) -> float:
    """Envelope constant: max of dn_exact / g over a dense grid up to 2^20.

    The ratio moves slowly (through log n), so the geometric grid brackets
    its maximum; small n, where the ratio can peak, are covered one by one.
    """
    _, g = _regime(lam)
    return max(dn_exact(lam, n) / g(float(n))
               for n in _calibration_grid(1 << CALIBRATION_MAX_LOG2))


def dn_asymptotic(lam: float, n: int) -> tuple[str, float]:
    """Labeled regime and explicit envelope C(lam) * g(n) >= dn_exact(lam, n).

    Regimes: (a) lam < 0 and (b) 0 <= lam < 1/2 grow linearly, (c) lam =
    1/2 grows like n(1 + log n), (d) lam > 1/2 grows like n^(2 lam).  The
    constant is calibrated once per lam over powers of two up to 2^20.
    """
    lam = _check_lambda(lam)
    if n < 1:
        raise IndexOrder(f"n={n} must be at least 1")
    label, g = _regime(lam)
    return label, _dn_constant(lam) * g(float(n))


def euler_ratio(lam: float, n: int) -> float:
    """growth_product(lam, n) * Gamma(lam + 1) / n^lam; tends to 1."""
    lam = _check_lambda(lam, allow_one=True)
    if n < 1:
        raise IndexOrder(f"n={n} must be at least 1")
    return growth_product(lam, n) * math.gamma(lam + 1.0) / float(n) ** lam


# -- defective (Jordan) eigenvalues -------------------------------------------

def jordan_weights(lam: float, n: int) -> np.ndarray:
    """Nested weights K(i, n) for i = 0 .. n in O(n) total.

    K(i, n) = sum_{j=i+1}^{n} tail_product(lam, j, n) * (1/(j+1))
              * prod_{l=i+1}^{j-1} (1 + lam/(l+1)),
    which collapses to (P_{n+1}/P_{i+1}) * sum_{j=i+1}^{n} 1/(j+1+lam)
    with P_k = growth_product(lam, k).  K(n, n) = 0 and
    K(n-1, n) = 1/(n+1).
    """
    lam = _check_lambda(lam, allow_zero=False)
    if n < 0:
        raise IndexOrder(f"n={n} must be nonnegative")
    prefix = _prefix_products(lam, n + 1)
    inv = 1.0 / (np.arange(0, n + 1) + 1.0 + lam)
    suffix = np.zeros(n + 2)
    suffix[:n + 1] = np.cumsum(inv[::-1])[::-1]
    return (prefix[n + 1] / prefix[1:n + 2]) * suffix[1:n + 2]


def jordan_weight(lam: float, i: int, n: int) -> float:
    """Single nested weight K(i, n)."""
    if not 0 <= i <= n:
        raise IndexOrder(f"need 0 <= i <= n, got i={i}, n={n}")
    return float(jordan_weights(lam, n)[i])


def jordan_weight_bound(lam: float, i: int, n: int) -> float:
    """Closed-form envelope (n/i)^lam * (1 + log n) * max-factor.

    The max-factor is 1 for lam > 0 and (1/2)^lam for lam < 0 (the worst
    single step of the prefix ratio).  Valid for 1 <= i <= n up to the
    calibrated constant jordan_weight_constant(lam).
    """
    lam = _check_lambda(lam, allow_zero=False)
    if not 1 <= i <= n:
        raise IndexOrder(f"need 1 <= i <= n, got i={i}, n={n}")
    factor = 1.0 if lam > 0 else 0.5 ** lam
    return (n / i) ** lam * (1.0 + math.log(n)) * factor


@lru_cache(maxsize=None)
def jordan_weight_constant(lam: float) -> float:
    """max over 1 <= i <= n <= 10^4 of K(i, n) / jordan_weight_bound.

    Every i is checked; n runs over the same dense grid as _dn_constant.
    """
    lam = _check_lambda(lam, allow_zero=False)
    factor = 1.0 if lam > 0 else 0.5 ** lam
    best = 0.0
    for n in _calibration_grid(10_000):
        k = jordan_weights(lam, n)[1:]
        i = np.arange(1, n + 1, dtype=float)
        bound = (n / i) ** lam * (1.0 + math.log(n)) * factor
        best = max(best, float(np.max(k / bound)))
    return best


def appendix_zeroth(lam: float, n: int) -> float:
    """Deterministic coefficient Z(n, lam) on C_0.xi2, written as the
    three-part sum: the j = 0 term, the j = 1 term, then j >= 2.

    Z(n, lam) = sum_{j=0}^{n} tail_product(lam, j, n) * (1/(j+1))
                * growth_product(lam, j);  Z(0, lam) = 1.
    """
    lam = _check_lambda(lam, allow_zero=False)
    if n < 0:
        raise IndexOrder(f"n={n} must be nonnegative")
    tails = tail_products(lam, n)
    total = float(tails[0])                       # j = 0: empty prefix
    if n >= 1:
        total += float(tails[1]) * 0.5 * (1.0 + lam)  # j = 1: prefix (1 + lam)
    if n >= 2:
        j = np.arange(2, n + 1)
        prefix = _prefix_products(lam, n)
        total += float(np.sum(tails[2:] * prefix[2:n + 1] / (j + 1.0)))
    return total


@dataclass
class JordanExpansion:
    """Exact expansion of C_N.xi3 for a defective eigenvalue.

    reconstructed = zeroth_xi3 + zeroth_xi2
                    + direct_weights . direct_increments   (against xi2 + lam*xi3)
                    + nested_weights . nested_increments   (against xi2)
    """

    eigenvalue: float
    zeroth_xi3: float
    zeroth_xi2: float
    direct_weights: np.ndarray
    direct_increments: np.ndarray
    nested_weights: np.ndarray
    nested_increments: np.ndarray
    reconstructed: float
    actual: float

    @property
    def residual(self) -> float:
        return abs(self.reconstructed - self.actual) / max(1.0, abs(self.actual))

    def to_csv(self, path) -> None:
        header = ["j", "direct_weight", "direct_increment",
                  "nested_weight", "nested_increment", "partial_sum"]
        partial = (self.zeroth_xi3 + self.zeroth_xi2
                   + np.cumsum(self.direct_weights * self.direct_increments
                               + self.nested_weights * self.nested_increments))
        rows = [[j, self.direct_weights[j], self.direct_increments[j],
                 self.nested_weights[j], self.nested_increments[j], partial[j]]
                for j in range(self.direct_weights.size)]
        write_csv(path, header, rows)


def _check_jordan_pair(traj, xi2, xi3, lam):
    xi2 = np.asarray(xi2, dtype=float)
    xi3 = np.asarray(xi3, dtype=float)
    m = traj.matrix.matrix
    r2 = np.max(np.abs(m @ xi2 - lam * xi2))
    r3 = np.max(np.abs(m @ xi3 - xi2 - lam * xi3))
    if max(r2, r3) > EIGEN_RESID_TOL:
        raise NotJordanPair(
            f"chain residuals {r2:.3e}, {r3:.3e} for lam={lam}")
    return xi2, xi3


def jordan_decompose(traj: Trajectory, xi2, xi3, lam: float) -> JordanExpansion:
    """Expansion of C_N.xi3 when R xi3 = xi2 + lam xi3 with lam != 0.

    The direct increments (chi_{j+1} - C_j/(j+1)).(xi2 + lam xi3) carry
    the usual tail-product weights; pushing the accumulated C_j.xi2/(j+1)
    terms down to time zero leaves the appendix_zeroth coefficient on
    C_0.xi2 plus nested increments against xi2 weighted by K(i, N-1).
    """
    lam = _check_lambda(lam, allow_zero=False)
    xi2, xi3 = _check_jordan_pair(traj, xi2, xi3, lam)
    n_draws = traj.n_draws
    s2 = traj.statistic(xi2)
    s3 = traj.statistic(xi3)
    times = np.arange(1, n_draws + 1, dtype=float)
    mixed = xi2 + lam * xi3
    direct_inc = mixed[traj.draws] - (s2[:n_draws] + lam * s3[:n_draws]) / times
    nested_inc = lam * (xi2[traj.draws] - s2[:n_draws] / times)
    if n_draws:
        direct_w = tail_products(lam, n_draws - 1)
        nested_w = jordan_weights(lam, n_draws - 1)
        zeroth2 = appendix_zeroth(lam, n_draws - 1) * s2[0]
    else:
        direct_w = np.empty(0)
        nested_w = np.empty(0)
        zeroth2 = 0.0
    zeroth3 = growth_product(lam, n_draws) * s3[0]
    reconstructed = (zeroth3 + zeroth2 + float(direct_w @ direct_inc)
                     + float(nested_w @ nested_inc))
    return JordanExpansion(lam, zeroth3, zeroth2, direct_w, direct_inc,
                           nested_w, nested_inc, reconstructed, float(s3[-1]))


def repeated_zero_decompose(traj: Trajectory, xi2, xi3) -> JordanExpansion:
    """Expansion of C_N.xi3 for a defective zero eigenvalue.

    With lam = 0 the statistic C_j.xi2 is frozen at C_0.xi2, so
    C_N.xi3 = C_0.xi3 + C_0.xi2 * H_N + sum_j (chi_{j+1} - C_j/(j+1)).xi2
    with H_N the harmonic number; all direct weights are 1 and the nested
    contribution vanishes.
    """
    xi2, xi3 = _check_jordan_pair(traj, xi2, xi3, 0.0)
    n_draws = traj.n_draws
    s2 = traj.statistic(xi2)
    s3 = traj.statistic(xi3)
    times = np.arange(1, n_draws + 1, dtype=float)
    direct_inc = xi2[traj.draws] - s2[:n_draws] / times
    direct_w = np.ones(n_draws)
    harmonic = float(np.sum(1.0 / times)) if n_draws else 0.0
    zeroth2 = harmonic * s2[0]
    zeroth3 = float(s3[0])
    reconstructed = zeroth3 + zeroth2 + float(direct_w @ direct_inc)
    return JordanExpansion(0.0, zeroth3, zeroth2, direct_w, direct_inc,
                           np.zeros(n_draws), np.zeros(n_draws),
                           reconstructed, float(s3[-1]))


# -- normalized martingale for the defective case -----------------------------

@dataclass
class MartingaleSeries:
    """Values M_0 .. M_N of the normalized defective-case martingale.

    M_m = C_m.xi3 / P_m - sum_{j=0}^{m-1} C_j.xi2 / ((j+1) P_{j+1}) with
    P_m = growth_product(lam, m).  The compensator makes the drift cancel:
    E(M_{m+1} | F_m) = M_m exactly.
    """

    eigenvalue: float
    values: np.ndarray
    normalizers: np.ndarray


def dm_martingale(traj: Trajectory, xi2, xi3, lam: float) -> MartingaleSeries:
    """Normalized martingale along a trajectory; M_0 = C_0.xi3."""
    lam = _check_lambda(lam)
    xi2, xi3 = _check_jordan_pair(traj, xi2, xi3, lam)
    n_draws = traj.n_draws
    s2 = traj.statistic(xi2)
    s3 = traj.statistic(xi3)
    prefix = _prefix_products(lam, n_draws)
    times = np.arange(1, n_draws + 1, dtype=float)
    compensator = np.zeros(n_draws + 1)
    if n_draws:
        compensator[1:] = np.cumsum(s2[:n_draws] / (times * prefix[1:]))
    return MartingaleSeries(lam, s3 / prefix - compensator, prefix)


def dm_step_residuals(traj: Trajectory, xi2, xi3, lam: float) -> np.ndarray:
    """|E(M_{m+1} | F_m) - M_m| for m = 0 .. N-1, by enumerating the d
    possible draws with their exact probabilities."""
    lam = _check_lambda(lam)
    xi2, xi3 = _check_jordan_pair(traj, xi2, xi3, lam)
    n_draws = traj.n_draws
    series = dm_martingale(traj, xi2, xi3, lam)
    m_vals = series.values
    prefix = series.normalizers
    counts = traj.counts_matrix()[:n_draws]
    s2 = traj.statistic(xi2)[:n_draws]
    s3 = traj.statistic(xi3)[:n_draws]
    times = np.arange(1, n_draws + 1, dtype=float)
    rxi3 = traj.matrix.matrix @ xi3
    expected_s3 = s3 + (counts @ rxi3) / times
    # the compensator through step m, recovered from the series values so
    # both sides of the identity share the same floats
    compensator = s3 / prefix[:n_draws] - m_vals[:n_draws]
    expected_m = (expected_s3 / prefix[1:] - compensator
                  - s2 / (times * prefix[1:]))
    return np.abs(expected_m - m_vals[:n_draws])
