"""Explicit deviation bounds for linear urn statistics.

Each martingale increment of an eigen-statistic is bounded in absolute
value: chi.xi is one component of xi and C_j.xi/(j+1) is a convex
combination of them, so the raw increment lies within spread(xi) =
max(xi) - min(xi), and the weighted increment within

    c_j = |lam| * spread(xi) * tail_product(lam, j, n-1).

The bounded-difference inequality then gives, for the centered statistic
after n draws and deviation s,

    P(C_n.xi - A > s) <= exp(-2 s^2 / sum_j (2 c_j)^2),

where A is the deterministic part of the decomposition.  Reports use
s = n*t for eigen-statistics (deviation t per draw) and s = (n+1)*t for
color counts (deviation t per unit of mass), matching the exact
threshold conversion between the two.

Everything is evaluated in log-space first; reports carry both log_tail
and tail (tail underflows to exact 0 rather than overflowing).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .decomposition import (
    appendix_zeroth,
    dn_asymptotic,
    growth_product,
    jordan_weights,
    tail_product,
    tail_products,
    _check_lambda,
)
from .errors import IndexOrder, LambdaOutOfRange, NotEigenpair
from .spectral import (
    ReplacementMatrix,
    SpectralDecomposition,
    decompose,
    indicator_coefficients,
)

MEMBER_RESID_TOL = 1e-8
ZERO_LAMBDA_TOL = 1e-12


def spread(xi) -> float:
    """max(xi) - min(xi): the range an increment of chi.xi can cover."""
    xi = np.asarray(xi, dtype=float)
    return float(np.max(xi) - np.min(xi))


def increment_bound(xi, lam: float, j: int, n: int) -> float:
    """Symmetric bound c_j on the weighted increment at step j of n + 1."""
    if not 0 <= j <= n:
        raise IndexOrder(f"need 0 <= j <= n, got j={j}, n={n}")
    return abs(lam) * spread(xi) * tail_product(lam, j, n)


def azuma_tail(s: float, c) -> float:
    """exp(-2 s^2 / sum_j (2 c_j)^2) for a martingale with |increment_j| <= c_j.

    s = 0 returns 1.  When every c_j is zero the martingale cannot move,
    so a positive deviation has probability exactly 0.
    """
    log_t = azuma_log_tail(s, c)
    return math.exp(log_t) if log_t > -math.inf else 0.0


def azuma_log_tail(s: float, c) -> float:
    """Logarithm of azuma_tail; -inf encodes the exact-zero case."""
    if s < 0:
        raise ValueError(f"deviation s={s} must be nonnegative")
    if s == 0:
        return 0.0
    c = np.asarray(c, dtype=float)
    denom = float(np.sum((2.0 * c) ** 2))
    if denom == 0.0:
        return -math.inf
    return -2.0 * s * s / denom


def rate_function(lam: float, n: int) -> tuple[str, float]:
    """Deviation-rate label and value f(n) = (n+1)^2 / dn_asymptotic.

    Linear below lam = 1/2, n / log n at the critical value, and
    n^(2 - 2 lam) above it.
    """
    lam = _check_lambda(lam)
    if n < 1:
        raise IndexOrder(f"n={n} must be at least 1")
    if abs(lam - 0.5) <= 1e-12:
        label = "n/log n"
    elif lam < 0.5:
        label = "linear"
    else:
        label = f"n^{2.0 - 2.0 * lam:g}"
    _, envelope = dn_asymptotic(lam, n)
    return label, (n + 1.0) ** 2 / envelope


@dataclass(frozen=True)
class BoundReport:
    """Deviation bound for one (horizon, threshold) pair.

    n counts draws: the event concerns C_n, deviates by s from its
    deterministic center, and accumulates n increments (j = 0 .. n-1).
    zeroth_shift is the center A (requires the initial state) so callers
    can translate the centered event into a raw threshold.
    """

    n: int
    t: float
    statistic: str
    increment_bounds: np.ndarray
    sum_sq: float
    tail: float
    regime: str
    rate_value: float
    log_tail: float
    deviation: float
    zeroth_shift: float | None = None

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "t": self.t,
            "statistic": self.statistic,
            "increment_bounds": [float(c) for c in self.increment_bounds],
            "sum_sq": self.sum_sq,
            "tail": self.tail,
            "regime": self.regime,
            "rate_value": self.rate_value,
        }


class _Member:
    """One term alpha * C.v of a statistic, classified by eigen type."""

    def __init__(self, S: SpectralDecomposition, alpha: float, vector, lam: float):
        m = S.matrix.matrix
        v = np.asarray(vector, dtype=float)
        lam = float(lam)
        if not -1.0 < lam < 1.0:
            raise LambdaOutOfRange(f"member eigenvalue {lam} outside (-1, 1)")
        self.alpha = float(alpha)
        self.vector = v
        self.lam = lam
        r = m @ v - lam * v
        if np.max(np.abs(r)) <= MEMBER_RESID_TOL:
            self.kind = "eigen"
            self.xi2 = None
        elif np.max(np.abs(m @ r - lam * r)) <= MEMBER_RESID_TOL:
            self.kind = "jordan"
            self.xi2 = r
        else:
            raise NotEigenpair(
                f"vector is neither an eigenvector nor a chain member for "
                f"lam={lam}")
        self.frozen = self.kind == "eigen" and abs(lam) <= ZERO_LAMBDA_TOL

    def describe(self) -> str:
        if self.frozen:
            return f"{self.alpha:g}*[constant, lam=0]"
        return f"{self.alpha:g}*[{self.kind}, lam={self.lam:g}]"

    def increment_bounds(self, n_draws: int) -> np.ndarray:
        """|alpha| * c_j for j = 0 .. n_draws - 1."""
        if self.frozen:
            return np.zeros(n_draws)
        tails = tail_products(self.lam, n_draws - 1)
        if self.kind == "eigen":
            if abs(self.lam) <= ZERO_LAMBDA_TOL:
                return np.zeros(n_draws)
            return abs(self.alpha) * abs(self.lam) * spread(self.vector) * tails
        mixed = self.xi2 + self.lam * self.vector
        if abs(self.lam) <= ZERO_LAMBDA_TOL:
            return abs(self.alpha) * spread(self.xi2) * np.ones(n_draws)
        nested = jordan_weights(self.lam, n_draws - 1)
        return abs(self.alpha) * (spread(mixed) * tails
                                  + abs(self.lam) * spread(self.xi2) * nested)

    def center(self, n_draws: int, initial: np.ndarray) -> float:
        """alpha times the deterministic part of C_n.v."""
        c0v = float(initial @ self.vector)
        if self.kind == "eigen":
            if abs(self.lam) <= ZERO_LAMBDA_TOL:
                return self.alpha * c0v
            return self.alpha * growth_product(self.lam, n_draws) * c0v
        c0x2 = float(initial @ self.xi2)
        if abs(self.lam) <= ZERO_LAMBDA_TOL:
            harmonic = float(np.sum(1.0 / np.arange(1.0, n_draws + 1.0)))
            return self.alpha * (c0v + harmonic * c0x2)
        z = appendix_zeroth(self.lam, n_draws - 1) if n_draws else 0.0
        return self.alpha * (growth_product(self.lam, n_draws) * c0v
                             + z * c0x2)


def _combined_report(S, members, n, t, s, label, initial) -> BoundReport:
    if n < 1:
        raise IndexOrder(f"horizon n={n} must be at least 1")
    if t < 0:
        raise ValueError(f"t={t} must be nonnegative")
    c = np.zeros(n)
    for mem in members:
        c += mem.increment_bounds(n)
    sum_sq = float(np.sum((2.0 * c) ** 2))
    log_tail = azuma_log_tail(s, c)
    tail = math.exp(log_tail) if log_tail > -math.inf else 0.0
    moving = [mem.lam for mem in members if not mem.frozen]
    lam_star = max(moving) if moving else 0.0
    regime, rate_value = rate_function(lam_star, max(n - 1, 1))
    shift = None
    if initial is not None:
        initial = np.asarray(initial, dtype=float)
        shift = float(sum(mem.center(n, initial) for mem in members))
    return BoundReport(n=n, t=float(t), statistic=label,
                       increment_bounds=c, sum_sq=sum_sq, tail=tail,
                       regime=regime, rate_value=rate_value,
                       log_tail=log_tail, deviation=float(s),
                       zeroth_shift=shift)


def statistic_bound(S: SpectralDecomposition, combo, n: int, t: float,
                    initial=None) -> BoundReport:
    """Bound for the centered eigen-combination after n draws.

    combo is a list of (alpha, vector, lam); each vector must be an
    eigenvector or the generalized member of a chain for its lam.  The
    bounded event is sum_i alpha_i (C_n.v_i - A_i) > n*t.  Pass the
    initial state to have the report carry the total center shift.
    """
    members = [_Member(S, a, v, lam) for a, v, lam in combo]
    label = " + ".join(mem.describe() for mem in members)
    return _combined_report(S, members, n, t, float(n) * t, label, initial)


def color_deviation_bound(R, color: int, n: int, t: float,
                          initial=None) -> BoundReport:
    """Bound for P(C_n[color] - pi[color]*(n+1) - A > t*(n+1)).

    The indicator of the color is expanded in the right-vector basis;
    the principal coefficient pi[color] carries the linear growth and the
    remaining members form the bounded martingale.  A is the centering
    shift of those members (reported when the initial state is given).
    """
    S = R if isinstance(R, SpectralDecomposition) else decompose(
        R if isinstance(R, ReplacementMatrix) else ReplacementMatrix(np.asarray(R, float)))
    alphas = (S.alphas[color] if S.alphas is not None
              else indicator_coefficients(S, color))
    members = []
    k = 1
    for st in S.structures:
        if st.jordan:
            xi2, xi3 = st.vectors
            if abs(alphas[k]) > 0:
                members.append(_Member(S, alphas[k], xi2, st.value))
            if abs(alphas[k + 1]) > 0:
                members.append(_Member(S, alphas[k + 1], xi3, st.value))
            k += 2
        else:
            for v in st.vectors:
                if abs(alphas[k]) > 0:
                    members.append(_Member(S, alphas[k], v, st.value))
                k += 1
    label = (f"color {color} deviation per unit mass; members: "
             + " + ".join(mem.describe() for mem in members))
    return _combined_report(S, members, n, t, (n + 1.0) * t, label, initial)


def color_threshold_factor(S: SpectralDecomposition, color: int) -> float:
    """Two-color conversion: deviation t of the color count corresponds to
    deviation t * factor of the eigen-statistic C_n.xi.

    The factor is 1/alpha_2, which equals xi[0] - xi[1] for color 0 (and
    the negative for color 1)."""
    if S.matrix.dim != 2:
        raise ValueError("threshold factor is a two-color notion")
    return 1.0 / S.alphas[color][1]
