"""Verification tests: exact enumeration, Monte Carlo estimates, Wilson
limits and the dominance comparison.
"""
from fractions import Fraction

import numpy as np
import pytest

from urnbound import (
    EstimateReport,
    GridMismatch,
    TooLarge,
    decompose,
    dominance_check,
    estimate_probability,
    exact_distribution,
    exact_tail,
    final_statistics,
    growth_product,
    simulate_replicas,
    statistic_bound,
    tail_estimates,
    validate_matrix,
    wilson_upper,
)

from oracles import wilson_reference

R2 = validate_matrix([[0.7, 0.3], [0.4, 0.6]])
C0 = np.array([1.0, 0.0])
E0 = np.array([1.0, 0.0])


def test_exact_distribution_one_forced_draw():
    dist = exact_distribution(C0, R2, 1)
    assert dist.rational
    assert len(dist.atoms) == 1
    ((counts, prob),) = dist.atoms.items()
    assert [float(c) for c in counts] == [1.7, 0.3]
    assert prob == 1


def test_exact_distribution_two_draws():
    dist = exact_distribution(C0, R2, 2)
    probs = {tuple(float(c) for c in k): float(p)
             for k, p in dist.atoms.items()}
    assert probs == {(2.4, 0.6): pytest.approx(0.85, abs=1e-15),
                     (2.1, 0.9): pytest.approx(0.15, abs=1e-15)}


def test_exact_distribution_total_probability():
    dist = exact_distribution(C0, R2, 10)
    assert dist.rational
    assert dist.total() == Fraction(1)


def test_exact_distribution_float_mode():
    # an entry that is not a small fraction forces float accumulation
    R = validate_matrix([[0.38197, 0.61803], [0.5, 0.5]])
    dist = exact_distribution(C0, R, 6)
    assert not dist.rational
    assert dist.total() == pytest.approx(1.0, abs=1e-12)


def test_exact_distribution_guards_path_budget():
    RJ = validate_matrix([[5 / 8, 3 / 8, 0.0], [1 / 8, 3 / 8, 1 / 2],
                          [1 / 4, 1 / 4, 1 / 2]])
    with pytest.raises(TooLarge):
        exact_distribution(np.array([1.0, 0.0, 0.0]), RJ, 16)  # 3^16 paths


def test_exact_tail_infinite_thresholds():
    dist = exact_distribution(C0, R2, 4)
    assert exact_tail(dist, E0, -np.inf) == 1.0
    assert exact_tail(dist, E0, np.inf) == 0.0


def test_exact_tail_two_draw_example():
    dist = exact_distribution(C0, R2, 2)
    assert exact_tail(dist, E0, 2.3) == pytest.approx(0.85, abs=1e-15)


def test_exact_tail_monotone_in_threshold():
    dist = exact_distribution(C0, R2, 8)
    grid = np.linspace(0.0, 9.0, 40)
    tails = [exact_tail(dist, E0, x) for x in grid]
    assert all(a >= b for a, b in zip(tails, tails[1:]))


def test_exact_marginals_match_simulator():
    # empirical atom frequencies within 3 standard errors of exact masses
    n, replicas = 10, 100_000
    dist = exact_distribution(C0, R2, n)
    sample = final_statistics(C0, R2, n, E0, replicas, seed=31)
    for counts, prob in dist.atoms.items():
        p = float(prob)
        value = float(counts[0])
        hits = np.sum(np.abs(sample - value) < 1e-9)
        se = np.sqrt(p * (1.0 - p) / replicas)
        assert abs(hits / replicas - p) <= max(3.0 * se, 1e-4)


def test_wilson_upper_matches_quadratic_solution():
    from scipy.stats import norm
    z = float(norm.ppf(0.99))
    for hits, trials in ((0, 1000), (5, 1000), (850, 1000), (1000, 1000)):
        assert wilson_upper(hits, trials) == pytest.approx(
            wilson_reference(hits, trials, z), rel=1e-12)


def test_wilson_upper_basic_shape():
    assert wilson_upper(0, 1000) > 0.0
    assert wilson_upper(1000, 1000) == 1.0
    assert wilson_upper(10, 100) >= 0.1
    # more trials at the same rate tighten the limit
    assert wilson_upper(100, 1000) < wilson_upper(10, 100)


def test_estimate_probability_trivial_threshold():
    rep = estimate_probability(C0, R2, 3, E0, -np.inf, 2000, seed=1)
    assert rep.p_hat == 1.0
    assert rep.ci_upper == 1.0


def test_estimate_probability_two_draw_branch():
    rep = estimate_probability(C0, R2, 2, E0, 2.3, 100_000, seed=6)
    assert rep.p_hat == pytest.approx(0.85, abs=0.01)
    assert rep.p_hat <= rep.ci_upper <= 1.0


def test_estimate_probability_deterministic():
    a = estimate_probability(C0, R2, 20, E0, 14.0, 5000, seed=3)
    b = estimate_probability(C0, R2, 20, E0, 14.0, 5000, seed=3)
    assert (a.hits, a.p_hat, a.ci_upper) == (b.hits, b.p_hat, b.ci_upper)


def test_estimate_probability_needs_enough_replicas():
    with pytest.raises(ValueError):
        estimate_probability(C0, R2, 5, E0, 3.0, 999, seed=0)


def test_tail_estimates_share_one_sample():
    thresholds = [12.0, 13.0, 14.0]
    reps = tail_estimates(C0, R2, 20, E0, thresholds, 5000, seed=3)
    singles = [estimate_probability(C0, R2, 20, E0, x, 5000, seed=3)
               for x in thresholds]
    for a, b in zip(reps, singles):
        assert a.hits == b.hits
    assert reps[0].p_hat >= reps[1].p_hat >= reps[2].p_hat


def test_dominance_check_exact_grid_passes():
    xi = np.array([0.75, -1.0])
    S = decompose(R2)
    n = 8
    dist = exact_distribution(C0, R2, n)
    shift = growth_product(0.3, n) * 0.75
    ts = [0.1, 0.2, 0.3, 0.4]
    reports = [statistic_bound(S, [(1.0, xi, 0.3)], n, t) for t in ts]
    truths = [exact_tail(dist, xi, shift + n * t) for t in ts]
    table = dominance_check(reports, truths)
    assert table.all_pass
    assert all(row.mode == "exact" for row in table.rows)
    assert all(row.margin >= 0 for row in table.rows)


def test_dominance_check_zero_threshold_passes():
    S = decompose(R2)
    xi = np.array([0.75, -1.0])
    report = statistic_bound(S, [(1.0, xi, 0.3)], 5, 0.0)
    table = dominance_check([report], [0.999])
    assert table.rows[0].bound == 1.0
    assert table.all_pass


def test_dominance_check_corrupted_bound_fails():
    S = decompose(R2)
    xi = np.array([0.75, -1.0])
    good = statistic_bound(S, [(1.0, xi, 0.3)], 5, 0.2)
    from dataclasses import replace
    bad = replace(good, tail=0.0)
    table = dominance_check([good, bad], [0.01, 0.01])
    assert table.rows[0].passed
    assert not table.rows[1].passed
    assert not table.all_pass


def test_dominance_check_mc_mode_uses_p_hat():
    S = decompose(R2)
    xi = np.array([0.75, -1.0])
    report = statistic_bound(S, [(1.0, xi, 0.3)], 5, 0.3)
    estimate = EstimateReport(replicas=1000, hits=0, p_hat=0.0,
                              ci_upper=0.005)
    table = dominance_check([report], [estimate])
    assert table.rows[0].mode == "mc"
    assert table.rows[0].probability == 0.0
    assert table.rows[0].passed


def test_dominance_check_grid_mismatch():
    S = decompose(R2)
    xi = np.array([0.75, -1.0])
    report = statistic_bound(S, [(1.0, xi, 0.3)], 5, 0.2)
    with pytest.raises(GridMismatch):
        dominance_check([report], [0.1, 0.2])


def test_dominance_table_csv(tmp_path):
    S = decompose(R2)
    xi = np.array([0.75, -1.0])
    report = statistic_bound(S, [(1.0, xi, 0.3)], 5, 0.2)
    table = dominance_check([report], [0.01])
    path = tmp_path / "dominance.csv"
    table.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "n,t,bound,probability,mode,margin,pass"
    assert lines[1].startswith("5,") and lines[1].endswith(",true")


def test_batch_and_exact_agree_on_mean():
    # E[C_n . xi] = growth * C0.xi; both routes should land near it
    xi = np.array([0.75, -1.0])
    n = 12
    dist = exact_distribution(C0, R2, n)
    exact_mean = sum(float(p) * float(sum(float(c) * x
                                          for c, x in zip(k, xi)))
                     for k, p in dist.atoms.items())
    assert exact_mean == pytest.approx(growth_product(0.3, n) * 0.75,
                                       rel=1e-12)
    sample = final_statistics(C0, R2, n, xi, 50_000, seed=17)
    assert np.mean(sample) == pytest.approx(exact_mean, abs=0.05)
