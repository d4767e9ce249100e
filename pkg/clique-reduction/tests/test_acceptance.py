"""
Desk-scale reproduction runs. These take minutes; run them with ``pytest -m slow``.
"""
from math import comb, sqrt

import numpy as np
import pytest

from clique_reduction.adversarial import WorstCaseParams, worst_case_audit, worst_case_filtration
from clique_reduction.bench import ExperimentConfig, emit_csv, fit_rows, loglog_fit, run_experiment
from clique_reduction.flagfilt import Filtration, boundary_matrix
from clique_reduction.homology import (betti1_bruteforce, betti1_profile, betti_probability_scan,
                                       check_fillup_betti_bound, critical_implies_cycle, fillup_lower_bound)
from clique_reduction.randmodels import Seed, er_order, vr_order
from clique_reduction.z2core import check_cost_bound, column_add, reduce, validate_staircase

pytestmark = pytest.mark.slow

SEED = 20240611
WORST_SIZES = (3, 5, 7, 9, 11, 13)


@pytest.mark.parametrize("n", [4, 5, 6, 7, 8])
def test_profile_matches_bruteforce_on_200_orders(n):
    for trial in range(200):
        f = Filtration.from_edge_order(er_order(n, Seed(SEED).derive(f"oracle-{n}", trial)))
        reduced, _ = reduce(boundary_matrix(f))
        profile = betti1_profile(f, reduced)
        assert list(profile.values) == [betti1_bruteforce(f.edge_order, i) for i in range(f.m + 1)]


def _suite():
    for trial in range(240):
        n = 3 + trial % 8
        yield Filtration.from_edge_order(er_order(n, Seed(SEED).derive("suite-er", trial)))
    for trial in range(240):
        n = 3 + trial % 8
        yield Filtration.from_edge_order(vr_order(n, 1 + trial % 3, Seed(SEED).derive("suite-vr", trial)).edge_order)
    for trial in range(20):
        yield worst_case_filtration(WorstCaseParams(3), Seed(SEED).derive("suite-worst", trial)).filtration


def test_reduction_properties_on_500_instances():
    count = 0
    for f in _suite():
        matrix = boundary_matrix(f)
        assert validate_staircase(matrix)
        reduced, stats = reduce(matrix, log_additions=True)
        pivots = [column[-1] for column in reduced.columns if column]
        assert len(pivots) == len(set(pivots))
        for j, added in enumerate(stats.addition_log):
            column = matrix.columns[j]
            for k in added:
                column = column_add(column, reduced.columns[k])
            assert column == reduced.columns[j]
        for p in stats.step_indices:
            owner = stats.pivot_pairs[p]
            assert reduced.columns[owner] == matrix.columns[owner]
        assert check_cost_bound(stats, matrix.c)
        assert stats.fill_up >= fillup_lower_bound(f.n)
        profile = betti1_profile(f, reduced)
        assert profile.values[0] == 0 and profile.values[-1] == 0
        assert critical_implies_cycle(f, reduced, stats, profile)
        assert check_fillup_betti_bound(stats, f, profile)
        count += 1
    assert count == 500


def _exponents(cfg):
    result = run_experiment(cfg)
    assert result.ok
    return result, fit_rows(result.rows, "fill_up").exponent, fit_rows(result.rows, "cost").exponent


def test_vr_exponents():
    cfg = ExperimentConfig(model="vr", dim=2, sizes=(16, 24, 32, 48, 64, 96, 128), trials=20, seed=SEED)
    _, fill_exp, cost_exp = _exponents(cfg)
    assert 1.8 <= fill_exp <= 2.3
    assert 3.3 <= cost_exp <= 4.1


def test_er_exponents():
    cfg = ExperimentConfig(model="er", sizes=(12, 16, 20, 28, 40, 56), trials=20, seed=SEED)
    _, fill_exp, cost_exp = _exponents(cfg)
    assert 1.7 <= fill_exp <= 2.5
    assert 4.3 <= cost_exp <= 5.6


def test_worst_case_total_exponents():
    # each of the m - n + 1 negative edges leaves a cycle of at least 3 entries; that quadratic floor
    # flattens the slopes at these sizes
    cfg = ExperimentConfig(model="worst", sizes=WORST_SIZES, trials=1, seed=SEED)
    _, fill_exp, cost_exp = _exponents(cfg)
    assert 2.5 < fill_exp <= 4.4
    assert 5.6 < cost_exp <= 7.5


@pytest.fixture(scope="module")
def worst_audits():
    audits = []
    for p in WORST_SIZES[1:]:
        wc = worst_case_filtration(WorstCaseParams(p), Seed(SEED).derive("worst-growth", p))
        matrix = boundary_matrix(wc.filtration)
        reduced, stats = reduce(matrix)
        audits.append(worst_case_audit(wc, reduced, stats, original=matrix))
    return audits


def test_worst_case_fat_and_costly_columns_grow_as_p4_and_p7(worst_audits):
    fill = loglog_fit([(a.p, a.fill_by_group["III"]) for a in worst_audits])
    cost = loglog_fit([(a.p, a.cost_by_group["VII"]) for a in worst_audits])
    assert 3.6 <= fill.exponent <= 4.4
    assert 6.5 <= cost.exponent <= 7.5


def test_worst_case_totals_stay_within_a_constant_of_p4_and_p7(worst_audits):
    fill_ratios = [a.fill_up / a.p ** 4 for a in worst_audits]
    cost_ratios = [a.cost / a.p ** 7 for a in worst_audits]
    assert max(fill_ratios) < 4 * min(fill_ratios)
    assert max(cost_ratios) < 4 * min(cost_ratios)


@pytest.mark.parametrize("p", [7, 9, 11, 13])
def test_worst_case_fat_columns(p):
    wc = worst_case_filtration(WorstCaseParams(p), Seed(SEED))
    matrix = boundary_matrix(wc.filtration)
    reduced, stats = reduce(matrix)
    audit = worst_case_audit(wc, reduced, stats, original=matrix)
    assert audit.fat_columns * 4 >= p * p
    assert audit.passed


def _smoothed_tail_is_decreasing(result):
    probs = np.asarray(result.probabilities)
    smooth = np.convolve(probs, np.ones(3) / 3, mode="same")
    peak = int(np.argmax(smooth))
    for a, b in zip(range(peak, len(smooth) - 1), range(peak + 1, len(smooth))):
        level = max(smooth[a], smooth[b])
        sigma = sqrt(level * (1 - level) / result.trials)
        assert smooth[b] <= smooth[a] + 2 * sigma


@pytest.mark.parametrize("model, n, d", [("er", 30, 2), ("vr", 50, 2)])
def test_betti_vanishing_scan(model, n, d):
    result = betti_probability_scan(model, n, 200, None, Seed(SEED), d=d)
    assert result.grid[-1] == comb(n, 2)
    assert result.probabilities[-1] == 0.0
    _smoothed_tail_is_decreasing(result)


def test_reruns_write_identical_tables(tmp_path):
    for model, sizes, dim, trials in (("vr", (16, 24, 32), 2, 5), ("er", (12, 16, 20), None, 5),
                                      ("worst", (3, 5, 7), None, 1)):
        cfg = ExperimentConfig(model=model, sizes=sizes, dim=dim, trials=trials, seed=SEED)
        emit_csv(run_experiment(cfg).rows, tmp_path / f"{model}-1.csv")
        emit_csv(run_experiment(cfg).rows, tmp_path / f"{model}-2.csv")
        assert (tmp_path / f"{model}-1.csv").read_bytes() == (tmp_path / f"{model}-2.csv").read_bytes()
