from math import comb

import pytest

from clique_reduction.errors import InconsistentInput
from clique_reduction.flagfilt import EdgeOrder, Filtration, boundary_matrix
from clique_reduction.homology import (Betti1Profile, BettiScanResult, betti1_bruteforce, betti1_profile,
                                       betti_probability_scan, check_fillup_betti_bound, critical_implies_cycle,
                                       default_grid, emit_profile_csv, emit_scan_csv, fillup_betti_bound,
                                       positive_edges)
from clique_reduction.randmodels import Seed
from clique_reduction.z2core import StaircaseMatrix, reduce


def test_positive_edges_four_point(four_point_order):
    # cd, ac and bd close cycles
    assert positive_edges(four_point_order) == {3, 4, 5}


def test_spanning_tree_first_has_no_positive_prefix():
    n = 6
    star = [(0, v) for v in range(1, n)]
    rest = [(u, v) for u in range(1, n) for v in range(u + 1, n)]
    positive = positive_edges(EdgeOrder(n=n, order=tuple(star + rest)))
    assert positive == set(range(n - 1, comb(n, 2)))


def test_positive_edges_two_vertices():
    assert positive_edges(EdgeOrder(n=2, order=((0, 1),))) == frozenset()


def test_four_point_profile(four_point_filtration, four_point_matrix):
    reduced, stats = reduce(four_point_matrix)
    profile = betti1_profile(four_point_filtration, reduced)
    assert profile.values == (0, 0, 0, 0, 1, 0, 0)
    assert critical_implies_cycle(four_point_filtration, reduced, stats)
    assert [betti1_bruteforce(four_point_filtration.edge_order, i) for i in range(7)] == list(profile.values)


def test_three_vertex_profile_is_zero():
    f = Filtration.from_edge_order(EdgeOrder(n=3, order=((0, 2), (1, 2), (0, 1))))
    reduced, _ = reduce(boundary_matrix(f))
    assert betti1_profile(f, reduced).values == (0, 0, 0, 0)


def test_bruteforce_edge_values(four_point_order):
    assert betti1_bruteforce(four_point_order, 0) == 0
    assert betti1_bruteforce(four_point_order, 4) == 1
    assert betti1_bruteforce(four_point_order, 6) == 0


def test_profile_rejects_foreign_matrix(four_point_filtration):
    with pytest.raises(InconsistentInput):
        betti1_profile(four_point_filtration, StaircaseMatrix(r=6, columns=((0, 1, 2),)))
    with pytest.raises(InconsistentInput):
        # an unreduced matrix closes more cycles than the filtration opens
        betti1_profile(four_point_filtration, boundary_matrix(four_point_filtration))


def test_critical_implies_cycle_vacuous():
    f = Filtration.from_edge_order(EdgeOrder(n=3, order=((0, 1), (0, 2), (1, 2))))
    reduced, stats = reduce(boundary_matrix(f))
    assert not stats.critical_indices
    assert critical_implies_cycle(f, reduced, stats)


def test_fillup_betti_bound(four_point_filtration, four_point_matrix):
    reduced, stats = reduce(four_point_matrix)
    profile = betti1_profile(four_point_filtration, reduced)
    assert fillup_betti_bound(four_point_filtration, profile) == 3 * 6 + 4
    assert check_fillup_betti_bound(stats, four_point_filtration, profile)


def test_default_grid():
    grid = default_grid(435, 30)
    assert grid[-1] == 435
    assert grid[0] == 1
    assert all(b > a for a, b in zip(grid, grid[1:]))
    assert default_grid(0) == (0,)


def test_scan_probability_is_zero_on_complete_complex():
    result = betti_probability_scan("er", 10, 6, [comb(10, 2)], Seed(3))
    assert result.probabilities == (0.0,)
    assert result.model == "er"


def test_scan_is_deterministic_and_bounded():
    first = betti_probability_scan("vr", 12, 8, None, Seed(17), d=2)
    second = betti_probability_scan("vr", 12, 8, None, Seed(17), d=2)
    assert first == second
    assert first.model == "vr(d=2)"
    assert all(0.0 <= p <= 1.0 for p in first.probabilities)
    assert first.probabilities[-1] == 0.0


def test_scan_result_thresholds():
    result = BettiScanResult(model="vr(d=2)", n=50, trials=10, grid=(10, 100, 400, 1225),
                             probabilities=(0.0, 0.9, 0.02, 0.0))
    assert result.threshold_index == 400
    assert result.threshold_constant == pytest.approx(400 / (50 * 3.912023005428146))
    assert result.excess_constant == pytest.approx(1225 * 0.02)

    never = BettiScanResult(model="er", n=10, trials=1, grid=(1, 45), probabilities=(0.0, 0.5))
    assert never.threshold_index is None
    assert never.threshold_constant is None


def test_scan_result_validation():
    with pytest.raises(ValueError):
        BettiScanResult(model="er", n=5, trials=1, grid=(3, 2), probabilities=(0.0, 0.0))
    with pytest.raises(ValueError):
        BettiScanResult(model="er", n=5, trials=1, grid=(2,), probabilities=(1.5,))


def test_csv_emission(tmp_path):
    result = BettiScanResult(model="er", n=5, trials=4, grid=(2, 10), probabilities=(0.25, 0.0))
    emit_scan_csv(result, tmp_path / "scan.csv")
    assert (tmp_path / "scan.csv").read_text() == "model,n,trials,i,p_hat\ner,5,4,2,0.250\ner,5,4,10,0.000\n"

    emit_profile_csv(Betti1Profile((0, 1, 0)), tmp_path / "profile.csv")
    assert (tmp_path / "profile.csv").read_text() == "i,betti1\n0,0\n1,1\n2,0\n"
