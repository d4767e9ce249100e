"""
Properties every reduction of a clique filtration must satisfy, checked over seeded random
filtrations, plus an independent dense reduction used as an oracle.
"""
import numpy as np
import pytest

from clique_reduction.adversarial import WorstCaseParams, worst_case_filtration
from clique_reduction.flagfilt import Filtration, boundary_matrix, step_triangles
from clique_reduction.homology import (betti1_bruteforce, betti1_profile, check_fillup_betti_bound,
                                       critical_implies_cycle, fillup_lower_bound)
from clique_reduction.randmodels import Seed, er_order, vr_order
from clique_reduction.z2core import (check_cost_bound, check_staircase_fillup_bound, classify_indices, column_add,
                                     reduce, validate_staircase)


def _filtrations():
    for trial in range(12):
        n = 3 + trial % 8
        yield f"er-{trial}", Filtration.from_edge_order(er_order(n, Seed(31).derive("props-er", trial)))
        yield f"vr-{trial}", Filtration.from_edge_order(
            vr_order(n, 1 + trial % 3, Seed(31).derive("props-vr", trial)).edge_order)
    yield "worst-3", worst_case_filtration(WorstCaseParams(3), Seed(31)).filtration


CASES = list(_filtrations())


@pytest.mark.parametrize("f", [f for _, f in CASES], ids=[name for name, _ in CASES])
def test_reduction_invariants(f):
    matrix = boundary_matrix(f)
    reduced, stats = reduce(matrix)

    pivots = [column[-1] for column in reduced.columns if column]
    assert len(pivots) == len(set(pivots))
    assert validate_staircase(matrix)
    assert all(not after or after[-1] <= before[-1] for before, after in zip(matrix.columns, reduced.columns))

    # columns left alone by the reduction are exactly those taking a fresh pivot first
    for before, after, count in zip(matrix.columns, reduced.columns, stats.additions_per_column):
        if count == 0:
            assert before == after

    step, critical = classify_indices(matrix, reduced)
    assert step == stats.step_indices
    assert critical == stats.critical_indices
    for p in step:
        owner = stats.pivot_pairs[p]
        assert reduced.columns[owner] == matrix.columns[owner]

    assert stats.fill_up == reduced.nonzeros
    assert check_cost_bound(stats, matrix.c)
    assert check_staircase_fillup_bound(matrix, stats)
    assert stats.fill_up >= fillup_lower_bound(f.n)

    profile = betti1_profile(f, reduced)
    assert critical_implies_cycle(f, reduced, stats, profile)
    assert check_fillup_betti_bound(stats, f, profile)


@pytest.mark.parametrize("f", [f for _, f in CASES], ids=[name for name, _ in CASES])
def test_step_indices_match_step_triangles(f):
    matrix = boundary_matrix(f)
    _, stats = reduce(matrix)
    assert stats.step_indices == set(step_triangles(f))


@pytest.mark.parametrize("f", [f for _, f in CASES], ids=[name for name, _ in CASES])
def test_addition_log_rebuilds_every_reduced_column(f):
    matrix = boundary_matrix(f)
    reduced, stats = reduce(matrix, log_additions=True)
    assert len(stats.addition_log) == matrix.c
    for j, added in enumerate(stats.addition_log):
        assert len(added) == stats.additions_per_column[j]
        assert all(k < j for k in added)
        column = matrix.columns[j]
        for k in added:
            column = column_add(column, reduced.columns[k])
        assert column == reduced.columns[j]


def _dense_reduce(f):
    """Textbook reduction on a dense 0/1 array, one pairwise search per column."""
    matrix = boundary_matrix(f)
    dense = np.zeros((matrix.r, matrix.c), dtype=np.uint8)
    for j, column in enumerate(matrix.columns):
        dense[list(column), j] = 1

    def low(j):
        rows = np.flatnonzero(dense[:, j])
        return int(rows[-1]) if len(rows) else None

    for j in range(matrix.c):
        while low(j) is not None:
            partner = next((k for k in range(j) if low(k) == low(j)), None)
            if partner is None:
                break
            dense[:, j] ^= dense[:, partner]
    return tuple(tuple(int(row) for row in np.flatnonzero(dense[:, j])) for j in range(matrix.c))


@pytest.mark.parametrize("n", [4, 5, 6, 7, 8])
def test_matches_dense_oracle(n):
    for trial in range(40):
        f = Filtration.from_edge_order(er_order(n, Seed(200 + n).derive("oracle", trial)))
        reduced, _ = reduce(boundary_matrix(f))
        assert reduced.columns == _dense_reduce(f)


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_betti_profile_matches_bruteforce(n):
    for trial in range(8):
        f = Filtration.from_edge_order(vr_order(n, 2, Seed(400 + n).derive("oracle-betti", trial)).edge_order)
        reduced, _ = reduce(boundary_matrix(f))
        profile = betti1_profile(f, reduced)
        assert list(profile.values) == [betti1_bruteforce(f.edge_order, i) for i in range(f.m + 1)]
