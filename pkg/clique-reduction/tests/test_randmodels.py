from collections import Counter
from itertools import combinations, permutations

import numpy as np
import pytest
from scipy.spatial.distance import pdist
from scipy.stats import chisquare

from clique_reduction.errors import ValidationError
from clique_reduction.randmodels import Seed, er_order, vr_order


def test_seed_derivation_is_deterministic_and_separates_streams():
    s = Seed(42)
    assert s.derive("er", 3).rng().integers(0, 2 ** 32, 4).tolist() == \
        Seed(42).derive("er", 3).rng().integers(0, 2 ** 32, 4).tolist()
    assert s.derive("er", 3).rng().random() != s.derive("er", 4).rng().random()
    assert s.derive("er", 3).rng().random() != s.derive("vr", 3).rng().random()


def test_seed_range():
    with pytest.raises(ValidationError):
        Seed(-1)
    with pytest.raises(ValidationError):
        Seed(2 ** 64)


def test_er_two_vertices():
    assert er_order(2, Seed(0)).order == ((0, 1),)


def test_er_is_a_permutation():
    for trial in range(10):
        e = er_order(9, Seed(5).derive("perm", trial))
        assert sorted(e.order) == list(combinations(range(9), 2))


def test_er_orders_on_three_vertices_are_uniform():
    edges = list(combinations(range(3), 2))
    counts = Counter(er_order(3, Seed(2024).derive("uniform", t)).order for t in range(12000))
    observed = [counts[order] for order in permutations(edges)]
    assert sum(observed) == 12000
    assert chisquare(observed).pvalue > 1e-3


def test_vr_injected_points():
    sample = vr_order(3, 2, Seed(0), points=np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]]))
    assert sample.edge_order.order == ((0, 1), (0, 2), (1, 2))
    assert sample.lengths == pytest.approx((1.0, 2.0, 5 ** 0.5))
    assert sample.edge_length(2) == pytest.approx(5 ** 0.5)


def test_vr_ties_fall_back_to_lexicographic_order():
    square = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    sample = vr_order(4, 2, Seed(0), points=square)
    assert sample.edge_order.order[:4] == ((0, 1), (0, 2), (1, 3), (2, 3))


def test_vr_two_points_any_dimension():
    for d in (1, 3, 7):
        assert vr_order(2, d, Seed(d)).edge_order.order == ((0, 1),)


def test_vr_orders_are_consistent_with_their_points():
    for trial in range(100):
        sample = vr_order(12, 2, Seed(9).derive("vr", trial))
        assert sample.cloud.in_unit_cube
        assert all(b >= a for a, b in zip(sample.lengths, sample.lengths[1:]))
        squared = pdist(sample.cloud.points, "sqeuclidean")
        edges = list(combinations(range(12), 2))
        expected = tuple(edges[k] for k in np.argsort(squared, kind="stable"))
        assert sample.edge_order.order == expected


def test_vr_rejects_bad_points():
    with pytest.raises(ValidationError):
        vr_order(3, 2, Seed(0), points=np.zeros((3, 3)))
