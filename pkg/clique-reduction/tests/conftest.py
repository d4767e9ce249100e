"""
Shared fixtures: the four-vertex filtration with edge order bc, ad, ab, cd, ac, bd.
"""
import pytest

from clique_reduction.config import update_settings
from clique_reduction.flagfilt import EdgeOrder, Filtration, boundary_matrix

# vertices a, b, c, d are 0, 1, 2, 3
FOUR_POINT_ORDER = ((1, 2), (0, 3), (0, 1), (2, 3), (0, 2), (1, 3))
FOUR_POINT_COLUMNS = ((0, 2, 4), (1, 3, 4), (1, 2, 5), (0, 3, 5))
FOUR_POINT_REDUCED = ((0, 2, 4), (0, 1, 2, 3), (1, 2, 5), ())


@pytest.fixture(scope="session", autouse=True)
def _quiet_environment(tmp_path_factory):
    """Keep log files out of the project and run trials in-process unless a test says otherwise."""
    update_settings(logs_dir=str(tmp_path_factory.mktemp("logs")), workers=1)


@pytest.fixture
def four_point_order():
    return EdgeOrder(n=4, order=FOUR_POINT_ORDER)


@pytest.fixture
def four_point_filtration(four_point_order):
    return Filtration.from_edge_order(four_point_order)


@pytest.fixture
def four_point_matrix(four_point_filtration):
    return boundary_matrix(four_point_filtration)
