"""
Clique (flag) filtrations of the complete graph and their 1-boundary matrices.

An EdgeOrder ranks the C(n,2) edges; every triangle enters with its latest edge,
and the triangles sorted by entry time (ties resolved by a TiePolicy) are the
columns of a staircase-shaped boundary matrix whose rows are the edge ranks.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from math import comb
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .errors import BadPolicy, ValidationError
from .z2core import StaircaseMatrix, validate_staircase

logger = logging.getLogger("clique-reduction.flagfilt")

Edge = tuple[int, int]
Triangle = tuple[int, int, int]

__all__ = [
    "ColumnOrder", "Edge", "EdgeOrder", "Explicit", "Filtration", "LexByOtherEdges",
    "TiePolicy", "Triangle", "all_triangles", "boundary_matrix", "build_columns", "edge_ranks",
    "step_triangles", "tie_classes", "validate_staircase",
]


@dataclass(frozen=True)
class EdgeOrder:
    """A total order on the edges of the complete graph on ``n`` vertices.

    ``order[p]`` is the edge with rank p, i.e. the p-th row of the boundary matrix.
    """

    n: int
    order: tuple[Edge, ...]

    def __post_init__(self):
        object.__setattr__(self, "order", tuple((int(u), int(v)) for u, v in self.order))
        if self.n < 0:
            raise ValidationError(f"vertex count must be non-negative, got {self.n}")
        expected = comb(self.n, 2)
        if len(self.order) != expected:
            raise ValidationError(f"expected {expected} edges for n={self.n}, got {len(self.order)}")
        seen = set()
        for rank, (u, v) in enumerate(self.order):
            if not (0 <= u < v < self.n):
                raise ValidationError(f"edge {rank} ({u}, {v}) must satisfy 0 <= u < v < {self.n}")
            if (u, v) in seen:
                raise ValidationError(f"edge ({u}, {v}) appears twice")
            seen.add((u, v))

    @property
    def m(self) -> int:
        return len(self.order)

    @cached_property
    def ranks(self) -> dict[Edge, int]:
        return {edge: rank for rank, edge in enumerate(self.order)}

    @cached_property
    def rank_matrix(self) -> np.ndarray:
        """Symmetric n x n array of edge ranks, -1 on the diagonal."""
        matrix = np.full((self.n, self.n), -1, dtype=np.int64)
        if self.order:
            edges = np.asarray(self.order, dtype=np.int64)
            ranks = np.arange(len(self.order), dtype=np.int64)
            matrix[edges[:, 0], edges[:, 1]] = ranks
            matrix[edges[:, 1], edges[:, 0]] = ranks
        return matrix

    def rank(self, u: int, v: int) -> int:
        return self.ranks[(u, v) if u < v else (v, u)]

    def entry_time(self, triangle: Triangle) -> int:
        u, v, w = triangle
        return max(self.rank(u, v), self.rank(u, w), self.rank(v, w))


@dataclass(frozen=True)
class LexByOtherEdges:
    """Default tie policy: within an entry time, sort by (second-largest rank, smallest rank)."""


@dataclass(frozen=True)
class Explicit:
    """Tie policy giving the order of every tie class, keyed by entry time."""

    classes: Mapping[int, tuple[Triangle, ...]] = field(hash=False)

    @classmethod
    def from_column_sequence(cls, edge_order: EdgeOrder, triangles: Sequence[Triangle]) -> "Explicit":
        """
        Group a complete column sequence into tie classes.

        Raises:
            ValidationError: If a triangle is malformed or entry times decrease
        """
        classes: dict[int, list[Triangle]] = {}
        last = -1
        for index, triangle in enumerate(triangles):
            u, v, w = triangle
            if not (0 <= u < v < w < edge_order.n):
                raise ValidationError(f"column {index} {triangle} must satisfy 0 <= u < v < w < {edge_order.n}")
            time = edge_order.entry_time(triangle)
            if time < last:
                raise ValidationError(f"column {index} {triangle} enters at {time}, before the previous column ({last})")
            last = time
            classes.setdefault(time, []).append(tuple(triangle))
        return cls({time: tuple(group) for time, group in classes.items()})


TiePolicy = Union[LexByOtherEdges, Explicit]


@dataclass(frozen=True)
class ColumnOrder:
    """Triangles in column order with their entry times."""

    triangles: tuple[Triangle, ...]
    entry_times: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "triangles", tuple(tuple(t) for t in self.triangles))
        object.__setattr__(self, "entry_times", tuple(self.entry_times))
        if len(self.triangles) != len(self.entry_times):
            raise ValidationError("every triangle needs exactly one entry time")
        if any(b < a for a, b in zip(self.entry_times, self.entry_times[1:])):
            raise ValidationError("entry times must be non-decreasing along the columns")

    def __len__(self):
        return len(self.triangles)


def all_triangles(n: int) -> np.ndarray:
    """Every triangle of K_n as a (C(n,3), 3) array of sorted vertex triples, in lexicographic order."""
    return np.array(list(combinations(range(n), 3)), dtype=np.int64).reshape(-1, 3)


def edge_ranks(edge_order: EdgeOrder, triangles: np.ndarray) -> np.ndarray:
    """Sorted edge ranks (smallest, middle, largest) per triangle row."""
    matrix = edge_order.rank_matrix
    ranks = np.stack([
        matrix[triangles[:, 0], triangles[:, 1]],
        matrix[triangles[:, 0], triangles[:, 2]],
        matrix[triangles[:, 1], triangles[:, 2]],
    ], axis=1)
    ranks.sort(axis=1)
    return ranks


def build_columns(e: EdgeOrder, policy: Optional[TiePolicy] = None) -> ColumnOrder:
    """
    Sort all C(n,3) triangles by entry time, resolving ties with ``policy``.

    Raises:
        BadPolicy: If an Explicit policy does not list exactly the triangles of each tie class
    """
    policy = policy or LexByOtherEdges()
    triangles = all_triangles(e.n)
    ranks = edge_ranks(e, triangles)
    order = np.lexsort((ranks[:, 0], ranks[:, 1], ranks[:, 2]))
    triangles, ranks = triangles[order], ranks[order]
    entry_times = ranks[:, 2].tolist()
    sequence = [tuple(t) for t in triangles.tolist()]

    if isinstance(policy, Explicit):
        sequence = _apply_explicit(sequence, entry_times, policy)
    elif not isinstance(policy, LexByOtherEdges):
        raise BadPolicy(f"unknown tie policy {policy!r}")
    return ColumnOrder(triangles=tuple(sequence), entry_times=tuple(entry_times))


def _apply_explicit(sequence: list[Triangle], entry_times: list[int], policy: Explicit) -> list[Triangle]:
    classes: dict[int, list[Triangle]] = {}
    for triangle, time in zip(sequence, entry_times):
        classes.setdefault(time, []).append(triangle)
    if set(policy.classes) != set(classes):
        missing = sorted(set(classes) - set(policy.classes))[:5]
        extra = sorted(set(policy.classes) - set(classes))[:5]
        raise BadPolicy(f"explicit policy does not cover the tie classes (missing {missing}, unknown {extra})")
    ordered: list[Triangle] = []
    for time in sorted(classes):
        given = tuple(tuple(t) for t in policy.classes[time])
        if len(given) != len(classes[time]) or set(given) != set(classes[time]):
            raise BadPolicy(f"explicit order for entry time {time} is not a permutation of its tie class")
        ordered.extend(given)
    return ordered


@dataclass(frozen=True)
class Filtration:
    """A complete 1-dimensional clique filtration: edge order plus column order."""

    edge_order: EdgeOrder
    column_order: ColumnOrder

    def __post_init__(self):
        n = self.edge_order.n
        triangles = self.column_order.triangles
        if len(triangles) != comb(n, 3):
            raise ValidationError(f"expected {comb(n, 3)} triangles for n={n}, got {len(triangles)}")
        if not triangles:
            return
        array = np.asarray(triangles, dtype=np.int64)
        if not ((array[:, 0] >= 0) & (array[:, 0] < array[:, 1]) & (array[:, 1] < array[:, 2])
                & (array[:, 2] < n)).all():
            raise ValidationError(f"every triangle must satisfy 0 <= u < v < w < {n}")
        if len(set(triangles)) != len(triangles):
            raise ValidationError("a triangle appears twice in the column order")
        expected = edge_ranks(self.edge_order, array)[:, 2]
        if not np.array_equal(expected, np.asarray(self.column_order.entry_times, dtype=np.int64)):
            raise ValidationError("entry times do not match the edge ranks")

    @classmethod
    def from_edge_order(cls, e: EdgeOrder, policy: Optional[TiePolicy] = None) -> "Filtration":
        return cls(edge_order=e, column_order=build_columns(e, policy))

    @property
    def n(self) -> int:
        return self.edge_order.n

    @property
    def m(self) -> int:
        return self.edge_order.m


def boundary_matrix(f: Filtration) -> StaircaseMatrix:
    """The 1-boundary matrix: one column of three edge ranks per triangle."""
    if f.column_order.triangles:
        ranks = edge_ranks(f.edge_order, np.asarray(f.column_order.triangles, dtype=np.int64))
        columns = tuple(map(tuple, ranks.tolist()))
    else:
        columns = ()
    matrix = StaircaseMatrix(r=f.m, columns=columns)
    logger.debug(f"Boundary matrix for n={f.n}: {matrix.r} rows, {matrix.c} columns")
    return matrix


def tie_classes(column_order: ColumnOrder) -> dict[int, tuple[Triangle, ...]]:
    """Triangles grouped by entry time, in column order."""
    classes: dict[int, list[Triangle]] = {}
    for triangle, time in zip(column_order.triangles, column_order.entry_times):
        classes.setdefault(time, []).append(triangle)
    return {time: tuple(group) for time, group in classes.items()}


def step_triangles(f: Filtration) -> dict[int, Triangle]:
    """The step column of every pivot: the first triangle of its tie class."""
    return {time: group[0] for time, group in tie_classes(f.column_order).items()}
