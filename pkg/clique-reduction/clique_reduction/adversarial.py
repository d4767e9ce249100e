"""
The explicit worst-case clique filtration.

Vertices are a roof plus five groups A, B, C, D, E of p vertices each, so n = 5p + 1.
The edges come in eight blocks I..VIII. Group IV hangs the vertices of an Eulerian
circuit of K_{C,D} minus a matching off the path a_0..a_{p-1}; its step columns form
a cascade that every group-V column has to walk through, collecting one group-II
entry per cascade column. Groups VI and VII repeat the trick on K_{B,C} so that the
costly columns keep adding the fat ones.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Optional, Sequence

import networkx as nx
from pydantic import BaseModel, ConfigDict

from .errors import InvalidP, NotEulerian, ValidationError
from .flagfilt import (Edge, EdgeOrder, Explicit, Filtration, Triangle, boundary_matrix, build_columns,
                       tie_classes)
from .randmodels import Seed
from .z2core import ReductionStats, StaircaseMatrix

logger = logging.getLogger("clique-reduction.adversarial")

GROUPS = ("I", "II", "III", "IV", "V", "VI", "VII", "VIII")


@dataclass(frozen=True)
class WorstCaseParams:
    """Group size ``p`` of the construction; odd and at least 3."""

    p: int

    def __post_init__(self):
        if self.p < 3 or self.p % 2 == 0:
            raise InvalidP(f"p must be an odd integer >= 3, got {self.p}")

    @property
    def n(self) -> int:
        return 5 * self.p + 1

    roof = 0

    def a(self, i: int) -> int:
        return 1 + i

    def b(self, i: int) -> int:
        return 1 + self.p + i

    def c(self, i: int) -> int:
        return 1 + 2 * self.p + i

    def d(self, i: int) -> int:
        return 1 + 3 * self.p + i

    def e(self, i: int) -> int:
        return 1 + 4 * self.p + i

    def vertex_label(self, v: int) -> str:
        if v == self.roof:
            return "roof"
        group, index = divmod(v - 1, self.p)
        return f"{'abcde'[group]}{index}"


@dataclass(frozen=True)
class GroupedEdgeOrder:
    """An edge order whose ranks are labelled, block by block, with the groups I..VIII."""

    edge_order: EdgeOrder
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.labels) != self.edge_order.m:
            raise ValidationError("every edge needs exactly one group label")
        positions = [GROUPS.index(label) for label in self.labels]
        if any(b < a for a, b in zip(positions, positions[1:])):
            raise ValidationError("group labels must appear in blocks ordered I..VIII")

    def span(self, group: str) -> range:
        ranks = [rank for rank, label in enumerate(self.labels) if label == group]
        return range(ranks[0], ranks[-1] + 1) if ranks else range(0)

    def group_of(self, rank: int) -> str:
        return self.labels[rank]

    def sizes(self) -> dict[str, int]:
        return {group: self.labels.count(group) for group in GROUPS}

    def rows(self):
        """Yield (rank, u, v, group) for every edge."""
        for rank, ((u, v), label) in enumerate(zip(self.edge_order.order, self.labels)):
            yield rank, u, v, label


@dataclass(frozen=True)
class WorstCaseFiltration:
    """The construction for one p: labelled edges, filtration and the designated step columns."""

    params: WorstCaseParams
    grouped: GroupedEdgeOrder
    filtration: Filtration
    designated: Mapping[int, Triangle] = field(hash=False)
    circuits: Mapping[str, tuple[int, ...]] = field(hash=False)

    def group_sizes(self) -> dict[str, int]:
        return self.grouped.sizes()


def eulerian_path(adjacency: Mapping[int, Sequence[int]], start: int, keep_order: bool = False) -> list[int]:
    """
    Eulerian circuit of an undirected simple graph, starting and ending at ``start``.

    Hierholzer's algorithm. At each vertex the unused edges are tried smallest
    neighbour first, or in the given adjacency order when ``keep_order`` is set.

    Args:
        adjacency: Neighbour lists; every edge must be listed at both endpoints
        start: First vertex of the circuit
        keep_order: Follow the adjacency order instead of sorting neighbours

    Returns:
        The vertex sequence, one entry longer than the number of edges

    Raises:
        NotEulerian: If the graph has an odd-degree vertex, is disconnected on its
            edges, or ``start`` has no edges
    """
    edges = set()
    for u, neighbours in adjacency.items():
        if len(set(neighbours)) != len(neighbours):
            raise NotEulerian(f"vertex {u} lists a neighbour twice")
        for v in neighbours:
            if v == u:
                raise NotEulerian(f"vertex {u} has a loop")
            if u not in adjacency.get(v, ()):
                raise NotEulerian(f"edge {u}-{v} is listed only at {u}")
            edges.add((min(u, v), max(u, v)))
    odd = [u for u, neighbours in adjacency.items() if len(neighbours) % 2]
    if odd:
        raise NotEulerian(f"vertices {sorted(odd)[:5]} have odd degree")
    if not adjacency.get(start):
        raise NotEulerian(f"start vertex {start} has no edges")
    if not nx.is_connected(nx.Graph(list(edges))):
        raise NotEulerian("the edges do not form a connected graph")

    order = {u: list(neighbours) if keep_order else sorted(neighbours) for u, neighbours in adjacency.items()}
    cursor = {u: 0 for u in order}
    used = set()
    stack = [start]
    circuit = []
    while stack:
        v = stack[-1]
        neighbours = order[v]
        i = cursor[v]
        while i < len(neighbours) and (min(v, neighbours[i]), max(v, neighbours[i])) in used:
            i += 1
        cursor[v] = i
        if i < len(neighbours):
            w = neighbours[i]
            used.add((min(v, w), max(v, w)))
            stack.append(w)
        else:
            circuit.append(stack.pop())
    circuit.reverse()
    return circuit


def _shift_order(p: int) -> list[int]:
    # Hamiltonian cycles of shift pairs (1,2), (p-2,p-1), (p-4,p-3), ..., (3,4);
    # with this order no cascade window repeats a vertex across a cycle junction
    firsts = [1] + list(range(p - 2, 2, -2))
    return [s for first in firsts for s in (first, first + 1)]


def _matching_free_circuit(xs: Sequence[int], ys: Sequence[int]) -> list[int]:
    """Circuit of K_{X,Y} minus the matching x_i y_i from xs[0], one Hamiltonian cycle per shift pair."""
    p = len(xs)
    shifts = _shift_order(p)
    adjacency = {}
    for i, x in enumerate(xs):
        adjacency[x] = [ys[(i + s) % p] for s in shifts]
    for j, y in enumerate(ys):
        adjacency[y] = [xs[(j - s) % p] for s in shifts]
    return eulerian_path(adjacency, xs[0], keep_order=True)


def _windows(circuit: Sequence[int], p: int) -> list[list[int]]:
    """Window 0 is circuit positions 1..p-1; window j >= 1 is positions j(p-1)..(j+1)(p-1)."""
    step = p - 1
    windows = [list(circuit[1:p])]
    for j in range(1, p):
        windows.append(list(circuit[j * step:(j + 1) * step + 1]))
    return windows


def _edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


def _triangle(*vertices: int) -> Triangle:
    return tuple(sorted(vertices))


def _shuffled(edges: list[Edge], s: Seed) -> list[Edge]:
    permutation = s.rng().permutation(len(edges))
    return [edges[k] for k in permutation]


def _cascade(circuit: Sequence[int], hub: Sequence[int], p: int,
             designated: dict[Edge, Triangle]) -> list[Edge]:
    """Hang the windows of ``circuit`` off the hub path; designate the cascade triangles."""
    edges = []
    for j, window in enumerate(_windows(circuit, p)):
        for t, x in enumerate(window):
            edge = _edge(hub[j], x)
            if t == 0 and j > 0:
                # a window opens on the vertex that closed the previous one
                designated[edge] = _triangle(hub[j - 1], hub[j], x)
            else:
                previous = window[t - 1] if t > 0 else circuit[0]
                designated[edge] = _triangle(hub[j], previous, x)
            edges.append(edge)
    return edges


def worst_case_filtration(params: WorstCaseParams, s: Seed) -> WorstCaseFiltration:
    """
    Build the worst-case filtration for group size p.

    Groups II, III and VIII, and the order inside group I, are seeded shuffles; the
    rest of the order is fixed by the construction. Every tie class whose pivot has a
    designated step triangle lists that triangle first and the others in the default
    order.

    Raises:
        InvalidP: If p is even or smaller than 3
    """
    P = params
    p = P.p
    A = [P.a(i) for i in range(p)]
    B = [P.b(i) for i in range(p)]
    C = [P.c(i) for i in range(p)]
    D = [P.d(i) for i in range(p)]
    E = [P.e(i) for i in range(p)]
    last_e = E[(p - 1) // 2:]  # the half of E that is joined to D in group I
    designated: dict[Edge, Triangle] = {}

    group_i = ([_edge(P.roof, v) for v in A + B + E]
               + [_edge(A[i], A[i + 1]) for i in range(p - 1)]
               + [_edge(E[i], E[i + 1]) for i in range(p - 1)]
               + [_edge(A[0], C[0]), _edge(B[p - 1], E[0])]
               + [_edge(x, y) for x in last_e for y in D])
    group_ii = [_edge(C[i], D[j]) for i in range(p) for j in range(p) if i != j]
    group_iii = [_edge(b, c) for b in B for c in C]

    circuit_ii = _matching_free_circuit(C, D)
    group_iv = _cascade(circuit_ii, A, p, designated)

    group_v = []
    for b in B:
        edge = _edge(A[p - 1], b)
        designated[edge] = _triangle(P.roof, A[p - 1], b)
        group_v.append(edge)

    # reversed so that the circuit starts at b_{p-1}, the vertex group I ties to e_0
    circuit_vi = _matching_free_circuit(B[::-1], C[::-1])
    group_vi = _cascade(circuit_vi, E, p, designated)

    vi_position = {edge: k for k, edge in enumerate(group_vi)}
    group_vii = []
    for i in range(p - 1, (p - 1) // 2 - 1, -1):
        for k in range(p - 1, -1, -1):
            edge = _edge(B[i], D[k])
            partners = [x for x in last_e if _edge(B[i], x) in vi_position]
            if partners:
                # close through the E partner whose group-VI edge came last
                latest = max(partners, key=lambda x: vi_position[_edge(B[i], x)])
                designated[edge] = _triangle(B[i], D[k], latest)
            group_vii.append(edge)

    blocks = {
        "I": _shuffled(group_i, s.derive("worst-group-I")),
        "II": _shuffled(group_ii, s.derive("worst-group-II")),
        "III": _shuffled(group_iii, s.derive("worst-group-III")),
        "IV": group_iv,
        "V": group_v,
        "VI": group_vi,
        "VII": group_vii,
    }
    taken = {edge for block in blocks.values() for edge in block}
    # group VIII: every edge not placed yet
    rest = [edge for edge in combinations(range(P.n), 2) if edge not in taken]
    blocks["VIII"] = _shuffled(rest, s.derive("worst-group-VIII"))

    order = tuple(edge for group in GROUPS for edge in blocks[group])
    labels = tuple(group for group in GROUPS for _ in blocks[group])
    edge_order = EdgeOrder(n=P.n, order=order)
    grouped = GroupedEdgeOrder(edge_order=edge_order, labels=labels)

    by_pivot: dict[int, Triangle] = {}
    for edge, triangle in designated.items():
        rank = edge_order.rank(*edge)
        if edge_order.entry_time(triangle) != rank:
            raise ValidationError(f"step triangle {triangle} does not enter with edge {edge}")
        by_pivot[rank] = triangle

    # designated triangle first; the rest of its class keeps the default order
    classes = dict(tie_classes(build_columns(edge_order)))
    for rank, triangle in by_pivot.items():
        group = classes[rank]
        classes[rank] = (triangle,) + tuple(t for t in group if t != triangle)
    filtration = Filtration.from_edge_order(edge_order, Explicit(classes))

    logger.info(f"Worst case p={p}: n={P.n}, group sizes {grouped.sizes()}")
    return WorstCaseFiltration(
        params=P, grouped=grouped, filtration=filtration, designated=by_pivot,
        circuits={"II": tuple(circuit_ii), "VI": tuple(circuit_vi)},
    )


class WorstCaseAudit(BaseModel):
    """What the reduction of a worst-case filtration produced, against what the construction promises."""

    model_config = ConfigDict(frozen=True)

    p: int
    n: int
    fill_up: int
    cost: int
    fat_columns: int
    group_ii_pivots: int
    fill_by_group: dict[str, int]
    cost_by_group: dict[str, int]
    fat_threshold: int
    cascade_iv_distinct: bool
    cascade_vi_distinct: bool
    group_iv_free_of_iii: bool
    step_columns_unchanged: bool
    passed: bool

    def summary_lines(self) -> list[str]:
        return [f"{name}: {value}" for name, value in self.model_dump().items()]


def _in_span(column: Sequence[int], span: range) -> list[int]:
    return [row for row in column if row in span]


def group_breakdown(wc: WorstCaseFiltration, reduced: StaircaseMatrix, stats: ReductionStats,
                    original: StaircaseMatrix) -> tuple[dict[str, int], dict[str, int]]:
    """
    Split fill-up and cost by edge group.

    Fill-up is charged to the group of the reduced pivot; cost is charged to the group
    of the edge the column enters with, i.e. its original pivot.
    """
    fill = dict.fromkeys(GROUPS, 0)
    cost = dict.fromkeys(GROUPS, 0)
    group_of = wc.grouped.group_of
    for before, after, spent in zip(original.columns, reduced.columns, stats.cost_per_column):
        if after:
            fill[group_of(after[-1])] += len(after)
        cost[group_of(before[-1])] += spent
    return fill, cost


def worst_case_audit(wc: WorstCaseFiltration, reduced: StaircaseMatrix, stats: ReductionStats,
                     original: Optional[StaircaseMatrix] = None) -> WorstCaseAudit:
    """
    Check the reduced worst-case matrix for fat columns and for the cascade structure.

    A fat column has its pivot in a group-III row and at least p^2/8 entries in
    group-II rows. For p >= 7 at least p^2/4 of them are required to pass.
    """
    p = wc.params.p
    grouped = wc.grouped
    if original is None:
        original = boundary_matrix(wc.filtration)
    rows_ii, rows_iii = grouped.span("II"), grouped.span("III")
    rows_iv, rows_vi = grouped.span("IV"), grouped.span("VI")

    fat = 0
    ii_pivots = 0
    for column in reduced.columns:
        if not column:
            continue
        if column[-1] in rows_ii:
            ii_pivots += 1
        # fat: pivot in III, at least p^2/8 entries in II
        elif column[-1] in rows_iii and 8 * len(_in_span(column, rows_ii)) >= p * p:
            fat += 1

    column_of = {triangle: index for index, triangle in enumerate(wc.filtration.column_order.triangles)}
    iv_entries, vi_entries = [], []
    unchanged = True
    for rank, triangle in wc.designated.items():
        index = column_of[triangle]
        if reduced.columns[index] != original.columns[index]:
            unchanged = False
        if rank in rows_iv:
            iv_entries.extend(_in_span(original.columns[index], rows_ii))
        elif rank in rows_vi:
            vi_entries.extend(_in_span(original.columns[index], rows_iii))

    free_of_iii = not any(
        column and column[-1] in rows_iv and _in_span(column, rows_iii) for column in original.columns
    )
    threshold = (p * p + 3) // 4 if p >= 7 else 0
    fill_by_group, cost_by_group = group_breakdown(wc, reduced, stats, original)
    audit = WorstCaseAudit(
        p=p, n=wc.params.n, fill_up=stats.fill_up, cost=stats.cost,
        fat_columns=fat, group_ii_pivots=ii_pivots, fill_by_group=fill_by_group, cost_by_group=cost_by_group,
        fat_threshold=threshold,
        cascade_iv_distinct=len(iv_entries) == len(set(iv_entries)),
        cascade_vi_distinct=len(vi_entries) == len(set(vi_entries)),
        group_iv_free_of_iii=free_of_iii,
        step_columns_unchanged=unchanged,
        passed=False,
    )
    passed = (audit.cascade_iv_distinct and audit.cascade_vi_distinct and free_of_iii and unchanged
              and fat >= threshold)
    if not passed:
        logger.warning(f"Worst-case audit for p={p} failed: {audit.model_dump()}")
    return audit.model_copy(update={"passed": passed})
