"""
First Betti numbers along a clique filtration.

The profile is read off the single reduction already performed: every positive
edge opens a 1-cycle when it enters, and every nonzero reduced column closes one at
its entry time. A dense GF(2) rank computation serves as an independent oracle, and
the probability scan repeats the profile over many seeded random filtrations.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from math import comb
from typing import Optional, Sequence

import networkx as nx
import numpy as np
from networkx.utils import UnionFind
from pydantic import BaseModel, ConfigDict, model_validator

from .config import get_setting
from .errors import InconsistentInput, ValidationError
from .flagfilt import EdgeOrder, Filtration, all_triangles, boundary_matrix, edge_ranks
from .parallel import map_trials
from .randmodels import Seed, er_order, vr_order
from .z2core import ReductionStats, StaircaseMatrix, reduce

logger = logging.getLogger("clique-reduction.homology")


def positive_edges(e: EdgeOrder) -> frozenset[int]:
    """Ranks of the edges whose endpoints are already connected when they enter."""
    components = UnionFind(range(e.n))
    positive = set()
    for rank, (u, v) in enumerate(e.order):
        if components[u] == components[v]:
            positive.add(rank)
        else:
            components.union(u, v)
    return frozenset(positive)


@dataclass(frozen=True)
class Betti1Profile:
    """``values[i]`` is the first Betti number of K_i, the complex on the first i edges."""

    values: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        if not self.values or self.values[0] != 0:
            raise ValidationError("a Betti profile starts with beta_1(K_0) = 0")
        if min(self.values) < 0:
            raise ValidationError("Betti numbers are non-negative")

    @property
    def m(self) -> int:
        return len(self.values) - 1

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def nonzero_steps(self) -> list[int]:
        return [i for i, value in enumerate(self.values) if value > 0]


def betti1_profile(f: Filtration, reduced: StaircaseMatrix) -> Betti1Profile:
    """
    Compute beta_1(K_i) for i = 0..m from a reduced boundary matrix.

    Args:
        f: The filtration whose boundary matrix was reduced
        reduced: The reduced boundary matrix

    Returns:
        Betti1Profile of length m + 1

    Raises:
        InconsistentInput: If the matrix does not have the shape of f's boundary matrix,
            or its pivots cannot come from reducing it
    """
    m = f.m
    if reduced.r != m or reduced.c != len(f.column_order):
        raise InconsistentInput(
            f"reduced matrix is {reduced.r}x{reduced.c}, filtration needs {m}x{len(f.column_order)}"
        )
    positive = positive_edges(f.edge_order)
    delta = np.zeros(m + 2, dtype=np.int64)
    for rank in positive:
        delta[rank + 1] += 1
    for column, time in zip(reduced.columns, f.column_order.entry_times):
        if not column:
            continue
        low = column[-1]
        if low > time or low not in positive:
            raise InconsistentInput(f"pivot {low} of a column entering at {time} cannot kill a cycle")
        delta[time + 1] -= 1
    values = np.cumsum(delta)[: m + 1]
    if (values < 0).any() or values[m] != 0:
        raise InconsistentInput("the reduced matrix does not close every cycle of the complete complex")
    return Betti1Profile(tuple(values.tolist()))


def _gf2_rank(matrix: np.ndarray) -> int:
    """Rank over GF(2) by dense Gaussian elimination."""
    work = matrix.astype(np.uint8) & 1
    rows, cols = work.shape
    rank = 0
    for col in range(cols):
        if rank == rows:
            break
        candidates = np.nonzero(work[rank:, col])[0]
        if candidates.size == 0:
            continue
        pivot_row = rank + candidates[0]
        if pivot_row != rank:
            work[[rank, pivot_row]] = work[[pivot_row, rank]]
        below = np.nonzero(work[:, col])[0]
        below = below[below != rank]
        work[below] ^= work[rank]
        rank += 1
    return rank


def betti1_bruteforce(e: EdgeOrder, i: int) -> int:
    """
    beta_1(K_i) from scratch: i - rank d1 - rank d2 of the complex on the first i edges.

    rank d1 comes from the component count, rank d2 from dense elimination over every
    triangle of K_i, without any ordering of the columns.
    """
    if not (0 <= i <= e.m):
        raise ValidationError(f"prefix length must be in 0..{e.m}, got {i}")
    graph = nx.Graph()
    graph.add_nodes_from(range(e.n))
    graph.add_edges_from(e.order[:i])
    rank_d1 = e.n - nx.number_connected_components(graph)

    triangles = all_triangles(e.n)
    rank_d2 = 0
    if len(triangles):
        ranks = edge_ranks(e, triangles)
        ranks = ranks[ranks[:, 2] < i]
        if len(ranks):
            dense = np.zeros((i, len(ranks)), dtype=np.uint8)
            columns = np.arange(len(ranks))
            for k in range(3):
                dense[ranks[:, k], columns] = 1
            rank_d2 = _gf2_rank(dense)
    return i - rank_d1 - rank_d2


def critical_implies_cycle(f: Filtration, reduced: StaircaseMatrix, stats: ReductionStats,
                           profile: Optional[Betti1Profile] = None) -> bool:
    """True iff every critical row p has beta_1 > 0 in the first complex that contains edge p."""
    if profile is None:
        profile = betti1_profile(f, reduced)
    return all(profile[p + 1] > 0 for p in stats.critical_indices)


def fillup_betti_bound(f: Filtration, profile: Betti1Profile) -> int:
    """3 * C(n,2) + sum of the indices i where beta_1(K_i) > 0."""
    return 3 * comb(f.n, 2) + sum(profile.nonzero_steps())


def check_fillup_betti_bound(stats: ReductionStats, f: Filtration, profile: Betti1Profile) -> bool:
    return stats.fill_up <= fillup_betti_bound(f, profile)


def fillup_lower_bound(n: int) -> int:
    """Every complete clique filtration on n vertices reduces to at least C(n,2) - n entries."""
    return comb(n, 2) - n


def default_grid(m: int, points: Optional[int] = None) -> tuple[int, ...]:
    """Geometrically spaced prefix lengths in 1..m; always contains m."""
    points = points or get_setting("scan_grid_points", 30)
    if m <= 0:
        return (0,)
    grid = np.unique(np.rint(np.geomspace(1, m, num=points)).astype(np.int64))
    return tuple(sorted(set(grid.tolist()) | {m}))


class BettiScanResult(BaseModel):
    """Empirical P(beta_1(K_i) > 0) over seeded trials, one value per grid point."""

    model_config = ConfigDict(frozen=True)

    model: str
    n: int
    trials: int
    grid: tuple[int, ...]
    probabilities: tuple[float, ...]
    cutoff: float = 0.05

    @model_validator(mode="after")
    def _check(self):
        if len(self.grid) != len(self.probabilities):
            raise ValueError("one probability per grid point is required")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("grid must be strictly increasing")
        if any(not (0.0 <= p <= 1.0) for p in self.probabilities):
            raise ValueError("probabilities must lie in [0, 1]")
        return self

    @property
    def m(self) -> int:
        return comb(self.n, 2)

    @property
    def threshold_index(self) -> Optional[int]:
        """First grid point after which every probability stays below the cutoff."""
        above = [k for k, p in enumerate(self.probabilities) if p >= self.cutoff]
        if not above:
            return self.grid[0] if self.grid else None
        last = above[-1]
        return self.grid[last + 1] if last + 1 < len(self.grid) else None

    @property
    def threshold_constant(self) -> Optional[float]:
        """
        The threshold in units of the model's scale: i / (n ln n) for Vietoris-Rips,
        i / (m sqrt(ln n / n)) for Erdős–Rényi.
        """
        i = self.threshold_index
        if i is None or self.n < 2:
            return None
        log_n = math.log(self.n)
        if self.model.startswith("vr"):
            return i / (self.n * log_n)
        return i / (self.m * math.sqrt(log_n / self.n))

    @property
    def excess_constant(self) -> Optional[float]:
        """m times the largest probability observed at or beyond the threshold."""
        i = self.threshold_index
        if i is None:
            return None
        tail = [p for g, p in zip(self.grid, self.probabilities) if g >= i]
        return self.m * max(tail)


def model_tag(model: str, d: Optional[int] = None) -> str:
    if model == "vr":
        return f"vr(d={d})"
    return model


def _scan_trial(model: str, n: int, d: int, seed: Seed, grid: tuple[int, ...]) -> tuple[bool, ...]:
    if model == "er":
        e = er_order(n, seed)
    else:
        e = vr_order(n, d, seed).edge_order
    f = Filtration.from_edge_order(e)
    reduced, _ = reduce(boundary_matrix(f))
    profile = betti1_profile(f, reduced)
    return tuple(profile[i] > 0 for i in grid)


def betti_probability_scan(model: str, n: int, trials: int, grid: Optional[Sequence[int]], s: Seed,
                           d: int = 2, workers: Optional[int] = None) -> BettiScanResult:
    """
    Estimate P(beta_1(K_i) > 0) at every grid point over ``trials`` random filtrations.

    Args:
        model: "er" or "vr"
        n: Vertex count
        trials: Number of independent filtrations
        grid: Prefix lengths to evaluate; defaults to ``default_grid(C(n,2))``
        s: Root seed; trial t draws from ``s.derive("scan-<model>-<n>", t)``
        d: Dimension for the Vietoris–Rips model
        workers: Worker processes for the trials

    Returns:
        BettiScanResult, identical for identical arguments whatever the worker count
    """
    if model not in ("er", "vr"):
        raise ValidationError(f"scans support the er and vr models, got {model!r}")
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    m = comb(n, 2)
    grid = tuple(sorted(set(grid))) if grid is not None else default_grid(m)
    if grid and (grid[0] < 0 or grid[-1] > m):
        raise ValidationError(f"grid points must lie in 0..{m}")

    purpose = f"scan-{model}-{n}"
    jobs = [(model, n, d, s.derive(purpose, t), grid) for t in range(trials)]
    outcomes = np.asarray(map_trials(_scan_trial, jobs, workers), dtype=bool).reshape(trials, len(grid))
    probabilities = outcomes.mean(axis=0)
    result = BettiScanResult(
        model=model_tag(model, d), n=n, trials=trials, grid=grid,
        probabilities=tuple(float(p) for p in probabilities),
        cutoff=get_setting("scan_cutoff", 0.05),
    )
    logger.info(f"Scan {result.model} n={n}: {trials} trials, threshold index {result.threshold_index}")
    return result


def emit_scan_csv(result: BettiScanResult, path: str) -> None:
    """Write ``model,n,trials,i,p_hat`` rows, one per grid point."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["model", "n", "trials", "i", "p_hat"])
        for i, p in zip(result.grid, result.probabilities):
            writer.writerow([result.model, result.n, result.trials, i, f"{p:.3f}"])


def emit_profile_csv(profile: Betti1Profile, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["i", "betti1"])
        for i, value in enumerate(profile.values):
            writer.writerow([i, value])
