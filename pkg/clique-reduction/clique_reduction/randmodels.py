"""
Seeded generators for the Erdős–Rényi and Vietoris–Rips filtration models.

Every random stream comes from a Seed: a 64-bit root plus a derivation path of
(purpose, trial) pairs, fed to numpy's SeedSequence as its spawn key. The same
root and path always give the same stream, whichever process draws it.
"""
from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Union

import numpy as np
from scipy.spatial.distance import pdist

from .errors import ValidationError
from .flagfilt import EdgeOrder

logger = logging.getLogger("clique-reduction.randmodels")

_ROOT_LIMIT = 2 ** 64


def _path_key(part: Union[str, int]) -> int:
    if isinstance(part, int):
        if part < 0:
            raise ValidationError(f"derivation indices must be non-negative, got {part}")
        return part
    return int.from_bytes(hashlib.sha256(part.encode("utf-8")).digest()[:4], "big")


@dataclass(frozen=True)
class Seed:
    """A root value and the derivation path that selects one independent stream."""

    root: int
    path: tuple[Union[str, int], ...] = ()

    def __post_init__(self):
        if not (0 <= self.root < _ROOT_LIMIT):
            raise ValidationError(f"seed must be in 0..2**64-1, got {self.root}")

    def derive(self, purpose: str, trial: int = 0) -> "Seed":
        return Seed(self.root, self.path + (purpose, trial))

    def sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(entropy=self.root, spawn_key=tuple(_path_key(p) for p in self.path))

    def rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.sequence()))


@dataclass(frozen=True, eq=False)
class PointCloud:
    """``n`` points in dimension ``d``, one row per point."""

    points: np.ndarray

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def in_unit_cube(self) -> bool:
        return bool(((self.points >= 0.0) & (self.points <= 1.0)).all())


@dataclass(frozen=True, eq=False)
class VRSample:
    """A Vietoris–Rips filtration with the geometry it came from."""

    cloud: PointCloud
    edge_order: EdgeOrder
    lengths: tuple[float, ...]

    def edge_length(self, rank: int) -> float:
        """Length of the edge with the given rank, the scale at which K_{rank+1} appears."""
        return self.lengths[rank]


def _edges(n: int) -> list[tuple[int, int]]:
    return list(combinations(range(n), 2))


def er_order(n: int, s: Seed) -> EdgeOrder:
    """A uniformly random order of the C(n,2) edges, drawn by an unbiased shuffle."""
    if n < 2:
        raise ValidationError(f"an Erdős–Rényi filtration needs n >= 2, got {n}")
    edges = _edges(n)
    permutation = s.rng().permutation(len(edges))
    return EdgeOrder(n=n, order=tuple(edges[k] for k in permutation))


def vr_order(n: int, d: int, s: Seed, points: Optional[np.ndarray] = None) -> VRSample:
    """
    Order the edges of ``n`` uniform points in [0,1]^d by Euclidean length.

    Args:
        n: Number of points
        d: Dimension of the cube
        s: Seed for the point sample
        points: Explicit (n, d) coordinates used instead of sampling; tests inject
            analytic configurations through this hook

    Returns:
        VRSample with the point cloud, the edge order and the per-rank lengths

    Exact length ties fall back to the lexicographic order of (u, v).
    """
    if n < 2 or d < 1:
        raise ValidationError(f"a Vietoris–Rips filtration needs n >= 2 and d >= 1, got n={n}, d={d}")
    if points is None:
        coordinates = s.rng().random((n, d))
    else:
        coordinates = np.asarray(points, dtype=np.float64)
        if coordinates.shape != (n, d):
            raise ValidationError(f"injected points have shape {coordinates.shape}, expected {(n, d)}")
    # pdist enumerates pairs in lexicographic (u, v) order, so a stable sort keeps that order on ties
    squared = pdist(coordinates, "sqeuclidean")
    order = np.argsort(squared, kind="stable")
    edges = _edges(n)
    lengths = np.sqrt(squared[order])
    return VRSample(
        cloud=PointCloud(coordinates),
        edge_order=EdgeOrder(n=n, order=tuple(edges[k] for k in order)),
        lengths=tuple(lengths.tolist()),
    )
