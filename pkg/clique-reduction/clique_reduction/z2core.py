"""
Sparse GF(2) column arithmetic and the instrumented left-to-right reduction.

Columns are strictly increasing tuples of 0-based row indices; the empty tuple is
the zero column and the pivot of a nonzero column is its last element. The engine
meters every addition M_i <- M_i + M_j with the size of the (already final) M_j.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

from pydantic import BaseModel, ConfigDict, model_validator

from .errors import InvalidMatrix, MismatchedShapes

logger = logging.getLogger("clique-reduction.z2core")

SparseColumn = tuple[int, ...]

ZERO_COLUMN: SparseColumn = ()


@dataclass(frozen=True)
class StaircaseMatrix:
    """A GF(2) matrix with ``r`` rows stored column by column.

    The container accepts any columns; ``validate_staircase`` tells whether the
    staircase invariant holds and ``reduce`` refuses matrices where it does not.
    """

    r: int
    columns: tuple[SparseColumn, ...]

    @property
    def c(self) -> int:
        return len(self.columns)

    @property
    def nonzeros(self) -> int:
        """#M, the number of nonzero entries."""
        return sum(len(column) for column in self.columns)

    def pivots(self) -> list[Optional[int]]:
        return [pivot(column) for column in self.columns]


class ReductionStats(BaseModel):
    """Counters and index sets collected while reducing one matrix.

    ``cost_per_column[j]`` is the summed size of the columns added to column j;
    the total ``cost`` is their sum.
    """

    model_config = ConfigDict(frozen=True)

    r: int
    c: int
    fill_up: int
    cost: int
    additions_per_column: tuple[int, ...]
    cost_per_column: tuple[int, ...]
    step_indices: frozenset[int]
    critical_indices: frozenset[int]
    pivot_pairs: dict[int, int]
    addition_log: Optional[tuple[tuple[int, ...], ...]] = None

    @model_validator(mode="after")
    def _check_partition(self):
        if self.step_indices & self.critical_indices:
            raise ValueError("step and critical indices overlap")
        if set(self.pivot_pairs) != self.step_indices | self.critical_indices:
            raise ValueError("pivot pairs must be exactly the step and critical indices")
        if len(self.additions_per_column) != self.c or len(self.cost_per_column) != self.c:
            raise ValueError("one addition count and one cost per column are required")
        return self

    @property
    def additions_total(self) -> int:
        return sum(self.additions_per_column)

    def to_record(self) -> dict:
        """The JSON record written by ``reduce --stats``."""
        record = {
            "fill_up": self.fill_up,
            "cost": self.cost,
            "r": self.r,
            "c": self.c,
            "n_step": len(self.step_indices),
            "n_critical": len(self.critical_indices),
            "additions_total": self.additions_total,
            "critical_indices": sorted(self.critical_indices),
        }
        if self.addition_log is not None:
            record["addition_log"] = [list(added) for added in self.addition_log]
        return record

    def to_json(self) -> str:
        return json.dumps(self.to_record(), indent=2) + "\n"


def column_add(a: Sequence[int], b: Sequence[int]) -> SparseColumn:
    """Return a + b over GF(2), the symmetric difference of the two supports.

    Both inputs are strictly increasing; the result is produced by a linear merge.
    """
    result = []
    i = j = 0
    len_a, len_b = len(a), len(b)
    while i < len_a and j < len_b:
        x, y = a[i], b[j]
        if x < y:
            result.append(x)
            i += 1
        elif y < x:
            result.append(y)
            j += 1
        else:
            i += 1
            j += 1
    result.extend(a[i:])
    result.extend(b[j:])
    return tuple(result)


def pivot(a: Sequence[int]) -> Optional[int]:
    """The lowest nonzero row of a column, or None for the zero column."""
    return a[-1] if a else None


def validate_staircase(m: StaircaseMatrix) -> bool:
    """True iff the pivots of the nonzero columns never decrease left to right."""
    last = -1
    for column in m.columns:
        if not column:
            continue
        if column[-1] < last:
            return False
        last = column[-1]
    return True


def _check_matrix(m: StaircaseMatrix) -> None:
    for index, column in enumerate(m.columns):
        previous = -1
        for row in column:
            if row <= previous:
                raise InvalidMatrix(f"column {index} is not strictly increasing at row {row}")
            previous = row
        if column and (column[0] < 0 or column[-1] >= m.r):
            raise InvalidMatrix(f"column {index} has a row outside 0..{m.r - 1}")
    if not validate_staircase(m):
        raise InvalidMatrix("pivots decrease from left to right; the filtration is not staircase-shaped")


def _to_bits(column: SparseColumn) -> int:
    bits = 0
    for row in column:
        bits |= 1 << row
    return bits


def _to_rows(bits: int) -> SparseColumn:
    # bin() reversed so that digit k is row k
    digits = bin(bits)[:1:-1]
    return tuple(row for row, digit in enumerate(digits) if digit == "1")


def reduce(m: StaircaseMatrix, *, log_additions: bool = False) -> tuple[StaircaseMatrix, ReductionStats]:
    """
    Run the left-to-right matrix reduction on a staircase-shaped matrix.

    Columns are processed strictly in order. While the current column is nonzero and
    its pivot is owned by an earlier, already reduced column, that column is added.
    The working column and the pivot owners are held as Python integers used as
    GF(2) bitsets; the metered cost of an addition is the size of the added column.

    Args:
        m: The matrix to reduce
        log_additions: Record, per column, the indices of the columns added to it

    Returns:
        The reduced matrix and its ReductionStats

    Raises:
        InvalidMatrix: If a row index is out of bounds or the pivots decrease
    """
    _check_matrix(m)

    # indexed by row; set once a column takes that row as its pivot
    owner_index = [-1] * m.r
    owner_bits = [0] * m.r
    owner_size = [0] * m.r
    reduced: list[SparseColumn] = []
    additions: list[int] = []
    costs: list[int] = []
    log: Optional[list[tuple[int, ...]]] = [] if log_additions else None
    original_pivots = set()
    pivot_pairs: dict[int, int] = {}
    cost = 0
    fill_up = 0

    for index, column in enumerate(m.columns):
        if column:
            original_pivots.add(column[-1])
        bits = _to_bits(column)
        count = 0
        spent = 0
        added = []
        while bits:
            low = bits.bit_length() - 1
            owner = owner_index[low]
            if owner < 0:  # fresh pivot
                break
            bits ^= owner_bits[low]
            spent += owner_size[low]
            count += 1
            if log is not None:
                added.append(owner)

        if bits:
            low = bits.bit_length() - 1
            size = bits.bit_count()
            owner_index[low] = index
            owner_bits[low] = bits
            owner_size[low] = size
            pivot_pairs[low] = index
            fill_up += size
            # untouched columns keep their original tuple
            reduced.append(tuple(column) if count == 0 else _to_rows(bits))
        else:
            reduced.append(ZERO_COLUMN)
        cost += spent
        additions.append(count)
        costs.append(spent)
        if log is not None:
            log.append(tuple(added))

    # a reduced pivot that was already an original pivot is a step index
    step = frozenset(p for p in pivot_pairs if p in original_pivots)
    critical = frozenset(p for p in pivot_pairs if p not in original_pivots)
    stats = ReductionStats(
        r=m.r,
        c=m.c,
        fill_up=fill_up,
        cost=cost,
        additions_per_column=tuple(additions),
        cost_per_column=tuple(costs),
        step_indices=step,
        critical_indices=critical,
        pivot_pairs=pivot_pairs,
        addition_log=tuple(log) if log is not None else None,
    )
    logger.debug(f"Reduced {m.c} columns over {m.r} rows: fill-up {fill_up}, cost {cost}, "
                 f"{len(step)} step / {len(critical)} critical indices")
    return StaircaseMatrix(r=m.r, columns=tuple(reduced)), stats


def classify_indices(original: StaircaseMatrix, reduced: StaircaseMatrix) -> tuple[frozenset[int], frozenset[int]]:
    """
    Split the pivots of a reduced matrix into step and critical indices.

    A pivot of the reduced matrix is a step index when it is also a pivot of the
    original matrix, and a critical index otherwise.

    Raises:
        MismatchedShapes: If the two matrices differ in row or column count
    """
    if original.r != reduced.r or original.c != reduced.c:
        raise MismatchedShapes(
            f"original is {original.r}x{original.c} but reduced is {reduced.r}x{reduced.c}"
        )
    original_pivots = {column[-1] for column in original.columns if column}
    reduced_pivots = {column[-1] for column in reduced.columns if column}
    step = frozenset(reduced_pivots & original_pivots)
    return step, frozenset(reduced_pivots - step)


def check_cost_bound(stats: ReductionStats, c: int) -> bool:
    """cost(M) <= c * #M', the bound every left-to-right reduction obeys."""
    return stats.cost <= c * stats.fill_up


def staircase_fillup_bound(original: StaircaseMatrix, stats: ReductionStats) -> int:
    """
    Upper bound on the fill-up of a reduced staircase matrix.

    Columns whose pivot is a step index are unchanged step columns; a column with
    critical pivot p holds at most p + 1 entries (rows are 0-based).
    """
    step_sizes = {}
    for column in original.columns:
        if column and column[-1] not in step_sizes:
            step_sizes[column[-1]] = len(column)
    return (sum(step_sizes[p] for p in stats.step_indices)
            + sum(p + 1 for p in stats.critical_indices))


def check_staircase_fillup_bound(original: StaircaseMatrix, stats: ReductionStats) -> bool:
    return stats.fill_up <= staircase_fillup_bound(original, stats)
