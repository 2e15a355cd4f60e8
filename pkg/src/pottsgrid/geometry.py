"""Bridges, crosses, and per-line energy gaps.

A horizontal bridge is a monochromatic row, a vertical bridge a monochromatic
column; a ``k``-cross is a horizontal and a vertical ``k``-bridge together.
Everything is recomputed from scratch in ``O(K L)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import Configuration
from .errors import InputError

HORIZONTAL = "horizontal"
VERTICAL = "vertical"
ORIENTATIONS = (VERTICAL, HORIZONTAL)


def _line_gap(values: np.ndarray, cyclic: bool) -> int:
    gap = int(np.count_nonzero(values[1:] != values[:-1]))
    if cyclic:
        # parallel wrap edge when the line has length 2
        gap += int(values[-1] != values[0])
    return gap


def row_gap(sigma: Configuration, i: int) -> int:
    """Disagreeing horizontal edges on row ``i`` (wrap edge included when rows wrap)."""
    if not 0 <= i < sigma.spec.K:
        raise InputError(f"row {i} out of range")
    return _line_gap(sigma.grid()[i], sigma.spec.rows_wrap)


def col_gap(sigma: Configuration, j: int) -> int:
    """Disagreeing vertical edges on column ``j``."""
    if not 0 <= j < sigma.spec.L:
        raise InputError(f"column {j} out of range")
    return _line_gap(sigma.grid()[:, j], sigma.spec.cols_wrap)


def line_gap_lower_bound(spec, orientation: str) -> int:
    """Least possible gap of a non-monochromatic line: 2 if such lines are cycles, else 1."""
    cyclic = spec.rows_wrap if orientation == HORIZONTAL else spec.cols_wrap
    return 2 if cyclic else 1


@dataclass(frozen=True)
class BridgeReport:
    horizontal: dict[int, int]
    vertical: dict[int, int]
    per_color_count: dict[int, int]
    row_gap_bound: int
    col_gap_bound: int

    def count(self, k: int) -> int:
        return self.per_color_count.get(k, 0)

    def has_cross(self, k: int) -> bool:
        return k in self.horizontal.values() and k in self.vertical.values()

    def any(self) -> bool:
        return bool(self.horizontal or self.vertical)

    def ordered(self) -> list[tuple[str, int, int]]:
        """All bridges as ``(orientation, index, k)``: vertical first, then by index."""
        out = [(VERTICAL, j, k) for j, k in sorted(self.vertical.items())]
        out += [(HORIZONTAL, i, k) for i, k in sorted(self.horizontal.items())]
        return out


def bridges(sigma: Configuration) -> BridgeReport:
    g = sigma.grid()
    horizontal = {i: int(g[i, 0]) for i in range(g.shape[0]) if np.all(g[i] == g[i, 0])}
    vertical = {j: int(g[0, j]) for j in range(g.shape[1]) if np.all(g[:, j] == g[0, j])}
    counts = {k: 0 for k in range(1, sigma.spec.q + 1)}
    for k in list(horizontal.values()) + list(vertical.values()):
        counts[k] += 1
    return BridgeReport(
        horizontal,
        vertical,
        counts,
        line_gap_lower_bound(sigma.spec, HORIZONTAL),
        line_gap_lower_bound(sigma.spec, VERTICAL),
    )


def bridge_count(sigma: Configuration, k: int) -> int:
    """``B_k``: number of horizontal plus vertical ``k``-bridges."""
    return bridges(sigma).count(k)


def has_cross(sigma: Configuration, k: int) -> bool:
    return bridges(sigma).has_cross(k)


@dataclass(frozen=True)
class BridgeDeltaVerdict:
    increments: dict[int, int]
    new_cross: dict[int, bool]

    @property
    def in_range(self) -> bool:
        return all(-2 <= d <= 2 for d in self.increments.values())

    @property
    def plus_two_iff_new_cross(self) -> bool:
        return all((d == 2) == self.new_cross[k] for k, d in self.increments.items())

    @property
    def ok(self) -> bool:
        return self.in_range and self.plus_two_iff_new_cross


def bridge_delta_bound_check(sigma: Configuration, sigma_new: Configuration) -> BridgeDeltaVerdict:
    """Per-colour change in ``B_k`` across a single-spin update.

    ``new_cross[k]`` is true when ``sigma_new`` has a ``k``-cross made of a
    row and a column that are both not ``k``-bridges in ``sigma``, i.e. a
    cross that ``sigma`` does not have even in part. An increment of +2
    should occur exactly then. Identical inputs (a void update) are
    accepted and give all-zero increments.
    """
    if sigma.spec != sigma_new.spec:
        raise InputError("configurations live on different grids")
    if np.count_nonzero(sigma.spins != sigma_new.spins) > 1:
        raise InputError("configurations differ in more than one vertex")
    before, after = bridges(sigma), bridges(sigma_new)
    ks = range(1, sigma.spec.q + 1)
    return BridgeDeltaVerdict(
        {k: after.count(k) - before.count(k) for k in ks},
        {k: _fresh_cross(before, after, k) for k in ks},
    )


def _fresh_cross(before: BridgeReport, after: BridgeReport, k: int) -> bool:
    rows = [i for i, c in after.horizontal.items() if c == k and before.horizontal.get(i) != k]
    cols = [j for j, c in after.vertical.items() if c == k and before.vertical.get(j) != k]
    return bool(rows and cols)
