"""K x L grid graphs and the tunneling barrier constant.

Vertices are pairs ``(col, row)`` with ``0 <= col < L`` and ``0 <= row < K``;
the row index increases upward. Array-backed code uses the column-major
linear index ``idx = col * K + row``.

Boundary conditions:

* ``periodic``: rows and columns both wrap (a torus).
* ``open``: nothing wraps.
* ``semi_periodic``: the top and bottom boundaries are identified, so every
  column is a cycle, while the left and right boundaries stay open.

When a wrapping side has length 2 the wrap edge is parallel to the ordinary
edge between the same two vertices; it is kept, so every torus vertex has
degree 4 and ``|E| = 2KL`` for all ``K, L >= 2``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import InputError


class Boundary(str, Enum):
    PERIODIC = "periodic"
    OPEN = "open"
    SEMI_PERIODIC = "semi_periodic"


class Vertex(NamedTuple):
    col: int
    row: int


class HypothesisWarning(UserWarning):
    """Emitted when a quantity is requested outside the max{K, L} >= 3 regime."""


@dataclass(frozen=True)
class GridSpec:
    """Immutable description of a q-state Potts instance on a K x L grid."""

    K: int
    L: int
    boundary: Boundary = Boundary.PERIODIC
    q: int = 2

    def __post_init__(self):
        for name in ("K", "L", "q"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
                raise InputError(f"{name} must be an integer, got {value!r}")
            if value < 2:
                raise InputError(f"{name} must be >= 2, got {value}")
        try:
            object.__setattr__(self, "boundary", Boundary(self.boundary))
        except ValueError:
            raise InputError(f"unknown boundary {self.boundary!r}") from None

    # -- boundary flags -------------------------------------------------
    @property
    def rows_wrap(self) -> bool:
        """Whether horizontal edges wrap from column L-1 back to column 0."""
        return self.boundary is Boundary.PERIODIC

    @property
    def cols_wrap(self) -> bool:
        """Whether vertical edges wrap from row K-1 back to row 0."""
        return self.boundary in (Boundary.PERIODIC, Boundary.SEMI_PERIODIC)

    @property
    def n_vertices(self) -> int:
        return self.K * self.L

    @property
    def n_edges(self) -> int:
        h, v = self.edge_counts
        return h + v

    @property
    def edge_counts(self) -> tuple[int, int]:
        K, L = self.K, self.L
        h = K * L if self.rows_wrap else K * (L - 1)
        v = K * L if self.cols_wrap else L * (K - 1)
        return h, v

    @property
    def satisfies_hypothesis(self) -> bool:
        return max(self.K, self.L) >= 3

    # -- indexing -------------------------------------------------------
    def index(self, v) -> int:
        col, row = self._check(v)
        return col * self.K + row

    def vertex(self, idx: int) -> Vertex:
        if not 0 <= idx < self.n_vertices:
            raise InputError(f"vertex index {idx} out of range")
        return Vertex(*divmod(int(idx), self.K))

    def vertices(self) -> list[Vertex]:
        return [Vertex(c, r) for c in range(self.L) for r in range(self.K)]

    def _check(self, v) -> Vertex:
        try:
            col, row = v
        except (TypeError, ValueError):
            raise InputError(f"not a vertex: {v!r}") from None
        if not (0 <= col < self.L and 0 <= row < self.K):
            raise InputError(f"vertex {tuple(v)} outside {self.K}x{self.L} grid")
        return Vertex(int(col), int(row))

    # -- lines ----------------------------------------------------------
    def column(self, j: int) -> list[int]:
        """Linear indices of column ``j``, bottom to top."""
        if not 0 <= j < self.L:
            raise InputError(f"column {j} out of range")
        return [j * self.K + r for r in range(self.K)]

    def row(self, i: int) -> list[int]:
        """Linear indices of row ``i``, left to right."""
        if not 0 <= i < self.K:
            raise InputError(f"row {i} out of range")
        return [c * self.K + i for c in range(self.L)]

    # -- cached adjacency -----------------------------------------------
    @cached_property
    def neighbor_table(self) -> np.ndarray:
        """``(KL, 4)`` int array of neighbour indices (right, up, left, down), -1 if absent."""
        K, L = self.K, self.L
        table = np.full((K * L, 4), -1, dtype=np.int64)
        for c in range(L):
            for r in range(K):
                i = c * K + r
                if c + 1 < L or self.rows_wrap:
                    table[i, 0] = ((c + 1) % L) * K + r
                if r + 1 < K or self.cols_wrap:
                    table[i, 1] = c * K + (r + 1) % K
                if c - 1 >= 0 or self.rows_wrap:
                    table[i, 2] = ((c - 1) % L) * K + r
                if r - 1 >= 0 or self.cols_wrap:
                    table[i, 3] = c * K + (r - 1) % K
        table.setflags(write=False)
        return table

    @cached_property
    def neighbor_lists(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(int(w) for w in row if w >= 0) for row in self.neighbor_table)

    @cached_property
    def edge_array(self) -> np.ndarray:
        """``(|E|, 2)`` array of linear-index endpoints, horizontal edges first."""
        h, v = edges(self)
        pairs = [(self.index(a), self.index(b)) for a, b in h + v]
        arr = np.array(pairs, dtype=np.int64).reshape(-1, 2)
        arr.setflags(write=False)
        return arr

    def __str__(self):
        return f"{self.K}x{self.L} {self.boundary.value} q={self.q}"


def neighbors(spec: GridSpec, v) -> list[Vertex]:
    """Neighbours of ``v`` in the order right, up, left, down.

    Missing neighbours on open sides are omitted. On a wrapping side of
    length 2 the same vertex appears twice (parallel edges).
    """
    i = spec.index(v)
    return [spec.vertex(w) for w in spec.neighbor_lists[i]]


def edges(spec: GridSpec) -> tuple[list[tuple[Vertex, Vertex]], list[tuple[Vertex, Vertex]]]:
    """Horizontal and vertical edge lists.

    Each edge is listed once as ``(v, w)`` where ``w`` is the right
    (respectively upper) neighbour of ``v``.
    """
    K, L = spec.K, spec.L
    horizontal = [
        (Vertex(c, r), Vertex((c + 1) % L, r))
        for r in range(K)
        for c in range(L if spec.rows_wrap else L - 1)
    ]
    vertical = [
        (Vertex(c, r), Vertex(c, (r + 1) % K))
        for c in range(L)
        for r in range(K if spec.cols_wrap else K - 1)
    ]
    return horizontal, vertical


def gamma(spec: GridSpec, warn: bool = True) -> int:
    """Energy barrier between stable configurations.

    periodic: ``2 min(K, L) + 2``; open: ``min(K, L) + 1``;
    semi_periodic: ``min(K + 2, 2L + 1)``. Grids with ``max(K, L) < 3``
    still get the formula value, with a :class:`HypothesisWarning`.
    """
    K, L = spec.K, spec.L
    if spec.boundary is Boundary.PERIODIC:
        value = 2 * min(K, L) + 2
    elif spec.boundary is Boundary.OPEN:
        value = min(K, L) + 1
    else:
        value = min(K + 2, 2 * L + 1)
    if warn and not spec.satisfies_hypothesis:
        warnings.warn(
            f"max(K, L) = {max(K, L)} < 3: gamma({spec}) is outside the regime where it is the barrier",
            HypothesisWarning,
            stacklevel=2,
        )
    return value
