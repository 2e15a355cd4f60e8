"""Spin configurations, the Hamiltonian, and single-spin updates.

Spins take values ``1..q``. Energies are exact integers: with unit coupling
``H(sigma) = -#(agreeing edges)`` and the energy gap ``H + |E|`` is the
number of disagreeing edges.

Text literal grammar (used by tests and the CLI)::

    literal := line (SEP line)*        SEP is a newline or "/"
    line    := spin (WS spin)*         exactly L spins per line
    spin    := decimal integer in 1..q

There are exactly K lines and they are written top row first: the first
line is row K-1, the last line is row 0, so the text reads like a picture
of the lattice with the row index increasing upward.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .lattice import GridSpec, Vertex


@dataclass(eq=False)
class Configuration:
    """Spin assignment over the vertices of ``spec`` (column-major, 1-based values)."""

    spec: GridSpec
    spins: np.ndarray
    _energy: int | None = field(default=None, repr=False)

    def __post_init__(self):
        spins = np.asarray(self.spins)
        if spins.shape != (self.spec.n_vertices,):
            raise InputError(f"expected {self.spec.n_vertices} spins, got shape {spins.shape}")
        if spins.size and (spins.min() < 1 or spins.max() > self.spec.q):
            raise InputError(f"spin values must lie in 1..{self.spec.q}")
        self.spins = spins.astype(np.int8, copy=True)

    # -- constructors ---------------------------------------------------
    @classmethod
    def uniform(cls, spec: GridSpec, k: int) -> "Configuration":
        _check_spin(spec, k)
        return cls(spec, np.full(spec.n_vertices, k, dtype=np.int8))

    @classmethod
    def from_grid(cls, spec: GridSpec, grid) -> "Configuration":
        """Build from ``grid[row][col]`` with row 0 at the bottom."""
        arr = np.asarray(grid)
        if arr.shape != (spec.K, spec.L):
            raise InputError(f"grid must have shape ({spec.K}, {spec.L}), got {arr.shape}")
        return cls(spec, arr.T.reshape(-1))

    @classmethod
    def random(cls, spec: GridSpec, rng: np.random.Generator) -> "Configuration":
        return cls(spec, rng.integers(1, spec.q + 1, size=spec.n_vertices))

    # -- views ----------------------------------------------------------
    def grid(self) -> np.ndarray:
        """Spins as a ``(K, L)`` array indexed ``[row, col]``."""
        return self.spins.reshape(self.spec.L, self.spec.K).T

    def __getitem__(self, v) -> int:
        return int(self.spins[self.spec.index(v)])

    def copy(self) -> "Configuration":
        new = Configuration(self.spec, self.spins)
        new._energy = self._energy
        return new

    def key(self) -> bytes:
        return self.spins.tobytes()

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return self.spec == other.spec and np.array_equal(self.spins, other.spins)

    def __hash__(self):
        return hash((self.spec, self.key()))

    def __str__(self):
        return format_literal(self)

    # -- energy ---------------------------------------------------------
    @property
    def energy(self) -> int:
        if self._energy is None:
            self._energy = energy(self)
        return self._energy


def _check_spin(spec: GridSpec, k) -> int:
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or not 1 <= k <= spec.q:
        raise InputError(f"spin value {k!r} not in 1..{spec.q}")
    return int(k)


def energy_gap(sigma: Configuration) -> int:
    """Number of disagreeing edges, ``H(sigma) + |E|``."""
    e = sigma.spec.edge_array
    return int(np.count_nonzero(sigma.spins[e[:, 0]] != sigma.spins[e[:, 1]]))


def energy(sigma: Configuration) -> int:
    """Hamiltonian with unit coupling: minus the number of agreeing edges."""
    return energy_gap(sigma) - sigma.spec.n_edges


def delta_energy(sigma: Configuration, v, k: int) -> int:
    """``H(sigma^{v,k}) - H(sigma)`` from the neighbourhood of ``v`` alone."""
    spec = sigma.spec
    k = _check_spin(spec, k)
    i = spec.index(v)
    return _delta(sigma.spins, spec.neighbor_lists[i], i, k)


def _delta(spins, nbrs, i: int, k: int) -> int:
    old = spins[i]
    if old == k:
        return 0
    d = 0
    for w in nbrs:
        s = spins[w]
        if s == old:
            d += 1
        elif s == k:
            d -= 1
    return d


def apply_update(sigma: Configuration, v, k: int) -> Configuration:
    """Return ``sigma^{v,k}``: a copy with vertex ``v`` recoloured to ``k``."""
    d = delta_energy(sigma, v, k)
    new = Configuration(sigma.spec, sigma.spins)
    new.spins[sigma.spec.index(v)] = k
    if sigma._energy is not None:
        new._energy = sigma._energy + d
    return new


def swap_colors(sigma: Configuration, k: int, l: int) -> Configuration:
    """Exchange spin values ``k`` and ``l`` everywhere."""
    k = _check_spin(sigma.spec, k)
    l = _check_spin(sigma.spec, l)
    if k == l:
        raise InputError("swap_colors needs two distinct spin values")
    spins = sigma.spins.copy()
    spins[sigma.spins == k] = l
    spins[sigma.spins == l] = k
    new = Configuration(sigma.spec, spins)
    new._energy = sigma._energy
    return new


def is_stable(sigma: Configuration) -> bool:
    return bool(np.all(sigma.spins == sigma.spins[0]))


@dataclass(frozen=True)
class StableConfig:
    """The all-``k`` configuration ``s_k``."""

    k: int

    def expand(self, spec: GridSpec) -> Configuration:
        return Configuration.uniform(spec, self.k)


def stable_set(spec: GridSpec) -> list[StableConfig]:
    return [StableConfig(k) for k in range(1, spec.q + 1)]


def stable_color(sigma: Configuration) -> int | None:
    """Spin value of ``sigma`` if it is stable, else ``None``."""
    return int(sigma.spins[0]) if is_stable(sigma) else None


# -- literal I/O --------------------------------------------------------
def format_literal(sigma: Configuration, sep: str = "\n") -> str:
    g = sigma.grid()
    return sep.join(" ".join(str(int(s)) for s in g[r]) for r in range(sigma.spec.K - 1, -1, -1))


def parse_literal(spec: GridSpec, text: str) -> Configuration:
    lines = [ln.strip() for ln in re.split(r"[\n/]", text.strip())]
    lines = [ln for ln in lines if ln]
    if len(lines) != spec.K:
        raise InputError(f"literal has {len(lines)} rows, expected K={spec.K}")
    rows = []
    for ln in lines:
        try:
            vals = [int(tok) for tok in ln.split()]
        except ValueError:
            raise InputError(f"non-integer token in row {ln!r}") from None
        if len(vals) != spec.L:
            raise InputError(f"row {ln!r} has {len(vals)} spins, expected L={spec.L}")
        rows.append(vals)
    return Configuration.from_grid(spec, rows[::-1])


__all__ = [
    "Configuration",
    "StableConfig",
    "Vertex",
    "apply_update",
    "delta_energy",
    "energy",
    "energy_gap",
    "format_literal",
    "is_stable",
    "parse_literal",
    "stable_color",
    "stable_set",
    "swap_colors",
]
