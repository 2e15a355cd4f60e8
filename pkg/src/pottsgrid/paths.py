"""Single-spin-update paths and the three constructive procedures.

* :func:`expansion_path` grows a monochromatic bridge line by line into the
  matching stable configuration.
* :func:`reference_path` joins two stable configurations: paint one boundary
  line in the target colour, then expand it.
* :func:`reduction_path` takes any configuration to some stable one while
  staying strictly below the barrier above its starting energy.

Void updates (recolouring a vertex to the colour it already has) are never
emitted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import Configuration, StableConfig, _delta, format_literal, is_stable
from .errors import InputError, PreconditionError
from .geometry import HORIZONTAL, ORIENTATIONS, VERTICAL, bridges
from .lattice import Boundary, GridSpec


@dataclass
class Path:
    """Start configuration plus a list of ``(vertex_index, new_spin)`` updates.

    ``energies[i]`` is the energy after ``i`` updates, so ``len(energies)``
    equals the number of configurations on the path.
    """

    start: Configuration
    moves: list[tuple[int, int]] = field(default_factory=list)
    energies: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.energies:
            self.energies = [self.start.energy]

    @classmethod
    def from_configurations(cls, configs) -> "Path":
        configs = list(configs)
        if not configs:
            raise InputError("a path needs at least one configuration")
        path = cls(configs[0].copy())
        for prev, cur in zip(configs, configs[1:]):
            diff = np.flatnonzero(prev.spins != cur.spins)
            if len(diff) > 1:
                raise InputError("consecutive configurations differ in more than one vertex")
            if len(diff) == 1:
                i = int(diff[0])
                path._push(i, int(cur.spins[i]), prev.spins)
        return path

    def _push(self, i, k, spins_before):
        d = _delta(spins_before, self.start.spec.neighbor_lists[i], i, k)
        self.moves.append((i, k))
        self.energies.append(self.energies[-1] + d)

    def __len__(self):
        return len(self.energies)

    @property
    def spec(self) -> GridSpec:
        return self.start.spec

    @property
    def height(self) -> int:
        return max(self.energies)

    @property
    def slack(self) -> int:
        """Height above the starting energy."""
        return self.height - self.energies[0]

    def configurations(self):
        spins = self.start.spins.copy()
        yield Configuration(self.spec, spins)
        for i, k in self.moves:
            spins[i] = k
            yield Configuration(self.spec, spins)

    @property
    def steps(self) -> list[Configuration]:
        return list(self.configurations())

    @property
    def end(self) -> Configuration:
        spins = self.start.spins.copy()
        for i, k in self.moves:
            spins[i] = k
        return Configuration(self.spec, spins)

    def extend(self, other: "Path") -> "Path":
        if other.start != self.end:
            raise InputError("paths do not join: start of the second is not the end of the first")
        offset = self.energies[-1] - other.energies[0]
        self.moves.extend(other.moves)
        self.energies.extend(e + offset for e in other.energies[1:])
        return self

    def dump(self) -> str:
        """One block per configuration: ``# step <i> energy <H>`` then the literal."""
        blocks = [
            f"# step {i} energy {e}\n{format_literal(c)}"
            for i, (c, e) in enumerate(zip(self.configurations(), self.energies))
        ]
        return "\n".join(blocks) + "\n"


def path_height(p: Path) -> int:
    if len(p) == 0:
        raise InputError("empty path has no height")
    return p.height


class _Builder:
    def __init__(self, sigma: Configuration):
        self.path = Path(sigma.copy())
        self.spins = sigma.spins.copy()
        self.nbrs = sigma.spec.neighbor_lists

    def paint(self, i: int, k: int):
        if self.spins[i] == k:
            return
        self.path._push(i, k, self.spins)
        self.spins[i] = k

    def current(self) -> Configuration:
        return Configuration(self.path.spec, self.spins)


# -- line geometry ------------------------------------------------------
def _lines(spec: GridSpec, orientation: str) -> list[list[int]]:
    if orientation == VERTICAL:
        return [spec.column(j) for j in range(spec.L)]
    return [spec.row(i) for i in range(spec.K)]


def _line_cyclic(spec: GridSpec, orientation: str) -> bool:
    return spec.cols_wrap if orientation == VERTICAL else spec.rows_wrap


def _across_cyclic(spec: GridSpec, orientation: str) -> bool:
    return spec.rows_wrap if orientation == VERTICAL else spec.cols_wrap


def _check_orientation(orientation: str):
    if orientation not in ORIENTATIONS:
        raise InputError(f"orientation must be one of {ORIENTATIONS}, got {orientation!r}")


def expansion_bound(spec: GridSpec, orientation: str) -> int:
    """Guaranteed bound on the expansion slack from a bridge of this orientation.

    Each new line starts next to a finished one; its first vertex gains at
    most ``deg - 2`` disagreements net, which is 2 when lines are cycles and
    1 when they have open ends.
    """
    _check_orientation(orientation)
    return 2 if _line_cyclic(spec, orientation) else 1


def _expansion_order(n_lines: int, start: int, cyclic: bool) -> list[int]:
    if cyclic:
        return [(start + s) % n_lines for s in range(1, n_lines)]
    return list(range(start + 1, n_lines)) + list(range(start - 1, -1, -1))


def _expand(builder: _Builder, orientation: str, index: int, k: int):
    spec = builder.path.spec
    lines = _lines(spec, orientation)
    for j in _expansion_order(len(lines), index, _across_cyclic(spec, orientation)):
        for v in lines[j]:
            builder.paint(v, k)


def choose_bridge(sigma: Configuration) -> tuple[str, int, int] | None:
    """Vertical before horizontal, then smallest index (colour is then determined)."""
    found = bridges(sigma).ordered()
    return found[0] if found else None


def expansion_path(sigma: Configuration, bridge: tuple[str, int, int] | None = None) -> Path:
    """Path from ``sigma`` to ``s_k`` by expanding a ``k``-bridge.

    ``bridge`` is ``(orientation, index, k)``; by default the first bridge
    in :func:`choose_bridge` order is used. Lines are filled one at a time,
    each from position 0 upward (columns bottom to top, rows left to right).
    When lines cannot wrap around, expansion runs from the bridge to the
    high boundary and then from the bridge down to the low one.
    """
    if bridge is None:
        bridge = choose_bridge(sigma)
        if bridge is None:
            raise PreconditionError("configuration has no monochromatic bridge")
    orientation, index, k = bridge
    _check_orientation(orientation)
    report = bridges(sigma)
    present = report.vertical if orientation == VERTICAL else report.horizontal
    if present.get(index) != k:
        raise PreconditionError(f"no {orientation} {k}-bridge on line {index}")
    builder = _Builder(sigma)
    _expand(builder, orientation, index, k)
    return builder.path


def _default_orientation(spec: GridSpec) -> str:
    return VERTICAL if spec.K <= spec.L else HORIZONTAL


def _reference_candidate(spec: GridSpec, c: int, d: int, orientation: str) -> Path:
    builder = _Builder(Configuration.uniform(spec, c))
    for v in _lines(spec, orientation)[0]:
        builder.paint(v, d)
    _expand(builder, orientation, 0, d)
    return builder.path


def _spin(s) -> int:
    return s.k if isinstance(s, StableConfig) else int(s)


def reference_path(c, d, spec: GridSpec) -> Path:
    """Path ``s_c -> s_d``: paint the first column (row if ``K > L``) in colour ``d``, then expand.

    For periodic and open grids its slack equals :func:`lattice.gamma`.
    On semi-periodic grids both orientations are built and the lower one
    is returned.
    """
    c, d = _spin(c), _spin(d)
    for s in (c, d):
        if not 1 <= s <= spec.q:
            raise InputError(f"spin value {s} not in 1..{spec.q}")
    if c == d:
        raise InputError("reference path needs two distinct stable configurations")
    primary = _default_orientation(spec)
    path = _reference_candidate(spec, c, d, primary)
    if spec.boundary is Boundary.SEMI_PERIODIC:
        other = HORIZONTAL if primary == VERTICAL else VERTICAL
        alt = _reference_candidate(spec, c, d, other)
        if alt.height < path.height:
            path = alt
    return path


# -- reduction ----------------------------------------------------------
def _fill_order(line: list[int], spins: np.ndarray, k: int, cyclic: bool) -> list[int]:
    """Recolour order for a line: grow contiguously from its lowest ``k`` vertex.

    Every vertex in the returned order has an in-line neighbour that is
    already ``k`` when its turn comes.
    """
    n = len(line)
    done = [spins[v] == k for v in line]
    if not any(done):
        raise PreconditionError("line has no vertex of the target colour")
    order = []
    while not all(done):
        for p in range(n):
            if done[p]:
                continue
            nbrs = [p - 1, p + 1]
            if cyclic:
                nbrs = [x % n for x in nbrs]
            if any(0 <= x < n and done[x] for x in nbrs):
                done[p] = True
                order.append(line[p])
                break
    return order


def _majority(values) -> tuple[int, int]:
    """(count, spin) of the most frequent spin; ties broken by smallest spin."""
    counts = np.bincount(np.asarray(values, dtype=np.int64))
    k = int(np.argmax(counts))
    return int(counts[k]), k


def _seed_column(sigma: Configuration) -> tuple[int, int]:
    """Column with the largest same-colour count and that colour.

    Ties go to the smallest column index, then the smallest spin value.
    """
    best = None
    for j in range(sigma.spec.L):
        count, k = _majority(sigma.spins[sigma.spec.column(j)])
        if best is None or count > best[0]:
            best = (count, j, k)
    return best[1], best[2]


def reduction_path(sigma: Configuration) -> tuple[Path, StableConfig]:
    """Path from ``sigma`` to a stable configuration with slack below the barrier.

    Stable input gives the one-configuration path. With a bridge available
    the path is :func:`expansion_path`. Otherwise the column ``c*`` with the
    largest same-colour count is completed in that colour, growing upward
    from its lowest vertex of that colour so every recoloured vertex already
    has a neighbour of the colour within the column, and the resulting
    vertical bridge is expanded.
    """
    if is_stable(sigma):
        return Path(sigma.copy()), StableConfig(int(sigma.spins[0]))
    bridge = choose_bridge(sigma)
    if bridge is not None:
        return expansion_path(sigma, bridge), StableConfig(bridge[2])
    spec = sigma.spec
    j, k = _seed_column(sigma)
    builder = _Builder(sigma)
    for v in _fill_order(spec.column(j), sigma.spins, k, spec.cols_wrap):
        builder.paint(v, k)
    _expand(builder, VERTICAL, j, k)
    return builder.path, StableConfig(k)
