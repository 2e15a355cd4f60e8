import itertools

import numpy as np
import pytest

from oracles import bottleneck, uniform
from pottsgrid import Configuration, GridSpec, InputError, PreconditionError, gamma
from pottsgrid.config import StableConfig, energy, is_stable, parse_literal
from pottsgrid.exact import LandscapeIndex, phi_stable_pairs
from pottsgrid.geometry import HORIZONTAL, VERTICAL, bridges
from pottsgrid.paths import (
    Path,
    choose_bridge,
    expansion_bound,
    expansion_path,
    path_height,
    reduction_path,
    reference_path,
)


def assert_valid(path: Path):
    configs = path.steps
    assert len(configs) == len(path.energies)
    for a, b in zip(configs, configs[1:]):
        assert np.count_nonzero(a.spins != b.spins) == 1
    for c, e in zip(configs, path.energies):
        assert energy(Configuration(c.spec, c.spins)) == e


def test_single_configuration_path():
    sigma = Configuration.uniform(GridSpec(3, 3), 1)
    p = Path(sigma)
    assert len(p) == 1 and path_height(p) == -18 and p.slack == 0


def test_one_flip_path():
    spec = GridSpec(3, 3)
    a = Configuration.uniform(spec, 1)
    b = Configuration.from_grid(spec, [[1, 1, 1], [1, 2, 1], [1, 1, 1]])
    assert Path.from_configurations([a, b]).height == -18 + 4


def test_from_configurations_elides_void_steps():
    spec = GridSpec(3, 3)
    a = Configuration.uniform(spec, 1)
    p = Path.from_configurations([a, a, a])
    assert len(p) == 1
    with pytest.raises(InputError):
        Path.from_configurations([])
    with pytest.raises(InputError):
        Path.from_configurations([a, Configuration.uniform(spec, 2)])


def test_extend():
    spec = GridSpec(3, 3, "open")
    p = reference_path(1, 2, spec)
    back = reference_path(2, 1, spec)
    joined = p.extend(back)
    assert joined.end == Configuration.uniform(spec, 1)
    assert_valid(joined)
    with pytest.raises(InputError):
        reference_path(1, 2, spec).extend(reference_path(1, 2, spec))


def test_dump_format():
    spec = GridSpec(2, 3, "open")
    text = expansion_path(parse_literal(spec, "1 2 2/1 2 2")).dump()
    blocks = text.strip().split("# step ")[1:]
    assert blocks[0].splitlines() == ["0 energy -5", "1 2 2", "1 2 2"]
    assert len(blocks) == 5


@pytest.mark.parametrize("K,L,q,boundary", [(3, 3, 2, "periodic"), (3, 3, 3, "open"), (2, 4, 2, "semi_periodic")])
def test_expansion_from_stable_is_trivial(K, L, q, boundary):
    spec = GridSpec(K, L, boundary, q)
    p = expansion_path(Configuration.uniform(spec, 2))
    assert len(p) == 1 and p.height == energy(Configuration.uniform(spec, 2))


def test_expansion_one_black_column():
    spec = GridSpec(3, 3)
    sigma = Configuration.from_grid(spec, [[1, 2, 1], [1, 1, 2], [1, 2, 2]])
    p = expansion_path(sigma, (VERTICAL, 0, 1))
    assert p.end == Configuration.uniform(spec, 1)
    assert p.slack <= 2
    assert_valid(p)
    p_open = expansion_path(Configuration(GridSpec(3, 3, "open"), sigma.spins), (VERTICAL, 0, 1))
    assert p_open.slack <= 1


def test_expansion_requires_bridge():
    spec = GridSpec(3, 3)
    sigma = Configuration.from_grid(spec, [[1, 2, 1], [2, 1, 2], [1, 2, 2]])
    with pytest.raises(PreconditionError):
        expansion_path(sigma)
    with pytest.raises(PreconditionError):
        expansion_path(Configuration.uniform(spec, 1), (VERTICAL, 0, 2))


def test_bridge_tie_break():
    spec = GridSpec(3, 3, q=3)
    sigma = Configuration.from_grid(spec, [[3, 1, 3], [3, 3, 3], [3, 2, 3]])
    assert choose_bridge(sigma) == (VERTICAL, 0, 3)
    sigma = Configuration.from_grid(spec, [[1, 2, 3], [2, 2, 2], [3, 1, 2]])
    assert choose_bridge(sigma) == (HORIZONTAL, 1, 2)


@pytest.mark.parametrize("K,L,boundary", [(K, L, b) for K in range(2, 7) for L in range(2, 7) for b in ("periodic", "open")])
def test_reference_height_equals_gamma(K, L, boundary):
    if max(K, L) < 3:
        pytest.skip("outside the grid-size hypothesis")
    spec = GridSpec(K, L, boundary, 3)
    for c, d in itertools.permutations(range(1, 4), 2):
        p = reference_path(StableConfig(c), StableConfig(d), spec)
        assert p.slack == gamma(spec)
        assert p.end == Configuration.uniform(spec, d)


def test_reference_examples():
    assert reference_path(1, 2, GridSpec(3, 3)).slack == 8
    assert reference_path(1, 2, GridSpec(3, 4, "open", 3)).slack == 4
    p = reference_path(1, 2, GridSpec(3, 3))
    assert_valid(p)
    assert np.diff(p.energies[:4]).tolist() == [4, 2, 0]
    assert p.energies[3] - p.energies[0] == 6
    with pytest.raises(InputError):
        reference_path(2, 2, GridSpec(3, 3))


@pytest.mark.parametrize("K,L", [(2, 3), (3, 2), (3, 3), (2, 4), (4, 2), (3, 4), (4, 3), (4, 4)])
def test_semi_reference_matches_exact_barrier(K, L):
    spec = GridSpec(K, L, "semi_periodic")
    exact = set(phi_stable_pairs(LandscapeIndex(spec)).values())
    assert exact == {reference_path(1, 2, spec).slack}


def test_reference_heights_dominate_minimax_oracle():
    for K, L, q, b in [(2, 3, 2, "open"), (2, 3, 3, "open"), (3, 3, 2, "periodic"), (2, 3, 2, "semi_periodic")]:
        spec = GridSpec(K, L, b, q)
        phi = bottleneck(K, L, q, b, uniform(K, L, 1), [uniform(K, L, 2)])
        assert reference_path(1, 2, spec).height >= phi


@pytest.mark.parametrize("K,L,q,boundary", [(3, 3, 2, "periodic"), (2, 3, 3, "open"), (3, 3, 2, "open"), (2, 4, 2, "semi_periodic"), (3, 4, 2, "open"), (4, 3, 2, "open"), (3, 3, 2, "semi_periodic")])
def test_expansion_and_reduction_exhaustive(K, L, q, boundary):
    spec = GridSpec(K, L, boundary, q)
    g = gamma(spec, warn=False)
    for flat in itertools.product(range(1, q + 1), repeat=K * L):
        sigma = Configuration(spec, np.array(flat))
        for orientation, index, k in bridges(sigma).ordered():
            p = expansion_path(sigma, (orientation, index, k))
            assert p.slack <= expansion_bound(spec, orientation)
            assert p.end == Configuration.uniform(spec, k)
        p, target = reduction_path(sigma)
        assert is_stable(p.end) and p.end == target.expand(spec)
        if not is_stable(sigma):
            assert p.slack < g


def test_reduction_of_stable_is_trivial():
    p, target = reduction_path(Configuration.uniform(GridSpec(3, 3), 2))
    assert len(p) == 1 and target == StableConfig(2)


def test_reduction_checkerboard_valid():
    spec = GridSpec(4, 4)
    sigma = Configuration.from_grid(spec, [[1 + (r + c) % 2 for c in range(4)] for r in range(4)])
    p, _ = reduction_path(sigma)
    assert_valid(p)
    assert p.slack < gamma(spec)
