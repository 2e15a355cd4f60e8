import numpy as np
import pytest

from oracles import bottleneck, kernel_row, uniform
from pottsgrid import CapacityError, Configuration, GridSpec, InputError, NumericalError, gamma
from pottsgrid.exact import (
    LandscapeIndex,
    communication_energy,
    communication_energy_to_set,
    deep_well_audit,
    expected_hitting_time,
    gibbs,
    mixing_time,
    phi_stable_pairs,
    spectral_gap,
    spectrum,
    symmetrized_kernel,
    transition_matrix,
)
from pottsgrid.paths import reference_path

OPEN23 = GridSpec(2, 3, "open")


@pytest.fixture(scope="module")
def open23():
    return LandscapeIndex(OPEN23)


def test_index_basics(open23):
    assert open23.n_states == 64
    low = open23.energies.min()
    assert low == -OPEN23.n_edges
    assert sorted(np.flatnonzero(open23.energies == low).tolist()) == open23.stable_states()
    rng = np.random.default_rng(0)
    for _ in range(50):
        sigma = Configuration.random(OPEN23, rng)
        s = open23.encode(sigma)
        assert open23.decode(s) == sigma
        assert open23.energies[s] == sigma.energy
    with pytest.raises(InputError):
        open23.decode(64)


def test_cap_refusal():
    with pytest.raises(CapacityError):
        LandscapeIndex(GridSpec(5, 5))


def test_moves_are_single_flips(open23):
    for s in range(open23.n_states):
        for t in open23.moves[s]:
            assert np.count_nonzero(open23.spins[s] != open23.spins[t]) == 1


@pytest.mark.parametrize("K,L,boundary,value", [(2, 3, "open", 3), (2, 3, "periodic", 6)])
def test_phi_examples(K, L, boundary, value):
    idx = LandscapeIndex(GridSpec(K, L, boundary))
    a, b = idx.stable_states()
    assert communication_energy(idx, a, b) - idx.energies[a] == value


def test_phi_against_dijkstra_oracle():
    for K, L, q, b in [(2, 3, 2, "open"), (2, 3, 2, "periodic"), (2, 3, 3, "open"), (3, 3, 2, "periodic"), (3, 2, 2, "semi_periodic")]:
        idx = LandscapeIndex(GridSpec(K, L, b, q))
        s = idx.stable_states()
        assert communication_energy(idx, s[0], s[1]) == bottleneck(K, L, q, b, uniform(K, L, 1), [uniform(K, L, 2)])
    idx = LandscapeIndex(GridSpec(2, 3, "open", 3))
    rng = np.random.default_rng(4)
    for _ in range(20):
        a, b = (int(x) for x in rng.choice(idx.n_states, size=2, replace=False))
        ga, gb = (idx.decode(x).grid().tolist() for x in (a, b))
        assert communication_energy(idx, a, b) == bottleneck(2, 3, 3, "open", ga, [gb])


def test_phi_symmetric(open23):
    rng = np.random.default_rng(1)
    for _ in range(100):
        a, b = (int(x) for x in rng.choice(64, size=2, replace=False))
        assert communication_energy(open23, a, b) == communication_energy(open23, b, a)
    with pytest.raises(InputError):
        communication_energy(open23, 3, 3)


def test_phi_to_set():
    idx = LandscapeIndex(GridSpec(2, 3, "open", 3))
    s1, s2, s3 = idx.stable_states()
    assert communication_energy_to_set(idx, s1, [s2, s3]) == idx.energies[s1] + 3
    assert communication_energy_to_set(idx, s1, [s2]) == communication_energy(idx, s1, s2)
    rng = np.random.default_rng(2)
    for _ in range(30):
        a = int(rng.integers(idx.n_states))
        B = [int(x) for x in rng.choice(idx.n_states, size=3, replace=False) if x != a]
        extra = int(rng.integers(idx.n_states))
        if not B or extra == a:
            continue
        assert communication_energy_to_set(idx, a, B + [extra]) <= communication_energy_to_set(idx, a, B)
    with pytest.raises(InputError):
        communication_energy_to_set(idx, s1, [])


@pytest.mark.parametrize("K,L,q,b", [(2, 3, 2, "open"), (3, 3, 2, "periodic"), (2, 3, 3, "periodic"), (3, 3, 2, "open")])
def test_stable_pairs_equal_gamma_and_reference_height(K, L, q, b):
    spec = GridSpec(K, L, b, q)
    idx = LandscapeIndex(spec)
    pairs = phi_stable_pairs(idx)
    assert set(pairs.values()) == {gamma(spec)}
    for (k, l), slack in pairs.items():
        assert reference_path(k, l, spec).slack == slack


def test_semi_barrier_formula_exceptions():
    # the formula holds on these semi-periodic grids except 3x2
    for K, L in [(2, 3), (3, 3), (2, 4), (4, 2), (3, 4), (4, 3)]:
        spec = GridSpec(K, L, "semi_periodic")
        assert set(phi_stable_pairs(LandscapeIndex(spec)).values()) == {gamma(spec)}
    spec = GridSpec(3, 2, "semi_periodic")
    assert set(phi_stable_pairs(LandscapeIndex(spec)).values()) == {4} != {gamma(spec)}


@pytest.mark.parametrize("K,L,q,b", [(3, 3, 2, "periodic"), (2, 3, 3, "open"), (3, 3, 2, "open")])
def test_deep_well_audit(K, L, q, b):
    report = deep_well_audit(LandscapeIndex(GridSpec(K, L, b, q)))
    assert report.passed and report.max_slack < report.gamma
    assert not set(report.argmax_states) & set(LandscapeIndex(GridSpec(K, L, b, q)).stable_states())


def test_deep_well_slack_against_oracle():
    spec = GridSpec(2, 3, "open", 3)
    idx = LandscapeIndex(spec)
    report = deep_well_audit(idx)
    stables = [uniform(2, 3, k) for k in (1, 2, 3)]
    for s in np.random.default_rng(3).choice(idx.n_states, size=25, replace=False):
        if s in idx.stable_states():
            continue
        g = idx.decode(int(s)).grid().tolist()
        assert report.slack[s] == bottleneck(2, 3, 3, "open", g, stables) - idx.energies[s]


def test_gibbs(open23):
    assert np.allclose(gibbs(open23, 0.0), 1 / 64, atol=1e-15)
    mu = gibbs(open23, 20.0)
    assert mu[open23.stable_states()].sum() >= 1 - 1e-6
    for beta in (0.0, 0.5, 3.0, 20.0):
        assert abs(gibbs(open23, beta).sum() - 1) < 1e-12


def test_transition_matrix(open23):
    for beta in (0.0, 1.0, 4.0):
        P = transition_matrix(open23, beta)
        assert np.all(P >= 0)
        assert np.allclose(P.sum(axis=1), 1, atol=1e-12)
        mu = gibbs(open23, beta)
        flow = mu[:, None] * P
        assert np.allclose(flow, flow.T, rtol=1e-12, atol=0)
    P0 = transition_matrix(open23, 0.0)
    s1 = open23.stable_states()[0]
    assert P0[s1, s1] == pytest.approx(0.5, abs=1e-15)


def test_transition_matrix_against_row_oracle(open23):
    P = transition_matrix(open23, 1.3)
    for s in (0, 5, 17, 42, 63):
        sigma = open23.decode(s)
        row, hold = kernel_row(sigma.grid().tolist(), 2, 3, 2, "open", 1.3)
        assert P[s, s] == pytest.approx(hold, abs=1e-14)
        for (c, r, k), p in row.items():
            new = sigma.copy()
            new.spins[OPEN23.index((c, r))] = k
            assert P[s, open23.encode(new)] == pytest.approx(p, abs=1e-14)


def test_spectrum(open23):
    w = spectrum(open23, 2.0)
    assert abs(w[0] - 1) < 1e-10
    assert np.all(np.diff(w) <= 1e-15)
    S = symmetrized_kernel(open23, 2.0)
    assert np.allclose(S, S.T)


def test_gap_at_zero_matches_dense_eigensolve(open23):
    P = transition_matrix(open23, 0.0)
    lam = np.sort(np.linalg.eigvals(P).real)[::-1]
    assert spectral_gap(open23, 0.0) > 0
    assert spectral_gap(open23, 0.0) == pytest.approx(1 - lam[1], abs=1e-10)
    # lazy uniform chain on the hypercube: gap is 1/|V| = 1/6
    assert spectral_gap(open23, 0.0) == pytest.approx(1 / 6, abs=1e-12)


def test_gap_monotone_and_exponent(open23):
    gaps = [spectral_gap(open23, b) for b in (0, 1, 2, 3, 4)]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    for beta in (3.0, 3.5, 4.0, 4.5):
        slope = -(np.log(spectral_gap(open23, beta + 0.5)) - np.log(spectral_gap(open23, beta))) / 0.5
        assert abs(slope - 3) <= 0.3


def test_resolution_refusal(open23):
    with pytest.raises(NumericalError):
        spectral_gap(open23, 10.0)
    with pytest.raises(NumericalError):
        mixing_time(open23, 10.0, 0.25)


def test_dense_cap():
    idx = LandscapeIndex(GridSpec(3, 4, "open"))
    with pytest.raises(CapacityError):
        transition_matrix(idx, 1.0)


def test_mixing_time_brute_force(open23):
    beta, eps = 1.0, 0.25
    P = transition_matrix(open23, beta)
    mu = gibbs(open23, beta)
    M, n = P.copy(), 1
    while 0.5 * np.abs(M - mu).sum(axis=1).max() > eps:
        M, n = M @ P, n + 1
    assert mixing_time(open23, beta, eps) == n


def test_mixing_time_properties(open23):
    assert mixing_time(open23, 0.0, 0.999) == 1
    ts = [mixing_time(open23, 2.0, e) for e in (0.05, 0.1, 0.25, 0.5)]
    assert ts == sorted(ts, reverse=True)
    trend = [np.log(mixing_time(open23, b, 0.25)) / b for b in (2.0, 3.0, 4.0)]
    assert abs(trend[-1] - 3) <= 0.15 * 3
    assert abs(trend[-1] - 3) < abs(trend[0] - 3)
    with pytest.raises(CapacityError) as info:
        mixing_time(open23, 4.0, 0.25, max_doublings=3)
    assert info.value.lower_bound == 8


def test_expected_hitting_time_small_chain():
    idx = LandscapeIndex(GridSpec(2, 2, "open"))
    # from any state at beta = 0 the hitting time of a fixed other state is finite and positive
    h = expected_hitting_time(idx, 0.0, 0, [15])
    assert h > 1
    P = transition_matrix(idx, 0.0)
    # one-step analysis: h(0) = 1 + sum_j P(0, j) h(j)
    hs = np.array([0.0 if s == 15 else expected_hitting_time(idx, 0.0, s, [15]) for s in range(16)])
    assert hs[0] == pytest.approx(1 + P[0] @ hs, rel=1e-12)
