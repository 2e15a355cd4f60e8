"""Exhaustive analysis of small instances.

States are encoded in mixed radix: ``state = sum_i (spin_i - 1) * q**i`` over
the column-major vertex index ``i``. Everything here is ground truth for the
constructive and stochastic modules, so it is kept deliberately plain:
energies are exact integers, communication energies come from a union-find
sweep over energy levels, and spectral quantities from dense linear algebra
on the reversible symmetrisation of the Metropolis kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import logsumexp

from .config import Configuration
from .errors import CapacityError, InputError, NumericalError
from .lattice import GridSpec, gamma

LANDSCAPE_CAP = 2**20
DENSE_CAP = 2**10
GAP_RESOLUTION = 1e-12


class LandscapeIndex:
    """Enumeration of all ``q**(K L)`` configurations of ``spec`` with their energies."""

    def __init__(self, spec: GridSpec, cap: int = LANDSCAPE_CAP):
        n = spec.q ** spec.n_vertices
        if n > cap:
            raise CapacityError(f"{spec} has {n} states, above the cap of {cap}")
        self.spec = spec
        self.n_states = n
        self.radix = spec.q ** np.arange(spec.n_vertices, dtype=np.int64)

        states = np.arange(n, dtype=np.int64)
        spins = (states[:, None] // self.radix[None, :]) % spec.q + 1
        self.spins = spins.astype(np.int8)
        e = spec.edge_array
        gap = np.count_nonzero(self.spins[:, e[:, 0]] != self.spins[:, e[:, 1]], axis=1)
        self.energies = (gap - spec.n_edges).astype(np.int64)
        for arr in (self.spins, self.energies):
            arr.setflags(write=False)

    # -- encoding -------------------------------------------------------
    def encode(self, sigma: Configuration) -> int:
        if sigma.spec != self.spec:
            raise InputError("configuration belongs to a different grid")
        return int(((sigma.spins.astype(np.int64) - 1) * self.radix).sum())

    def decode(self, state: int) -> Configuration:
        self._check(state)
        return Configuration(self.spec, self.spins[state])

    def stable_states(self) -> list[int]:
        """States ``s_1..s_q`` in spin order."""
        ones = int(self.radix.sum())
        return [(k - 1) * ones for k in range(1, self.spec.q + 1)]

    def _check(self, state) -> int:
        if not 0 <= state < self.n_states:
            raise InputError(f"state {state} out of range 0..{self.n_states - 1}")
        return int(state)

    # -- move graph -----------------------------------------------------
    @cached_property
    def moves(self) -> np.ndarray:
        """``(n_states, KL*(q-1))`` array: every single-spin update of every state."""
        q = self.spec.q
        digits = self.spins.astype(np.int64) - 1
        cols = []
        for i, r in enumerate(self.radix):
            for shift in range(1, q):
                new_digit = (digits[:, i] + shift) % q
                cols.append(np.arange(self.n_states) + (new_digit - digits[:, i]) * r)
        out = np.stack(cols, axis=1)
        out.setflags(write=False)
        return out


# -- minimax ------------------------------------------------------------
class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x


def _phi_to_set(idx: LandscapeIndex, targets) -> np.ndarray:
    """``Phi(sigma, targets)`` for every state via a threshold sweep.

    States are activated in order of increasing energy; each activation
    unions the state with its already-active neighbours. A component's
    members receive the current level as their communication energy the
    moment the component first contains a target.
    """
    targets = {idx._check(t) for t in targets}
    if not targets:
        raise InputError("target set must be nonempty")
    n = idx.n_states
    energies = idx.energies
    moves = idx.moves
    order = np.argsort(energies, kind="stable")
    phi = np.full(n, np.iinfo(np.int64).max, dtype=np.int64)
    uf = _UnionFind(n)
    active = np.zeros(n, dtype=bool)
    members: dict[int, list[int]] = {}
    has_target: dict[int, bool] = {}

    for s in order.tolist():
        level = int(energies[s])
        active[s] = True
        members[s] = [s]
        has_target[s] = s in targets
        if has_target[s]:
            phi[s] = level
        for t in moves[s].tolist():
            if not active[t]:
                continue
            a, b = uf.find(s), uf.find(t)
            if a == b:
                continue
            if len(members[a]) < len(members[b]):
                a, b = b, a
            if has_target[a] != has_target[b]:
                loser = b if has_target[a] else a
                for m in members[loser]:
                    phi[m] = level
            uf.parent[b] = a
            members[a].extend(members.pop(b))
            has_target[a] = has_target[a] or has_target.pop(b)
    return phi


def communication_energy(idx: LandscapeIndex, a: int, b: int) -> int:
    """Minimax energy over all single-spin-update paths from ``a`` to ``b``."""
    a, b = idx._check(a), idx._check(b)
    if a == b:
        raise InputError("communication_energy needs two distinct states")
    return int(_phi_to_set(idx, [b])[a])


def communication_energy_to_set(idx: LandscapeIndex, a: int, B) -> int:
    a = idx._check(a)
    B = list(B)
    if not B:
        raise InputError("target set must be nonempty")
    if a in B:
        raise InputError("start state lies in the target set")
    return int(_phi_to_set(idx, B)[a])


def phi_stable_pairs(idx: LandscapeIndex) -> dict[tuple[int, int], int]:
    """``Phi(s_k, s_l) - H(s_k)`` for every ordered pair ``k != l`` (spin labels)."""
    stable = idx.stable_states()
    out = {}
    for l, b in enumerate(stable, start=1):
        phi = _phi_to_set(idx, [b])
        for k, a in enumerate(stable, start=1):
            if k != l:
                out[(k, l)] = int(phi[a] - idx.energies[a])
    return out


@dataclass
class DeepWellReport:
    spec: GridSpec
    gamma: int
    max_slack: int
    argmax_states: list[int]
    slack: np.ndarray = field(repr=False)

    @property
    def passed(self) -> bool:
        return self.max_slack < self.gamma


def deep_well_audit(idx: LandscapeIndex) -> DeepWellReport:
    """Largest ``Phi(sigma, S) - H(sigma)`` over non-stable ``sigma``."""
    stable = idx.stable_states()
    slack = _phi_to_set(idx, stable) - idx.energies
    mask = np.ones(idx.n_states, dtype=bool)
    mask[stable] = False
    worst = int(slack[mask].max())
    argmax = np.flatnonzero(mask & (slack == worst)).tolist()
    return DeepWellReport(idx.spec, gamma(idx.spec, warn=False), worst, argmax, slack)


# -- Gibbs measure and kernel -------------------------------------------
def gibbs(idx: LandscapeIndex, beta: float) -> np.ndarray:
    if beta < 0:
        raise InputError("beta must be nonnegative")
    logw = -beta * idx.energies.astype(float)
    return np.exp(logw - logsumexp(logw))


def _check_dense(idx: LandscapeIndex, cap: int):
    if idx.n_states > cap:
        raise CapacityError(f"{idx.n_states} states exceed the dense-matrix cap of {cap}")


def transition_matrix(idx: LandscapeIndex, beta: float, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense Metropolis kernel with uniform ``(v, k)`` proposals."""
    if beta < 0:
        raise InputError("beta must be nonnegative")
    _check_dense(idx, cap)
    n = idx.n_states
    moves = idx.moves
    rate = 1.0 / (idx.spec.q * idx.spec.n_vertices)
    dH = idx.energies[moves] - idx.energies[:, None]
    probs = rate * np.exp(-beta * np.maximum(dH, 0))
    P = np.zeros((n, n))
    rows = np.repeat(np.arange(n), moves.shape[1])
    np.add.at(P, (rows, moves.ravel()), probs.ravel())
    P[np.arange(n), np.arange(n)] = 1.0 - probs.sum(axis=1)
    return P


def _check_resolution(idx: LandscapeIndex, beta: float):
    g = gamma(idx.spec, warn=False)
    if math.exp(-beta * g) < GAP_RESOLUTION:
        raise NumericalError(
            f"beta={beta}: exp(-beta*Gamma) = {math.exp(-beta * g):.3g} is below "
            f"{GAP_RESOLUTION:g}; the gap is not resolvable in double precision"
        )


def symmetrized_kernel(idx: LandscapeIndex, beta: float, cap: int = DENSE_CAP) -> np.ndarray:
    """``D^{1/2} P D^{-1/2}`` with ``D = diag(gibbs)``; symmetric by detailed balance."""
    P = transition_matrix(idx, beta, cap)
    root = np.sqrt(gibbs(idx, beta))
    S = root[:, None] * P / root[None, :]
    return 0.5 * (S + S.T)


def spectrum(idx: LandscapeIndex, beta: float, cap: int = DENSE_CAP) -> np.ndarray:
    """Eigenvalues of the kernel in decreasing order."""
    S = symmetrized_kernel(idx, beta, cap)
    try:
        w = np.linalg.eigvalsh(S)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"eigensolver failed at beta={beta}; condition estimate {np.linalg.cond(S):.3g}"
        ) from exc
    return w[::-1]


def spectral_gap(idx: LandscapeIndex, beta: float, cap: int = DENSE_CAP) -> float:
    """``1 - lambda_2`` of the Metropolis kernel."""
    _check_resolution(idx, beta)
    w = spectrum(idx, beta, cap)
    return float(1.0 - w[1])


# -- mixing time --------------------------------------------------------
def tv_distance(p: np.ndarray, r: np.ndarray) -> float:
    return 0.5 * float(np.abs(p - r).sum())


def _worst_tv(M: np.ndarray, mu: np.ndarray) -> float:
    return 0.5 * float(np.abs(M - mu[None, :]).sum(axis=1).max())


def mixing_time(
    idx: LandscapeIndex,
    beta: float,
    eps: float,
    cap: int = DENSE_CAP,
    max_doublings: int = 48,
) -> int:
    """Smallest ``n >= 1`` with ``max_x TV(P^n(x, .), mu) <= eps``.

    Repeated squaring brackets ``n`` between consecutive powers of two, then
    a binary search inside the bracket assembles ``P^n`` from the stored
    powers. Raises :class:`CapacityError` carrying a lower bound if ``n``
    exceeds ``2**max_doublings``.
    """
    if not 0 < eps < 1:
        raise InputError("eps must lie in (0, 1)")
    _check_resolution(idx, beta)
    P = transition_matrix(idx, beta, cap)
    mu = gibbs(idx, beta)
    powers = [P]  # powers[j] = P^(2^j)
    if _worst_tv(P, mu) <= eps:
        return 1
    while _worst_tv(powers[-1], mu) > eps:
        if len(powers) > max_doublings:
            raise CapacityError(
                f"t_mix exceeds 2^{max_doublings}", lower_bound=2 ** max_doublings
            )
        powers.append(powers[-1] @ powers[-1])
    # d(2^(J-1)) > eps >= d(2^J); binary search n in (2^(J-1), 2^J]
    J = len(powers) - 1
    lo, lo_mat = 2 ** (J - 1), powers[J - 1]
    for j in range(J - 2, -1, -1):
        cand = lo_mat @ powers[j]
        if _worst_tv(cand, mu) > eps:
            lo, lo_mat = lo + 2**j, cand
    return lo + 1


def expected_hitting_time(idx: LandscapeIndex, beta: float, start: int, targets, cap: int = DENSE_CAP) -> float:
    """Exact ``E tau`` from ``start`` (not in ``targets``) by solving ``(I - P_AA) h = 1``."""
    start = idx._check(start)
    targets = {idx._check(t) for t in targets}
    if not targets:
        raise InputError("target set must be nonempty")
    if start in targets:
        raise InputError("start state lies in the target set")
    P = transition_matrix(idx, beta, cap)
    keep = np.array([s for s in range(idx.n_states) if s not in targets])
    A = np.eye(len(keep)) - P[np.ix_(keep, keep)]
    h = np.linalg.solve(A, np.ones(len(keep)))
    return float(h[np.searchsorted(keep, start)])
