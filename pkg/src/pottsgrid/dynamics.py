"""Metropolis dynamics, first hitting times, and a rejection-free accelerator.

One unit of time is one attempted update: a vertex ``v`` and a spin ``k``
drawn uniformly (``k`` may equal the current spin, which is a void step).
The rejection-free method samples the geometric number of steps spent in a
state and then the jump, so both methods report hitting times in the same
unit and with the same law.

Randomness comes from counter-based Philox streams; sample ``i`` of a batch
uses the stream derived from ``(seed, i)``, so results do not depend on how
samples are scheduled across workers. The inner loops are numba kernels
that consume pre-drawn blocks of uniforms.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .config import Configuration, energy
from .errors import InputError, StuckStateError
from .lattice import GridSpec

DEFAULT_MAX_STEPS = 10**10
DIRECT = "direct"
REJECTION_FREE = "rejection_free"
METHODS = (DIRECT, REJECTION_FREE)
SAMPLE_FIELDS = ("steps", "exit_spin", "method", "seed", "stream", "censored", "renewals")


@dataclass(frozen=True)
class ChainParams:
    beta: float
    spec: GridSpec
    seed: int = 0
    max_steps: int | None = DEFAULT_MAX_STEPS

    def __post_init__(self):
        if not self.beta >= 0:
            raise InputError(f"beta must be nonnegative, got {self.beta}")
        if self.max_steps is not None and self.max_steps < 1:
            raise InputError("max_steps must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise InputError("seed must be a 64-bit unsigned integer")


@dataclass
class HittingSample:
    """One first-hitting event.

    ``renewals`` counts stable configurations visited before the hit,
    starting with the initial one and counting a visit only when it differs
    from the previously visited stable configuration; it is 1 when the first
    stable configuration reached after the start is already in the target.
    """

    steps: int
    exit: Configuration
    seed: int
    stream: int
    method: str
    censored: bool = False
    renewals: int = 1

    @property
    def exit_spin(self) -> int | None:
        s = self.exit.spins
        return int(s[0]) if np.all(s == s[0]) else None

    def record(self) -> dict:
        return {
            "steps": int(self.steps),
            "exit_spin": self.exit_spin,
            "method": self.method,
            "seed": int(self.seed),
            "stream": int(self.stream),
            "censored": bool(self.censored),
            "renewals": int(self.renewals),
        }


def stream_rng(seed: int, stream: int) -> np.random.Generator:
    """Independent Philox generator for ``(seed, stream)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(stream,))))


def acceptance_table(beta: float) -> np.ndarray:
    """``acc[d] = min(1, exp(-beta d))`` for energy increments ``d = 0..4``."""
    return np.exp(-beta * np.arange(5, dtype=np.float64))


# -- single steps (numpy) -----------------------------------------------
def _deltas(spec: GridSpec, spins: np.ndarray, v: np.ndarray, k: np.ndarray) -> np.ndarray:
    nbr = spec.neighbor_table[v]
    valid = nbr >= 0
    nspins = np.where(valid, spins[np.where(valid, nbr, 0)], 0)
    old = spins[v][:, None]
    d = ((nspins == old) & valid).sum(axis=1) - ((nspins == k[:, None]) & valid).sum(axis=1)
    return np.where(k == spins[v], 0, d)


def metropolis_step(sigma: Configuration, beta: float, rng: np.random.Generator) -> Configuration:
    """One attempted update; returns ``sigma`` itself when the move is void or rejected."""
    spec = sigma.spec
    v = rng.integers(0, spec.n_vertices, size=1)
    k = rng.integers(1, spec.q + 1, size=1)
    u = rng.random(1)
    d = int(_deltas(spec, sigma.spins, v, k)[0])
    if k[0] == sigma.spins[v[0]] or not (d <= 0 or u[0] < math.exp(-beta * d)):
        return sigma
    new = Configuration(spec, sigma.spins)
    new.spins[v[0]] = k[0]
    if sigma._energy is not None:
        new._energy = sigma._energy + d
    return new


def sample_transitions(sigma: Configuration, beta: float, n: int, rng: np.random.Generator):
    """Outcomes of ``n`` independent single steps from ``sigma``.

    Returns ``(counts, hold)``: ``counts[v, k-1]`` is how often the chain
    moved to ``sigma^{v,k}`` and ``hold`` how often it stayed put.
    """
    spec = sigma.spec
    v = rng.integers(0, spec.n_vertices, size=n)
    k = rng.integers(1, spec.q + 1, size=n)
    u = rng.random(n)
    d = _deltas(spec, sigma.spins, v, k)
    moved = (k != sigma.spins[v]) & ((d <= 0) | (u < np.exp(-beta * np.maximum(d, 0))))
    counts = np.zeros((spec.n_vertices, spec.q), dtype=np.int64)
    np.add.at(counts, (v[moved], k[moved] - 1), 1)
    return counts, int(n - moved.sum())


def escape_moves(sigma: Configuration, beta: float) -> np.ndarray:
    """``P(sigma, sigma^{v,k})`` as a ``(KL, q)`` array (zero where ``k`` is current)."""
    spec = sigma.spec
    v = np.repeat(np.arange(spec.n_vertices), spec.q)
    k = np.tile(np.arange(1, spec.q + 1), spec.n_vertices)
    d = _deltas(spec, sigma.spins, v, k)
    p = np.exp(-beta * np.maximum(d, 0)) / (spec.q * spec.n_vertices)
    p[k == sigma.spins[v]] = 0.0
    return p.reshape(spec.n_vertices, spec.q)


# -- numba kernels ------------------------------------------------------
# state vector layout
_STEPS, _ENERGY, _IN_TARGET, _LAST_STABLE, _RENEWALS = range(5)
_RUNNING, _HIT, _CENSORED, _STUCK = 0, 1, 2, 3


@njit(cache=True)
def _in_targets(spins, e, targets, target_energy):
    for t in range(targets.shape[0]):
        if target_energy[t] != e:
            continue
        same = True
        for i in range(spins.shape[0]):
            if spins[i] != targets[t, i]:
                same = False
                break
        if same:
            return 1
    return 0


@njit(cache=True)
def _after_move(spins, st, targets, target_energy, ground):
    st[_IN_TARGET] = _in_targets(spins, st[_ENERGY], targets, target_energy)
    if st[_IN_TARGET] == 0 and st[_ENERGY] == ground and spins[0] != st[_LAST_STABLE]:
        st[_LAST_STABLE] = spins[0]
        st[_RENEWALS] += 1


@njit(cache=True)
def _direct_block(spins, nbr, acc, v_blk, k_blk, u_blk, targets, target_energy, ground, max_steps, st):
    for b in range(v_blk.shape[0]):
        st[_STEPS] += 1
        v = v_blk[b]
        k = k_blk[b]
        old = spins[v]
        if k != old:
            d = 0
            for j in range(nbr.shape[1]):
                w = nbr[v, j]
                if w < 0:
                    continue
                s = spins[w]
                if s == old:
                    d += 1
                elif s == k:
                    d -= 1
            if d <= 0 or u_blk[b] < acc[d]:
                spins[v] = k
                st[_ENERGY] += d
                _after_move(spins, st, targets, target_energy, ground)
        if st[_IN_TARGET] == 1:
            return _HIT
        if st[_STEPS] >= max_steps:
            return _CENSORED
    return _RUNNING


@njit(cache=True)
def _rf_block(spins, nbr, acc, q, u_hold, u_jump, targets, target_energy, ground, max_steps, st):
    n = spins.shape[0]
    rates = np.empty(n * q)
    deltas = np.empty(n * q, dtype=np.int64)
    for b in range(u_hold.shape[0]):
        total = 0.0
        for v in range(n):
            old = spins[v]
            for kk in range(q):
                k = kk + 1
                m = v * q + kk
                if k == old:
                    rates[m] = 0.0
                    deltas[m] = 0
                    continue
                d = 0
                for j in range(nbr.shape[1]):
                    w = nbr[v, j]
                    if w < 0:
                        continue
                    s = spins[w]
                    if s == old:
                        d += 1
                    elif s == k:
                        d -= 1
                deltas[m] = d
                rates[m] = 1.0 if d <= 0 else acc[d]
                total += rates[m]
        p = total / (n * q)
        if not p > 0.0:
            return _STUCK
        hold = np.int64(1)
        if p < 1.0:
            x = math.ceil(math.log(u_hold[b]) / math.log1p(-p))
            if x > 9.0e18:
                hold = np.int64(max_steps + 1)
            elif x > 1.0:
                hold = np.int64(x)
        if st[_IN_TARGET] == 1 and hold >= 2:
            st[_STEPS] += 1
            return _HIT
        if st[_STEPS] + hold > max_steps:
            st[_STEPS] = max_steps
            return _CENSORED
        st[_STEPS] += hold
        r = u_jump[b] * total
        m = 0
        acc_sum = rates[0]
        while acc_sum <= r and m < n * q - 1:
            m += 1
            acc_sum += rates[m]
        while rates[m] == 0.0:
            m -= 1
        v = m // q
        spins[v] = m % q + 1
        st[_ENERGY] += deltas[m]
        _after_move(spins, st, targets, target_energy, ground)
        if st[_IN_TARGET] == 1:
            return _HIT
    return _RUNNING


# -- hitting times ------------------------------------------------------
def _target_arrays(spec: GridSpec, target) -> tuple[np.ndarray, np.ndarray]:
    configs = list(target)
    if not configs:
        raise InputError("target set must be nonempty")
    for c in configs:
        if c.spec != spec:
            raise InputError("target configuration lives on a different grid")
    arr = np.stack([c.spins for c in configs]).astype(np.int8)
    energies = np.array([energy(c) for c in configs], dtype=np.int64)
    return arr, energies


def _initial_state(sigma0: Configuration, targets, target_energy) -> np.ndarray:
    e = energy(sigma0)
    in_t = _in_targets(sigma0.spins, e, targets, target_energy)
    stable = np.all(sigma0.spins == sigma0.spins[0])
    return np.array([0, e, in_t, int(sigma0.spins[0]) if stable else 0, 1], dtype=np.int64)


def _block_sizes():
    size = 1024
    while True:
        yield size
        size = min(size * 2, 1 << 16)


def _run(sigma0, targets, target_energy, params: ChainParams, stream: int, method: str) -> HittingSample:
    spec = params.spec
    if sigma0.spec != spec:
        raise InputError("initial configuration lives on a different grid")
    if method not in METHODS:
        raise InputError(f"method must be one of {METHODS}")
    rng = stream_rng(params.seed, stream)
    spins = sigma0.spins.copy()
    nbr = np.ascontiguousarray(spec.neighbor_table)
    acc = acceptance_table(params.beta)
    ground = -spec.n_edges
    max_steps = params.max_steps if params.max_steps is not None else np.iinfo(np.int64).max - 1
    st = _initial_state(sigma0, targets, target_energy)
    status = _RUNNING
    for size in _block_sizes():
        if method == DIRECT:
            v = rng.integers(0, spec.n_vertices, size=size)
            k = rng.integers(1, spec.q + 1, size=size).astype(np.int8)
            u = rng.random(size)
            status = _direct_block(spins, nbr, acc, v, k, u, targets, target_energy, ground, max_steps, st)
        else:
            u_hold = 1.0 - rng.random(size)
            u_jump = rng.random(size)
            status = _rf_block(
                spins, nbr, acc, spec.q, u_hold, u_jump, targets, target_energy, ground, max_steps, st
            )
        if status == _STUCK:
            raise StuckStateError(
                f"escape probability underflowed to 0 at beta={params.beta} "
                f"(energy {st[_ENERGY]}, step {st[_STEPS]}); lower beta or use the direct method"
            )
        if status != _RUNNING:
            break
    return HittingSample(
        steps=int(st[_STEPS]),
        exit=Configuration(spec, spins),
        seed=params.seed,
        stream=stream,
        method=method,
        censored=status == _CENSORED,
        renewals=int(st[_RENEWALS]),
    )


def hit(sigma0: Configuration, target, params: ChainParams, stream: int = 0, method: str = DIRECT) -> HittingSample:
    """First time ``t > 0`` the chain started at ``sigma0`` is in ``target``.

    Starting inside the target does not count as a hit at time 0. A run
    reaching ``params.max_steps`` returns a sample flagged ``censored``.
    """
    targets, target_energy = _target_arrays(params.spec, target)
    return _run(sigma0, targets, target_energy, params, stream, method)


def hit_rejection_free(sigma0: Configuration, target, params: ChainParams, stream: int = 0) -> HittingSample:
    """Same law as :func:`hit`, skipping rejected proposals in bulk."""
    return hit(sigma0, target, params, stream, REJECTION_FREE)


def _batch_worker(args):
    sigma0, targets, target_energy, params, streams, method = args
    return [_run(sigma0, targets, target_energy, params, s, method) for s in streams]


def default_workers() -> int:
    return int(os.environ.get("POTTSGRID_WORKERS", "1"))


def batch_hits(
    sigma0: Configuration,
    target,
    params: ChainParams,
    n: int,
    workers: int | None = None,
    method: str = REJECTION_FREE,
) -> list[HittingSample]:
    """``n`` independent samples; sample ``i`` uses stream ``i`` whatever the worker count."""
    if n < 1:
        raise InputError("n must be >= 1")
    workers = default_workers() if workers is None else workers
    if workers < 1:
        raise InputError("workers must be >= 1")
    targets, target_energy = _target_arrays(params.spec, target)
    if workers == 1 or n == 1:
        return [_run(sigma0, targets, target_energy, params, i, method) for i in range(n)]
    chunks = [list(range(n))[w::workers] for w in range(workers)]
    jobs = [(sigma0, targets, target_energy, params, c, method) for c in chunks if c]
    out: list[HittingSample | None] = [None] * n
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for chunk, samples in zip((c for c in chunks if c), pool.map(_batch_worker, jobs)):
            for i, s in zip(chunk, samples):
                out[i] = s
    return out


# -- export -------------------------------------------------------------
def to_jsonl(samples) -> str:
    return "".join(json.dumps(s.record()) + "\n" for s in samples)


def to_csv(samples) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SAMPLE_FIELDS, lineterminator="\n")
    writer.writeheader()
    for s in samples:
        rec = s.record()
        rec["exit_spin"] = "" if rec["exit_spin"] is None else rec["exit_spin"]
        writer.writerow(rec)
    return buf.getvalue()
