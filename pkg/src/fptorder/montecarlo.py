"""Event-driven and Brownian-dynamics Monte Carlo oracles.

The jump models are simulated exactly (exponential inter-arrival times, no
time step); the single-file pair uses Euler-Maruyama steps of variance 2*dt
per the unit-diffusion convention, folding at the reflecting wall and
re-ordering the pair to realize the hard-core constraint (a label exchange,
exact in law for identical particles).

Reproducibility: every realization (jump models) or fixed-size block of
realizations (diffusion) draws from its own stream derived from
``SeedSequence(seed, spawn_key=...)``, so results depend only on (seed,
n_realizations, grid) and never on chunking or the worker count.  The worker
pool size is capped by the ``FPT_ORDER_THREADS`` environment variable.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bipoisson import BiPoissonParams
from .curves import TimeGrid
from .trivpoisson import TriPoissonParams

__all__ = [
    "McConfig",
    "EmpiricalCurve",
    "simulate_bipoisson",
    "simulate_trivariate",
    "simulate_singlefile",
    "simulate_single_particle",
]

_DIFFUSION_BLOCK = 16384
_JUMP_CHUNK = 1024


@dataclass(frozen=True)
class McConfig:
    """Simulation budget: realization count, seed, horizon, output grid, and
    (for diffusion only) the Euler time step."""

    n_realizations: int
    seed: int
    horizon: float
    grid: TimeGrid
    dt: float | None = None

    def __post_init__(self):
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if not self.horizon > 0.0:
            raise ValueError("horizon must be positive")
        if self.grid.points[-1] > self.horizon + 1e-12:
            raise ValueError("grid must lie within [0, horizon]")
        if self.dt is not None and not self.dt > 0.0:
            raise ValueError("dt must be positive when given")

    def require_diffusion_step(self) -> float:
        if self.dt is None:
            raise ValueError("diffusion runs need an explicit dt")
        if self.dt > 1e-3 * self.horizon:
            raise ValueError(
                f"dt = {self.dt} too coarse for horizon {self.horizon} "
                "(need dt <= 1e-3 * horizon)"
            )
        return self.dt


@dataclass(frozen=True)
class EmpiricalCurve:
    """Empirical survival estimate with binomial standard errors."""

    times: TimeGrid
    estimate: tuple[float, ...]
    std_err: tuple[float, ...]

    def __post_init__(self):
        if not (len(self.times) == len(self.estimate) == len(self.std_err)):
            raise ValueError("times/estimate/std_err length mismatch")
        for p, s in zip(self.estimate, self.std_err):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"estimate outside [0, 1]: {p}")
            if s < 0.0:
                raise ValueError(f"negative standard error: {s}")
        for a, b in zip(self.estimate, self.estimate[1:]):
            if b > a:
                raise ValueError("empirical survival must be non-increasing")

    @classmethod
    def from_kill_times(cls, grid: TimeGrid, kill_times: np.ndarray) -> "EmpiricalCurve":
        """Average the per-realization indicators 1{t < tau} over the grid.

        Each indicator is non-increasing in t, so the average is too.
        """
        tau = np.asarray(kill_times, dtype=float)
        n = tau.size
        est = []
        err = []
        for t in grid:
            p = float(np.count_nonzero(tau > t)) / n
            est.append(p)
            err.append(math.sqrt(p * (1.0 - p) / n))
        return cls(grid, tuple(est), tuple(err))


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def _n_workers() -> int:
    raw = os.environ.get("FPT_ORDER_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map_chunks(worker, chunks: list):
    workers = _n_workers()
    if workers == 1 or len(chunks) == 1:
        return [worker(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, chunks))


def simulate_bipoisson(
    params: BiPoissonParams, cfg: McConfig
) -> tuple[EmpiricalCurve, EmpiricalCurve]:
    """Exact event-driven simulation of the correlated pair with barrier M.

    Returns the empirical survival of the first exit and of the last exit.
    While both live, events arrive at rate lambda1 + lambda2 + lambda12 and
    the shared kind increments both counters; after the first kill, the
    shared stream disappears and the survivor needs its remaining levels from
    its own stream alone (an Erlang draw).  No time discretization anywhere.
    """
    m = params.barrier_m
    total = params.total_rate

    def run_chunk(bounds: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = bounds
        first = np.empty(hi - lo)
        last = np.empty(hi - lo)
        for r in range(lo, hi):
            rng = _stream(cfg.seed, 0, r)
            t = 0.0
            x1 = x2 = 0
            while x1 < m and x2 < m:
                t += rng.exponential(1.0 / total)
                u = rng.random() * total
                if u < params.lambda1:
                    x1 += 1
                elif u < params.lambda1 + params.lambda2:
                    x2 += 1
                else:
                    x1 += 1
                    x2 += 1
            first[r - lo] = t
            if x1 >= m and x2 >= m:
                last[r - lo] = t
                continue
            surv_rate = params.lambda2 if x1 >= m else params.lambda1
            levels_left = m - (x2 if x1 >= m else x1)
            if surv_rate <= 0.0:
                last[r - lo] = np.inf
            else:
                last[r - lo] = t + rng.standard_gamma(levels_left) / surv_rate
        return first, last

    chunks = _chunk_ranges(cfg.n_realizations, _JUMP_CHUNK)
    parts = _map_chunks(run_chunk, chunks)
    tau_first = np.concatenate([p[0] for p in parts])
    tau_last = np.concatenate([p[1] for p in parts])
    return (
        EmpiricalCurve.from_kill_times(cfg.grid, tau_first),
        EmpiricalCurve.from_kill_times(cfg.grid, tau_last),
    )


def simulate_trivariate(
    params: TriPoissonParams, cfg: McConfig
) -> tuple[EmpiricalCurve, EmpiricalCurve, EmpiricalCurve]:
    """Exact simulation of the common-shock triple with barrier 1.

    Any stream event kills: a single stream kills its coordinate, a cross
    stream kills both of its coordinates at the same instant.  Streams whose
    index set touches a dead coordinate are switched off.  Returns the
    empirical survival curves of the first, second, and third kill times.
    """

    def run_chunk(bounds: tuple[int, int]) -> np.ndarray:
        lo, hi = bounds
        out = np.empty((hi - lo, 3))
        base_streams = (
            (params.single(1), (1,)),
            (params.single(2), (2,)),
            (params.single(3), (3,)),
            (params.pair(1, 2), (1, 2)),
            (params.pair(1, 3), (1, 3)),
            (params.pair(2, 3), (2, 3)),
        )
        for r in range(lo, hi):
            rng = _stream(cfg.seed, 1, r)
            alive = {1, 2, 3}
            t = 0.0
            kills: list[float] = []
            while alive:
                streams = [
                    (rate, hits)
                    for rate, hits in base_streams
                    if rate > 0.0 and all(h in alive for h in hits)
                ]
                total = sum(rate for rate, _ in streams)
                if total <= 0.0:
                    kills.extend(math.inf for _ in alive)
                    break
                t += rng.exponential(1.0 / total)
                u = rng.random() * total
                acc = 0.0
                for rate, hits in streams:
                    acc += rate
                    if u <= acc:
                        for h in hits:
                            alive.discard(h)
                            kills.append(t)
                        break
            out[r - lo] = sorted(kills)
        return out

    chunks = _chunk_ranges(cfg.n_realizations, _JUMP_CHUNK)
    taus = np.vstack(_map_chunks(run_chunk, chunks))
    return tuple(
        EmpiricalCurve.from_kill_times(cfg.grid, taus[:, c]) for c in range(3)
    )


def simulate_singlefile(cfg: McConfig) -> tuple[EmpiricalCurve, EmpiricalCurve]:
    """Brownian dynamics of the hard-core pair on [0, 1].

    Per step: x <- |x + sqrt(2 dt) N(0,1)| (fold reflects at 0), re-order the
    pair, kill when the rightmost reaches 1; the survivor then diffuses alone
    until it too reaches 1 or the horizon ends.  Returns the empirical
    survival of the rightmost (first) and leftmost (last) exits.  Kill times
    are recorded on the step grid, so curves carry the usual O(sqrt(dt))
    discretization bias on top of the binomial error.
    """
    dt = cfg.require_diffusion_step()
    n_steps = int(round(cfg.horizon / dt))
    sig = math.sqrt(2.0 * dt)

    def run_block(bounds: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = bounds
        b = hi - lo
        rng = _stream(cfg.seed, 2, lo // _DIFFUSION_BLOCK)
        u = rng.random((b, 2))
        pos_lo = np.minimum(u[:, 0], u[:, 1])
        pos_hi = np.maximum(u[:, 0], u[:, 1])
        tau_first = np.full(b, np.inf)
        tau_last = np.full(b, np.inf)
        pair_idx = np.arange(b)
        single_idx = np.empty(0, dtype=np.int64)
        single_pos = np.empty(0)
        for step in range(1, n_steps + 1):
            n_pair = pair_idx.size
            n_single = single_idx.size
            if n_pair == 0 and n_single == 0:
                break
            t = step * dt
            z = rng.standard_normal(2 * n_pair + n_single)
            if n_single:
                sp = np.abs(single_pos + sig * z[2 * n_pair:])
                dead = sp >= 1.0
                if dead.any():
                    tau_last[single_idx[dead]] = t
                    keep = ~dead
                    single_idx = single_idx[keep]
                    single_pos = sp[keep]
                else:
                    single_pos = sp
            if n_pair:
                a = np.abs(pos_lo + sig * z[:n_pair])
                bb = np.abs(pos_hi + sig * z[n_pair : 2 * n_pair])
                new_lo = np.minimum(a, bb)
                new_hi = np.maximum(a, bb)
                killed = new_hi >= 1.0
                if killed.any():
                    hit = pair_idx[killed]
                    tau_first[hit] = t
                    # the survivor is the leftmost particle; it starts
                    # stepping alone on the next iteration
                    single_idx = np.concatenate([single_idx, hit])
                    single_pos = np.concatenate([single_pos, new_lo[killed]])
                    keep = ~killed
                    pair_idx = pair_idx[keep]
                    pos_lo = new_lo[keep]
                    pos_hi = new_hi[keep]
                else:
                    pos_lo = new_lo
                    pos_hi = new_hi
        return tau_first, tau_last

    blocks = _chunk_ranges(cfg.n_realizations, _DIFFUSION_BLOCK)
    parts = _map_chunks(run_block, blocks)
    tau_first = np.concatenate([p[0] for p in parts])
    tau_last = np.concatenate([p[1] for p in parts])
    return (
        EmpiricalCurve.from_kill_times(cfg.grid, tau_first),
        EmpiricalCurve.from_kill_times(cfg.grid, tau_last),
    )


def simulate_single_particle(cfg: McConfig) -> EmpiricalCurve:
    """One particle, uniform start, same stepping scheme: the reduction used
    to validate the diffusion discretization against the survival series."""
    dt = cfg.require_diffusion_step()
    n_steps = int(round(cfg.horizon / dt))
    sig = math.sqrt(2.0 * dt)

    def run_block(bounds: tuple[int, int]) -> np.ndarray:
        lo, hi = bounds
        b = hi - lo
        rng = _stream(cfg.seed, 3, lo // _DIFFUSION_BLOCK)
        pos = rng.random(b)
        tau = np.full(b, np.inf)
        idx = np.arange(b)
        for step in range(1, n_steps + 1):
            if idx.size == 0:
                break
            pos = np.abs(pos + sig * rng.standard_normal(idx.size))
            dead = pos >= 1.0
            if dead.any():
                tau[idx[dead]] = step * dt
                keep = ~dead
                idx = idx[keep]
                pos = pos[keep]
        return tau

    blocks = _chunk_ranges(cfg.n_realizations, _DIFFUSION_BLOCK)
    tau = np.concatenate(_map_chunks(run_block, blocks))
    return EmpiricalCurve.from_kill_times(cfg.grid, tau)


def _chunk_ranges(n: int, size: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + size, n)) for lo in range(0, n, size)]
