"""Seeded simulation of the same chains as :mod:`tban.exact_markov`, at any size.

Random numbers come from numpy's PCG64 (period 2**128). Each run consumes one
stream, drawn in row-major blocks of ``(sweeps, n)`` uniforms (synchronous)
or ``(sweeps, 2n)`` uniforms (asynchronous: site ``floor(u * n)``, then the
acceptance draw). Block size does not change the sequence consumed, so the
output depends only on the plan.

Seed derivation for multi-run experiments::

    derive_seed(master, index) =
        SeedSequence(master, spawn_key=(index,)).generate_state(1, uint64)[0]

``boundary_influence_mc`` uses index ``beta`` (0 or 1); ``sweep`` uses index
``2 * value_index + beta``.
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np
from numba import njit

from .dynamics import PotentialSet, probability_table
from .errors import ConfigurationError
from .exact_markov import MODES
from .lattice import NetworkTopology
from .projectivity import MASK_TO_COLUMN, phase_transition_report

DEFAULT_BATCHES = 20
_BLOCK_DRAWS = 1 << 20

SWEEP_PARAMS = ("T", "w0", "w1", "w2", "w3", "w4")
CSV_HEADER = ("param_name", "param_value", "boundary", "mean", "stderr", "n_samples", "seed",
              "alt_sum", "symmetry_residual", "det")


def derive_seed(master: int, index: int) -> int:
    ss = np.random.SeedSequence(int(master), spawn_key=(int(index),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class SimulationPlan:
    topology: NetworkTopology
    potentials: PotentialSet
    beta: int = 0
    mode: str = "synchronous"
    burn_in: int = 1000
    samples: int = 100_000
    thinning: int = 1
    seed: int = 0
    batches: int = DEFAULT_BATCHES

    def __post_init__(self):
        if self.beta not in (0, 1):
            raise ConfigurationError(f"boundary value must be 0 or 1, got {self.beta!r}")
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {self.mode!r}")
        for name in ("burn_in", "samples", "thinning", "batches", "seed"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 0:
                raise ConfigurationError(f"{name} must be a non-negative integer, got {v!r}")
        if self.thinning < 1:
            raise ConfigurationError("thinning must be >= 1")
        if self.batches < 2:
            raise ConfigurationError("need at least 2 batches for an error bar")
        if self.samples < 10 * self.batches:
            raise ConfigurationError(
                f"samples ({self.samples}) must be at least 10 x batches ({self.batches})"
            )
        if self.seed >= 1 << 64:
            raise ConfigurationError("seed must fit in 64 bits")

    @property
    def total_sweeps(self) -> int:
        return self.burn_in + self.samples * self.thinning


@dataclass
class Estimate:
    mean: float
    stderr: float
    n_samples: int
    batches: int

    def to_dict(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "n_samples": self.n_samples, "batches": self.batches}


@dataclass
class SimulationResult:
    estimate: Estimate
    neighbourhood_counts: np.ndarray  # samples per centre-neighbourhood cylinder, by column index
    centre_active_counts: np.ndarray  # of those, samples with the centre active at the same sweep
    plan: SimulationPlan = field(repr=False)

    @property
    def neighbourhood_frequencies(self) -> np.ndarray:
        return self.neighbourhood_counts / self.neighbourhood_counts.sum()

    def to_dict(self) -> dict:
        return {
            **self.estimate.to_dict(),
            "seed": self.plan.seed,
            "boundary": self.plan.beta,
            "mode": self.plan.mode,
            "neighbourhood_frequencies": [float(f) for f in self.neighbourhood_frequencies],
            "centre_active_counts": [int(c) for c in self.centre_active_counts],
        }


def batch_means(samples: np.ndarray, batches: int) -> Estimate:
    """Mean with a batch-means standard error over contiguous equal batches."""
    samples = np.asarray(samples, dtype=float)
    means = np.array([b.mean() for b in np.array_split(samples, batches)])
    stderr = float(means.std(ddof=1) / np.sqrt(batches))
    return Estimate(float(samples.mean()), stderr, len(samples), batches)


@njit(cache=True, nogil=True)
def _advance(state, scratch, nbr, beta, ptable, synchronous, draws, sweep0, burn_in, thinning,
             centre, mask_to_col, out, counts, active, pos):
    n = state.shape[0]
    for t in range(draws.shape[0]):
        if synchronous:
            for i in range(n):
                m = 0
                for s in range(4):
                    j = nbr[i, s]
                    m += state[j] if j >= 0 else beta
                scratch[i] = 1 if draws[t, i] < ptable[m] else 0
            for i in range(n):
                state[i] = scratch[i]
        else:
            for step in range(n):
                i = int(draws[t, 2 * step] * n)
                if i >= n:
                    i = n - 1
                m = 0
                for s in range(4):
                    j = nbr[i, s]
                    m += state[j] if j >= 0 else beta
                state[i] = 1 if draws[t, 2 * step + 1] < ptable[m] else 0
        g = sweep0 + t
        if g >= burn_in and (g - burn_in + 1) % thinning == 0:
            x = state[centre]
            out[pos] = x
            inactive = 0
            for s in range(4):
                j = nbr[centre, s]
                v = state[j] if j >= 0 else beta
                if v == 0:
                    inactive |= 1 << s
            col = mask_to_col[inactive]
            counts[col] += 1
            active[col] += x
            pos += 1
    return pos


def simulate(plan: SimulationPlan) -> SimulationResult:
    """Run one chain and estimate the centre node's activation probability."""
    topo = plan.topology
    n = topo.n_free
    nbr = np.ascontiguousarray(topo.neighbour_table, dtype=np.int64)
    ptable = probability_table(plan.potentials)
    sync = plan.mode == "synchronous"
    width = n if sync else 2 * n

    rng = np.random.Generator(np.random.PCG64(plan.seed))
    state = (rng.random(n) < 0.5).astype(np.int64)
    scratch = np.empty_like(state)
    out = np.empty(plan.samples, dtype=np.int64)
    counts = np.zeros(16, dtype=np.int64)
    active = np.zeros(16, dtype=np.int64)

    block = max(1, _BLOCK_DRAWS // width)
    done, pos = 0, 0
    while done < plan.total_sweeps:
        m = min(block, plan.total_sweeps - done)
        draws = rng.random((m, width))
        pos = _advance(state, scratch, nbr, plan.beta, ptable, sync, draws, done, plan.burn_in,
                       plan.thinning, topo.centre_index, MASK_TO_COLUMN, out, counts, active, pos)
        done += m
    assert pos == plan.samples
    return SimulationResult(batch_means(out, plan.batches), counts, active, plan)


# ---------------------------------------------------------------------------
# Boundary influence and sweeps
# ---------------------------------------------------------------------------


@dataclass
class InfluenceEstimate:
    delta: float
    stderr: float
    estimates: dict  # beta -> Estimate
    seeds: dict  # beta -> derived seed

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "stderr": self.stderr,
            "p0": self.estimates[0].to_dict(),
            "p1": self.estimates[1].to_dict(),
            "seeds": {str(b): s for b, s in self.seeds.items()},
        }


def boundary_influence_mc(topology: NetworkTopology, p: PotentialSet, mode: str = "synchronous",
                          burn_in: int = 1000, samples: int = 100_000, thinning: int = 1, seed: int = 0,
                          batches: int = DEFAULT_BATCHES, order=(0, 1)) -> InfluenceEstimate:
    """``p1_hat - p0_hat`` with the combined standard error.

    Each boundary value owns the stream ``derive_seed(seed, beta)``; ``order``
    only chooses which run is subtracted, so reversing it negates the estimate
    exactly.
    """
    if sorted(order) != [0, 1]:
        raise ConfigurationError(f"order must be a permutation of (0, 1), got {order!r}")
    seeds, ests = {}, {}
    for beta in (0, 1):
        seeds[beta] = derive_seed(seed, beta)
        plan = SimulationPlan(topology, p, beta, mode, burn_in, samples, thinning, seeds[beta], batches)
        ests[beta] = simulate(plan).estimate
    first, second = order
    delta = ests[second].mean - ests[first].mean
    stderr = float(np.hypot(ests[0].stderr, ests[1].stderr))
    return InfluenceEstimate(delta, stderr, ests, seeds)


@dataclass
class SweepRow:
    param_name: str
    param_value: float
    boundary: int
    mean: float
    stderr: float
    n_samples: int
    seed: int
    alt_sum: float
    symmetry_residual: float
    det: float

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, name) for name in CSV_HEADER)


def _with_param(p: PotentialSet, name: str, value: float) -> PotentialSet:
    # T rescales every reduced potential at fixed weights; a weight changes alone
    return p.with_(**{name: float(value)})


def sweep(base: SimulationPlan, param: str, start: float, stop: float, steps: int,
          threads: int | None = None) -> List[SweepRow]:
    """Simulate both boundaries at ``steps`` evenly spaced values of one parameter.

    Cells are independent and may run in parallel; row order and values do not
    depend on ``threads``.
    """
    if param not in SWEEP_PARAMS:
        raise ConfigurationError(f"sweep parameter must be one of {SWEEP_PARAMS}, got {param!r}")
    if isinstance(steps, bool) or not isinstance(steps, (int, np.integer)) or steps < 2:
        raise ConfigurationError(f"sweep steps must be an integer >= 2, got {steps!r}")
    values = np.linspace(start, stop, steps)
    cells = []
    for v_idx, value in enumerate(values):
        p = _with_param(base.potentials, param, value)
        for beta in (0, 1):
            seed = derive_seed(base.seed, 2 * v_idx + beta)
            cells.append((float(value), beta, SimulationPlan(
                base.topology, p, beta, base.mode, base.burn_in, base.samples, base.thinning, seed, base.batches)))

    def run(cell):
        value, beta, plan = cell
        est = simulate(plan).estimate
        report = phase_transition_report(plan.potentials)
        return SweepRow(param, value, beta, est.mean, est.stderr, est.n_samples, plan.seed,
                        report.alt_sum, report.symmetry_residual, report.det)

    workers = threads or os.cpu_count() or 1
    if workers == 1:
        return [run(c) for c in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, cells))


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(rows: Sequence[SweepRow], dest) -> None:
    """Write sweep rows with the fixed header; ``dest`` is a path or a text stream."""
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", newline="") as fh:
            write_csv(rows, fh)
        return
    writer = csv.writer(dest, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([_fmt(v) for v in row.as_tuple()])


def rows_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()
