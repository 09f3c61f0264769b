"""Monte Carlo harness: replicate batches, sweeps, and trajectory statistics.

Reproducibility contract: replicate i of a batch is simulated with its own
generator seeded by a 64-bit mix of (master_seed, i), so results are
bit-identical for a fixed (params, replicates, master_seed) no matter how
many worker processes execute the batch or in which order replicates
finish. Sweep cells get their own derived master seeds the same way.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from itertools import product
from multiprocessing import get_context

from .dynamics import (
    DriftParams,
    EXTINCT,
    Outcome,
    PURE_FIRST,
    PURE_SECOND,
    PayoffMatrix,
    SelectionParams,
    TIMEOUT,
)
from .engine import (
    SimParams,
    StopRule,
    apply_birth,
    apply_death,
    init_state,
    run_trajectory,
    sample_next_event,
)

#: Per-replicate event budget; absorption is certain but not timed, so an
#: exhausted budget is reported as a timeout outcome rather than hanging.
DEFAULT_EVENT_LIMIT = 50_000_000

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(x: int) -> int:
    """SplitMix64 finalizer: a bijective 64-bit scramble."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(master_seed: int, index: int) -> int:
    """Seed for stream ``index`` of a batch keyed by ``master_seed``."""
    return _mix64(master_seed + (index + 1) * _GOLDEN)


@dataclass(frozen=True)
class ReplicateOutcome:
    """One replicate's absorption record; the seed re-runs it in isolation."""

    outcome: Outcome
    seed: int
    fitness_clamps: int = 0


@dataclass(frozen=True)
class FixationEstimate:
    p_hat: float
    se: float
    replicates: int
    pure_first: int
    pure_second: int
    extinct: int
    timeout: int
    fitness_clamps: int = 0

    @classmethod
    def from_counts(cls, pure_first: int, pure_second: int, extinct: int,
                    timeout: int, fitness_clamps: int = 0) -> "FixationEstimate":
        n = pure_first + pure_second + extinct + timeout
        p = pure_first / n
        return cls(
            p_hat=p,
            se=(p * (1.0 - p) / n) ** 0.5,
            replicates=n,
            pure_first=pure_first,
            pure_second=pure_second,
            extinct=extinct,
            timeout=timeout,
            fitness_clamps=fitness_clamps,
        )


def run_replicate(params: SimParams, seed: int,
                  event_limit: int | None = DEFAULT_EVENT_LIMIT) -> ReplicateOutcome:
    """One trajectory to absorption (or the event budget), fully determined
    by (params, seed)."""
    rng = random.Random(seed)
    state = init_state(params, rng)
    outcome = run_trajectory(
        state, params, StopRule.at_absorption(event_limit), None, rng
    )
    return ReplicateOutcome(outcome, seed, state.fitness_clamps)


def _replicate_batch(args):
    params, master_seed, indices, event_limit = args
    counts = {PURE_FIRST: 0, PURE_SECOND: 0, EXTINCT: 0, TIMEOUT: 0}
    clamps = 0
    try:
        for i in indices:
            rep = run_replicate(params, derive_seed(master_seed, i), event_limit)
            counts[rep.outcome.klass] += 1
            clamps += rep.fitness_clamps
    except Exception as exc:  # noqa: BLE001 - reported with the failing seed
        return ("error", derive_seed(master_seed, i), repr(exc))
    return ("ok", counts, clamps)


def estimate_fixation(params: SimParams, replicates: int, master_seed: int,
                      event_limit: int | None = DEFAULT_EVENT_LIMIT,
                      jobs: int = 1) -> FixationEstimate:
    """Fixation probability of the invading label over independent replicates.

    Deterministic for fixed (params, replicates, master_seed) regardless of
    ``jobs``: replicate seeds depend only on their index, and aggregation
    is a commutative count reduction.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    indices = range(replicates)
    if jobs <= 1 or replicates < 4:
        batches = [_replicate_batch((params, master_seed, indices, event_limit))]
    else:
        n_chunks = min(replicates, jobs * 4)
        chunks = [list(indices[k::n_chunks]) for k in range(n_chunks)]
        ctx = get_context("fork")
        with ctx.Pool(processes=jobs) as pool:
            batches = pool.map(
                _replicate_batch,
                [(params, master_seed, chunk, event_limit) for chunk in chunks],
            )
    totals = Counter()
    clamps = 0
    for batch in batches:
        if batch[0] == "error":
            raise RuntimeError(
                f"replicate with seed {batch[1]} failed: {batch[2]}"
            )
        totals.update(batch[1])
        clamps += batch[2]
    return FixationEstimate.from_counts(
        totals[PURE_FIRST], totals[PURE_SECOND], totals[EXTINCT],
        totals[TIMEOUT], clamps,
    )


# -- parameter sweeps ------------------------------------------------------

#: Axis names accepted by run_sweep, in the order cells iterate.
SWEEP_AXES = ("lambda", "mu", "m", "mechanism", "alpha", "delta", "b", "c")


def apply_override(params: SimParams, name: str, value) -> SimParams:
    """A copy of ``params`` with one swept quantity replaced."""
    from dataclasses import replace

    if name == "lambda":
        return replace(params, lam=float(value))
    if name == "mu":
        return replace(params, mu=float(value))
    if name == "m":
        return replace(params, m=int(value))
    if name == "mechanism":
        return replace(params, mechanism=str(value))
    if name == "alpha":
        if not isinstance(params.dynamics, DriftParams):
            raise ValueError("alpha axis requires drift dynamics")
        return replace(params, dynamics=DriftParams(alpha=float(value)))
    if name == "delta":
        if not isinstance(params.dynamics, SelectionParams):
            raise ValueError("delta axis requires selection dynamics")
        return replace(params, dynamics=SelectionParams(
            payoff=params.dynamics.payoff, delta=float(value)))
    if name in ("b", "c"):
        dyn = params.dynamics
        if not isinstance(dyn, SelectionParams):
            raise ValueError(f"{name} axis requires selection dynamics")
        b = float(value) if name == "b" else dyn.payoff.T
        c = -dyn.payoff.S if name == "b" else float(value)
        return replace(params, dynamics=SelectionParams(
            payoff=PayoffMatrix.prisoners_dilemma(b=b, c=c), delta=dyn.delta))
    raise ValueError(f"unknown sweep axis: {name!r}")


@dataclass(frozen=True)
class SweepSpec:
    base: SimParams
    axes: dict[str, list]            # insertion order = iteration order
    replicates: int
    master_seed: int
    event_limit: int | None = DEFAULT_EVENT_LIMIT

    def __post_init__(self):
        for name in self.axes:
            if name not in SWEEP_AXES:
                raise ValueError(f"unknown sweep axis: {name!r}")
            if not self.axes[name]:
                raise ValueError(f"axis {name!r} has no values")

    @property
    def n_cells(self) -> int:
        n = 1
        for values in self.axes.values():
            n *= len(values)
        return n


@dataclass(frozen=True)
class SweepRow:
    cell: dict                      # axis name -> value for this cell
    params: SimParams
    estimate: FixationEstimate


def sweep_cells(spec: SweepSpec):
    """(cell dict, resolved params) in deterministic cartesian order."""
    names = list(spec.axes)
    for combo in product(*(spec.axes[name] for name in names)):
        cell = dict(zip(names, combo))
        params = spec.base
        for name, value in cell.items():
            try:
                params = apply_override(params, name, value)
            except ValueError as exc:
                raise ValueError(f"sweep cell {cell}: {exc}") from exc
        yield cell, params


def run_sweep(spec: SweepSpec, jobs: int = 1,
              progress=None) -> list[SweepRow]:
    """One FixationEstimate per cartesian cell, each cell independently
    seeded from the spec's master seed; output order is the cell order."""
    rows = []
    for cell_index, (cell, params) in enumerate(sweep_cells(spec)):
        cell_seed = derive_seed(spec.master_seed, cell_index)
        try:
            est = estimate_fixation(
                params, spec.replicates, cell_seed, spec.event_limit, jobs
            )
        except Exception as exc:
            raise RuntimeError(f"sweep cell {cell} failed: {exc}") from exc
        rows.append(SweepRow(cell=cell, params=params, estimate=est))
        if progress is not None:
            progress(cell_index + 1, spec.n_cells, cell, est)
    return rows


# -- time series and stationary statistics ---------------------------------


class _ThinnedSeries:
    """Recorder that resamples the event stream at clock multiples of
    sample_dt. Between events the state is constant, so each grid time
    in (t_prev, t_event) carries the previous snapshot."""

    def __init__(self, sample_dt: float, first_row: tuple):
        self.sample_dt = sample_dt
        self.rows = [first_row]
        self._next = sample_dt
        self._held = first_row

    def __call__(self, t: float, n: int, count_first: int, mean_degree: float):
        sample_dt = self.sample_dt
        while self._next <= t:
            s = self._next
            if s < t:
                held = self._held
                self.rows.append((s, held[1], held[2], held[3]))
            else:
                self.rows.append((s, n, count_first, mean_degree))
            self._next = s + sample_dt
        self._held = (t, n, count_first, mean_degree)

    def finish(self, t_end: float):
        held = self._held
        while self._next <= t_end:
            self.rows.append((self._next, held[1], held[2], held[3]))
            self._next += self.sample_dt


def trajectory_series(params: SimParams, t_max: float, sample_dt: float,
                      seed: int) -> list[tuple[float, int, int, float]]:
    """(t, N, count_first, mean_degree) rows at clock multiples of
    sample_dt from one trajectory run to t_max."""
    if sample_dt <= 0:
        raise ValueError("sample_dt must be positive")
    rng = random.Random(seed)
    state = init_state(params, rng)
    recorder = _ThinnedSeries(
        sample_dt, (0.0, state.n, state.n_first, state.mean_degree())
    )
    run_trajectory(state, params, StopRule.at_time(t_max), recorder, rng)
    recorder.finish(t_max)
    return recorder.rows


@dataclass
class StationaryStats:
    size_histogram: Counter = field(default_factory=Counter)
    degree_histogram: Counter = field(default_factory=Counter)
    mean_size: float = 0.0          # time-weighted over [burn_in, t_max]
    mean_degree: float = 0.0
    samples: int = 0


def stationary_statistics(params: SimParams, burn_in: float, t_max: float,
                          seed: int, sample_dt: float = 1.0) -> StationaryStats:
    """Histograms of point samples (every sample_dt after burn_in) plus
    exact time-weighted means over [burn_in, t_max] from one trajectory.

    Drives the engine ops directly rather than the recorder: histogram
    samples need the graph as it stood at the sample time, i.e. before the
    event that advances the clock past it.
    """
    if burn_in >= t_max:
        raise ValueError("burn_in must be below t_max")
    rng = random.Random(seed)
    state = init_state(params, rng)
    g = state.graph

    def record():
        stats.size_histogram[g.num_nodes] += 1
        stats.degree_histogram.update(g.degree_histogram())
        stats.samples += 1

    stats = StationaryStats()
    next_sample = 0.0
    int_n = 0.0
    int_k = 0.0
    weight = 0.0
    t = 0.0
    while True:
        ev = sample_next_event(state, params, rng)
        t_next = min(t + ev.dt, t_max)
        # grid points strictly inside the inter-event gap see this state;
        # one landing exactly on the event is picked up next iteration
        while next_sample < t_next:
            if next_sample >= burn_in:
                record()
            next_sample += sample_dt
        w = t_next - max(t, burn_in)
        if w > 0:
            int_n += w * g.num_nodes
            int_k += w * g.mean_degree()
            weight += w
        if t + ev.dt > t_max:
            state.t = t_max
            break
        state.t += ev.dt
        t = state.t
        if ev.dead is None:
            apply_birth(state, params, rng)
        else:
            apply_death(state, ev.dead)
    while next_sample <= t_max:
        if next_sample >= burn_in:
            record()
        next_sample += sample_dt
    stats.mean_size = int_n / weight if weight else 0.0
    stats.mean_degree = int_k / weight if weight else 0.0
    return stats
