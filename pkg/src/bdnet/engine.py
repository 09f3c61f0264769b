"""Continuous-time event engine for the birth-death evolving network.

Scheduling uses competing exponential clocks: with N individuals alive the
next event arrives after Exponential(lambda + N*mu) and is a birth with
probability lambda / (lambda + N*mu), otherwise the death of a uniformly
chosen individual. Because individual lifetimes are memoryless this is
distributionally identical to giving every individual its own exponential
timer, but costs O(1) per event and is trivially reproducible from one
seeded generator.

A birth is one atomic transition: provisional label from pre-arrival
frequencies, attachment to targets sampled from the pre-arrival graph,
then the label revision by the configured dynamics (computed before the
new edges are inserted, so neighbor payoffs never include the newcomer).

All randomness is consumed through ``rng.random()`` alone, which is the
one primitive CPython guarantees stable across versions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import log
from typing import Callable, NamedTuple

from .dynamics import (
    DriftParams,
    SelectionParams,
    FITNESS_FLOOR,
    Outcome,
    TIMEOUT,
    classify,
    drift_update,
    payoff_from_counts,
    selection_update,
    similarity_attraction,
)
from .graph import DynamicGraph, sample_distinct

MECHANISMS = ("uniform", "preferential")


@dataclass(frozen=True)
class CompleteInit:
    """Start from the complete graph on ``n`` nodes."""

    n: int


@dataclass(frozen=True)
class EdgeListInit:
    """Start from an ingested edge-list file."""

    path: str


@dataclass(frozen=True)
class SimParams:
    lam: float                    # birth rate of the population
    mu: float                     # per-individual death rate
    m: int                        # links per newcomer
    mechanism: str = "uniform"
    dynamics: DriftParams | SelectionParams | None = None
    initial: CompleteInit | EdgeListInit = field(default_factory=lambda: CompleteInit(30))
    initial_invaders: int = 1

    def __post_init__(self):
        if self.lam <= 0 or self.mu <= 0:
            raise ValueError(f"rates must be positive: lam={self.lam}, mu={self.mu}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.mechanism not in MECHANISMS:
            raise ValueError(f"unknown mechanism: {self.mechanism!r}")
        if self.initial_invaders < 0:
            raise ValueError("initial_invaders must be >= 0")
        if isinstance(self.initial, CompleteInit):
            if self.initial.n < 1:
                raise ValueError("initial complete graph needs n >= 1")
            if self.initial_invaders > self.initial.n:
                raise ValueError("more invaders than initial nodes")


class Event(NamedTuple):
    """dt is the clock advance; dead is a live node id, or None for a birth."""

    dt: float
    dead: int | None


class PopulationState:
    """Graph plus per-node labels, label counts, and the simulation clock.

    ``first_neighbors[v]`` caches how many of v's neighbors hold the first
    label; births and deaths keep it current so selection payoffs are O(1)
    per target instead of a walk over each target's neighborhood.
    """

    __slots__ = ("graph", "label", "first_neighbors", "t", "n_first",
                 "fitness_clamps")

    def __init__(self, graph: DynamicGraph, label: dict[int, bool], t: float = 0.0):
        self.graph = graph
        self.label = label
        self.t = t
        self.n_first = sum(label.values())
        self.first_neighbors = {
            v: sum(label[u] for u in graph.neighbors(v)) for v in graph.nodes()
        }
        self.fitness_clamps = 0

    @property
    def n(self) -> int:
        return self.graph.num_nodes

    def mean_degree(self) -> float:
        return self.graph.mean_degree()

    def check_consistency(self) -> None:
        """Label/count/graph agreement; used by tests after event batches."""
        g = self.graph
        g.check_consistency()
        assert set(self.label) == set(g.nodes())
        assert self.n_first == sum(self.label.values())
        for v in g.nodes():
            assert self.first_neighbors[v] == sum(
                self.label[u] for u in g.neighbors(v)
            )
        assert 0 <= self.n_first <= g.num_nodes


def init_state(params: SimParams, rng) -> PopulationState:
    """Build the initial population and place the invading labels."""
    track = params.mechanism == "preferential"
    if isinstance(params.initial, CompleteInit):
        graph = DynamicGraph.complete(params.initial.n, track_half_edges=track)
    else:
        from .io import load_edge_list  # local import: io pulls in nothing heavy

        loaded = load_edge_list(params.initial.path, track_half_edges=track)
        graph = loaded.graph
    nodes = graph.nodes()
    if params.initial_invaders > len(nodes):
        raise ValueError(
            f"{params.initial_invaders} invaders but only {len(nodes)} nodes"
        )
    invaders = set(sample_distinct(nodes, params.initial_invaders, rng))
    label = {v: v in invaders for v in nodes}
    return PopulationState(graph, label)


def sample_next_event(state: PopulationState, params: SimParams, rng) -> Event:
    """Next transition under competing clocks; at N=0 only a birth can fire."""
    n = state.graph.num_nodes
    if n == 0:
        return Event(-log(1.0 - rng.random()) / params.lam, None)
    total = params.lam + n * params.mu
    dt = -log(1.0 - rng.random()) / total
    if rng.random() * total < params.lam:
        return Event(dt, None)
    return Event(dt, state.graph.random_node(rng))


def _newcomer_targets(g: DynamicGraph, mechanism: str, m: int, new: int, rng) -> list[int]:
    """Attachment targets over the pre-arrival population. ``new`` is the
    node just created by add_node, so under uniform connection it is the
    last entry of the sampling order and a prefix sample avoids exclusion
    bookkeeping; under preferential attachment it carries no degree weight
    and the general path is used."""
    if mechanism == "uniform":
        return g.sample_uniform_prefix(m, g.num_nodes - 1, rng)
    return g.sample_preferential(m, (new,), rng)


def apply_birth(state: PopulationState, params: SimParams, rng) -> int:
    """One arrival: provisional label, attachment, surroundings revision.

    Returns the new node id. The clock is advanced by the caller.
    """
    g = state.graph
    n0 = g.num_nodes
    if n0 == 0:
        provisional = rng.random() < 0.5  # label frequency undefined at N=0
    else:
        provisional = similarity_attraction(state.n_first, n0, rng)
    new = g.add_node()
    targets = _newcomer_targets(g, params.mechanism, params.m, new, rng)

    label = state.label
    dyn = params.dynamics
    aware_targets = 0
    for y in targets:
        if label[y]:
            aware_targets += 1
    if dyn is None or not targets:
        lab = provisional
    elif type(dyn) is DriftParams:
        lab = drift_update(provisional, aware_targets, dyn.alpha, rng)
    else:
        # Fitness of each competing target on the pre-arrival graph; the
        # newcomer's edges are not inserted yet, so degrees and cached
        # first-label counts are exactly the pre-arrival ones.
        pay = dyn.payoff
        delta = dyn.delta
        first_nbrs = state.first_neighbors
        weighted = []
        for y in targets:
            p = payoff_from_counts(label[y], first_nbrs[y], g.degree(y), pay)
            f = 1.0 - delta + delta * p
            if f <= FITNESS_FLOOR:
                f = FITNESS_FLOOR
                state.fitness_clamps += 1
            weighted.append((label[y], f))
        lab = selection_update(weighted, rng)

    g.attach_new(new, targets)
    first_nbrs = state.first_neighbors
    if lab:
        for y in targets:
            first_nbrs[y] += 1
        state.n_first += 1
    first_nbrs[new] = aware_targets
    label[new] = lab
    return new


def apply_death(state: PopulationState, node: int) -> None:
    """Remove a live individual and its edges; counts stay consistent."""
    lab = state.label.pop(node)  # KeyError on a dead/unknown node
    g = state.graph
    first_nbrs = state.first_neighbors
    if lab:
        for y in g.neighbors(node):
            first_nbrs[y] -= 1
        state.n_first -= 1
    g.remove_node(node)
    del first_nbrs[node]


@dataclass(frozen=True)
class StopRule:
    """When run_trajectory halts. Combine absorption with an event cap to
    get a reported (never silent) timeout outcome."""

    absorption: bool = False
    t_max: float | None = None
    event_limit: int | None = None

    @classmethod
    def at_absorption(cls, event_limit: int | None = None) -> "StopRule":
        return cls(absorption=True, event_limit=event_limit)

    @classmethod
    def at_time(cls, t_max: float) -> "StopRule":
        return cls(t_max=t_max)

    @classmethod
    def after_events(cls, n: int) -> "StopRule":
        return cls(event_limit=n)


Recorder = Callable[[float, int, int, float], None]


def run_trajectory(state: PopulationState, params: SimParams, stop: StopRule,
                   recorder: Recorder | None, rng) -> Outcome:
    """Drive the state until the stop rule fires.

    The recorder (if any) is invoked after every applied event with
    ``(t, N, count_first, mean_degree)``; thinning is the recorder's
    business. Under an absorption rule the returned class is the pure/
    extinct state reached, or ``timeout`` if the event budget ran out
    first; under pure time/event limits an unabsorbed end is ``timeout``.
    """
    if stop.absorption:
        cls0 = classify(state.n, state.n_first)
        if cls0 is not None:
            return Outcome(cls0, state.t, 0)

    # This loop is the package's hot spot (fixation batches push 1e9+
    # events through it), so engine/graph state is bound to locals and the
    # reference ops above are inlined with the identical rng.random() draw
    # order; test_engine pins step-for-step equivalence with step().
    lam, mu = params.lam, params.mu
    mechanism, m, dyn = params.mechanism, params.m, params.dynamics
    uniform = mechanism == "uniform"
    g = state.graph
    adj = g._adj
    order = g._order
    label = state.label
    first_nbrs = state.first_neighbors
    n_first = state.n_first
    t = state.t
    clamps = 0
    rand = rng.random
    g_add_node = g.add_node
    g_attach = g.attach_new
    g_remove = g.remove_node
    prefix_sample = g.sample_uniform_prefix
    pa_sample = g.sample_preferential
    absorption = stop.absorption
    t_max = stop.t_max
    event_limit = stop.event_limit
    is_drift = type(dyn) is DriftParams
    if is_drift:
        alpha = dyn.alpha
    elif dyn is not None:
        pay_r, pay_s = dyn.payoff.R, dyn.payoff.S
        pay_t, pay_p = dyn.payoff.T, dyn.payoff.P
        delta = dyn.delta
        base_f = 1.0 - delta

    events = 0
    while True:
        if event_limit is not None and events >= event_limit:
            state.t = t
            state.n_first = n_first
            state.fitness_clamps += clamps
            return Outcome(TIMEOUT, t, events)
        n = len(order)
        if n == 0:
            dt = -log(1.0 - rand()) / lam
            dead = None
        else:
            total = lam + n * mu
            dt = -log(1.0 - rand()) / total
            if rand() * total < lam:
                dead = None
            else:
                dead = order[int(rand() * n)]
        if t_max is not None and t + dt > t_max:
            state.t = t_max
            state.n_first = n_first
            state.fitness_clamps += clamps
            cls = classify(n, n_first)
            return Outcome(cls if cls is not None else TIMEOUT, t_max, events)
        t += dt

        if dead is None:
            if n == 0:
                provisional = rand() < 0.5
            else:
                provisional = rand() * n < n_first
            new = g_add_node()
            if uniform:
                targets = prefix_sample(m, n, rng)
            else:
                targets = pa_sample(m, (new,), rng)
            aware_targets = 0
            for y in targets:
                if label[y]:
                    aware_targets += 1
            if dyn is None or not targets:
                lab = provisional
            elif is_drift:
                if provisional:
                    lab = True
                else:
                    lab = False
                    for _ in range(aware_targets):
                        if rand() < alpha:
                            lab = True
                            break
            else:
                total_f = 0.0
                weighted = []
                for y in targets:
                    ly = label[y]
                    fn = first_nbrs[y]
                    if ly:
                        p = fn * pay_r + (len(adj[y]) - fn) * pay_s
                    else:
                        p = fn * pay_t + (len(adj[y]) - fn) * pay_p
                    f = base_f + delta * p
                    if f <= FITNESS_FLOOR:
                        f = FITNESS_FLOOR
                        clamps += 1
                    weighted.append((ly, f))
                    total_f += f
                r = rand() * total_f
                acc = 0.0
                lab = weighted[-1][0]
                for ly, f in weighted:
                    acc += f
                    if r < acc:
                        lab = ly
                        break
            g_attach(new, targets)
            if lab:
                for y in targets:
                    first_nbrs[y] += 1
                n_first += 1
            first_nbrs[new] = aware_targets
            label[new] = lab
            n += 1
        else:
            lab = label.pop(dead)
            if lab:
                for y in adj[dead]:
                    first_nbrs[y] -= 1
                n_first -= 1
            g_remove(dead)
            del first_nbrs[dead]
            n -= 1

        events += 1
        if recorder is not None:
            state.t = t
            state.n_first = n_first
            recorder(t, n, n_first, g.mean_degree())
        if absorption and not 0 < n_first < n:
            state.t = t
            state.n_first = n_first
            state.fitness_clamps += clamps
            return Outcome(classify(n, n_first), t, events)


def step(state: PopulationState, params: SimParams, rng) -> Event:
    """Sample and apply a single event; returns it. Reference path for
    run_trajectory's inlined loop (tests pin their equivalence)."""
    ev = sample_next_event(state, params, rng)
    state.t += ev.dt
    if ev.dead is None:
        apply_birth(state, params, rng)
    else:
        apply_death(state, ev.dead)
    return ev
