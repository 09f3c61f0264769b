import math
import random

import pytest

from bdnet.dynamics import (
    DriftParams,
    PURE_FIRST,
    PURE_SECOND,
    PayoffMatrix,
    SelectionParams,
    classify,
)
from bdnet.engine import (
    CompleteInit,
    EdgeListInit,
    SimParams,
    StopRule,
    apply_birth,
    apply_death,
    init_state,
    run_trajectory,
    sample_next_event,
    step,
)

DRIFT = DriftParams(alpha=0.1)
SELECTION = SelectionParams(PayoffMatrix.prisoners_dilemma(10, 1), delta=0.01)


def params(**kw):
    base = dict(lam=3.0, mu=0.01, m=4, initial=CompleteInit(30), initial_invaders=1)
    base.update(kw)
    return SimParams(**base)


class TestParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            params(lam=0.0)
        with pytest.raises(ValueError):
            params(mu=-1.0)
        with pytest.raises(ValueError):
            params(m=0)
        with pytest.raises(ValueError):
            params(mechanism="star")
        with pytest.raises(ValueError):
            params(initial=CompleteInit(5), initial_invaders=6)


class TestInitState:
    def test_complete_30_one_invader(self):
        state = init_state(params(), random.Random(1))
        assert state.n == 30
        assert state.n_first == 1
        assert state.graph.num_edges == 435
        assert state.t == 0.0

    def test_complete_4_no_invaders(self):
        state = init_state(params(initial=CompleteInit(4), initial_invaders=0),
                           random.Random(1))
        assert state.n_first == 0
        assert not any(state.label.values())

    def test_edge_list_initial(self, tmp_path):
        # 28-individual interaction file, ring-shaped
        path = tmp_path / "herd.txt"
        lines = [f"z{i} z{(i + 1) % 28}" for i in range(28)]
        path.write_text("\n".join(lines) + "\n")
        state = init_state(
            params(initial=EdgeListInit(str(path)), initial_invaders=1),
            random.Random(1),
        )
        assert state.n == 28
        assert state.n_first == 1

    def test_invader_placement_uniform(self):
        hits = set()
        for seed in range(200):
            state = init_state(params(initial=CompleteInit(5)), random.Random(seed))
            hits.add(next(v for v, lab in state.label.items() if lab))
        assert hits == set(range(5))

    def test_first_neighbor_cache(self):
        state = init_state(params(initial=CompleteInit(6), initial_invaders=2),
                           random.Random(3))
        state.check_consistency()


class TestSampleNextEvent:
    def test_empty_population_only_births(self):
        state = init_state(params(initial=CompleteInit(1), initial_invaders=0),
                           random.Random(1))
        apply_death(state, state.graph.nodes()[0])
        rng = random.Random(2)
        n = 20000
        dts = [sample_next_event(state, params(), rng) for _ in range(n)]
        assert all(ev.dead is None for ev in dts)
        mean_dt = sum(ev.dt for ev in dts) / n
        assert abs(mean_dt - 1 / 3.0) < 0.02 * (1 / 3.0) * 3

    def test_birth_probability_half(self):
        # lam = 3, mu = 0.01, N = 300: birth and death rates tie at 3
        p = params()
        state = init_state(SimParams(lam=3.0, mu=0.01, m=4,
                                     initial=CompleteInit(300)), random.Random(4))
        rng = random.Random(5)
        n = 10**5
        births = sum(sample_next_event(state, p, rng).dead is None for _ in range(n))
        assert abs(births / n - 0.5) < 4 * math.sqrt(0.25 / n)

    def test_mean_dt(self):
        p = params(lam=2.0, mu=0.05)
        state = init_state(SimParams(lam=2.0, mu=0.05, m=4,
                                     initial=CompleteInit(40)), random.Random(6))
        rng = random.Random(7)
        n = 10**5
        mean_dt = sum(sample_next_event(state, p, rng).dt for _ in range(n)) / n
        assert abs(mean_dt - 1 / 4.0) < 0.02 * (1 / 4.0)

    def test_death_targets_live_nodes(self):
        state = init_state(params(initial=CompleteInit(10)), random.Random(8))
        rng = random.Random(9)
        for _ in range(1000):
            ev = sample_next_event(state, params(mu=5.0), rng)
            if ev.dead is not None:
                assert ev.dead in state.graph


class TestApplyBirth:
    def test_isolated_arrival_after_extinction(self):
        state = init_state(params(initial=CompleteInit(1), initial_invaders=0),
                           random.Random(1))
        apply_death(state, state.graph.nodes()[0])
        labels = []
        for seed in range(2000):
            s = init_state(params(initial=CompleteInit(1), initial_invaders=0),
                           random.Random(seed))
            apply_death(s, s.graph.nodes()[0])
            rng = random.Random(seed + 10**6)
            new = apply_birth(s, params(dynamics=DRIFT), rng)
            assert s.graph.degree(new) == 0
            labels.append(s.label[new])
        frac = sum(labels) / len(labels)
        assert abs(frac - 0.5) < 4 * math.sqrt(0.25 / 2000)

    def test_connects_to_all_when_small(self):
        state = init_state(params(initial=CompleteInit(2), initial_invaders=0,
                                  m=4), random.Random(2))
        new = apply_birth(state, params(m=4), random.Random(3))
        assert state.graph.degree(new) == 2

    def test_pure_first_population_stays_pure(self):
        for dyn in (DRIFT, SELECTION, None):
            p = params(initial=CompleteInit(8), initial_invaders=8, dynamics=dyn)
            state = init_state(p, random.Random(4))
            rng = random.Random(5)
            for _ in range(50):
                apply_birth(state, p, rng)
            assert state.n_first == state.n == 58

    def test_counts_and_cache_consistent(self):
        p = params(dynamics=SELECTION, initial=CompleteInit(12), initial_invaders=4)
        state = init_state(p, random.Random(6))
        rng = random.Random(7)
        for _ in range(60):
            apply_birth(state, p, rng)
        state.check_consistency()

    def test_preferential_birth(self):
        p = params(mechanism="preferential", dynamics=DRIFT,
                   initial=CompleteInit(10), initial_invaders=2)
        state = init_state(p, random.Random(8))
        rng = random.Random(9)
        for _ in range(60):
            new = apply_birth(state, p, rng)
            assert state.graph.degree(new) == 4
        state.check_consistency()


class TestApplyDeath:
    def test_last_invader_dies(self):
        p = params(initial=CompleteInit(6), initial_invaders=1)
        state = init_state(p, random.Random(1))
        invader = next(v for v, lab in state.label.items() if lab)
        apply_death(state, invader)
        assert state.n_first == 0
        assert classify(state.n, state.n_first) == PURE_SECOND

    def test_pure_population_shrinks_pure(self):
        p = params(initial=CompleteInit(7), initial_invaders=7)
        state = init_state(p, random.Random(2))
        apply_death(state, state.graph.nodes()[0])
        assert state.n_first == state.n == 6

    def test_edge_count_drops_by_degree(self):
        p = params(initial=CompleteInit(6))
        state = init_state(p, random.Random(3))
        v = state.graph.nodes()[0]
        assert state.graph.degree(v) == 5
        edges_before = state.graph.num_edges
        apply_death(state, v)
        assert edges_before - state.graph.num_edges == 5

    def test_dead_node_raises(self):
        state = init_state(params(initial=CompleteInit(3)), random.Random(4))
        v = state.graph.nodes()[0]
        apply_death(state, v)
        with pytest.raises(KeyError):
            apply_death(state, v)
        state.check_consistency()


class TestRunTrajectory:
    def test_pure_start_halts_immediately(self):
        p = params(initial=CompleteInit(10), initial_invaders=10, dynamics=DRIFT)
        state = init_state(p, random.Random(1))
        out = run_trajectory(state, p, StopRule.at_absorption(), None, random.Random(2))
        assert out.klass == PURE_FIRST
        assert out.t_abs == 0.0
        assert out.events == 0

    def test_time_limit_runs_to_t_max(self):
        p = params(lam=3.0, mu=0.01)
        state = init_state(p, random.Random(3))
        seen = []
        run_trajectory(state, p, StopRule.at_time(500.0),
                       lambda t, n, a, k: seen.append((t, n)), random.Random(4))
        assert state.t == 500.0
        assert seen[-1][0] <= 500.0
        assert seen == sorted(seen)

    def test_size_fluctuates_about_expectation(self):
        p = params(lam=3.0, mu=0.01, m=5, initial=CompleteInit(30), initial_invaders=0)
        state = init_state(p, random.Random(5))
        acc = []
        run_trajectory(state, p, StopRule.at_time(3000.0),
                       lambda t, n, a, k: acc.append((t, n)), random.Random(6))
        tail = [n for t, n in acc if t >= 1000.0]
        mean_n = sum(tail) / len(tail)
        assert abs(mean_n - 300.0) < 0.05 * 300.0

    def test_extinction_is_reachable(self):
        # lam = mu = 1: stationary mass at N = 0 is e^-1
        p = SimParams(lam=1.0, mu=1.0, m=2, initial=CompleteInit(3),
                      initial_invaders=0)
        state = init_state(p, random.Random(7))
        sizes = []
        run_trajectory(state, p, StopRule.at_time(300.0),
                       lambda t, n, a, k: sizes.append(n), random.Random(8))
        assert min(sizes) == 0

    def test_event_limit_reports_timeout(self):
        p = params(dynamics=DRIFT)
        state = init_state(p, random.Random(9))
        out = run_trajectory(state, p, StopRule.at_absorption(event_limit=5),
                             None, random.Random(10))
        assert out.klass == "timeout"
        assert out.events == 5

    def test_absorption_outcome_matches_state(self):
        p = params(lam=1.0, mu=0.05, m=3, initial=CompleteInit(10),
                   initial_invaders=1, dynamics=DRIFT)
        for seed in range(8):
            state = init_state(p, random.Random(seed))
            out = run_trajectory(state, p, StopRule.at_absorption(), None,
                                 random.Random(seed + 100))
            assert out.klass in (PURE_FIRST, PURE_SECOND, "extinct")
            assert out.klass == classify(state.n, state.n_first)
            assert out.t_abs == state.t
            state.check_consistency()


@pytest.mark.parametrize("dyn", [None, DRIFT, SELECTION])
@pytest.mark.parametrize("mechanism", ["uniform", "preferential"])
def test_trajectory_matches_stepwise_ops(dyn, mechanism):
    """The inlined hot loop and the public single-event ops must consume
    the generator identically and land on the same state."""
    p = SimParams(lam=2.0, mu=0.05, m=3, mechanism=mechanism, dynamics=dyn,
                  initial=CompleteInit(12), initial_invaders=3)
    for seed in range(6):
        rng1 = random.Random(seed)
        s1 = init_state(p, rng1)
        out = run_trajectory(s1, p, StopRule.after_events(400), None, rng1)
        rng2 = random.Random(seed)
        s2 = init_state(p, rng2)
        for _ in range(400):
            step(s2, p, rng2)
        assert out.events == 400
        assert s1.t == s2.t
        assert s1.n_first == s2.n_first
        assert s1.label == s2.label
        assert s1.fitness_clamps == s2.fitness_clamps
        assert {v: sorted(s1.graph.neighbors(v)) for v in s1.graph.nodes()} == \
               {v: sorted(s2.graph.neighbors(v)) for v in s2.graph.nodes()}
        assert rng1.random() == rng2.random()


def test_birth_counts_are_poisson():
    """Birth tallies over fixed windows: mean and variance both lam*T."""
    p = params(lam=3.0, mu=0.01, initial=CompleteInit(300), initial_invaders=0)
    state = init_state(p, random.Random(11))
    window = 50.0
    lam_t = p.lam * window
    counts = []
    births = 0
    boundary = window
    prev_n = state.n
    rng = random.Random(12)

    def recorder(t, n, a, k):
        nonlocal births, boundary, prev_n
        while t > boundary:
            counts.append(births)
            births = 0
            boundary += window
        if n > prev_n:
            births += 1
        prev_n = n

    run_trajectory(state, p, StopRule.at_time(400 * window), recorder, rng)
    k = len(counts)
    assert k >= 399
    mean = sum(counts) / k
    var = sum((c - mean) ** 2 for c in counts) / (k - 1)
    assert abs(mean - lam_t) < 3 * math.sqrt(lam_t / k) * 3
    assert abs(var - lam_t) < 3 * math.sqrt(lam_t)


def test_lifetimes_are_exponential():
    """Completed lifetimes average 1/mu within 3% over >= 1e4 deaths."""
    p = SimParams(lam=5.0, mu=0.05, m=3, initial=CompleteInit(50),
                  initial_invaders=0)
    state = init_state(p, random.Random(13))
    rng = random.Random(14)
    born_at = {v: 0.0 for v in state.graph.nodes()}
    lifetimes = []
    while len(lifetimes) < 10**4:
        ev = sample_next_event(state, p, rng)
        state.t += ev.dt
        if ev.dead is None:
            born_at[apply_birth(state, p, rng)] = state.t
        else:
            lifetimes.append(state.t - born_at.pop(ev.dead))
            apply_death(state, ev.dead)
    mean_life = sum(lifetimes) / len(lifetimes)
    assert abs(mean_life - 1 / p.mu) < 0.03 * (1 / p.mu)


def test_pure_states_are_closed():
    """Once pure, every later state is pure (irreversibility of absorption)."""
    for dyn in (DriftParams(alpha=0.3), SELECTION):
        p = SimParams(lam=2.0, mu=0.05, m=3, dynamics=dyn,
                      initial=CompleteInit(10), initial_invaders=10)
        state = init_state(p, random.Random(15))
        ok = []
        run_trajectory(state, p, StopRule.after_events(5000),
                       lambda t, n, a, k: ok.append(a == n), random.Random(16))
        assert all(ok)


def test_consistency_under_mixed_dynamics():
    for dyn in (None, DRIFT, SELECTION):
        for mech in ("uniform", "preferential"):
            p = SimParams(lam=2.0, mu=0.1, m=3, mechanism=mech, dynamics=dyn,
                          initial=CompleteInit(8), initial_invaders=3)
            state = init_state(p, random.Random(17))
            rng = random.Random(18)
            for _ in range(20):
                run_trajectory(state, p, StopRule.after_events(100), None, rng)
                state.check_consistency()
