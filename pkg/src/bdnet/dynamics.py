"""Label-update rules applied when an individual joins the population.

Two regimes share the same two-phase structure (draw a provisional label
from the current label frequencies, then let the new neighbors revise it):

* drift — one-way contagion; each aware neighbor independently transmits
  with probability ``alpha``, and awareness is never lost;
* selection — two conflicting labels compete; the newcomer copies one
  neighbor chosen proportionally to fitness ``1 - delta + delta * payoff``.

Labels are plain bools: True is the invading label (aware / C), False the
resident one (unaware / D).
"""

from __future__ import annotations

from dataclasses import dataclass

PURE_FIRST = "pure_first"
PURE_SECOND = "pure_second"
EXTINCT = "extinct"
TIMEOUT = "timeout"

#: Fitness values are floored here so the fitness-proportional draw stays
#: well defined when strong selection drives 1 - delta + delta*payoff
#: negative; callers count how often the floor engages.
FITNESS_FLOOR = 1e-12


@dataclass(frozen=True)
class PayoffMatrix:
    """2x2 game: rows/columns ordered (first label, second label)."""

    R: float
    S: float
    T: float
    P: float

    @classmethod
    def prisoners_dilemma(cls, b: float, c: float) -> "PayoffMatrix":
        """R=b-c, S=-c, T=b, P=0; requires b > c > 0."""
        if not (b > c > 0):
            raise ValueError(f"prisoner's dilemma needs b > c > 0, got b={b}, c={c}")
        return cls(R=b - c, S=-c, T=b, P=0.0)

    def entry(self, mine_first: bool, theirs_first: bool) -> float:
        if mine_first:
            return self.R if theirs_first else self.S
        return self.T if theirs_first else self.P


@dataclass(frozen=True)
class DriftParams:
    """One-way contagion with per-neighbor transmission probability."""

    alpha: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")


@dataclass(frozen=True)
class SelectionParams:
    """Fitness-proportional copying with intensity ``delta`` in [0, 1)."""

    payoff: PayoffMatrix
    delta: float = 0.01

    def __post_init__(self):
        if not 0.0 <= self.delta < 1.0:
            raise ValueError(f"delta must be in [0, 1), got {self.delta}")


@dataclass(frozen=True)
class Outcome:
    """How a trajectory ended: absorption class, clock time, event count."""

    klass: str
    t_abs: float
    events: int


def similarity_attraction(count_first: int, n: int, rng) -> bool:
    """Provisional label: first label with probability count_first / n."""
    if n < 1 or not 0 <= count_first <= n:
        raise ValueError(f"bad counts: count_first={count_first}, n={n}")
    return rng.random() * n < count_first


def drift_update(initially_aware: bool, aware_neighbors: int, alpha: float, rng) -> bool:
    """Surroundings step of the contagion: independent Bernoulli(alpha)
    trial per aware neighbor; an already-aware newcomer stays aware."""
    if initially_aware:
        return True
    rand = rng.random
    for _ in range(aware_neighbors):
        if rand() < alpha:
            return True
    return False


def payoff_from_counts(is_first: bool, first_neighbors: int, degree: int,
                       payoff: PayoffMatrix) -> float:
    """Total payoff of a node given how many of its neighbors hold the
    first label. Equivalent to summing matrix entries over the neighbor
    list; stated on counts so callers can keep counts incrementally."""
    second = degree - first_neighbors
    if is_first:
        return first_neighbors * payoff.R + second * payoff.S
    return first_neighbors * payoff.T + second * payoff.P


def payoff_of(is_first: bool, neighbor_labels, payoff: PayoffMatrix) -> float:
    """Total payoff against an explicit neighbor label list."""
    labels = list(neighbor_labels)
    return payoff_from_counts(is_first, sum(labels), len(labels), payoff)


def fitness_of(payoff_value: float, delta: float) -> float:
    """Map payoff to reproductive weight, clamped at FITNESS_FLOOR."""
    f = 1.0 - delta + delta * payoff_value
    return f if f > FITNESS_FLOOR else FITNESS_FLOOR


def selection_update(neighbors, rng) -> bool:
    """Copy the label of one neighbor drawn with probability proportional
    to fitness. ``neighbors`` is a non-empty sequence of (label, fitness)."""
    if not neighbors:
        raise ValueError("selection_update needs at least one neighbor")
    total = 0.0
    for _, f in neighbors:
        total += f
    r = rng.random() * total
    acc = 0.0
    for label, f in neighbors:
        acc += f
        if r < acc:
            return label
    return neighbors[-1][0]


def classify(n: int, n_first: int) -> str | None:
    """Absorption class of a population count pair, or None if transient."""
    if n == 0:
        return EXTINCT
    if n_first == n:
        return PURE_FIRST
    if n_first == 0:
        return PURE_SECOND
    return None
