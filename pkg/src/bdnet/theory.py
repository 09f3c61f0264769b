"""Closed-form stationary and threshold quantities for the evolving network.

The population size behaves as an M/M/inf queue, so its stationary law is
Poisson(lam/mu). Under uniform connection a tagged node's degree is also
birth-death with arrival rate m*lam/E[N] and per-link loss rate mu, giving
a Poisson(m) stationary law that does not involve lam or mu at all. All
pmf evaluations run in log space; lam/mu in the hundreds overflows naive
factorials long before it stresses lgamma.
"""

from __future__ import annotations

from math import exp, lgamma, log


def _poisson_log_pmf(mean: float, i: int) -> float:
    return -mean + i * log(mean) - lgamma(i + 1)


def expected_size(lam: float, mu: float) -> float:
    """Stationary mean population size, lam / mu."""
    if lam <= 0 or mu <= 0:
        raise ValueError(f"rates must be positive: lam={lam}, mu={mu}")
    return lam / mu


def size_pmf(lam: float, mu: float, i: int) -> float:
    """Stationary probability that the population holds exactly i nodes."""
    if lam <= 0 or mu <= 0:
        raise ValueError(f"rates must be positive: lam={lam}, mu={mu}")
    if i < 0:
        raise ValueError(f"i must be >= 0, got {i}")
    return exp(_poisson_log_pmf(lam / mu, i))


def expected_degree_uc(m: int) -> float:
    """Stationary mean degree under uniform connection: exactly m."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    return float(m)


def degree_pmf_uc(m: int, i: int) -> float:
    """Stationary degree pmf under uniform connection: Poisson(m) mass.

    Deliberately takes no rate parameters: the tagged-degree chain's
    up rate m*lam/E[N] and down rate i*mu leave only m in the stationary
    law (the rate-level cancellation is checked against the chain solver).
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if i < 0:
        raise ValueError(f"i must be >= 0, got {i}")
    return exp(_poisson_log_pmf(float(m), i))


def return_probability(n: int, m: int) -> float:
    """Probability an n-step random walk on the stationary uniform-connection
    network ends where it started, for n in {0, 1, 2}: 1, 0, 1/m."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if n == 0:
        return 1.0
    if n == 1:
        return 0.0
    if n == 2:
        return 1.0 / m
    raise ValueError(f"return probability only defined for n in {{0,1,2}}, got {n}")


class ThresholdUndefinedError(ValueError):
    """Raised when lam/(m*mu) <= 2: no finite benefit-cost ratio favors the
    altruistic label, so sweeps must not plot a threshold."""


def critical_bc(lam: float, mu: float, m: int) -> float:
    """Critical benefit-to-cost ratio (lam/mu - 2) / (lam/(m*mu) - 2) above
    which the altruistic label is favored over the neutral baseline."""
    if lam <= 0 or mu <= 0:
        raise ValueError(f"rates must be positive: lam={lam}, mu={mu}")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    denom = lam / (m * mu) - 2.0
    if denom <= 0:
        raise ThresholdUndefinedError(
            f"lam/(m*mu) = {lam / (m * mu):.6g} <= 2: threshold undefined"
        )
    return (lam / mu - 2.0) / denom


def neutral_baselines(lam: float, mu: float, n0: int) -> tuple[float, float]:
    """Both neutral fixation baselines for one invader: 1/E[N] (stationary
    population) and 1/n0 (actual initial population)."""
    if lam <= 0 or mu <= 0:
        raise ValueError(f"rates must be positive: lam={lam}, mu={mu}")
    if n0 < 1:
        raise ValueError(f"n0 must be >= 1, got {n0}")
    return mu / lam, 1.0 / n0
