"""Exact numerical cross-checks, independent of the Monte Carlo engine.

Two kinds of computation live here:

* stationary solves of the population-size and tagged-degree birth-death
  chains straight from their transition rates (product-form balance), to
  be compared against the closed forms in :mod:`bdnet.theory`;
* an absorbing-chain solve for drift fixation under uniform connection.
  Conditional on (N, A) the number of aware targets a newcomer meets is
  Hypergeometric(N, A, min(m, N)) because targets are uniform without
  replacement, so the pair (N, A) is itself Markov and the fixation
  probability is a sparse linear solve over at most ~n_max^2/2 states.
  Preferential attachment breaks that reduction (degrees carry label
  information) and is refused.

Chains are truncated at n_max with a reflecting boundary; the default
puts the boundary 12 sigma above the stationary mean, where the Poisson
tail is far below solver tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, exp, lgamma, log, sqrt

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import bicgstab, spilu, spsolve, LinearOperator
from scipy.special import logsumexp
from scipy.stats import poisson

#: Truncation is rejected when the stationary mass beyond n_max exceeds this.
TAIL_TOLERANCE = 1e-6
#: Linear-solve residual requirement (infinity norm).
RESIDUAL_TOLERANCE = 1e-10


class TruncationError(ValueError):
    """n_max leaves too much stationary mass outside the chain."""

    def __init__(self, n_max: int, tail: float, required: int):
        self.required = required
        super().__init__(
            f"n_max={n_max} leaves tail mass {tail:.3e} > {TAIL_TOLERANCE:.0e}; "
            f"use n_max >= {required}"
        )


def default_n_max(lam: float, mu: float) -> int:
    """Reflecting boundary 12 sigma above the stationary mean."""
    rho = lam / mu
    return ceil(rho + 12.0 * sqrt(rho))


def _check_tail(mean: float, n_max: int) -> None:
    tail = float(poisson.sf(n_max, mean))
    if tail > TAIL_TOLERANCE:
        required = int(poisson.isf(TAIL_TOLERANCE, mean)) + 1
        raise TruncationError(n_max, tail, required)


def _stationary_from_rates(birth, death, n_max: int) -> np.ndarray:
    """Product-form stationary pmf of a birth-death chain on {0..n_max}:
    pi_{i+1}/pi_i = birth(i)/death(i+1), normalized over the truncation."""
    logs = np.empty(n_max + 1)
    logs[0] = 0.0
    for i in range(1, n_max + 1):
        logs[i] = logs[i - 1] + log(birth(i - 1)) - log(death(i))
    return np.exp(logs - logsumexp(logs))


def solve_size_chain(lam: float, mu: float, n_max: int) -> np.ndarray:
    """Stationary pmf of the population size from rates (up lam, down i*mu)."""
    if lam <= 0 or mu <= 0:
        raise ValueError(f"rates must be positive: lam={lam}, mu={mu}")
    _check_tail(lam / mu, n_max)
    return _stationary_from_rates(lambda i: lam, lambda i: i * mu, n_max)


def solve_degree_chain(lam: float, mu: float, m: int, k_max: int) -> np.ndarray:
    """Stationary pmf of a tagged node's degree under uniform connection.

    Built literally from the lam- and mu-dependent rates (up m*lam/E[N],
    down i*mu); the result must come out independent of both rates.
    """
    if lam <= 0 or mu <= 0:
        raise ValueError(f"rates must be positive: lam={lam}, mu={mu}")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    _check_tail(float(m), k_max)
    expected_n = lam / mu
    up = m * lam / expected_n
    return _stationary_from_rates(lambda i: up, lambda i: i * mu, k_max)


# -- drift fixation ------------------------------------------------------


def _log_comb(n: int, k: int) -> float:
    return lgamma(n + 1) - lgamma(k + 1) - lgamma(n - k + 1)


def aware_conversion_probability(n: int, a: int, m: int, alpha: float) -> float:
    """P(an initially-unaware newcomer turns aware) from state (N=n, A=a):
    aware targets ~ Hypergeometric(n, a, min(m, n)); each transmits
    independently with probability alpha."""
    if a == 0 or alpha == 0.0:
        return 0.0
    k = min(m, n)
    log_denom = _log_comb(n, k)
    fail = 1.0 - alpha
    total = 0.0
    for h in range(max(0, k - (n - a)), min(k, a) + 1):
        p_h = exp(_log_comb(a, h) + _log_comb(n - a, k - h) - log_denom)
        total += p_h * (1.0 - fail ** h)
    return total


def birth_aware_probability(n: int, a: int, m: int, alpha: float) -> float:
    """P(the newcomer ends up aware) from pre-arrival state (N=n, A=a):
    similarity attraction, then the hypergeometric conversion."""
    frac = a / n
    return frac + (1.0 - frac) * aware_conversion_probability(n, a, m, alpha)


@dataclass(frozen=True)
class DriftChainSolution:
    """Hitting probabilities of both absorbing classes for every transient
    (N, A) state, 2 <= N <= n_max, 1 <= A <= N-1."""

    n_max: int
    pure_first: np.ndarray
    pure_second: np.ndarray

    @staticmethod
    def index(n: int, a: int) -> int:
        return (n - 1) * (n - 2) // 2 + (a - 1)

    def fixation(self, n: int, a: int) -> float:
        if a == n:
            return 1.0
        if a == 0 or n == 0:
            return 0.0
        return float(self.pure_first[self.index(n, a)])


def _solve_sparse(a_mat: sparse.csr_matrix, rhs: np.ndarray) -> np.ndarray:
    """Iterative solve with an ILU preconditioner, verified against the
    residual tolerance; falls back to a direct sparse solve if needed."""
    n = a_mat.shape[0]
    try:
        ilu = spilu(a_mat.tocsc(), drop_tol=1e-6, fill_factor=12.0)
        precond = LinearOperator((n, n), ilu.solve)
    except RuntimeError:
        precond = None
    x, _ = bicgstab(a_mat, rhs, rtol=1e-13, atol=1e-13, M=precond,
                    maxiter=20 * max(100, n))
    if np.max(np.abs(a_mat @ x - rhs)) <= RESIDUAL_TOLERANCE:
        return x
    x = spsolve(a_mat.tocsc(), rhs)
    resid = np.max(np.abs(a_mat @ x - rhs))
    if resid > RESIDUAL_TOLERANCE:
        raise RuntimeError(f"absorbing-chain solve residual {resid:.3e}")
    return x


def solve_drift_chain(lam: float, mu: float, m: int, alpha: float,
                      n_max: int) -> DriftChainSolution:
    """Build and solve the (N, A) absorbing chain for uniform connection.

    Transitions from transient (N, A), with births shut off at the
    reflecting boundary N = n_max:

    * birth (rate lam): A+1 with the similarity/conversion probability,
      else A unchanged;
    * death (rate N*mu): A-1 with probability A/N, else A unchanged.

    Absorbing classes: pure-first {A = N >= 1}; pure-second {A = 0} plus
    extinction {N = 0}, which is counted as non-fixation exactly like the
    Monte Carlo side does.
    """
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    _check_tail(lam / mu, n_max)

    n_states = n_max * (n_max - 1) // 2
    index = DriftChainSolution.index
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    rhs_first = np.zeros(n_states)
    rhs_second = np.zeros(n_states)

    for n in range(2, n_max + 1):
        birth_rate = lam if n < n_max else 0.0
        death_rate = n * mu
        total = birth_rate + death_rate
        for a in range(1, n):
            s = index(n, a)
            if birth_rate:
                q = birth_aware_probability(n, a, m, alpha)
                # both birth destinations are transient
                rows.append(s); cols.append(index(n + 1, a + 1)); vals.append(birth_rate * q / total)
                rows.append(s); cols.append(index(n + 1, a)); vals.append(birth_rate * (1.0 - q) / total)
            p_dead_aware = (a * mu) / total
            p_dead_unaware = ((n - a) * mu) / total
            if a == 1:
                rhs_second[s] += p_dead_aware        # (N-1, 0) is pure-second
            else:
                rows.append(s); cols.append(index(n - 1, a - 1)); vals.append(p_dead_aware)
            if a == n - 1:
                rhs_first[s] += p_dead_unaware       # (N-1, N-1) is pure-first
            else:
                rows.append(s); cols.append(index(n - 1, a)); vals.append(p_dead_unaware)

    jump = sparse.csr_matrix(
        (vals, (rows, cols)), shape=(n_states, n_states), dtype=float
    )
    system = (sparse.identity(n_states, format="csr") - jump).tocsr()
    h_first = _solve_sparse(system, rhs_first)
    h_second = _solve_sparse(system, rhs_second)
    return DriftChainSolution(n_max=n_max, pure_first=h_first, pure_second=h_second)


def drift_fixation_exact(lam: float, mu: float, m: int, alpha: float,
                         n0: int, a0: int, n_max: int | None = None,
                         mechanism: str = "uniform") -> float:
    """Exact fixation probability of the aware label under uniform-connection
    drift, starting from n0 individuals of which a0 are aware."""
    if mechanism != "uniform":
        raise ValueError(
            "exact drift fixation requires the uniform mechanism; degree-"
            "weighted attachment makes (N, A) non-Markov"
        )
    if lam <= 0 or mu <= 0:
        raise ValueError(f"rates must be positive: lam={lam}, mu={mu}")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    if not 0 <= a0 <= n0 or n0 < 1:
        raise ValueError(f"need 0 <= a0 <= n0, n0 >= 1; got n0={n0}, a0={a0}")
    if a0 == n0:
        return 1.0
    if a0 == 0:
        return 0.0
    if n_max is None:
        n_max = max(default_n_max(lam, mu), n0)
    elif n_max < n0:
        raise ValueError(f"n_max={n_max} < n0={n0}")
    solution = solve_drift_chain(lam, mu, m, alpha, n_max)
    return solution.fixation(n0, a0)
