"""One-node (K+1)-state Markov machinery: per-node infection rates, node
marginals, and the inter-infection survival function via the absorbing-state
matrix exponential (uniformization).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class OneNodeRates:
    """Infection rates of a node in each susceptible sub-state, plus the
    sub-state decay rate."""

    lam: np.ndarray  # length K; lam[x] applies in S(x+1)
    gamma: float

    @property
    def K(self) -> int:
        return len(self.lam)


def one_node_rates(g, msgs, node: int) -> OneNodeRates:
    """Total incoming message rate of one node, per susceptible sub-state.

    Sums the node's incident directed messages; isolated nodes get zeros.
    """
    idx = msgs.index
    lo, hi = idx.indptr[node], idx.indptr[node + 1]
    lam = msgs.values[lo:hi].sum(axis=0) if hi > lo else np.zeros(msgs.K)
    return OneNodeRates(lam=np.asarray(lam, dtype=float), gamma=msgs.gamma)


def _chain_generator(rates: OneNodeRates) -> np.ndarray:
    """Generator of the cyclic chain S(1)..S(K), I (state K)."""
    K = rates.K
    G = np.zeros((K + 1, K + 1))
    for x in range(K):
        G[x, K] += rates.lam[x]
        if x >= 1:
            G[x, x - 1] += rates.gamma
    G[K, K - 1] += 1.0  # recovery I -> S(K)
    np.fill_diagonal(G, G.diagonal() - G.sum(axis=1))
    return G


def one_node_stationary(rates: OneNodeRates):
    """Stationary distribution over {S(1)..S(K), I}.

    Returns (probs, degenerate): when every infection rate is zero the chain
    drains into S(1) and a point mass is returned with the flag set.
    """
    K = rates.K
    if np.all(rates.lam == 0.0):
        p = np.zeros(K + 1)
        p[0] = 1.0
        return p, True
    G = _chain_generator(rates)
    M = G.T.copy()
    M[0, :] = 1.0
    rhs = np.zeros(K + 1)
    rhs[0] = 1.0
    p = np.linalg.solve(M, rhs)
    p = np.clip(p, 0.0, None)
    return p / p.sum(), False


def absorbing_generator(rates: OneNodeRates) -> np.ndarray:
    """(K+1)x(K+1) rate matrix with the infectious state absorbing."""
    G = _chain_generator(rates)
    G[rates.K, :] = 0.0
    return G


def survival_function(rates: OneNodeRates, t_grid) -> np.ndarray:
    """P(Delta_I > t): probability of remaining susceptible for time t after
    a recovery (start state S(K)).

    Computed by uniformization of the absorbing chain with truncation error
    below 1e-12 per grid point.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid < 0):
        raise ValueError("t_grid must be nonnegative")
    K = rates.K
    R = absorbing_generator(rates)
    lam_max = float(np.max(-np.diag(R)))
    out = np.empty(len(t_grid))
    if lam_max == 0.0:
        out[:] = 1.0
        return out
    P = np.eye(K + 1) + R / lam_max  # stochastic matrix
    row = np.zeros(K + 1)
    row[K - 1] = 1.0  # start in S(K)
    for i, t in enumerate(t_grid):
        out[i] = 1.0 - _uniformized_entry(P, row, lam_max * t, K)
    return np.clip(out, 0.0, 1.0)


def _uniformized_entry(P, row, mu, target):
    """[e^{tR}]_{start,target} as a Poisson(mu) mixture of powers of P."""
    if mu == 0.0:
        return row[target]
    # iterate Poisson weights; stop once the remaining tail mass < 1e-12
    v = row.copy()
    weight = np.exp(-mu)
    if weight == 0.0:
        # very large mu: fall back to repeated squaring via scipy
        import scipy.linalg
        return float(
            (row @ scipy.linalg.expm((P - np.eye(len(row))) * mu))[target])
    acc = weight * v[target]
    cum = weight
    k = 0
    while 1.0 - cum > 1e-12:
        k += 1
        v = v @ P
        weight *= mu / k
        acc += weight * v[target]
        cum += weight
    return float(acc)


def mean_inter_infection_time(rates: OneNodeRates) -> float:
    """E[Delta_I]: mean absorption time of the chain started in S(K).

    Equals the integral of the survival function; computed exactly from the
    transient block.
    """
    K = rates.K
    R = absorbing_generator(rates)
    T = R[:K, :K]  # transient block over the susceptible sub-states
    tau = np.linalg.solve(-T, np.ones(K))
    return float(tau[K - 1])


def population_survival(per_node_rates, t_grid) -> np.ndarray:
    """Average per-node survival curves weighted by recovery flux.

    A node's recovery events occur at rate P_i(I); nodes that are infectious
    more often contribute proportionally more inter-infection samples.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    acc = np.zeros(len(t_grid))
    wsum = 0.0
    for rates in per_node_rates:
        p, degenerate = one_node_stationary(rates)
        w = 0.0 if degenerate else float(p[rates.K])
        if w == 0.0:
            continue
        acc += w * survival_function(rates, t_grid)
        wsum += w
    if wsum == 0.0:
        return np.ones(len(t_grid))
    return acc / wsum
