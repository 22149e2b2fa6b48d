"""Fixed-point solvers: the per-edge pair approximation on a graph, the
individual (mean-field) approximation, and the edge-homogeneous scalar
solver for infinite regular ensembles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels, temporal
from .graph import Graph, DirectedEdgeIndex, directed_edge_index, \
    mean_excess_degree


class SolverError(RuntimeError):
    """Non-finite values or other numerical failure during iteration."""


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-10          # L-inf tolerance on the message change
    max_iter: int = 100_000
    damping: float = 0.5
    init_phi: object = "half-beta"  # float, or "half-beta" for beta/2

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if not (0.0 <= self.damping < 1.0):
            raise ValueError("damping must be in [0, 1)")


@dataclass(frozen=True, eq=False)
class EdgeMessages:
    """Converged (or best-iterate) messages on every directed edge.

    values[e, x] is the rate at which k infects j given j in S(x+1), for
    directed edge e = (j -> k) in the accompanying index.
    """

    K: int
    beta: float
    gamma: float
    values: np.ndarray  # (2m, K)
    index: DirectedEdgeIndex


@dataclass(frozen=True, eq=False)
class NodeMarginals:
    """Per-node stationary probabilities over {S(1)..S(K), I}."""

    K: int
    probs: np.ndarray  # (n, K+1)

    @property
    def rho(self) -> np.ndarray:
        return self.probs[:, self.K]


@dataclass(frozen=True, eq=False)
class PairSolveResult:
    messages: EdgeMessages
    marginals: NodeMarginals
    iterations: int
    residual: float
    converged: bool


def resolve_gamma(beta: float, K: int, gamma, q: float) -> float:
    """gamma='auto' uses beta*q*sqrt(K-1) with q the mean excess degree."""
    if gamma == "auto" or gamma is None:
        return float(beta * q * np.sqrt(max(K - 1, 0)))
    g = float(gamma)
    if g < 0:
        raise ValueError("gamma must be nonnegative")
    return g


def _init_phi(cfg: SolverConfig, beta: float, shape) -> np.ndarray:
    if cfg.init_phi == "half-beta":
        val = beta / 2.0
    else:
        val = float(cfg.init_phi)
        if not (0.0 <= val <= beta):
            raise ValueError("init_phi must lie in [0, beta]")
    return np.full(shape, val)


def neighbor_sum(g: Graph, idx: DirectedEdgeIndex,
                 msgs: np.ndarray) -> np.ndarray:
    """External field per directed edge: for e = (i -> j), the sum of j's
    outgoing messages excluding the one toward i.

    msgs has shape (2m, K); the result has the same shape.
    """
    K = msgs.shape[1]
    rowsum = np.zeros((g.n, K))
    np.add.at(rowsum, idx.src, msgs)
    return rowsum[idx.dst] - msgs[idx.rev]


def node_marginals_from_messages(msgs: EdgeMessages) -> NodeMarginals:
    """Stationary marginals of each node's one-node chain driven by its
    incident messages."""
    idx = msgs.index
    n = idx.n
    K = msgs.K
    rowsum = np.zeros((n, K))
    np.add.at(rowsum, idx.src, msgs.values)
    probs = np.empty((n, K + 1))
    for i in range(n):
        rates = temporal.OneNodeRates(lam=rowsum[i], gamma=msgs.gamma)
        p, _ = temporal.one_node_stationary(rates)
        probs[i] = p
    return NodeMarginals(K=K, probs=probs)


def solve_pair_k(g: Graph, beta: float, K: int, gamma="auto",
                 cfg: SolverConfig = SolverConfig()) -> PairSolveResult:
    """Jacobi iteration of the pair self-consistency over all edges.

    Each sweep solves every undirected edge's (K+1)^2 stationary system at
    the previous iterate's external fields and emits both directed
    messages, damped against the previous values.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    if K < 1:
        raise ValueError("K must be >= 1")
    gamma = resolve_gamma(beta, K, gamma, mean_excess_degree(g))
    idx = directed_edge_index(g)
    phi = _init_phi(cfg, beta, (idx.n_directed, K))
    maxdiff = np.inf
    it = 0
    while it < cfg.max_iter:
        it += 1
        phi, maxdiff = kernels.sweep(idx.src, idx.dst, idx.rev,
                                     idx.undirected, g.n, phi, K,
                                     float(beta), gamma, cfg.damping)
        if not np.isfinite(maxdiff):
            raise SolverError(f"non-finite update at iteration {it}")
        if maxdiff < cfg.tol:
            break
    converged = maxdiff < cfg.tol
    # residual: undamped fixed-point defect of the final iterate
    _, residual = kernels.sweep(idx.src, idx.dst, idx.rev, idx.undirected,
                                g.n, phi, K, float(beta), gamma, 0.0)
    msgs = EdgeMessages(K=K, beta=float(beta), gamma=gamma, values=phi,
                        index=idx)
    marginals = node_marginals_from_messages(msgs)
    return PairSolveResult(messages=msgs, marginals=marginals,
                           iterations=it, residual=float(residual),
                           converged=bool(converged))


@dataclass(frozen=True, eq=False)
class MeanFieldResult:
    rho: np.ndarray
    iterations: int
    converged: bool


def solve_mean_field(g: Graph, beta: float,
                     cfg: SolverConfig = SolverConfig()) -> MeanFieldResult:
    """Fixed point of rho = beta*A*rho / (1 + beta*A*rho) from rho = 1."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    A = g.adjacency()
    rho = np.ones(g.n)
    it = 0
    diff = np.inf
    while it < cfg.max_iter:
        it += 1
        field = beta * (A @ rho)
        new = field / (1.0 + field)
        diff = float(np.max(np.abs(new - rho))) if g.n else 0.0
        rho = new
        if diff < cfg.tol:
            break
    return MeanFieldResult(rho=rho, iterations=it,
                           converged=diff < cfg.tol)


@dataclass(frozen=True, eq=False)
class ScalarSolveResult:
    phi: np.ndarray  # length K
    rho: float
    marginal: np.ndarray  # length K+1
    iterations: int
    residual: float
    converged: bool


def solve_regular_scalar(q: int, beta: float, K: int, gamma="auto",
                         cfg: SolverConfig = SolverConfig()) -> ScalarSolveResult:
    """Edge-homogeneous fixed point for the infinite (q+1)-regular ensemble.

    Every edge carries the same message vector phi, so the whole system
    reduces to one edge with external fields a = b = q*phi; the node
    marginal comes from the one-node chain with rates (q+1)*phi.
    """
    if q < 1 or int(q) != q:
        raise ValueError("q must be a positive integer")
    if beta <= 0:
        raise ValueError("beta must be positive")
    if K < 1:
        raise ValueError("K must be >= 1")
    gamma = resolve_gamma(beta, K, gamma, float(q))
    phi0 = _init_phi(cfg, beta, (K,))
    phi, it, diff = kernels.scalar_iterate(float(q), float(beta), K, gamma,
                                           phi0, cfg.tol, cfg.max_iter,
                                           cfg.damping)
    if not np.all(np.isfinite(phi)):
        raise SolverError("non-finite scalar iterate")
    rates = temporal.OneNodeRates(lam=(q + 1.0) * phi, gamma=gamma)
    p, _ = temporal.one_node_stationary(rates)
    return ScalarSolveResult(phi=phi, rho=float(p[K]), marginal=p,
                             iterations=int(it), residual=float(diff),
                             converged=diff < cfg.tol)
