"""Joint dynamics of a single edge: the (K+1)^2-state generator, its
stationary distribution, message extraction, and the K=1 closed form.

State convention (shared by every module): a node state is 0..K-1 for the
susceptible sub-states S(1)..S(K) and K for infectious; the joint state
(s1, s2) of an edge has flat index s1*(K+1) + s2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import kernels


class RateError(ValueError):
    """Negative or otherwise invalid rate input."""


@dataclass(frozen=True, eq=False)
class PairGenerator:
    """Continuous-time rate matrix for one edge's joint dynamics."""

    K: int
    beta: float
    gamma: float
    a: np.ndarray       # external infection rates on node 1, length K
    b: np.ndarray       # external infection rates on node 2, length K
    matrix: np.ndarray  # dense (K+1)^2 x (K+1)^2


@dataclass(frozen=True, eq=False)
class PairDistribution:
    """Stationary probabilities over the (K+1)^2 joint states of an edge."""

    K: int
    probs: np.ndarray  # flat, length (K+1)^2

    def joint(self) -> np.ndarray:
        """(K+1, K+1) view indexed by (node-1 state, node-2 state)."""
        return self.probs.reshape(self.K + 1, self.K + 1)


def build_pair_generator(K: int, beta: float, gamma: float,
                         a, b) -> PairGenerator:
    """Assemble the (K+1)^2-state generator for one edge.

    Recovery I -> S(K) at rate 1 per node; decay S(x+1) -> S(x) at rate
    gamma per node; infection of node 1 in S(x) at rate a[x-1] plus beta if
    node 2 is infectious (and symmetrically for node 2).  gamma is accepted
    but unused when K=1.
    """
    if K < 1:
        raise RateError(f"K must be >= 1, got {K}")
    if beta <= 0:
        raise RateError(f"beta must be positive, got {beta}")
    if gamma < 0:
        raise RateError(f"gamma must be nonnegative, got {gamma}")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != (K,) or b.shape != (K,):
        raise RateError(f"a and b must have length K={K}")
    if np.any(a < 0) or np.any(b < 0):
        raise RateError("external rates must be nonnegative")
    Q = kernels._build_q(K, float(beta), float(gamma), a, b)
    return PairGenerator(K=K, beta=float(beta), gamma=float(gamma),
                         a=a, b=b, matrix=Q)


def stationary_distribution(Q: PairGenerator) -> PairDistribution:
    """The probability vector P with P @ Q = 0.

    Solved densely by replacing one balance equation with the normalization
    row.  Entries within round-off below zero are clamped and the vector
    renormalized.
    """
    try:
        p = kernels._stationary(Q.matrix)
    except Exception:
        # Singular beyond LU tolerance: fall back to a least-squares solve.
        L = Q.matrix.shape[0]
        M = np.vstack([Q.matrix.T, np.ones(L)])
        rhs = np.zeros(L + 1)
        rhs[-1] = 1.0
        p, *_ = np.linalg.lstsq(M, rhs, rcond=None)
        p = np.clip(p, 0.0, None)
        p /= p.sum()
    return PairDistribution(K=Q.K, probs=p)


def quasi_stationary_distribution(Q: PairGenerator) -> PairDistribution:
    """Stationary distribution conditioned on at least one infectious node.

    When the external rates vanish (an isolated edge) the all-susceptible
    block is absorbing and the plain stationary distribution collapses onto
    it; the quantity a resurrected (quasi-stationary) simulation measures is
    instead the leading left eigenvector of the generator restricted to the
    states with an infectious member.  Probability is zero outside those
    states.
    """
    K = Q.K
    P = K + 1
    flat = np.arange(P * P)
    alive = (flat // P == K) | (flat % P == K)
    sub = Q.matrix[np.ix_(alive, alive)]
    vals, vecs = scipy.linalg.eig(sub.T)
    lead = np.argmax(vals.real)
    v = vecs[:, lead].real
    v = np.abs(v)
    full = np.zeros(P * P)
    full[alive] = v / v.sum()
    return PairDistribution(K=K, probs=full)


def message_from_distribution(P: PairDistribution, beta: float,
                              which: str = "node-2") -> np.ndarray:
    """Outgoing message of one endpoint: beta * P(other = I | this = S(x)).

    ``which`` names the susceptible endpoint the message conditions on.
    Sub-states with vanishing probability (never visited) yield 0.
    """
    if which not in ("node-1", "node-2"):
        raise ValueError(f"which must be 'node-1' or 'node-2', got {which!r}")
    phi1, phi2 = kernels._messages(P.probs, P.K, float(beta))
    return phi1 if which == "node-1" else phi2


def psi(beta: float, x: float, y: float) -> float:
    """Closed-form K=1 message update.

    Equals the message emitted by the 4-state edge solve with external
    rates (x, y): the fixed point phi = psi(beta, q*phi, q*phi) on a
    (q+1)-regular graph is beta - 1/q.
    """
    return beta * (2 * x + x * y + x * x + beta * x + beta * y) / (
        (2 + x + y) * (1 + x + beta))
