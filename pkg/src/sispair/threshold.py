"""Epidemic-threshold estimators: spectral mean-field bound, the pair
fixed point beta = 1/lambda(A - beta*L/2 - I), the closed-form K=2 regular
result, and bisection on any endemic/extinct classifier.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg

from .graph import Graph, GraphError, directed_edge_index, spectral_radius
from .solver import SolverConfig, solve_pair_k, solve_regular_scalar

# converged mean rho above this counts as endemic; two orders above the
# default solver tol so incomplete convergence cannot flip the classifier
ENDEMIC_RHO = 1e-6


@dataclass(frozen=True)
class ThresholdResult:
    beta_c: float
    method: str
    iterations: int = 0
    bracket_width: float = 0.0
    diagnostics: dict = field(default_factory=dict)
    converged: bool = True


def threshold_mf(g: Graph) -> ThresholdResult:
    """Mean-field estimate 1/lambda(A)."""
    if g.m == 0:
        raise GraphError("graph has no edges; no epidemic possible")
    lam = spectral_radius(g)
    return ThresholdResult(beta_c=1.0 / lam, method="mf",
                           diagnostics={"lambda": lam})


def _lambda_max_sym(M, n) -> float:
    """Largest eigenvalue of a symmetric sparse matrix."""
    if n < 50:
        return float(np.max(np.linalg.eigvalsh(M.toarray())))
    val = scipy.sparse.linalg.eigsh(M, k=1, which="LA",
                                    return_eigenvectors=False, tol=0)
    return float(val[0])


def threshold_pair(g: Graph, tol: float = 1e-10) -> ThresholdResult:
    """Pair-approximation threshold: fixed point of
    beta -> 1/lambda(A - beta*L/2 - I), iterated from the mean-field value
    with relaxation if the iteration oscillates."""
    if g.m == 0:
        raise GraphError("graph has no edges; no epidemic possible")
    if tol <= 0:
        raise ValueError("tol must be positive")
    A = g.adjacency()
    L = g.laplacian()
    eye = sp.identity(g.n, format="csr")
    beta = threshold_mf(g).beta_c
    relax = 1.0
    prev_step = 0.0
    for it in range(1, 10_001):
        lam = _lambda_max_sym(A - (beta / 2.0) * L - eye, g.n)
        if lam <= 0:
            raise ArithmeticError("nonpositive leading eigenvalue")
        new = 1.0 / lam
        step = new - beta
        if prev_step * step < 0:  # oscillating: relax
            relax = 0.5
        beta_next = beta + relax * step
        if abs(beta_next - beta) < tol:
            lam_final = _lambda_max_sym(A - (beta_next / 2.0) * L - eye, g.n)
            return ThresholdResult(beta_c=beta_next, method="pair",
                                   iterations=it,
                                   diagnostics={"lambda": lam_final})
        prev_step = step
        beta = beta_next
    return ThresholdResult(beta_c=beta, method="pair", iterations=10_000,
                           converged=False)


def threshold_pair_regular_k2(q: int) -> ThresholdResult:
    """Closed-form K=2 threshold for the (q+1)-regular ensemble."""
    if q < 1:
        raise ValueError("q must be >= 1")
    q = float(q)
    beta_c = (1 - 2 * q**3 + 4 * q
              + (2 * q + 1) * np.sqrt(4 * q * (q + 1)**3 + 1)) / (
                  2 * q**2 * (q + 2)**2)
    return ThresholdResult(beta_c=float(beta_c), method="regular_k2")


def linearized_edge_operator(g: Graph, beta: float) -> np.ndarray:
    """Dense 2m x 2m linearization of the K=1 message map at the trivial
    fixed point.  Test-scale oracle (n <= 500) for the pair threshold: its
    leading eigenvalue is 1 exactly at the threshold."""
    if g.n > 500:
        raise ValueError("dense edge operator is built only for n <= 500")
    idx = directed_edge_index(g)
    m2 = idx.n_directed
    w = beta * (beta + 2) / (2 * (beta + 1))
    v = beta**2 / (2 * (beta + 1))
    M = np.zeros((m2, m2))
    for e in range(m2):
        i, j = idx.src[e], idx.dst[e]
        # B_ij term: messages out of j, excluding the edge back to i
        for f in range(idx.indptr[j], idx.indptr[j + 1]):
            if idx.dst[f] != i:
                M[e, f] += w
        # B_ji term: messages out of i, excluding the edge to j
        for f in range(idx.indptr[i], idx.indptr[i + 1]):
            if idx.dst[f] != j:
                M[e, f] += v
    return M


def leading_eigenvalue(M: np.ndarray) -> float:
    """Spectral radius of a dense nonnegative matrix (Perron eigenvalue)."""
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def threshold_bisect(target, K: int, gamma="auto",
                     cfg: SolverConfig | None = None,
                     bracket=(0.05, 2.0),
                     resolution: float = 1e-4) -> ThresholdResult:
    """Bisection on the endemic classifier (converged mean rho > 1e-6).

    ``target`` is either a Graph (full per-edge solve) or an integer excess
    degree q (infinite regular ensemble, scalar solve).  The bracket is
    verified and auto-expanded by up to 4 doublings on each side.
    """
    if cfg is None:
        cfg = SolverConfig()
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise ValueError("bracket must satisfy lo < hi")

    if isinstance(target, Graph):
        def endemic(beta):
            res = solve_pair_k(target, beta, K, gamma, cfg)
            return float(np.mean(res.marginals.rho)) > ENDEMIC_RHO
    else:
        q = int(target)

        def endemic(beta):
            res = solve_regular_scalar(q, beta, K, gamma, cfg)
            return res.rho > ENDEMIC_RHO

    evals = 0
    for _ in range(4):
        if endemic(lo):
            lo /= 2.0
            evals += 1
        else:
            break
    else:
        raise ArithmeticError(f"no extinct phase found down to beta={lo}")
    for _ in range(4):
        if not endemic(hi):
            hi *= 2.0
            evals += 1
        else:
            break
    else:
        raise ArithmeticError(f"no endemic phase found up to beta={hi}")

    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        evals += 1
        if endemic(mid):
            hi = mid
        else:
            lo = mid
    return ThresholdResult(beta_c=0.5 * (lo + hi), method="bisect",
                           iterations=evals, bracket_width=hi - lo,
                           diagnostics={"K": K})
