"""Hot numerical kernels: pair-generator assembly, stationary solves, the
per-edge message sweep, the scalar ensemble solver, and the Gillespie event
loop.

All functions here are written in njit-compatible style and compiled with
numba unless SISPAIR_BACKEND=numpy (see `_backend`).  Joint-state indexing
convention, used everywhere: a node state s is 0..K-1 for the susceptible
sub-states S(1)..S(K) and K for infectious; a pair state (s1, s2) has flat
index s1*(K+1) + s2.
"""

import numpy as np

from ._backend import BACKEND, jit


# ---------------------------------------------------------------------------
# pair generator and stationary distribution
# ---------------------------------------------------------------------------

def _build_q_impl(K, beta, gamma, a, b):
    """Dense (K+1)^2 x (K+1)^2 rate matrix for one edge.

    a[x], b[x] are the external infection rates on node 1 resp. node 2 when
    that node is in susceptible sub-state x+1 (0-based).  Transitions:
    recovery I -> S(K) at rate 1 for each node; decay S(x+1) -> S(x) at rate
    gamma; infection of a susceptible node at its external rate plus beta if
    its partner is infectious.  Diagonals make every row sum to zero.
    """
    P = K + 1
    L = P * P
    Q = np.zeros((L, L))
    for s1 in range(P):
        for s2 in range(P):
            i = s1 * P + s2
            if s1 == K:   # node 1 infectious: recovers to S(K) = index K-1
                Q[i, (K - 1) * P + s2] += 1.0
            if s2 == K:
                Q[i, s1 * P + (K - 1)] += 1.0
            if 1 <= s1 <= K - 1:  # decay S(x+1) -> S(x)
                Q[i, (s1 - 1) * P + s2] += gamma
            if 1 <= s2 <= K - 1:
                Q[i, s1 * P + (s2 - 1)] += gamma
            if s1 < K:    # infection of node 1
                rate = a[s1] + (beta if s2 == K else 0.0)
                Q[i, K * P + s2] += rate
            if s2 < K:
                rate = b[s2] + (beta if s1 == K else 0.0)
                Q[i, s1 * P + K] += rate
    for i in range(L):
        d = 0.0
        for jj in range(L):
            if jj != i:
                d += Q[i, jj]
        Q[i, i] = -d
    return Q


def _stationary_impl(Q):
    """Probability vector P with P @ Q = 0.

    One column of Q^T (equivalently: one balance equation) is replaced by
    the normalization row sum(P) = 1; the resulting dense system is solved
    by LU.  Small negative round-off entries are clamped and the vector
    renormalized.
    """
    L = Q.shape[0]
    M = Q.T.copy()
    for jj in range(L):
        M[0, jj] = 1.0
    rhs = np.zeros(L)
    rhs[0] = 1.0
    p = np.linalg.solve(M, rhs)
    for i in range(L):
        if p[i] < 0.0:
            p[i] = 0.0
    s = p.sum()
    return p / s


def _messages_impl(p, K, beta):
    """Both outgoing message vectors of an edge from its joint distribution.

    Returns (phi1, phi2): phi1[x] = beta*P(node2 = I | node1 = S(x+1)) and
    symmetrically for phi2.  A sub-state never visited yields message 0.
    """
    P = K + 1
    phi1 = np.zeros(K)
    phi2 = np.zeros(K)
    for x in range(K):
        num1 = p[x * P + K]
        den1 = 0.0
        num2 = p[K * P + x]
        den2 = 0.0
        for s in range(P):
            den1 += p[x * P + s]
            den2 += p[s * P + x]
        phi1[x] = beta * num1 / den1 if den1 > 1e-300 else 0.0
        phi2[x] = beta * num2 / den2 if den2 > 1e-300 else 0.0
    return phi1, phi2


_build_q = jit(_build_q_impl)
_stationary = jit(_stationary_impl)
_messages = jit(_messages_impl)


# ---------------------------------------------------------------------------
# per-edge message sweep (Jacobi)
# ---------------------------------------------------------------------------

def _sweep_impl(src, dst, rev, undirected, n, phi, K, beta, gamma, damping):
    """One synchronous sweep of the pair fixed point over all edges.

    phi has shape (2m, K); row e holds the message of directed edge
    (j -> k): the rate at which k infects j given j in S(x+1).  Each
    undirected edge is solved once, emitting both directed messages.
    Returns (new_phi, max_abs_change).
    """
    m2 = phi.shape[0]
    rowsum = np.zeros((n, K))
    for e in range(m2):
        j = src[e]
        for x in range(K):
            rowsum[j, x] += phi[e, x]
    new_phi = np.empty_like(phi)
    maxdiff = 0.0
    for t in range(len(undirected)):
        e = undirected[t]
        re = rev[e]
        j = src[e]
        k = dst[e]
        a = np.empty(K)
        b = np.empty(K)
        for x in range(K):
            a[x] = rowsum[j, x] - phi[e, x]   # external field on j, excluding k
            b[x] = rowsum[k, x] - phi[re, x]  # external field on k, excluding j
        Q = _build_q(K, beta, gamma, a, b)
        p = _stationary(Q)
        phi1, phi2 = _messages(p, K, beta)
        for x in range(K):
            v1 = damping * phi[e, x] + (1.0 - damping) * phi1[x]
            v2 = damping * phi[re, x] + (1.0 - damping) * phi2[x]
            d1 = abs(v1 - phi[e, x])
            d2 = abs(v2 - phi[re, x])
            if d1 > maxdiff:
                maxdiff = d1
            if d2 > maxdiff:
                maxdiff = d2
            new_phi[e, x] = v1
            new_phi[re, x] = v2
    return new_phi, maxdiff


_sweep_numba = jit(_sweep_impl)


def _sweep_numpy(src, dst, rev, undirected, n, phi, K, beta, gamma, damping):
    """Vectorized numpy version of `_sweep_impl` (batched LU over edges)."""
    P = K + 1
    L = P * P
    rowsum = np.zeros((n, K))
    np.add.at(rowsum, src, phi)
    e = undirected
    re = rev[e]
    a = rowsum[src[e]] - phi[e]    # (m, K)
    b = rowsum[dst[e]] - phi[re]
    m = len(e)

    Q = np.zeros((m, L, L))
    s1 = np.repeat(np.arange(P), P)
    s2 = np.tile(np.arange(P), P)
    flat = np.arange(L)
    for i, (x1, x2) in enumerate(zip(s1, s2)):
        if x1 == K:
            Q[:, i, (K - 1) * P + x2] += 1.0
        if x2 == K:
            Q[:, i, x1 * P + (K - 1)] += 1.0
        if 1 <= x1 <= K - 1:
            Q[:, i, (x1 - 1) * P + x2] += gamma
        if 1 <= x2 <= K - 1:
            Q[:, i, x1 * P + (x2 - 1)] += gamma
        if x1 < K:
            Q[:, i, K * P + x2] += a[:, x1] + (beta if x2 == K else 0.0)
        if x2 < K:
            Q[:, i, x1 * P + K] += b[:, x2] + (beta if x1 == K else 0.0)
    Q[:, flat, flat] -= Q.sum(axis=2)

    M = np.swapaxes(Q, 1, 2).copy()
    M[:, 0, :] = 1.0
    rhs = np.zeros((m, L, 1))
    rhs[:, 0, 0] = 1.0
    p = np.linalg.solve(M, rhs)[..., 0]
    np.clip(p, 0.0, None, out=p)
    p /= p.sum(axis=1, keepdims=True)

    p3 = p.reshape(m, P, P)
    den1 = p3.sum(axis=2)[:, :K]          # P(node1 = S(x))
    den2 = p3.sum(axis=1)[:, :K]
    with np.errstate(divide="ignore", invalid="ignore"):
        phi1 = np.where(den1 > 1e-300, beta * p3[:, :K, K] / den1, 0.0)
        phi2 = np.where(den2 > 1e-300, beta * p3[:, K, :K] / den2, 0.0)
    new_phi = np.empty_like(phi)
    new_phi[e] = damping * phi[e] + (1.0 - damping) * phi1
    new_phi[re] = damping * phi[re] + (1.0 - damping) * phi2
    maxdiff = float(np.max(np.abs(new_phi - phi))) if len(phi) else 0.0
    return new_phi, maxdiff


def sweep(src, dst, rev, undirected, n, phi, K, beta, gamma, damping):
    if BACKEND == "numba":
        return _sweep_numba(src, dst, rev, undirected, n, phi, K, beta,
                            gamma, damping)
    return _sweep_numpy(src, dst, rev, undirected, n, phi, K, beta,
                        gamma, damping)


# ---------------------------------------------------------------------------
# scalar (edge-homogeneous ensemble) solver
# ---------------------------------------------------------------------------

def _scalar_iterate_impl(q, beta, K, gamma, phi0, tol, max_iter, damping):
    """Fixed point of the single-edge system with a = b = q*phi.

    Returns (phi, iterations, last_change).
    """
    phi = phi0.copy()
    a = np.empty(K)
    diff = np.inf
    it = 0
    while it < max_iter:
        it += 1
        for x in range(K):
            a[x] = q * phi[x]
        Q = _build_q(K, beta, gamma, a, a)
        p = _stationary(Q)
        phi1, _phi2 = _messages(p, K, beta)
        diff = 0.0
        for x in range(K):
            v = damping * phi[x] + (1.0 - damping) * phi1[x]
            d = abs(v - phi[x])
            if d > diff:
                diff = d
            phi[x] = v
        if diff < tol:
            break
    return phi, it, diff


scalar_iterate = jit(_scalar_iterate_impl)


# ---------------------------------------------------------------------------
# Gillespie event loop (SIS and SIS^K; K=1 is plain SIS)
# ---------------------------------------------------------------------------

def _gillespie_impl(indptr, adj, K, beta, gamma, t_max, burn_in, seed,
                    state0, qs_memory, snapshot_rate, reactivate, grid,
                    n_batches, collect_dt, dt_cap, joint, joint_size):
    """Exact continuous-time simulation of SIS^K on a graph.

    Event selection uses per-node composition-rejection: the total putative
    rate is n_I (recoveries) + gamma*n_decayable (sub-state decays) +
    beta*sum(deg over infectious) (transmission attempts).  A transmission
    attempt picks an infectious node proportional to degree (rejection
    against deg_max) and a uniform neighbor; attempts on non-susceptible
    targets are phantom events, which keeps the process statistically exact.

    Absorption (no infectious nodes) is handled by the stored-configuration
    quasi-stationary method: the state jumps to a uniform sample from a
    reservoir of past configurations, refreshed at `snapshot_rate` per unit
    of simulated time (time-weighted so the reservoir samples the
    occupancy measure rather than the event-rate-weighted one).

    Returns:
      grid_counts      infected count at each requested grid time
      batch_w          per-batch integral of the infected count over
                       [burn_in, t_max] (n_batches batches)
      occ_w            per-batch time-weighted node counts per augmented
                       state, shape (n_batches, K+1)
      joint_occ        per-batch time-weighted occupancy of the joint state
                       (only when `joint`; otherwise shape (n_batches, 1))
      dt_samples       inter-infection waiting times (when collect_dt)
      rec_samples      recovery time of each collected waiting time
      cens_recov       recovery times of nodes still waiting at t_max
      counters         (infection events, absorptions, absorptions after
                       burn-in, censored waits, dt count)
    """
    np.random.seed(seed)
    n = len(indptr) - 1
    deg = np.empty(n, dtype=np.int64)
    deg_max = 0
    for i in range(n):
        deg[i] = indptr[i + 1] - indptr[i]
        if deg[i] > deg_max:
            deg_max = deg[i]

    s = state0.copy()
    inf_nodes = np.empty(n, dtype=np.int64)
    inf_pos = np.full(n, -1, dtype=np.int64)
    dec_nodes = np.empty(n, dtype=np.int64)
    dec_pos = np.full(n, -1, dtype=np.int64)
    n_inf = 0
    n_dec = 0
    sumdeg_inf = 0
    for i in range(n):
        if s[i] == K:
            inf_nodes[n_inf] = i
            inf_pos[i] = n_inf
            n_inf += 1
            sumdeg_inf += deg[i]
        elif s[i] >= 1:
            dec_nodes[n_dec] = i
            dec_pos[i] = n_dec
            n_dec += 1

    reservoir = np.empty((qs_memory, n), dtype=np.int8)
    reservoir[0] = s
    res_count = 1

    state_count = np.zeros(K + 1, dtype=np.int64)
    for i in range(n):
        state_count[s[i]] += 1

    grid_counts = np.zeros(len(grid), dtype=np.int64)
    gi = 0
    batch_w = np.zeros(n_batches)
    occ_w = np.zeros((n_batches, K + 1))
    joint_occ = np.zeros((n_batches, joint_size))
    window = t_max - burn_in
    batch_len = window / n_batches

    dt_samples = np.empty(dt_cap if collect_dt else 1)
    rec_samples = np.empty(dt_cap if collect_dt else 1)
    dt_count = 0
    t_recov = np.zeros(n)
    waiting = np.zeros(n, dtype=np.int8)

    infections = 0
    absorptions = 0
    absorptions_meas = 0

    t = 0.0
    while t < t_max:
        if n_inf == 0 and not reactivate:
            # terminal absorption (e.g. beta = 0): the rest of the run has
            # no infectious nodes
            absorptions += 1
            if t >= burn_in:
                absorptions_meas += 1
            break
        if n_inf == 0:
            # absorbed: reactivate from the reservoir (no time elapses)
            absorptions += 1
            if t >= burn_in:
                absorptions_meas += 1
            pick = int(np.random.random() * res_count)
            s[:] = reservoir[pick]
            n_inf = 0
            n_dec = 0
            sumdeg_inf = 0
            state_count[:] = 0
            for i in range(n):
                inf_pos[i] = -1
                dec_pos[i] = -1
                state_count[s[i]] += 1
            for i in range(n):
                if s[i] == K:
                    inf_nodes[n_inf] = i
                    inf_pos[i] = n_inf
                    n_inf += 1
                    sumdeg_inf += deg[i]
                elif s[i] >= 1:
                    dec_nodes[n_dec] = i
                    dec_pos[i] = n_dec
                    n_dec += 1
            if n_inf == 0:
                # reservoir only holds absorbed states: nothing to do
                break

        rate_rec = float(n_inf)
        rate_dec = gamma * n_dec
        rate_inf = beta * sumdeg_inf
        total = rate_rec + rate_dec + rate_inf
        dt = -np.log(np.random.random()) / total
        t_new = t + dt
        if t_new > t_max:
            t_new = t_max

        # record grid samples and measurement integrals for [t, t_new)
        while gi < len(grid) and grid[gi] <= t_new:
            grid_counts[gi] = n_inf
            gi += 1
        lo = t if t > burn_in else burn_in
        if t_new > lo:
            # spread the interval over the batches it covers
            seg_lo = lo
            while seg_lo < t_new:
                bi = int((seg_lo - burn_in) / batch_len)
                if bi >= n_batches:
                    bi = n_batches - 1
                seg_hi = burn_in + (bi + 1) * batch_len
                if seg_hi > t_new:
                    seg_hi = t_new
                w = seg_hi - seg_lo
                batch_w[bi] += w * n_inf
                for c in range(K + 1):
                    occ_w[bi, c] += w * state_count[c]
                if joint:
                    idx = 0
                    for i in range(n):
                        idx = idx * (K + 1) + s[i]
                    joint_occ[bi, idx] += w
                seg_lo = seg_hi
        t = t + dt
        if t >= t_max:
            break

        # reservoir refresh at a fixed rate per unit time, storing the
        # pre-event state: the probability is proportional to the dwell
        # time just spent in `s`, so the reservoir samples the occupancy
        # measure of the surviving process
        if np.random.random() < snapshot_rate * dt and n_inf > 0:
            if res_count < qs_memory:
                reservoir[res_count] = s
                res_count += 1
            else:
                reservoir[int(np.random.random() * qs_memory)] = s

        # choose and apply the event
        r = np.random.random() * total
        if r < rate_rec:
            j = inf_nodes[int(np.random.random() * n_inf)]
            # recovery: I -> S(K)
            p = inf_pos[j]
            last = inf_nodes[n_inf - 1]
            inf_nodes[p] = last
            inf_pos[last] = p
            inf_pos[j] = -1
            n_inf -= 1
            sumdeg_inf -= deg[j]
            s[j] = K - 1
            state_count[K] -= 1
            state_count[K - 1] += 1
            if K >= 2:
                dec_nodes[n_dec] = j
                dec_pos[j] = n_dec
                n_dec += 1
            if collect_dt:
                t_recov[j] = t
                waiting[j] = 1
        elif r < rate_rec + rate_dec:
            j = dec_nodes[int(np.random.random() * n_dec)]
            s[j] -= 1
            state_count[s[j] + 1] -= 1
            state_count[s[j]] += 1
            if s[j] == 0:
                p = dec_pos[j]
                last = dec_nodes[n_dec - 1]
                dec_nodes[p] = last
                dec_pos[last] = p
                dec_pos[j] = -1
                n_dec -= 1
        else:
            # transmission attempt: source ~ degree among infectious
            while True:
                j = inf_nodes[int(np.random.random() * n_inf)]
                if np.random.random() * deg_max < deg[j]:
                    break
            k = adj[indptr[j] + int(np.random.random() * deg[j])]
            if s[k] < K:
                if s[k] >= 1:
                    p = dec_pos[k]
                    last = dec_nodes[n_dec - 1]
                    dec_nodes[p] = last
                    dec_pos[last] = p
                    dec_pos[k] = -1
                    n_dec -= 1
                state_count[s[k]] -= 1
                state_count[K] += 1
                s[k] = K
                inf_nodes[n_inf] = k
                inf_pos[k] = n_inf
                n_inf += 1
                sumdeg_inf += deg[k]
                infections += 1
                if collect_dt and waiting[k] == 1:
                    waiting[k] = 0
                    if t_recov[k] >= burn_in and dt_count < dt_cap:
                        dt_samples[dt_count] = t - t_recov[k]
                        rec_samples[dt_count] = t_recov[k]
                        dt_count += 1
            # else: phantom event (target already infectious)

    while gi < len(grid):
        grid_counts[gi] = n_inf
        gi += 1

    censored = 0
    cens_recov = np.empty(n)
    for i in range(n):
        if waiting[i] == 1 and t_recov[i] >= burn_in:
            cens_recov[censored] = t_recov[i]
            censored += 1
    counters = np.array([infections, absorptions, absorptions_meas,
                         censored, dt_count], dtype=np.int64)
    return (grid_counts, batch_w, occ_w, joint_occ, dt_samples[:dt_count],
            rec_samples[:dt_count], cens_recov[:censored], counters)


gillespie = jit(_gillespie_impl)


def _first_event_impl(indptr, adj, K, beta, gamma, state0, seed):
    """Draw the first non-phantom event from a frozen configuration.

    Returns (kind, node): kind 0 = recovery, 1 = decay, 2 = infection.
    Used to unit-test the event selection machinery.
    """
    np.random.seed(seed)
    n = len(indptr) - 1
    deg = np.empty(n, dtype=np.int64)
    deg_max = 0
    for i in range(n):
        deg[i] = indptr[i + 1] - indptr[i]
        if deg[i] > deg_max:
            deg_max = deg[i]
    s = state0
    inf_nodes = np.empty(n, dtype=np.int64)
    dec_nodes = np.empty(n, dtype=np.int64)
    n_inf = 0
    n_dec = 0
    sumdeg_inf = 0
    for i in range(n):
        if s[i] == K:
            inf_nodes[n_inf] = i
            n_inf += 1
            sumdeg_inf += deg[i]
        elif s[i] >= 1:
            dec_nodes[n_dec] = i
            n_dec += 1
    rate_rec = float(n_inf)
    rate_dec = gamma * n_dec
    rate_inf = beta * sumdeg_inf
    total = rate_rec + rate_dec + rate_inf
    while True:
        r = np.random.random() * total
        if r < rate_rec:
            return 0, inf_nodes[int(np.random.random() * n_inf)]
        if r < rate_rec + rate_dec:
            return 1, dec_nodes[int(np.random.random() * n_dec)]
        while True:
            j = inf_nodes[int(np.random.random() * n_inf)]
            if np.random.random() * deg_max < deg[j]:
                break
        k = adj[indptr[j] + int(np.random.random() * deg[j])]
        if s[k] < K:
            return 2, k
        # phantom: redraw


first_event = jit(_first_event_impl)
