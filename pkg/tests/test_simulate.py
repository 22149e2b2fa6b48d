import numpy as np
import pytest
import scipy.stats

from sispair import graph as graphmod, kernels, pair_dynamics as pd, simulate
from sispair.simulate import SimConfig


class TestSimConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            SimConfig(beta=-0.1)
        with pytest.raises(ValueError):
            SimConfig(beta=0.5, burn_in=2000.0, t_max=1000.0)
        with pytest.raises(ValueError):
            SimConfig(beta=0.5, K=0)
        with pytest.raises(ValueError):
            SimConfig(beta=0.5, qs_memory=0)
        with pytest.raises(ValueError):
            SimConfig(beta=0.5, snapshot_rate=0.0)

    def test_burn_in_default(self):
        assert SimConfig(beta=0.5, t_max=800.0).burn_in_time == 400.0


class TestPureDeathProcess:
    def test_beta_zero_decays_to_empty(self, k4):
        cfg = SimConfig(beta=0.0, t_max=200.0, seed=5)
        traj = simulate.gillespie_run(k4, cfg)
        assert traj.infection_events == 0
        assert traj.infected[-1] == 0
        assert traj.qs_mean == 0.0

    def test_beta_zero_all_samples_censored(self, k4):
        cfg = SimConfig(beta=0.0, t_max=200.0, burn_in=1.0, seed=5)
        with pytest.raises(RuntimeError):
            simulate.inter_infection_times(k4, cfg)


class TestDeterminism:
    def test_same_seed_same_trajectory(self, k4):
        cfg = SimConfig(beta=0.8, t_max=300.0, seed=12)
        t1 = simulate.gillespie_run(k4, cfg)
        t2 = simulate.gillespie_run(k4, cfg)
        assert np.array_equal(t1.infected, t2.infected)
        assert t1.qs_mean == t2.qs_mean
        assert t1.infection_events == t2.infection_events

    def test_k1_sisk_run_identical_to_sis_run(self, k4):
        cfg = SimConfig(beta=0.8, t_max=300.0, seed=12, K=1)
        t1 = simulate.gillespie_run(k4, cfg)
        t2 = simulate.gillespie_sisk_run(k4, cfg)
        assert np.array_equal(t1.infected, t2.infected)
        assert t1.infection_events == t2.infection_events

    def test_different_seed_differs(self, k4):
        c1 = SimConfig(beta=0.8, t_max=300.0, seed=12)
        c2 = SimConfig(beta=0.8, t_max=300.0, seed=13)
        t1 = simulate.gillespie_run(k4, c1)
        t2 = simulate.gillespie_run(k4, c2)
        assert not np.array_equal(t1.infected, t2.infected)


class TestEventRates:
    def _chi2_check(self, g, K, beta, gamma, state0, n_draws=100_000):
        """Empirical next-event distribution vs theoretical rates."""
        state0 = np.asarray(state0, dtype=np.int8)
        counts = {}
        for seed in range(n_draws):
            kind, node = kernels.first_event(g.indptr, g.indices, K,
                                             beta, gamma, state0, seed)
            counts[(int(kind), int(node))] = counts.get(
                (int(kind), int(node)), 0) + 1
        # theoretical per-event probabilities
        probs = {}
        n = g.n
        deg = g.degrees
        n_inf_nb = np.zeros(n)
        for i in range(n):
            if state0[i] == K:
                for j in g.neighbors(i):
                    n_inf_nb[j] += 1
        total = 0.0
        for i in range(n):
            if state0[i] == K:
                probs[(0, i)] = 1.0
                total += 1.0
            else:
                if 1 <= state0[i] <= K - 1:
                    probs[(1, i)] = gamma
                    total += gamma
                if n_inf_nb[i] > 0 and state0[i] < K:
                    probs[(2, i)] = beta * n_inf_nb[i]
                    total += beta * n_inf_nb[i]
        keys = sorted(probs)
        expected = np.array([probs[k] / total for k in keys]) * n_draws
        observed = np.array([counts.get(k, 0) for k in keys], dtype=float)
        # fold any stray outcomes into the smallest bin to keep totals equal
        stray = n_draws - observed.sum()
        assert stray == 0, f"unexpected events observed: {counts}"
        _, p = scipy.stats.chisquare(observed, expected)
        return p

    def test_first_event_distribution_sis(self, path3):
        # infectious middle node, susceptible leaves
        p = self._chi2_check(path3, 1, 0.7, 0.0, [0, 1, 0])
        assert p > 0.01

    def test_first_event_distribution_sisk(self, k4):
        # mixed sub-states exercise recovery, decay and infection together
        p = self._chi2_check(k4, 3, 0.5, 1.3, [3, 1, 2, 0])
        assert p > 0.01


class TestTwoNodeExactness:
    def test_k1_matches_exact_chain(self, single_edge):
        beta = 1.5
        pg = pd.build_pair_generator(1, beta, 0.0, [0.0], [0.0])
        target = pd.quasi_stationary_distribution(pg).probs
        cfg = SimConfig(beta=beta, t_max=20000.0, seed=7, K=1)
        mean, se = simulate.joint_occupancy(single_edge, cfg)
        live = se > 1e-9
        z = np.abs(mean - target)[live] / se[live]
        assert np.max(z) < 3.0

    def test_large_beta_occupancy(self, single_edge):
        # at beta = 1000 the pair is pinned near the doubly-infectious state
        beta = 1000.0
        pg = pd.build_pair_generator(1, beta, 0.0, [0.0], [0.0])
        target = pd.quasi_stationary_distribution(pg).probs
        cfg = SimConfig(beta=beta, t_max=2000.0, seed=3, K=1)
        mean, _ = simulate.joint_occupancy(single_edge, cfg)
        assert abs(mean[3] - target[3]) < 0.01


class TestSiskMechanics:
    def test_gamma_zero_never_decays(self, k4):
        # starting all-infected with no decay, the lowest sub-state is
        # unreachable
        cfg = SimConfig(beta=0.9, t_max=500.0, seed=2, K=2, gamma=0.0)
        traj = simulate.gillespie_sisk_run(k4, cfg)
        assert traj.state_split is not None
        assert traj.state_split[0] == 0.0

    def test_state_split_normalized(self, k4):
        cfg = SimConfig(beta=0.9, t_max=500.0, seed=2, K=3, gamma=1.0)
        traj = simulate.gillespie_sisk_run(k4, cfg)
        assert traj.state_split.sum() == pytest.approx(1.0, abs=1e-12)

    def test_lumping_small_graph(self, k4):
        # lumped SIS^K statistics agree with plain SIS within error bars
        beta = 1.0
        sis = simulate.gillespie_run(
            k4, SimConfig(beta=beta, t_max=20000.0, seed=21))
        sisk = simulate.gillespie_sisk_run(
            k4, SimConfig(beta=beta, t_max=20000.0, seed=22, K=4, gamma=2.0))
        comb = np.hypot(sis.qs_stderr, sisk.qs_stderr)
        assert abs(sis.qs_mean - sisk.qs_mean) < 3 * comb


class TestSubcriticalFlag:
    def test_below_threshold_flagged(self):
        g = graphmod.generate_random_regular(2000, 3, seed=8)
        cfg = SimConfig(beta=0.3, t_max=800.0, seed=1)
        _, _, sub = simulate.quasistationary_fraction(g, cfg)
        assert sub

    def test_above_threshold_not_flagged(self):
        g = graphmod.generate_random_regular(2000, 3, seed=8)
        cfg = SimConfig(beta=0.8, t_max=400.0, seed=1)
        mean, _, sub = simulate.quasistationary_fraction(g, cfg)
        assert not sub
        assert mean > 0.3


class TestInterInfectionTimes:
    def test_samples_positive_and_plentiful(self):
        g = graphmod.generate_random_regular(500, 4, seed=4)
        cfg = SimConfig(beta=0.6, t_max=400.0, burn_in=50.0, seed=9)
        samples, censored = simulate.inter_infection_times(g, cfg)
        assert len(samples) > 10000
        assert np.all(samples > 0)
        assert censored >= 0

    def test_empirical_survival_shape(self):
        samples = np.array([1.0, 2.0, 3.0, 4.0])
        s = simulate.empirical_survival(samples, [0.0, 2.5, 10.0])
        assert s[0] == 1.0
        assert s[1] == 0.5
        assert s[2] == 0.0

    def test_windowed_survival_counts_censored_as_survivors(self):
        # intervals starting after t_max - max(t_grid) are excluded;
        # censored intervals in the window outlive the whole grid
        samples = np.array([1.0, 3.0])
        rec = np.array([10.0, 99.0])   # second one starts too late
        cens = np.array([20.0, 99.0])  # first is in-window -> survivor
        s = simulate.empirical_survival_window(
            samples, rec, cens, t_max=100.0, t_grid=[0.0, 2.0])
        assert s[0] == 1.0
        assert s[1] == 0.5  # {1.0 (dead), censored survivor}

    def test_single_edge_waiting_law_exact(self, single_edge):
        # on one edge at large beta, the recovery-to-reinfection wait
        # conditioned on reinfection is the Exp(beta+1) race between
        # infection (beta) and the partner's recovery (1)
        beta = 8.0
        cfg = SimConfig(beta=beta, t_max=20_000.0, burn_in=100.0, seed=5)
        dt, _cens = simulate.inter_infection_times(single_edge, cfg)
        assert len(dt) >= 10_000
        res = scipy.stats.kstest(dt, "expon", args=(0.0, 1.0 / (beta + 1.0)))
        assert res.statistic < 0.02


class TestJointOccupancyGuard:
    def test_large_graph_rejected(self, k4):
        with pytest.raises(ValueError):
            simulate.joint_occupancy(k4, SimConfig(beta=0.5))
