import numpy as np
import pytest

from sispair import graph as graphmod
from sispair.graph import (DirectedEdgeIndex, Graph, GraphError,
                           directed_edge_index, from_edges, generate_gnp,
                           generate_random_regular, load_edge_list,
                           mean_excess_degree, save_edge_list,
                           spectral_radius)


class TestLoadEdgeList:
    def test_two_edge_path(self, tmp_path):
        p = tmp_path / "g.txt"
        p.write_text("a b\nb c\n")
        g = load_edge_list(p)
        assert g.n == 3 and g.m == 2
        assert g.labels == ("a", "b", "c")
        # path topology: middle node has degree 2
        assert sorted(g.degrees.tolist()) == [1, 1, 2]

    def test_self_loop_dropped(self, tmp_path):
        p = tmp_path / "g.txt"
        p.write_text("a a\n")
        g = load_edge_list(p)
        assert g.n == 1 and g.m == 0
        assert g.dropped_self_loops == 1

    def test_duplicate_dropped(self, tmp_path):
        p = tmp_path / "g.txt"
        p.write_text("0 1\n1 0\n")
        g = load_edge_list(p)
        assert g.m == 1
        assert g.dropped_duplicates == 1

    def test_comments_and_blank_lines(self, tmp_path):
        p = tmp_path / "g.txt"
        p.write_text("# header\n\na b\n")
        g = load_edge_list(p)
        assert g.n == 2 and g.m == 1

    def test_bad_token_count_names_line(self, tmp_path):
        p = tmp_path / "g.txt"
        p.write_text("a b\na b c\n")
        with pytest.raises(GraphError, match="line 2"):
            load_edge_list(p)

    def test_roundtrip(self, tmp_path):
        g = generate_gnp(30, 0.2, seed=3)
        p = tmp_path / "g.txt"
        save_edge_list(g, p)
        g2 = load_edge_list(p)
        assert g2.n == sum(g.degrees > 0) or g2.m == g.m
        # compare edge sets through the label mapping
        back = {frozenset((g2.labels[u], g2.labels[v]))
                for u, v in g2.edges()}
        orig = {frozenset((g.labels[u], g.labels[v]))
                for u, v in g.edges()}
        assert back == orig


class TestGenerators:
    def test_k4_forced(self):
        g = generate_random_regular(4, 3, seed=0)
        assert g.n == 4 and g.m == 6
        assert np.all(g.degrees == 3)

    def test_regular_large_simple(self):
        g = generate_random_regular(5000, 3, seed=1)
        assert np.all(g.degrees == 3)
        for i in range(0, 5000, 199):
            nb = g.neighbors(i)
            assert len(set(nb.tolist())) == len(nb)  # no multi-edges
            assert i not in nb                        # no self-loops

    def test_parity_error(self):
        with pytest.raises(GraphError):
            generate_random_regular(5, 3)

    def test_degree_bound_error(self):
        with pytest.raises(GraphError):
            generate_random_regular(4, 4)

    def test_determinism(self):
        g1 = generate_random_regular(100, 3, seed=9)
        g2 = generate_random_regular(100, 3, seed=9)
        assert np.array_equal(g1.indices, g2.indices)

    def test_gnp_bounds(self):
        g = generate_gnp(50, 0.1, seed=2)
        assert g.n == 50
        assert g.m <= 50 * 49 // 2
        with pytest.raises(GraphError):
            generate_gnp(10, 1.5)


class TestSpectralRadius:
    def test_k4(self, k4):
        assert spectral_radius(k4) == pytest.approx(3.0, abs=1e-10)

    def test_single_edge(self, single_edge):
        assert spectral_radius(single_edge) == pytest.approx(1.0, abs=1e-10)

    def test_star4(self):
        g = from_edges([(0, i) for i in range(1, 5)], n=5)
        assert spectral_radius(g) == pytest.approx(2.0, abs=1e-10)

    def test_matches_dense_eigensolve(self):
        g = generate_gnp(60, 0.1, seed=7)
        lam = np.max(np.linalg.eigvalsh(g.adjacency().toarray()))
        assert spectral_radius(g) == pytest.approx(lam, abs=1e-8)

    def test_disconnected_takes_global_max(self):
        # K4 plus an isolated edge: the maximum (3.0) lives in one component
        g = from_edges([(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3),
                        (4, 5)], n=6)
        assert spectral_radius(g) == pytest.approx(3.0, abs=1e-10)

    def test_degree_bracket(self):
        g = generate_gnp(80, 0.08, seed=11)
        lam = spectral_radius(g)
        assert np.mean(g.degrees) - 1e-9 <= lam <= np.max(g.degrees) + 1e-9


class TestMeanExcessDegree:
    def test_regular(self, k4):
        assert mean_excess_degree(k4) == pytest.approx(2.0)

    def test_single_edge(self, single_edge):
        assert mean_excess_degree(single_edge) == pytest.approx(0.0)

    def test_path3(self, path3):
        assert mean_excess_degree(path3) == pytest.approx(1.0 / 3.0)


class TestDirectedEdgeIndex:
    def test_bijection_and_reversal(self):
        g = generate_gnp(40, 0.15, seed=5)
        idx = directed_edge_index(g)
        assert idx.n_directed == 2 * g.m
        for e in range(idx.n_directed):
            r = idx.rev[e]
            assert idx.rev[r] == e
            assert idx.src[e] == idx.dst[r]
            assert idx.dst[e] == idx.src[r]

    def test_index_of(self, path3):
        idx = directed_edge_index(path3)
        e = idx.index_of(0, 1)
        assert idx.endpoints(e) == (0, 1)
        with pytest.raises(KeyError):
            idx.index_of(0, 2)

    def test_undirected_slots(self, k4):
        idx = directed_edge_index(k4)
        assert len(idx.undirected) == k4.m
        assert np.all(idx.src[idx.undirected] < idx.dst[idx.undirected])
