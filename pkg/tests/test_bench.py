import csv
import heapq
import io
import math

import numpy as np
import pytest
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as sp_dijkstra

from klsm.bench import cli
from klsm.bench.graph import INF, Graph, dijkstra_ref, gen_gnp
from klsm.bench.sssp import sssp_run
from klsm.bench.throughput import ThroughputConfig, throughput_run

PATH3 = Graph.from_edges(3, [(0, 1, 2), (1, 2, 3), (0, 2, 10)])


def scipy_dist(g: Graph, source: int) -> list[float]:
    m = csr_matrix((g.weights.astype(float), g.targets, g.offsets), shape=(g.n, g.n))
    return sp_dijkstra(m, directed=True, indices=source).tolist()


class TestGnp:
    def test_complete_pair(self):
        g = gen_gnp(2, 1.0, 0)
        assert g.adjacency()[0][0][0] == 1 and g.adjacency()[1][0][0] == 0
        assert g.edge_count == 2

    def test_edge_count_within_three_sigma(self):
        n, p = 1000, 0.05
        mean = n * (n - 1) * p
        sigma = math.sqrt(n * (n - 1) * p * (1 - p))
        assert mean == pytest.approx(49_950)
        for seed in range(3):
            assert abs(gen_gnp(n, p, seed).edge_count - mean) <= 3 * sigma

    def test_deterministic(self):
        a, b = gen_gnp(300, 0.1, 42), gen_gnp(300, 0.1, 42)
        assert np.array_equal(a.targets, b.targets) and np.array_equal(a.weights, b.weights)
        assert not np.array_equal(a.targets, gen_gnp(300, 0.1, 43).targets)

    def test_shape_invariants(self):
        g = gen_gnp(200, 0.2, 1, wmax=50)
        for u, edges in enumerate(g.adjacency()):
            assert all(v != u and 1 <= w <= 50 for v, w in edges)
            assert len({v for v, _ in edges}) == len(edges)
        assert g.weights.min() >= 1

    @pytest.mark.parametrize("p", [-0.1, 1.5])
    def test_bad_probability(self, p):
        with pytest.raises(ValueError):
            gen_gnp(5, p, 0)


class TestDijkstra:
    def test_single_node(self):
        assert dijkstra_ref(gen_gnp(1, 0.5, 0), 0) == [0]

    def test_path(self):
        assert dijkstra_ref(PATH3, 0) == [0, 2, 5]

    def test_disconnected(self):
        g = Graph.from_edges(3, [(0, 1, 4)])
        assert dijkstra_ref(g, 0) == [0, 4, INF]

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_scipy(self, seed):
        g = gen_gnp(300, 0.03, seed)
        assert dijkstra_ref(g, 0) == scipy_dist(g, 0)


def settled_pops(g: Graph, source: int) -> int:
    """Instrumented sequential Dijkstra: number of non-stale heap pops."""
    adj = g.adjacency()
    dist = [INF] * g.n
    dist[source] = 0
    heap, pops = [(0, source)], 0
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        pops += 1
        for v, w in adj[u]:
            if d + w < dist[v]:
                dist[v] = d + w
                heapq.heappush(heap, (d + w, v))
    return pops


class TestSSSP:
    def test_path(self):
        assert sssp_run(PATH3, 0, 1, 0).dist == [0, 2, 5]
        assert sssp_run(PATH3, 0, 2, 4).dist == [0, 2, 5]

    @pytest.mark.parametrize("seed", range(3))
    def test_sequential_k0_has_no_extra_work(self, seed):
        g = gen_gnp(400, 0.05, seed)
        r = sssp_run(g, 0, 1, 0)
        assert r.iterations == settled_pops(g, 0)
        assert r.extra_iterations == 0

    def test_unreachable_is_inf(self):
        g = Graph.from_edges(4, [(0, 1, 3), (2, 3, 1)])
        r = sssp_run(g, 0, 2, 1)
        assert r.dist == [0, 3, INF, INF] and r.reachable == 2

    @pytest.mark.parametrize("threads,k", [(1, 0), (2, 4), (4, 256), (3, 4096)])
    def test_exact(self, threads, k):
        g = gen_gnp(300, 0.05, threads * 100 + k)
        r = sssp_run(g, 0, threads, k, seed=threads)
        assert r.dist == dijkstra_ref(g, 0) == scipy_dist(g, 0)
        assert r.iterations >= r.reachable

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            sssp_run(PATH3, 0, 0, 1)
        with pytest.raises(ValueError):
            sssp_run(PATH3, 7, 1, 1)


class TestThroughput:
    def test_shape(self):
        st = throughput_run(ThroughputConfig(threads=1, k=4, prefill=0, duration=0.05))
        assert st.total_ops >= 0 and st.ops_per_thread_per_s >= 0
        # an empty start means every failure was an empty-queue delete
        assert st.drained + st.deletes == st.inserts

    @pytest.mark.parametrize("threads,k", [(2, 0), (3, 16)])
    def test_conservation(self, threads, k):
        cfg = ThroughputConfig(threads=threads, k=k, prefill=500, duration=0.2, seed=threads)
        st = throughput_run(cfg)
        assert st.drained + st.deletes == cfg.prefill + st.inserts

    @pytest.mark.parametrize("field,value", [("threads", 0), ("ratio", 1.5), ("duration", 0),
                                             ("prefill", -1), ("k", -1)])
    def test_bad_config(self, field, value):
        cfg = ThroughputConfig(duration=0.01, prefill=0)
        setattr(cfg, field, value)
        with pytest.raises(ValueError):
            throughput_run(cfg)


class TestBenchCli:
    def rows(self, text):
        return list(csv.DictReader(io.StringIO(text)))

    def test_throughput_line(self, capsys):
        assert cli.main(["throughput", "--threads", "2", "--k", "4", "--prefill", "100",
                         "--duration", "0.05", "--seed", "3"]) == 0
        (row,) = self.rows(capsys.readouterr().out)
        assert list(row) == cli.HEADER
        assert row["mode"] == "throughput" and row["seed"] == "3" and int(row["total_ops"]) > 0

    def test_sssp_verify(self, capsys):
        assert cli.main(["sssp", "--nodes", "150", "--edge-prob", "0.05", "--threads", "2",
                         "--k", "8", "--seed", "1", "--verify", "--repeat", "2"]) == 0
        captured = capsys.readouterr()
        rows = self.rows(captured.out)
        assert [r["seed"] for r in rows] == ["1", "2"]
        assert "95% CI" in captured.err

    def test_bad_probability_is_reported(self, capsys):
        assert cli.main(["sssp", "--nodes", "5", "--edge-prob", "2"]) == 2

    def test_mean_ci(self):
        m, half = cli.mean_ci([1.0, 2.0, 3.0, 4.0])
        # t(0.975, 3) = 3.182, sem = 0.6455
        assert m == 2.5 and half == pytest.approx(3.1824 * 0.645497, rel=1e-3)
        assert math.isnan(cli.mean_ci([5.0])[1])
