"""Empirical estimators, checked against dense-matrix triangle oracles."""

import math

import numpy as np
import pytest

from riglab.model import DiscretePmf, ModelParams, Table, make_size_dist
from riglab.sampler import Graph, RngStream, build_active, sample_incidence
from riglab.stats import (
    clustering_report,
    degree_histogram,
    local_counts,
    loglog_slope,
    pooled_estimates,
    tv_distance,
)


def k3():
    return Graph.from_edge_arrays(3, np.array([0, 0, 1]), np.array([1, 2, 2]))


def star_k13():
    return Graph.from_edge_arrays(4, np.array([0, 0, 0]), np.array([1, 2, 3]))


def k4_minus_edge():
    return Graph.from_edge_arrays(4, np.array([0, 0, 0, 1, 1]), np.array([1, 2, 3, 2, 3]))


def path3():
    return Graph.from_edge_arrays(3, np.array([0, 1]), np.array([1, 2]))


def dense_triangle_oracle(graph):
    """n3 per vertex from the cubed adjacency matrix (independent route)."""
    n = graph.vertex_count
    a = np.zeros((n, n), dtype=np.int64)
    u, v = graph.edges()
    a[u, v] = 1
    a[v, u] = 1
    return np.diag(a @ a @ a) // 2


def triangle_total_by_edge_iteration(graph):
    """Global triangle count: sum of common-neighbor counts over edges / 3."""
    u, v = graph.edges()
    total = 0
    for a, b in zip(u.tolist(), v.tolist()):
        total += np.intersect1d(graph.neighbors(a), graph.neighbors(b)).size
    return total // 3


def random_graph(seed, n=60):
    p = ModelParams(
        n=n, m=20, s=1, size_dist=make_size_dist(Table([0, 0.3, 0.4, 0.3]), 20)
    )
    return build_active(sample_incidence(p, RngStream(seed)), 1)


class TestDegreeHistogram:
    def test_triangle(self):
        pmf = degree_histogram(k3())
        assert pmf.prob(2) == 1.0

    def test_empty_graph(self):
        pmf = degree_histogram(Graph.empty(5))
        assert pmf.prob(0) == 1.0

    def test_path(self):
        pmf = degree_histogram(path3())
        np.testing.assert_allclose(pmf.probs, [0, 2 / 3, 1 / 3], atol=1e-15)

    def test_mean_is_2e_over_v(self):
        for seed in (1, 2, 3):
            g = random_graph(seed)
            pmf = degree_histogram(g)
            assert pmf.mean() == pytest.approx(2 * g.edge_count / g.vertex_count, abs=1e-12)


class TestLocalCounts:
    def test_triangle(self):
        lc = local_counts(k3())
        assert lc.degree.tolist() == [2, 2, 2]
        assert lc.n2.tolist() == [1, 1, 1]
        assert lc.n3.tolist() == [1, 1, 1]

    def test_star_center(self):
        lc = local_counts(star_k13())
        assert (lc.degree[0], lc.n2[0], lc.n3[0]) == (3, 3, 0)

    def test_matches_matrix_oracle(self):
        for seed in range(6):
            g = random_graph(seed + 10)
            lc = local_counts(g)
            np.testing.assert_array_equal(lc.n3, dense_triangle_oracle(g))
            np.testing.assert_array_equal(
                lc.n2, lc.degree * (lc.degree - 1) // 2
            )
            assert np.all(lc.n3 <= lc.n2)

    def test_triangle_sum_identity(self):
        for seed in (21, 22):
            g = random_graph(seed)
            lc = local_counts(g)
            assert lc.n3.sum() == 3 * triangle_total_by_edge_iteration(g)


class TestClusteringReport:
    def test_triangle(self):
        rep = clustering_report(k3(), min_bucket=1)
        assert rep.alpha_hat == 1.0 and rep.alpha_hat_hat == 1.0
        assert rep.per_degree == {2: 1.0}

    def test_star(self):
        rep = clustering_report(star_k13(), min_bucket=1)
        assert rep.alpha_hat == 0.0 and rep.alpha_hat_hat == 0.0

    def test_k4_minus_edge_frozen_values(self):
        # degrees (3,3,2,2); n3 = (2,2,1,1); checked against the matrix oracle
        g = k4_minus_edge()
        np.testing.assert_array_equal(dense_triangle_oracle(g), [2, 2, 1, 1])
        rep = clustering_report(g, min_bucket=1)
        assert rep.alpha_hat == pytest.approx(5 / 6)
        assert rep.alpha_hat_hat == pytest.approx(0.75)
        assert rep.per_degree == {2: pytest.approx(1.0), 3: pytest.approx(2 / 3)}

    def test_no_wedges_reported_absent(self):
        g = Graph.from_edge_arrays(4, np.array([0]), np.array([1]))
        rep = clustering_report(g, min_bucket=1)
        assert rep.alpha_hat is None and rep.alpha_hat_hat is None

    def test_per_degree_definition(self):
        """per_degree[k] recomputed straight from the definition."""
        g = random_graph(33, n=120)
        lc = local_counts(g)
        rep = clustering_report(g, min_bucket=1)
        for k, value in rep.per_degree.items():
            sel = lc.degree == k
            want = lc.n3[sel].sum() / (math.comb(k, 2) * sel.sum())
            assert value == pytest.approx(want, abs=1e-12)

    def test_min_bucket_filters(self):
        g = k4_minus_edge()
        rep = clustering_report(g, min_bucket=3)
        assert rep.per_degree == {}
        assert rep.bucket_counts == {2: 2, 3: 2}


class TestTvDistance:
    def test_identity_and_extremes(self):
        p = DiscretePmf(np.array([0.5, 0.5]))
        assert tv_distance(p, p) == 0.0
        assert tv_distance(DiscretePmf.point_mass(0), DiscretePmf.point_mass(1)) == 1.0
        q = DiscretePmf(np.array([0.25, 0.75]))
        assert tv_distance(p, q) == pytest.approx(0.25)

    def test_tail_mass_counts(self):
        p = DiscretePmf(np.array([1.0]))
        q = DiscretePmf(np.array([0.6]), 0.4)
        assert tv_distance(p, q) == pytest.approx(0.4)

    def test_metric_axioms(self):
        rng = np.random.default_rng(44)
        for _ in range(25):
            pmfs = []
            for _ in range(3):
                w = rng.random(int(rng.integers(1, 6)))
                pmfs.append(DiscretePmf(w / w.sum()))
            p, q, r = pmfs
            assert tv_distance(p, q) == pytest.approx(tv_distance(q, p))
            assert tv_distance(p, r) <= tv_distance(p, q) + tv_distance(q, r) + 1e-12
            assert 0 <= tv_distance(p, q) <= 1


class TestLogLogSlope:
    def test_exact_inverse_law(self):
        fit = loglog_slope({k: 1.0 / k for k in range(2, 21)})
        assert fit.slope == pytest.approx(-1.0, abs=1e-12)
        assert fit.r2 == pytest.approx(1.0, abs=1e-12)

    def test_constant(self):
        fit = loglog_slope({k: 3.7 for k in range(2, 12)})
        assert fit.slope == pytest.approx(0.0, abs=1e-12)

    def test_noisy_inverse_law(self):
        rng = np.random.default_rng(5)
        pts = {k: 2.0 / k * (1 + 0.01 * rng.standard_normal()) for k in range(2, 40)}
        fit = loglog_slope(pts)
        assert -1.05 < fit.slope < -0.95

    def test_nonpositive_excluded_then_error(self):
        with pytest.raises(ValueError):
            loglog_slope({2: 1.0, 3: 0.0, 4: -1.0})


class TestPooledEstimates:
    def make_report(self, alpha, n2=10):
        n3 = int(round(alpha * n2))
        return clustering_report_like(n3=n3, n2=n2)

    def test_single_is_identity(self):
        g = k4_minus_edge()
        rep = clustering_report(g, min_bucket=1)
        pooled = pooled_estimates([rep])
        assert pooled is rep
        assert pooled.se_alpha_hat_hat is None

    def test_two_identical_reports(self):
        rep = clustering_report(k4_minus_edge(), min_bucket=1)
        pooled = pooled_estimates([rep, rep])
        assert pooled.alpha_hat_hat == rep.alpha_hat_hat
        assert pooled.se_alpha_hat_hat == 0.0
        assert pooled.replicates == 2

    def test_equal_weight_spread(self):
        """Values {0.4, 0.6} with equal weights: pooled 0.5, SE 0.1."""
        a = clustering_report_like(n3=4, n2=10)
        b = clustering_report_like(n3=6, n2=10)
        pooled = pooled_estimates([a, b])
        assert pooled.alpha_hat_hat == pytest.approx(0.5)
        assert pooled.se_alpha_hat_hat == pytest.approx(0.1)

    def test_pooled_per_degree_sums(self):
        reps = [clustering_report(random_graph(s, n=80), min_bucket=1) for s in (1, 2, 3)]
        pooled = pooled_estimates(reps)
        for k, value in pooled.per_degree.items():
            n3 = sum(r.n3_by_degree.get(k, 0) for r in reps)
            cnt = sum(r.bucket_counts.get(k, 0) for r in reps)
            assert value == pytest.approx(n3 / (math.comb(k, 2) * cnt), abs=1e-12)
        assert pooled.n3_sum == sum(r.n3_sum for r in reps)


def clustering_report_like(n3, n2):
    """Minimal synthetic report for pooling arithmetic tests."""
    from riglab.stats import ClusteringReport

    return ClusteringReport(
        alpha_hat=n3 / n2,
        alpha_hat_hat=n3 / n2,
        per_degree={},
        bucket_counts={},
        min_bucket=30,
        n2_sum=n2,
        n3_sum=n3,
        n3_by_degree={},
        alpha_hat_count=1,
    )
