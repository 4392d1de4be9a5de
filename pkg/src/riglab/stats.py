"""Empirical estimators on realized graphs and comparison utilities.

Triangle counting enumerates the wedges (2-stars) of each vertex from
its sorted neighbor list and checks which of them close into an edge;
that costs O(sum_v deg(v)^2) probes, fine in the sparse regimes this
package targets, and it yields the per-vertex 2-star counts for free.

The vertex-averaged clustering estimate skips vertices with no 2-star
(degree < 2): the 0/0 terms are undefined and excluding them is the
standard convention, recorded in report metadata.  The global estimate
(ratio of sums) is unaffected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import DiscretePmf
from .sampler import Graph

__all__ = [
    "LocalCounts",
    "ClusteringReport",
    "SlopeFit",
    "degree_histogram",
    "local_counts",
    "clustering_report",
    "tv_distance",
    "loglog_slope",
    "pooled_estimates",
    "DEFAULT_MIN_BUCKET",
]

DEFAULT_MIN_BUCKET = 30
ALPHA_HAT_CONVENTION = "vertices with no 2-star excluded from the average"


@dataclass(frozen=True)
class LocalCounts:
    """Per-vertex degree, 2-star count n2 = C(d, 2) and triangle count n3
    (edges among the neighborhood)."""

    degree: np.ndarray
    n2: np.ndarray
    n3: np.ndarray


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r2: float


@dataclass
class ClusteringReport:
    """Clustering estimates of one graph (or a pool of replicates).

    ``alpha_hat`` averages n3/n2 over vertices that have a 2-star;
    ``alpha_hat_hat`` is the ratio of sums.  ``per_degree[k]`` estimates
    the clustering of degree-k vertices and is only reported for buckets
    holding at least ``min_bucket`` vertices; the raw sums behind every
    bucket are kept so replicates can be pooled exactly.  Standard
    errors appear only on pooled reports (from replicate spread).
    """

    alpha_hat: float | None
    alpha_hat_hat: float | None
    per_degree: dict[int, float]
    bucket_counts: dict[int, int]
    min_bucket: int
    n2_sum: int
    n3_sum: int
    n3_by_degree: dict[int, int]
    alpha_hat_count: int
    replicates: int = 1
    se_alpha_hat_hat: float | None = None
    per_degree_se: dict[int, float] = field(default_factory=dict)
    convention: str = ALPHA_HAT_CONVENTION


def degree_histogram(graph: Graph) -> DiscretePmf:
    """Empirical degree pmf over all vertices (tail mass zero)."""
    counts = np.bincount(graph.degrees, minlength=1)
    return DiscretePmf(counts / graph.vertex_count, 0.0)


def local_counts(graph: Graph) -> LocalCounts:
    """Degrees, 2-star counts and per-vertex triangle counts.

    Wedges (u, w) with u < w around each center are generated from the
    sorted neighbor lists; a wedge contributes a triangle iff (u, w) is
    an edge, tested against the sorted edge-key array.
    """
    from .sampler import _group_pair_indices

    n = graph.vertex_count
    deg = graph.degrees.astype(np.int64)
    n2 = deg * (deg - 1) // 2
    n3 = np.zeros(n, dtype=np.int64)
    if graph.indices.size == 0 or int(deg.max(initial=0)) < 2:
        return LocalCounts(degree=deg, n2=n2, n3=n3)
    ekeys = graph.edge_keys()  # already sorted
    centers = np.repeat(np.arange(n, dtype=np.int64), deg)
    li, ri = _group_pair_indices(deg)
    nn = np.int64(n)
    chunk = 8_000_000  # bound transient memory on wedge-heavy graphs
    for lo in range(0, li.size, chunk):
        hi = min(lo + chunk, li.size)
        # neighbor lists are sorted, so wedge endpoints come out u < w
        wkeys = graph.indices[li[lo:hi]] * nn + graph.indices[ri[lo:hi]]
        slot = np.searchsorted(ekeys, wkeys)
        slot[slot == ekeys.size] = 0
        closed = ekeys[slot] == wkeys
        if closed.any():
            n3 += np.bincount(centers[li[lo:hi][closed]], minlength=n)
    return LocalCounts(degree=deg, n2=n2, n3=n3)


def clustering_report(graph: Graph, min_bucket: int = DEFAULT_MIN_BUCKET) -> ClusteringReport:
    """Clustering estimates of one graph; see :class:`ClusteringReport`."""
    if min_bucket < 1:
        raise ValueError("min_bucket must be >= 1")
    lc = local_counts(graph)
    has_wedge = lc.n2 > 0
    count_w = int(has_wedge.sum())
    alpha_hat = (
        float(np.mean(lc.n3[has_wedge] / lc.n2[has_wedge])) if count_w else None
    )
    n2_sum = int(lc.n2.sum())
    n3_sum = int(lc.n3.sum())
    alpha_hat_hat = n3_sum / n2_sum if n2_sum > 0 else None
    counts = np.bincount(lc.degree)
    n3_by_deg = np.bincount(lc.degree, weights=lc.n3.astype(float))
    bucket_counts: dict[int, int] = {}
    n3_by_degree: dict[int, int] = {}
    for k in range(2, counts.size):
        if counts[k] > 0:
            bucket_counts[k] = int(counts[k])
            n3_by_degree[k] = int(round(n3_by_deg[k]))
    per_degree = _per_degree(n3_by_degree, bucket_counts, min_bucket)
    return ClusteringReport(
        alpha_hat=alpha_hat,
        alpha_hat_hat=alpha_hat_hat,
        per_degree=per_degree,
        bucket_counts=bucket_counts,
        min_bucket=min_bucket,
        n2_sum=n2_sum,
        n3_sum=n3_sum,
        n3_by_degree=n3_by_degree,
        alpha_hat_count=count_w,
    )


def _per_degree(
    n3_by_degree: dict[int, int], bucket_counts: dict[int, int], min_bucket: int
) -> dict[int, float]:
    out = {}
    for k, cnt in sorted(bucket_counts.items()):
        if cnt >= min_bucket and k >= 2:
            out[k] = n3_by_degree.get(k, 0) / (math.comb(k, 2) * cnt)
    return out


def tv_distance(p: DiscretePmf, q: DiscretePmf) -> float:
    """Total variation: half the L1 gap over {0..max k} plus half the
    tail-mass gap."""
    size = max(p.probs.size, q.probs.size)
    pa = np.zeros(size)
    qa = np.zeros(size)
    pa[: p.probs.size] = p.probs
    qa[: q.probs.size] = q.probs
    return float(0.5 * np.abs(pa - qa).sum() + 0.5 * abs(p.tail_mass - q.tail_mass))


def loglog_slope(points: dict) -> SlopeFit:
    """Least-squares slope of log(value) against log(k).

    Nonpositive values are excluded; fewer than 3 surviving points is an
    error.
    """
    ks, vs = [], []
    for k, v in points.items():
        if v > 0:
            ks.append(float(k))
            vs.append(float(v))
    if len(ks) < 3:
        raise ValueError("need at least 3 positive points for a log-log fit")
    lx = np.log(np.array(ks))
    ly = np.log(np.array(vs))
    design = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(design, ly, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    resid = ly - design @ coef
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return SlopeFit(slope=slope, intercept=intercept, r2=r2)


def _se(values: list[float]) -> float | None:
    if len(values) < 2:
        return None
    return float(np.std(values, ddof=1) / math.sqrt(len(values)))


def pooled_estimates(reports: list[ClusteringReport]) -> ClusteringReport:
    """Pool replicate reports: count-weighted sums for the point
    estimates, between-replicate spread for the standard errors."""
    if not reports:
        raise ValueError("need at least one report")
    if len(reports) == 1:
        return reports[0]
    min_bucket = reports[0].min_bucket
    n2_sum = sum(r.n2_sum for r in reports)
    n3_sum = sum(r.n3_sum for r in reports)
    alpha_hat_hat = n3_sum / n2_sum if n2_sum > 0 else None
    wsum = sum(r.alpha_hat_count for r in reports)
    alpha_hat = (
        sum(r.alpha_hat * r.alpha_hat_count for r in reports if r.alpha_hat is not None)
        / wsum
        if wsum
        else None
    )
    bucket_counts: dict[int, int] = {}
    n3_by_degree: dict[int, int] = {}
    for r in reports:
        for k, cnt in r.bucket_counts.items():
            bucket_counts[k] = bucket_counts.get(k, 0) + cnt
            n3_by_degree[k] = n3_by_degree.get(k, 0) + r.n3_by_degree.get(k, 0)
    per_degree = _per_degree(n3_by_degree, bucket_counts, min_bucket)
    per_degree_se: dict[int, float] = {}
    for k in per_degree:
        vals = [
            r.n3_by_degree[k] / (math.comb(k, 2) * r.bucket_counts[k])
            for r in reports
            if r.bucket_counts.get(k, 0) > 0
        ]
        se = _se(vals)
        if se is not None:
            per_degree_se[k] = se
    return ClusteringReport(
        alpha_hat=alpha_hat,
        alpha_hat_hat=alpha_hat_hat,
        per_degree=per_degree,
        bucket_counts=dict(sorted(bucket_counts.items())),
        min_bucket=min_bucket,
        n2_sum=n2_sum,
        n3_sum=n3_sum,
        n3_by_degree=dict(sorted(n3_by_degree.items())),
        alpha_hat_count=wsum,
        replicates=sum(r.replicates for r in reports),
        se_alpha_hat_hat=_se(
            [r.alpha_hat_hat for r in reports if r.alpha_hat_hat is not None]
        ),
        per_degree_se=per_degree_se,
    )
