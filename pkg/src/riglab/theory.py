"""Closed-form asymptotic laws for sparse intersection graphs.

Actor ("active") side: the degree of a typical vertex is asymptotically
mixed Poisson with random intensity z(X) * mu1, where z is the rescaled
joint count and mu1 its mean; the clustering coefficient collapses to
a1/a2 and can equivalently be written in terms of the scale ratio beta
or of the asymptotic degree moments.  Conditioned on degree k it decays
like c/k for heavy-tailed sizes.

Attribute ("passive") side, threshold 1: the degree is asymptotically
compound Poisson, with Poisson count mean (n/m) E[X] and jumps drawn
from the size-biased-and-shifted size law.  Clustering again has a
closed form in falling-factorial moments, and conditioned on degree k
it equals E[sum of within-jump pairs | total = k] / (k (k-1)).

Every value here is an asymptotic prediction evaluated at finite (n, m):
the o(1) corrections are dropped, except for the finite-size clustering
formula ``alpha_passive_finite`` which keeps its 1/m term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    DiscretePmf,
    SizeDistribution,
    binomial,
    log_binomial,
    moments,
)

__all__ = [
    "TAIL_TOL",
    "COUNT_TAIL_TOL",
    "ClampedProbability",
    "CompoundPoissonSpec",
    "RegimeReport",
    "PoissonApproxStats",
    "active_edge_prob_asymptotic",
    "mixed_poisson_degree_pmf",
    "asymptotic_degree_moments",
    "alpha_active",
    "alpha_active_beta_form",
    "alpha_active_from_degree_moments",
    "alpha_k_active",
    "passive_compound_spec",
    "compound_poisson_pmf",
    "alpha_passive_finite",
    "alpha_passive_limit",
    "alpha_k_passive",
    "alpha_k_passive_curve",
    "poisson_approx_stats",
    "passive_regime_classify",
]

TAIL_TOL = 1e-10  # auto-truncation target for returned pmfs
COUNT_TAIL_TOL = 1e-12  # Poisson-count truncation inside the joint DP
_REGIME_RATIO = 0.01  # "<<" convention for regime classification


@dataclass(frozen=True)
class ClampedProbability:
    """A probability-valued formula together with its raw value.

    ``clamped`` flags that the raw expression left [0, 1] (the formula is
    asymptotic; outside the sparse regime it can exceed 1).
    """

    value: float
    raw: float
    clamped: bool


@dataclass(frozen=True)
class CompoundPoissonSpec:
    """Compound Poisson law: a Poisson(lam) number of i.i.d. jumps."""

    lam: float
    jump_pmf: DiscretePmf

    def __post_init__(self) -> None:
        if self.lam < 0 or not math.isfinite(self.lam):
            raise ValueError("lam must be finite and >= 0")

    def mean(self) -> float:
        return self.lam * self.jump_pmf.mean()

    def second_moment(self) -> float:
        ej, ej2 = self.jump_pmf.mean(), self.jump_pmf.second_moment()
        return self.lam * ej2 + (self.lam * ej) ** 2


@dataclass(frozen=True)
class RegimeReport:
    """Which passive-degree regime the parameters fall into."""

    case_label: str
    n_star: float
    advice: str


@dataclass(frozen=True)
class PoissonApproxStats:
    """Per-vertex diagnostics for the Poisson degree approximation.

    ``lambda_bar`` is the conditional mean number of neighbors of vertex
    1 given all set sizes; ``kappa1`` and ``kappa2`` are the two
    negligibility statistics that must vanish for the approximation to
    hold (kappa2 can blow up when s grows with m even while lambda_bar
    and kappa1 stay tame).
    """

    lambda_bar: float
    kappa1: float
    kappa2: float


def active_edge_prob_asymptotic(
    dist: SizeDistribution, m: int, s: int
) -> ClampedProbability:
    """First-order edge probability a1^2 / C(m, s) of the actor graph.

    The raw value is clamped into [0, 1]; ``clamped`` is set when the
    parameters leave the sparse regime where the formula is meaningful.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    a1 = moments(dist, s).a1
    raw = a1 * a1 / binomial(m, s)
    clamped = not 0.0 <= raw <= 1.0
    return ClampedProbability(value=min(max(raw, 0.0), 1.0), raw=raw, clamped=clamped)


def _scale_quantities(dist: SizeDistribution, n: int, m: int, s: int):
    """(support, weights, z values, mu1) at finite scale."""
    half_log = 0.5 * (math.log(n) - log_binomial(m, s))
    xs = dist.support
    w = dist.weights[xs]
    zs = np.array(
        [
            math.exp(log_binomial(int(x), s) + half_log)
            if log_binomial(int(x), s) > -math.inf
            else 0.0
            for x in xs
        ]
    )
    mu1 = float(np.dot(w, zs))
    return xs, w, zs, mu1


def _poisson_log_pmf(ks: np.ndarray, lam: float) -> np.ndarray:
    out = np.full(ks.shape, -math.inf)
    if lam <= 0.0:
        out[ks == 0] = 0.0
        return out
    return ks * math.log(lam) - lam - np.array([math.lgamma(k + 1) for k in ks])


def mixed_poisson_degree_pmf(
    dist: SizeDistribution, n: int, m: int, s: int, k_max: int | None = None
) -> DiscretePmf:
    """Asymptotic actor degree law: p_k = sum_x P(x) Pois_k(z(x) mu1).

    With ``k_max=None`` the truncation point is extended until the
    recorded tail mass drops below ``TAIL_TOL``.
    """
    xs, w, zs, mu1 = _scale_quantities(dist, n, m, s)
    lams = zs * mu1
    if k_max is None:
        cap = 5
        for lam in lams:
            cap = max(cap, int(lam + 12.0 * math.sqrt(lam + 1.0) + 30.0))
    else:
        cap = k_max
    ks = np.arange(cap + 1)
    probs = np.zeros(cap + 1)
    for weight, lam in zip(w, lams):
        probs += weight * np.exp(_poisson_log_pmf(ks, float(lam)))
    if k_max is None:
        csum = np.cumsum(probs[::-1])[::-1]
        keep = np.nonzero(csum >= TAIL_TOL)[0]
        probs = probs[: (int(keep[-1]) + 1) if keep.size else 1]
    tail = max(0.0, 1.0 - float(probs.sum()))
    return DiscretePmf(probs, tail)


def asymptotic_degree_moments(
    dist: SizeDistribution, n: int, m: int, s: int
) -> tuple[float, float]:
    """(E d, E d^2) of the asymptotic actor degree law.

    E d = mu1^2 and E d^2 = mu1^2 E[z(X)^2] + mu1^2.
    """
    _, w, zs, mu1 = _scale_quantities(dist, n, m, s)
    ez2 = float(np.dot(w, zs * zs))
    ed = mu1 * mu1
    return ed, ed * ez2 + ed


def alpha_active(dist: SizeDistribution, m: int, s: int) -> float:
    """Clustering coefficient of the actor graph: a1 / a2.

    For a fixed set size x this is 1 / C(x, s); it degrades to 0 as the
    second combinatorial moment blows up.
    """
    mom = moments(dist, s)
    if mom.a2 <= 0.0:
        raise ValueError("clustering undefined: no vertex can hold a joint")
    return mom.a1 / mom.a2


def alpha_active_beta_form(dist: SizeDistribution, n: int, m: int, s: int) -> float:
    """Clustering via the scale ratio: (1/sqrt(beta)) E[z] / E[z^2].

    Algebraically identical to :func:`alpha_active`; kept as a separate
    route so the identity can be checked numerically.
    """
    _, w, zs, mu1 = _scale_quantities(dist, n, m, s)
    ez2 = float(np.dot(w, zs * zs))
    if ez2 <= 0.0:
        raise ValueError("clustering undefined: E[z^2] = 0")
    beta = binomial(m, s) / n
    return (1.0 / math.sqrt(beta)) * mu1 / ez2


def alpha_active_from_degree_moments(beta: float, ed: float, ed2: float) -> float:
    """Clustering from asymptotic degree moments:
    (1/sqrt(beta)) * E[d]^(3/2) / (E[d^2] - E[d])."""
    if beta <= 0:
        raise ValueError("beta must be > 0")
    if not ed2 > ed > 0:
        raise ValueError("need E[d^2] > E[d] > 0 (nondegenerate degree)")
    return (1.0 / math.sqrt(beta)) * ed**1.5 / (ed2 - ed)


def alpha_k_active(dist: SizeDistribution, n: int, m: int, s: int, k: int) -> float:
    """Degree-conditional clustering of the actor graph.

    alpha^[k] = (1/k) (E[z]/sqrt(beta)) p_{k-1} / p_k with p the mixed
    Poisson degree law.  Constant in k for a fixed set size; ~ c/k for
    heavy-tailed sizes.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    pmf = mixed_poisson_degree_pmf(dist, n, m, s, k_max=k)
    p_km1, p_k = pmf.prob(k - 1), pmf.prob(k)
    if p_k <= 0.0:
        raise ValueError(f"degree {k} has zero asymptotic mass")
    _, _, _, mu1 = _scale_quantities(dist, n, m, s)
    beta = binomial(m, s) / n
    return (1.0 / k) * (mu1 / math.sqrt(beta)) * p_km1 / p_k


def passive_compound_spec(
    dist: SizeDistribution, n: int, m: int
) -> CompoundPoissonSpec:
    """Compound Poisson spec of the asymptotic attribute degree.

    Count mean (n/m) E[X]; jumps are the size-biased-and-shifted size
    law (covering sets are seen size-biased; the covered vertex itself
    does not count).  E[X] = 0 degenerates to zero jumps at rate 0.
    """
    ex = dist.mean()
    lam = (n / m) * ex
    jump = _size_biased_pmf(dist)
    return CompoundPoissonSpec(lam=lam, jump_pmf=jump)


def _size_biased_pmf(dist: SizeDistribution) -> DiscretePmf:
    from .model import size_biased

    return size_biased(dist.as_pmf())


def compound_poisson_pmf(
    spec: CompoundPoissonSpec, k_max: int | None = None
) -> DiscretePmf:
    """Pmf of the compound Poisson total, by the standard recursion:

        g_0 = exp(-lam (1 - f_0)),
        g_k = (lam / k) sum_{j=1..k} j f_j g_{k-j}.

    With ``k_max=None`` the truncation is extended until the tail mass
    drops below ``TAIL_TOL``.
    """
    f = np.asarray(spec.jump_pmf.probs, dtype=float)
    lam = spec.lam
    if lam == 0.0 or f.size == 1:
        out = np.zeros((k_max or 0) + 1)
        out[0] = 1.0
        return DiscretePmf(out, 0.0)
    mean = spec.mean()
    var = lam * spec.jump_pmf.second_moment()
    cap = k_max if k_max is not None else int(
        mean + 12.0 * math.sqrt(var + 1.0) + 30.0 + f.size
    )
    jf = np.arange(f.size) * f  # j * f_j
    g = np.zeros(cap + 1)
    g[0] = math.exp(-lam * (1.0 - f[0]))
    for k in range(1, cap + 1):
        jmax = min(k, f.size - 1)
        # sum_{j=1..jmax} j f_j g_{k-j}
        acc = float(np.dot(jf[1 : jmax + 1], g[k - 1 :: -1][:jmax]))
        g[k] = (lam / k) * acc
    if k_max is None:
        csum = np.cumsum(g[::-1])[::-1]
        keep = np.nonzero(csum >= TAIL_TOL)[0]
        g = g[: (int(keep[-1]) + 1) if keep.size else 1]
    tail = max(0.0, 1.0 - float(g.sum()))
    return DiscretePmf(g, tail)


def alpha_passive_finite(dist: SizeDistribution, n: int, m: int) -> float:
    """Finite-size clustering of the attribute graph (threshold 1):

        (beta*^2 m^{-1} f2^3 + f3) / (beta* f2^2 + f3),   beta* = n/m,

    with f_k the falling-factorial size moments.
    """
    mom = moments(dist, 1)
    if mom.f2 <= 0.0:
        raise ValueError("clustering undefined: E[(X)_2] = 0")
    beta_star = n / m
    num = beta_star**2 * mom.f2**3 / m + mom.f3
    den = beta_star * mom.f2**2 + mom.f3
    return num / den


def alpha_passive_limit(spec: CompoundPoissonSpec) -> float:
    """Limit clustering of the attribute graph from degree moments:

        (E[(d)_2] - (E d)^2) / E[(d)_2]

    computed via the compound Poisson moment identities.
    """
    ed = spec.mean()
    ed2m = spec.second_moment()
    fall2 = ed2m - ed
    if fall2 <= 0.0:
        raise ValueError("clustering undefined: E[(d)_2] <= 0 (no two-stars)")
    return (fall2 - ed * ed) / fall2


def _poisson_count_cap(lam: float, tol: float) -> int:
    """Smallest t with P(Poisson(lam) > t) < tol."""
    if lam <= 0.0:
        return 0
    t, term, cdf = 0, math.exp(-lam), math.exp(-lam)
    while 1.0 - cdf >= tol:
        t += 1
        term *= lam / t
        cdf += term
        if t > 10_000_000:  # pragma: no cover - safety valve
            raise RuntimeError("Poisson truncation failed to converge")
    return t


def alpha_k_passive_curve(
    spec: CompoundPoissonSpec, k_max: int
) -> dict[int, float]:
    """Degree-conditional clustering alpha*[k] for every k in [2, k_max].

    Exact bivariate dynamic program over the joint law of
    (total, sum of within-jump pairs): each jump contributes the pair
    (j, j (j-1)) with probability f_j, the Poisson count is truncated
    where its tail drops below ``COUNT_TAIL_TOL``, and

        alpha*[k] = E[pair sum | total = k] / (k (k - 1)).

    Degrees k with zero probability are omitted from the result.
    """
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    f = np.asarray(spec.jump_pmf.probs, dtype=float)
    jmax = f.size - 1
    s2_cap = k_max * (k_max - 1)
    t_cap = _poisson_count_cap(spec.lam, COUNT_TAIL_TOL)
    # joint[t] built iteratively; accumulate Poisson-weighted mixture
    joint = np.zeros((k_max + 1, s2_cap + 1))
    joint[0, 0] = 1.0
    acc = np.zeros_like(joint)
    log_lam = math.log(spec.lam) if spec.lam > 0 else -math.inf
    for t in range(t_cap + 1):
        if spec.lam > 0:
            w = math.exp(t * log_lam - spec.lam - math.lgamma(t + 1))
        else:
            w = 1.0 if t == 0 else 0.0
        acc += w * joint
        if t == t_cap:
            break
        nxt = np.zeros_like(joint)
        for j in range(min(jmax, k_max) + 1):
            if f[j] == 0.0:
                continue
            j2 = j * (j - 1)
            if j == 0:
                nxt += f[j] * joint
            else:
                nxt[j:, j2:] += f[j] * joint[:-j, : s2_cap + 1 - j2]
        joint = nxt
    out: dict[int, float] = {}
    s2_vals = np.arange(s2_cap + 1, dtype=float)
    for k in range(2, k_max + 1):
        pk = float(acc[k].sum())
        if pk <= 0.0:
            continue
        expected = float(np.dot(s2_vals, acc[k])) / pk
        out[k] = expected / (k * (k - 1))
    return out


def alpha_k_passive(
    spec: CompoundPoissonSpec, k: int, k_max: int | None = None
) -> float:
    """alpha*[k] for a single degree; see :func:`alpha_k_passive_curve`."""
    if k < 2:
        raise ValueError("k must be >= 2")
    cap = max(k, k_max or k)
    curve = alpha_k_passive_curve(spec, cap)
    if k not in curve:
        raise ValueError(f"degree {k} has zero asymptotic mass")
    return curve[k]


def poisson_approx_stats(sizes, m: int, s: int) -> PoissonApproxStats:
    """Diagnostics of the Poisson degree approximation for vertex 1.

    With u_k = C(x_1, s) C(x_k, s) and x+ = max(0, x - s):

        lambda_bar = C(m,s)^{-1} sum_{k>=2} u_k
        kappa1     = C(m,s)^{-2} sum_{k>=2} u_k^2
        kappa2     = (x1+/(m - x1)) C(m,s)^{-1} sum_{k>=2} u_k xk+

    kappa2 is +inf when x1 = m with s < m (the guard term divides by 0).
    """
    xs = np.asarray(list(sizes), dtype=np.int64)
    if xs.size < 2:
        raise ValueError("need at least 2 set sizes")
    if np.any(xs < 0) or np.any(xs > m):
        raise ValueError("sizes must lie in [0, m]")
    big_m = binomial(m, s)
    c1 = binomial(int(xs[0]), s)
    cs = np.array([binomial(int(x), s) for x in xs[1:]])
    u = c1 * cs
    lam = float(u.sum() / big_m)
    kappa1 = float(np.dot(u, u) / (big_m * big_m))
    x1p = max(0, int(xs[0]) - s)
    xkp = np.maximum(0, xs[1:] - s).astype(float)
    if x1p == 0:
        kappa2 = 0.0
    elif int(xs[0]) == m:
        kappa2 = math.inf
    else:
        kappa2 = float(x1p / (m - int(xs[0])) * np.dot(u, xkp) / big_m)
    return PoissonApproxStats(lambda_bar=lam, kappa1=kappa1, kappa2=kappa2)


def passive_regime_classify(n: int, m: int, dist: SizeDistribution) -> RegimeReport:
    """Classify the passive-degree regime.

    n_star = n P(X >= 2) counts the sets that can create edges.  The
    report says whether degrees vanish (attributes dominate), diverge
    (effective sets dominate), or admit a nondegenerate compound Poisson
    limit (balanced; then use floor(n_star) sets with sizes conditioned
    on >= 2).  The 0.01 thresholds are a reporting convention for the
    asymptotic orders.
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    n_star = n * dist.prob_ge(2)
    if n / m < _REGIME_RATIO:
        return RegimeReport(
            case_label="m_dominates",
            n_star=n_star,
            advice=(
                "far more attributes than sets: conditioned on having any "
                "neighbor, degrees grow like m/n; no nondegenerate limit"
            ),
        )
    if n_star / m < _REGIME_RATIO:
        return RegimeReport(
            case_label="n_star_small",
            n_star=n_star,
            advice=(
                "few sets of size >= 2: conditioned on having any neighbor, "
                "degrees grow like m/max(1, n_star); no nondegenerate limit"
            ),
        )
    if m / n_star < _REGIME_RATIO:
        return RegimeReport(
            case_label="n_star_dominates",
            n_star=n_star,
            advice="edge-creating sets dominate: degrees diverge to infinity",
        )
    return RegimeReport(
        case_label="balanced",
        n_star=n_star,
        advice=(
            "compound Poisson limit applies; when sizes 0/1 carry mass use "
            f"effective parameters n={math.floor(n_star)} with the size law "
            "conditioned on X >= 2"
        ),
    )
