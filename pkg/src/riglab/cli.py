"""Scenario orchestration and the ``riglab`` command line.

A scenario is a JSON object describing one model, a replicate count and
the analyses to run.  Replicate r always draws from stream r of the
scenario seed, workers share nothing, and results are folded in
replicate order, so a report body is a pure function of (config, seed)
at any parallelism level.  Wall-clock numbers live in a separate
``timing`` section so report bodies can be compared byte for byte.

Config parsing is fail-closed: unknown keys anywhere raise an error
naming the offending field path.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import oracle, stats, theory
from .model import (
    BinomialSizes,
    Degenerate,
    DiscretePmf,
    ModelParams,
    SizeDistribution,
    SizeSpec,
    Table,
    TruncatedPowerLaw,
    make_size_dist,
)
from .sampler import (
    ResourceLimitError,
    RngStream,
    build_active,
    build_passive,
    sample_incidence,
    write_edge_list,
)

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "Report",
    "parse_scenario",
    "load_config",
    "preset_config",
    "PRESETS",
    "run_scenario",
    "main",
]

OUTPUTS = ("degree", "clustering", "alpha_k", "regime", "theorem1_stats", "example2")
DEFAULT_TOLERANCES = {"tv_degree": 0.01, "alpha_abs": 0.02, "alpha_k_rel": 0.25}
ENV_SEED = "RIGLAB_SEED"

EXIT_PASS = 0
EXIT_USAGE = 1
EXIT_COMPARISON = 2


class ConfigError(ValueError):
    """Invalid configuration; the message carries the field path."""

    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}")
        self.path = path


def _check_keys(obj: dict, path: str, required: tuple, optional: tuple = ()) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected an object")
    allowed = set(required) | set(optional)
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}", "unknown key")
    for key in required:
        if key not in obj:
            raise ConfigError(f"{path}.{key}", "missing required key")


def _int_field(obj: dict, key: str, path: str, minimum: int | None = None) -> int:
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}.{key}", "expected an integer")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{path}.{key}", f"must be >= {minimum}")
    return value


def parse_size_spec(obj: dict, path: str) -> SizeSpec:
    _check_keys(obj, path, required=("kind",), optional=("x", "weights", "gamma", "x_min", "x_max", "trials", "p"))
    kind = obj["kind"]
    try:
        if kind == "degenerate":
            _check_keys(obj, path, required=("kind", "x"))
            return Degenerate(x=_int_field(obj, "x", path, 0))
        if kind == "table":
            _check_keys(obj, path, required=("kind", "weights"))
            if not isinstance(obj["weights"], list):
                raise ConfigError(f"{path}.weights", "expected a list")
            return Table(weights=[float(w) for w in obj["weights"]])
        if kind == "truncated_power_law":
            _check_keys(obj, path, required=("kind", "gamma", "x_min", "x_max"))
            return TruncatedPowerLaw(
                gamma=float(obj["gamma"]),
                x_min=_int_field(obj, "x_min", path, 1),
                x_max=_int_field(obj, "x_max", path, 1),
            )
        if kind == "binomial":
            _check_keys(obj, path, required=("kind", "trials", "p"))
            return BinomialSizes(trials=_int_field(obj, "trials", path, 0), p=float(obj["p"]))
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from exc
    raise ConfigError(f"{path}.kind", f"unknown size distribution kind {kind!r}")


@dataclass
class ScenarioConfig:
    """One validated scenario: model, replication and requested analyses."""

    kind: str
    n: int
    m: int
    s: int
    size_spec: SizeSpec
    size_dist: SizeDistribution
    replicates: int
    seed: int | None
    outputs: tuple[str, ...]
    tolerances: dict[str, float]
    k_range: tuple[int, int]
    k_max: int | None
    min_bucket: int
    epsilon: float | None

    def params(self) -> ModelParams:
        return ModelParams(n=self.n, m=self.m, s=self.s, size_dist=self.size_dist, kind=self.kind)

    def echo(self, seed: int) -> dict:
        spec = self.size_spec
        if isinstance(spec, Degenerate):
            sd = {"kind": "degenerate", "x": spec.x}
        elif isinstance(spec, Table):
            sd = {"kind": "table", "weights": list(spec.weights)}
        elif isinstance(spec, TruncatedPowerLaw):
            sd = {"kind": "truncated_power_law", "gamma": spec.gamma, "x_min": spec.x_min, "x_max": spec.x_max}
        else:
            sd = {"kind": "binomial", "trials": spec.trials, "p": spec.p}
        return {
            "model": {"kind": self.kind, "n": self.n, "m": self.m, "s": self.s, "size_dist": sd},
            "replicates": self.replicates,
            "seed": seed,
            "outputs": list(self.outputs),
            "tolerances": dict(sorted(self.tolerances.items())),
            "k_range": list(self.k_range),
            "k_max": self.k_max,
            "min_bucket": self.min_bucket,
            "epsilon": self.epsilon,
        }


def parse_scenario(doc: dict) -> ScenarioConfig:
    """Validate a config document (fail-closed) into a ScenarioConfig."""
    _check_keys(doc, "$", required=("scenario",))
    sc = doc["scenario"]
    _check_keys(
        sc,
        "scenario",
        required=("model", "replicates", "outputs"),
        optional=("seed", "tolerances", "k_range", "k_max", "min_bucket", "epsilon"),
    )
    model = sc["model"]
    _check_keys(model, "scenario.model", required=("kind", "n", "m", "s", "size_dist"))
    kind = model["kind"]
    if kind not in ("active", "passive"):
        raise ConfigError("scenario.model.kind", "must be 'active' or 'passive'")
    n = _int_field(model, "n", "scenario.model", 1)
    m = _int_field(model, "m", "scenario.model", 1)
    s = _int_field(model, "s", "scenario.model", 1)
    spec = parse_size_spec(model["size_dist"], "scenario.model.size_dist")
    try:
        dist = make_size_dist(spec, m)
        params = ModelParams(n=n, m=m, s=s, size_dist=dist, kind=kind)
    except ValueError as exc:
        raise ConfigError("scenario.model", str(exc)) from exc
    replicates = _int_field(sc, "replicates", "scenario", 1)
    outputs = sc["outputs"]
    if not isinstance(outputs, list) or not outputs:
        raise ConfigError("scenario.outputs", "expected a non-empty list")
    for i, out in enumerate(outputs):
        if out not in OUTPUTS:
            raise ConfigError(f"scenario.outputs[{i}]", f"unknown analysis {out!r}; known: {OUTPUTS}")
    seed = None
    if "seed" in sc:
        seed = _int_field(sc, "seed", "scenario", 0)
    tolerances = dict(DEFAULT_TOLERANCES)
    if "tolerances" in sc:
        tol = sc["tolerances"]
        _check_keys(tol, "scenario.tolerances", required=(), optional=tuple(DEFAULT_TOLERANCES))
        for key, value in tol.items():
            value = float(value)
            if not value > 0:
                raise ConfigError(f"scenario.tolerances.{key}", "must be > 0")
            tolerances[key] = value
    k_range = (2, 20)
    if "k_range" in sc:
        kr = sc["k_range"]
        if not (isinstance(kr, list) and len(kr) == 2 and all(isinstance(k, int) for k in kr)):
            raise ConfigError("scenario.k_range", "expected [k_min, k_max] integers")
        if not 2 <= kr[0] <= kr[1]:
            raise ConfigError("scenario.k_range", "need 2 <= k_min <= k_max")
        k_range = (kr[0], kr[1])
    k_max = None
    if "k_max" in sc and sc["k_max"] is not None:
        k_max = _int_field(sc, "k_max", "scenario", 1)
    min_bucket = stats.DEFAULT_MIN_BUCKET
    if "min_bucket" in sc:
        min_bucket = _int_field(sc, "min_bucket", "scenario", 1)
    epsilon = None
    if "epsilon" in sc:
        epsilon = float(sc["epsilon"])
        if not 0 < epsilon < 0.5:
            raise ConfigError("scenario.epsilon", "must lie in (0, 0.5)")
    if "example2" in outputs and epsilon is None:
        raise ConfigError("scenario.epsilon", "required when outputs include 'example2'")
    return ScenarioConfig(
        kind=kind,
        n=n,
        m=m,
        s=s,
        size_spec=spec,
        size_dist=dist,
        replicates=replicates,
        seed=seed,
        outputs=tuple(outputs),
        tolerances=tolerances,
        k_range=k_range,
        k_max=k_max,
        min_bucket=min_bucket,
        epsilon=epsilon,
    )


def load_config(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("$", f"invalid JSON: {exc}") from exc
    return parse_scenario(doc)


# ---------------------------------------------------------------- presets

def _preset_example1() -> dict:
    # fixed size 6, threshold 2, scale tuned so the degree law is ~Poisson(1)
    return {
        "scenario": {
            "model": {
                "kind": "active",
                "n": 20000,
                "m": 3000,
                "s": 2,
                "size_dist": {"kind": "degenerate", "x": 6},
            },
            "replicates": 2,
            "outputs": ["degree", "theorem1_stats"],
        }
    }


def _preset_example2() -> dict:
    # half-overlap diagnostics: s = m/2, x = 0.6 m; n tuned so the
    # conditional degree mean is ~1 while kappa2 stays order-1
    return {
        "scenario": {
            "model": {
                "kind": "active",
                "n": 1222,
                "m": 40,
                "s": 20,
                "size_dist": {"kind": "degenerate", "x": 24},
            },
            "replicates": 1,
            "outputs": ["example2", "theorem1_stats"],
            "epsilon": 0.1,
        }
    }


def _preset_example3() -> dict:
    # heavy-tailed sizes: clustering decays like 1/degree
    return {
        "scenario": {
            "model": {
                "kind": "active",
                "n": 200000,
                "m": 200000,
                "s": 1,
                "size_dist": {"kind": "truncated_power_law", "gamma": 4.5, "x_min": 1, "x_max": 200},
            },
            "replicates": 4,
            "outputs": ["degree", "clustering", "alpha_k"],
            "k_range": [4, 20],
        }
    }


def _preset_example4() -> dict:
    # fixed size 2 at n = m: Poisson(4) degrees, flat alpha^[k]
    return {
        "scenario": {
            "model": {
                "kind": "active",
                "n": 100000,
                "m": 100000,
                "s": 1,
                "size_dist": {"kind": "degenerate", "x": 2},
            },
            "replicates": 1,
            "outputs": ["degree", "clustering", "alpha_k"],
            "k_range": [2, 10],
        }
    }


def _preset_example5() -> dict:
    # passive fixed size 4: compound Poisson degrees, alpha*[k] = 2/(k-1)
    return {
        "scenario": {
            "model": {
                "kind": "passive",
                "n": 100000,
                "m": 100000,
                "s": 1,
                "size_dist": {"kind": "degenerate", "x": 4},
            },
            "replicates": 1,
            "outputs": ["degree", "clustering", "alpha_k", "regime"],
            "k_range": [3, 12],
        }
    }


PRESETS = {
    "example1": _preset_example1,
    "example2": _preset_example2,
    "example3": _preset_example3,
    "example4": _preset_example4,
    "example5": _preset_example5,
}


def preset_config(name: str) -> ScenarioConfig:
    if name not in PRESETS:
        raise ConfigError("preset", f"unknown preset {name!r}; known: {sorted(PRESETS)}")
    return parse_scenario(PRESETS[name]())


# ---------------------------------------------------------------- execution

def _replicate_worker(args: tuple) -> tuple:
    """Run one replicate on its own stream; returns plain picklable data."""
    kind, n, m, s, support_max, weights, seed, r, min_bucket, want_sizes = args
    dist = SizeDistribution(support_max, np.asarray(weights))
    params = ModelParams(n=n, m=m, s=s, size_dist=dist, kind=kind)
    rng = RngStream(seed, r)
    try:
        inc = sample_incidence(params, rng)
        graph = build_active(inc, s) if kind == "active" else build_passive(inc, s)
    except ResourceLimitError as exc:
        raise ResourceLimitError(f"replicate {r}: {exc}") from exc
    degree_counts = np.bincount(graph.degrees, minlength=1)
    report = stats.clustering_report(graph, min_bucket)
    sizes = inc.sizes.copy() if want_sizes else None
    return r, degree_counts, report, sizes


def _run_replicates(cfg: ScenarioConfig, seed: int, jobs: int):
    tasks = [
        (
            cfg.kind,
            cfg.n,
            cfg.m,
            cfg.s,
            cfg.size_dist.support_max,
            np.asarray(cfg.size_dist.weights),
            seed,
            r,
            cfg.min_bucket,
            r == 0,
        )
        for r in range(cfg.replicates)
    ]
    if jobs <= 1 or cfg.replicates == 1:
        results = [_replicate_worker(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, cfg.replicates)) as pool:
            results = list(pool.map(_replicate_worker, tasks))
    results.sort(key=lambda item: item[0])
    return results


def _json_float(x) -> float | str | None:
    if x is None:
        return None
    x = float(x)
    if math.isfinite(x):
        return x
    return "inf" if x > 0 else ("-inf" if x < 0 else "nan")


def _pmf_json(pmf: DiscretePmf) -> dict:
    return {"probs": [float(p) for p in pmf.probs], "tail_mass": float(pmf.tail_mass)}


@dataclass
class Report:
    """Scenario result: a deterministic body plus timing metadata."""

    body: dict
    timing: dict = field(default_factory=dict)

    def json_body(self) -> str:
        return json.dumps(self.body, sort_keys=True, indent=2)

    def to_json(self) -> str:
        return json.dumps({**self.body, "timing": self.timing}, sort_keys=True, indent=2)

    @property
    def passed(self) -> bool:
        flags = [v for v in self.body["passes"].values() if v is not None]
        return all(flags)


def _theory_degree_pmf(cfg: ScenarioConfig) -> DiscretePmf | None:
    if cfg.kind == "active":
        return theory.mixed_poisson_degree_pmf(cfg.size_dist, cfg.n, cfg.m, cfg.s, k_max=cfg.k_max)
    if cfg.s == 1:
        spec = theory.passive_compound_spec(cfg.size_dist, cfg.n, cfg.m)
        return theory.compound_poisson_pmf(spec, k_max=cfg.k_max)
    return None  # passive s >= 2: construction only, no limit law


def _theory_alpha(cfg: ScenarioConfig) -> float | None:
    try:
        if cfg.kind == "active":
            return theory.alpha_active(cfg.size_dist, cfg.m, cfg.s)
        if cfg.s == 1:
            return theory.alpha_passive_finite(cfg.size_dist, cfg.n, cfg.m)
    except ValueError:
        return None
    return None


def _theory_alpha_k(cfg: ScenarioConfig, ks: list[int]) -> dict[int, float]:
    out: dict[int, float] = {}
    if cfg.kind == "active":
        for k in ks:
            try:
                out[k] = theory.alpha_k_active(cfg.size_dist, cfg.n, cfg.m, cfg.s, k)
            except ValueError:
                continue
        return out
    if cfg.s != 1:
        return out
    spec = theory.passive_compound_spec(cfg.size_dist, cfg.n, cfg.m)
    curve = theory.alpha_k_passive_curve(spec, max(ks)) if ks else {}
    return {k: curve[k] for k in ks if k in curve}


def run_scenario(cfg: ScenarioConfig, seed: int | None = None, jobs: int | None = None) -> Report:
    """Execute a scenario: simulate replicates, evaluate theory, compare.

    The report body depends only on (cfg, seed); jobs only changes how
    replicates are scheduled.
    """
    t_start = time.perf_counter()
    resolved_seed = _resolve_seed(seed, cfg.seed)
    jobs = jobs if jobs and jobs > 0 else (os.cpu_count() or 1)
    need_sim = any(o in cfg.outputs for o in ("degree", "clustering", "alpha_k", "theorem1_stats"))
    results = _run_replicates(cfg, resolved_seed, jobs) if need_sim else []
    vertices_per_rep = cfg.n if cfg.kind == "active" else cfg.m

    analyses: dict[str, dict] = {}
    passes: dict[str, bool | None] = {}
    metadata = {
        "asymptotic_prediction": True,
        "clamped_probability": False,
        "passive_s_ge2_no_theory": cfg.kind == "passive" and cfg.s >= 2,
        "alpha_hat_convention": stats.ALPHA_HAT_CONVENTION,
    }
    if cfg.kind == "active":
        edge = theory.active_edge_prob_asymptotic(cfg.size_dist, cfg.m, cfg.s)
        metadata["clamped_probability"] = edge.clamped

    pooled_report = None
    if results:
        pooled_report = stats.pooled_estimates([rep for _, _, rep, _ in results])

    if "degree" in cfg.outputs:
        width = max(counts.size for _, counts, _, _ in results)
        total = np.zeros(width)
        for _, counts, _, _ in results:
            total[: counts.size] += counts
        empirical = DiscretePmf(total / (vertices_per_rep * cfg.replicates), 0.0)
        theory_pmf = _theory_degree_pmf(cfg)
        entry: dict = {"empirical": _pmf_json(empirical)}
        if theory_pmf is None:
            entry["theory"] = None
            entry["tv"] = None
            passes["degree"] = None
        else:
            tv = stats.tv_distance(empirical, theory_pmf)
            entry["theory"] = _pmf_json(theory_pmf)
            entry["tv"] = tv
            entry["tolerance"] = cfg.tolerances["tv_degree"]
            passes["degree"] = bool(tv < cfg.tolerances["tv_degree"])
        analyses["degree"] = entry

    if "clustering" in cfg.outputs:
        rep = pooled_report
        theory_alpha = _theory_alpha(cfg)
        entry = {
            "alpha_hat": _json_float(rep.alpha_hat),
            "alpha_hat_hat": _json_float(rep.alpha_hat_hat),
            "se_alpha_hat_hat": _json_float(rep.se_alpha_hat_hat),
            "theory_alpha": _json_float(theory_alpha),
        }
        if theory_alpha is None or rep.alpha_hat_hat is None:
            entry["abs_diff"] = None
            passes["clustering"] = None if theory_alpha is None else False
        else:
            diff = abs(rep.alpha_hat_hat - theory_alpha)
            entry["abs_diff"] = diff
            entry["tolerance"] = cfg.tolerances["alpha_abs"]
            passes["clustering"] = bool(diff <= cfg.tolerances["alpha_abs"])
        analyses["clustering"] = entry

    if "alpha_k" in cfg.outputs:
        ks = list(range(cfg.k_range[0], cfg.k_range[1] + 1))
        theory_curve = _theory_alpha_k(cfg, ks)
        per_k = {}
        checked, ok = 0, True
        for k in ks:
            emp = pooled_report.per_degree.get(k)
            th = theory_curve.get(k)
            row = {
                "empirical": _json_float(emp),
                "theory": _json_float(th),
                "bucket_count": pooled_report.bucket_counts.get(k, 0),
                "se": _json_float(pooled_report.per_degree_se.get(k)),
            }
            per_k[str(k)] = row
            if emp is not None and th is not None and th > 0:
                checked += 1
                if abs(emp - th) / th > cfg.tolerances["alpha_k_rel"]:
                    ok = False
        entry = {"per_k": per_k, "buckets_compared": checked}
        if len([1 for row in per_k.values() if row["empirical"] is not None]) >= 3:
            emp_points = {
                int(k): row["empirical"]
                for k, row in per_k.items()
                if row["empirical"] is not None and row["empirical"] > 0
            }
            if len(emp_points) >= 3:
                fit = stats.loglog_slope(emp_points)
                entry["loglog"] = {"slope": fit.slope, "intercept": fit.intercept, "r2": fit.r2}
        if cfg.kind == "passive" and cfg.s >= 2:
            passes["alpha_k"] = None
        else:
            passes["alpha_k"] = bool(ok and checked > 0)
        analyses["alpha_k"] = entry

    if "regime" in cfg.outputs:
        regime = theory.passive_regime_classify(cfg.n, cfg.m, cfg.size_dist)
        analyses["regime"] = {
            "case_label": regime.case_label,
            "n_star": regime.n_star,
            "advice": regime.advice,
        }

    if "theorem1_stats" in cfg.outputs:
        sizes0 = results[0][3]
        diag = theory.poisson_approx_stats(sizes0, cfg.m, cfg.s)
        analyses["theorem1_stats"] = {
            "lambda_bar": _json_float(diag.lambda_bar),
            "kappa1": _json_float(diag.kappa1),
            "kappa2": _json_float(diag.kappa2),
        }

    if "example2" in cfg.outputs:
        diag2 = oracle.dense_overlap_diagnostics(cfg.m, cfg.epsilon)
        analyses["example2"] = {
            "p_star": diag2.p_star,
            "ratio_prime": diag2.ratio_prime,
            "bound": diag2.bound,
            "tail_within_10pct": diag2.tail_within_10pct,
        }
        passes["example2"] = bool(diag2.ratio_prime <= diag2.bound)

    body = {
        "scenario": cfg.echo(resolved_seed),
        "metadata": metadata,
        "analyses": analyses,
        "passes": passes,
    }
    timing = {"wall_clock_s": time.perf_counter() - t_start, "jobs": jobs}
    return Report(body=body, timing=timing)


def _resolve_seed(cli_seed: int | None, cfg_seed: int | None) -> int:
    if cli_seed is not None:
        return cli_seed
    if cfg_seed is not None:
        return cfg_seed
    env = os.environ.get(ENV_SEED)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(ENV_SEED, f"not an integer: {env!r}") from exc
    return 0


# ---------------------------------------------------------------- output files

def _write_csvs(report: Report, out_dir: str) -> None:
    analyses = report.body["analyses"]
    if "degree" in analyses and analyses["degree"].get("theory") is not None:
        emp = analyses["degree"]["empirical"]["probs"]
        th = analyses["degree"]["theory"]["probs"]
        width = max(len(emp), len(th))
        with open(os.path.join(out_dir, "degree.csv"), "w", encoding="ascii") as fh:
            fh.write("k,empirical,theory,abs_diff\n")
            for k in range(width):
                e = emp[k] if k < len(emp) else 0.0
                t = th[k] if k < len(th) else 0.0
                fh.write(f"{k},{e!r},{t!r},{abs(e - t)!r}\n")
    if "alpha_k" in analyses:
        with open(os.path.join(out_dir, "alpha_k.csv"), "w", encoding="ascii") as fh:
            fh.write("k,empirical,theory,bucket_count,se\n")
            for k, row in sorted(analyses["alpha_k"]["per_k"].items(), key=lambda kv: int(kv[0])):
                emp = "" if row["empirical"] is None else repr(row["empirical"])
                th = "" if row["theory"] is None else repr(row["theory"])
                se = "" if row["se"] is None else repr(row["se"])
                fh.write(f"{k},{emp},{th},{row['bucket_count']},{se}\n")


def _summary_lines(report: Report) -> list[str]:
    lines = []
    analyses = report.body["analyses"]
    passes = report.body["passes"]
    for name in report.body["scenario"]["outputs"]:
        entry = analyses.get(name, {})
        flag = passes.get(name)
        status = "PASS" if flag else ("FAIL" if flag is not None else "info")
        if name == "degree":
            lines.append(f"degree: tv={entry.get('tv')} [{status}]")
        elif name == "clustering":
            lines.append(
                f"clustering: alpha_hat_hat={entry.get('alpha_hat_hat')} "
                f"theory={entry.get('theory_alpha')} [{status}]"
            )
        elif name == "alpha_k":
            lines.append(f"alpha_k: buckets_compared={entry.get('buckets_compared')} [{status}]")
        elif name == "regime":
            lines.append(f"regime: {entry.get('case_label')} (n_star={entry.get('n_star')}) [info]")
        elif name == "theorem1_stats":
            lines.append(
                f"theorem1_stats: lambda={entry.get('lambda_bar')} kappa1={entry.get('kappa1')} "
                f"kappa2={entry.get('kappa2')} [info]"
            )
        elif name == "example2":
            lines.append(
                f"example2: ratio_prime={entry.get('ratio_prime')} bound={entry.get('bound')} [{status}]"
            )
    return lines


# ---------------------------------------------------------------- CLI plumbing

def _add_size_dist_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--size-dist",
        required=True,
        help='size distribution as JSON, e.g. \'{"kind": "degenerate", "x": 5}\'',
    )


def _parse_size_dist_arg(text: str, m: int) -> SizeDistribution:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("--size-dist", f"invalid JSON: {exc}") from exc
    spec = parse_size_spec(obj, "--size-dist")
    try:
        return make_size_dist(spec, m)
    except ValueError as exc:
        raise ConfigError("--size-dist", str(exc)) from exc


def _print_json(obj) -> None:
    print(json.dumps(obj, sort_keys=True, indent=2))


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = preset_config(args.preset) if args.preset else load_config(args.config)
    report = run_scenario(cfg, seed=args.seed, jobs=args.jobs)
    for line in _summary_lines(report):
        print(line)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "report.json"), "w", encoding="utf-8") as fh:
            fh.write(report.to_json() + "\n")
        _write_csvs(report, args.out)
        print(f"report written to {args.out}/report.json")
    else:
        print(report.to_json())
    return EXIT_PASS if report.passed else EXIT_COMPARISON


def _cmd_gen(args: argparse.Namespace) -> int:
    cfg = preset_config(args.preset) if args.preset else load_config(args.config)
    seed = _resolve_seed(args.seed, cfg.seed)
    rng = RngStream(seed, 0)
    inc = sample_incidence(cfg.params(), rng)
    graph = build_active(inc, cfg.s) if cfg.kind == "active" else build_passive(inc, cfg.s)
    write_edge_list(graph, args.emit_graph, kind=cfg.kind, n=cfg.n, m=cfg.m, s=cfg.s, seed=seed)
    print(f"{cfg.kind} graph with {graph.vertex_count} vertices, {graph.edge_count} edges -> {args.emit_graph}")
    return EXIT_PASS


def _cmd_theory(args: argparse.Namespace) -> int:
    sub = args.theory_cmd
    if sub == "edge-prob":
        dist = _parse_size_dist_arg(args.size_dist, args.m)
        res = theory.active_edge_prob_asymptotic(dist, args.m, args.s)
        _print_json({"value": res.value, "raw": res.raw, "clamped": res.clamped})
    elif sub == "degree-pmf":
        dist = _parse_size_dist_arg(args.size_dist, args.m)
        pmf = theory.mixed_poisson_degree_pmf(dist, args.n, args.m, args.s, k_max=args.k_max)
        _print_json(_pmf_json(pmf))
    elif sub == "alpha":
        dist = _parse_size_dist_arg(args.size_dist, args.m)
        _print_json({"alpha": theory.alpha_active(dist, args.m, args.s)})
    elif sub == "alpha-beta-form":
        dist = _parse_size_dist_arg(args.size_dist, args.m)
        _print_json({"alpha": theory.alpha_active_beta_form(dist, args.n, args.m, args.s)})
    elif sub == "alpha-from-moments":
        _print_json({"alpha": theory.alpha_active_from_degree_moments(args.beta, args.ed, args.ed2)})
    elif sub == "alpha-k":
        dist = _parse_size_dist_arg(args.size_dist, args.m)
        _print_json({"alpha_k": theory.alpha_k_active(dist, args.n, args.m, args.s, args.k)})
    elif sub == "passive-spec":
        dist = _parse_size_dist_arg(args.size_dist, args.m)
        spec = theory.passive_compound_spec(dist, args.n, args.m)
        _print_json({"lam": spec.lam, "jump": _pmf_json(spec.jump_pmf)})
    elif sub == "compound-pmf":
        probs = [float(p) for p in args.jump_probs.split(",")]
        spec = theory.CompoundPoissonSpec(args.lam, DiscretePmf(np.array(probs)))
        _print_json(_pmf_json(theory.compound_poisson_pmf(spec, k_max=args.k_max)))
    elif sub == "alpha-passive":
        dist = _parse_size_dist_arg(args.size_dist, args.m)
        _print_json({"alpha_star": theory.alpha_passive_finite(dist, args.n, args.m)})
    elif sub == "alpha-passive-limit":
        dist = _parse_size_dist_arg(args.size_dist, args.m)
        spec = theory.passive_compound_spec(dist, args.n, args.m)
        _print_json({"alpha_star": theory.alpha_passive_limit(spec)})
    elif sub == "alpha-k-passive":
        dist = _parse_size_dist_arg(args.size_dist, args.m)
        spec = theory.passive_compound_spec(dist, args.n, args.m)
        _print_json({"alpha_star_k": theory.alpha_k_passive(spec, args.k)})
    elif sub == "regime":
        dist = _parse_size_dist_arg(args.size_dist, args.m)
        rep = theory.passive_regime_classify(args.n, args.m, dist)
        _print_json({"case_label": rep.case_label, "n_star": rep.n_star, "advice": rep.advice})
    elif sub == "degree-stats":
        if args.sizes:
            sizes = [int(x) for x in args.sizes.split(",")]
        elif args.uniform_size is not None and args.count is not None:
            sizes = [args.uniform_size] * args.count
        else:
            raise ConfigError(
                "--sizes", "provide either --sizes or both --uniform-size and --count"
            )
        diag = theory.poisson_approx_stats(sizes, args.m, args.s)
        _print_json(
            {
                "lambda_bar": _json_float(diag.lambda_bar),
                "kappa1": _json_float(diag.kappa1),
                "kappa2": _json_float(diag.kappa2),
            }
        )
    else:  # pragma: no cover
        raise ConfigError("theory", f"unknown subcommand {sub!r}")
    return EXIT_PASS


def _cmd_oracle(args: argparse.Namespace) -> int:
    sub = args.oracle_cmd
    if sub == "intersection-pmf":
        _print_json(_pmf_json(oracle.intersection_pmf(args.m, args.d1, args.d2)))
    elif sub == "intersection-tail":
        _print_json({"tail": oracle.intersection_tail(args.m, args.d1, args.d2, args.s)})
    elif sub == "tail-bounds":
        b = oracle.intersection_tail_bounds(args.m, args.d1, args.d2, args.s)
        _print_json({"lower": b.lower, "upper": b.upper})
    elif sub == "exact-degree-pmf":
        dist = _parse_size_dist_arg(args.size_dist, args.m)
        _print_json(_pmf_json(oracle.exact_active_degree_pmf(dist, args.n, args.m, args.s)))
    elif sub == "links-pmf":
        dist = _parse_size_dist_arg(args.size_dist, args.m)
        _print_json(_pmf_json(oracle.exact_passive_links_pmf(dist, args.n, args.m, k_max=args.k_max)))
    elif sub == "lecam":
        probs = [float(p) for p in args.probs.split(",")] if args.probs else []
        _print_json({"bound": oracle.lecam_bound(probs)})
    elif sub == "brute-force":
        dist = _parse_size_dist_arg(args.size_dist, args.m)
        params = ModelParams(n=args.n, m=args.m, s=args.s, size_dist=dist, kind=args.kind)
        _print_json(_pmf_json(oracle.brute_force_degree_pmf(params)))
    elif sub == "dense-overlap":
        d = oracle.dense_overlap_diagnostics(args.m, args.epsilon)
        _print_json(
            {
                "p_star": d.p_star,
                "ratio_prime": d.ratio_prime,
                "bound": d.bound,
                "tail_within_10pct": d.tail_within_10pct,
            }
        )
    else:  # pragma: no cover
        raise ConfigError("oracle", f"unknown subcommand {sub!r}")
    return EXIT_PASS


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riglab",
        description="Simulate sparse random intersection graphs and check them against closed-form degree and clustering laws.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    run_p = subs.add_parser("run", help="run a scenario and emit a report")
    src = run_p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="path to a scenario JSON file")
    src.add_argument("--preset", choices=sorted(PRESETS), help="built-in scenario")
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")
    run_p.add_argument("--out", default=None, help="directory for report.json and CSV tables")
    run_p.set_defaults(func=_cmd_run)

    gen_p = subs.add_parser("gen", help="generate one graph and write its edge list")
    src = gen_p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="path to a scenario JSON file")
    src.add_argument("--preset", choices=sorted(PRESETS))
    gen_p.add_argument("--seed", type=int, default=None)
    gen_p.add_argument("--emit-graph", required=True, help="output path for the edge list")
    gen_p.set_defaults(func=_cmd_gen)

    th = subs.add_parser("theory", help="evaluate closed-form laws")
    th_subs = th.add_subparsers(dest="theory_cmd", required=True)
    p = th_subs.add_parser("edge-prob")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    _add_size_dist_arg(p)
    p = th_subs.add_parser("degree-pmf")
    for flag in ("--n", "--m", "--s"):
        p.add_argument(flag, type=int, required=True)
    p.add_argument("--k-max", type=int, default=None)
    _add_size_dist_arg(p)
    p = th_subs.add_parser("alpha")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    _add_size_dist_arg(p)
    p = th_subs.add_parser("alpha-beta-form")
    for flag in ("--n", "--m", "--s"):
        p.add_argument(flag, type=int, required=True)
    _add_size_dist_arg(p)
    p = th_subs.add_parser("alpha-from-moments")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--ed", type=float, required=True)
    p.add_argument("--ed2", type=float, required=True)
    p = th_subs.add_parser("alpha-k")
    for flag in ("--n", "--m", "--s", "--k"):
        p.add_argument(flag, type=int, required=True)
    _add_size_dist_arg(p)
    p = th_subs.add_parser("passive-spec")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    _add_size_dist_arg(p)
    p = th_subs.add_parser("compound-pmf")
    p.add_argument("--lam", type=float, required=True)
    p.add_argument("--jump-probs", required=True, help="comma list, mass at 0,1,2,...")
    p.add_argument("--k-max", type=int, default=None)
    p = th_subs.add_parser("alpha-passive")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    _add_size_dist_arg(p)
    p = th_subs.add_parser("alpha-passive-limit")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    _add_size_dist_arg(p)
    p = th_subs.add_parser("alpha-k-passive")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    _add_size_dist_arg(p)
    p = th_subs.add_parser("regime")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    _add_size_dist_arg(p)
    p = th_subs.add_parser("degree-stats")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--sizes", default=None, help="comma list of set sizes, vertex 1 first")
    p.add_argument("--uniform-size", type=int, default=None)
    p.add_argument("--count", type=int, default=None)
    th.set_defaults(func=_cmd_theory)

    orc = subs.add_parser("oracle", help="exact finite-size computations")
    orc_subs = orc.add_subparsers(dest="oracle_cmd", required=True)
    p = orc_subs.add_parser("intersection-pmf")
    for flag in ("--m", "--d1", "--d2"):
        p.add_argument(flag, type=int, required=True)
    p = orc_subs.add_parser("intersection-tail")
    for flag in ("--m", "--d1", "--d2", "--s"):
        p.add_argument(flag, type=int, required=True)
    p = orc_subs.add_parser("tail-bounds")
    for flag in ("--m", "--d1", "--d2", "--s"):
        p.add_argument(flag, type=int, required=True)
    p = orc_subs.add_parser("exact-degree-pmf")
    for flag in ("--n", "--m", "--s"):
        p.add_argument(flag, type=int, required=True)
    _add_size_dist_arg(p)
    p = orc_subs.add_parser("links-pmf")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k-max", type=int, default=None)
    _add_size_dist_arg(p)
    p = orc_subs.add_parser("lecam")
    p.add_argument("--probs", default="", help="comma list of indicator probabilities")
    p = orc_subs.add_parser("brute-force")
    p.add_argument("--kind", choices=("active", "passive"), required=True)
    for flag in ("--n", "--m", "--s"):
        p.add_argument(flag, type=int, required=True)
    _add_size_dist_arg(p)
    p = orc_subs.add_parser("dense-overlap")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    orc.set_defaults(func=_cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ResourceLimitError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
