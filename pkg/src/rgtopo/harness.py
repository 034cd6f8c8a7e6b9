"""Seeded multi-trial experiments, persistence and report comparison."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import components as comp
from . import spectra
from .errors import (ConfigError, IncompatibleReports, InvariantViolation, NoInteriorComponents,
                     RgTopoError)
from .pointproc import Manifold, Seed, sample_poisson, sample_uniform
from .proximity import GeometricGraph, build_cech
from .recognition import find_induced_star, is_unit_interval, wraps_circle

MODELS = ("ManifoldUniform", "Poisson")
EXPERIMENTS = ("BetaConvergence", "TypeMeasureConvergence", "SpectralConvergence",
               "SandwichAudit", "Dim1Support", "Dim2StarAudit", "PerturbationAudit",
               "LemmaAudit")
CONVERGENCE = ("BetaConvergence", "TypeMeasureConvergence", "SpectralConvergence")
METRICS = ("TV_type", "TV_spectral", "Kolmogorov", "ZeroMassGap")

EIG_TOL = 1e-9


@dataclass
class ExperimentConfig:
    kind: str
    model: str = "ManifoldUniform"
    manifold: str = "torus"
    m: int = 2
    alpha: float = 0.5
    n_schedule: list | None = None
    R_schedule: list | None = None
    trials: int = 1
    k_max: int = 1
    size_cap: int = comp.DEFAULT_SIZE_CAP
    seed: int = 0
    out_dir: str | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    @property
    def schedule(self) -> list:
        return list(self.R_schedule if self.model == "Poisson" else self.n_schedule)

    def validate(self) -> None:
        if self.kind not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}")
        if not self.alpha > 0:
            raise ConfigError("alpha must be positive")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ConfigError("trials must be a positive integer")
        if not 1 <= self.k_max <= 3:
            raise ConfigError("k_max must be 1, 2 or 3")
        if self.size_cap < 1:
            raise ConfigError("size_cap must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        sched = self.R_schedule if self.model == "Poisson" else self.n_schedule
        other = self.n_schedule if self.model == "Poisson" else self.R_schedule
        name = "R_schedule" if self.model == "Poisson" else "n_schedule"
        if not sched:
            raise ConfigError(f"{self.model} needs a non-empty {name}")
        if other:
            raise ConfigError(f"{self.model} takes only {name}")
        if any(b <= a for a, b in zip(sched, sched[1:])):
            raise ConfigError(f"{name} must be strictly increasing")
        if self.model == "ManifoldUniform":
            if any(int(v) != v or v < 1 for v in sched):
                raise ConfigError("n_schedule entries must be positive integers")
            if self.manifold not in ("torus", "sphere"):
                raise ConfigError("the uniform model needs a torus or the sphere")
        else:
            if any(v <= 0 for v in sched):
                raise ConfigError("R_schedule entries must be positive")
            if self.manifold not in ("ball", "box"):
                raise ConfigError("the Poisson model needs a ball or box window")
        if self.kind == "SandwichAudit" and self.model != "Poisson":
            raise ConfigError("SandwichAudit runs on the Poisson model")
        try:
            self.base_manifold(1.0)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def base_manifold(self, size: float) -> Manifold:
        if self.manifold == "torus":
            return Manifold.torus(self.m)
        if self.manifold == "sphere":
            return Manifold.sphere()
        if self.manifold == "ball":
            return Manifold.ball(self.m, size)
        return Manifold.box(self.m, size)

    def to_json(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        if "kind" not in d:
            raise ConfigError("config needs a kind")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            d = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_json(d)

    def digest(self) -> str:
        d = self.to_json()
        d.pop("out_dir", None)
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()


# --- single trials -----------------------------------------------------------------

def _sample(cfg: ExperimentConfig, value, seed: Seed):
    """Cloud plus the counting radius (Poisson) for one trial."""
    if cfg.model == "ManifoldUniform":
        return sample_uniform(cfg.base_manifold(1.0), int(value), cfg.alpha, seed), None
    R = float(value)
    margin = 0.0 if cfg.kind == "SandwichAudit" else 2.0 * cfg.alpha
    size = R + margin if cfg.manifold == "ball" else 2.0 * (R + margin)
    return sample_poisson(cfg.base_manifold(size), cfg.alpha, seed), R


def component_spectra(graph: GeometricGraph, dec, keys, ids, cache: dict) -> np.ndarray:
    """Eigenvalues of Lhat over the listed components, reusing spectra per exact key."""
    out = []
    for c in ids:
        mem = dec.members[c]
        key = keys[c]
        eig = cache.get(key) if not key.approximate else None
        if eig is None:
            if len(mem) == 1:
                eig = np.zeros(1)
            else:
                eig = spectra.eigenvalues(spectra.normalized_laplacian(graph.induced(mem)))
            if not key.approximate:
                cache[key] = eig
        out.append(eig)
    return np.sort(np.concatenate(out)) if out else np.zeros(0)


def _check_spectrum(eigs: np.ndarray, b0: int) -> None:
    if len(eigs) and (eigs.min() < -EIG_TOL or eigs.max() > 2.0 + EIG_TOL):
        raise InvariantViolation(f"eigenvalue outside [0, 2]: [{eigs.min()}, {eigs.max()}]")
    zeros = int(np.sum(np.abs(eigs) <= spectra.ATOM_TOL))
    if zeros != b0:
        raise InvariantViolation(f"{zeros} zero eigenvalues but b0 = {b0}")


def _convergence_trial(cfg, value, seed):
    cloud, R = _sample(cfg, value, seed)
    need_types = cfg.kind != "BetaConvergence"
    need_spec = cfg.kind == "SpectralConvergence"
    skel = build_cech(cloud, cfg.k_max if need_types else 1)
    graph = skel.base
    dec = comp.decompose(graph)
    row = {"n_points": len(cloud)}
    if cfg.model == "Poisson":
        win = comp.poisson_window(cloud, R=R, skeleton=skel)
        ids = win.retained.tolist()
        nv = int(sum(len(dec.members[c]) for c in ids))
        if not ids:
            raise NoInteriorComponents("no component inside the window")
        # unit intensity: components per unit volume estimate beta directly
        row.update(n_retained_vertices=nv, b0=len(ids), volume=win.volume,
                   beta=len(ids) / win.volume, b0_per_vertex=len(ids) / nv)
    else:
        ids = list(range(dec.b0))
        nv = len(cloud)
        row.update(n_retained_vertices=nv, b0=dec.b0, volume=1.0, beta=dec.b0 / nv,
                   b0_per_vertex=dec.b0 / nv)
    out = {"row": row, "types": None, "spectral": None}
    if need_types:
        keys = comp.component_keys(skel, cfg.k_max, cfg.size_cap, dec)
        counts: dict = {}
        for c in ids:
            counts[keys[c]] = counts.get(keys[c], 0) + 1
        tm = comp.TypeMeasure.from_counts(counts)
        row["n_types"] = len(tm.masses)
        row["approximate_mass"] = math.fsum(mv for kk, mv in tm.masses.items() if kk.approximate)
        out["types"] = tm.to_json()
    if need_spec:
        gkeys = keys if cfg.k_max == 1 else comp.component_keys(skel, 1, cfg.size_cap, dec)
        eigs = component_spectra(graph, dec, gkeys, ids, {})
        _check_spectrum(eigs, len(ids))
        mu = spectra.SpectralMeasure.from_eigenvalues(eigs)
        row["zero_mass"] = len(ids) / nv
        row["eig_min"] = float(eigs.min())
        row["eig_max"] = float(eigs.max())
        row["n_atoms"] = len(mu.masses)
        out["spectral"] = mu.to_json()
    return out


def _sandwich_trial(cfg, value, seed):
    cloud, R = _sample(cfg, value, seed)
    skel = build_cech(cloud, cfg.k_max)
    w = comp.singleton_key(cfg.k_max)
    rep = comp.sandwich_check(skel, w, float(cfg.params.get("r_loc", 2.0)),
                              float(cfg.params.get("grid_step", 0.25)), cloud=cloud, R=R,
                              size_cap=cfg.size_cap)
    slack = float(cfg.params.get("slack", 0.05))
    return {"row": {"n_points": len(cloud), "lower": rep.lower, "global": rep.global_count,
                    "upper": rep.upper, "holds_exact": int(rep.holds(0.0)),
                    "holds": int(rep.holds(slack))}}


def _dim1_trial(cfg, value, seed):
    cloud, _ = _sample(cfg, value, seed)
    graph = build_cech(cloud, 1).base
    dec = comp.decompose(graph)
    wrapping = checked = failures = 0
    for mem in dec.members:
        if cfg.m == 1 and cfg.manifold == "torus" and wraps_circle(cloud.points[mem], cloud.r):
            wrapping += 1
            continue
        checked += 1
        if not is_unit_interval(graph.induced(mem)).is_unit_interval:
            failures += 1
    return {"row": {"n_points": len(cloud), "b0": dec.b0, "wrapping": wrapping,
                    "checked": checked, "failures": failures}}


def _star_trial(cfg, value, seed):
    cloud, _ = _sample(cfg, value, seed)
    graph = build_cech(cloud, 1).base
    s = int(cfg.params.get("leaves", 7))
    hit = find_induced_star(graph, s)
    return {"row": {"n_points": len(cloud), "leaves": s, "found": int(hit is not None),
                    "center": -1 if hit is None else int(hit[0])}}


def _perturbation_trial(cfg, value, seed):
    rng = seed.generator()
    n_max = int(cfg.params.get("n_max", 40))
    c_max = int(cfg.params.get("C_max", 5))
    order_max = int(cfg.params.get("order_max", 12))
    n = int(rng.integers(2, n_max + 1))
    p = float(rng.random())
    upper = np.triu(rng.random((n, n)) < p, 1)
    C = int(rng.integers(1, c_max + 1))
    iu = np.triu_indices(n, 1)
    flips = rng.choice(len(iu[0]), size=min(C, len(iu[0])), replace=False)
    other = upper.copy()
    other[iu[0][flips], iu[1][flips]] ^= True
    g1 = GeometricGraph.from_adjacency(upper | upper.T)
    g2 = GeometricGraph.from_adjacency(other | other.T)
    rep = spectra.edge_perturbation_bounds(g1, g2, C)
    k = int(rng.integers(1, order_max + 1))
    Q1 = rng.standard_normal((k, k))
    Q2 = rng.standard_normal((k, k))
    lhs, rhs, wh = spectra.weilandt_hoffman_check(Q1, Q2)
    row = {"n": n, "C": C, "edits": rep["edits"]}
    for name in ("A", "D", "L", "Lhat"):
        row[f"{name}_value"] = rep[name].value
        row[f"{name}_bound"] = rep[name].bound
    row.update(wh_order=k, wh_lhs=lhs, wh_rhs=rhs,
               holds=int(wh and all(rep[x].holds for x in ("A", "D", "L", "Lhat"))))
    return {"row": row}


def _lemma_trial(cfg, value, seed):
    N = int(value)
    cs = cfg.params.get("c", 1)
    idx = cfg.schedule.index(value)
    c = int(cs[idx] if isinstance(cs, list) else cs)
    rep = spectra.complete_join_multiplicity(N, c)
    tv = spectra.tv_spectral(spectra.spectral_measure(spectra.complete_disjoint_pair(N)),
                             spectra.SpectralMeasure.from_eigenvalues(rep["eigenvalues"]))
    expected = (2 * c + 1) / (2 * N)
    return {"row": {"N": N, "c": c, "multiplicity": rep["multiplicity"], "bound": rep["bound"],
                    "zero_count": rep["zero_count"], "tv": tv, "tv_expected": expected,
                    "holds": int(rep["holds"] and abs(tv - expected) <= 1e-6)}}


_TRIALS = {
    "BetaConvergence": _convergence_trial,
    "TypeMeasureConvergence": _convergence_trial,
    "SpectralConvergence": _convergence_trial,
    "SandwichAudit": _sandwich_trial,
    "Dim1Support": _dim1_trial,
    "Dim2StarAudit": _star_trial,
    "PerturbationAudit": _perturbation_trial,
    "LemmaAudit": _lemma_trial,
}


def run_trial(cfg_json: dict, level: int, trial: int) -> dict:
    """One trial; failures are reported in the result rather than raised."""
    cfg = ExperimentConfig.from_json(cfg_json)
    value = cfg.schedule[level]
    seed = Seed(cfg.seed, trial, level)
    base = {"level": level, "value": value, "trial": trial}
    try:
        out = _TRIALS[cfg.kind](cfg, value, seed)
        status, error = "ok", ""
    except InvariantViolation as exc:
        out, status, error = {"row": {}}, "invariant", str(exc)
    except (RgTopoError, ValueError, ArithmeticError) as exc:
        out, status, error = {"row": {}}, "error", f"{type(exc).__name__}: {exc}"
    out["row"] = {**base, "status": status, "error": error, **out["row"]}
    return out


# --- aggregation -------------------------------------------------------------------

def _mean_se(xs) -> tuple[float, float]:
    xs = [x for x in xs if x is not None and not (isinstance(x, float) and math.isnan(x))]
    if not xs:
        return math.nan, math.nan
    mean = math.fsum(xs) / len(xs)
    if len(xs) < 2:
        return mean, math.nan
    var = math.fsum((x - mean) ** 2 for x in xs) / (len(xs) - 1)
    return mean, math.sqrt(var / len(xs))


@dataclass(eq=False)
class LevelAggregate:
    level: int
    value: float
    n_ok: int
    n_failed: int
    beta_mean: float = math.nan
    beta_se: float = math.nan
    ratio_mean: float = math.nan
    ratio_se: float = math.nan
    zero_mass_mean: float = math.nan
    types: comp.TypeMeasure | None = None
    spectral: spectra.SpectralMeasure | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        d = {"level": self.level, "value": self.value, "n_ok": self.n_ok,
             "n_failed": self.n_failed, "beta_mean": self.beta_mean, "beta_se": self.beta_se,
             "ratio_mean": self.ratio_mean, "ratio_se": self.ratio_se,
             "zero_mass_mean": self.zero_mass_mean, **self.extra}
        if self.types is not None:
            d["type_measure"] = self.types.to_json()
            d["type_measure_approximate"] = self.types.has_approximate
        if self.spectral is not None:
            d["spectral_measure"] = self.spectral.to_json()
        return d

    @classmethod
    def from_json(cls, d: dict, k: int = 1) -> "LevelAggregate":
        known = ("level", "value", "n_ok", "n_failed", "beta_mean", "beta_se", "ratio_mean",
                 "ratio_se", "zero_mass_mean")
        skip = known + ("type_measure", "type_measure_approximate", "spectral_measure")
        agg = cls(**{x: _nan(d.get(x)) for x in known})
        if "type_measure" in d:
            agg.types = comp.TypeMeasure.from_json(d["type_measure"], k)
        if "spectral_measure" in d:
            agg.spectral = spectra.SpectralMeasure.from_json(d["spectral_measure"])
        agg.extra = {x: v for x, v in d.items() if x not in skip}
        return agg


def _nan(v):
    return math.nan if v is None else v


def _aggregate_level(cfg, level, results) -> LevelAggregate:
    rows = [r["row"] for r in results]
    ok = [r for r in results if r["row"]["status"] == "ok"]
    agg = LevelAggregate(level, cfg.schedule[level], len(ok), len(rows) - len(ok))
    okrows = [r["row"] for r in ok]
    if cfg.kind in CONVERGENCE:
        agg.beta_mean, agg.beta_se = _mean_se([r["beta"] for r in okrows])
        agg.ratio_mean, agg.ratio_se = _mean_se([r["b0_per_vertex"] for r in okrows])
        if ok and ok[0].get("types") is not None:
            agg.types = comp.TypeMeasure.average(
                [comp.TypeMeasure.from_json(r["types"], cfg.k_max) for r in ok])
        if ok and ok[0].get("spectral") is not None:
            agg.zero_mass_mean = _mean_se([r["zero_mass"] for r in okrows])[0]
            agg.spectral = spectra.SpectralMeasure.average(
                [spectra.SpectralMeasure.from_json(r["spectral"]) for r in ok])
    elif cfg.kind == "SandwichAudit":
        agg.extra = {"instances": len(okrows), "holding": sum(r["holds"] for r in okrows),
                     "holding_exact": sum(r["holds_exact"] for r in okrows)}
    elif cfg.kind == "Dim1Support":
        agg.extra = {x: sum(r[x] for r in okrows) for x in ("b0", "wrapping", "checked", "failures")}
    elif cfg.kind == "Dim2StarAudit":
        agg.extra = {"stars_found": sum(r["found"] for r in okrows)}
    else:
        agg.extra = {"holding": sum(r["holds"] for r in okrows), "instances": len(okrows)}
    return agg


def _consecutive(levels: list[LevelAggregate]) -> list[dict]:
    out = []
    for a, b in zip(levels, levels[1:]):
        d = {"from": a.value, "to": b.value,
             "beta_gap": abs(b.beta_mean - a.beta_mean),
             "beta_gap_se": math.sqrt(a.beta_se ** 2 + b.beta_se ** 2)}
        if a.types is not None and b.types is not None:
            d["tv_type"] = comp.tv_distance(a.types.exact_only(), b.types.exact_only())
        if a.spectral is not None and b.spectral is not None:
            d["kolmogorov"] = spectra.kolmogorov(a.spectral, b.spectral)
            d["tv_spectral"] = spectra.tv_spectral(a.spectral, b.spectral)
        out.append(d)
    return out


def _trend(consecutive: list[dict]) -> dict:
    """Whether each consecutive-level distance is below its predecessor."""
    out = {}
    for name in ("beta_gap", "tv_type", "kolmogorov"):
        seq = [d[name] for d in consecutive if name in d]
        if len(seq) >= 2:
            out[name] = {"values": seq,
                         "strictly_decreasing": all(b < a for a, b in zip(seq, seq[1:])),
                         "terminal_below_initial": seq[-1] < seq[0]}
    return out


@dataclass(eq=False)
class RunReport:
    config: ExperimentConfig
    rows: list
    levels: list
    consecutive: list
    trend: dict
    provenance: dict
    trial_measures: list = field(default_factory=list, repr=False)

    @property
    def terminal(self) -> LevelAggregate:
        return self.levels[-1]

    @property
    def invariant_failures(self) -> list:
        return [r for r in self.rows if r["status"] == "invariant"]

    def aggregates_json(self) -> dict:
        return {"provenance": self.provenance, "config": self.config.to_json(),
                "levels": [lv.to_json() for lv in self.levels],
                "consecutive": self.consecutive, "trend": self.trend}

    def trials_csv(self) -> str:
        cols: list = []
        for r in self.rows:
            for c in r:
                if c not in cols:
                    cols.append(c)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in self.rows:
            w.writerow([_cell(r.get(c, "")) for c in cols])
        return buf.getvalue()

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "trials.csv").write_text(self.trials_csv())
        (out / "trials_schema.json").write_text(json.dumps(_schema(self.rows), indent=2))
        (out / "aggregates.json").write_text(json.dumps(self.aggregates_json(), indent=2))
        (out / "config.json").write_text(self.config.dumps())
        if self.trial_measures:
            with open(out / "trial_measures.jsonl", "w") as fh:
                for tm in self.trial_measures:
                    fh.write(json.dumps(tm) + "\n")
        for lv in self.levels:
            if lv.spectral is not None:
                lv.spectral.write_histogram_csv(out / f"spectral_hist_level{lv.level}.csv")
        return out

    @classmethod
    def load(cls, out_dir) -> "RunReport":
        out = Path(out_dir)
        try:
            agg = json.loads((out / "aggregates.json").read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise IncompatibleReports(f"cannot read report in {out}: {exc}") from exc
        cfg = ExperimentConfig.from_json(agg["config"])
        levels = [LevelAggregate.from_json(d, cfg.k_max) for d in agg["levels"]]
        rows = []
        if (out / "trials.csv").exists():
            with open(out / "trials.csv", newline="") as fh:
                rows = list(csv.DictReader(fh))
        return cls(cfg, rows, levels, agg["consecutive"], agg["trend"], agg["provenance"])


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


_COLUMN_DOCS = {
    "level": "index into the n- or R-schedule",
    "value": "schedule value (n for the uniform model, counting radius R for Poisson)",
    "trial": "trial index; the random stream is Seed(master, trial, level)",
    "status": "ok, error (trial skipped) or invariant (hard identity failed)",
    "error": "error message for failed trials",
    "n_points": "number of sampled points",
    "n_retained_vertices": "vertices in components counted by the estimator",
    "b0": "number of counted components",
    "volume": "volume of the counting region",
    "beta": "beta estimate: b0 / n (uniform model) or b0 / volume (Poisson, unit intensity)",
    "b0_per_vertex": "b0 / n_retained_vertices (zero-atom mass of the spectral measure)",
    "n_types": "number of distinct component type keys",
    "approximate_mass": "type-measure mass carried by coarse (approximate) keys",
    "zero_mass": "mass of the spectral atom at 0",
    "eig_min": "smallest normalised-Laplacian eigenvalue",
    "eig_max": "largest normalised-Laplacian eigenvalue",
    "n_atoms": "number of atoms of the trial spectral measure",
}


def _schema(rows) -> dict:
    cols = []
    for r in rows:
        for c in r:
            if c not in cols:
                cols.append(c)
    return {c: _COLUMN_DOCS.get(c, "") for c in cols}


def run(config: ExperimentConfig, threads: int = 1, write: bool = True) -> RunReport:
    """Execute every (level, trial) pair and aggregate in fixed trial order."""
    cfg_json = config.to_json()
    tasks = [(lv, t) for lv in range(len(config.schedule)) for t in range(config.trials)]
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_trial, [cfg_json] * len(tasks),
                                    [a for a, _ in tasks], [b for _, b in tasks],
                                    chunksize=max(1, len(tasks) // (4 * threads))))
    else:
        results = [run_trial(cfg_json, lv, t) for lv, t in tasks]
    levels = []
    for lv in range(len(config.schedule)):
        levels.append(_aggregate_level(config, lv, [r for r in results if r["row"]["level"] == lv]))
    cons = _consecutive(levels) if config.kind in CONVERGENCE else []
    measures = [{"level": r["row"]["level"], "trial": r["row"]["trial"], "types": r.get("types"),
                 "spectral": r.get("spectral")}
                for r in results if r.get("types") is not None or r.get("spectral") is not None]
    report = RunReport(config, [r["row"] for r in results], levels, cons, _trend(cons),
                       {"config_sha256": config.digest(), "seed": config.seed}, measures)
    if write and config.out_dir:
        report.write(config.out_dir)
    bad = report.invariant_failures
    if bad:
        raise InvariantViolation(f"{len(bad)} trial(s) violated a hard invariant: {bad[0]['error']}")
    return report


def compare(report_a: RunReport, report_b: RunReport, metric: str) -> float:
    """Distance between the terminal aggregates of two reports."""
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    a, b = report_a.terminal, report_b.terminal
    if metric == "TV_type":
        if a.types is None or b.types is None:
            raise IncompatibleReports("both reports need type measures")
        if report_a.config.k_max != report_b.config.k_max:
            raise IncompatibleReports("type measures of different skeleton dimensions")
        return comp.tv_distance(a.types.exact_only(), b.types.exact_only())
    if metric == "ZeroMassGap":
        if math.isnan(a.zero_mass_mean) or math.isnan(b.ratio_mean):
            raise IncompatibleReports("ZeroMassGap needs a spectral run and a b0 estimate")
        return abs(a.zero_mass_mean - b.ratio_mean)
    if a.spectral is None or b.spectral is None:
        raise IncompatibleReports("both reports need spectral measures")
    if metric == "TV_spectral":
        return spectra.tv_spectral(a.spectral, b.spectral)
    return spectra.kolmogorov(a.spectral, b.spectral)
