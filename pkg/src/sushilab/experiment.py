"""Experiment orchestration: JSON specs, preset batteries, manifest output.

A spec names a transformation, an intensity, a sampling window, one
construction (poisson | split | thin | mark | sushi | id), and a battery
of named checks.  run() validates everything before sampling, executes
the battery on deterministic per-item streams, and emits a manifest whose
content is a pure function of (spec, seed): rerunning, or changing the
thread count, reproduces every report byte for byte.  Wall time is the
single manifest field excluded from that contract.

Numbers in spec files use exact rational literals ("3/200") and window
literals ("[0,1)+[2,3)") so configuration round-trips without float loss.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
import warnings
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .cluster import (
    ClusterEntry,
    ClusterLaw,
    LevyData,
    SushiSpec,
    phi_decode,
    phi_encode,
    sample_id_measure,
    sample_sushi,
    sushi_mean,
    sushi_variance,
    unit_intensity_c,
)
from .dynamics import (
    RankOneMachine,
    TransformHandle,
    Translation,
    chacon3_recipe,
    infinite_chacon_recipe,
    recipe_from_arrays,
)
from .moments import (
    default_design,
    diagonal_weight,
    fit_partition_decomposition,
    partitions,
    replicate_matrix,
)
from .point_process import (
    Rng,
    count,
    count_replicates,
    dissociation_check,
    dump_csv,
    free_check,
    sample_poisson,
)
from .split_mark import attach_marks, bernoulli_split, project_mark_set, separation_thin
from .stats import (
    TestReport,
    cesaro_factorization,
    correlation_check,
    covariance_check,
    dispersion_index_test,
    mixed_moment_factorization,
    poisson_gof,
    two_sample_count_test,
    variance_check,
    z_test_report,
)
from .windows import (
    IntensitySpec,
    Window,
    as_rat,
    format_rat,
    format_window,
    parse_window,
)

__all__ = [
    "ExperimentSpec",
    "RunManifest",
    "run",
    "list_presets",
    "preset_spec",
    "TRANSFORMATION_PRESETS",
    "BATTERY_PRESETS",
    "parse_law",
    "resolve_transformation",
]

ARTIFACT_VERSION = "1.0.0"

CONSTRUCTIONS = ("poisson", "split", "thin", "mark", "sushi", "id")

TRANSFORMATION_PRESETS: dict[str, str] = {
    "translation": "translation x -> x + step (default step 1)",
    "chacon3": "3-cut rank-one machine, one spacer on the middle column",
    "infinite-chacon": "3-cut rank-one machine with a growing spacer tail",
    "rank-one": "configurable machine from {cuts: [...], spacers: [[...]]}",
}


def resolve_transformation(obj) -> TransformHandle:
    """Transformation from a preset name or a recipe config block."""
    if isinstance(obj, str):
        name, params = obj, {}
    elif isinstance(obj, Mapping):
        params = dict(obj)
        name = params.pop("preset", "rank-one" if "cuts" in params else None)
        if name is None:
            raise ValueError("transformation: needs 'preset' or 'cuts'/'spacers'")
    else:
        raise ValueError("transformation: must be a name or a config block")
    if name == "translation":
        return Translation(as_rat(params.get("step", 1)))
    if name == "chacon3":
        return RankOneMachine(chacon3_recipe(), label="chacon3")
    if name == "infinite-chacon":
        return RankOneMachine(infinite_chacon_recipe(), label="infinite-chacon")
    if name == "rank-one":
        if "cuts" not in params or "spacers" not in params:
            raise ValueError("transformation: rank-one needs cuts and spacers")
        return RankOneMachine(
            recipe_from_arrays(params["cuts"], params["spacers"]), label="rank-one"
        )
    raise ValueError(f"transformation: unknown preset {name!r}")


def parse_law(entries) -> ClusterLaw:
    """ClusterLaw from config rows {prob, weights: {k: a_k}}, exact."""
    if not isinstance(entries, Sequence) or isinstance(entries, (str, bytes)):
        raise ValueError("law: must be a list of {prob, weights} entries")
    parsed = []
    for i, e in enumerate(entries):
        try:
            weights = {int(k): as_rat(v) for k, v in e["weights"].items()}
            parsed.append(ClusterEntry(weights, as_rat(e["prob"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"law[{i}]: {exc}") from exc
    return ClusterLaw(parsed)


@dataclass(frozen=True)
class ExperimentSpec:
    """Validated experiment description plus its raw dict for hashing."""

    name: str
    transformation: TransformHandle
    intensity: IntensitySpec
    window: Window
    construction: str
    params: dict
    battery: tuple[dict, ...]
    replicates: int
    seed: int
    raw: dict

    @staticmethod
    def from_dict(d: Mapping) -> "ExperimentSpec":
        def need(field, typ=None):
            if field not in d:
                raise ValueError(f"{field}: required field missing")
            v = d[field]
            if typ is not None and not isinstance(v, typ):
                raise ValueError(f"{field}: expected {typ.__name__}")
            return v

        name = need("name", str)
        T = resolve_transformation(need("transformation"))
        try:
            intensity = IntensitySpec(as_rat(d.get("intensity", 1)))
        except ValueError as exc:
            raise ValueError(f"intensity: {exc}") from exc
        try:
            window = parse_window(need("window", str))
        except ValueError as exc:
            raise ValueError(f"window: {exc}") from exc
        construction = need("construction", str)
        if construction not in CONSTRUCTIONS:
            raise ValueError(
                f"construction: {construction!r} not one of {CONSTRUCTIONS}"
            )
        params = dict(d.get("params", {}))
        battery = d.get("battery", [])
        if not isinstance(battery, Sequence):
            raise ValueError("battery: must be a list of test items")
        for i, item in enumerate(battery):
            if not isinstance(item, Mapping) or "test" not in item:
                raise ValueError(f"battery[{i}]: needs a 'test' name")
            if item["test"] not in _TEST_REGISTRY:
                raise ValueError(
                    f"battery[{i}]: unknown test {item['test']!r}"
                )
            if item.get("expect", "pass") not in ("pass", "reject"):
                raise ValueError(f"battery[{i}]: expect must be pass or reject")
        replicates = need("replicates", int)
        if replicates < 100:
            raise ValueError("replicates: must be at least 100")
        seed = need("seed", int)
        spec = ExperimentSpec(
            name=name,
            transformation=T,
            intensity=intensity,
            window=window,
            construction=construction,
            params=params,
            battery=tuple(dict(it) for it in battery),
            replicates=replicates,
            seed=seed,
            raw=_canonical_raw(d),
        )
        _build_plan(spec)  # validate construction preconditions before sampling
        return spec

    @staticmethod
    def from_json(text: str) -> "ExperimentSpec":
        return ExperimentSpec.from_dict(json.loads(text))

    def spec_hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.raw, sort_keys=True, separators=(",", ":")).encode()
        ).hexdigest()


def _canonical_raw(d: Mapping) -> dict:
    return json.loads(json.dumps(d, sort_keys=True))


@dataclass(frozen=True)
class _Plan:
    """Resolved construction: sampler closure plus derived quantities."""

    kind: str
    T: TransformHandle
    intensity: IntensitySpec
    sampling_window: Window
    observed: Window
    sample: Callable[[Rng], object]
    probs: tuple[Fraction, ...] | None = None
    kappa: Fraction | None = None
    sushi: SushiSpec | None = None
    levy: LevyData | None = None

    def mean_mass(self, w: Window) -> float:
        """Expected N(w) under this construction, closed form."""
        alpha = self.intensity.alpha
        if self.kind in ("poisson", "split", "mark"):
            return float(alpha * w.length)
        if self.kind == "thin":
            rate = float(alpha) * math.exp(-2 * float(self.kappa) * float(alpha))
            return rate * float(w.length)
        return float(sushi_mean(self.sushi, w))


def _build_plan(spec: ExperimentSpec) -> _Plan:
    T, alphaspec, W = spec.transformation, spec.intensity, spec.window
    kind, params = spec.construction, spec.params
    if kind == "poisson":
        return _Plan(kind, T, alphaspec, W, W,
                     lambda rng: sample_poisson(alphaspec, W, rng))
    if kind in ("split", "mark"):
        key = "probs" if kind == "split" else "mark_probs"
        raw_probs = params.get(key, params.get("probs"))
        if raw_probs is None:
            raise ValueError(f"params.{key}: required for {kind}")
        probs = tuple(as_rat(p) for p in raw_probs)
        if any(p < 0 for p in probs) or sum(probs) != 1:
            raise ValueError(f"params.{key}: must be nonnegative, summing to 1")
        if kind == "split":
            def sample(rng, probs=probs):
                return bernoulli_split(sample_poisson(alphaspec, W, rng),
                                       probs, rng)
        else:
            def sample(rng, probs=probs):
                return attach_marks(sample_poisson(alphaspec, W, rng),
                                    probs, rng)
        return _Plan(kind, T, alphaspec, W, W, sample, probs=probs)
    if kind == "thin":
        kappa = as_rat(params.get("kappa", 1))
        if kappa <= 0:
            raise ValueError("params.kappa: must be positive")
        core = W.shrink(kappa)
        if core.is_empty:
            raise ValueError(
                "window: lacks the kappa-buffer (shrunk core is empty)"
            )
        return _Plan(
            kind, T, alphaspec, W, core,
            lambda rng: separation_thin(sample_poisson(alphaspec, W, rng), kappa),
            kappa=kappa,
        )
    if kind in ("sushi", "id"):
        law = parse_law(params.get("law", ()))
        if as_rat(params.get("gamma", 0)) != 0:
            raise ValueError("params.gamma: drift must be zero")
        c_raw = params.get("c")
        if c_raw is None:
            c = alphaspec.alpha
        elif c_raw == "unit":
            c = unit_intensity_c(law)
        else:
            c = as_rat(c_raw)
        try:
            sspec = SushiSpec(c, law, T)
            levy = LevyData(c, law, T)
        except ValueError as exc:
            raise ValueError(f"params: {exc}") from exc
        if kind == "sushi":
            sampler = lambda rng: sample_sushi(sspec, W, rng)
        else:
            sampler = lambda rng: sample_id_measure(levy, W, rng)
        return _Plan(kind, T, IntensitySpec(c), W, W, sampler,
                     sushi=sspec, levy=levy)
    raise ValueError(f"construction: unknown kind {kind}")


# ---------------------------------------------------------------------------
# battery test runners: (plan, spec, item, rng, threads) -> (reports, raw)

RawData = dict[str, np.ndarray]


def _item_R(spec: ExperimentSpec, item: Mapping) -> int:
    return int(item.get("replicates", spec.replicates))


def _item_window(plan: _Plan, item: Mapping, key: str = "window") -> Window:
    if key in item:
        return parse_window(item[key])
    return plan.observed


def _mass_vector(plan: _Plan, w: Window, R: int, rng: Rng, threads: int,
                 component=None, mark=None) -> np.ndarray:
    def evaluate(out) -> list[float]:
        if component is not None:
            out = out[component]
        elif mark is not None:
            out = project_mark_set(out, {mark})
        return [float(count(out, w))]

    return replicate_matrix(plan.sample, evaluate, 1, R, rng, threads)[:, 0]


def _run_poisson_gof(plan, spec, item, rng, threads):
    w = _item_window(plan, item)
    R = _item_R(spec, item)
    level = float(item.get("level", 0.01))
    component = item.get("component")
    mark = item.get("mark")
    label = ""
    if plan.kind == "poisson" and component is None and mark is None:
        counts = count_replicates(plan.intensity, [w], rng, R)[:, 0]
        mean = float(plan.intensity.alpha * w.length)
    else:
        vec = _mass_vector(plan, w, R, rng, threads,
                           component=component, mark=mark)
        counts = vec.astype(np.int64)
        if not np.array_equal(vec, counts):
            raise ValueError("poisson_gof: non-integer masses")
        if component is not None:
            mean = float(plan.intensity.alpha * plan.probs[component] * w.length)
            label = f"[component {component}]"
        elif mark is not None:
            mean = float(plan.intensity.alpha * plan.probs[mark] * w.length)
            label = f"[mark {mark}]"
        else:
            mean = plan.mean_mass(w)
    if item.get("mean") == "empirical":
        mean = float(counts.mean())
        label += "[matched-mean]"
    elif "mean" in item:
        mean = float(as_rat(item["mean"]))
    rep = poisson_gof(counts, mean, level=level,
                      name=f"poisson_gof{label}", seed=spec.seed)
    return [rep], {"counts": counts}


def _run_intensity(plan, spec, item, rng, threads):
    w = _item_window(plan, item)
    R = _item_R(spec, item)
    level = float(item.get("level", 0.01))
    masses = _mass_vector(plan, w, R, rng, threads,
                          component=item.get("component"),
                          mark=item.get("mark"))
    if "target" in item:
        target = float(as_rat(item["target"]) * w.length)
    elif item.get("component") is not None:
        target = float(plan.intensity.alpha
                       * plan.probs[item["component"]] * w.length)
    elif item.get("mark") is not None:
        target = float(plan.intensity.alpha
                       * plan.probs[item["mark"]] * w.length)
    else:
        target = plan.mean_mass(w)
    se = float(masses.std(ddof=1) / math.sqrt(R))
    rep = z_test_report(f"intensity[{format_window(w)}]",
                        float(masses.mean()), target, se, level,
                        spec.seed, R)
    return [rep], {"masses": masses}


def _run_dispersion(plan, spec, item, rng, threads):
    w = _item_window(plan, item)
    R = _item_R(spec, item)
    level = float(item.get("level", 0.001))
    default_alt = "under" if plan.kind == "thin" else "two-sided"
    alternative = item.get("alternative", default_alt)
    vec = _mass_vector(plan, w, R, rng, threads,
                       component=item.get("component"))
    counts = vec.astype(np.int64)
    if not np.array_equal(vec, counts):
        raise ValueError("dispersion: non-integer masses")
    rep = dispersion_index_test(counts, level=level, alternative=alternative,
                                seed=spec.seed)
    return [rep], {"counts": counts}


def _run_covariance(plan, spec, item, rng, threads):
    A = parse_window(item["A"])
    B = parse_window(item["B"])
    R = _item_R(spec, item)
    rep = covariance_check(plan.sample, A, B, plan.intensity, R, rng,
                           level=float(item.get("level", 0.01)),
                           threads=threads)
    return [rep], {}


def _run_mixed_moment(plan, spec, item, rng, threads):
    groupings = [[parse_window(w) for w in g] for g in item["groupings"]]
    R = _item_R(spec, item)
    rep = mixed_moment_factorization(plan.sample, groupings, R, rng,
                                     level=float(item.get("level", 0.01)),
                                     threads=threads)
    return [rep], {}


def _run_cross_correlation(plan, spec, item, rng, threads):
    i, j = item.get("pair", (0, 1))
    w = _item_window(plan, item)
    R = _item_R(spec, item)
    if plan.kind == "split":
        def evaluate(comps):
            return [float(count(comps[i], w)), float(count(comps[j], w))]
    elif plan.kind == "mark":
        def evaluate(mc):
            return [float(count(project_mark_set(mc, {i}), w)),
                    float(count(project_mark_set(mc, {j}), w))]
    else:
        raise ValueError("cross_correlation: needs split or mark construction")
    mat = replicate_matrix(plan.sample, evaluate, 2, R, rng, threads)
    rep = correlation_check(mat[:, 0], mat[:, 1],
                            level=float(item.get("level", 0.0027)),
                            name=f"cross_correlation[{i},{j}]", seed=spec.seed)
    return [rep], {"counts_i": mat[:, 0], "counts_j": mat[:, 1]}


def _run_dissociation(plan, spec, item, rng, threads):
    if plan.kind != "split":
        raise ValueError("dissociation: needs the split construction")
    K = int(item.get("K", 8))
    R = _item_R(spec, item)
    i, j = item.get("pair", (0, 1))

    def evaluate(comps) -> list[float]:
        ok = dissociation_check(comps[i], comps[j], plan.T, K)
        return [0.0 if ok else 1.0]

    fails = replicate_matrix(plan.sample, evaluate, 1, R, rng, threads)[:, 0]
    nfail = int(fails.sum())
    rep = TestReport(f"dissociation[K={K}]", float(nfail),
                     1.0 if nfail == 0 else 0.0,
                     float(item.get("level", 0.5)), spec.seed, R)
    return [rep], {}


def _run_free(plan, spec, item, rng, threads):
    K = int(item.get("K", 8))
    R = _item_R(spec, item)

    def evaluate(config) -> list[float]:
        return [0.0 if free_check(config, plan.T, K) else 1.0]

    fails = replicate_matrix(plan.sample, evaluate, 1, R, rng, threads)[:, 0]
    nfail = int(fails.sum())
    rep = TestReport(f"free[K={K}]", float(nfail),
                     1.0 if nfail == 0 else 0.0,
                     float(item.get("level", 0.5)), spec.seed, R)
    return [rep], {}


def _run_moment_fit(plan, spec, item, rng, threads):
    n = int(item.get("n", 2))
    R = _item_R(spec, item)
    level = float(item.get("level", 0.01))
    design = default_design(n)
    alpha = float(plan.intensity.alpha)
    fit = fit_partition_decomposition(plan.sample, n, design, R, rng,
                                      threads=threads)
    reports = []
    raw = {}
    for pi in partitions(n):
        target = alpha ** pi.n_blocks
        reports.append(z_test_report(
            f"moment_fit[{pi}]", fit[pi], target, fit.stderrs[pi],
            level, spec.seed, R,
        ))
    raw["coefficients"] = np.array([fit[pi] for pi in partitions(n)])
    return reports, raw


def _run_diagonal_weight(plan, spec, item, rng, threads):
    w = _item_window(plan, item)
    n = int(item.get("n", 2))
    depth = int(item.get("depth", 8))
    R = _item_R(spec, item)
    level = float(item.get("level", 0.01))
    res = diagonal_weight(plan.sample, w, n, depth, R, rng, threads=threads)
    target = float(plan.intensity.alpha * w.length)
    rep = z_test_report(f"diagonal_weight[n={n},depth={depth}]",
                        res.value, target, res.stderr, level, spec.seed, R)
    return [rep], {"refinements": np.array(res.estimates)}


def _run_round_trip(plan, spec, item, rng, threads):
    if plan.kind not in ("sushi", "id"):
        raise ValueError("round_trip: needs a cluster construction")
    K_max = int(item.get("K_max", 2 * plan.sushi.K_support))
    R = _item_R(spec, item)
    failures = 0
    for r in range(R):
        v = plan.sample(rng.child(r))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            enc = phi_encode(v, plan.T, K_max)
        v2 = phi_decode(enc, plan.T, window=plan.observed)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            enc2 = phi_encode(v2, plan.T, K_max)
        if enc2 != enc or phi_decode(enc2, plan.T, window=plan.observed) != v2:
            failures += 1
    rep = TestReport(f"round_trip[K_max={K_max}]", float(failures),
                     1.0 if failures == 0 else 0.0,
                     float(item.get("level", 0.5)), spec.seed, R)
    return [rep], {}


def _run_two_sample_vs(plan, spec, item, rng, threads):
    if plan.kind not in ("sushi", "id"):
        raise ValueError("two_sample_vs: needs a cluster construction")
    other = item.get("other", "sushi" if plan.kind == "id" else "id")
    w = _item_window(plan, item)
    R = _item_R(spec, item)
    level = float(item.get("level", 0.001))
    if other == "sushi":
        other_sample = lambda r: sample_sushi(plan.sushi, plan.sampling_window, r)
    elif other == "id":
        other_sample = lambda r: sample_id_measure(plan.levy,
                                                   plan.sampling_window, r)
    else:
        raise ValueError("two_sample_vs: other must be sushi or id")

    def masses(sampler, branch) -> np.ndarray:
        def evaluate(v) -> list[float]:
            return [float(count(v, w))]
        return replicate_matrix(sampler, evaluate, 1, R,
                                rng.child(branch), threads)[:, 0]

    a = masses(plan.sample, 0)
    b = masses(other_sample, 1)
    ia, ib = a.astype(np.int64), b.astype(np.int64)
    if not (np.array_equal(a, ia) and np.array_equal(b, ib)):
        raise ValueError("two_sample_vs: non-integer masses; use integer weights")
    rep = two_sample_count_test(ia, ib, level=level,
                                name=f"two_sample[{plan.kind} vs {other}]",
                                seed=spec.seed)
    return [rep], {"masses_a": a, "masses_b": b}


def _run_variance(plan, spec, item, rng, threads):
    w = _item_window(plan, item)
    R = _item_R(spec, item)
    level = float(item.get("level", 0.01))
    masses = _mass_vector(plan, w, R, rng, threads)
    if plan.kind in ("sushi", "id"):
        target = float(sushi_variance(plan.sushi, w))
    elif plan.kind == "poisson":
        target = float(plan.intensity.alpha * w.length)
    else:
        raise ValueError("variance: closed form known for poisson/sushi/id only")
    rep = variance_check(masses, target, level=level,
                         name=f"variance[{format_window(w)}]", seed=spec.seed)
    return [rep], {"masses": masses}


def _run_cesaro(plan, spec, item, rng, threads):
    windows = [parse_window(w) for w in item["windows"]]
    K = [int(i) for i in item.get("K", [0])]
    L = int(item.get("L", 16))
    R = _item_R(spec, item)
    res = cesaro_factorization(plan.sample, plan.T, windows, K, L, R, rng,
                               level=float(item.get("level", 0.01)),
                               threads=threads)
    return [res.report], {"terms": np.array(res.terms),
                          "averages": np.array(res.averages)}


_TEST_REGISTRY: dict[str, Callable] = {
    "poisson_gof": _run_poisson_gof,
    "intensity": _run_intensity,
    "dispersion": _run_dispersion,
    "covariance": _run_covariance,
    "mixed_moment": _run_mixed_moment,
    "cross_correlation": _run_cross_correlation,
    "dissociation": _run_dissociation,
    "free": _run_free,
    "moment_fit": _run_moment_fit,
    "diagonal_weight": _run_diagonal_weight,
    "round_trip": _run_round_trip,
    "two_sample_vs": _run_two_sample_vs,
    "variance": _run_variance,
    "cesaro": _run_cesaro,
}


@dataclass(frozen=True)
class RunManifest:
    """Everything a run produced; identical across reruns except wall time."""

    name: str
    spec_hash: str
    version: str
    reports: tuple[TestReport, ...]
    item_outcomes: tuple[dict, ...]
    exit_status: int
    wall_time_s: float

    def to_dict(self, with_wall_time: bool = True) -> dict:
        d = {
            "name": self.name,
            "spec_hash": self.spec_hash,
            "artifact_version": self.version,
            "reports": [r.to_dict() for r in self.reports],
            "items": list(self.item_outcomes),
            "exit_status": self.exit_status,
        }
        if with_wall_time:
            d["wall_time_s"] = self.wall_time_s
        return d

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        (out / "reports").mkdir(parents=True, exist_ok=True)
        (out / "manifest.json").write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
        )
        for i, rep in enumerate(self.reports):
            slug = "".join(ch if ch.isalnum() else "_" for ch in rep.name)
            path = out / "reports" / f"{i:03d}_{slug}.json"
            path.write_text(
                json.dumps(rep.to_dict(), indent=2, sort_keys=True) + "\n"
            )


def _write_raw(out_dir, idx: int, test: str, raw: RawData) -> None:
    raw_dir = Path(out_dir) / "raw"
    raw_dir.mkdir(parents=True, exist_ok=True)
    for key, arr in raw.items():
        path = raw_dir / f"{idx:03d}_{test}_{key}.csv"
        with path.open("w") as fh:
            fh.write(f"replicate,{key}\n")
            for r, v in enumerate(np.asarray(arr).ravel()):
                fh.write(f"{r},{v!r}\n")


def run(spec: ExperimentSpec, threads: int = 1, out_dir=None,
        write_raw: bool = False) -> RunManifest:
    """Execute the spec's battery; optionally write manifest/report files.

    Battery item i draws from the dedicated stream Rng(seed, i + 1), so
    items are independent and insertion-order stable.  exit_status is 0
    iff every must_pass item met its expectation ("pass" by default;
    counterexample items declare expect="reject").
    """
    start = time.monotonic()
    plan = _build_plan(spec)
    reports: list[TestReport] = []
    outcomes: list[dict] = []
    status = 0
    for i, item in enumerate(spec.battery):
        runner = _TEST_REGISTRY[item["test"]]
        item_rng = Rng(spec.seed, i + 1)
        reps, raw = runner(plan, spec, item, item_rng, threads)
        reports.extend(reps)
        expect = item.get("expect", "pass")
        met = all(r.decision == expect for r in reps)
        must = bool(item.get("must_pass", True))
        if must and not met:
            status = 1
        outcomes.append({
            "index": i,
            "test": item["test"],
            "expect": expect,
            "must_pass": must,
            "met": met,
            "reports": [r.name for r in reps],
        })
        if out_dir is not None and (write_raw or item.get("raw")):
            _write_raw(out_dir, i, item["test"], raw)
    manifest = RunManifest(
        name=spec.name,
        spec_hash=spec.spec_hash(),
        version=ARTIFACT_VERSION,
        reports=tuple(reports),
        item_outcomes=tuple(outcomes),
        exit_status=status,
        wall_time_s=time.monotonic() - start,
    )
    if out_dir is not None:
        manifest.write(out_dir)
        plan_dump_dir = Path(out_dir) / "raw"
        plan_dump_dir.mkdir(parents=True, exist_ok=True)
        _dump_realization(plan, spec, plan_dump_dir)
    return manifest


def _dump_realization(plan: _Plan, spec: ExperimentSpec, raw_dir: Path) -> None:
    """One seeded realization CSV per construction output, for inspection."""
    rng = Rng(spec.seed, 0)
    sample = plan.sample(rng)
    if plan.kind == "split":
        for j, comp in enumerate(sample):
            with (raw_dir / f"realization_component{j}.csv").open("w") as fh:
                dump_csv(comp, fh, seed=spec.seed, stream_id=0,
                         intensity=plan.intensity)
    elif plan.kind == "mark":
        with (raw_dir / "realization_marks.csv").open("w") as fh:
            fh.write(f"# seed={spec.seed} stream_id=0 "
                     f"window={format_window(sample.window)}\n")
            fh.write("point,mark\n")
            for p, mk in sample.atoms:
                fh.write(f"{format_rat(p)},{mk}\n")
    else:
        with (raw_dir / "realization.csv").open("w") as fh:
            dump_csv(sample, fh, seed=spec.seed, stream_id=0,
                     intensity=plan.intensity)


# ---------------------------------------------------------------------------
# shipped preset batteries

_PAIR_LAW_ROWS = [{"prob": "1", "weights": {"0": "1", "1": "1"}}]
_MIXED_LAW_ROWS = [
    {"prob": "1/2", "weights": {"0": "2"}},
    {"prob": "1/2", "weights": {"0": "1", "1": "1"}},
]

BATTERY_PRESETS: dict[str, dict] = {
    "splitting-independence": {
        "name": "splitting-independence",
        "transformation": "translation",
        "intensity": "1",
        "window": "[0,10)",
        "construction": "split",
        "params": {"probs": ["1/2", "1/2"]},
        "replicates": 4000,
        "seed": 20260823,
        "battery": [
            {"test": "poisson_gof", "component": 0},
            {"test": "poisson_gof", "component": 1},
            {"test": "mixed_moment", "groupings": [["[0,10)"], ["[0,10)"]]},
            {"test": "cross_correlation", "pair": [0, 1]},
            {"test": "dissociation", "K": 8, "replicates": 2000},
        ],
    },
    "thinning-counterexample": {
        "name": "thinning-counterexample",
        "transformation": "translation",
        "intensity": "1",
        "window": "[-1,51)",
        "construction": "thin",
        "params": {"kappa": "1"},
        "replicates": 4000,
        "seed": 20260823,
        "battery": [
            {"test": "intensity"},
            {"test": "dispersion", "alternative": "under", "level": 0.001,
             "expect": "reject"},
            {"test": "poisson_gof", "mean": "empirical", "expect": "reject",
             "must_pass": False},
        ],
    },
    "sushi-identities": {
        "name": "sushi-identities",
        "transformation": "translation",
        "intensity": "1",
        "window": "[0,8)",
        "construction": "sushi",
        "params": {"c": "1/2", "law": _PAIR_LAW_ROWS},
        "replicates": 3000,
        "seed": 20260823,
        "battery": [
            {"test": "intensity"},
            {"test": "variance"},
            {"test": "round_trip", "K_max": 2, "replicates": 300},
        ],
    },
    "moment-decomposition": {
        "name": "moment-decomposition",
        "transformation": "translation",
        "intensity": "1/2",
        "window": "[-9,3)",
        "construction": "poisson",
        "replicates": 20000,
        "seed": 20260823,
        "battery": [
            {"test": "moment_fit", "n": 2},
            {"test": "diagonal_weight", "n": 2, "depth": 6,
             "window": "[0,1)", "replicates": 4000},
            {"test": "cesaro", "windows": ["[0,1)", "[0,1)"], "K": [0],
             "L": 8, "replicates": 3000},
        ],
    },
    "id-identities": {
        "name": "id-identities",
        "transformation": "translation",
        "intensity": "1",
        "window": "[0,8)",
        "construction": "id",
        "params": {"c": "1/2", "law": _MIXED_LAW_ROWS},
        "replicates": 3000,
        "seed": 20260823,
        "battery": [
            {"test": "intensity"},
            {"test": "variance"},
            {"test": "two_sample_vs", "other": "sushi", "level": 0.001},
        ],
    },
}


def list_presets() -> list[tuple[str, str]]:
    """(name, description) rows: transformations first, then batteries."""
    rows = [(name, f"transformation: {desc}")
            for name, desc in TRANSFORMATION_PRESETS.items()]
    for name, d in BATTERY_PRESETS.items():
        tests = ", ".join(it["test"] for it in d["battery"])
        rows.append((name, f"battery: {d['construction']} + {tests}"))
    return rows


def preset_spec(name: str) -> ExperimentSpec:
    if name not in BATTERY_PRESETS:
        raise ValueError(f"unknown battery preset {name!r}")
    return ExperimentSpec.from_dict(BATTERY_PRESETS[name])
