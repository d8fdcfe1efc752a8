"""Command line front end: run experiment specs and inspect constructions.

Subcommands
  run             execute a spec file or shipped battery preset
  presets         list transformation recipes and battery presets
  orbit           dump an orbit segment as CSV (exact rationals)
  split           summarize an independent splitting of a Poisson sample
  thin-separation summarize hard-core separation thinning
  mark            summarize independent mark attachment
  sushi           compare a cluster measure against its closed forms

All JSON output uses sorted keys, so repeated invocations with the same
arguments are byte-identical.  Exit status for `run` mirrors the manifest:
0 iff every must_pass battery item met its expectation.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .cluster import SushiSpec, sushi_mean, sushi_variance, unit_intensity_c
from .experiment import (
    BATTERY_PRESETS,
    ExperimentSpec,
    list_presets,
    parse_law,
    preset_spec,
    resolve_transformation,
    run,
)
from .dynamics import orbit
from .moments import replicate_matrix
from .point_process import Rng, count, dump_csv, sample_poisson
from .split_mark import attach_marks, bernoulli_split, project_mark_set, separation_thin
from .stats import correlation_check, dispersion_index_test
from .windows import IntensitySpec, as_rat, format_rat, format_window, parse_window

__all__ = ["main"]


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def _report_brief(rep) -> dict:
    return {"decision": rep.decision, "p_value": rep.p_value,
            "statistic": rep.statistic}


def _parse_probs(text: str) -> list:
    return [as_rat(p) for p in text.split(",")]


def _load_law(text: str):
    path = Path(text)
    if path.exists():
        text = path.read_text()
    return parse_law(json.loads(text))


def _resolve_T(text: str):
    if text.strip().startswith("{"):
        return resolve_transformation(json.loads(text))
    return resolve_transformation(text)


def _cmd_run(args) -> int:
    path = Path(args.spec)
    if path.exists():
        spec = ExperimentSpec.from_json(path.read_text())
    elif args.spec in BATTERY_PRESETS:
        spec = preset_spec(args.spec)
    else:
        raise ValueError(
            f"{args.spec!r} is neither a spec file nor a battery preset"
        )
    manifest = run(spec, threads=args.threads, out_dir=args.out,
                   write_raw=args.raw)
    for rep in manifest.reports:
        print(f"{rep.decision:7s} p={rep.p_value:<12.6g} {rep.name}")
    print(f"spec_hash: {manifest.spec_hash}")
    print(f"exit_status: {manifest.exit_status}")
    if args.out:
        print(f"artifacts written to {args.out}")
    return manifest.exit_status


def _cmd_presets(_args) -> int:
    for name, desc in list_presets():
        print(f"{name:26s} {desc}")
    return 0


def _cmd_orbit(args) -> int:
    T = _resolve_T(args.transformation)
    rows = orbit(T, as_rat(args.x), args.k, max_stage=args.max_stage)
    print("k,x_k")
    for j, y in rows:
        print(f"{j},{format_rat(y)}")
    return 0


def _mass_matrix(sampler, evaluate, width, R, seed, threads):
    return replicate_matrix(sampler, evaluate, width, R, Rng(seed, 1), threads)


def _cmd_split(args) -> int:
    alpha = IntensitySpec(as_rat(args.intensity))
    W = parse_window(args.window)
    probs = _parse_probs(args.probs)
    if any(p < 0 for p in probs) or sum(probs) != 1:
        raise ValueError("probs must be nonnegative and sum to 1")
    sampler = lambda rng: bernoulli_split(sample_poisson(alpha, W, rng),
                                          probs, rng)
    evaluate = lambda comps: [float(count(c, W)) for c in comps]
    mat = _mass_matrix(sampler, evaluate, len(probs), args.replicates,
                       args.seed, args.threads)
    length = float(W.length)
    summary = {
        "window": format_window(W),
        "intensity": format_rat(alpha.alpha),
        "probs": [format_rat(p) for p in probs],
        "replicates": args.replicates,
        "seed": args.seed,
        "component_rates": [float(c) / length for c in mat.mean(axis=0)],
        "target_rates": [float(alpha.alpha * p) for p in probs],
    }
    if len(probs) >= 2:
        summary["cross_correlation"] = _report_brief(
            correlation_check(mat[:, 0], mat[:, 1]))
    _emit(summary)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        comps = sampler(Rng(args.seed, 0))
        for j, comp in enumerate(comps):
            with (out / f"component{j}.csv").open("w") as fh:
                dump_csv(comp, fh, seed=args.seed, stream_id=0, intensity=alpha)
    return 0


def _cmd_thin(args) -> int:
    alpha = IntensitySpec(as_rat(args.intensity))
    W = parse_window(args.window)
    kappa = as_rat(args.kappa)
    core = W.shrink(kappa)
    if core.is_empty:
        raise ValueError("window lacks the kappa-buffer (core is empty)")
    sampler = lambda rng: separation_thin(sample_poisson(alpha, W, rng), kappa)
    evaluate = lambda c: [float(count(c, core))]
    mat = _mass_matrix(sampler, evaluate, 1, args.replicates, args.seed,
                       args.threads)
    counts = mat[:, 0].astype(int)
    a = float(alpha.alpha)
    summary = {
        "window": format_window(W),
        "core": format_window(core),
        "kappa": format_rat(kappa),
        "intensity": format_rat(alpha.alpha),
        "replicates": args.replicates,
        "seed": args.seed,
        "kept_rate": float(counts.mean()) / float(core.length),
        "target_rate": a * math.exp(-2 * float(kappa) * a),
        "dispersion": _report_brief(
            dispersion_index_test(counts, alternative="under")),
    }
    _emit(summary)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        base = sample_poisson(alpha, W, Rng(args.seed, 0))
        with (out / "input.csv").open("w") as fh:
            dump_csv(base, fh, seed=args.seed, stream_id=0, intensity=alpha)
        with (out / "thinned.csv").open("w") as fh:
            dump_csv(separation_thin(base, kappa), fh, seed=args.seed,
                     stream_id=0, intensity=alpha)
    return 0


def _cmd_mark(args) -> int:
    alpha = IntensitySpec(as_rat(args.intensity))
    W = parse_window(args.window)
    probs = _parse_probs(args.probs)
    if any(p < 0 for p in probs) or sum(probs) != 1:
        raise ValueError("probs must be nonnegative and sum to 1")
    sampler = lambda rng: attach_marks(sample_poisson(alpha, W, rng),
                                       probs, rng)
    nmarks = len(probs)
    evaluate = lambda mc: [float(count(project_mark_set(mc, {j}), W))
                           for j in range(nmarks)]
    mat = _mass_matrix(sampler, evaluate, nmarks, args.replicates, args.seed,
                       args.threads)
    length = float(W.length)
    summary = {
        "window": format_window(W),
        "intensity": format_rat(alpha.alpha),
        "mark_probs": [format_rat(p) for p in probs],
        "replicates": args.replicates,
        "seed": args.seed,
        "mark_rates": [float(c) / length for c in mat.mean(axis=0)],
        "target_rates": [float(alpha.alpha * p) for p in probs],
    }
    if nmarks >= 2:
        summary["cross_correlation"] = _report_brief(
            correlation_check(mat[:, 0], mat[:, 1]))
    _emit(summary)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        mc = sampler(Rng(args.seed, 0))
        with (out / "marked.csv").open("w") as fh:
            fh.write(f"# seed={args.seed} stream_id=0 "
                     f"window={format_window(mc.window)}\n")
            fh.write("point,mark\n")
            for p, mk in mc.atoms:
                fh.write(f"{format_rat(p)},{mk}\n")
    return 0


def _cmd_sushi(args) -> int:
    from .cluster import sample_sushi

    law = _load_law(args.law)
    T = _resolve_T(args.transformation)
    c = unit_intensity_c(law) if args.c == "unit" else as_rat(args.c)
    spec = SushiSpec(c, law, T)
    W = parse_window(args.window)
    mean = sushi_mean(spec, W)
    var = sushi_variance(spec, W)
    sampler = lambda rng: sample_sushi(spec, W, rng)
    evaluate = lambda v: [float(count(v, W))]
    mat = _mass_matrix(sampler, evaluate, 1, args.replicates, args.seed,
                       args.threads)
    masses = mat[:, 0]
    R = args.replicates
    emp_mean = float(masses.mean())
    emp_var = float(masses.var(ddof=1))
    se = float(masses.std(ddof=1)) / math.sqrt(R)
    summary = {
        "transformation": str(T),
        "window": format_window(W),
        "c": format_rat(c),
        "unit_c": format_rat(unit_intensity_c(law)),
        "replicates": R,
        "seed": args.seed,
        "closed_form": {"mean": float(mean), "variance": float(var)},
        "empirical": {"mean": emp_mean, "mean_stderr": se,
                      "variance": emp_var},
        "z_mean": 0.0 if se == 0 else (emp_mean - float(mean)) / se,
    }
    _emit(summary)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        v = sampler(Rng(args.seed, 0))
        with (out / "realization.csv").open("w") as fh:
            dump_csv(v, fh, seed=args.seed, stream_id=0)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sushi-lab",
        description="equivariant point-process simulation laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a spec file or battery preset")
    p.add_argument("spec", help="path to a JSON spec, or a preset name")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None, help="directory for artifacts")
    p.add_argument("--raw", action="store_true",
                   help="also write per-replicate CSVs for every item")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("presets", help="list shipped presets")
    p.set_defaults(fn=_cmd_presets)

    p = sub.add_parser("orbit", help="orbit segment as CSV")
    p.add_argument("transformation", help="preset name or JSON recipe block")
    p.add_argument("x", help="starting point, exact rational literal")
    p.add_argument("k", type=int, help="last power (may be negative)")
    p.add_argument("--max-stage", type=int, default=12)
    p.set_defaults(fn=_cmd_orbit)

    def common(p, window="[0,10)"):
        p.add_argument("--intensity", default="1")
        p.add_argument("--window", default=window)
        p.add_argument("--replicates", type=int, default=2000)
        p.add_argument("--seed", type=int, default=20260823)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--out", default=None)

    p = sub.add_parser("split", help="independent splitting summary")
    common(p)
    p.add_argument("--probs", default="1/2,1/2")
    p.set_defaults(fn=_cmd_split)

    p = sub.add_parser("thin-separation", help="hard-core thinning summary")
    common(p, window="[-1,51)")
    p.add_argument("--kappa", default="1")
    p.set_defaults(fn=_cmd_thin)

    p = sub.add_parser("mark", help="independent marking summary")
    common(p)
    p.add_argument("--probs", default="1/2,1/3,1/6")
    p.set_defaults(fn=_cmd_mark)

    p = sub.add_parser("sushi", help="cluster measure vs closed forms")
    common(p, window="[0,8)")
    p.add_argument("--c", default="1/2", help="ground scale, or 'unit'")
    p.add_argument("--law",
                   default='[{"prob": "1", "weights": {"0": "1", "1": "1"}}]',
                   help="catalog rows as inline JSON or a file path")
    p.add_argument("--transformation", default="translation")
    p.set_defaults(fn=_cmd_sushi)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
