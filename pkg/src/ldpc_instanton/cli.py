"""Command-line workflows: code generation, decoding, search, rendering.

Every output file is paired with provenance: progress logs carry an
embedded comment header, all other artifacts get a JSON manifest sidecar
naming the subcommand, resolved options, code identity (builtin name or
file hash), and seeds, enough to reproduce the artifact bit-exactly.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import glob as globmod
import hashlib
import json
import os
import sys

import numpy as np

from . import channel, render, search
from .code import BUILTIN_CODES, from_alist, to_alist
from .decoder import decode, trace_csv
from .search import SearchConfig


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _load_code(value: str):
    """Resolve --code: builtin name or alist file path.

    Returns (graph, identity dict for the manifest).
    """
    if value in BUILTIN_CODES:
        return BUILTIN_CODES[value](), {"builtin": value}
    if not os.path.exists(value):
        raise ValueError(f"code {value!r} is neither a builtin ({', '.join(BUILTIN_CODES)}) nor a file")
    with open(value, "r", encoding="utf-8") as fh:
        text = fh.read()
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return from_alist(text), {"path": value, "sha256": digest}


def _read_noise(path: str) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        return channel.load_noise(fh.read())


def _write_manifest(out_path: str, manifest: dict) -> None:
    with open(out_path + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _parse_pair(text: str, flag: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"{flag} expects two comma-separated numbers, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise UsageError(f"{flag} expects numbers, got {text!r}") from None


def _parse_resolution(text: str):
    parts = text.lower().split("x")
    try:
        w, h = int(parts[0]), int(parts[1])
    except (IndexError, ValueError):
        raise UsageError(f"--res expects WIDTHxHEIGHT, got {text!r}") from None
    if w < 1 or h < 1:
        raise UsageError(f"--res must be positive, got {text!r}")
    return w, h


def cmd_gen_code(args) -> int:
    graph = BUILTIN_CODES[args.name]()
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(to_alist(graph))
    _write_manifest(args.output, {"command": "gen-code", "code": {"builtin": args.name}, "artifacts": [args.output]})
    print(f"wrote {args.output}: {graph!r}")
    return 0


def cmd_decode(args) -> int:
    graph, identity = _load_code(args.code)
    xi = _read_noise(args.noise)
    if xi.shape[0] != graph.n_bits:
        raise ValueError(f"noise vector has {xi.shape[0]} entries, code has {graph.n_bits} bits")
    capture = args.trace_csv is not None or args.trace_pgm is not None
    outcome = decode(graph, channel.llr_from_noise(xi), args.iters, capture_trace=capture)
    print(f"outcome={outcome.kind.value} iteration={outcome.iteration} withstand={outcome.withstand}")
    manifest = {
        "command": "decode",
        "code": identity,
        "noise": args.noise,
        "iters": args.iters,
        "outcome": outcome.kind.value,
        "iteration": outcome.iteration,
    }
    artifacts = []
    if args.trace_csv is not None:
        with open(args.trace_csv, "w", encoding="utf-8") as fh:
            fh.write(trace_csv(outcome.trace))
        artifacts.append(args.trace_csv)
    if args.trace_pgm is not None:
        render.write_pgm(render.trace_pixels(outcome.trace), args.trace_pgm)
        artifacts.append(args.trace_pgm)
    manifest["artifacts"] = artifacts
    for path in artifacts:
        _write_manifest(path, manifest)
    return 0


def _load_seed_vectors(paths, n_bits: int):
    """Seed files hold one real per line; each file may stack several
    vectors, so the numeric line count must be a multiple of the code size."""
    seeds = []
    for path in paths or []:
        with open(path, "r", encoding="utf-8") as fh:
            flat = channel.load_noise(fh.read())
        if flat.shape[0] % n_bits != 0:
            raise ValueError(f"{path}: {flat.shape[0]} values is not a multiple of the code size {n_bits}")
        seeds.extend(flat.reshape(-1, n_bits))
    return seeds


def _search_worker(code_value: str, config_kwargs: dict, seed_paths, resume_path):
    """One independent run; top-level so process pools can pickle it."""
    graph, _ = _load_code(code_value)
    config = SearchConfig(**config_kwargs)
    config.seeds = _load_seed_vectors(seed_paths, graph.n_bits)
    config.resume_path = resume_path
    array, progress = search.run(graph, config)
    return search.save_checkpoint(array), progress, array.best().w


def cmd_search(args) -> int:
    graph, identity = _load_code(args.code)
    code_label = identity.get("builtin") or identity.get("path")

    base_kwargs = dict(
        scheme=args.scheme,
        n_max=args.n_max,
        budget_sweeps=args.sweeps,
        budget_seconds=args.budget_seconds,
        initial_amp=args.initial_amp,
        target_w=args.target_w,
        timer=args.timer,
    )

    n_runs = args.parallel_runs
    run_seeds = [args.seed] if n_runs is None else [args.seed + i for i in range(n_runs)]

    def out_name(base: str | None, idx: int):
        if base is None:
            return None
        if n_runs is None:
            return base
        return f"{base}.run{idx}"

    jobs = []
    for idx, run_seed in enumerate(run_seeds):
        kwargs = dict(base_kwargs, rng_seed=run_seed)
        jobs.append((idx, run_seed, kwargs))

    results = {}
    if n_runs is not None and n_runs > 1:
        workers = min(n_runs, os.cpu_count() or 1)
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(_search_worker, args.code, kwargs, args.seeds_file, args.resume): (idx, run_seed)
                for idx, run_seed, kwargs in jobs
            }
            for fut, (idx, run_seed) in futures.items():
                results[idx] = (run_seed, fut.result())
    else:
        for idx, run_seed, kwargs in jobs:
            results[idx] = (run_seed, _search_worker(args.code, kwargs, args.seeds_file, args.resume))

    for idx in sorted(results):
        run_seed, (checkpoint_text, progress, best_w) = results[idx]
        print(f"seed={run_seed} w({args.n_max})={best_w!r}")
        manifest = {
            "command": "search",
            "code": identity,
            "scheme": args.scheme,
            "n_max": args.n_max,
            "seed": run_seed,
            "budget_sweeps": args.sweeps,
            "budget_seconds": args.budget_seconds,
            "timer": args.timer,
            "target_w": args.target_w,
            "rng": search.RNG_DESCRIPTION,
            "seeds_files": args.seeds_file or [],
            "resume": args.resume,
        }
        ckpt_path = out_name(args.checkpoint, idx)
        if ckpt_path is not None:
            with open(ckpt_path, "w", encoding="utf-8") as fh:
                fh.write(checkpoint_text)
            _write_manifest(ckpt_path, dict(manifest, artifacts=[ckpt_path]))
        prog_path = out_name(args.progress_csv, idx)
        if prog_path is not None:
            meta = {
                "seed": run_seed,
                "scheme": args.scheme,
                "code": code_label,
                "timer": args.timer,
                "rng": search.RNG_DESCRIPTION,
                "amplitude_feedback": search.FEEDBACK_DESCRIPTION,
            }
            with open(prog_path, "w", encoding="utf-8") as fh:
                fh.write(search.write_progress_csv(progress, meta))
    return 0


def _resolve_third(args, n_bits: int):
    if args.third is not None:
        return _read_noise(args.third), {"third": args.third}
    if args.third_random is not None:
        rng = np.random.Generator(np.random.PCG64(args.third_random))
        return rng.standard_normal(n_bits), {"third_random": args.third_random}
    bits = []
    for tok in args.third_bits.split(","):
        try:
            bits.append(int(tok))
        except ValueError:
            raise UsageError(f"--third-bits expects integers, got {tok!r}") from None
    if args.one_based:
        bits = [b - 1 for b in bits]
    vec = np.zeros(n_bits)
    for b in bits:
        if b < 0 or b >= n_bits:
            raise ValueError(f"indicator bit {b} out of range for a code with {n_bits} bits")
        vec[b] = 1.0
    return vec, {"third_bits": bits, "one_based": bool(args.one_based)}


def cmd_render_cut(args) -> int:
    graph, identity = _load_code(args.code)
    anchor = _read_noise(args.anchor)
    if anchor.shape[0] != graph.n_bits:
        raise ValueError(f"anchor has {anchor.shape[0]} entries, code has {graph.n_bits} bits")
    third, third_id = _resolve_third(args, graph.n_bits)
    width, height = _parse_resolution(args.res) if args.res else render.DEFAULT_RESOLUTION
    spec = render.CutSpec(
        anchor=anchor,
        third=third,
        u_range=_parse_pair(args.urange, "--urange") if args.urange else render.DEFAULT_U_RANGE,
        v_range=_parse_pair(args.vrange, "--vrange") if args.vrange else render.DEFAULT_V_RANGE,
        width=width,
        height=height,
        n_cap=args.cap,
    )
    cut = render.render_cut(graph, spec)
    render.write_pgm(cut.pixels, args.output)
    tones_path = args.tones_csv or args.output + ".tones.csv"
    manifest = {
        "command": "render-cut",
        "code": identity,
        "anchor": args.anchor,
        "third_point": third_id,
        "u_range": list(spec.u_range),
        "v_range": list(spec.v_range),
        "resolution": [spec.width, spec.height],
        "n_cap": spec.n_cap,
        "artifacts": [args.output, tones_path],
    }
    _write_manifest(args.output, manifest)
    with open(tones_path, "w", encoding="utf-8") as fh:
        fh.write(render.cut_csv(cut))
    print(f"wrote {args.output} ({spec.width}x{spec.height})")
    return 0


def cmd_render_trace(args) -> int:
    graph, identity = _load_code(args.code)
    xi = _read_noise(args.noise)
    if xi.shape[0] != graph.n_bits:
        raise ValueError(f"noise vector has {xi.shape[0]} entries, code has {graph.n_bits} bits")
    traced = render.render_trace(graph, xi, args.iters)
    render.write_pgm(traced.pixels, args.output)
    manifest = {
        "command": "render-trace",
        "code": identity,
        "noise": args.noise,
        "iters": args.iters,
        "outcome": traced.outcome.kind.value,
        "stop_iteration": traced.outcome.iteration,
        "artifacts": [args.output],
    }
    period = None
    if args.period_from is not None:
        period = render.detect_sign_period(traced.outcome.trace, args.period_from)
        manifest["sign_period"] = period
        print(f"period={'none' if period is None else period}")
    _write_manifest(args.output, manifest)
    print(f"wrote {args.output} ({traced.pixels.shape[1]}x{traced.pixels.shape[0]})")
    return 0


def cmd_aggregate(args) -> int:
    paths = sorted(globmod.glob(args.inputs))
    if not paths:
        raise ValueError(f"no files match {args.inputs!r}")
    logs = []
    for path in paths:
        with open(path, "r", encoding="utf-8") as fh:
            logs.append(search.read_progress_csv(fh.read()))
    times = []
    for tok in args.times.split(","):
        try:
            times.append(float(tok))
        except ValueError:
            raise UsageError(f"--times expects numbers, got {tok!r}") from None
    rows = search.aggregate_progress(logs, times)
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(search.write_aggregate_csv(rows))
    _write_manifest(args.output, {"command": "aggregate", "inputs": paths, "times": times, "artifacts": [args.output]})
    print(f"wrote {args.output} ({len(rows)} rows from {len(paths)} runs)")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="ldpc-instanton", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", parser_class=_Parser)

    p = sub.add_parser("gen-code", help="write a builtin code as an alist file")
    p.add_argument("name", choices=sorted(BUILTIN_CODES))
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen_code)

    p = sub.add_parser("decode", help="decode one noise vector")
    p.add_argument("--code", required=True, help="builtin name (toy, tanner155) or alist file")
    p.add_argument("--noise", required=True)
    p.add_argument("--iters", type=int, required=True)
    p.add_argument("--trace-csv")
    p.add_argument("--trace-pgm")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("search", help="instanton-array search")
    p.add_argument("--code", required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--scheme", choices=search.SCHEMES, default="A")
    budget = p.add_mutually_exclusive_group(required=True)
    budget.add_argument("--budget-seconds", type=float)
    budget.add_argument("--sweeps", type=int)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--seeds-file", action="append", help="noise vectors to check first; repeatable")
    p.add_argument("--checkpoint", help="write the final array here")
    p.add_argument("--resume", help="checkpoint to start from")
    p.add_argument("--progress-csv")
    p.add_argument("--parallel-runs", type=int)
    p.add_argument("--initial-amp", type=float, default=0.1)
    p.add_argument("--target-w", type=float, help="stop early once the deepest slot reaches this weight")
    p.add_argument("--timer", choices=("cpu", "wall"), default="cpu")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("render-cut", help="grayscale cut of the noise space")
    p.add_argument("--code", required=True)
    p.add_argument("--anchor", required=True, help="noise vector on the horizontal axis")
    third = p.add_mutually_exclusive_group(required=True)
    third.add_argument("--third", help="noise-vector file fixing the cut plane")
    third.add_argument("--third-random", type=int, metavar="SEED")
    third.add_argument("--third-bits", metavar="LIST", help="comma-separated indicator bit indices")
    p.add_argument("--one-based", action="store_true", help="interpret --third-bits as 1-based")
    p.add_argument("--urange", metavar="a,b")
    p.add_argument("--vrange", metavar="a,b")
    p.add_argument("--res", metavar="WxH")
    p.add_argument("--cap", type=int, default=render.DEFAULT_N_CAP)
    p.add_argument("--tones-csv", help="path for the raw-tone CSV companion (default: OUTPUT.tones.csv)")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_render_cut)

    p = sub.add_parser("render-trace", help="decoding-dynamics image for one noise vector")
    p.add_argument("--code", required=True)
    p.add_argument("--noise", required=True)
    p.add_argument("--iters", type=int, required=True)
    p.add_argument("--period-from", type=int, metavar="K0", help="detect the sign-pattern period after this iteration")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_render_trace)

    p = sub.add_parser("aggregate", help="empirical CDF of best weights across runs")
    p.add_argument("--inputs", required=True, help="glob of progress CSV files")
    p.add_argument("--times", required=True, help="comma-separated seconds")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_aggregate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, "func"):
            parser.print_usage(sys.stderr)
            return 1
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
