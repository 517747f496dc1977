"""``sitewatch`` command line.

Exit codes: 0 success, 1 runtime or data error, 2 usage or config error.
Reports and decisions go to standard output (or ``--output``); diagnostics
go to standard error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .config import resolve_config
from .engine import DecisionEngine, decision_line
from .errors import ConfigError, SitewatchError
from .frames import stream_frames, write_frames
from .metrics import (confusion, derive_metrics, grid_report, k_sweep, metrics_csv,
                      read_pairs, read_points, sweep_csv)
from .signs import SignMatcher, normalize_text
from .sim import gen_stream, sim_config_from_obj
from .voter import MajorityVoter

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


def _err(msg: str) -> None:
    print(f"sitewatch: {msg}", file=sys.stderr)


def _open_out(path: Optional[str]):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline="\n"), True


def cmd_run(args) -> int:
    cfg = resolve_config(args.config)
    k = cfg.voter_k if args.k is None else args.k
    if k < 1:
        raise ConfigError(f"--k must be >= 1, got {k}")
    engine = DecisionEngine(cfg)
    voter = MajorityVoter(k)
    n = positives = 0
    with open(args.input, "rb") as src:
        out, close = _open_out(args.output)
        try:
            write = out.write
            for frame in stream_frames(src):
                decision = engine(frame)
                smoothed = voter.push(decision.construction)
                write(decision_line(frame.frame_id, decision, smoothed))
                write("\n")
                n += 1
                positives += smoothed
        finally:
            if close:
                out.close()
            else:
                out.flush()
    ratio = positives / n if n else 0.0
    _err(f"{n} frames, {positives} positive after {k}-frame voting ({ratio:.2%})")
    return EXIT_OK


def cmd_eval_static(args) -> int:
    with open(args.fixture, encoding="utf-8") as fh:
        report = grid_report(read_points(fh))
    if args.format == "json":
        sys.stdout.write(json.dumps(report.to_obj(), indent=2) + "\n")
    else:
        sys.stdout.write(report.to_csv())
    _err(f"overall {report.overall_successes}/{report.overall_total} ({report.overall:.2f}%)")
    return EXIT_OK


def cmd_eval_dynamic(args) -> int:
    with open(args.pairs, encoding="utf-8") as fh:
        metrics = derive_metrics(confusion(read_pairs(fh)))
    if args.format == "json":
        sys.stdout.write(json.dumps(metrics.to_obj(), indent=2) + "\n")
    else:
        sys.stdout.write(metrics_csv(metrics))
    summary = ", ".join(
        f"{name} {'undefined' if getattr(metrics, name) is None else f'{100 * getattr(metrics, name):.2f}%'}"
        for name in ("accuracy", "precision", "recall", "f1", "specificity"))
    _err(summary)
    return EXIT_OK


def _read_truth(path) -> dict[int, bool]:
    truth = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SitewatchError(f"{path}:{lineno}: malformed JSON: {exc.msg}") from None
            if type(obj) is not dict or type(obj.get("frame_id")) is not int \
                    or type(obj.get("construction")) is not bool:
                raise SitewatchError(f"{path}:{lineno}: expected {{\"frame_id\": int, \"construction\": bool}}")
            truth[obj["frame_id"]] = obj["construction"]
    return truth


def _parse_ks(text: str) -> list[int]:
    try:
        ks = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not ks or min(ks) < 1:
        raise argparse.ArgumentTypeError("every k must be >= 1")
    return ks


def cmd_sweep_k(args) -> int:
    cfg = resolve_config(args.config)
    engine = DecisionEngine(cfg)
    sidecar = _read_truth(args.truth) if args.truth else None
    raw, truths = [], []
    with open(args.input, "rb") as src:
        for frame in stream_frames(src):
            if sidecar is not None:
                if frame.frame_id not in sidecar:
                    raise SitewatchError(f"no truth for frame_id {frame.frame_id} in {args.truth}")
                truth = sidecar[frame.frame_id]
            elif frame.truth is not None:
                truth = frame.truth.construction
            else:
                raise SitewatchError(f"frame_id {frame.frame_id} has no truth; pass --truth")
            raw.append(engine(frame).construction)
            truths.append(truth)
    sys.stdout.write(sweep_csv(k_sweep(raw, truths, args.ks)))
    return EXIT_OK


def cmd_match_sign(args) -> int:
    cfg = resolve_config(args.config)
    matcher = SignMatcher(cfg.signs(), cfg.dice_ngram, cfg.dice_threshold)
    best = matcher.best(normalize_text(args.text))
    match = matcher.match_text(args.text)
    if match is not None:
        print(f"match\t{match.matched_entry}\t{match.score:.4f}")
    elif best is not None:
        print(f"no-match\t{best[0]}\t{best[1]:.4f}")
    else:
        print("no-match\t\t0.0000")
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        obj = json.loads(Path(args.sim_config).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read {args.sim_config}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{args.sim_config}: malformed JSON: {exc.msg}") from None
    sim = sim_config_from_obj(obj)
    frames, truth = gen_stream(sim)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "frames.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        write_frames(frames, fh)
    with open(out / "truth.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for f, t in zip(frames, truth):
            fh.write(json.dumps({"frame_id": f.frame_id, "construction": t}) + "\n")
    _err(f"wrote {len(frames)} frames ({sum(truth)} in construction spans) to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sitewatch",
        description="Construction-site decisions from per-frame detections and OCR text.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="decide every frame of a JSONL stream, with K-frame voting")
    p.add_argument("--config", help="pipeline config JSON (default ./sitewatch.json if present)")
    p.add_argument("--input", required=True, help="frame JSONL")
    p.add_argument("--output", help="decision JSONL (default stdout)")
    p.add_argument("--k", type=int, help="voting window, overrides the config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval-static", help="distance x angle success grid from evaluation points")
    p.add_argument("--fixture", required=True, help="EvalPoint JSONL")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_eval_static)

    p = sub.add_parser("eval-dynamic", help="confusion matrix and metrics from (truth, predicted) pairs")
    p.add_argument("--pairs", required=True, help="JSONL of {\"truth\": bool, \"predicted\": bool}")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.set_defaults(func=cmd_eval_dynamic)

    p = sub.add_parser("sweep-k", help="metrics for several voting windows")
    p.add_argument("--config")
    p.add_argument("--input", required=True, help="frame JSONL")
    p.add_argument("--truth", help="truth JSONL sidecar (default: truth inside the frames)")
    p.add_argument("--ks", type=_parse_ks, default=[1, 10, 20, 50, 100])
    p.set_defaults(func=cmd_sweep_k)

    p = sub.add_parser("match-sign", help="match one OCR string against the sign dictionary")
    p.add_argument("--config")
    p.add_argument("--text", required=True)
    p.set_defaults(func=cmd_match_sign)

    p = sub.add_parser("simulate", help="generate a synthetic frame stream with truth")
    p.add_argument("--sim-config", required=True, help="simulation config JSON")
    p.add_argument("--out", required=True, help="output directory for frames.jsonl and truth.jsonl")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _err(f"config error: {exc}")
        return EXIT_USAGE
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the shutdown flush
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_RUNTIME
    except (SitewatchError, OSError) as exc:
        _err(str(exc))
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
