"""Command-line surface.

Subcommands: parse-log, score, simulate, mask-stats. Exit codes: 0 on
success, 1 for I/O or parse failures, 2 when validation reports errors,
3 when the simulated population collapses, 64 for usage errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .codec_log import parse_generic_json, parse_x265_csv, serialize_generic_json, validate
from .config import apply_seed, load_config
from .confidence import ScoringVariant, score_sequence
from .errors import ConfigError, ParseError, PolicyCollapse
from .quality_mask import drop_rate, inlier_ratio, load_match_stats, validate_match_stats
from .splat_sim.experiment import run_experiment
from .splat_sim.image_io import save_png
from .splat_sim.sequence import synthesize_sequence

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_VALIDATION = 2
EXIT_COLLAPSE = 3
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="splatctl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_parse = sub.add_parser("parse-log", help="convert an encoder log to canonical JSON")
    p_parse.add_argument("path", help="log file to read")
    p_parse.add_argument("--format", choices=["x265csv", "json"], default="x265csv", help="input format")
    p_parse.add_argument("--out", help="output JSON path (default: stdout)")

    p_score = sub.add_parser("score", help="compute per-frame confidence scores")
    p_score.add_argument("path", help="log file to score")
    p_score.add_argument("--format", choices=["x265csv", "json"], default="x265csv", help="input format")
    p_score.add_argument("--config", help="TOML config file")
    p_score.add_argument("--variant", choices=["linear", "sigmoid"], help="scoring variant override")
    p_score.add_argument("--tau", type=float, help="sigmoid temperature (required with --variant sigmoid)")
    p_score.add_argument("--rho", type=float, help="sigmoid bit-term damping")
    p_score.add_argument("--lambda-q", type=float, dest="lambda_q", help="QP score weight")
    p_score.add_argument("--lambda-b", type=float, dest="lambda_b", help="bit score weight")
    p_score.add_argument("--beta", type=float, help="EMA momentum")
    p_score.add_argument("--out", help="output CSV path (default: stdout)")

    p_sim = sub.add_parser("simulate", help="run the seeded 2D splatting experiment")
    p_sim.add_argument("--config", help="TOML config file")
    p_sim.add_argument("--seed", type=int, help="root seed for sequence and masks")
    p_sim.add_argument("--out", required=True, help="output directory")
    p_sim.add_argument("--frames", type=int, help="number of synthetic frames")
    p_sim.add_argument("--no-snapshots", action="store_true", help="skip PNG snapshot output")

    p_mask = sub.add_parser("mask-stats", help="derive drop rates from match statistics")
    p_mask.add_argument("path", help="match-stats JSON file")
    p_mask.add_argument("--config", help="TOML config file")
    p_mask.add_argument("--eta", type=float, help="drop-rate scaling override")
    p_mask.add_argument("--out", help="output CSV path (default: stdout)")
    return parser


def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        print(f"splatctl: cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_PARSE)


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _parse_series(path: str, fmt: str):
    data = _read_bytes(path)
    try:
        if fmt == "x265csv":
            return parse_x265_csv(data)
        return parse_generic_json(data)
    except ParseError as exc:
        print(f"splatctl: parse error in {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_PARSE)


def _cmd_parse_log(args) -> int:
    series = _parse_series(args.path, args.format)
    report = validate(series)
    for line in report.lines():
        print(line, file=sys.stderr)
    _write_text(args.out, serialize_generic_json(series) + "\n")
    return EXIT_OK if report.ok else EXIT_VALIDATION


def _score_overrides(args) -> dict:
    scoring: dict = {}
    for key in ("tau", "rho", "lambda_q", "lambda_b", "beta"):
        value = getattr(args, key)
        if value is not None:
            scoring[key] = value
    if args.variant is not None:
        scoring["variant"] = args.variant
    return {"scoring": scoring}


def _cmd_score(args, parser: _Parser) -> int:
    try:
        cfg = load_config(args.config, overrides=_score_overrides(args))
    except ConfigError as exc:
        if "tau" in str(exc) or "rho" in str(exc):
            parser.error(str(exc))
        print(f"splatctl: config error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    series = _parse_series(args.path, args.format)
    report = validate(series)
    if not report.ok:
        for line in report.lines():
            print(line, file=sys.stderr)
        return EXIT_VALIDATION
    conf = score_sequence(series, cfg.scoring)
    _write_text(args.out, conf.to_csv_text())
    return EXIT_OK


def _cmd_simulate(args) -> int:
    overrides: dict = {}
    if args.frames is not None:
        overrides["sequence"] = {"frames": args.frames}
    try:
        cfg = load_config(args.config, overrides=overrides)
        if args.seed is not None:
            cfg = apply_seed(cfg, args.seed)
    except ConfigError as exc:
        print(f"splatctl: config error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    seq = synthesize_sequence(cfg.sequence)
    try:
        report = run_experiment(seq, cfg.experiment)
    except PolicyCollapse as exc:
        print(f"splatctl: {exc}", file=sys.stderr)
        return EXIT_COLLAPSE
    (out_dir / "report.json").write_text(report.to_json_text() + "\n", encoding="utf-8")
    (out_dir / "traces.csv").write_text(report.traces_csv_text(), encoding="utf-8")
    (out_dir / "audit.json").write_text(report.audit_json_text() + "\n", encoding="utf-8")
    if not args.no_snapshots:
        for t, snap in enumerate(report.snapshots):
            save_png(out_dir / f"frame_{t:03d}.png", snap)
    return EXIT_OK


def _cmd_mask_stats(args) -> int:
    overrides = {"mask": {"eta": args.eta}} if args.eta is not None else {}
    try:
        cfg = load_config(args.config, overrides=overrides)
    except ConfigError as exc:
        print(f"splatctl: config error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    data = _read_bytes(args.path)
    try:
        stats = load_match_stats(data)
    except ParseError as exc:
        print(f"splatctl: parse error in {args.path}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    problems = validate_match_stats(stats)
    if problems:
        for frame, message in problems:
            print(f"error: frame {frame}: {message}", file=sys.stderr)
        return EXIT_VALIDATION
    lines = ["frame,inlier_ratio,drop_rate"]
    for s in stats:
        r = inlier_ratio(s, cfg.mask.epsilon)
        lines.append(f"{s.frame_index},{r!r},{drop_rate(r, cfg.mask.eta)!r}")
    _write_text(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "parse-log":
            return _cmd_parse_log(args)
        if args.command == "score":
            return _cmd_score(args, parser)
        if args.command == "simulate":
            return _cmd_simulate(args)
        return _cmd_mask_stats(args)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
