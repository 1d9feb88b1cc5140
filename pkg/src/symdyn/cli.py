"""Command line front end: ``symdyn lossless|ffwd|harness ...``.

Sequences are comma-separated integers, read from ``--input`` or stdin.
Rationals are written as ``num/den`` strings.  Every command prints JSON.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .feedforward import CodecParams, JointPMF, build_pm_dual, decode, decode_stream, encode
from .harness import ExperimentConfig, run_experiment
from .intervals import frac
from .lossless import (
    RepresentativeGrid,
    build_gauss,
    build_memoryless,
    decode_lossless,
    encode_lossless,
)
from .source import SourceModel


def _fractions(text: str) -> list:
    return [frac(v.strip()) for v in text.split(",") if v.strip()]


def _table(text: str) -> list:
    return [_fractions(row) for row in text.split(";")]


def _symbols(text: str) -> tuple:
    return tuple(int(v) for v in text.replace("\n", ",").split(",") if v.strip())


def _read_sequence(args) -> tuple:
    text = Path(args.input).read_text() if args.input else sys.stdin.read()
    return _symbols(text)


def _load_model(args) -> SourceModel:
    if getattr(args, "p_y", None):
        return build_memoryless(_fractions(args.p_y))
    if args.model == "gauss":
        return build_gauss()
    return SourceModel.from_json(Path(args.model).read_text())


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True), flush=True)


def _codec_params(args, n: int) -> CodecParams:
    return CodecParams(n=n, rate=frac(args.rate), epsilon=frac(args.epsilon),
                       delta=frac(args.delta), budget=args.budget, order=args.order,
                       seed=args.seed)


# -- lossless ----------------------------------------------------------------


def cmd_lossless_encode(args) -> int:
    model = _load_model(args)
    y = _read_sequence(args)
    grid = RepresentativeGrid(len(y), frac(args.rate))
    code = encode_lossless(model, y, grid)
    _emit({"m": code.m, "success": code.success, "n": len(y), "M": grid.size})
    return 0


def cmd_lossless_decode(args) -> int:
    model = _load_model(args)
    grid = RepresentativeGrid(args.n, frac(args.rate))
    _emit({"y": list(decode_lossless(model, args.m, grid, args.n))})
    return 0


# -- feedforward -------------------------------------------------------------


def cmd_ffwd_build(args) -> int:
    pmf = JointPMF.from_channel(_fractions(args.p_y), _table(args.p_x_given_y))
    model = build_pm_dual(pmf, strict=not args.allow_zero)
    text = model.to_json()
    if args.output:
        Path(args.output).write_text(text)
    else:
        print(text)
    return 0


def cmd_ffwd_encode(args) -> int:
    model = _load_model(args)
    y = _read_sequence(args)
    code = encode(model, y, _codec_params(args, len(y)))
    _emit({"m": code.m, "success": code.success,
           "z": None if code.z is None else list(code.z), "attempts": code.attempts})
    return 0


def cmd_ffwd_decode(args) -> int:
    model = _load_model(args)
    params = _codec_params(args, args.n)
    if not args.stream:
        y = _read_sequence(args)
        _emit({"x": list(decode(model, args.m, params, y))})
        return 0
    # one estimate out, then one true symbol in
    dec = decode_stream(model, args.m, params)
    source = open(args.input) if args.input else sys.stdin
    with source:
        for _ in range(args.n):
            print(dec.emit(), flush=True)
            line = source.readline()
            if not line.strip():
                print("input ended before the block was complete", file=sys.stderr)
                return 1
            dec.feed(int(line))
    return 0


# -- harness -----------------------------------------------------------------


def cmd_harness_run(args) -> int:
    cfg = ExperimentConfig.from_json(Path(args.config).read_text())
    if args.output:
        cfg.output = args.output
    report = run_experiment(cfg)
    _emit({"kind": report.kind, "passed": report.passed, "aggregates": report.aggregates,
           "checks": report.checks})
    return 0 if report.passed else 1


def _codec_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", required=True, help="SourceModel JSON file")
    p.add_argument("--rate", required=True, help='rate R as "num/den"')
    p.add_argument("--epsilon", default="1/20")
    p.add_argument("--delta", default="1/20", help="typicality slack")
    p.add_argument("--budget", type=int, default=4096, help="max midpoints examined")
    p.add_argument("--order", choices=("least", "random"), default="least")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--input", help="sequence file (default: stdin)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="symdyn", description=__doc__.splitlines()[0])
    top = parser.add_subparsers(dest="group", required=True)

    lossless = top.add_parser("lossless").add_subparsers(dest="command", required=True)
    for name, fn in (("encode", cmd_lossless_encode), ("decode", cmd_lossless_decode)):
        p = lossless.add_parser(name)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--model", help='SourceModel JSON file, or "gauss"')
        src.add_argument("--p-y", help="memoryless source probabilities, comma-separated")
        p.add_argument("--rate", required=True, help='rate R as "num/den"')
        if name == "encode":
            p.add_argument("--input", help="sequence file (default: stdin)")
        else:
            p.add_argument("--m", type=int, required=True)
            p.add_argument("--n", type=int, required=True)
        p.set_defaults(func=fn)

    ffwd = top.add_parser("ffwd").add_subparsers(dest="command", required=True)
    p = ffwd.add_parser("build-model")
    p.add_argument("--p-y", required=True, help="source probabilities, comma-separated")
    p.add_argument("--p-x-given-y", required=True,
                   help="rows P(x|y) separated by ';', entries by ','")
    p.add_argument("--allow-zero", action="store_true",
                   help="accept joint tables with zero entries (flat T0 pieces)")
    p.add_argument("--output")
    p.set_defaults(func=cmd_ffwd_build)

    p = ffwd.add_parser("encode")
    _codec_options(p)
    p.set_defaults(func=cmd_ffwd_encode)

    p = ffwd.add_parser("decode")
    _codec_options(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--stream", action="store_true",
                   help="write each estimate before reading the next true symbol")
    p.set_defaults(func=cmd_ffwd_decode)

    harness = top.add_parser("harness").add_subparsers(dest="command", required=True)
    p = harness.add_parser("run")
    p.add_argument("config")
    p.add_argument("--output", help="report path, overriding the config")
    p.set_defaults(func=cmd_harness_run)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
