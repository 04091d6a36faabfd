"""``nmcode`` command line. Every command prints JSON; the exit code is 0 iff all verdicts pass."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .. import bitlinalg as bl
from ..errors import NmcodeError
from ..params import evaluate
from ..pipeline import PipelineParams, build_pipeline
from .experiments import ExperimentConfig, rows_to_csv, run, run_hybrid_replay


def _emit(report: dict, args) -> int:
    text = json.dumps(report, indent=2, default=str)
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        print(text)
    if getattr(args, "csv", None):
        Path(args.csv).write_text(rows_to_csv(report.get("rows", [])))
    return 0 if report.get("ok", True) else 1


def _load_config(args, target: str | None = None) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config)
    for key in ("trials", "workers", "master_seed"):
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    if target is not None and cfg.target != target:
        raise NmcodeError(f"{args.config}: target {cfg.target!r}, this command runs {target!r}")
    return cfg


def cmd_params(args) -> int:
    report = evaluate(json.loads(Path(args.file).read_text())).to_json()
    return _emit(report, args)


def cmd_encode(args) -> int:
    pl = build_pipeline(PipelineParams.load(args.pipeline))
    x = bl.bits(args.message)
    if x.shape[0] != pl.coder.k:
        raise NmcodeError(f"message has {x.shape[0]} bits, the pipeline encodes {pl.coder.k}")
    seed = args.seed if args.seed is not None else pl.params.master_seed
    c = pl.coder.encode(x, np.random.default_rng(seed))
    return _emit({"k": pl.coder.k, "n": pl.coder.n, "seed": seed, "codeword": bl.to_str(c)}, args)


def cmd_decode(args) -> int:
    pl = build_pipeline(PipelineParams.load(args.pipeline))
    text = Path(args.codeword[1:]).read_text().strip() if args.codeword.startswith("@") else args.codeword
    c = bl.bits(text)
    if c.shape[0] != pl.coder.n:
        raise NmcodeError(f"codeword has {c.shape[0]} bits, the pipeline produces {pl.coder.n}")
    x = pl.coder.decode(c)
    return _emit({"message": None if x is None else bl.to_str(x), "rejected": x is None}, args)


def cmd_switching(args) -> int:
    return _emit(run(_load_config(args, "switching")), args)


def cmd_nm(args) -> int:
    cfg = _load_config(args)
    if cfg.target == "switching":
        raise NmcodeError("use the switching command for switching configs")
    return _emit(run(cfg), args)


def cmd_hybrid(args) -> int:
    return _emit(run_hybrid_replay(_load_config(args, "ss-reduction")), args)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nmcode", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        p.add_argument("--csv", help="also write the flattened result rows as CSV")
        return p

    p = common(sub.add_parser("params", help="evaluate a parameter file"))
    p.add_argument("file")
    p.set_defaults(func=cmd_params)

    p = common(sub.add_parser("encode", help="encode a message with a pipeline"))
    p.add_argument("--pipeline", required=True)
    p.add_argument("--message", required=True, help="bit string")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_encode)

    p = common(sub.add_parser("decode", help="decode a codeword with a pipeline"))
    p.add_argument("--pipeline", required=True)
    p.add_argument("--codeword", required=True, help="bit string, or @file")
    p.set_defaults(func=cmd_decode)

    for name, func, text in (("switching", cmd_switching, "switching-lemma collapse experiment"),
                             ("nm-experiment", cmd_nm, "real vs simulated tampering distributions"),
                             ("hybrid-replay", cmd_hybrid, "split-state hybrid replay")):
        p = common(sub.add_parser(name, help=text))
        p.add_argument("--config", required=True)
        p.add_argument("--trials", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument("--master-seed", dest="master_seed", type=int)
        p.set_defaults(func=func)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (NmcodeError, OSError, json.JSONDecodeError) as exc:
        print(f"nmcode: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
