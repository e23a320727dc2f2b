"""Command-line entry point.

Subcommands: ``validate`` checks a config file, ``run`` executes a sweep
and writes the results file, ``curves`` turns a results file into
per-scenario plot tables.  Exit codes: 0 success, 2 validation failure,
3 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .exceptions import ConfigError
from .harness import (PAPER_COUNTS, emit_curves, parse_and_validate,
                      read_results, run_sweep)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="replink",
                                     description="Repeater-assisted DFT-s-OFDM link sweeps")
    sub = parser.add_subparsers(dest="command", required=True)

    val = sub.add_parser("validate", help="check an experiment config file")
    val.add_argument("--config", required=True, help="experiment config file")

    run = sub.add_parser("run", help="run a BER sweep and write the results file")
    run.add_argument("--config", required=True, help="experiment config file")
    run.add_argument("--mode", choices=("semi", "full", "both"), default="both")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument("--out", default=None, help="override the output directory")
    run.add_argument("--paper-scale", action="store_true",
                     help="use the full published work counts (slow)")
    run.add_argument("--workers", type=int, default=1, help="parallel worker processes")

    cur = sub.add_parser("curves", help="emit plot tables from a results file")
    cur.add_argument("--results", required=True, help="results file from `run`")
    cur.add_argument("--kind", choices=("ber", "diversity"), required=True)
    cur.add_argument("--out", default=None,
                     help="output directory (default: next to the results file)")
    return parser


def _cmd_validate(args) -> int:
    cfg = parse_and_validate(args.config)
    print(f"config ok: digest={cfg.digest()} seed={cfg.seed}")
    wf = cfg.waveform
    print(f"  waveform: N={wf.n_fft} M={wf.m_alloc} CP={wf.cp_len} "
          f"alloc_start={wf.alloc_start} constellation={cfg.constellation}")
    for name, ch in cfg.scenarios:
        reps = ", ".join(f"(delay={r.delay}, gain={r.gain})" for r in ch.repeaters) or "none"
        print(f"  scenario {name}: l_d={ch.l_d} fading={ch.fading} "
              f"support={ch.support} repeaters: {reps}")
    return EXIT_OK


def _cmd_run(args) -> int:
    cfg = parse_and_validate(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.out is not None:
        cfg = replace(cfg, output_dir=args.out)
    if args.paper_scale:
        cfg = replace(cfg, counts=PAPER_COUNTS)
    results = run_sweep(cfg, mode=args.mode, workers=args.workers)
    path = Path(cfg.output_dir) / "results.tsv"
    print(f"wrote {len(results.rows)} rows to {path} (config={results.config_digest})")
    return EXIT_OK


def _cmd_curves(args) -> int:
    results = read_results(args.results)
    out_dir = args.out if args.out is not None else Path(args.results).parent
    written = emit_curves(results, kind=args.kind, out_dir=out_dir)
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"validate": _cmd_validate, "run": _cmd_run, "curves": _cmd_curves}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001 - surface as runtime failure
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
