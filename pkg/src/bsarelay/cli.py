"""Command-line entry point: ``bsarelay {outage,capacity,verify}``."""

import argparse
import logging
import sys

import numpy as np

from .estimators import SCHEMES
from .harness import SweepSpec, emit_results, run_sweep
from .system import load_config
from .verify import run_checks

logger = logging.getLogger("bsarelay")


def _snr_grid(start, stop, step):
    if step <= 0:
        raise ValueError("--snr-step must be positive")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return tuple(float(start + i * step) for i in range(max(n, 0)))


def _schemes(text):
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [s for s in names if s not in SCHEMES]
    if bad:
        raise argparse.ArgumentTypeError(
            f"unknown scheme(s) {', '.join(bad)}; choose from {', '.join(SCHEMES)}")
    return names


def _add_sweep_args(p):
    p.add_argument("--config", help="JSON system configuration")
    p.add_argument("--snr-start", type=float, default=10.0)
    p.add_argument("--snr-stop", type=float, default=25.0)
    p.add_argument("--snr-step", type=float, default=5.0)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--schemes", type=_schemes, default=SCHEMES)
    p.add_argument("--out", required=True, help="output file")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: $BSARELAY_WORKERS or CPU count)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bsarelay",
        description="Block signal alignment for MIMO two-way relay networks.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_sweep_args(sub.add_parser("outage", help="outage probability sweep"))
    _add_sweep_args(sub.add_parser("capacity", help="ergodic capacity sweep"))
    v = sub.add_parser("verify", help="run the invariant suite")
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--snr", type=float, default=20.0)
    v.add_argument("--config", help="JSON system configuration")
    return parser


def _sweep(args):
    spec = SweepSpec(
        config=load_config(args.config),
        schemes=args.schemes,
        snr_grid_db=_snr_grid(args.snr_start, args.snr_stop, args.snr_step),
        trials=args.trials,
        master_seed=args.seed,
    )
    result = run_sweep(spec, workers=args.workers)
    emit_results(result, args.out, args.format)
    for scheme in spec.schemes:
        for snr in spec.snr_grid_db:
            if args.command == "outage":
                p, se = result.pooled_outage(scheme, snr)
                print(f"{scheme:<18s} {snr:6.1f} dB  outage={p:.4f} +/- {se:.4f}")
            else:
                print(f"{scheme:<18s} {snr:6.1f} dB  "
                      f"capacity={result.capacity(scheme, snr):.4f} bits")
    return 0


def _verify(args):
    checks = run_checks(trials=args.trials, seed=args.seed, snr_db=args.snr,
                        config=load_config(args.config))
    for c in checks:
        print(c.line())
    return 0 if all(c.ok for c in checks) else 1


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s - %(module)s - %(message)s")
    try:
        if args.command == "verify":
            return _verify(args)
        return _sweep(args)
    except (OSError, ValueError) as exc:
        print(f"bsarelay: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
