"""Monte Carlo sweeps over SNR for several schemes on shared channels."""

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .estimators import SCHEMES, make_scheme
from .system import RngSpec, SystemConfig, draw_channels

__all__ = [
    "SweepSpec",
    "SweepRow",
    "SweepResult",
    "TrialOutcome",
    "evaluate_trial",
    "run_sweep",
    "emit_results",
    "load_results",
    "worker_count",
    "CSV_COLUMNS",
    "JSON_SCHEMA",
]

logger = logging.getLogger(__name__)

WORKERS_ENV = "BSARELAY_WORKERS"
CSV_COLUMNS = ("scheme", "snr_db", "user", "outage_prob", "mean_mi_bits",
               "ergodic_capacity_bits", "trials", "seed")

JSON_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["config", "rows"],
    "properties": {
        "config": {
            "type": "object",
            "required": ["n", "m", "k", "bs_power", "relay_power", "rate"],
        },
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": list(CSV_COLUMNS) + ["outage_stderr"],
                "additionalProperties": False,
                "properties": {
                    "scheme": {"type": "string", "enum": list(SCHEMES)},
                    "snr_db": {"type": "number"},
                    "user": {"type": "integer", "minimum": 0},
                    "outage_prob": {"type": "number", "minimum": 0, "maximum": 1},
                    "outage_stderr": {"type": "number", "minimum": 0},
                    "mean_mi_bits": {"type": "number", "minimum": 0},
                    "ergodic_capacity_bits": {"type": "number", "minimum": 0},
                    "trials": {"type": "integer", "minimum": 1},
                    "seed": {"type": "integer"},
                },
            },
        },
    },
}


@dataclass(frozen=True)
class SweepSpec:
    """What to simulate.

    ``outage_threshold`` overrides every user's threshold (bits) when set.
    """

    config: SystemConfig = field(default_factory=SystemConfig)
    schemes: Sequence[str] = SCHEMES
    snr_grid_db: Sequence[float] = (10.0, 15.0, 20.0, 25.0)
    trials: int = 1000
    master_seed: int = 0
    outage_threshold: Optional[float] = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.snr_grid_db:
            raise ValueError("SNR grid is empty")
        if not self.schemes:
            raise ValueError("no schemes given")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ValueError(f"unknown scheme {s!r}")


@dataclass(frozen=True)
class SweepRow:
    scheme: str
    snr_db: float
    user: int
    outage_prob: float
    mean_mi_bits: float
    ergodic_capacity_bits: float
    trials: int
    seed: int

    @property
    def outage_stderr(self):
        p = self.outage_prob
        return math.sqrt(max(p * (1.0 - p), 0.0) / self.trials)


@dataclass
class SweepResult:
    config: SystemConfig
    rows: List[SweepRow]

    def get(self, scheme, snr_db, user):
        for r in self.rows:
            if r.scheme == scheme and r.snr_db == snr_db and r.user == user:
                return r
        raise KeyError((scheme, snr_db, user))

    def pooled_outage(self, scheme, snr_db):
        """Outage averaged over users, with its binomial standard error."""
        rows = [r for r in self.rows if r.scheme == scheme and r.snr_db == snr_db]
        n = sum(r.trials for r in rows)
        p = sum(r.outage_prob * r.trials for r in rows) / n
        return p, math.sqrt(p * (1 - p) / n)

    def capacity(self, scheme, snr_db):
        return next(r.ergodic_capacity_bits for r in self.rows
                    if r.scheme == scheme and r.snr_db == snr_db)


@dataclass(frozen=True)
class TrialOutcome:
    mutual_info: np.ndarray
    thresholds: np.ndarray
    sum_rate: float


def evaluate_trial(ch, scheme, config, snr_db):
    """Per-user mutual information, outage thresholds and sum rate."""
    est = make_scheme(scheme, snr_db, config).fit(ch)
    return TrialOutcome(est.mutual_info_, est.thresholds_, float(est.sum_rate_))


def worker_count():
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _run_chunk(args):
    spec, trial_indices = args
    cfg = spec.config
    S, R, M = len(spec.schemes), len(spec.snr_grid_db), cfg.m
    mi = np.empty((S, R, len(trial_indices), M))
    thr = np.empty((S, R, M))
    rate = np.empty((S, R, len(trial_indices)))
    for t, idx in enumerate(trial_indices):
        ch = draw_channels(cfg, RngSpec(spec.master_seed, idx))
        for i, scheme in enumerate(spec.schemes):
            for j, snr in enumerate(spec.snr_grid_db):
                out = evaluate_trial(ch, scheme, cfg, snr)
                mi[i, j, t] = out.mutual_info
                thr[i, j] = out.thresholds
                rate[i, j, t] = out.sum_rate
    return mi, thr, rate


def run_sweep(spec, workers=None):
    """Run every (scheme, SNR, trial) cell and aggregate per user.

    Trial ``t`` always uses the channel drawn from ``(master_seed, t)``, for
    every scheme and SNR, so comparisons are paired. Per-trial values are
    gathered in trial order before reduction, which makes the output
    independent of the number of workers.
    """
    workers = worker_count() if workers is None else max(1, int(workers))
    cfg = spec.config
    n_chunks = min(spec.trials, workers * 4) if workers > 1 else 1
    chunks = [c.tolist() for c in np.array_split(np.arange(spec.trials), n_chunks)]
    jobs = [(spec, c) for c in chunks if c]
    logger.info("sweep: %d trials, %d schemes, %d SNR points, %d workers",
                spec.trials, len(spec.schemes), len(spec.snr_grid_db), workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(j) for j in jobs]

    mi = np.concatenate([p[0] for p in parts], axis=2)
    rate = np.concatenate([p[2] for p in parts], axis=2)
    thr = parts[0][1]
    if spec.outage_threshold is not None:
        thr = np.full_like(thr, float(spec.outage_threshold))

    rows = []
    for i, scheme in enumerate(spec.schemes):
        for j, snr in enumerate(spec.snr_grid_db):
            cap = float(np.mean(rate[i, j]))
            for m in range(cfg.m):
                vals = mi[i, j, :, m]
                rows.append(SweepRow(
                    scheme=scheme,
                    snr_db=float(snr),
                    user=m,
                    outage_prob=float(np.mean(vals < thr[i, j, m])),
                    mean_mi_bits=float(np.mean(vals)),
                    ergodic_capacity_bits=cap,
                    trials=spec.trials,
                    seed=int(spec.master_seed),
                ))
    return SweepResult(cfg, rows)


def _fmt(x):
    return f"{x:.10g}"


def emit_results(result, path, format="csv"):
    """Write a sweep result as CSV or JSON.

    CSV columns are :data:`CSV_COLUMNS`; floats carry 10 significant
    digits. JSON adds the configuration and each outage estimate's
    binomial standard error and follows :data:`JSON_SCHEMA`.
    """
    try:
        if format == "csv":
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(CSV_COLUMNS)
                for r in result.rows:
                    w.writerow([r.scheme, _fmt(r.snr_db), r.user, _fmt(r.outage_prob),
                                _fmt(r.mean_mi_bits), _fmt(r.ergodic_capacity_bits),
                                r.trials, r.seed])
        elif format == "json":
            doc = {
                "config": result.config.to_dict(),
                "rows": [
                    {**{k: (float(_fmt(v)) if isinstance(v, float) else v)
                        for k, v in asdict(r).items()},
                     "outage_stderr": float(_fmt(r.outage_stderr))}
                    for r in result.rows
                ],
            }
            with open(path, "w") as fh:
                json.dump(doc, fh, indent=2)
                fh.write("\n")
        else:
            raise ValueError(f"unknown format {format!r}")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def load_results(path, config=None):
    """Read back a file written by :func:`emit_results`."""
    path = os.fspath(path)
    if path.endswith(".json"):
        with open(path) as fh:
            doc = json.load(fh)
        cfg = SystemConfig(**{k: v for k, v in doc["config"].items() if k != "m"})
        rows = [SweepRow(**{k: v for k, v in r.items() if k != "outage_stderr"})
                for r in doc["rows"]]
        return SweepResult(cfg, rows)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        rows = [SweepRow(r["scheme"], float(r["snr_db"]), int(r["user"]),
                         float(r["outage_prob"]), float(r["mean_mi_bits"]),
                         float(r["ergodic_capacity_bits"]), int(r["trials"]),
                         int(r["seed"]))
                for r in reader]
    return SweepResult(config or SystemConfig(), rows)
