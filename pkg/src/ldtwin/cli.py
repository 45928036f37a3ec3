"""Command-line front end: ``simulate``, ``run`` and ``sweep``.

Every subcommand reads one JSON campaign config (``--config``; built-in
defaults when omitted), lets ``--seed`` and ``--out`` override it, and writes
CSV/JSON artifacts into the output directory.  On failure, files written by
the failing invocation are removed and the exit status is nonzero.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import os
import sys

from .config import CampaignConfig, ModelConfig, load_config
from .errors import LdtError
from .ldt import (
    compute_mme,
    initial_model,
    per_e_table,
    predict,
    run_baseline,
    run_campaign,
    sweep_thresholds,
    write_per_e_csv,
)
from .rotor_sim import generate_stream, stream_experiment, write_experiment_csv

log = logging.getLogger("ldtwin")

DEFAULT_GRID = "4,6,8,10,12"


class _Outputs:
    """Tracks files written by one command so a failure can roll them back."""

    def __init__(self, directory):
        self.directory = directory
        self.written = []

    def path(self, name):
        os.makedirs(self.directory, exist_ok=True)
        p = os.path.join(self.directory, name)
        self.written.append(p)
        return p

    def rollback(self):
        for p in self.written:
            if os.path.exists(p):
                os.remove(p)


def _load(args):
    config = load_config(args.config) if args.config else CampaignConfig()
    if args.seed is not None:
        config = config.replace(seed=args.seed)
    if args.out is not None:
        config = config.replace(out=args.out)
    return config


def cmd_simulate(config, index, out):
    def fetch(i):
        return stream_experiment(i, config.rotor, config.schedule, config.signal, config.seed)

    exp = fetch(index)
    yhat = None
    if config.model is not None:
        first = exp if index == 1 else fetch(1)
        yhat = predict(initial_model(config, first), exp)
    path = out.path(f"experiment_{index:03d}.csv")
    write_experiment_csv(path, exp, yhat)
    print(f"wrote {path}")


def cmd_run(config, out):
    stream = generate_stream(config.rotor, config.schedule, config.signal, config.seed)
    result = run_campaign(config, stream, keep_memory=False)
    baseline = run_baseline(config, stream)
    mme_original = compute_mme(baseline)
    result.write_csv(out.path("campaign.csv"))
    result.write_summary(out.path("summary.json"), mme_original)
    write_per_e_csv(out.path("per_e.csv"), per_e_table(result.rows, baseline))
    print(
        f"MME {result.mme:.4g} (original {mme_original:.4g}), "
        f"adaptations {result.adaptation_count}, "
        f"precision {result.precision:.3g}, recall {result.recall:.3g}"
    )


def cmd_sweep(config, grid, out):
    stream = generate_stream(config.rotor, config.schedule, config.signal, config.seed)
    base_model = config.model or ModelConfig()
    rows = []
    for kind in ("linear", "hybrid"):
        for detector in ("threshold", "lddm"):
            cfg = config.replace(
                model=dataclasses.replace(base_model, kind=kind),
                detector=dataclasses.replace(config.detector, kind=detector),
            )
            log.info("sweep %s/%s over %s", kind, detector, grid)
            for theta, res in zip(grid, sweep_thresholds(cfg, grid, stream)):
                rows.append((kind, detector, theta, res.mme, res.adaptation_count, res.precision, res.recall))
    with open(out.path("sweep.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["model", "detector", "theta_c", "mme", "adaptations", "precision", "recall"])
        for kind, det, theta, mme, n, p, r in rows:
            w.writerow([kind, det, "%.9g" % theta, "%.9g" % mme, n, "%.9g" % p, "%.9g" % r])
    print(f"wrote {len(rows)} sweep rows")


def _grid(text):
    try:
        values = sorted(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid grid {text!r}") from None
    if not values or any(v <= 0 for v in values):
        raise argparse.ArgumentTypeError("grid must be a nonempty list of positive thresholds")
    return values


def build_parser():
    parser = argparse.ArgumentParser(prog="ldtwin", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="campaign config JSON (defaults if omitted)")
    common.add_argument("--seed", type=int, help="override the master seed")
    common.add_argument("--out", help="output directory (overrides config)")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="dump one experiment as CSV")
    p.add_argument("--index", type=int, required=True, help="experiment index, 1..N")
    sub.add_parser("run", parents=[common], help="run one learning campaign")
    p = sub.add_parser("sweep", parents=[common], help="sweep the drift threshold")
    p.add_argument("--grid", type=_grid, default=_grid(DEFAULT_GRID),
                   help=f"comma-separated theta_c values (default {DEFAULT_GRID})")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        config = _load(args)
    except (LdtError, OSError) as exc:
        print(f"ldtwin: config error: {exc}", file=sys.stderr)
        return 2
    if args.command == "simulate":
        n = config.schedule.n_experiments
        if not 1 <= args.index <= n:
            parser.error(f"--index must be in [1, {n}], got {args.index}")

    out = _Outputs(config.out)
    try:
        if args.command == "simulate":
            cmd_simulate(config, args.index, out)
        elif args.command == "run":
            cmd_run(config, out)
        else:
            cmd_sweep(config, args.grid, out)
    except (LdtError, OSError, ValueError) as exc:
        out.rollback()
        print(f"ldtwin: {args.command} failed: {exc}", file=sys.stderr)
        return 1
    except BaseException:
        out.rollback()
        raise
    return 0


if __name__ == "__main__":
    sys.exit(main())
