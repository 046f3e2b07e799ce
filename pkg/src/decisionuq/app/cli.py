"""Command-line entry point ``decisionuq``.

Exit status: 0 on success, 2 for configuration or input errors, 3 for
numerical failures (including failed verification checks).
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from ..exceptions import ConfigError, ImproperDistributionError, NumericalError
from ..rng import RngStream
from .config import StudyConfig
from .dyke import run_dyke_replicates
from .io import emit_report
from .study import RiskTable, run_risk, run_study
from .verify import verify_theorems

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

log = logging.getLogger("decisionuq")


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _format_for(path: str, explicit: str | None) -> str:
    if explicit:
        return explicit
    return "csv" if Path(path).suffix.lower() == ".csv" else "json"


def cmd_estimate(args) -> int:
    cfg = StudyConfig.load(args.config).with_overrides(data=args.data, seed=args.seed)
    report = run_study(cfg)
    emit_report(report, args.out, _format_for(args.out, args.format), include_timing=args.timing)
    for e in report.entries:
        print(f"{e.estimator:6s} {e.loss:40s} {e.value:.6g}")
    return EXIT_OK


def cmd_dyke(args) -> int:
    table = run_dyke_replicates(args.replicates, RngStream(args.seed), n=args.n, posterior_draws=args.draws,
                                workers=args.workers)
    table.write(args.out)
    for name in ("p_mle", "p_hpe", "p_bay1", "p_bay2"):
        print(f"{name}: median {float(np.median(table.column(name))):.4g}, "
              f"fraction above 1e-2 {table.fraction_above(name):.3f}")
    print(f"truth {table.p_true:.4g}; {len(table.rows)} replicates, {table.failures} failed")
    return EXIT_OK


def cmd_risk(args) -> int:
    cfg = StudyConfig.load(args.config)
    if args.seed is not None or args.workers is not None:
        raw = dict(cfg.raw)
        if args.seed is not None:
            raw["seed"] = args.seed
        if args.workers is not None:
            raw["risk"] = {**(raw.get("risk") or {}), "workers": args.workers}
        cfg = StudyConfig.from_dict(raw, cfg.base_dir)
    rows = run_risk(cfg)
    emit_report(RiskTable(rows, cfg.seed), args.out, _format_for(args.out, args.format))
    for r in rows:
        print(f"{r['estimator']:6s} {r['loss']:40s} risk {r['risk']:.6g} (se {r['mc_std_error']:.2g})")
    return EXIT_OK


def cmd_verify(args) -> int:
    items = verify_theorems(RngStream(args.seed), predictive_draws=args.draws)
    for it in items:
        print(it.line())
    failed = [it for it in items if not it.passed]
    print(f"{len(items) - len(failed)}/{len(items)} checks passed")
    return EXIT_OK if not failed else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="decisionuq", description="Bayes, plug-in and predictive estimation studies.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("estimate", help="run a study configuration and write its report")
    e.add_argument("--config", required=True)
    e.add_argument("--data", help="CSV file overriding the configured data")
    e.add_argument("--out", required=True)
    e.add_argument("--seed", type=_u64)
    e.add_argument("--format", choices=("json", "csv"))
    e.add_argument("--timing", action="store_true", help="include wall-clock time in JSON output")
    e.set_defaults(func=cmd_estimate)

    d = sub.add_parser("dyke", help="replicated flood-probability study, one CSV row per replicate")
    d.add_argument("--replicates", type=_positive, required=True)
    d.add_argument("--n", type=_positive, default=30)
    d.add_argument("--seed", type=_u64, required=True)
    d.add_argument("--out", required=True)
    d.add_argument("--draws", type=_positive, default=100_000, help="posterior draws per replicate")
    d.add_argument("--workers", type=_positive, default=1)
    d.set_defaults(func=cmd_dyke)

    r = sub.add_parser("risk", help="Monte-Carlo risk of each (estimator, loss) pair")
    r.add_argument("--config", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--seed", type=_u64)
    r.add_argument("--workers", type=_positive)
    r.add_argument("--format", choices=("json", "csv"))
    r.set_defaults(func=cmd_risk)

    v = sub.add_parser("verify", help="check the predictive-estimation identities")
    v.add_argument("--seed", type=_u64, default=0)
    v.add_argument("--draws", type=_positive, default=1_000_000, help="predictive draws")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ImproperDistributionError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
