"""Command-line front end.

    impsobol bounds   --config cfg.json [--output-dir DIR] [--seed N] [--verbose]
    impsobol fit      --config cfg.json ...
    impsobol validate --config cfg.json ...

Exit status: 0 success, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import traceback
from pathlib import Path

from . import pipeline
from .config import AnalysisConfig
from .errors import ConfigError, ImpSobolError, UnknownModel

log = logging.getLogger("impsobol")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="impsobol", description="Imprecise Sobol' indices via augmented PCE")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "bounds": "fit the augmented PCE and compute index intervals",
        "fit": "fit the augmented PCE only and report diagnostics",
        "validate": "compare surrogate indices with Monte Carlo estimates",
    }
    for name, text in helps.items():
        s = sub.add_parser(name, help=text)
        s.add_argument("--config", required=True, help="analysis config (JSON)")
        s.add_argument("--output-dir", help="output directory (overrides the config)")
        s.add_argument("--seed", type=int, help="design seed (overrides the config)")
        s.add_argument("--verbose", "-v", action="store_true", help="log progress to stderr")
    return p


def _failing_module(exc: BaseException) -> str:
    name = "impsobol"
    for frame, _ in traceback.walk_tb(exc.__traceback__):
        mod = frame.f_globals.get("__name__", "")
        if mod.startswith("impsobol.") and mod not in ("impsobol.cli", "impsobol.pipeline"):
            name = mod
    return name.split(".")[-1]


def _outputs(cfg: AnalysisConfig, args) -> Path:
    if args.output_dir:
        return Path(args.output_dir)
    out = Path(cfg.output_dir)
    return out if out.is_absolute() else Path(cfg.base_dir) / out


def _report(fit: pipeline.FitResult) -> None:
    print(f"model evaluations: {fit.n_evaluations} (design rows: {len(fit.design)})")
    print(f"PCE: {len(fit.pce.index_set)} terms, degree {fit.pce.degree}, corrected LOO {fit.pce.loo_corrected:.3e}")
    if fit.err_gen is not None:
        print(f"relative generalization error: {fit.err_gen:.3e} ({fit.n_validation_evaluations} extra evaluations)")


def cmd_fit(cfg: AnalysisConfig, out: Path) -> int:
    fit = pipeline.run_fit(cfg)
    files = {}
    if "json" in cfg.formats:
        files["results.json"] = pipeline.dumps_json(pipeline.fit_summary(fit))
    if "csv" in cfg.formats:
        files["design.csv"] = pipeline.design_csv(fit)
    for name, text in files.items():
        pipeline.write_atomic(out / name, text)
    _report(fit)
    return EXIT_OK


def cmd_bounds(cfg: AnalysisConfig, out: Path) -> int:
    res = pipeline.run_bounds(cfg)
    files = {}
    if "json" in cfg.formats:
        files["results.json"] = pipeline.dumps_json(pipeline.bounds_summary(res))
    if "csv" in cfg.formats:
        files["design.csv"] = pipeline.design_csv(res.fit)
        order = "first" if "first" in cfg.orders else cfg.orders[0]
        files["barplot.csv"] = pipeline.barplot_csv(res, order)
        files["impact_epistemic.csv"] = pipeline.impact_csv(res, order)
    for name, text in files.items():
        pipeline.write_atomic(out / name, text)
    _report(res.fit)
    for name, orders in res.intervals.items():
        cells = "  ".join(f"{o}=[{iv.lower:.4f}, {iv.upper:.4f}]" for o, iv in orders.items())
        print(f"{name:>8}: {cells}")
    for w in res.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


def cmd_validate(cfg: AnalysisConfig, out: Path) -> int:
    fit = pipeline.run_fit(cfg)
    rows = pipeline.validation_rows(cfg, fit)
    pipeline.write_atomic(out / "validate.csv", pipeline.validation_csv(rows))
    _report(fit)
    ok = sum(r["within_3se"] for r in rows)
    print(f"surrogate within 3 SE of Monte Carlo: {ok}/{len(rows)}")
    return EXIT_OK


COMMANDS = {"fit": cmd_fit, "bounds": cmd_bounds, "validate": cmd_validate}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = AnalysisConfig.from_file(args.config).with_seed(args.seed)
        out = _outputs(cfg, args)
        return COMMANDS[args.command](cfg, out)
    except (ConfigError, UnknownModel) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ImpSobolError as exc:
        print(f"numerical failure in {_failing_module(exc)}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
