"""Command-line entry point: ``depsplit <subcommand> ...``.

Settings resolve as command-line flag, then ``--config`` file (flat
``key = value`` lines, keys named like the long flags), then built-in default.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric divergence.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import benchmark as bm
from . import checkpoint, dgm, synth
from . import timeseries as ts
from .core import DataError, DepsplitError, DivergenceError, Quarter, read_kv_file
from .ingest import build_panel, load_sdi_dir, write_panel_csv

log = logging.getLogger("depsplit")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DIVERGED = 0, 1, 2, 3

OVERLAY_COLUMNS = ("year", "benchmark_retail_fraction", "model_retail_fraction")
SINGLE_FIT_COLUMNS = ("group", "bank_id", "mu", "sigma")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# ------------------------------------------------------------------ helpers

class Settings:
    """Flag > config file > default lookup."""

    ALIASES = {"lam": "lambda"}

    def __init__(self, args):
        self.args = args
        self.file = read_kv_file(args.config) if getattr(args, "config", None) else {}

    def get(self, key, default=None, cast=str):
        v = getattr(self.args, key, None)
        if v is not None:
            return v
        name = self.ALIASES.get(key, key)
        if name in self.file:
            return cast(self.file[name])
        return default


def _pair(text):
    a, b = (float(x) for x in str(text).split(","))
    return (a, b)


def _quarter(text):
    return Quarter.parse(text)


def _dgm_config(s: Settings, base: dict | None = None) -> dgm.DgmConfig:
    base = dict(base or {})
    d = dgm.DgmConfig(**base) if base else dgm.DgmConfig()
    prior = dict(d.prior)
    for key in dgm.DEFAULT_PRIOR:
        v = s.get(f"prior_{key}", None, _pair)
        if v is not None:
            prior[key] = v
    return dgm.DgmConfig(
        n_samples=s.get("samples", d.n_samples, int),
        n_inference_trials=s.get("trials", d.n_inference_trials, int),
        lam=s.get("lam", d.lam, float),
        prior=prior,
        prior_reduction=s.get("prior_reduction", d.prior_reduction),
        metric_mode=s.get("metric_mode", d.metric_mode),
        seed=s.get("seed", d.seed, int),
        lr=s.get("lr", d.lr, float),
        steps=s.get("steps", d.steps, int),
        momentum=s.get("momentum", d.momentum, float),
        clip_norm=s.get("clip_norm", d.clip_norm, float),
        l2=s.get("l2", d.l2, float),
        threads=s.get("threads", d.threads, int),
    )


def _sdi_dir(path) -> Path:
    p = Path(path)
    return p / "sdi" if (p / "sdi").is_dir() else p


def _read_ids(path) -> list[str]:
    return [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]


def _write_ids(ids, path):
    Path(path).write_text("".join(f"{i}\n" for i in sorted(ids)))


def _forecast(s: Settings):
    industry = dgm.read_industry_csv(s.get("industry"))
    macro = ts.read_macro_csv(s.get("macro"))
    train = test = None
    if s.get("train_start") is not None:
        train = (s.get("train_start", cast=_quarter), s.get("train_end", cast=_quarter))
        test = (s.get("test_start", cast=_quarter), s.get("test_end", cast=_quarter))
        if None in train or None in test:
            raise UsageError("train/test windows need all of --train-start/--train-end/"
                             "--test-start/--test-end")
    lags = s.get("lags", 4, int)
    include_current = bool(s.get("include_current", False,
                                 lambda v: v.lower() in ("1", "true", "yes")))
    return ts.forecast(macro, industry.quarters, industry.retail, industry.wholesale,
                       n_lags=lags, include_current=include_current, train=train, test=test)


def _fit_args(p):
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--momentum", type=float)
    p.add_argument("--clip-norm", type=float)
    p.add_argument("--l2", type=float)
    p.add_argument("--metric-mode", choices=dgm.METRIC_MODES)
    p.add_argument("--prior-reduction", choices=("sum", "mean"))
    for key in dgm.DEFAULT_PRIOR:
        p.add_argument(f"--prior-{key.replace('_', '-')}", dest=f"prior_{key}", type=_pair,
                       metavar="START,END")


def _forecast_args(p):
    p.add_argument("--industry", help="industry CSV from `infer --industry`")
    p.add_argument("--macro", help="macro CSV: quarter, reserves, total_loans, retail_loans")
    p.add_argument("--lags", type=int)
    p.add_argument("--include-current", action="store_const", const=True, default=None)
    for k in ("train-start", "train-end", "test-start", "test-end"):
        p.add_argument(f"--{k}")


# -------------------------------------------------------------- subcommands

def cmd_synth(s: Settings):
    spec = synth.parse_spec_file(s.get("spec")) if s.get("spec") else synth.SynthSpec()
    if s.args.seed is not None:
        spec.seed = s.args.seed
    result = synth.generate_panel(spec)
    out = synth.write_synth(result, s.get("out"))
    log.info("wrote synthetic panel %s to %s", result.panel.shape, out)


def cmd_ingest(s: Settings):
    records = load_sdi_dir(_sdi_dir(s.get("panel")))
    stats = None
    if s.get("ckpt"):
        _, stats, _ = checkpoint.load(s.get("ckpt"))
    panel, _ = build_panel(records, normalize=True, stats=stats)
    write_panel_csv(panel, s.get("out"))


def _train_banks(s: Settings):
    if s.get("train_banks"):
        return _read_ids(s.get("train_banks"))
    if s.get("branches"):
        branches = bm.read_branch_csv(s.get("branches"))
        year = s.get("branch_year", None, int)
        if year is None:
            year = max(b.year for b in branches)
        return sorted(bm.large_branch_banks(branches, year,
                                            s.get("threshold", bm.DEFAULT_THRESHOLD, float)))
    return None


def cmd_fit(s: Settings):
    cfg = _dgm_config(s)
    records = load_sdi_dir(_sdi_dir(s.get("panel")))
    banks = _train_banks(s)
    if banks is not None:
        wanted = set(banks)
        records = {q: [r for r in rs if r.bank_id in wanted] for q, rs in records.items()}
        if not any(records.values()):
            raise DataError("no training banks found in the panel")
    panel, stats = build_panel(records)
    result = dgm.fit(panel, cfg, log_every=s.get("log_every", 0, int))
    echo = cfg.to_dict()
    del echo["threads"]          # execution detail; results do not depend on it
    meta = {
        "kind": "dgm",
        "config": echo,
        "train_banks": list(panel.banks),
        "train_quarters": [str(q) for q in panel.quarters],
        "final_loss": result.trace[-1],
    }
    checkpoint.save(s.get("ckpt"), {r: getattr(result.nets, r) for r in dgm.Nets.ROLES},
                    stats, meta)
    if s.get("trace"):
        with open(s.get("trace"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("step", "loss"))
            for i, v in enumerate(result.trace):
                w.writerow((i, repr(v)))


def cmd_infer(s: Settings):
    nets, stats, meta = checkpoint.load(s.get("ckpt"))
    if meta.get("kind") != "dgm":
        raise DataError("checkpoint is not a two-distribution model")
    cfg = _dgm_config(s, meta["config"])
    records = load_sdi_dir(_sdi_dir(s.get("panel")))
    panel, _ = build_panel(records, stats=stats)
    est = dgm.infer_retail(dgm.Nets(**nets), panel, cfg)
    dgm.write_estimates_csv(est, s.get("out"))
    if s.get("industry"):
        dgm.write_industry_csv(dgm.aggregate_industry(est), s.get("industry"))


def cmd_validate_split(s: Settings):
    cfg = _dgm_config(s)
    records = load_sdi_dir(_sdi_dir(s.get("panel")))
    rows = []
    for group in ("retail", "wholesale"):
        ids = set(_read_ids(s.get(f"{group}_banks")))
        sub = {q: [r for r in rs if r.bank_id in ids] for q, rs in records.items()}
        if not any(sub.values()):
            raise DataError(f"no {group} banks found in the panel")
        panel, _ = build_panel(sub)
        fit = dgm.fit_single(panel, cfg)
        for bank, (mu, sigma) in fit.per_bank().items():
            rows.append((group, bank, mu, sigma))
    with open(s.get("out"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SINGLE_FIT_COLUMNS)
        for g, b, mu, sigma in rows:
            w.writerow((g, b, repr(mu), repr(sigma)))
    for group in ("retail", "wholesale"):
        mus = [r[2] for r in rows if r[0] == group]
        print(f"{group}: median mu {np.median(mus):.3f} over {len(mus)} banks")


def cmd_benchmark(s: Settings):
    branches = bm.read_branch_csv(s.get("branches"))
    result = bm.threshold_split(branches, s.get("threshold", bm.DEFAULT_THRESHOLD, float))
    bm.write_benchmark_csv(result, s.get("out"))
    if s.get("large_banks_out"):
        year = s.get("branch_year", None, int) or max(b.year for b in branches)
        _write_ids(bm.large_branch_banks(branches, year,
                                         s.get("threshold", bm.DEFAULT_THRESHOLD, float)),
                   s.get("large_banks_out"))


def cmd_forecast(s: Settings):
    fc = _forecast(s)
    ts.write_forecast_csv(fc, s.get("out"))
    if s.get("impacts_out"):
        ts.write_impact_csv(ts.impact_table(fc.model), s.get("impacts_out"))


def cmd_impacts(s: Settings):
    fc = _forecast(s)
    ts.write_impact_csv(ts.impact_table(fc.model), s.get("out"))


def cmd_report(s: Settings):
    out = Path(s.get("out"))
    out.mkdir(parents=True, exist_ok=True)
    industry = dgm.read_industry_csv(s.get("industry"))
    dgm.write_industry_csv(industry, out / "industry.csv")
    frac = dict(zip(industry.quarters, industry.retail_fraction))
    with open(out / "benchmark_overlay.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(OVERLAY_COLUMNS)
        if s.get("branches"):
            result = bm.threshold_split(bm.read_branch_csv(s.get("branches")),
                                        s.get("threshold", bm.DEFAULT_THRESHOLD, float))
            for year, split in sorted(result.industry.items()):
                model = frac.get(Quarter(year, 4))
                w.writerow((year, repr(split.retail_fraction),
                            "" if model is None else repr(float(model))))
    fc = _forecast(s)
    ts.write_forecast_csv(fc, out / "forecast.csv")
    ts.write_impact_csv(ts.impact_table(fc.model), out / "impacts.csv")
    ts.write_divergence_csv(
        ts.divergence_periods(industry.quarters, industry.retail, industry.wholesale),
        out / "divergence.csv")


COMMANDS = {
    "ingest": cmd_ingest,
    "synth": cmd_synth,
    "fit": cmd_fit,
    "infer": cmd_infer,
    "validate-split": cmd_validate_split,
    "benchmark": cmd_benchmark,
    "forecast": cmd_forecast,
    "impacts": cmd_impacts,
    "report": cmd_report,
}

REQUIRED = {
    "ingest": ("panel", "out"),
    "synth": ("out",),
    "fit": ("panel", "ckpt"),
    "infer": ("panel", "ckpt", "out"),
    "validate-split": ("panel", "retail_banks", "wholesale_banks", "out"),
    "benchmark": ("branches", "out"),
    "forecast": ("industry", "macro", "out"),
    "impacts": ("industry", "macro", "out"),
    "report": ("industry", "macro", "out"),
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key = value settings file")
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int, help="worker threads; results do not depend on it")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="depsplit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic panel")
    p.add_argument("--spec", help="synthetic spec file (key = value)")
    p.add_argument("--out", help="output directory")

    p = sub.add_parser("ingest", parents=[common], help="validate SDI CSVs and dump the panel")
    p.add_argument("--panel", help="directory of YYYYQ#.csv files (or one holding sdi/)")
    p.add_argument("--ckpt", help="reuse normalization statistics from this checkpoint")
    p.add_argument("--out")

    p = sub.add_parser("fit", parents=[common], help="train the generative model")
    p.add_argument("--panel")
    p.add_argument("--ckpt", help="checkpoint to write")
    p.add_argument("--train-banks", help="file with one training bank id per line")
    p.add_argument("--branches", help="pick training banks with a large branch from this file")
    p.add_argument("--branch-year", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--trace", help="write the loss trace CSV here")
    p.add_argument("--log-every", type=int)
    _fit_args(p)

    p = sub.add_parser("infer", parents=[common], help="estimate retail/wholesale deposits")
    p.add_argument("--panel")
    p.add_argument("--ckpt")
    p.add_argument("--out", help="per bank-quarter estimates CSV")
    p.add_argument("--industry", help="per-quarter industry totals CSV")
    p.add_argument("--samples", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--metric-mode", choices=dgm.METRIC_MODES)

    p = sub.add_parser("validate-split", parents=[common],
                       help="fit one-distribution models to all-retail and all-wholesale banks")
    p.add_argument("--panel")
    p.add_argument("--retail-banks")
    p.add_argument("--wholesale-banks")
    p.add_argument("--out")
    _fit_args(p)

    p = sub.add_parser("benchmark", parents=[common], help="branch-size threshold baseline")
    p.add_argument("--branches")
    p.add_argument("--threshold", type=float)
    p.add_argument("--out")
    p.add_argument("--large-banks-out", help="also write ids of banks with a large branch")
    p.add_argument("--branch-year", type=int)

    p = sub.add_parser("forecast", parents=[common], help="lagged regression forecast")
    _forecast_args(p)
    p.add_argument("--out")
    p.add_argument("--impacts-out")

    p = sub.add_parser("impacts", parents=[common], help="summed lag weights per input")
    _forecast_args(p)
    p.add_argument("--out")

    p = sub.add_parser("report", parents=[common], help="bundle plot-ready CSVs")
    _forecast_args(p)
    p.add_argument("--branches")
    p.add_argument("--threshold", type=float)
    p.add_argument("--out", help="output directory")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        s = Settings(args)
        missing = [k for k in REQUIRED[args.command] if s.get(k) is None]
        if missing:
            raise UsageError("missing required option(s): "
                             + ", ".join("--" + k.replace("_", "-") for k in missing))
    except UsageError as exc:
        print(f"depsplit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"depsplit: {exc}", file=sys.stderr)
        return EXIT_DATA
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](s)
    except UsageError as exc:
        print(f"depsplit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as exc:
        print(f"depsplit: training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (DataError, DepsplitError, OSError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"depsplit: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
