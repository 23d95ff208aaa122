"""Read SDI-shaped quarterly CSV files into a :class:`BankPanel`.

One file per quarter named ``YYYYQ#.csv`` with the columns in
:data:`SDI_COLUMNS`. Money columns are thousands of dollars.
"""
from __future__ import annotations

import csv
import math
from collections.abc import Iterable, Mapping
from pathlib import Path

import numpy as np

from .core import (
    FEATURE_NAMES,
    N_LOG_FEATURES,
    BankPanel,
    BankRecord,
    FeatureVector,
    NormStats,
    ParseError,
    Quarter,
    SchemaError,
    ValidationError,
)

SDI_COLUMNS = (
    "bank_id",
    "domestic_deposits",
    "n_offices",
    "n_accounts",
    "n_small_accounts",
    "deposits_small_accounts",
    "res_construction_loans",
    "res_real_estate_loans",
    "loans_to_individuals",
    "total_loans",
)
_COUNT_COLUMNS = {"n_offices", "n_accounts", "n_small_accounts"}

MIN_DEPOSITS = 4500.0
MIN_ACCOUNTS = 250
LIMIT_CHANGE = Quarter(2010, 1)


def insurance_limit(quarter: Quarter) -> float:
    """Deposit insurance limit in thousands of dollars."""
    return 100.0 if quarter < LIMIT_CHANGE else 250.0


def insurance_limits(quarters: Iterable[Quarter]) -> np.ndarray:
    return np.array([insurance_limit(q) for q in quarters], dtype=float)


def quarter_from_path(path) -> Quarter:
    return Quarter.parse(Path(path).stem)


def _number(text, column, rownum):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise ParseError(f"row {rownum}: column {column!r} is not numeric: {text!r}") from None
    if not math.isfinite(value):
        raise ParseError(f"row {rownum}: column {column!r} is not finite: {text!r}")
    if column in _COUNT_COLUMNS:
        if value != int(value):
            raise ParseError(f"row {rownum}: column {column!r} must be a whole count: {text!r}")
        return int(value)
    return value


def parse_sdi_csv(path, quarter: Quarter | None = None) -> list[BankRecord]:
    """Parse one quarterly file. Row numbers in errors count the header as row 1."""
    path = Path(path)
    if quarter is None:
        quarter = quarter_from_path(path)
    records = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in SDI_COLUMNS:
            if col not in header:
                raise SchemaError(f"{path.name}: missing column {col!r}")
        for rownum, row in enumerate(reader, start=2):
            vals = {c: _number(row[c], c, rownum) for c in SDI_COLUMNS if c != "bank_id"}
            for c, v in vals.items():
                if v < 0:
                    raise ValidationError(f"row {rownum}: column {c!r} is negative")
            rec = BankRecord(
                bank_id=row["bank_id"].strip(),
                quarter=quarter,
                domestic_deposits=vals["domestic_deposits"],
                n_offices=vals["n_offices"],
                n_accounts=vals["n_accounts"],
                n_small_accounts=vals["n_small_accounts"],
                deposits_small_accounts=vals["deposits_small_accounts"],
                retail_loans=(vals["res_construction_loans"] + vals["res_real_estate_loans"]
                              + vals["loans_to_individuals"]),
                total_loans=vals["total_loans"],
            )
            try:
                rec.validate()
            except ValidationError as exc:
                raise ValidationError(f"row {rownum}: {exc}") from None
            records.append(rec)
    return records


def load_sdi_dir(directory) -> dict[Quarter, list[BankRecord]]:
    """Parse every ``YYYYQ#.csv`` under ``directory`` and apply :func:`filter_banks`."""
    directory = Path(directory)
    files = []
    for f in directory.glob("*.csv"):
        try:
            files.append((quarter_from_path(f), f))
        except ValueError:
            continue
    if not files:
        raise SchemaError(f"no YYYYQ#.csv files in {directory}")
    files.sort()
    return {q: filter_banks(parse_sdi_csv(f, q)) for q, f in files}


def filter_banks(records: Iterable[BankRecord]) -> list[BankRecord]:
    """Drop banks with under $4.5M deposits or fewer than 250 accounts (boundary kept)."""
    return [r for r in records
            if r.domestic_deposits >= MIN_DEPOSITS and r.n_accounts >= MIN_ACCOUNTS]


def compute_features(record: BankRecord) -> FeatureVector:
    dep = record.domestic_deposits
    offices = record.n_offices if record.n_offices > 0 else 1
    return FeatureVector(
        log_deposits=math.log(dep),
        log_deposits_per_office=math.log(dep / offices),
        log_accounts=math.log(record.n_accounts),
        frac_small_amount=record.deposits_small_accounts / dep,
        frac_small_accounts=record.n_small_accounts / record.n_accounts,
        frac_retail_loans=(record.retail_loans / record.total_loans
                           if record.total_loans > 0 else 0.0),
    )


def fit_norm_stats(raw_features: np.ndarray, mask: np.ndarray) -> NormStats:
    cells = raw_features[mask][:, :N_LOG_FEATURES]
    mean = cells.mean(axis=0)
    if len(cells) <= 1:
        return NormStats(mean, np.ones(N_LOG_FEATURES))
    std = cells.std(axis=0)
    for j in range(N_LOG_FEATURES):
        if std[j] == 0:
            raise ValidationError(f"feature {FEATURE_NAMES[j]!r} has zero variance")
    return NormStats(mean, std)


def build_panel(records_by_quarter: Mapping[Quarter, Iterable[BankRecord]],
                normalize: bool = True,
                stats: NormStats | None = None) -> tuple[BankPanel, NormStats | None]:
    """Assemble a dense panel from per-quarter records.

    When ``normalize`` is set, the log features are standardized with ``stats``
    if given (inference) or with statistics fitted over the unmasked cells
    (training). Returns the panel and the statistics used.
    """
    if not records_by_quarter:
        raise ValidationError("at least one quarter is required")
    quarters = sorted(records_by_quarter)
    banks = sorted({r.bank_id for q in quarters for r in records_by_quarter[q]})
    bidx = {b: i for i, b in enumerate(banks)}
    n_b, n_t = len(banks), len(quarters)

    raw = np.zeros((n_b, n_t, len(FEATURE_NAMES)))
    metrics = np.zeros((n_b, n_t, 3))
    n_acc = np.zeros((n_b, n_t))
    mask = np.zeros((n_b, n_t), dtype=bool)
    for t, q in enumerate(quarters):
        for r in records_by_quarter[q]:
            b = bidx[r.bank_id]
            if mask[b, t]:
                raise ValidationError(f"duplicate bank {r.bank_id} in {q}")
            raw[b, t] = compute_features(r).as_array()
            metrics[b, t] = (r.domestic_deposits, r.deposits_small_accounts,
                             r.n_small_accounts / r.n_accounts)
            n_acc[b, t] = r.n_accounts
            mask[b, t] = True

    if normalize:
        if stats is None:
            stats = fit_norm_stats(raw, mask)
        features = stats.apply(raw)
        features[~mask] = 0.0
    else:
        features = raw
    panel = BankPanel(banks, quarters, features, metrics, n_acc, mask,
                      norm=stats if normalize else None)
    return panel, (stats if normalize else None)


def raw_log_features(panel: BankPanel) -> np.ndarray:
    """Undo standardization of the log features."""
    if panel.norm is None:
        return panel.features.copy()
    out = panel.features.copy()
    out[..., :N_LOG_FEATURES] = out[..., :N_LOG_FEATURES] * panel.norm.std + panel.norm.mean
    return out


PANEL_CSV_COLUMNS = ("bank_id", "quarter", *FEATURE_NAMES,
                     "total_deposits", "deposits_small_accounts", "frac_small_accounts",
                     "n_accounts")


def write_panel_csv(panel: BankPanel, path) -> None:
    """Dump the unmasked cells of a panel, one row per (bank, quarter)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PANEL_CSV_COLUMNS)
        for b, bank in enumerate(panel.banks):
            for t, q in enumerate(panel.quarters):
                if not panel.mask[b, t]:
                    continue
                w.writerow([bank, str(q), *(repr(float(v)) for v in panel.features[b, t]),
                            *(repr(float(v)) for v in panel.metrics[b, t]),
                            int(panel.n_accounts[b, t])])
