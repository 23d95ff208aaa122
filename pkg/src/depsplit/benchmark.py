"""Branch-size baseline: deposits in branches under $500M count as retail."""
from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass

from .core import ParseError, SchemaError, ValidationError

DEFAULT_THRESHOLD = 500_000.0   # thousands of dollars
BRANCH_COLUMNS = ("bank_id", "year", "branch_id", "deposits")
BENCHMARK_COLUMNS = ("year", "retail", "wholesale", "retail_fraction")


@dataclass(frozen=True)
class BranchRecord:
    bank_id: str
    year: int
    branch_id: str
    deposits: float

    def __post_init__(self):
        if self.deposits < 0:
            raise ValidationError(f"branch {self.branch_id}: negative deposits")


@dataclass
class Split:
    retail: float = 0.0
    wholesale: float = 0.0

    @property
    def total(self):
        return self.retail + self.wholesale

    @property
    def retail_fraction(self):
        return self.retail / self.total if self.total > 0 else 0.0


@dataclass
class BenchmarkResult:
    per_bank: dict      # (bank_id, year) -> Split
    industry: dict      # year -> Split


def threshold_split(branches, threshold: float = DEFAULT_THRESHOLD) -> BenchmarkResult:
    """Classify each branch's deposits by the strict ``deposits < threshold`` rule.

    Sums use ``math.fsum`` so the split does not depend on branch order.
    """
    retail = defaultdict(list)
    wholesale = defaultdict(list)
    keys = set()
    for br in branches:
        key = (br.bank_id, br.year)
        keys.add(key)
        (retail if br.deposits < threshold else wholesale)[key].append(br.deposits)
    per_bank = {k: Split(math.fsum(retail[k]), math.fsum(wholesale[k])) for k in sorted(keys)}
    years = sorted({y for _, y in keys})
    industry = {}
    for y in years:
        r = math.fsum(v for (b, yy), vals in retail.items() if yy == y for v in vals)
        w = math.fsum(v for (b, yy), vals in wholesale.items() if yy == y for v in vals)
        industry[y] = Split(r, w)
    return BenchmarkResult(per_bank, industry)


def large_branch_banks(branches, year: int, threshold: float = DEFAULT_THRESHOLD) -> set[str]:
    """Banks with at least one branch holding more than ``threshold`` in ``year``."""
    return {br.bank_id for br in branches if br.year == year and br.deposits > threshold}


def read_branch_csv(path) -> list[BranchRecord]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for col in BRANCH_COLUMNS:
            if col not in (reader.fieldnames or []):
                raise SchemaError(f"{path}: missing column {col!r}")
        for rownum, row in enumerate(reader, start=2):
            try:
                year = int(row["year"])
                dep = float(row["deposits"])
            except ValueError:
                raise ParseError(f"row {rownum}: non-numeric year or deposits") from None
            try:
                out.append(BranchRecord(row["bank_id"].strip(), year, row["branch_id"].strip(),
                                        dep))
            except ValidationError as exc:
                raise ValidationError(f"row {rownum}: {exc}") from None
    return out


def write_branch_csv(branches, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(BRANCH_COLUMNS)
        for br in branches:
            w.writerow([br.bank_id, br.year, br.branch_id, repr(float(br.deposits))])


def write_benchmark_csv(result: BenchmarkResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(BENCHMARK_COLUMNS)
        for year, s in sorted(result.industry.items()):
            w.writerow([year, repr(s.retail), repr(s.wholesale), repr(s.retail_fraction)])
