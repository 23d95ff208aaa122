"""Shared domain types.

Money is in thousands of dollars everywhere and every log is a natural log.
Panels are dense ``[bank, quarter]`` arrays with a presence mask; masked cells
hold zeros and never reach a loss term.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import total_ordering
from pathlib import Path

import numpy as np

FEATURE_NAMES = (
    "log_deposits",
    "log_deposits_per_office",
    "log_accounts",
    "frac_small_amount",
    "frac_small_accounts",
    "frac_retail_loans",
)
N_LOG_FEATURES = 3
METRIC_NAMES = ("total_deposits", "deposits_small_accounts", "frac_small_accounts")


class DepsplitError(Exception):
    """Base class for errors raised by this package."""


class DataError(DepsplitError):
    """Input data violates a documented schema or invariant."""


class SchemaError(DataError):
    pass


class ParseError(DataError):
    pass


class ValidationError(DataError):
    pass


class InvalidRangeError(DepsplitError, ValueError):
    pass


class DivergenceError(DepsplitError):
    """Training produced a non-finite value."""

    def __init__(self, message, trace=None, cell=None):
        super().__init__(message)
        self.trace = trace
        self.cell = cell


_QUARTER_RE = re.compile(r"^(\d{4})-?Q([1-4])$", re.IGNORECASE)


@total_ordering
@dataclass(frozen=True)
class Quarter:
    year: int
    q: int

    def __post_init__(self):
        if not 1 <= self.q <= 4:
            raise ValueError(f"quarter must be in 1..4, got {self.q}")

    def __lt__(self, other):
        if not isinstance(other, Quarter):
            return NotImplemented
        return (self.year, self.q) < (other.year, other.q)

    @property
    def ordinal(self) -> int:
        return self.year * 4 + (self.q - 1)

    @classmethod
    def from_ordinal(cls, n: int) -> "Quarter":
        return cls(n // 4, n % 4 + 1)

    def next(self) -> "Quarter":
        return Quarter.from_ordinal(self.ordinal + 1)

    def shift(self, k: int) -> "Quarter":
        return Quarter.from_ordinal(self.ordinal + k)

    @classmethod
    def parse(cls, text: str) -> "Quarter":
        m = _QUARTER_RE.match(text.strip())
        if not m:
            raise ValueError(f"not a quarter label: {text!r} (expected YYYYQ#)")
        return cls(int(m.group(1)), int(m.group(2)))

    def __str__(self):
        return f"{self.year}Q{self.q}"


def quarter_range(start: Quarter, end: Quarter) -> list[Quarter]:
    """Inclusive, contiguous run of quarters from ``start`` to ``end``."""
    if end < start:
        raise InvalidRangeError(f"start {start} is after end {end}")
    return [Quarter.from_ordinal(k) for k in range(start.ordinal, end.ordinal + 1)]


@dataclass(frozen=True)
class BankRecord:
    bank_id: str
    quarter: Quarter
    domestic_deposits: float
    n_offices: int
    n_accounts: int
    n_small_accounts: int
    deposits_small_accounts: float
    retail_loans: float
    total_loans: float

    def validate(self):
        for name in ("domestic_deposits", "n_offices", "n_accounts", "n_small_accounts",
                     "deposits_small_accounts", "retail_loans", "total_loans"):
            if getattr(self, name) < 0:
                raise ValidationError(f"bank {self.bank_id} {self.quarter}: {name} is negative")
        if self.n_small_accounts > self.n_accounts:
            raise ValidationError(
                f"bank {self.bank_id} {self.quarter}: n_small_accounts > n_accounts")
        if self.deposits_small_accounts > self.domestic_deposits:
            raise ValidationError(
                f"bank {self.bank_id} {self.quarter}: deposits_small_accounts > domestic_deposits")
        return self


@dataclass(frozen=True)
class FeatureVector:
    log_deposits: float
    log_deposits_per_office: float
    log_accounts: float
    frac_small_amount: float
    frac_small_accounts: float
    frac_retail_loans: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in FEATURE_NAMES])


@dataclass(frozen=True)
class NormStats:
    """Standardization constants for the log features, frozen at training time."""
    mean: np.ndarray
    std: np.ndarray

    def apply(self, features: np.ndarray) -> np.ndarray:
        out = np.array(features, dtype=float, copy=True)
        out[..., :N_LOG_FEATURES] = (out[..., :N_LOG_FEATURES] - self.mean) / self.std
        return out

    def to_dict(self):
        return {"mean": [float(v) for v in self.mean], "std": [float(v) for v in self.std]}

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["mean"], dtype=float), np.asarray(d["std"], dtype=float))


@dataclass
class BankPanel:
    banks: list[str]
    quarters: list[Quarter]
    features: np.ndarray      # [n_b, n_t, 6]
    metrics: np.ndarray       # [n_b, n_t, 3]
    n_accounts: np.ndarray    # [n_b, n_t]
    mask: np.ndarray          # [n_b, n_t] bool
    norm: NormStats | None = None

    def __post_init__(self):
        n_b, n_t = len(self.banks), len(self.quarters)
        if any(b <= a for a, b in zip(self.quarters, self.quarters[1:])):
            raise ValidationError("panel quarters must be strictly increasing")
        if self.features.shape != (n_b, n_t, len(FEATURE_NAMES)):
            raise ValidationError(f"features shape {self.features.shape} != {(n_b, n_t, 6)}")
        if self.metrics.shape != (n_b, n_t, len(METRIC_NAMES)):
            raise ValidationError(f"metrics shape {self.metrics.shape} != {(n_b, n_t, 3)}")
        self.mask = np.asarray(self.mask, dtype=bool)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.banks), len(self.quarters)

    @property
    def total_deposits(self) -> np.ndarray:
        return self.metrics[..., 0]

    def subset(self, bank_ids) -> "BankPanel":
        wanted = set(bank_ids)
        idx = [i for i, b in enumerate(self.banks) if b in wanted]
        return BankPanel(
            banks=[self.banks[i] for i in idx],
            quarters=list(self.quarters),
            features=self.features[idx],
            metrics=self.metrics[idx],
            n_accounts=self.n_accounts[idx],
            mask=self.mask[idx],
            norm=self.norm,
        )


@dataclass
class MixtureParams:
    p: np.ndarray
    mu_ret: np.ndarray
    sigma_ret: np.ndarray
    mu_ws: np.ndarray
    sigma_ws: np.ndarray


@dataclass
class PriorSchedule:
    mu0_ret: np.ndarray
    sigma0_ret: np.ndarray
    mu0_ws: np.ndarray
    sigma0_ws: np.ndarray
    lam: float = 0.05

    def __post_init__(self):
        for name in ("mu0_ret", "sigma0_ret", "mu0_ws", "sigma0_ws"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if np.any(self.sigma0_ret <= 0) or np.any(self.sigma0_ws <= 0):
            raise ValueError("prior sigmas must be positive")
        if np.any(self.mu0_ws <= self.mu0_ret):
            raise ValueError("wholesale prior mean must lie strictly right of retail")

    @classmethod
    def linear(cls, quarters, endpoints, lam=0.05, window=None) -> "PriorSchedule":
        """Interpolate each ``(start, end)`` endpoint pair across ``window``.

        ``window`` defaults to the span of ``quarters``; quarters outside it are
        clamped to the nearest endpoint value.
        """
        quarters = list(quarters)
        lo, hi = window if window is not None else (quarters[0], quarters[-1])
        span = max(hi.ordinal - lo.ordinal, 1)
        frac = np.array([(q.ordinal - lo.ordinal) / span for q in quarters], dtype=float)
        frac = np.clip(frac, 0.0, 1.0)
        arrays = {k: a + (b - a) * frac for k, (a, b) in endpoints.items()}
        return cls(arrays["mu_ret"], arrays["sigma_ret"], arrays["mu_ws"], arrays["sigma_ws"],
                   lam=lam)


def read_kv_file(path) -> dict[str, str]:
    """Read a flat ``key = value`` text file; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out
