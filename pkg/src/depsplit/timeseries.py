"""Lagged, zero-intercept regression of deposit changes on macro changes.

Inputs and targets are quarter-over-quarter level differences. A prediction
for quarter ``t`` uses the last ``n_lags`` macro differences; by default those
are the completed quarters ``t-n_lags .. t-1``, and with ``include_current``
the window shifts to ``t-n_lags+1 .. t`` (the current quarter's diff standing
in for data observed just before quarter end).

Weights are stored as ``[target, feature, lag]`` with lag 0 the most recent.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .core import DepsplitError, Quarter, ValidationError

MACRO_NAMES = ("reserves", "total_loans", "retail_loans")
TARGET_NAMES = ("retail", "wholesale")


class InsufficientHistoryError(DepsplitError, ValueError):
    pass


class RankDeficiencyError(DepsplitError, np.linalg.LinAlgError):
    def __init__(self, message, dependent_columns):
        super().__init__(message)
        self.dependent_columns = dependent_columns


@dataclass
class MacroSeries:
    quarters: list[Quarter]
    reserves: np.ndarray
    total_loans: np.ndarray
    retail_loans: np.ndarray

    def __post_init__(self):
        for a, b in zip(self.quarters, self.quarters[1:]):
            if b.ordinal != a.ordinal + 1:
                raise ValidationError(f"macro quarters must be contiguous: {a} then {b}")
        for name in MACRO_NAMES:
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
            if len(getattr(self, name)) != len(self.quarters):
                raise ValidationError(f"{name} length does not match quarters")

    def matrix(self) -> np.ndarray:
        return np.stack([self.reserves, self.total_loans, self.retail_loans], axis=1)

    def window(self, quarters) -> "MacroSeries":
        idx = {q: i for i, q in enumerate(self.quarters)}
        try:
            sel = [idx[q] for q in quarters]
        except KeyError as exc:
            raise ValidationError(f"macro series has no data for {exc.args[0]}") from None
        return MacroSeries(list(quarters), self.reserves[sel], self.total_loans[sel],
                           self.retail_loans[sel])


@dataclass
class LagRegression:
    weights: np.ndarray           # [n_targets, n_features, n_lags]

    @property
    def n_targets(self) -> int:
        return self.weights.shape[0]

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]

    @property
    def n_lags(self) -> int:
        return self.weights.shape[2]

    @property
    def coef(self) -> np.ndarray:
        """Weights as a ``[n_features * n_lags, n_targets]`` design-column matrix."""
        return self.weights.reshape(self.n_targets, -1).T


@dataclass
class Design:
    X: np.ndarray
    Y: np.ndarray | None
    rows: list           # target index (or Quarter) of each row


def qq_diff(levels) -> np.ndarray:
    levels = np.asarray(levels, dtype=float)
    if len(levels) < 2:
        raise ValueError("need at least two levels to difference")
    return np.diff(levels, axis=0)


def yy_diff(levels) -> np.ndarray:
    levels = np.asarray(levels, dtype=float)
    return levels[4:] - levels[:-4]


def _lag_offsets(n_lags, include_current):
    # offsets back from the target index, most recent first
    return np.arange(0, n_lags) if include_current else np.arange(1, n_lags + 1)


def build_design(x_diffs, y_diffs=None, n_lags: int = 4, include_current: bool = False,
                 labels=None) -> Design:
    """Stack lagged macro diffs into a design matrix (no intercept column).

    ``x_diffs`` is ``[T, n_features]`` and ``y_diffs`` ``[T, n_targets]`` on the
    same time axis. ``labels`` (e.g. the quarter of each diff) name the rows.
    Columns are ordered feature-major, most recent lag first.
    """
    x = np.asarray(x_diffs, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    T = len(x)
    offsets = _lag_offsets(n_lags, include_current)
    first = int(offsets.max())
    labels = list(labels) if labels is not None else list(range(T))
    if T <= first:
        usable = labels[first] if first < len(labels) else f"index {first}"
        raise InsufficientHistoryError(
            f"need more than {first} diffs for {n_lags} lags; first usable row is {usable}")
    targets = np.arange(first, T)
    X = x[targets[:, None] - offsets[None, :]]          # [rows, lags, features]
    X = X.transpose(0, 2, 1).reshape(len(targets), -1)
    Y = None
    if y_diffs is not None:
        y = np.asarray(y_diffs, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
        if len(y) != T:
            raise ValidationError("input and target diffs are not aligned")
        Y = y[targets]
    return Design(X, Y, [labels[k] for k in targets])


def _dependent_columns(X, tol=None):
    dep, basis = [], []
    rank = 0
    for j in range(X.shape[1]):
        trial = basis + [j]
        r = np.linalg.matrix_rank(X[:, trial], tol=tol)
        if r > rank:
            basis, rank = trial, r
        else:
            dep.append(j)
    return dep


def fit_ols(X, Y, n_features: int | None = None) -> LagRegression:
    """Least squares through the origin. ``n_features`` defaults to one lag per column."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if np.linalg.matrix_rank(X) < X.shape[1]:
        dep = _dependent_columns(X)
        raise RankDeficiencyError(f"design matrix is rank deficient; dependent columns {dep}",
                                  dep)
    coef, *_ = np.linalg.lstsq(X, Y, rcond=None)
    n_features = n_features or X.shape[1]
    n_lags = X.shape[1] // n_features
    return LagRegression(coef.T.reshape(Y.shape[1], n_features, n_lags))


def predict(model: LagRegression, lags) -> np.ndarray:
    """One-step prediction from ``[n_lags, n_features]`` diffs in time order (oldest first)."""
    lags = np.asarray(lags, dtype=float)
    if lags.ndim == 1:
        lags = lags[:, None]
    if lags.shape[0] != model.n_lags:
        raise ValueError(f"expected {model.n_lags} lags, got {lags.shape[0]}")
    recent_first = lags[::-1]                           # [lag, feature]
    return np.einsum("tfl,lf->t", model.weights, recent_first)


def predict_design(model: LagRegression, X) -> np.ndarray:
    return np.asarray(X, dtype=float) @ model.coef


def impact_table(model: LagRegression) -> np.ndarray:
    """Summed lag weights per (target, feature), plus a total row."""
    per_target = model.weights.sum(axis=2)
    return np.vstack([per_target, per_target.sum(axis=0)])


def divergence_periods(quarters, retail, wholesale) -> list[tuple[Quarter, Quarter]]:
    """Runs of quarters where wholesale y/y growth beats retail by more than mean + 1 sd."""
    d = yy_diff(wholesale) - yy_diff(retail)
    if len(d) == 0:
        return []
    qs = list(quarters)[4:]
    flagged = d > d.mean() + d.std()
    out, start = [], None
    for i, f in enumerate(flagged):
        if f and start is None:
            start = i
        if not f and start is not None:
            out.append((qs[start], qs[i - 1]))
            start = None
    if start is not None:
        out.append((qs[start], qs[-1]))
    return out


# ----------------------------------------------------------------- forecast

@dataclass
class Forecast:
    model: LagRegression
    quarters: list[Quarter]
    predicted: np.ndarray     # [rows, 2]
    actual: np.ndarray        # [rows, 2]
    split: list[str]

    def rmse(self, which="test") -> np.ndarray:
        sel = np.array([s == which for s in self.split])
        err = self.predicted[sel] - self.actual[sel]
        return np.sqrt((err ** 2).mean(axis=0))


def forecast(macro: MacroSeries, quarters, retail, wholesale, n_lags: int = 4,
             include_current: bool = False, train=None, test=None,
             test_fraction: float = 0.15) -> Forecast:
    """Fit on the training rows and predict every usable row.

    ``train``/``test`` are inclusive ``(first, last)`` quarter windows for the
    predicted quarter. Without them the last ``test_fraction`` of rows is held
    out.
    """
    quarters = list(quarters)
    m = macro.window(quarters)
    x = qq_diff(m.matrix())
    y = qq_diff(np.stack([retail, wholesale], axis=1))
    design = build_design(x, y, n_lags, include_current, labels=quarters[1:])
    rows = design.rows
    if train is None and test is None:
        n_test = max(1, int(round(test_fraction * len(rows))))
        split = ["train"] * (len(rows) - n_test) + ["test"] * n_test
    else:
        def inside(q, win):
            return win is not None and win[0] <= q <= win[1]
        split = ["train" if inside(q, train) else "test" if inside(q, test) else "none"
                 for q in rows]
    tr = np.array([s == "train" for s in split])
    model = fit_ols(design.X[tr], design.Y[tr], n_features=x.shape[1])
    return Forecast(model, rows, predict_design(model, design.X), design.Y, split)


# ---------------------------------------------------------------------- csv

FORECAST_COLUMNS = ("quarter", "retail_diff_pred", "retail_diff_actual",
                    "wholesale_diff_pred", "wholesale_diff_actual", "split")
IMPACT_COLUMNS = ("target", *MACRO_NAMES)
DIVERGENCE_COLUMNS = ("start", "end")
MACRO_COLUMNS = ("quarter", *MACRO_NAMES)


def read_macro_csv(path) -> MacroSeries:
    cols = {c: [] for c in MACRO_COLUMNS}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in MACRO_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ValidationError(f"{path}: missing column {missing[0]!r}")
        for row in reader:
            for c in MACRO_COLUMNS:
                cols[c].append(row[c])
    quarters = [Quarter.parse(q) for q in cols["quarter"]]
    return MacroSeries(quarters, *(np.array(cols[c], dtype=float) for c in MACRO_NAMES))


def write_macro_csv(series: MacroSeries, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(MACRO_COLUMNS)
        for i, q in enumerate(series.quarters):
            w.writerow([str(q), *(repr(float(getattr(series, n)[i])) for n in MACRO_NAMES)])


def write_forecast_csv(fc: Forecast, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(FORECAST_COLUMNS)
        for i, q in enumerate(fc.quarters):
            w.writerow([str(q), repr(float(fc.predicted[i, 0])), repr(float(fc.actual[i, 0])),
                        repr(float(fc.predicted[i, 1])), repr(float(fc.actual[i, 1])),
                        fc.split[i]])


def write_impact_csv(table: np.ndarray, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(IMPACT_COLUMNS)
        for name, row in zip((*TARGET_NAMES, "total"), table):
            w.writerow([name, *(repr(float(v)) for v in row)])


def write_divergence_csv(periods, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(DIVERGENCE_COLUMNS)
        for a, b in periods:
            w.writerow([str(a), str(b)])
