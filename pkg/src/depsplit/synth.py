"""Synthetic SDI-shaped panels with planted mixture parameters.

Every bank-quarter draws its individual account balances from the planted
retail/wholesale lognormals, so the reported metrics are exact sums over
simulated accounts. Optional macro dynamics drive industry retail and
wholesale deposits through a planted lag regression; each bank's retail and
wholesale account counts are scaled with those industry levels.

The non-metric features are noisy monotone functions of planted ``p`` and
bank size: deposits per office rises with the wholesale share, and the
retail-loan share rises with ``p``.
"""
from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import lognormal as ln
from .benchmark import BranchRecord, write_branch_csv
from .core import BankPanel, BankRecord, ParseError, Quarter, quarter_range, read_kv_file
from .ingest import SDI_COLUMNS, build_panel, filter_banks, insurance_limit
from .timeseries import MACRO_NAMES, TARGET_NAMES, MacroSeries, write_macro_csv

DEFAULT_IMPACTS = (
    # reserves, total_loans, retail_loans
    (0.0, 0.5, -0.2),      # retail
    (0.6, 0.5, -0.2),      # wholesale
)
DEFAULT_LAG_PROFILE = (0.4, 0.3, 0.2, 0.1)


@dataclass
class SynthSpec:
    n_banks: int = 200
    start: Quarter = Quarter(2009, 1)
    end: Quarter = Quarter(2010, 4)
    seed: int = 0
    p_range: tuple = (0.05, 0.98)
    p_high_share: float = 0.5          # share of banks drawn from the top tenth of p_range
    p_drift: float = 0.0               # logit shift of p from first to last quarter
    mu_ret_range: tuple = (1.0, 2.0)
    sigma_ret_range: tuple = (1.0, 1.8)
    mu_ws_range: tuple = (3.5, 4.5)
    sigma_ws_range: tuple = (2.0, 3.0)
    log_accounts_mean: float = 9.1
    log_accounts_sd: float = 0.8
    accounts_range: tuple = (2000, 200000)
    fixed: dict = field(default_factory=dict)   # planted values held constant for every bank
    n_accounts: int | None = None               # fixed account count for every bank-quarter
    macro: bool = True
    impacts: tuple = DEFAULT_IMPACTS
    lag_profile: tuple = DEFAULT_LAG_PROFILE
    macro_noise: float = 0.0           # target-diff noise sd, as a fraction of initial deposits
    macro_history: int = 0             # extra macro quarters generated before ``start``
    apply_filter: bool = True          # drop banks below the ingest size thresholds

    def __post_init__(self):
        for key, v in self.fixed.items():
            if key.startswith("sigma") and not v > 0:
                raise ValueError(f"planted {key} must be positive")
            if key == "p" and not 0 <= v <= 1:
                raise ValueError("planted p must lie in [0, 1]")
        if self.sigma_ret_range[0] <= 0 or self.sigma_ws_range[0] <= 0:
            raise ValueError("planted sigma ranges must be positive")
        if not 0 <= self.p_range[0] <= self.p_range[1] <= 1:
            raise ValueError("p_range must lie in [0, 1]")

    @property
    def quarters(self) -> list[Quarter]:
        return quarter_range(self.start, self.end)

    @property
    def weights(self) -> np.ndarray:
        """Planted lag weights ``[target, feature, lag]``."""
        prof = np.asarray(self.lag_profile, dtype=float)
        prof = prof / prof.sum()
        return np.asarray(self.impacts, dtype=float)[:, :, None] * prof[None, None, :]


@dataclass
class SynthTruth:
    banks: list[str]
    quarters: list[Quarter]
    p: np.ndarray                 # planted account share, [n_b, n_t]
    mu_ret: np.ndarray
    sigma_ret: np.ndarray
    mu_ws: np.ndarray
    sigma_ws: np.ndarray
    n_retail_accounts: np.ndarray
    n_wholesale_accounts: np.ndarray
    retail_deposits: np.ndarray   # realized sums of simulated balances
    wholesale_deposits: np.ndarray

    @property
    def retail_fraction(self) -> np.ndarray:
        tot = self.retail_deposits + self.wholesale_deposits
        return np.divide(self.retail_deposits, tot, out=np.zeros_like(tot), where=tot > 0)

    def industry_retail_fraction(self, mask=None) -> np.ndarray:
        r, w = self.retail_deposits, self.wholesale_deposits
        if mask is not None:
            r, w = np.where(mask, r, 0.0), np.where(mask, w, 0.0)
        return r.sum(axis=0) / (r.sum(axis=0) + w.sum(axis=0))


@dataclass
class MacroScenario:
    series: MacroSeries
    retail: np.ndarray            # industry deposit levels
    wholesale: np.ndarray
    weights: np.ndarray           # planted [target, feature, lag]


@dataclass
class SynthResult:
    spec: SynthSpec
    records: dict                 # Quarter -> list[BankRecord], filtered unless disabled
    panel: BankPanel
    truth: SynthTruth
    branches: list[BranchRecord]
    macro: MacroScenario | None


def _bank_rng(seed, b, tag):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, tag, b])))


def _planted_constants(spec: SynthSpec):
    n = spec.n_banks
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, 1]))
    lo, hi = spec.p_range
    p = rng.uniform(lo, hi, n)
    high = rng.uniform(size=n) < spec.p_high_share
    p[high] = rng.uniform(hi - 0.1 * (hi - lo), hi, high.sum())
    out = {
        "p": p,
        "mu_ret": rng.uniform(*spec.mu_ret_range, n),
        "sigma_ret": rng.uniform(*spec.sigma_ret_range, n),
        "mu_ws": rng.uniform(*spec.mu_ws_range, n),
        "sigma_ws": rng.uniform(*spec.sigma_ws_range, n),
    }
    log_acc = rng.normal(spec.log_accounts_mean, spec.log_accounts_sd, n)
    out["n_accounts"] = np.clip(np.round(np.exp(log_acc)), *spec.accounts_range)
    for key, v in spec.fixed.items():
        out[key] = np.full(n, float(v))
    if spec.n_accounts is not None:
        out["n_accounts"] = np.full(n, float(spec.n_accounts))
    out["office_noise"] = rng.normal(0.0, 0.3, n)
    out["loan_noise"] = rng.normal(0.0, 0.08, n)
    return out


def _logit(p):
    p = np.clip(p, 1e-12, 1 - 1e-12)
    return np.log(p / (1 - p))


def generate_macro_scenario(spec: SynthSpec, base_retail: float = 1.0e8,
                            base_wholesale: float = 1.0e8) -> MacroScenario:
    """Macro levels plus industry deposits that respond to lagged macro diffs.

    Target diffs follow ``sum_lag W[target, feature, lag] * x_diff[t - 1 - lag]``
    (the default, completed-quarter alignment) plus optional noise. Quarters
    without a full lag window get noise only.
    """
    quarters = quarter_range(spec.start.shift(-spec.macro_history), spec.end)
    T = len(quarters)
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, 2]))
    scale = base_retail + base_wholesale
    # reserves: calm growth with occasional large injections
    res_d = scale * (rng.normal(0.004, 0.01, T) + (rng.uniform(size=T) < 0.15) * rng.uniform(0.02, 0.06, T))
    loan_d = scale * rng.normal(0.008, 0.012, T)
    rl_d = 0.5 * loan_d + scale * rng.normal(0.002, 0.006, T)
    x_d = np.stack([res_d, loan_d, rl_d], axis=1)
    x_d[0] = 0.0
    levels0 = np.array([0.1, 0.7, 0.3]) * scale
    x_lv = levels0 + np.cumsum(x_d, axis=0)

    W = spec.weights
    n_lags = W.shape[2]
    y_d = np.zeros((T, 2))
    for t in range(1, T):
        if t - n_lags >= 1:
            lagged = x_d[t - 1 - np.arange(n_lags)]            # [lag, feature]
            y_d[t] = np.einsum("tfl,lf->t", W, lagged)
    if spec.macro_noise > 0:
        y_d[1:] += rng.normal(0.0, spec.macro_noise * scale, (T - 1, 2))
    y_lv = np.array([base_retail, base_wholesale]) + np.cumsum(y_d, axis=0)
    series = MacroSeries(quarters, x_lv[:, 0], x_lv[:, 1], x_lv[:, 2])
    return MacroScenario(series, y_lv[:, 0], y_lv[:, 1], W)


def generate_panel(spec: SynthSpec) -> SynthResult:
    """Simulate every account of every bank-quarter and assemble the panel."""
    quarters = spec.quarters
    n_b, n_t = spec.n_banks, len(quarters)
    const = _planted_constants(spec)
    banks = [f"B{b:04d}" for b in range(n_b)]

    n0 = const["n_accounts"]
    p0 = const["p"]
    ramp = np.linspace(0.0, 1.0, n_t) if n_t > 1 else np.zeros(1)
    p = 1.0 / (1.0 + np.exp(-(_logit(p0)[:, None] + spec.p_drift * ramp[None, :])))
    if "p" in spec.fixed and spec.p_drift == 0:
        p = np.broadcast_to(p0[:, None], (n_b, n_t)).copy()
    n_ret = np.round(n0[:, None] * p)
    n_ws = n0[:, None] - n_ret

    macro = None
    if spec.macro:
        m_r = ln.mean(const["mu_ret"], const["sigma_ret"])
        m_w = ln.mean(const["mu_ws"], const["sigma_ws"])
        base_r = float(np.sum(n_ret[:, 0] * m_r))
        base_w = float(np.sum(n_ws[:, 0] * m_w))
        macro = generate_macro_scenario(spec, base_r, base_w)
        k = spec.macro_history
        ratio_r = np.maximum(macro.retail[k:] / macro.retail[k], 0.1)
        ratio_w = np.maximum(macro.wholesale[k:] / macro.wholesale[k], 0.1)
        n_ret = np.round(n_ret * ratio_r[None, :])
        n_ws = np.round(n_ws * ratio_w[None, :])

    shape = (n_b, n_t)
    truth = SynthTruth(
        banks, list(quarters),
        p=np.divide(n_ret, n_ret + n_ws),
        mu_ret=np.broadcast_to(const["mu_ret"][:, None], shape).copy(),
        sigma_ret=np.broadcast_to(const["sigma_ret"][:, None], shape).copy(),
        mu_ws=np.broadcast_to(const["mu_ws"][:, None], shape).copy(),
        sigma_ws=np.broadcast_to(const["sigma_ws"][:, None], shape).copy(),
        n_retail_accounts=n_ret, n_wholesale_accounts=n_ws,
        retail_deposits=np.zeros(shape), wholesale_deposits=np.zeros(shape),
    )
    records = {q: [] for q in quarters}
    offices = np.zeros(shape, dtype=int)
    for b in range(n_b):
        rng = _bank_rng(spec.seed, b, 3)
        for t, q in enumerate(quarters):
            limit = insurance_limit(q)
            sr = ln.sample(const["mu_ret"][b], const["sigma_ret"][b],
                           rng.standard_normal(int(n_ret[b, t])))
            sw = ln.sample(const["mu_ws"][b], const["sigma_ws"][b],
                           rng.standard_normal(int(n_ws[b, t])))
            bal = np.concatenate([sr, sw])
            dep = float(bal.sum())
            small = bal[bal < limit]
            truth.retail_deposits[b, t] = float(sr.sum())
            truth.wholesale_deposits[b, t] = float(sw.sum())

            share_ws = 1.0 - truth.p[b, t]
            log_dpo = (10.0 + 3.0 * share_ws + 0.3 * (np.log(max(dep, 1.0)) - 12.0)
                       + const["office_noise"][b] + rng.normal(0.0, 0.05))
            n_off = max(1, int(round(dep / np.exp(log_dpo))))
            offices[b, t] = n_off
            frac_rl = float(np.clip(0.1 + 0.5 * truth.p[b, t] + const["loan_noise"][b]
                                    + rng.normal(0.0, 0.02), 0.0, 1.0))
            total_loans = dep * rng.uniform(0.6, 0.9)
            rl = frac_rl * total_loans
            records[q].append(BankRecord(
                bank_id=banks[b], quarter=q, domestic_deposits=dep, n_offices=n_off,
                n_accounts=len(bal), n_small_accounts=len(small),
                deposits_small_accounts=min(float(small.sum()), dep),
                retail_loans=rl, total_loans=total_loans,
            ).validate())

    if spec.apply_filter:
        records = {q: filter_banks(rs) for q, rs in records.items()}
    panel, _ = build_panel(records)
    branches = _branches(spec, banks, quarters, truth, offices)
    return SynthResult(spec, records, panel, truth, branches, macro)


def _branches(spec, banks, quarters, truth: SynthTruth, offices) -> list[BranchRecord]:
    """Annual branch deposits from each year's last quarter.

    The head office holds all wholesale deposits plus a retail share; retail
    deposits are spread over branches with Dirichlet weights. Amounts are
    whole thousands.
    """
    out = []
    last_t = {}
    for t, q in enumerate(quarters):
        last_t[q.year] = t
    for b, bank in enumerate(banks):
        rng = _bank_rng(spec.seed, b, 4)
        for year, t in sorted(last_t.items()):
            k = int(offices[b, t])
            retail = rng.dirichlet(np.ones(k)) * truth.retail_deposits[b, t]
            amounts = np.floor(retail)
            amounts[0] += np.floor(truth.wholesale_deposits[b, t])
            for i, a in enumerate(amounts):
                out.append(BranchRecord(bank, year, f"{bank}-{i:03d}", float(a)))
    return out


# ------------------------------------------------------------------ files

def _coerce(value: str, default):
    if isinstance(default, bool):
        return value.lower() in ("1", "true", "yes", "on")
    if isinstance(default, Quarter):
        return Quarter.parse(value)
    if isinstance(default, tuple):
        parts = [x.strip() for x in value.replace(";", ",").split(",") if x.strip()]
        if default and isinstance(default[0], tuple):
            raise ParseError("nested tuples are not supported in spec files")
        return tuple(float(x) for x in parts)
    if isinstance(default, int) and not isinstance(default, bool):
        return int(value)
    if isinstance(default, float):
        return float(value)
    return value


def parse_spec_file(path) -> SynthSpec:
    """Build a :class:`SynthSpec` from ``key = value`` lines.

    Tuples are comma separated. ``fixed.<name> = value`` plants a constant,
    ``impact.<target>.<feature> = value`` sets one planted impact.
    """
    kv = read_kv_file(path)
    base = SynthSpec()
    kwargs = {}
    fixed = {}
    impacts = [list(r) for r in base.impacts]
    names = {f.name: f for f in dataclasses.fields(SynthSpec)}
    for key, value in kv.items():
        if key.startswith("fixed."):
            fixed[key[6:]] = float(value)
        elif key.startswith("impact."):
            _, target, feature = key.split(".")
            impacts[TARGET_NAMES.index(target)][MACRO_NAMES.index(feature)] = float(value)
        elif key == "n_accounts":
            kwargs[key] = int(value) if value.lower() != "none" else None
        elif key in names and key not in ("fixed", "impacts"):
            kwargs[key] = _coerce(value, getattr(base, key))
        else:
            raise ParseError(f"{path}: unknown spec key {key!r}")
    return SynthSpec(**kwargs, fixed=fixed, impacts=tuple(tuple(r) for r in impacts))


TRUTH_COLUMNS = ("bank_id", "quarter", "p", "mu_ret", "sigma_ret", "mu_ws", "sigma_ws",
                 "retail_deposits", "wholesale_deposits", "retail_fraction")


def write_sdi_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SDI_COLUMNS)
        for r in records:
            # retail loans are split 10/60/30 over the three component columns
            w.writerow([r.bank_id, repr(r.domestic_deposits), r.n_offices, r.n_accounts,
                        r.n_small_accounts, repr(r.deposits_small_accounts),
                        repr(0.1 * r.retail_loans), repr(0.6 * r.retail_loans),
                        repr(0.3 * r.retail_loans), repr(r.total_loans)])


def write_synth(result: SynthResult, out_dir) -> Path:
    """Write ``sdi/YYYYQ#.csv``, ``branches.csv``, ``truth.csv`` and, with macro
    dynamics, ``macro.csv`` and ``macro_truth.csv``."""
    out = Path(out_dir)
    (out / "sdi").mkdir(parents=True, exist_ok=True)
    for q, recs in result.records.items():
        write_sdi_csv(recs, out / "sdi" / f"{q}.csv")
    write_branch_csv(result.branches, out / "branches.csv")
    t = result.truth
    with open(out / "truth.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRUTH_COLUMNS)
        frac = t.retail_fraction
        for b, bank in enumerate(t.banks):
            for k, q in enumerate(t.quarters):
                w.writerow([bank, str(q), *(repr(float(getattr(t, n)[b, k]))
                                            for n in TRUTH_COLUMNS[2:9]),
                            repr(float(frac[b, k]))])
    if result.macro is not None:
        write_macro_csv(result.macro.series, out / "macro.csv")
        with open(out / "macro_truth.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("target", "feature", *(f"lag{j + 1}" for j in
                                                range(result.macro.weights.shape[2]))))
            for i, target in enumerate(TARGET_NAMES):
                for f, feature in enumerate(MACRO_NAMES):
                    w.writerow([target, feature, *(repr(float(v))
                                                   for v in result.macro.weights[i, f])])
    return out
