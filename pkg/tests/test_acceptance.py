"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``python3 -m pytest tests/test_acceptance.py -v``; the summary
block at the end lists every criterion's outcome and measured numbers.
"""
import csv
import math
import time

import numpy as np
import pytest
from scipy.stats import spearmanr

from depsplit import benchmark as bm
from depsplit import dgm, synth
from depsplit import lognormal as ln
from depsplit import timeseries as ts
from depsplit.cli import run
from depsplit.core import BankPanel, MixtureParams, Quarter
from depsplit.dgm import ESTIMATE_COLUMNS, INDUSTRY_COLUMNS
from depsplit.ingest import PANEL_CSV_COLUMNS, insurance_limits
from tests.conftest import ACCEPTANCE_LINES


def report(n, name, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {n}. {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


# ---------------------------------------------------------------- 1

def test_1_lognormal_oracles():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    n = 10**6
    worst = 0.0
    for _ in range(50):
        mu, sigma = rng.uniform(0.0, 5.0), rng.uniform(0.3, 3.0)
        limit = rng.choice([100.0, 250.0])
        s = ln.sample(mu, sigma, rng.standard_normal(n))
        m = ln.mean(mu, sigma)
        se_m = math.sqrt(ln.variance(mu, sigma) / n)
        f = float(ln.cdf(mu, sigma, limit))
        se_f = math.sqrt(max(f * (1 - f), 1e-300) / n)
        pm = ln.partial_mean_below(mu, sigma, limit)
        se_pm = math.sqrt(max(ln.partial_second_moment_below(mu, sigma, limit) - pm * pm, 1e-300) / n)
        below = s < limit
        z = (abs(s.mean() - m) / se_m, abs(below.mean() - f) / se_f,
             abs(np.where(below, s, 0.0).mean() - pm) / se_pm)
        worst = max(worst, *z)
    dt = time.perf_counter() - t0
    report(1, "lognormal oracles", worst < 3 and dt < 10,
           f"50 pairs x 1e6 samples, worst |z| = {worst:.2f} (< 3), {dt:.1f}s (< 10s)")


# ---------------------------------------------------------------- 2

def test_2_gradient_check():
    t0 = time.perf_counter()
    spec = synth.SynthSpec(n_banks=5, start=Quarter(2009, 4), end=Quarter(2010, 1), seed=1,
                           macro=False)
    panel = synth.generate_panel(spec).panel
    # a short fit moves the loss from O(1e3) at init to O(0.1), where central
    # differences at h=1e-5 are not swamped by roundoff (eps * L / h)
    cfg = dgm.DgmConfig(steps=100)
    fr = dgm.fit(panel, cfg)
    nets, prior = fr.nets, fr.prior
    h = 1e-5
    # smoothness precondition: no hidden pre-activation within reach of a +-h step
    x = panel.features[panel.mask]
    reach = h * (np.abs(x).max() + 1)
    margin = min(np.abs(x @ getattr(nets, r).w1 + getattr(nets, r).b1).min() for r in dgm.Nets.ROLES)
    loss0, g = dgm.loss_and_grads(nets, panel, cfg, prior)
    analytic = np.concatenate([np.concatenate([getattr(getattr(g, r), k).ravel()
                                               for k in ("w1", "b1", "w2", "b2")])
                               for r in dgm.Nets.ROLES])
    flat = nets.flat()
    worst = 0.0
    for k in range(flat.size):
        e = np.zeros_like(flat)
        e[k] = h
        up = dgm.loss_and_grads(nets.with_flat(flat + e), panel, cfg, prior)[0].value
        dn = dgm.loss_and_grads(nets.with_flat(flat - e), panel, cfg, prior)[0].value
        fd = (up - dn) / (2 * h)
        denom = max(abs(fd), abs(analytic[k]), 1e-8)
        worst = max(worst, abs(fd - analytic[k]) / denom)
    dt = time.perf_counter() - t0
    report(2, "gradient check", worst < 1e-4 and margin > reach and dt < 30,
           f"{flat.size} parameters over 3 nets at loss {loss0.value:.3f}, worst relative error "
           f"{worst:.2e} (< 1e-4), kink margin {margin:.1e} > {reach:.1e}, {dt:.1f}s (< 30s)")


# ---------------------------------------------------------------- 3

def _moment_cov(mu, sigma, limit):
    """Covariance of one draw's (s, s * 1{s < limit})."""
    m, pm = ln.mean(mu, sigma), ln.partial_mean_below(mu, sigma, limit)
    e_ss = ln.variance(mu, sigma) + m * m
    e_bb = ln.partial_second_moment_below(mu, sigma, limit)
    return np.array([[e_ss - m * m, e_bb - m * pm], [e_bb - m * pm, e_bb - pm * pm]])


def test_3_metric_mode_equivalence():
    rng = np.random.default_rng(77)
    n_s = 10000
    worst = 0.0
    for trial in range(100):
        q = Quarter(2009, 4) if trial % 2 else Quarter(2010, 1)
        limit = float(insurance_limits([q])[0])
        draw = lambda: MixtureParams(*(np.full((1, 1), v) for v in (
            rng.uniform(0.05, 0.98), rng.uniform(1, 2), rng.uniform(1, 1.8),
            rng.uniform(3.5, 4.5), rng.uniform(2, 3))))
        params, observed = draw(), draw()
        n_acc = np.full((1, 1), float(rng.integers(2000, 100000)))
        sim = dgm.simulate_metrics(observed, n_acc, limit, dgm.DgmConfig())
        metrics = np.stack([sim.v_total, sim.v_small_deposits, sim.v_frac_small], -1)
        panel = BankPanel(["b"], [q], np.zeros((1, 1, 6)), metrics, n_acc, np.ones((1, 1), bool))
        a = dgm.loss(panel, params, dgm.DgmConfig(lam=0.0)).value
        mc = dgm.loss(panel, params, dgm.DgmConfig(lam=0.0, metric_mode="monte_carlo",
                                                   n_samples=n_s, seed=trial)).value
        # residuals r1, r2 are linear in the four sample means; r3 is exact
        p = params.p[0, 0]
        dep = metrics[0, 0, 0]
        k = n_acc[0, 0] / dep
        cov = np.zeros((4, 4))
        cov[:2, :2] = p * p * _moment_cov(params.mu_ret[0, 0], params.sigma_ret[0, 0], limit) / n_s
        cov[2:, 2:] = (1 - p) ** 2 * _moment_cov(params.mu_ws[0, 0], params.sigma_ws[0, 0], limit) / n_s
        # r1 = x1/dep - k (p m_r + (1-p) m_w), r2 = x2/dep - k (p pm_r + (1-p) pm_w)
        J = -k * np.array([[1, 0, 1, 0], [0, 1, 0, 1]], dtype=float)
        rcov = J @ cov @ J.T
        sim_a = dgm.simulate_metrics(params, n_acc, limit, dgm.DgmConfig())
        r = np.array([(metrics[0, 0, 0] - sim_a.v_total[0, 0]) / dep,
                      (metrics[0, 0, 1] - sim_a.v_small_deposits[0, 0]) / dep])
        bias = np.trace(rcov)
        var = 4 * r @ rcov @ r + 2 * np.sum(rcov * rcov)
        worst = max(worst, abs(mc - a - bias) / math.sqrt(var))
    report(3, "metric-mode equivalence", worst < 3,
           f"100 settings at n_samples=10000, worst |MC - analytic - bias| = {worst:.2f} SE (< 3)")


# ---------------------------------------------------------------- 4

def test_4_synthetic_recovery():
    t0 = time.perf_counter()
    result = synth.generate_panel(synth.SynthSpec())
    panel, truth = result.panel, result.truth
    cfg = dgm.DgmConfig()
    fit = dgm.fit(panel, cfg)
    est = dgm.infer_retail(fit.nets, panel, cfg)
    got = dgm.aggregate_industry(est).retail_fraction
    want = truth.industry_retail_fraction(panel.mask)
    err = float(np.max(np.abs(got - want)))
    m = panel.mask
    per_bank_est = np.array([est.retail_fraction[b, m[b]].mean() for b in range(len(m))])
    per_bank_p = np.array([truth.p[b, m[b]].mean() for b in range(len(m))])
    rho = spearmanr(per_bank_est, per_bank_p).statistic
    dt = time.perf_counter() - t0
    ok = err <= 0.05 and rho >= 0.8 and dt < 600
    report(4, "synthetic recovery", ok,
           f"{panel.shape[0]}x{panel.shape[1]} panel, industry retail fraction max error "
           f"{100 * err:.2f}pp (<= 5pp), per-bank Spearman vs planted p {rho:.3f} (>= 0.8), "
           f"{dt:.0f}s (< 600s)")


# ---------------------------------------------------------------- 5

def test_5_single_distribution_separation():
    fits = {}
    for name, p in (("retail", 1.0), ("wholesale", 0.0)):
        spec = synth.SynthSpec(n_banks=40, p_range=(p, p), p_high_share=0.0, macro=False, seed=5)
        panel = synth.generate_panel(spec).panel
        single = dgm.fit_single(panel, dgm.DgmConfig())
        fits[name] = np.array([mu for mu, _ in single.per_bank().values()])
    ret, ws = fits["retail"], fits["wholesale"]
    ok = np.median(ws) > np.median(ret) and ws.min() > ret.max()
    report(5, "single-distribution separation", ok,
           f"retail mu median {np.median(ret):.2f} (max {ret.max():.2f}), wholesale mu median "
           f"{np.median(ws):.2f} (min {ws.min():.2f})")


# ---------------------------------------------------------------- 6

def test_6_benchmark():
    branches = synth.generate_panel(synth.SynthSpec(seed=6)).branches
    res = bm.threshold_split(branches, bm.DEFAULT_THRESHOLD)
    conserved = all(
        s.retail + s.wholesale == math.fsum(b.deposits for b in branches if b.year == y)
        for y, s in res.industry.items())
    brute = {}
    for b in branches:
        r, w = brute.get((b.bank_id, b.year), (0.0, 0.0))
        if b.deposits < 500_000:
            r += b.deposits
        else:
            w += b.deposits
        brute[(b.bank_id, b.year)] = (r, w)
    matches = all(brute[k] == pytest.approx((s.retail, s.wholesale), rel=1e-15, abs=0)
                  for k, s in res.per_bank.items()) and brute.keys() == res.per_bank.keys()
    n_ws = sum(b.deposits >= 500_000 for b in branches)
    report(6, "benchmark", conserved and matches,
           f"{len(branches)} branches ({n_ws} at or over threshold), exact conservation "
           f"{conserved}, brute-force match {matches}")


# ---------------------------------------------------------------- 7

def _scenario_design(spec):
    sc = synth.generate_macro_scenario(spec)
    x = ts.qq_diff(sc.series.matrix())
    y = ts.qq_diff(np.stack([sc.retail, sc.wholesale], axis=1))
    return sc, ts.build_design(x, y)


def test_7_time_series():
    errs = []
    for seed, impacts in ((0, synth.DEFAULT_IMPACTS), (1, ((0.3, -0.4, 0.9), (-0.7, 0.2, 0.1)))):
        spec = synth.SynthSpec(start=Quarter(2003, 1), end=Quarter(2020, 4), seed=seed,
                               impacts=impacts)
        sc, d = _scenario_design(spec)
        m = ts.fit_ols(d.X, d.Y, n_features=3)
        errs.append(float(np.max(np.abs(m.weights - sc.weights))))
    noiseless = max(errs) < 1e-6

    spec = synth.SynthSpec(start=Quarter(2003, 1), end=Quarter(2020, 4), seed=3, macro_noise=0.002)
    sc, d = _scenario_design(spec)
    table = ts.impact_table(ts.fit_ols(d.X, d.Y, n_features=3))
    (r_res, r_loan, r_rl), (w_res, w_loan, w_rl) = table[0], table[1]
    # planted: reserves 0.0 / 0.6, loans 0.5 / 0.5 (retail / wholesale)
    pattern = (w_res > 0 and w_res > r_res + 0.3 and abs(r_res) < 0.15
               and r_loan > 0 and w_loan > 0 and abs(r_loan - w_loan) < 0.15)
    report(7, "time series", noiseless and pattern,
           f"noiseless max weight error {max(errs):.1e} (< 1e-6); noisy impacts reserves "
           f"{r_res:.2f}/{w_res:.2f}, loans {r_loan:.2f}/{w_loan:.2f}, retail loans "
           f"{r_rl:.2f}/{w_rl:.2f} (retail/wholesale)")


# ---------------------------------------------------------------- 8

def test_8_reproducibility(tmp_path):
    data = tmp_path / "d"
    assert run(["synth", "--out", str(data)]) == 0
    digests = {}
    for mode, extra in (("analytic", ["--steps", "200"]),
                        ("monte_carlo", ["--steps", "20", "--samples", "1000", "--trials", "3"])):
        for threads in ("1", "4", "1"):
            tag = f"{mode}-{threads}-{len(digests)}"
            ck, est = tmp_path / f"{tag}.ckpt", tmp_path / f"{tag}.csv"
            common = ["--seed", "13", "--threads", threads, "--metric-mode", mode]
            assert run(["fit", "--panel", str(data), "--ckpt", str(ck), *common, *extra]) == 0
            assert run(["infer", "--panel", str(data), "--ckpt", str(ck), "--out", str(est),
                        *common]) == 0
            digests.setdefault(mode, set()).add((ck.read_bytes(), est.read_bytes()))
    ok = all(len(v) == 1 for v in digests.values())
    report(8, "reproducibility", ok,
           "fit + infer with --seed 13 at --threads 1, 4, 1 in analytic and monte_carlo modes: "
           + ("bit-identical checkpoints and estimate CSVs" if ok else "outputs differ"))


# ---------------------------------------------------------------- 9

def _header(path):
    with open(path) as fh:
        return tuple(next(csv.reader(fh)))


def test_9_pipeline(tmp_path):
    t0 = time.perf_counter()
    spec = tmp_path / "spec.cfg"
    spec.write_text("n_banks = 200\nstart = 2005Q1\nend = 2014Q4\nmacro_history = 4\n")
    d = tmp_path / "data"
    out = tmp_path / "out"
    out.mkdir()
    steps = [
        ["synth", "--spec", str(spec), "--out", str(d)],
        ["ingest", "--panel", str(d), "--out", str(out / "panel.csv")],
        ["fit", "--panel", str(d), "--ckpt", str(out / "model.ckpt")],
        ["infer", "--panel", str(d), "--ckpt", str(out / "model.ckpt"), "--out",
         str(out / "estimates.csv"), "--industry", str(out / "industry.csv")],
        ["forecast", "--industry", str(out / "industry.csv"), "--macro", str(d / "macro.csv"),
         "--out", str(out / "forecast.csv")],
        ["impacts", "--industry", str(out / "industry.csv"), "--macro", str(d / "macro.csv"),
         "--out", str(out / "impacts.csv")],
        ["benchmark", "--branches", str(d / "branches.csv"), "--out", str(out / "benchmark.csv")],
        ["report", "--industry", str(out / "industry.csv"), "--macro", str(d / "macro.csv"),
         "--branches", str(d / "branches.csv"), "--out", str(out / "report")],
    ]
    codes = [run(argv) for argv in steps]
    dt = time.perf_counter() - t0
    expected = {
        out / "panel.csv": PANEL_CSV_COLUMNS,
        out / "estimates.csv": ESTIMATE_COLUMNS,
        out / "industry.csv": INDUSTRY_COLUMNS,
        out / "forecast.csv": ts.FORECAST_COLUMNS,
        out / "impacts.csv": ts.IMPACT_COLUMNS,
        out / "benchmark.csv": bm.BENCHMARK_COLUMNS,
        out / "report" / "industry.csv": INDUSTRY_COLUMNS,
        out / "report" / "benchmark_overlay.csv": ("year", "benchmark_retail_fraction",
                                                   "model_retail_fraction"),
        out / "report" / "forecast.csv": ts.FORECAST_COLUMNS,
        out / "report" / "impacts.csv": ts.IMPACT_COLUMNS,
        out / "report" / "divergence.csv": ts.DIVERGENCE_COLUMNS,
    }
    bad = [p.name for p, cols in expected.items() if not p.exists() or _header(p) != tuple(cols)]
    ok = all(c == 0 for c in codes) and not bad and dt < 900
    report(9, "pipeline end-to-end", ok,
           f"200 banks x 40 quarters, exit codes {codes}, {len(expected)} CSVs "
           f"{'with valid headers' if not bad else 'bad: ' + ', '.join(bad)}, {dt:.0f}s (< 900s)")
