"""Two-lognormal generative model of bank account balances.

Three small networks map each bank-quarter's features to the retail account
share ``p`` and the log-scale mean and standard deviation of the retail and
wholesale balance distributions. Training matches simulated bank metrics
(total deposits, deposits in small accounts, share of small accounts) to the
reported ones, with a quadratic pull of the distribution parameters toward a
per-quarter prior schedule.

Deposit-valued residuals are divided by the bank's reported total deposits,
so every residual is an order-one fraction and large banks do not dominate.
"""
from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import lognormal as ln
from .core import BankPanel, DivergenceError, MixtureParams, PriorSchedule, Quarter
from .ingest import insurance_limits
from .mlp import Mlp, MlpGrads, sgd_step

log = logging.getLogger(__name__)

DEFAULT_PRIOR = {
    "mu_ret": (1.2, 1.5),
    "sigma_ret": (1.3, 1.5),
    "mu_ws": (4.5, 5.0),
    "sigma_ws": (3.0, 3.5),
}
METRIC_MODES = ("analytic", "monte_carlo")

# Stream tags for counter-based noise; training steps use their step index.
_INFER_STREAM = 1 << 40


@dataclass
class DgmConfig:
    n_samples: int = 10000
    n_inference_trials: int = 10
    lam: float = 0.05
    prior: dict = field(default_factory=lambda: dict(DEFAULT_PRIOR))
    prior_reduction: str = "mean"
    metric_mode: str = "analytic"
    seed: int = 0
    lr: float = 0.003
    steps: int = 5000
    momentum: float = 0.9
    clip_norm: float = 1.0
    l2: float = 0.0
    threads: int = 1

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")
        if self.n_inference_trials < 1:
            raise ValueError("n_inference_trials must be at least 1")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.metric_mode not in METRIC_MODES:
            raise ValueError(f"metric_mode must be one of {METRIC_MODES}")
        if self.prior_reduction not in ("sum", "mean"):
            raise ValueError("prior_reduction must be 'sum' or 'mean'")
        self.prior = {k: tuple(float(x) for x in v) for k, v in self.prior.items()}

    def to_dict(self):
        d = asdict(self)
        d["prior"] = {k: list(v) for k, v in self.prior.items()}
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class Nets:
    retail: Mlp
    wholesale: Mlp
    p: Mlp

    ROLES = ("retail", "wholesale", "p")

    @classmethod
    def init(cls, rng: np.random.Generator, prior: PriorSchedule | None = None) -> "Nets":
        nets = cls(Mlp.init(2, rng), Mlp.init(2, rng), Mlp.init(1, rng))
        if prior is not None:
            nets.retail.b2[:] = (prior.mu0_ret.mean(), np.log(prior.sigma0_ret.mean()))
            nets.wholesale.b2[:] = (prior.mu0_ws.mean(), np.log(prior.sigma0_ws.mean()))
        return nets

    @classmethod
    def zeros(cls) -> "Nets":
        return cls(Mlp.zeros(2), Mlp.zeros(2), Mlp.zeros(1))

    def flat(self) -> np.ndarray:
        return np.concatenate([getattr(self, r).flat() for r in self.ROLES])

    def with_flat(self, vec) -> "Nets":
        out, k = [], 0
        for r in self.ROLES:
            net = getattr(self, r)
            size = net.flat().size
            out.append(net.with_flat(vec[k:k + size]))
            k += size
        return Nets(*out)


@dataclass
class SimulatedMetrics:
    v_total: np.ndarray
    v_small_deposits: np.ndarray
    v_frac_small: np.ndarray


@dataclass
class RetailEstimate:
    banks: list[str]
    quarters: list[Quarter]
    retail_deposits: np.ndarray
    wholesale_deposits: np.ndarray
    retail_fraction: np.ndarray
    mask: np.ndarray
    retail_trial_std: np.ndarray | None = None


@dataclass
class FitResult:
    nets: Nets
    params: MixtureParams
    trace: list[float]
    prior: PriorSchedule
    banks: list[str]


@dataclass
class SingleFit:
    banks: list[str]
    quarters: list[Quarter]
    mu: np.ndarray
    sigma: np.ndarray
    mask: np.ndarray
    net: Mlp
    trace: list[float]

    def per_bank(self) -> dict[str, tuple[float, float]]:
        """Average fitted (mu, sigma) over each bank's present quarters."""
        out = {}
        for b, bank in enumerate(self.banks):
            m = self.mask[b]
            out[bank] = (float(self.mu[b, m].mean()), float(self.sigma[b, m].mean()))
        return out


@dataclass
class IndustrySeries:
    quarters: list[Quarter]
    retail: np.ndarray
    wholesale: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.retail + self.wholesale

    @property
    def retail_fraction(self) -> np.ndarray:
        tot = self.total
        return np.divide(self.retail, tot, out=np.zeros_like(tot), where=tot > 0)


def prior_schedule(quarters, config: DgmConfig, window=None) -> PriorSchedule:
    return PriorSchedule.linear(quarters, config.prior, lam=config.lam, window=window)


# ---------------------------------------------------------------- parameters

def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _forward(nets: Nets, features: np.ndarray):
    shape = features.shape[:-1]
    x = features.reshape(-1, features.shape[-1])
    ret = nets.retail.forward(x)
    ws = nets.wholesale.forward(x)
    praw = nets.p.forward(x)[:, 0]
    outs = np.concatenate([ret, ws, praw[:, None]], axis=1)
    if not np.all(np.isfinite(outs)):
        bad = np.unravel_index(int(np.argmin(np.isfinite(outs).all(axis=1))), shape)
        raise DivergenceError(f"non-finite network output at cell {bad}", cell=bad)
    with np.errstate(over="ignore"):
        params = MixtureParams(
            p=_sigmoid(praw).reshape(shape),
            mu_ret=ret[:, 0].reshape(shape),
            sigma_ret=np.exp(ret[:, 1]).reshape(shape),
            mu_ws=ws[:, 0].reshape(shape),
            sigma_ws=np.exp(ws[:, 1]).reshape(shape),
        )
    return x, params


def parameterize(nets: Nets, features: np.ndarray) -> MixtureParams:
    """Map ``[..., 6]`` features to mixture parameters (sigmas exp'd, p sigmoid'd)."""
    return _forward(nets, features)[1]


def _backward(nets: Nets, x, params: MixtureParams, g: dict) -> Nets:
    """Chain ``dL/d(params)`` through the output transforms and the networks."""
    n = len(x)
    g_ret = np.stack([g["mu_ret"].reshape(n), (g["sigma_ret"] * params.sigma_ret).reshape(n)], 1)
    g_ws = np.stack([g["mu_ws"].reshape(n), (g["sigma_ws"] * params.sigma_ws).reshape(n)], 1)
    p = params.p.reshape(n)
    g_p = (g["p"].reshape(n) * p * (1.0 - p))[:, None]
    return Nets(nets.retail.backward(x, g_ret), nets.wholesale.backward(x, g_ws),
                nets.p.backward(x, g_p))


# ------------------------------------------------------------------- metrics

def component_eps(seed: int, stream: int, bank: int, n_t: int, n_samples: int):
    """Standard-normal draws for one bank: ``(retail, wholesale)``, each ``[n_t, n_samples]``.

    Counter-based so any subset of banks, in any order or thread, sees the
    same numbers.
    """
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, stream, bank])))
    e = gen.standard_normal((2, n_t, n_samples))
    return e[0], e[1]


def _component_moments(mu, sigma, limit, eps=None):
    """Mean balance and mean small-account balance per account, with derivatives.

    Closed form when ``eps`` is None, otherwise sample averages over the last
    axis of ``eps``. The small-account indicator is held fixed per sample
    (straight-through), so only the sampled balances carry gradient.
    Returns ``(m, dm/dmu, dm/dsigma, pm, dpm/dmu, dpm/dsigma)``.
    """
    if eps is None:
        m, m_mu, m_sig = ln.mean_grad(mu, sigma)
        pm, pm_mu, pm_sig = ln.partial_mean_below_grad(mu, sigma, limit)
        return m, m_mu, m_sig, pm, pm_mu, pm_sig
    s = ln.sample(mu[..., None], sigma[..., None], eps)
    sb = np.where(s < limit[..., None], s, 0.0)
    m = s.mean(axis=-1)
    pm = sb.mean(axis=-1)
    return m, m, (eps * s).mean(axis=-1), pm, pm, (eps * sb).mean(axis=-1)


def _moments(params: MixtureParams, limits, config: DgmConfig, eps=None, stream=0):
    """Retail and wholesale moments over a ``[n_b, n_t]`` grid."""
    shape = params.p.shape
    lim = np.broadcast_to(np.asarray(limits, dtype=float), shape)
    if config.metric_mode == "analytic" and eps is None:
        return (_component_moments(params.mu_ret, params.sigma_ret, lim),
                _component_moments(params.mu_ws, params.sigma_ws, lim))

    n_b, n_t = shape

    def one_bank(b):
        if eps is not None:
            e_r, e_w = eps[0][b], eps[1][b]
        else:
            e_r, e_w = component_eps(config.seed, stream, b, n_t, config.n_samples)
        return (_component_moments(params.mu_ret[b], params.sigma_ret[b], lim[b], e_r),
                _component_moments(params.mu_ws[b], params.sigma_ws[b], lim[b], e_w))

    rows = _ordered_map(one_bank, range(n_b), config.threads)
    ret = tuple(np.stack([r[0][k] for r in rows]) for k in range(6))
    ws = tuple(np.stack([r[1][k] for r in rows]) for k in range(6))
    return ret, ws


def _ordered_map(fn, items, threads):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def simulate_metrics(params: MixtureParams, n_accounts, limits, config: DgmConfig,
                     eps=None, stream=0) -> SimulatedMetrics:
    """Simulated total deposits, small-account deposits and small-account share.

    ``limits`` broadcasts against ``params`` (typically one limit per quarter).
    In Monte Carlo mode ``eps`` may supply ``(retail, wholesale)`` draws of
    shape ``[n_b, n_t, n_samples]``; the small-account share always uses the CDF.
    """
    (m_r, _, _, pm_r, _, _), (m_w, _, _, pm_w, _, _) = _moments(params, limits, config, eps, stream)
    p = params.p
    lim = np.broadcast_to(np.asarray(limits, dtype=float), p.shape)
    return SimulatedMetrics(
        v_total=n_accounts * (p * m_r + (1.0 - p) * m_w),
        v_small_deposits=n_accounts * (p * pm_r + (1.0 - p) * pm_w),
        v_frac_small=p * ln.cdf(params.mu_ret, params.sigma_ret, lim)
        + (1.0 - p) * ln.cdf(params.mu_ws, params.sigma_ws, lim),
    )


# ---------------------------------------------------------------------- loss

@dataclass
class LossResult:
    value: float
    samples: float
    constrain: float
    grads: dict          # d value / d each MixtureParams field, [n_b, n_t]


def loss(panel: BankPanel, params: MixtureParams, config: DgmConfig,
         prior: PriorSchedule | None = None, eps=None, stream=0) -> LossResult:
    """Sample-matching loss plus prior constraint, with gradients w.r.t. the params.

    ``prior=None`` drops the constraint term.
    """
    n_b, n_t = panel.shape
    n_cells = n_b * n_t
    mask = panel.mask
    limits = insurance_limits(panel.quarters)[None, :]
    lim = np.broadcast_to(limits, (n_b, n_t))
    n = panel.n_accounts
    p = params.p

    dep = np.where(mask, panel.metrics[..., 0], 1.0)
    # absent cells may hold degenerate params; they are masked out below and
    # present cells are checked for finiteness explicitly
    with np.errstate(all="ignore"):
        (m_r, m_r_mu, m_r_sig, pm_r, pm_r_mu, pm_r_sig), \
            (m_w, m_w_mu, m_w_sig, pm_w, pm_w_mu, pm_w_sig) = _moments(params, limits, config,
                                                                        eps, stream)
        c_r, c_r_mu, c_r_sig = ln.cdf_grad(params.mu_ret, params.sigma_ret, lim)
        c_w, c_w_mu, c_w_sig = ln.cdf_grad(params.mu_ws, params.sigma_ws, lim)

        v_tot = n * (p * m_r + (1.0 - p) * m_w)
        v_small = n * (p * pm_r + (1.0 - p) * pm_w)
        v_frac = p * c_r + (1.0 - p) * c_w

        r1 = np.where(mask, (panel.metrics[..., 0] - v_tot) / dep, 0.0)
        r2 = np.where(mask, (panel.metrics[..., 1] - v_small) / dep, 0.0)
        r3 = np.where(mask, panel.metrics[..., 2] - v_frac, 0.0)
        cell_loss = r1 * r1 + r2 * r2 + r3 * r3
    if not np.all(np.isfinite(cell_loss)):
        b, t = np.argwhere(~np.isfinite(cell_loss))[0]
        raise DivergenceError(
            f"non-finite loss at bank {panel.banks[b]} quarter {panel.quarters[t]}",
            cell=(int(b), int(t)))
    samples = float(cell_loss.sum() / n_cells)

    g_tot = -2.0 * r1 / dep / n_cells
    g_small = -2.0 * r2 / dep / n_cells
    g_frac = -2.0 * r3 / n_cells
    q = 1.0 - p
    with np.errstate(all="ignore"):
        grads = {
            "p": g_tot * n * (m_r - m_w) + g_small * n * (pm_r - pm_w) + g_frac * (c_r - c_w),
            "mu_ret": p * (g_tot * n * m_r_mu + g_small * n * pm_r_mu + g_frac * c_r_mu),
            "sigma_ret": p * (g_tot * n * m_r_sig + g_small * n * pm_r_sig + g_frac * c_r_sig),
            "mu_ws": q * (g_tot * n * m_w_mu + g_small * n * pm_w_mu + g_frac * c_w_mu),
            "sigma_ws": q * (g_tot * n * m_w_sig + g_small * n * pm_w_sig + g_frac * c_w_sig),
        }
    # absent cells can carry overflowed moments (0 * inf); keep them out of backprop
    grads = {k: np.where(mask, v, 0.0) for k, v in grads.items()}
    for v in grads.values():
        if not np.all(np.isfinite(v)):
            b, t = np.argwhere(~np.isfinite(v))[0]
            raise DivergenceError(
                f"non-finite gradient at bank {panel.banks[b]} quarter {panel.quarters[t]}",
                cell=(int(b), int(t)))

    constrain = 0.0
    if prior is not None and prior.lam > 0:
        scale = prior.lam if config.prior_reduction == "sum" else prior.lam / n_cells
        for name, target in (("mu_ret", prior.mu0_ret), ("sigma_ret", prior.sigma0_ret),
                             ("mu_ws", prior.mu0_ws), ("sigma_ws", prior.sigma0_ws)):
            dev = np.where(mask, getattr(params, name) - target[None, :], 0.0)
            constrain += float(scale * np.sum(dev * dev))
            grads[name] = grads[name] + 2.0 * scale * dev
    return LossResult(samples + constrain, samples, constrain, grads)


def _l2(net: Mlp):
    return float(np.sum(net.w1 ** 2) + np.sum(net.w2 ** 2))


def loss_and_grads(nets: Nets, panel: BankPanel, config: DgmConfig,
                   prior: PriorSchedule | None, eps=None, stream=0):
    """Total loss and its gradient w.r.t. every network parameter.

    The gradient comes back as a :class:`Nets` whose members are :class:`MlpGrads`.
    """
    x, params = _forward(nets, panel.features)
    res = loss(panel, params, config, prior, eps=eps, stream=stream)
    g = _backward(nets, x, params, res.grads)
    if config.l2 > 0:
        for role in Nets.ROLES:
            net, gr = getattr(nets, role), getattr(g, role)
            gr.w1 = gr.w1 + 2.0 * config.l2 * net.w1
            gr.w2 = gr.w2 + 2.0 * config.l2 * net.w2
        res.value += config.l2 * sum(_l2(getattr(nets, r)) for r in Nets.ROLES)
    return res, g


# ------------------------------------------------------------------ training

class _Descent:
    """Full-batch gradient descent with heavy-ball momentum and global-norm clipping."""

    def __init__(self, lr, momentum=0.0, clip_norm=0.0):
        self.lr, self.momentum, self.clip_norm = lr, momentum, clip_norm
        self.velocity = None

    def step(self, nets: list[Mlp], grads: list[MlpGrads]) -> list[Mlp]:
        if self.clip_norm and self.clip_norm > 0:
            norm = np.sqrt(sum(g.sq_norm() for g in grads))
            if norm > self.clip_norm:
                grads = [g.scaled(self.clip_norm / norm) for g in grads]
        if self.momentum and self.velocity is not None:
            grads = [v.scaled(self.momentum) + g for v, g in zip(self.velocity, grads)]
        self.velocity = grads
        return [sgd_step(n, g, self.lr) for n, g in zip(nets, grads)]


def fit(panel: BankPanel, config: DgmConfig, banks=None, prior: PriorSchedule | None = None,
        log_every: int = 0) -> FitResult:
    """Train the three networks on ``panel`` (optionally restricted to ``banks``).

    The returned trace holds the loss before each step plus the final loss.
    """
    train = panel.subset(banks) if banks is not None else panel
    if not train.mask.any():
        raise ValueError("training panel has no present bank-quarters")
    if prior is None:
        prior = prior_schedule(train.quarters, config)
    rng = np.random.default_rng(config.seed)
    nets = Nets.init(rng, prior)
    opt = _Descent(config.lr, config.momentum, config.clip_norm)
    trace: list[float] = []
    for step in range(config.steps):
        try:
            res, g = loss_and_grads(nets, train, config, prior, stream=step)
        except DivergenceError as exc:
            exc.trace = trace
            raise
        trace.append(res.value)
        if log_every and step % log_every == 0:
            log.info("step %d loss %.6g (samples %.6g, prior %.6g)",
                     step, res.value, res.samples, res.constrain)
        nets = Nets(*opt.step([getattr(nets, r) for r in Nets.ROLES],
                              [getattr(g, r) for r in Nets.ROLES]))
    res, _ = loss_and_grads(nets, train, config, prior, stream=config.steps)
    trace.append(res.value)
    return FitResult(nets, parameterize(nets, train.features), trace, prior, list(train.banks))


def fit_single(panel: BankPanel, config: DgmConfig, banks=None,
               prior: PriorSchedule | None = None, init_sigma: float = 1.0) -> SingleFit:
    """Fit a one-distribution model (retail share fixed at 1) to a bank subset.

    No prior by default, so the fitted location is driven by the data alone.
    The output bias starts at ``sigma = init_sigma`` with ``mu`` matching the
    median balance per account; starting far above the data makes the first
    steps collapse ``sigma`` until the small-account terms stop carrying gradient.
    """
    train = panel.subset(banks) if banks is not None else panel
    if not train.mask.any():
        raise ValueError("training panel has no present bank-quarters")
    rng = np.random.default_rng(config.seed)
    net = Mlp.init(2, rng)
    per_account = train.metrics[..., 0][train.mask] / train.n_accounts[train.mask]
    net.b2[:] = (np.median(np.log(per_account)) - 0.5 * init_sigma ** 2, np.log(init_sigma))
    x = train.features.reshape(-1, train.features.shape[-1])
    n = len(x)
    shape = train.shape
    opt = _Descent(config.lr, config.momentum, config.clip_norm)
    trace: list[float] = []

    def evaluate(net, stream):
        out = net.forward(x)
        if not np.all(np.isfinite(out)):
            raise DivergenceError("non-finite network output", trace=trace)
        mu = out[:, 0].reshape(shape)
        with np.errstate(over="ignore"):
            sigma = np.exp(out[:, 1]).reshape(shape)
        params = MixtureParams(np.ones(shape), mu, sigma, mu, sigma)
        res = loss(train, params, config, prior, stream=stream)
        g_out = np.stack([res.grads["mu_ret"].reshape(n),
                          (res.grads["sigma_ret"] * sigma).reshape(n)], 1)
        return res, net.backward(x, g_out), mu, sigma

    for step in range(config.steps):
        res, g, _, _ = evaluate(net, step)
        trace.append(res.value)
        net = opt.step([net], [g])[0]
    res, _, mu, sigma = evaluate(net, config.steps)
    trace.append(res.value)
    return SingleFit(list(train.banks), list(train.quarters), mu, sigma, train.mask.copy(),
                     net, trace)


# ----------------------------------------------------------------- inference

def infer_retail(nets: Nets, panel: BankPanel, config: DgmConfig) -> RetailEstimate:
    """Retail and wholesale deposits per bank-quarter.

    Monte Carlo mode averages ``n_inference_trials`` independent sample draws
    of the deposit estimates; analytic mode uses the exact expectations.
    """
    params = parameterize(nets, panel.features)
    n = np.where(panel.mask, panel.n_accounts, 0.0)
    std = None
    if config.metric_mode == "analytic":
        retail = n * params.p * ln.mean(params.mu_ret, params.sigma_ret)
        wholesale = n * (1.0 - params.p) * ln.mean(params.mu_ws, params.sigma_ws)
    else:
        n_b, n_t = panel.shape

        def trial(j):
            r = np.zeros((n_b, n_t))
            w = np.zeros((n_b, n_t))
            for b in range(n_b):
                if not panel.mask[b].any():
                    continue
                e_r, e_w = component_eps(config.seed, _INFER_STREAM + j, b, n_t,
                                         config.n_samples)
                r[b] = ln.sample(params.mu_ret[b][:, None], params.sigma_ret[b][:, None],
                                 e_r).mean(axis=-1)
                w[b] = ln.sample(params.mu_ws[b][:, None], params.sigma_ws[b][:, None],
                                 e_w).mean(axis=-1)
            return n * params.p * r, n * (1.0 - params.p) * w

        trials = _ordered_map(trial, range(config.n_inference_trials), config.threads)
        rs = np.stack([t[0] for t in trials])
        retail = rs.mean(axis=0)
        wholesale = np.stack([t[1] for t in trials]).mean(axis=0)
        std = rs.std(axis=0)
    total = retail + wholesale
    frac = np.divide(retail, total, out=np.zeros_like(total), where=total > 0)
    return RetailEstimate(list(panel.banks), list(panel.quarters), retail, wholesale,
                          np.clip(frac, 0.0, 1.0), panel.mask.copy(), std)


def aggregate_industry(est: RetailEstimate) -> IndustrySeries:
    m = est.mask
    return IndustrySeries(list(est.quarters),
                          np.where(m, est.retail_deposits, 0.0).sum(axis=0),
                          np.where(m, est.wholesale_deposits, 0.0).sum(axis=0))


# ----------------------------------------------------------------------- csv

ESTIMATE_COLUMNS = ("bank_id", "quarter", "retail_deposits", "wholesale_deposits",
                    "retail_fraction")
INDUSTRY_COLUMNS = ("quarter", "retail_deposits", "wholesale_deposits", "total_deposits",
                    "retail_fraction")


def write_estimates_csv(est: RetailEstimate, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ESTIMATE_COLUMNS)
        for b, bank in enumerate(est.banks):
            for t, q in enumerate(est.quarters):
                if est.mask[b, t]:
                    w.writerow([bank, str(q), repr(float(est.retail_deposits[b, t])),
                                repr(float(est.wholesale_deposits[b, t])),
                                repr(float(est.retail_fraction[b, t]))])


def write_industry_csv(series: IndustrySeries, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(INDUSTRY_COLUMNS)
        for t, q in enumerate(series.quarters):
            w.writerow([str(q), repr(float(series.retail[t])), repr(float(series.wholesale[t])),
                        repr(float(series.total[t])), repr(float(series.retail_fraction[t]))])


def read_industry_csv(path) -> IndustrySeries:
    quarters, retail, wholesale = [], [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            quarters.append(Quarter.parse(row["quarter"]))
            retail.append(float(row["retail_deposits"]))
            wholesale.append(float(row["wholesale_deposits"]))
    return IndustrySeries(quarters, np.array(retail), np.array(wholesale))
