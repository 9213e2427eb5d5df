"""Seeded Monte Carlo check of a computed disclosure equilibrium.

Each path draws ``v``, the noise-trader demands and the insiders'
dissimulation noise, then plays the linear rules forward:

    x_{i,n} = beta_n (v - p*_{n-1}) + z_{i,n}
    p_n     = p*_{n-1} + lambda_n y_n,      y_n = sum_i x_{i,n} + mu_n
    p*_n    = p*_{n-1} + gamma_n sum_i x_{i,n}

Paths are simulated in fixed-size blocks. Block ``b`` draws from its own
Philox stream keyed by ``(master_seed, b)``, and per-path results are stored
in path order before any statistic is computed, so reports are bit-identical
whatever the number of workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import ConventionMismatch, EmptySimulation, InvalidInput
from .model import EquilibriumPath

CONVENTIONS = ("independent", "common")
BAND = 3.0  # standard errors
RECORD_CAP = 1000


@dataclass(frozen=True)
class SimulationConfig:
    paths: int
    master_seed: int = 0
    noise_convention: str = "independent"
    record_paths: int = 0  # how many leading paths to keep in full, at most RECORD_CAP
    workers: int = 1
    block_size: int = 1 << 14

    def __post_init__(self):
        if isinstance(self.paths, bool) or not isinstance(self.paths, (int, np.integer)):
            raise InvalidInput(f"paths: expected integer >= 1, got {self.paths!r}")
        if self.paths < 1:
            raise EmptySimulation(f"paths: expected integer >= 1, got {self.paths!r}")
        if not 0 <= self.master_seed < 2**64:
            raise InvalidInput(f"master_seed: expected 64-bit unsigned integer, got {self.master_seed!r}")
        if self.noise_convention not in CONVENTIONS:
            raise InvalidInput(
                f"noise_convention: expected one of {CONVENTIONS}, got {self.noise_convention!r}"
            )
        if not 0 <= self.record_paths <= RECORD_CAP:
            raise InvalidInput(f"record_paths: expected 0..{RECORD_CAP}, got {self.record_paths!r}")
        if self.workers < 1:
            raise InvalidInput(f"workers: expected integer >= 1, got {self.workers!r}")
        if self.block_size < 1:
            raise InvalidInput(f"block_size: expected integer >= 1, got {self.block_size!r}")


@dataclass(frozen=True)
class SimulationPathRecord:
    """One simulated path in full, for debugging."""

    v: float
    order_flow: tuple[float, ...]  # y_n
    prices: tuple[float, ...]  # p_n
    disclosed_prices: tuple[float, ...]  # p*_n
    orders: tuple[tuple[float, ...], ...]  # x_{i,n}, one tuple per auction
    profits: tuple[float, ...]  # realised total profit of each insider


@dataclass(frozen=True)
class Check:
    """An estimate compared with its model value.

    Passes when the estimate lies within ``BAND`` standard errors, or within
    ``floor`` in absolute terms (for statistics that are exact by construction).
    """

    name: str
    estimate: float
    target: float
    se: float
    floor: float = 0.0

    @property
    def z(self) -> float:
        diff = self.estimate - self.target
        if self.se > 0:
            return diff / self.se
        return 0.0 if diff == 0 else math.copysign(math.inf, diff)

    @property
    def passed(self) -> bool:
        return abs(self.estimate - self.target) <= max(BAND * self.se, self.floor)


@dataclass(frozen=True)
class AuctionStats:
    index: int
    lam: float
    lambda_plumbing: float  # OLS slope of p_n - p*_{n-1} on y_n
    lambda_hat: float  # Cov(v - p*_{n-1}, y_n) / Var(y_n)
    lambda_se: float
    gamma: float
    gamma_hat: float  # Cov(v - p*_{n-1}, x_n) / Var(x_n), x_n the disclosed total
    gamma_se: float
    var_y: float
    var_y_target: float
    var_y_se: float
    var_error: float  # sample Var(v - p*_n)
    sigma_post: float
    var_error_se: float
    drift: float  # mean of p*_n - p*_{n-1}
    drift_se: float


@dataclass(frozen=True)
class SimulationReport:
    path: EquilibriumPath
    config: SimulationConfig
    paths_used: int
    excluded: int  # paths dropped for non-finite values
    auctions: tuple[AuctionStats, ...]
    profit_mean: float  # per insider, summed over auctions
    profit_se: float
    profit_target: float
    max_final_gap: float  # max |p*_N - v|
    final_gap_bound: float
    checks: tuple[Check, ...]
    records: tuple[SimulationPathRecord, ...] = field(default=(), repr=False)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    @property
    def ok(self) -> bool:
        return not self.failures

    @property
    def profit_z(self) -> float:
        """Mean profit in standard errors away from zero."""
        return self.profit_mean / self.profit_se if self.profit_se > 0 else math.inf


@dataclass
class _Block:
    error: np.ndarray  # (B, N+1): v - p*_n for n = 0..N
    flow: np.ndarray  # (B, N): y_n
    disclosed: np.ndarray  # (B, N): sum_i x_{i,n}
    profit: np.ndarray  # (B,): mean over insiders of total profit
    final_gap: np.ndarray  # (B,): |p*_N - v| from the price recursion
    records: list


def _block_stream(seed: int, block: int) -> np.random.Generator:
    seq = np.random.SeedSequence(seed, spawn_key=(block,))
    return np.random.Generator(np.random.Philox(seq))


def _simulate_block(path: EquilibriumPath, config: SimulationConfig, block: int, size: int,
                    keep: int) -> _Block:
    p = path.params
    M, N = p.insiders, p.auctions
    rng = _block_stream(config.master_seed, block)
    # the same draws serve both conventions; "common" uses only insider 0's column
    v = p.prior_mean + math.sqrt(p.prior_var) * rng.standard_normal(size)
    mu = p.noise_sd * rng.standard_normal((size, N))
    Z = rng.standard_normal((size, N, M))

    error = np.empty((size, N + 1))
    flow = np.empty((size, N))
    disclosed = np.empty((size, N))
    profit = np.zeros((size, M))
    # prices are tracked for the final-revelation check and the records, but
    # statistics use the error v - p*_n propagated on its own: late auctions
    # would otherwise lose every digit to cancellation against v
    p_star = np.full(size, float(p.prior_mean))
    error[:, 0] = v - p_star
    rec_x, rec_p, rec_ps = [], [], []

    for k, r in enumerate(path.rows):
        d = error[:, k]
        if config.noise_convention == "independent":
            z = math.sqrt(r.z_var) * Z[:, k, :]
        else:
            z = np.repeat(math.sqrt(r.z_var / M) * Z[:, k, :1], M, axis=1)
        x = r.beta * d[:, None] + z
        total = x.sum(axis=1)
        y = total + mu[:, k]
        profit += x * (d - r.lam * y)[:, None]
        error[:, k + 1] = d - r.gamma * total
        flow[:, k] = y
        disclosed[:, k] = total
        if keep:
            rec_x.append(x[:keep])
            rec_p.append(p_star[:keep] + r.lam * y[:keep])
        p_star = p_star + r.gamma * total
        if keep:
            rec_ps.append(p_star[:keep])
    final_gap = np.abs(p_star - v)

    records = []
    for j in range(keep):
        records.append(SimulationPathRecord(
            v=float(v[j]),
            order_flow=tuple(flow[j].tolist()),
            prices=tuple(float(a[j]) for a in rec_p),
            disclosed_prices=tuple(float(a[j]) for a in rec_ps),
            orders=tuple(tuple(a[j].tolist()) for a in rec_x),
            profits=tuple(profit[j].tolist()),
        ))
    return _Block(error, flow, disclosed, profit.mean(axis=1), final_gap, records)


def _slope(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """OLS slope of y on x (with intercept) and its standard error, two-pass."""
    n = x.size
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(xc @ xc)
    b = float(xc @ yc) / sxx
    resid = yc - b * xc
    s2 = float(resid @ resid) / max(n - 2, 1)
    return b, math.sqrt(s2 / sxx)


def _variance(x: np.ndarray) -> tuple[float, float]:
    """Sample variance and its large-sample standard error sqrt((m4 - m2**2) / n)."""
    n = x.size
    xc = x - x.mean()
    sq = xc * xc
    m2 = float(sq.mean())
    m4 = float((sq * sq).mean())
    return m2 * n / max(n - 1, 1), math.sqrt(max(m4 - m2 * m2, 0.0) / n)


def _mean(x: np.ndarray) -> tuple[float, float]:
    n = x.size
    return float(x.mean()), float(x.std(ddof=1)) / math.sqrt(n) if n > 1 else 0.0


def simulate_paths(path: EquilibriumPath, config: SimulationConfig) -> SimulationReport:
    """Simulate ``config.paths`` independent markets under ``path``'s rules."""
    p = path.params
    N = p.auctions
    starts = list(range(0, config.paths, config.block_size))
    sizes = [min(config.block_size, config.paths - s) for s in starts]
    keeps = [max(0, min(config.record_paths - s, n)) for s, n in zip(starts, sizes)]

    def run(b: int) -> _Block:
        return _simulate_block(path, config, b, sizes[b], keeps[b])

    if config.workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            blocks = list(pool.map(run, range(len(starts))))
    else:
        blocks = [run(b) for b in range(len(starts))]

    error = np.concatenate([b.error for b in blocks])
    flow = np.concatenate([b.flow for b in blocks])
    disclosed = np.concatenate([b.disclosed for b in blocks])
    profit = np.concatenate([b.profit for b in blocks])
    final_gap = np.concatenate([b.final_gap for b in blocks])
    records = tuple(r for b in blocks for r in b.records)

    finite = (np.isfinite(error).all(axis=1) & np.isfinite(flow).all(axis=1)
              & np.isfinite(profit) & np.isfinite(final_gap))
    excluded = int(config.paths - finite.sum())
    if excluded == config.paths:
        raise EmptySimulation("every simulated path overflowed")
    if excluded:
        error, flow, disclosed = error[finite], flow[finite], disclosed[finite]
        profit, final_gap = profit[finite], final_gap[finite]
    used = int(finite.sum())
    if used < 3:
        raise EmptySimulation(f"need at least 3 usable paths for standard errors, got {used}")

    M = p.insiders
    var_scale = max(p.prior_var, p.noise_var)
    stats, checks = [], []
    for k, r in enumerate(path.rows):
        n = r.index
        d, y, tot = error[:, k], flow[:, k], disclosed[:, k]
        plumb, _ = _slope(y, r.lam * y)  # p_n - p*_{n-1}
        lam_hat, lam_se = _slope(y, d)
        gam_hat, gam_se = _slope(tot, d)
        vy, vy_se = _variance(y)
        ve, ve_se = _variance(error[:, k + 1])
        drift, drift_se = _mean(error[:, k] - error[:, k + 1])
        vy_target = (M + 1) * p.noise_var
        stats.append(AuctionStats(n, r.lam, plumb, lam_hat, lam_se, r.gamma, gam_hat, gam_se,
                                  vy, vy_target, vy_se, ve, r.sigma_post, ve_se, drift, drift_se))
        tiny = 1e-9 * math.sqrt(var_scale)
        checks += [
            Check(f"lambda_hat[{n}]", lam_hat, r.lam, lam_se),
            Check(f"gamma_hat[{n}]", gam_hat, r.gamma, gam_se, floor=1e-9 * abs(r.gamma)),
            Check(f"var_y[{n}]", vy, vy_target, vy_se),
            Check(f"var_error[{n}]", ve, r.sigma_post, ve_se, floor=1e-9 * var_scale),
            Check(f"martingale[{n}]", drift, 0.0, drift_se, floor=tiny),
        ]

    profit_mean, profit_se = _mean(profit)
    checks.append(Check("profit", profit_mean, path.ex_ante_profit, profit_se))

    max_gap = float(final_gap.max())
    bound = 1e-9 * max(1.0, abs(p.prior_mean), math.sqrt(p.prior_var))
    checks.append(Check("final_revelation", max_gap, 0.0, 0.0, floor=bound))

    return SimulationReport(
        path=path,
        config=config,
        paths_used=used,
        excluded=excluded,
        auctions=tuple(stats),
        profit_mean=profit_mean,
        profit_se=profit_se,
        profit_target=path.ex_ante_profit,
        max_final_gap=max_gap,
        final_gap_bound=bound,
        checks=tuple(checks),
        records=records,
    )


# statistics compared across conventions, most fundamental first
_COMPARED = ("var_y", "lambda_hat", "gamma_hat", "var_error", "profit")


def _comparable(rep: SimulationReport) -> list[tuple[str, float, float]]:
    out = []
    for name in _COMPARED:
        if name == "profit":
            out.append(("profit", rep.profit_mean, rep.profit_se))
            continue
        for s in rep.auctions:
            est = getattr(s, name)
            se = getattr(s, {"var_y": "var_y_se", "lambda_hat": "lambda_se",
                             "gamma_hat": "gamma_se", "var_error": "var_error_se"}[name])
            out.append((f"{name}[{s.index}]", est, se))
    return out


@dataclass(frozen=True)
class EquivalenceVerdict:
    comparisons: tuple[Check, ...]  # estimate = report A, target = report B

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.comparisons)


def compare_conventions(rep_a: SimulationReport, rep_b: SimulationReport) -> EquivalenceVerdict:
    """Per-statistic comparison within ``BAND`` joint standard errors."""
    if rep_a.path.params != rep_b.path.params or rep_a.paths_used != rep_b.paths_used:
        raise InvalidInput("reports must come from the same parameters and path count")
    comps = []
    for (name, a, sa), (_, b, sb) in zip(_comparable(rep_a), _comparable(rep_b)):
        floor = 1e-9 * max(1.0, abs(a), abs(b))
        comps.append(Check(name, a, b, math.hypot(sa, sb), floor=floor))
    return EquivalenceVerdict(tuple(comps))


def convention_equivalence(rep_a: SimulationReport, rep_b: SimulationReport) -> EquivalenceVerdict:
    """Like :func:`compare_conventions`, but raise :class:`ConventionMismatch`
    naming the first disagreeing statistic (order flow variance first)."""
    verdict = compare_conventions(rep_a, rep_b)
    for c in verdict.comparisons:
        if not c.passed:
            raise ConventionMismatch(c.name, c.z)
    return verdict


def scaled_noise(path: EquilibriumPath, factor: float) -> EquilibriumPath:
    """Copy of ``path`` with every dissimulation variance multiplied by ``factor``.

    Only useful for fault injection: the result is no longer an equilibrium.
    """
    rows = tuple(replace(r, z_var=r.z_var * factor) for r in path.rows)
    return replace(path, rows=rows)


def simulate_both(path: EquilibriumPath, config: SimulationConfig,
                  other: Optional[EquilibriumPath] = None) -> tuple[SimulationReport, SimulationReport]:
    """Independent-convention and common-convention reports from the same seed."""
    a = simulate_paths(path, replace(config, noise_convention="independent"))
    b = simulate_paths(other or path, replace(config, noise_convention="common"))
    return a, b
