"""Sequential-auction equilibrium when every insider must disclose each trade.

The equilibrium is pinned down by a normalised intensity ``a_n`` defined through
``lambda_n = sqrt(Sigma_{n-1}) a_n / ((M+1) sigma_mu)``. It satisfies a closed
backward recursion from ``a_N = sqrt(M)``; everything else follows in one
forward pass. The recursion is run on ``b_n = a_n**2``, which avoids a
square root per step and keeps ``1 - b_n/M`` (the share of remaining variance
that survives auction n) as accurate as possible.

Noise bookkeeping: ``z_var`` is the variance of each insider's *own*
dissimulation noise. The equivalent "one shared noise" convention uses
``z_var / M``; both give the same law for order flow and prices.
"""
from __future__ import annotations

import math
import sys
import threading
from dataclasses import dataclass
from typing import Sequence

import mpmath

from .errors import DegenerateVariance, WrongN
from .model import AuctionCoefficients, EquilibriumPath, MarketParams, TwoPeriodBundle, validate


def backward_step(insiders: int, b):
    """Map ``a_n**2`` to ``a_{n-1}**2``. Works for floats and mpmath numbers."""
    M = insiders
    m1 = M + 1
    inner = 2 * m1 * (1 - M) * b + (M - 1) * b * b + M * M * m1
    return M**4 * m1 * m1 * b / (M**3 * m1 * m1 * b + inner * inner)


def a_squared_backward(insiders: int, auctions: int, one=1.0) -> list:
    """``[a_1**2, ..., a_N**2]`` computed in the number type of ``one``, uncached."""
    b = one * insiders
    out = [b]
    for _ in range(auctions - 1):
        b = backward_step(insiders, b)
        out.append(b)
    out.reverse()
    return out


# The sequence depends only on M and the distance to the final auction, so the
# float version is memoised per M as a growing list indexed by that distance.
# It is computed with extra digits and then rounded: near the fixed point the
# plain double recursion wobbles by an ulp, which would break the exact
# monotonicity of the sequence. Rounding is monotone, so the rounded values
# inherit it.
_tails: dict[int, list[float]] = {}
_exact: dict[int, object] = {}
_tails_lock = threading.Lock()
_ctx = mpmath.MPContext()
_ctx.dps = 34


def a_squared_sequence(insiders: int, auctions: int) -> list[float]:
    """``[a_1**2, ..., a_N**2]`` in double precision; ``a_N**2 == M`` exactly."""
    with _tails_lock:
        tail = _tails.setdefault(insiders, [float(insiders)])
        b = _exact.setdefault(insiders, _ctx.mpf(insiders))
        while len(tail) < auctions:
            b = backward_step(insiders, b)
            # guard against a last-digit wobble surviving the rounding
            tail.append(min(float(b), tail[-1]))
        _exact[insiders] = b
        return tail[auctions - 1 :: -1]


def solve_a_sequence(params: MarketParams) -> list[float]:
    """``[a_1, ..., a_N]``, non-decreasing, ending in ``sqrt(M)``."""
    validate(params)
    return [math.sqrt(b) for b in a_squared_sequence(params.insiders, params.auctions)]


def derive_path(a_seq: Sequence[float], params: MarketParams) -> EquilibriumPath:
    """Forward pass from the intensity sequence to every equilibrium coefficient."""
    validate(params)
    M, N = params.insiders, params.auctions
    if len(a_seq) != N:
        raise ValueError(f"expected {N} intensities, got {len(a_seq)}")
    sd = params.noise_sd
    s2 = params.noise_var

    sigma_prev = params.prior_var
    fwd = []
    for n, a in enumerate(a_seq, start=1):
        last = n == N
        keep = 0.0 if last else 1.0 - a * a / M
        root = math.sqrt(sigma_prev)
        lam = root * a / ((M + 1) * sd)
        beta = a * sd / (M * root)
        gamma = (M + 1) * lam / M
        sigma_post = keep * sigma_prev
        z_var = s2 * keep
        if not last and not sigma_post >= sys.float_info.min:
            raise DegenerateVariance(n, sigma_post)
        fwd.append((n, a, lam, beta, gamma, sigma_post, z_var))
        sigma_prev = sigma_post

    rows = []
    delta = 0.0
    deltas = [0.0] * (N + 1)
    for n, a, lam, beta, gamma, sigma_post, z_var in reversed(fwd):
        deltas[n] = delta
        delta = delta + (M - 1) * M * gamma * z_var / (2 * (M + 1))
    delta0 = delta
    for n, a, lam, beta, gamma, sigma_post, z_var in fwd:
        alpha = 0.0 if n == N else 1.0 / (2 * gamma)
        rows.append(AuctionCoefficients(n, a, lam, beta, gamma, alpha, deltas[n], sigma_post, z_var))

    r1 = rows[0]
    alpha0 = r1.beta * (1 - r1.lam * M * r1.beta) + r1.alpha * (1 - r1.gamma * M * r1.beta) ** 2
    profit = alpha0 * params.prior_var + delta0
    return EquilibriumPath(params, tuple(rows), alpha0, delta0, profit)


def solve(params: MarketParams) -> EquilibriumPath:
    return derive_path(solve_a_sequence(params), params)


def log_variance_ratios(insiders: int, auctions: int) -> list[float]:
    """``log(Sigma_n / Sigma_0)`` for n = 1..N, with ``-inf`` at n = N.

    Never underflows, unlike the variances themselves.
    """
    out = []
    acc = 0.0
    for b in a_squared_sequence(insiders, auctions)[:-1]:
        acc += math.log1p(-b / insiders)
        out.append(acc)
    out.append(-math.inf)
    return out


def auction_profits(path: EquilibriumPath) -> list[float]:
    """Expected profit of one insider from each auction, from Gaussian moments.

    With ``d = v - p*_{n-1}`` (variance ``Sigma_{n-1}``) and own noise ``z``:
    ``E[x (v - p_n)] = beta (1 - lambda M beta) Sigma_{n-1} - lambda z_var``.
    """
    M = path.params.insiders
    pre = path.sigma_pre().tolist()
    return [
        r.beta * (1 - r.lam * M * r.beta) * s - r.lam * r.z_var
        for r, s in zip(path.rows, pre)
    ]


def value_function(alpha: float, delta: float, v: float, p_star: float) -> float:
    """Expected remaining profit ``alpha (v - p*)**2 + delta``."""
    return alpha * (v - p_star) ** 2 + delta


def two_period_closed_form(params: MarketParams) -> TwoPeriodBundle:
    """Two-auction disclosure equilibrium written out in closed form.

    ``profit1`` is computed from the Gaussian moments of the closed-form
    coefficients. A commonly quoted closed-form expression for the first-period
    profit is kept in ``profit1_alternative`` for comparison only; it does not
    agree with the model's own value function.
    """
    validate(params)
    if params.auctions != 2:
        raise WrongN(params.auctions)
    M = params.insiders
    S0 = params.prior_var
    sd = params.noise_sd
    s2 = params.noise_var
    D = 4 + M * M * (M + 1) ** 2
    root = math.sqrt(M * S0 / D)

    lam1 = M / sd * root
    lam2 = 2 / ((M + 1) * sd) * root
    gamma1 = (M + 1) / sd * root
    beta1 = (M + 1) * sd * math.sqrt(M / (D * S0))
    beta2 = sd / 2 * math.sqrt(D / (M * S0))
    z_var1 = 4 * s2 / D
    sigma1 = 4 * S0 / D

    profit1 = beta1 * (1 - lam1 * M * beta1) * S0 - lam1 * z_var1
    profit2 = sigma1 / ((M + 1) ** 2 * lam2)
    alternative = (4 + M**3 * (M + 1) ** 2) * math.sqrt(M * S0) * sd / D**1.5
    return TwoPeriodBundle(
        variant="disclosure",
        params=params,
        lam1=lam1,
        lam2=lam2,
        beta1=beta1,
        beta2=beta2,
        sigma1=sigma1,
        sigma2=0.0,
        gamma1=gamma1,
        z_var1=z_var1,
        profit1=profit1,
        profit2=profit2,
        profit1_alternative=alternative,
    )


@dataclass(frozen=True)
class ResidualReport:
    """Largest scaled residual of each equilibrium identity over all auctions."""

    tol: float
    max_residual: dict[str, float]
    worst_auction: dict[str, int]

    @property
    def failures(self) -> list[str]:
        return [k for k, v in self.max_residual.items() if not v <= self.tol]

    @property
    def ok(self) -> bool:
        return not self.failures


def _scaled(lhs: float, rhs: float) -> float:
    # absolute below unit magnitude, relative above it
    return abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))


def verify_difference_system(path: EquilibriumPath, tol: float = 1e-10) -> ResidualReport:
    """Evaluate every equation of the difference system on a computed path.

    Residuals are ``|lhs - rhs| / max(1, |lhs|, |rhs|)``.
    """
    p = path.params
    M, N = p.insiders, p.auctions
    s2 = p.noise_var
    pre = path.sigma_pre().tolist()
    rows = path.rows
    alphas = [path.alpha0] + [r.alpha for r in rows]
    deltas = [path.delta0] + [r.delta for r in rows]

    worst: dict[str, float] = {}
    where: dict[str, int] = {}

    def record(name: str, n: int, lhs: float, rhs: float):
        r = _scaled(lhs, rhs)
        if r > worst.get(name, -1.0) or math.isnan(r):
            worst[name] = r
            where[name] = n

    for r, s_prev in zip(rows, pre):
        n = r.index
        lam, beta, gamma = r.lam, r.beta, r.gamma
        record("alpha_recursion", n, alphas[n - 1],
               beta * (1 - lam * M * beta) + alphas[n] * (1 - gamma * M * beta) ** 2)
        record("delta_recursion", n, deltas[n - 1],
               (M - 1) * M * gamma * r.z_var / (2 * (M + 1)) + deltas[n])
        record("beta_lambda", n, beta, (M + 1) * lam * s2 / (M * s_prev))
        record("sigma_recursion", n, r.sigma_post, s_prev - (M + 1) ** 2 * lam * lam * s2 / M)
        record("gamma_lambda", n, gamma, (M + 1) * lam / M)
        record("order_flow_variance", n, M * M * beta * beta * s_prev + M * r.z_var, M * s2)
        if n < N:
            record("lambda_alpha", n, lam, M / (2 * (M + 1) * r.alpha))
        else:
            record("terminal", n, lam, math.sqrt(M * s_prev) / ((M + 1) * p.noise_sd))
            record("terminal", n, alphas[n - 1], 1 / ((M + 1) ** 2 * lam))
            record("terminal", n, beta, 1 / ((M + 1) * lam))
            record("terminal", n, r.sigma_post + r.z_var + r.alpha + r.delta, 0.0)
    return ResidualReport(tol, worst, where)
