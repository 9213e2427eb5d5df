"""Frequent-trading limits of the disclosure equilibrium.

For M >= 2 the intensity sequence is squeezed towards the unique root ``A`` in
(0, M) of

    f(x) = (M-1)^2 x^3 - 4(M+1)(M-1)^2 x^2 + (M^2-1)(6M^2-4) x + (M+1)^2 (4M^2 - 3M^3).

``A`` lies in a narrow analytic bracket just below M. Near M the standard
form of f cancels catastrophically, so root finding is done on the shifted
polynomial ``f(M - eps)``, whose constant term is 4M.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import mpmath

from .disclosure import a_squared_backward, a_squared_sequence
from .errors import BracketSignError, InvalidInput, MonopolistHasNoA
from .model import MarketParams, validate
from .roots import bisect


def _require_competition(insiders: int) -> None:
    if insiders == 1:
        raise MonopolistHasNoA()
    if insiders < 1:
        raise InvalidInput(f"insiders must be >= 2, got {insiders}")


def cubic_f(insiders: int, x):
    """The limiting cubic, evaluated term by term (exact for integer x)."""
    _require_competition(insiders)
    M = insiders
    return (
        (M - 1) ** 2 * x**3
        - 4 * (M + 1) * (M - 1) ** 2 * x**2
        + (M * M - 1) * (6 * M * M - 4) * x
        + (M + 1) ** 2 * (4 * M * M - 3 * M**3)
    )


def cubic_f_shifted(insiders: int, eps):
    """``f(M - eps)`` expanded in powers of eps."""
    _require_competition(insiders)
    M = insiders
    return (
        -((M - 1) ** 2) * eps**3
        - (M - 1) ** 2 * (M + 4) * eps**2
        - (M - 1) * (M**3 + 3 * M * M + 4 * M - 4) * eps
        + 4 * M
    )


def _gaps(insiders: int, one=1.0) -> tuple:
    """Distances below M of the bracket ends: (M - lower, M - upper)."""
    M = insiders
    wide = one * 4 * M / ((M - 1) * (M**3 + 3 * M * M + 4 * M - 4))
    narrow = one * 4 * M / (M * M * (M + 1) ** 2 + 4)
    return wide, narrow


def a_bracket(insiders: int) -> tuple[float, float]:
    """Open interval known to contain A."""
    _require_competition(insiders)
    wide, narrow = _gaps(insiders)
    return insiders - wide, insiders - narrow


def _f_scale(insiders: int, x) -> float:
    M = insiders
    return (
        abs((M - 1) ** 2 * x**3)
        + abs(4 * (M + 1) * (M - 1) ** 2 * x**2)
        + abs((M * M - 1) * (6 * M * M - 4) * x)
        + abs((M + 1) ** 2 * (4 * M * M - 3 * M**3))
    )


def root_gap(insiders: int, one=1.0):
    """``M - A`` to the working precision of ``one``."""
    _require_competition(insiders)
    wide, narrow = _gaps(insiders, one)
    g = lambda e: cubic_f_shifted(insiders, e)  # noqa: E731
    # f(M - eps) decreases in eps: positive at the narrow gap, negative at the wide one
    return bisect(g, narrow, wide, error=BracketSignError)


@dataclass(frozen=True)
class AsymptoticReport:
    insiders: int
    A: float
    bracket: tuple[float, float]
    residual: float  # |f(A)| / sum of |terms of f| at A
    lambda_first: float
    beta_first: float
    z_var_limit: float  # each insider's own noise
    z_var_limit_common: float  # one noise shared by all insiders
    prior_var: float = 1.0
    noise_var: float = 1.0

    @property
    def decay_rate(self) -> float:
        """Share of residual variance surviving one auction in the limit."""
        return 1.0 - self.A / self.insiders


def limit_constant_A(insiders: int, prior_var: float = 1.0, noise_var: float = 1.0) -> AsymptoticReport:
    _require_competition(insiders)
    M = insiders
    lower, upper = a_bracket(M)
    A = M - root_gap(M)
    resid = abs(cubic_f(M, A)) / _f_scale(M, A)
    sd = math.sqrt(noise_var)
    return AsymptoticReport(
        insiders=M,
        A=A,
        bracket=(lower, upper),
        residual=resid,
        lambda_first=math.sqrt(prior_var * A) / ((M + 1) * sd),
        beta_first=math.sqrt(A) * sd / (M * math.sqrt(prior_var)),
        z_var_limit=noise_var * (1 - A / M),
        z_var_limit_common=noise_var / M * (1 - A / M),
        prior_var=prior_var,
        noise_var=noise_var,
    )


@dataclass(frozen=True)
class ContinuumLimits:
    """Limits of the equilibrium at interior times t in (0, 1) as N grows.

    ``beta_t`` is ``math.inf`` when intensity diverges.
    """

    insiders: int
    prior_var: float
    lambda_t: float
    beta_t: float
    z_var_t: float
    z_var_t_common: float
    lambda_first: float
    beta_first: float
    A: Optional[float] = None

    def residual_variance(self, t: float) -> float:
        if not 0 <= t <= 1:
            raise InvalidInput(f"t must lie in [0, 1], got {t}")
        if self.insiders == 1:
            return (1 - t) * self.prior_var
        return self.prior_var if t == 0 else 0.0

    @property
    def residual_variance_formula(self) -> str:
        return "(1-t)*Sigma0" if self.insiders == 1 else "0"


def theorem_limits(params: MarketParams) -> ContinuumLimits:
    """Interior-time and first-auction limits for the given market."""
    validate(params)
    M = params.insiders
    s2 = params.noise_var
    if M == 1:
        return ContinuumLimits(
            insiders=1,
            prior_var=params.prior_var,
            lambda_t=0.0,
            beta_t=0.0,
            z_var_t=s2,
            z_var_t_common=s2,
            lambda_first=0.0,
            beta_first=0.0,
        )
    rep = limit_constant_A(M, params.prior_var, s2)
    return ContinuumLimits(
        insiders=M,
        prior_var=params.prior_var,
        lambda_t=0.0,
        beta_t=math.inf,
        z_var_t=rep.z_var_limit,
        z_var_t_common=rep.z_var_limit_common,
        lambda_first=rep.lambda_first,
        beta_first=rep.beta_first,
        A=rep.A,
    )


@dataclass(frozen=True)
class DecayEnvelope:
    insiders: int
    t: float
    auctions: int
    steps: int  # floor(t N)
    rate: float  # 1 - A/M
    log_upper: float  # steps * log(rate)
    lower_is_asymptotic: bool = True  # lower side carries an o(N) term

    @property
    def upper(self) -> float:
        """Upper bound on Sigma_steps / Sigma_0 (may underflow to 0.0)."""
        return math.exp(self.log_upper)


def decay_envelope(insiders: int, t: float, auctions: int) -> DecayEnvelope:
    """Bound ``Sigma_{floor(tN)} / Sigma_0 <= (1 - A/M)**floor(tN)``.

    The same rate describes the lower side only up to an unquantified o(N)
    term in the exponent, so no numeric lower bound is returned.
    """
    _require_competition(insiders)
    if not 0 < t < 1:
        raise InvalidInput(f"t must lie in (0, 1), got {t}")
    if auctions < 2:
        raise InvalidInput(f"auctions must be >= 2, got {auctions}")
    gap = root_gap(insiders)
    rate = gap / insiders
    steps = math.floor(t * auctions)
    return DecayEnvelope(insiders, t, auctions, steps, rate, steps * math.log(rate))


@dataclass(frozen=True)
class ProbeRow:
    auctions: int
    a1: float
    lambda1: float
    gap: float  # |a_1**2 - A|, computed in extended precision


def _default_digits(grid: list[int]) -> int:
    # the gap shrinks by roughly 0.44 per extra auction at M = 2, the slowest case
    return 40 + max(grid) // 2


def convergence_probe(
    insiders: int,
    prior_var: float = 1.0,
    noise_var: float = 1.0,
    grid: Iterable[int] = (2, 5, 10, 50, 100, 500),
    digits: Optional[int] = None,
) -> list[ProbeRow]:
    """First-auction values of the finite-N equilibrium along a grid of N.

    ``a1`` and ``lambda1`` come from the double-precision solver. The gap to
    the limit constant falls below double precision within a few dozen
    auctions, so it is evaluated with ``digits`` significant digits. Larger M
    converges faster, so gaps beyond the working precision (or below the
    double range) are reported as 0.0.
    """
    _require_competition(insiders)
    grid = sorted(set(int(n) for n in grid))
    if not grid or grid[0] < 1:
        raise InvalidInput("grid must contain auction counts >= 1")
    ctx = mpmath.MPContext()
    ctx.dps = digits if digits is not None else _default_digits(grid)
    one = ctx.mpf(1)
    A = insiders - root_gap(insiders, one)
    longest = a_squared_backward(insiders, grid[-1], one)

    rows = []
    for N in grid:
        a1 = math.sqrt(a_squared_sequence(insiders, N)[0])
        # first row of the forward pass; later rows may underflow for large N
        lam1 = math.sqrt(prior_var) * a1 / ((insiders + 1) * math.sqrt(noise_var))
        gap = abs(longest[grid[-1] - N] - A)
        rows.append(ProbeRow(N, a1, lam1, float(gap)))
    return rows
