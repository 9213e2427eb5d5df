"""Domain types shared by the solvers, the simulator and the CLI.

Every variance is stored as a variance, never as a standard deviation.
Auctions are indexed 1..N; pre-trade quantities live on the path object
(``alpha0``, ``delta0``) or on the parameters (``prior_var``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Integral, Real
from typing import Optional

import numpy as np

from .errors import InvalidParams


@dataclass(frozen=True)
class MarketParams:
    """Exogenous inputs: insider count M, auction count N, prior of v, noise variance."""

    insiders: int
    auctions: int
    prior_mean: float = 0.0
    prior_var: float = 1.0
    noise_var: float = 1.0

    @property
    def noise_sd(self) -> float:
        return math.sqrt(self.noise_var)


def _is_int(x) -> bool:
    return isinstance(x, Integral) and not isinstance(x, bool)


def _is_real(x) -> bool:
    return isinstance(x, Real) and not isinstance(x, bool) and math.isfinite(x)


def validate(params: MarketParams) -> MarketParams:
    """Return ``params`` unchanged, or raise :class:`InvalidParams` for the first bad field."""
    if not _is_int(params.insiders) or params.insiders < 1:
        raise InvalidParams("insiders", "integer >= 1", params.insiders)
    if not _is_int(params.auctions) or params.auctions < 1:
        raise InvalidParams("auctions", "integer >= 1", params.auctions)
    if not _is_real(params.prior_mean):
        raise InvalidParams("prior_mean", "finite real", params.prior_mean)
    if not _is_real(params.prior_var) or params.prior_var <= 0:
        raise InvalidParams("prior_var", "prior_var > 0", params.prior_var)
    if not _is_real(params.noise_var) or params.noise_var <= 0:
        raise InvalidParams("noise_var", "noise_var > 0", params.noise_var)
    return params


@dataclass(frozen=True)
class AuctionCoefficients:
    """Equilibrium coefficients of auction ``index``.

    ``alpha``/``delta`` describe the continuation value *after* this auction;
    ``sigma_post`` is the variance of v after the trade is disclosed;
    ``z_var`` is the variance of each insider's own dissimulation noise.
    """

    index: int
    a: float
    lam: float
    beta: float
    gamma: float
    alpha: float
    delta: float
    sigma_post: float
    z_var: float


# CSV/JSON column name -> attribute name
COLUMNS = {
    "n": "index",
    "a": "a",
    "lambda": "lam",
    "beta": "beta",
    "gamma": "gamma",
    "alpha": "alpha",
    "delta": "delta",
    "sigma_post": "sigma_post",
    "z_var": "z_var",
}


@dataclass(frozen=True)
class EquilibriumPath:
    params: MarketParams
    rows: tuple[AuctionCoefficients, ...]
    alpha0: float
    delta0: float
    ex_ante_profit: float

    def __post_init__(self):
        if len(self.rows) != self.params.auctions:
            raise ValueError("one row per auction required")
        if [r.index for r in self.rows] != list(range(1, len(self.rows) + 1)):
            raise ValueError("row indices must run 1..N")

    def column(self, name: str) -> np.ndarray:
        attr = COLUMNS.get(name, name)
        return np.array([getattr(r, attr) for r in self.rows], dtype=float)

    def sigma_pre(self) -> np.ndarray:
        """Variance before each auction: Sigma_0 .. Sigma_{N-1}."""
        post = self.column("sigma_post")
        return np.concatenate(([self.params.prior_var], post[:-1]))


@dataclass(frozen=True)
class TwoPeriodBundle:
    """Closed-form two-period values for one of the two market designs.

    ``variant`` is ``"disclosure"`` or ``"no_disclosure"``. Fields that do not
    apply to a variant are ``None``.
    """

    variant: str
    params: MarketParams
    lam1: float
    lam2: float
    beta1: float
    beta2: float
    sigma1: float
    profit1: float
    profit2: float
    sigma2: Optional[float] = None
    gamma1: Optional[float] = None
    z_var1: Optional[float] = None
    k: Optional[float] = None
    profit1_alternative: Optional[float] = None

    @property
    def total_profit(self) -> float:
        return self.profit1 + self.profit2
