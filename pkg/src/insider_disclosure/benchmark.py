"""No-disclosure benchmark with M competing insiders, and two-period comparisons.

The two-auction case has a closed form driven by the ratio ``k = lambda_1 /
lambda_2``, the unique root of a cubic on ``(0, (M+1)**2 / 2)``.

The N-auction solver is a reconstruction: it runs the two-auction backward
relations at every auction,

    beta_n      = (1 - 2 alpha_n lambda_n) / (lambda_n [M (1 - 2 alpha_n lambda_n) + 1])
    alpha_{n-1} = (1 - alpha_n lambda_n) / (lambda_n [M (1 - 2 alpha_n lambda_n) + 1]**2)
    lambda_n    = M beta_n Sigma_n / sigma_mu**2
    Sigma_n     = (1 - M beta_n lambda_n) Sigma_{n-1}

with ``alpha_N = 0``, and shoots on the terminal variance ``Sigma_N`` until
the implied prior matches. Outputs are labelled ``reconstructed``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .disclosure import two_period_closed_form
from .errors import SecondOrderViolated, ShootingDiverged, WrongN
from .model import MarketParams, TwoPeriodBundle, validate
from .roots import bisect, first_sign_change

MODEL_LABEL = "reconstructed"


def k_cubic(insiders: int, k: float) -> float:
    M = insiders
    return 2 * M * k**3 - (M + 1) ** 3 * k**2 - 2 * (M + 1) ** 2 * k + (M + 1) ** 4


def solve_k_cubic(insiders: int) -> float:
    """Root of the k-cubic on ``(0, (M+1)**2/2)``, bisected to working precision.

    The cubic is positive at 0 and equals ``-(M+1)**6 / 4`` at the upper end.
    """
    if insiders < 1:
        raise ValueError("insiders must be >= 1")
    return bisect(lambda k: k_cubic(insiders, k), 0.0, (insiders + 1) ** 2 / 2)


def two_period_no_disclosure(params: MarketParams) -> TwoPeriodBundle:
    validate(params)
    if params.auctions != 2:
        raise WrongN(params.auctions)
    M = params.insiders
    S0 = params.prior_var
    sd = params.noise_sd
    k = solve_k_cubic(M)
    den = (M + 1) ** 3 - 2 * k * M

    lam1 = math.sqrt(M * (M + 1) ** 2 * ((M + 1) ** 2 - 2 * k) * S0) / (den * sd)
    lam2 = math.sqrt(M * S0 / den) / sd
    beta1 = ((M + 1) ** 2 - 2 * k) / (lam1 * den)
    beta2 = 1 / (lam2 * (M + 1))
    sigma1 = (M + 1) ** 2 * S0 / den
    sigma2 = sigma1 / (M + 1)
    profit1 = beta1 * (1 - lam1 * M * beta1) * S0
    profit2 = beta2 * (1 - lam2 * M * beta2) * sigma1
    return TwoPeriodBundle(
        variant="no_disclosure",
        params=params,
        lam1=lam1,
        lam2=lam2,
        beta1=beta1,
        beta2=beta2,
        sigma1=sigma1,
        sigma2=sigma2,
        k=k,
        profit1=profit1,
        profit2=profit2,
    )


@dataclass(frozen=True)
class HSRow:
    index: int
    a: float
    lam: float
    beta: float
    alpha: float
    sigma_post: float


@dataclass(frozen=True)
class HSPath:
    params: MarketParams
    rows: tuple[HSRow, ...]
    alpha0: float
    iterations: int
    boundary_mismatch: float
    max_candidate_roots: int = 1
    label: str = MODEL_LABEL

    def column(self, name: str) -> list[float]:
        attr = {"n": "index", "lambda": "lam"}.get(name, name)
        return [getattr(r, attr) for r in self.rows]

    @property
    def k(self) -> float | None:
        if len(self.rows) != 2:
            return None
        return self.rows[0].lam / self.rows[1].lam


@dataclass
class _Backward:
    sigma0: float
    rows: list = field(default_factory=list)
    alpha0: float = 0.0
    candidates: int = 1


def _price_impact(insiders: int, alpha: float, sigma: float, noise_var: float) -> tuple[float, int]:
    """Solve ``lambda**2 s2 [M (1 - 2 a lambda) + 1] = M Sigma (1 - 2 a lambda)``.

    Works in ``u = 2 alpha lambda`` on (0, 1), where trading intensity stays
    positive; the scaled equation ``c u**2 (M (1-u) + 1) = 1 - u`` is -1 at 0
    and c > 0 at 1. Returns the smallest root and the number of sign changes
    seen on the scan grid.
    """
    M = insiders
    c = noise_var / (4 * alpha * alpha * M * sigma)

    def g(u):
        return c * u * u * (M * (1 - u) + 1) - (1 - u)

    lo, hi, changes = first_sign_change(g, 0.0, 1.0, 64)
    u = bisect(g, lo, hi)
    return u / (2 * alpha), changes


def _backward_pass(params: MarketParams, sigma_last: float) -> _Backward:
    M, N = params.insiders, params.auctions
    s2 = params.noise_var
    out = _Backward(sigma0=math.nan)

    sigma = sigma_last
    alpha = 0.0
    for n in range(N, 0, -1):
        if n == N:
            lam = math.sqrt(M * sigma / ((M + 1) * s2))
        else:
            lam, changes = _price_impact(M, alpha, sigma, s2)
            out.candidates = max(out.candidates, changes)
        if not lam * (1 - alpha * lam) > 0:
            raise SecondOrderViolated(n, lam, alpha)
        beta = lam * s2 / (M * sigma)
        sigma_prev = sigma / (1 - lam * lam * s2 / sigma)
        u = 1 - 2 * alpha * lam
        alpha_prev = (1 - alpha * lam) / (lam * (M * u + 1) ** 2)
        a = lam * (M + 1) * params.noise_sd / math.sqrt(sigma_prev)
        out.rows.append(HSRow(n, a, lam, beta, alpha, sigma))
        sigma, alpha = sigma_prev, alpha_prev
    out.rows.reverse()
    out.sigma0 = sigma
    out.alpha0 = alpha
    return out


def solve_hs_multiperiod(
    params: MarketParams, *, rtol: float = 1e-9, max_iter: int = 200, floor: float = 1e-280
) -> HSPath:
    """Shoot on the terminal variance until the implied prior variance matches.

    Bisection runs on ``log Sigma_N`` over ``[floor * Sigma_0, Sigma_0]``; the
    implied prior is increasing in the terminal variance.
    """
    validate(params)
    target = params.prior_var
    lo, hi = math.log(floor * target), math.log(target)

    def mismatch(log_last: float) -> tuple[float, _Backward]:
        back = _backward_pass(params, math.exp(log_last))
        return back.sigma0 / target - 1.0, back

    m_lo, _ = mismatch(lo)
    m_hi, back = mismatch(hi)
    if not (m_lo < 0 <= m_hi):
        raise ShootingDiverged(
            f"terminal variance bracket does not straddle the prior (mismatch {m_lo!r}, {m_hi!r})"
        )
    best = back
    best_err = abs(m_hi)
    it = 0
    for it in range(1, max_iter + 1):
        mid = (lo + hi) / 2
        m, back = mismatch(mid)
        if abs(m) < best_err:
            best, best_err = back, abs(m)
        if best_err <= rtol:
            break
        if m < 0:
            lo = mid
        else:
            hi = mid
    if best_err > rtol:
        raise ShootingDiverged(f"boundary mismatch {best_err!r} after {max_iter} iterations")
    return HSPath(
        params=params,
        rows=tuple(best.rows),
        alpha0=best.alpha0,
        iterations=it,
        boundary_mismatch=best_err,
        max_candidate_roots=best.candidates,
    )


# -- two-period comparisons -------------------------------------------------


@dataclass(frozen=True)
class Comparison:
    name: str
    ours: float
    theirs: float
    expected: str  # "<", ">" or "="

    @property
    def ratio(self) -> float:
        return self.ours / self.theirs

    @property
    def holds(self) -> bool:
        if self.expected == "<":
            return self.ours < self.theirs
        if self.expected == ">":
            return self.ours > self.theirs
        return math.isclose(self.ours, self.theirs, rel_tol=1e-12)


@dataclass(frozen=True)
class ComparisonReport:
    insiders: int
    versus_monopolist: tuple[Comparison, ...]
    versus_no_disclosure: tuple[Comparison, ...]

    @property
    def all_hold(self) -> bool:
        return all(c.holds for c in self.versus_monopolist + self.versus_no_disclosure)

    def get(self, name: str) -> Comparison:
        for c in self.versus_monopolist + self.versus_no_disclosure:
            if c.name == name:
                return c
        raise KeyError(name)


def lambda1_monopolist_ratio(insiders: int) -> float:
    """Analytic first-auction price-impact ratio against a single insider."""
    M = insiders
    return math.sqrt(8 * M**3 / (4 + M * M * (M + 1) ** 2))


def compare_two_period(params: MarketParams) -> ComparisonReport:
    """Two-auction disclosure equilibrium against (i) the same market with a
    single insider and (ii) the no-disclosure market with the same M."""
    validate(params)
    if params.auctions != 2:
        raise WrongN(params.auctions)
    M = params.insiders
    ours = two_period_closed_form(params)
    mono = two_period_closed_form(MarketParams(1, 2, params.prior_mean, params.prior_var, params.noise_var))
    hs = two_period_no_disclosure(params)

    if M == 1:
        lam1_rel = "="
    else:
        lam1_rel = ">" if M <= 5 else "<"
    rel = (lambda r: "=") if M == 1 else (lambda r: r)
    vs_mono = (
        Comparison("lambda1_vs_monopolist", ours.lam1, mono.lam1, lam1_rel),
        Comparison("lambda2_vs_monopolist", ours.lam2, mono.lam2, rel("<")),
        Comparison("beta1_vs_monopolist", ours.beta1, mono.beta1, rel("<")),
        Comparison("beta2_vs_monopolist", ours.beta2, mono.beta2, rel(">")),
        Comparison("sigma1_vs_monopolist", ours.sigma1, mono.sigma1, rel("<")),
        Comparison("profit1_vs_monopolist", ours.profit1, mono.profit1, rel("<")),
        Comparison("profit2_vs_monopolist", ours.profit2, mono.profit2, rel("<")),
    )
    vs_hs = (
        Comparison("lambda1_vs_no_disclosure", ours.lam1, hs.lam1, "<"),
        Comparison("lambda2_vs_no_disclosure", ours.lam2, hs.lam2, "<"),
        Comparison("beta1_vs_no_disclosure", ours.beta1, hs.beta1, ">"),
        Comparison("beta2_vs_no_disclosure", ours.beta2, hs.beta2, ">"),
        Comparison("sigma1_vs_no_disclosure", ours.sigma1, hs.sigma1, "<"),
    )
    return ComparisonReport(M, vs_mono, vs_hs)
