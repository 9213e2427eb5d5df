import math

import numpy as np
import pytest

from insider_disclosure.benchmark import (
    MODEL_LABEL,
    compare_two_period,
    k_cubic,
    lambda1_monopolist_ratio,
    solve_hs_multiperiod,
    solve_k_cubic,
    two_period_no_disclosure,
)
from insider_disclosure.disclosure import solve
from insider_disclosure.errors import WrongN
from insider_disclosure.model import MarketParams


def cubic_root_oracle(M):
    roots = np.roots([2 * M, -(M + 1) ** 3, -2 * (M + 1) ** 2, (M + 1) ** 4])
    real = [r.real for r in roots if abs(r.imag) < 1e-12 and 0 < r.real < (M + 1) ** 2 / 2]
    assert len(real) == 1
    return real[0]


@pytest.mark.parametrize("M", range(1, 11))
def test_k_root_unique_and_matches_oracle(M):
    k = solve_k_cubic(M)
    assert 0 < k < (M + 1) ** 2 / 2
    assert k == pytest.approx(cubic_root_oracle(M), rel=1e-12)
    assert abs(k_cubic(M, k)) < 1e-9 * (M + 1) ** 4


def test_k_regression_values():
    assert solve_k_cubic(2) == pytest.approx(1.5927, abs=5e-4)
    assert solve_k_cubic(2) == pytest.approx(1.5927196665, abs=1e-9)
    assert solve_k_cubic(1) == pytest.approx(1.1099163, abs=1e-6)


def test_two_period_no_disclosure_values():
    b = two_period_no_disclosure(MarketParams(2, 2))
    k = b.k
    assert b.sigma1 == pytest.approx(1 / (3 - 4 * k / 9), rel=1e-12)
    assert b.sigma1 == pytest.approx(0.43628, abs=1e-5)
    assert b.lam1 == pytest.approx(0.49592, abs=1e-5)
    assert b.lam2 == pytest.approx(0.31137, abs=1e-5)
    assert b.beta1 == pytest.approx(0.56836, abs=1e-5)
    assert b.beta2 == pytest.approx(1.07055, abs=1e-5)
    assert b.sigma2 == pytest.approx(b.sigma1 / 3, rel=1e-12)
    assert b.lam1 / b.lam2 == pytest.approx(k, rel=1e-12)


def test_single_insider_two_period_halves_variance():
    b = two_period_no_disclosure(MarketParams(1, 2))
    assert b.sigma2 == pytest.approx(b.sigma1 / 2)


def test_wrong_n():
    with pytest.raises(WrongN):
        two_period_no_disclosure(MarketParams(2, 3))
    with pytest.raises(WrongN):
        compare_two_period(MarketParams(2, 4))


@pytest.mark.parametrize("M", range(1, 11))
@pytest.mark.parametrize("s0, s2", [(1.0, 1.0), (4.0, 0.5)])
def test_shooting_matches_closed_form(M, s0, s2):
    p = MarketParams(M, 2, prior_var=s0, noise_var=s2)
    cf = two_period_no_disclosure(p)
    hs = solve_hs_multiperiod(p)
    r1, r2 = hs.rows
    for got, want in [(r1.lam, cf.lam1), (r2.lam, cf.lam2), (r1.beta, cf.beta1),
                      (r2.beta, cf.beta2), (r1.sigma_post, cf.sigma1), (r2.sigma_post, cf.sigma2)]:
        assert got == pytest.approx(want, rel=1e-8)
    assert hs.label == MODEL_LABEL == "reconstructed"


def test_four_auction_regression():
    hs = solve_hs_multiperiod(MarketParams(2, 4))
    np.testing.assert_allclose(
        hs.column("lambda"),
        [0.4999997255694546, 0.353424790744292, 0.24281108328149928, 0.15245060909439023],
        rtol=1e-7,
    )
    np.testing.assert_allclose(
        hs.column("sigma_post"),
        [0.5005240266404859, 0.23972264579661617, 0.10458534695962761, 0.03486178231987586],
        rtol=1e-7,
    )
    assert hs.rows[0].lam > solve(MarketParams(2, 4)).rows[0].lam
    assert hs.max_candidate_roots == 1


@pytest.mark.parametrize("N", [4, 20, 50])
def test_shooting_boundary_and_shape(N):
    hs = solve_hs_multiperiod(MarketParams(2, N))
    assert hs.boundary_mismatch <= 1e-9
    sig = [1.0] + hs.column("sigma_post")
    assert all(0 < b < a for a, b in zip(sig, sig[1:]))
    ours = solve(MarketParams(2, N))
    assert all(a < b for a, b in zip(ours.column("lambda"), hs.column("lambda")))
    assert all(a <= b for a, b in zip(ours.column("sigma_post"), hs.column("sigma_post")))


def test_first_auction_impact_grows_when_noise_scales_with_interval():
    # with per-auction noise variance sigma**2 / N (auctions spread over a unit
    # interval) the benchmark's first-auction impact diverges as N grows
    lam1 = [solve_hs_multiperiod(MarketParams(2, N, noise_var=1.0 / N)).rows[0].lam for N in (2, 4, 10, 50)]
    assert all(b > a for a, b in zip(lam1, lam1[1:]))
    assert lam1[-1] > 3.0


def test_first_auction_impact_bounded_with_unit_interval_noise():
    lam1 = [solve_hs_multiperiod(MarketParams(2, N)).rows[0].lam for N in (2, 4, 10, 50)]
    assert max(lam1) < 0.5


def test_lambda1_crossover_between_five_and_six():
    assert lambda1_monopolist_ratio(5) == pytest.approx(math.sqrt(1000 / 904), rel=1e-14)
    assert lambda1_monopolist_ratio(6) == pytest.approx(math.sqrt(1728 / 1768), rel=1e-14)
    assert lambda1_monopolist_ratio(5) > 1 > lambda1_monopolist_ratio(6)
    for M in (5, 6):
        rep = compare_two_period(MarketParams(M, 2))
        assert rep.get("lambda1_vs_monopolist").ratio == pytest.approx(lambda1_monopolist_ratio(M), rel=1e-12)


@pytest.mark.parametrize("M", range(1, 51))
def test_two_period_comparisons_hold(M):
    rep = compare_two_period(MarketParams(M, 2, prior_var=2.0, noise_var=0.7))
    failed = [c.name for c in rep.versus_monopolist + rep.versus_no_disclosure if not c.holds]
    assert not failed


def test_comparison_lookup():
    rep = compare_two_period(MarketParams(2, 2))
    with pytest.raises(KeyError):
        rep.get("nope")
    assert rep.get("sigma1_vs_no_disclosure").expected == "<"
