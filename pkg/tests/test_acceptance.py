"""Acceptance criteria, one test per criterion.

Each criterion also prints a single ``criterion N: PASS|FAIL ...`` line at
the end of the pytest run (see conftest.py). Run this file directly to get
the same lines without pytest.
"""
import math
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from insider_disclosure.asymptotics import (
    a_bracket,
    convergence_probe,
    cubic_f,
    decay_envelope,
    limit_constant_A,
)
from insider_disclosure.benchmark import (
    compare_two_period,
    lambda1_monopolist_ratio,
    solve_hs_multiperiod,
    solve_k_cubic,
    two_period_no_disclosure,
)
from insider_disclosure.cli import main as cli_main
from insider_disclosure.disclosure import (
    a_squared_sequence,
    log_variance_ratios,
    solve,
    two_period_closed_form,
)
from insider_disclosure.model import MarketParams
from insider_disclosure.simulator import SimulationConfig, convention_equivalence, simulate_paths

RESULTS: dict[int, str] = {}


def record(number: int, title: str, ok: bool, detail: str, seconds: float) -> bool:
    RESULTS[number] = (f"criterion {number}: {'PASS' if ok else 'FAIL'} {title}; "
                       f"{detail} ({seconds:.3f} s)")
    return ok


def rel(a, b):
    return abs(a - b) / abs(b)


def criterion_1() -> bool:
    t0 = time.perf_counter()
    worst = 0.0
    for M in range(1, 11):
        for s0 in (0.25, 1.0, 4.0):
            for s2 in (0.5, 1.0, 2.0):
                p = MarketParams(M, 2, prior_var=s0, noise_var=s2)
                path = solve(p)
                cf = two_period_closed_form(p)
                r1, r2 = path.rows
                worst = max(worst, rel(r1.lam, cf.lam1), rel(r2.lam, cf.lam2), rel(r1.gamma, cf.gamma1),
                            rel(r1.beta, cf.beta1), rel(r2.beta, cf.beta2), rel(r1.sigma_post, cf.sigma1))
    dt = time.perf_counter() - t0
    return record(1, "two-period disclosure oracle", worst <= 1e-10,
                  f"max relative error {worst:.2e} <= 1e-10", dt)


def criterion_2() -> bool:
    t0 = time.perf_counter()
    lam_dev = sig_dev = 0.0
    for N in range(2, 201):
        path = solve(MarketParams(1, N))
        lam = path.column("lambda")
        lam_dev = max(lam_dev, float(np.max(np.abs(lam - lam[0])) / lam[0]))
        target = 1.0 - np.arange(1, N + 1) / N
        sig_dev = max(sig_dev, float(np.max(np.abs(path.column("sigma_post") - target))))
    dt = time.perf_counter() - t0
    ok = lam_dev <= 1e-12 and sig_dev <= 1e-12
    return record(2, "single-insider reduction", ok,
                  f"lambda spread {lam_dev:.2e}, Sigma error {sig_dev:.2e}", dt)


def criterion_3() -> bool:
    t0 = time.perf_counter()
    k = solve_k_cubic(2)
    ratio = solve(MarketParams(2, 2)).rows[0].sigma_post / 1.0
    f_ok = all(cubic_f(M, M) == 4 * M for M in range(2, 51))
    dt = time.perf_counter() - t0
    ok = abs(k - 1.5927) <= 5e-4 and abs(ratio - 0.1) <= 1e-12 and f_ok
    return record(3, "point values", ok,
                  f"k(2)={k:.7f}, Sigma1/Sigma0={ratio!r}, f(M)=4M for M=2..50: {f_ok}", dt)


def criterion_4() -> bool:
    t0 = time.perf_counter()
    failed = []
    for M in range(2, 51):
        rep = compare_two_period(MarketParams(M, 2))
        failed += [f"M={M}:{c.name}" for c in rep.versus_monopolist if not c.holds]
        if M == 2:
            failed += [f"M=2:{c.name}" for c in rep.versus_no_disclosure if not c.holds]
    cross = lambda1_monopolist_ratio(5) > 1 > lambda1_monopolist_ratio(6)
    r5 = compare_two_period(MarketParams(5, 2)).get("lambda1_vs_monopolist").ratio
    r6 = compare_two_period(MarketParams(6, 2)).get("lambda1_vs_monopolist").ratio
    cross = cross and r5 > 1 > r6
    dt = time.perf_counter() - t0
    ok = not failed and cross
    return record(4, "two-period inequality suite", ok,
                  f"violations {failed or 'none'}, lambda1 ratio M=5 {r5:.6f}, M=6 {r6:.6f}", dt)


def criterion_5() -> bool:
    t0 = time.perf_counter()
    worst = 0.0
    inside = True
    for M in range(2, 101):
        rep = limit_constant_A(M)
        lo, hi = a_bracket(M)
        inside = inside and lo < rep.A < hi
        worst = max(worst, rep.residual)
    A2 = limit_constant_A(2).A
    dt = time.perf_counter() - t0
    ok = inside and worst <= 1e-10 and abs(A2 - 1.69171) <= 1e-4
    return record(5, "root A", ok,
                  f"all inside bracket: {inside}, max relative residual {worst:.1e}, A(2)={A2:.7f}", dt)


def criterion_6() -> bool:
    t0 = time.perf_counter()
    mono_bad = range_bad = 0
    for M in range(2, 21):
        A = limit_constant_A(M).A
        for N in range(2, 501):
            b = np.asarray(a_squared_sequence(M, N))
            a = np.sqrt(b)
            mono_bad += int(np.sum(a[:-1] > a[1:]))
            range_bad += int(np.sum(b[:-1] < A - 1e-9))
    dt = time.perf_counter() - t0
    ok = mono_bad == 0 and range_bad == 0 and dt < 1.0
    return record(6, "monotonicity and range", ok,
                  f"order violations {mono_bad}, range violations {range_bad}", dt)


def criterion_7() -> bool:
    t0 = time.perf_counter()
    env_bad = []
    for M in (2, 3, 4):
        for t in (0.25, 0.5, 0.75):
            for N in (20, 100, 400):
                env = decay_envelope(M, t, N)
                # log-space comparison: Sigma itself underflows for the larger grids
                log_ratio = log_variance_ratios(M, N)[env.steps - 1]
                if not log_ratio <= env.log_upper + math.log1p(1e-9):
                    env_bad.append((M, t, N))
    rows = convergence_probe(2, 1.0, 1.0, (2, 5, 10, 50, 100, 500))
    gaps = [r.gap for r in rows]
    decreasing = all(b < a for a, b in zip(gaps, gaps[1:]))
    lam_limit = math.sqrt(limit_constant_A(2).A) / 3
    lam_err = abs(rows[-1].lambda1 - lam_limit)
    dt = time.perf_counter() - t0
    ok = not env_bad and decreasing and lam_err <= 1e-3
    return record(7, "decay envelope and first-auction convergence", ok,
                  f"envelope violations {env_bad or 'none'}, gaps decreasing {decreasing} "
                  f"(last {gaps[-1]:.1e}), |lambda1(500) - limit| {lam_err:.1e}", dt)


def criterion_8() -> bool:
    t0 = time.perf_counter()
    worst = 0.0
    for M in range(1, 11):
        p = MarketParams(M, 2)
        cf = two_period_no_disclosure(p)
        hs = solve_hs_multiperiod(p)
        r1, r2 = hs.rows
        worst = max(worst, rel(r1.lam, cf.lam1), rel(r2.lam, cf.lam2), rel(r1.beta, cf.beta1),
                    rel(r2.beta, cf.beta2), rel(r1.sigma_post, cf.sigma1), rel(r2.sigma_post, cf.sigma2))
    mismatch = max(solve_hs_multiperiod(MarketParams(2, N)).boundary_mismatch for N in (4, 20, 50))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-8 and mismatch <= 1e-9 and dt < 1.0
    return record(8, "no-disclosure benchmark oracle", ok,
                  f"N=2 max relative error {worst:.1e}, max boundary mismatch {mismatch:.1e}", dt)


def criterion_9() -> bool:
    t0 = time.perf_counter()
    path = solve(MarketParams(2, 2))
    cfg = SimulationConfig(paths=200_000, master_seed=42, workers=1)
    rep = simulate_paths(path, cfg)
    slopes = all(abs(s.lambda_hat - s.lam) <= 3 * s.lambda_se for s in rep.auctions)
    var_y = all(abs(s.var_y - 3.0) <= 3 * s.var_y_se for s in rep.auctions)
    profit = abs(rep.profit_mean - (path.alpha0 * 1.0 + path.delta0)) <= 3 * rep.profit_se
    reveal = rep.max_final_gap <= 1e-9
    other = simulate_paths(path, SimulationConfig(200_000, 42, "common"))
    try:
        equivalent = convention_equivalence(rep, other).ok
    except Exception:
        equivalent = False
    dt = time.perf_counter() - t0
    ok = slopes and var_y and profit and reveal and equivalent and dt < 30
    z = (rep.profit_mean - path.ex_ante_profit) / rep.profit_se
    return record(9, "Monte Carlo consistency", ok,
                  f"slopes {slopes}, Var(y) {var_y}, profit z={z:+.2f}, "
                  f"max |p*_N - v| {rep.max_final_gap:.1e}, conventions agree {equivalent}", dt)


def criterion_10() -> bool:
    t0 = time.perf_counter()
    with tempfile.TemporaryDirectory() as tmp:
        a, b = Path(tmp, "a"), Path(tmp, "b")
        code_a = _quiet(["figures", "--outdir", str(a)])
        code_b = _quiet(["figures", "--outdir", str(b)])
        names = sorted(p.name for p in a.iterdir())
        same = names == sorted(p.name for p in b.iterdir()) and all(
            (a / n).read_bytes() == (b / n).read_bytes() for n in names)
    dt = time.perf_counter() - t0
    ok = code_a == 0 and code_b == 0 and same and len(names) == 26
    return record(10, "figure datasets", ok,
                  f"exit codes {code_a}/{code_b}, {len(names)} files, byte-identical {same}", dt)


def _quiet(argv) -> int:
    import contextlib
    import io

    with contextlib.redirect_stdout(io.StringIO()):
        return cli_main(argv)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def test_criterion_1():
    assert criterion_1(), RESULTS[1]


def test_criterion_2():
    assert criterion_2(), RESULTS[2]


def test_criterion_3():
    assert criterion_3(), RESULTS[3]


def test_criterion_4():
    assert criterion_4(), RESULTS[4]


def test_criterion_5():
    assert criterion_5(), RESULTS[5]


def test_criterion_6():
    assert criterion_6(), RESULTS[6]


def test_criterion_7():
    assert criterion_7(), RESULTS[7]


def test_criterion_8():
    assert criterion_8(), RESULTS[8]


def test_criterion_9():
    assert criterion_9(), RESULTS[9]


def test_criterion_10():
    assert criterion_10(), RESULTS[10]


def test_cli_entry_point_runs():
    proc = subprocess.run([sys.executable, "-m", "insider_disclosure", "limits", "--insiders", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "A,1.69165" in proc.stdout


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    for n in sorted(RESULTS):
        print(RESULTS[n])
    sys.exit(0 if all(results) else 1)
