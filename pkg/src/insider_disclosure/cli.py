"""Batch command-line front end.

Subcommands: ``solve``, ``benchmark``, ``limits``, ``simulate`` and
``figures``. Values come from built-in defaults, then an optional flat
``key=value`` config file, then command-line flags, each overriding the
previous. Tables are written as CSV (``# key=value`` metadata lines, a header,
rows, ``# key=value`` trailer lines) or as the equivalent JSON document.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 a statistical
check (``simulate --strict``) or a figure assertion failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from .asymptotics import limit_constant_A, theorem_limits
from .benchmark import MODEL_LABEL, solve_hs_multiperiod, solve_k_cubic
from .disclosure import solve, verify_difference_system
from .errors import InvalidInput, ModelError, MonopolistHasNoA, NumericalFailure
from .model import COLUMNS, MarketParams, validate
from .simulator import CONVENTIONS, SimulationConfig, compare_conventions, simulate_paths

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_STATS = 0, 2, 3, 4

MARKET_DEFAULTS = {"prior_mean": 0.0, "prior_var": 1.0, "noise_var": 1.0}
DEFAULTS = {
    "solve": {**MARKET_DEFAULTS, "format": "csv", "out": None},
    "benchmark": {**MARKET_DEFAULTS, "format": "csv", "out": None},
    "limits": {**MARKET_DEFAULTS, "want_A": False, "format": "csv", "out": None},
    "simulate": {
        **MARKET_DEFAULTS,
        "paths": 100_000,
        "seed": 0,
        "convention": "independent",
        "strict": False,
        "check_equivalence": False,
        "workers": 1,
        "format": "csv",
        "out": None,
    },
    "figures": {
        "prior_var": 1.0,
        "noise_var": 1.0,
        "which": [1, 2, 3, 4, 5, 6],
        "n_auctions": None,
        "outdir": "figures",
    },
}
REQUIRED = {
    "solve": ("insiders", "auctions"),
    "benchmark": ("insiders", "auctions"),
    "limits": ("insiders",),
    "simulate": ("insiders", "auctions"),
    "figures": (),
}


# -- output ------------------------------------------------------------------


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    trailer: dict = field(default_factory=dict)


def fmt(x) -> str:
    """Locale-independent text for one cell: floats at 17 significant digits."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


def _json_value(x):
    if isinstance(x, float) and not math.isfinite(x):
        return fmt(x)
    return x


def render(table: Table, fmt_name: str) -> str:
    if fmt_name == "json":
        doc = {
            "meta": {k: _json_value(v) for k, v in table.meta.items()},
            "columns": table.columns,
            "rows": [[_json_value(v) for v in row] for row in table.rows],
            "trailer": {k: _json_value(v) for k, v in table.trailer.items()},
        }
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"
    buf = io.StringIO()
    for k, v in table.meta.items():
        buf.write(f"# {k}={fmt(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([fmt(v) for v in row])
    for k, v in table.trailer.items():
        buf.write(f"# {k}={fmt(v)}\n")
    return buf.getvalue()


def emit(table: Table, out: Optional[str], fmt_name: str) -> None:
    text = render(table, fmt_name)
    if out in (None, "-"):
        sys.stdout.write(text)
        return
    path = Path(out)
    if path.parent != Path("."):
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def read_table(path) -> Table:
    """Parse a CSV file written by :func:`render` back into a :class:`Table`.

    Values stay as strings.
    """
    meta, trailer, lines = {}, {}, []
    seen_header = False
    with open(path, encoding="utf-8", newline="") as fh:
        for line in fh:
            if line.startswith("# "):
                k, _, v = line[2:].rstrip("\n").partition("=")
                (trailer if seen_header else meta)[k] = v
            else:
                seen_header = True
                lines.append(line)
    rows = list(csv.reader(lines))
    return Table(columns=rows[0], rows=rows[1:], meta=meta, trailer=trailer)


# -- config ------------------------------------------------------------------


def read_config(path) -> dict[str, str]:
    """Flat ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidInput(f"config: cannot read {path}: {exc.strerror}") from None
    for num, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InvalidInput(f"config line {num}: expected key=value, got {raw!r}")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _convert(action: argparse.Action, key: str, value: str):
    try:
        if action.nargs == 0:
            low = value.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(value)
        conv = action.type or str
        if action.nargs == "+":
            parts = value.replace(",", " ").split()
            if not parts:
                raise ValueError(value)
            result = [conv(p) for p in parts]
            bad = [r for r in result if action.choices is not None and r not in action.choices]
        else:
            result = conv(value)
            bad = [result] if action.choices is not None and result not in action.choices else []
    except ValueError:
        raise InvalidInput(f"config: bad value for {key}: {value!r}") from None
    if bad:
        raise InvalidInput(f"config: {key}: {bad[0]!r} not in {list(action.choices)}")
    return result


def merge_settings(command: str, sub: argparse.ArgumentParser, flags: dict) -> dict:
    settings = dict(DEFAULTS[command])
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
    config = flags.pop("config", None)
    if config is not None:
        for key, value in read_config(config).items():
            if key not in actions:
                raise InvalidInput(f"config: unknown key {key!r} for {command}")
            settings[key] = _convert(actions[key], key, value)
    settings.update(flags)
    for key in REQUIRED[command]:
        if settings.get(key) is None:
            raise InvalidInput(f"{key}: required (flag --{key.replace('_', '-')} or config key)")
    return settings


# -- parser ------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _market(sub: argparse.ArgumentParser, auctions: bool = True) -> None:
    sub.add_argument("--insiders", type=int, help="number of insiders M (>= 1)")
    if auctions:
        sub.add_argument("--auctions", type=int, help="number of auctions N (>= 1)")
    sub.add_argument("--prior-mean", type=float, help="prior mean of the asset value (default 0)")
    sub.add_argument("--prior-var", type=float, help="prior variance of the asset value (default 1)")
    sub.add_argument("--noise-var", type=float, help="noise-trade variance per auction (default 1)")


def _output(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--out", help="output file (default: stdout)")
    sub.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="insider-disclosure",
        description="Sequential-auction insider trading with post-trade disclosure.",
    )
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        sub = subs.add_parser(name, help=help_text, argument_default=argparse.SUPPRESS)
        sub.add_argument("--config", help="flat key=value file; flags override it")
        return sub

    sub = add("solve", "equilibrium with disclosure, one row per auction")
    _market(sub)
    _output(sub)

    sub = add("benchmark", "no-disclosure benchmark (multi-auction solver is reconstructed)")
    _market(sub)
    _output(sub)

    sub = add("limits", "frequent-trading limits and the constant A")
    _market(sub, auctions=False)
    sub.add_argument("--want-A", dest="want_A", action="store_true",
                     help="fail if A is undefined (single insider)")
    _output(sub)

    sub = add("simulate", "seeded Monte Carlo check of the equilibrium")
    _market(sub)
    sub.add_argument("--paths", type=int, help="number of simulated paths (default 100000)")
    sub.add_argument("--seed", type=int, help="master seed (default 0)")
    sub.add_argument("--convention", choices=CONVENTIONS, help="dissimulation noise convention")
    sub.add_argument("--strict", action="store_true", help="exit 4 if any check fails")
    sub.add_argument("--check-equivalence", action="store_true",
                     help="also run the other noise convention and compare")
    sub.add_argument("--workers", type=int, help="worker threads (results do not depend on it)")
    _output(sub)

    sub = add("figures", "write the data series behind the figures as CSV")
    sub.add_argument("--which", type=int, nargs="+", help="figure ids 1..6 (default all)")
    sub.add_argument("--n-auctions", type=int, nargs="+", help="override the auction-count grid")
    sub.add_argument("--prior-var", type=float, help="prior variance (default 1)")
    sub.add_argument("--noise-var", type=float, help="noise-trade variance (default 1)")
    sub.add_argument("--outdir", help="directory for the CSV files (default ./figures)")
    return parser


def _params(s: dict, auctions: Optional[int] = None) -> MarketParams:
    return validate(MarketParams(
        insiders=s["insiders"],
        auctions=auctions if auctions is not None else s["auctions"],
        prior_mean=s["prior_mean"],
        prior_var=s["prior_var"],
        noise_var=s["noise_var"],
    ))


def _market_meta(p: MarketParams) -> dict:
    return {
        "insiders": p.insiders,
        "auctions": p.auctions,
        "prior_mean": p.prior_mean,
        "prior_var": p.prior_var,
        "noise_var": p.noise_var,
    }


# -- commands ----------------------------------------------------------------


def cmd_solve(s: dict) -> int:
    p = _params(s)
    path = solve(p)
    resid = verify_difference_system(path)
    t = Table(columns=list(COLUMNS))
    t.meta = {"model": "disclosure", **_market_meta(p), "z_var": "per insider"}
    t.rows = [[getattr(r, attr) for attr in COLUMNS.values()] for r in path.rows]
    t.trailer = {
        "alpha0": path.alpha0,
        "delta0": path.delta0,
        "ex_ante_profit": path.ex_ante_profit,
        "max_residual": max(resid.max_residual.values()),
    }
    emit(t, s["out"], s["format"])
    return EXIT_OK


def cmd_benchmark(s: dict) -> int:
    p = _params(s)
    path = solve_hs_multiperiod(p)
    cols = ["n", "a", "lambda", "beta", "alpha", "sigma_post"]
    t = Table(columns=cols)
    t.meta = {"model": "no_disclosure", "label": MODEL_LABEL, **_market_meta(p),
              "iterations": path.iterations, "boundary_mismatch": path.boundary_mismatch}
    if p.auctions == 2:
        t.meta["k"] = solve_k_cubic(p.insiders)
        t.meta["lambda1_over_lambda2"] = path.k
    t.rows = [[r.index, r.a, r.lam, r.beta, r.alpha, r.sigma_post] for r in path.rows]
    t.trailer = {"alpha0": path.alpha0}
    emit(t, s["out"], s["format"])
    return EXIT_OK


def cmd_limits(s: dict) -> int:
    p = _params(s, auctions=1)
    M = p.insiders
    if s["want_A"] and M == 1:
        raise MonopolistHasNoA()
    lim = theorem_limits(p)
    t = Table(columns=["quantity", "value"])
    t.meta = {"model": "disclosure", "insiders": M, "prior_var": p.prior_var, "noise_var": p.noise_var}
    rows = [
        ("residual_variance", lim.residual_variance_formula),
        ("lambda_t", lim.lambda_t),
        ("beta_t", lim.beta_t),
        ("z_var_t", lim.z_var_t),
        ("z_var_t_common", lim.z_var_t_common),
    ]
    if M >= 2:
        rep = limit_constant_A(M, p.prior_var, p.noise_var)
        rows = [
            ("A", rep.A),
            ("bracket_lower", rep.bracket[0]),
            ("bracket_upper", rep.bracket[1]),
            ("relative_residual", rep.residual),
            ("decay_rate", rep.decay_rate),
            ("lambda_first", rep.lambda_first),
            ("beta_first", rep.beta_first),
        ] + rows
    t.rows = [list(r) for r in rows]
    emit(t, s["out"], s["format"])
    return EXIT_OK


_SIM_COLUMNS = [
    "n", "lambda", "lambda_hat", "lambda_se", "gamma", "gamma_hat", "gamma_se",
    "var_y_target", "var_y", "var_y_se", "sigma_post", "var_error", "var_error_se",
    "drift", "drift_se",
]


def cmd_simulate(s: dict) -> int:
    p = _params(s)
    cfg = SimulationConfig(paths=s["paths"], master_seed=s["seed"],
                           noise_convention=s["convention"], workers=s["workers"])
    path = solve(p)
    rep = simulate_paths(path, cfg)
    t = Table(columns=_SIM_COLUMNS)
    t.meta = {"model": "disclosure", **_market_meta(p), "paths": cfg.paths,
              "seed": cfg.master_seed, "convention": cfg.noise_convention}
    t.rows = [[a.index, a.lam, a.lambda_hat, a.lambda_se, a.gamma, a.gamma_hat, a.gamma_se,
               a.var_y_target, a.var_y, a.var_y_se, a.sigma_post, a.var_error, a.var_error_se,
               a.drift, a.drift_se] for a in rep.auctions]
    t.trailer = {
        "paths_used": rep.paths_used,
        "excluded": rep.excluded,
        "profit_target": rep.profit_target,
        "profit_mean": rep.profit_mean,
        "profit_se": rep.profit_se,
        "max_final_gap": rep.max_final_gap,
        "final_gap_bound": rep.final_gap_bound,
    }
    for c in rep.checks:
        t.trailer[f"check:{c.name}"] = "pass" if c.passed else f"fail (z={c.z:.2f})"
    ok = rep.ok
    if s["check_equivalence"]:
        other = "common" if cfg.noise_convention == "independent" else "independent"
        rep_b = simulate_paths(path, SimulationConfig(cfg.paths, cfg.master_seed, other,
                                                      workers=cfg.workers))
        verdict = compare_conventions(rep, rep_b)
        bad = [c for c in verdict.comparisons if not c.passed]
        t.trailer["equivalence"] = "pass" if not bad else f"fail ({bad[0].name}, z={bad[0].z:.2f})"
        ok = ok and not bad
    emit(t, s["out"], s["format"])
    failed = sum(1 for c in rep.checks if not c.passed)
    print(f"simulate: {len(rep.checks) - failed}/{len(rep.checks)} checks pass", file=sys.stderr)
    if s["strict"] and not ok:
        return EXIT_STATS
    return EXIT_OK


# -- figures -----------------------------------------------------------------


@dataclass(frozen=True)
class Series:
    figure: int
    model: str  # "disclosure" or the benchmark label
    quantity: str  # "lambda" or "sigma"
    insiders: int
    auctions: int
    values: tuple[float, ...]  # lambda_1..N, or Sigma_0..N

    @property
    def filename(self) -> str:
        return f"fig{self.figure}_{self.model}_M{self.insiders}_N{self.auctions}.csv"


FIGURES = {
    # id: (quantity, insider counts, default auction grid, with benchmark)
    1: ("lambda", (1, 2, 10, 50), (10,), False),
    2: ("sigma", (1, 2, 3, 4), (10,), False),
    3: ("lambda", (2,), (4, 20, 50), True),
    4: ("sigma", (2,), (4, 20, 50), True),
    5: ("lambda", (2,), (4, 20, 40), False),
    6: ("sigma", (2,), (4, 20, 40), False),
}
SIGMA1_CLAIM = 0.05  # share of prior variance left after one auction, M = 3


def _disclosure_series(fig: int, quantity: str, p: MarketParams) -> Series:
    path = solve(p)
    if quantity == "lambda":
        vals = path.column("lambda").tolist()
    else:
        vals = [p.prior_var] + path.column("sigma_post").tolist()
    return Series(fig, "disclosure", quantity, p.insiders, p.auctions, tuple(vals))


def _benchmark_series(fig: int, quantity: str, p: MarketParams) -> Series:
    hs = solve_hs_multiperiod(p)
    if quantity == "lambda":
        vals = hs.column("lambda")
    else:
        vals = [p.prior_var] + hs.column("sigma_post")
    return Series(fig, MODEL_LABEL, quantity, p.insiders, p.auctions, tuple(vals))


@dataclass(frozen=True)
class Assertion:
    name: str
    passed: bool
    detail: str


def _figure_series(fig: int, grid, prior_var: float, noise_var: float):
    quantity, insiders, default_grid, with_hs = FIGURES[fig]
    series, asserts = [], []
    for N in grid or default_grid:
        for M in insiders:
            p = validate(MarketParams(M, N, 0.0, prior_var, noise_var))
            ours = _disclosure_series(fig, quantity, p)
            series.append(ours)
            if fig == 1 and M == 1:
                lam = ours.values
                dev = max(abs(x - lam[0]) for x in lam) / lam[0]
                asserts.append(Assertion(f"fig1 M=1 N={N} lambda constant", dev <= 1e-12,
                                         f"max relative deviation {dev:.3g}"))
            if fig == 2 and M == 3:
                ratio = ours.values[1] / ours.values[0]
                asserts.append(Assertion(f"fig2 M=3 N={N} Sigma1/Sigma0 < {SIGMA1_CLAIM}",
                                         ratio < SIGMA1_CLAIM,
                                         f"solver {fmt(ratio)} vs claimed bound {SIGMA1_CLAIM}"))
            if fig == 6:
                sig = ours.values
                dec = all(b < a for a, b in zip(sig, sig[1:]))
                asserts.append(Assertion(f"fig6 M={M} N={N} Sigma decreasing", dec, ""))
            if with_hs:
                theirs = _benchmark_series(fig, quantity, p)
                series.append(theirs)
                if quantity == "lambda":
                    ok = all(a < b for a, b in zip(ours.values, theirs.values))
                    rel = "lambda_n below benchmark"
                else:
                    ok = all(a <= b for a, b in zip(ours.values, theirs.values))
                    rel = "Sigma_n at or below benchmark"
                skip = 0 if quantity == "lambda" else 1  # Sigma_0 is shared
                worst = max(a / b for a, b in zip(ours.values[skip:], theirs.values[skip:]) if b > 0)
                asserts.append(Assertion(f"fig{fig} M={M} N={N} disclosure {rel}", ok,
                                         f"max ratio {fmt(worst)}"))
    return series, asserts


def _series_table(sr: Series, prior_var: float, noise_var: float, extra: dict) -> Table:
    col = "lambda" if sr.quantity == "lambda" else "sigma"
    start = 1 if sr.quantity == "lambda" else 0
    t = Table(columns=["n", col])
    t.meta = {"figure": sr.figure, "model": sr.model, "quantity": sr.quantity,
              "insiders": sr.insiders, "auctions": sr.auctions,
              "prior_var": prior_var, "noise_var": noise_var, **extra}
    t.rows = [[start + i, v] for i, v in enumerate(sr.values)]
    return t


def cmd_figures(s: dict) -> int:
    which = s["which"]
    bad = [w for w in which if w not in FIGURES]
    if bad:
        raise InvalidInput(f"which: expected figure ids 1..6, got {bad[0]!r}")
    grid = s["n_auctions"]
    if grid is not None and any(n < 1 for n in grid):
        raise InvalidInput(f"n_auctions: expected integers >= 1, got {grid!r}")
    outdir = Path(s["outdir"])
    outdir.mkdir(parents=True, exist_ok=True)
    failed = 0
    for fig in sorted(set(which)):
        series, asserts = _figure_series(fig, grid, s["prior_var"], s["noise_var"])
        for sr in series:
            extra = {}
            if fig == 2 and sr.insiders == 3:
                extra = {"claim_sigma1_over_sigma0_bound": SIGMA1_CLAIM,
                         "solver_sigma1_over_sigma0": sr.values[1] / sr.values[0]}
            if sr.model == MODEL_LABEL:
                extra["note"] = "multi-auction no-disclosure solver is a reconstruction"
            emit(_series_table(sr, s["prior_var"], s["noise_var"], extra),
                 str(outdir / sr.filename), "csv")
            print(sr.filename)
        for a in asserts:
            failed += not a.passed
            tail = f" ({a.detail})" if a.detail else ""
            print(f"assert {a.name}: {'pass' if a.passed else 'FAIL'}{tail}")
    return EXIT_STATS if failed else EXIT_OK


COMMANDS: dict[str, Callable[[dict], int]] = {
    "solve": cmd_solve,
    "benchmark": cmd_benchmark,
    "limits": cmd_limits,
    "simulate": cmd_simulate,
    "figures": cmd_figures,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    flags = dict(vars(ns))
    command = flags.pop("command")
    sub = parser._subparsers._group_actions[0].choices[command]
    try:
        settings = merge_settings(command, sub, flags)
        return COMMANDS[command](settings)
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STATS


if __name__ == "__main__":
    sys.exit(main())
