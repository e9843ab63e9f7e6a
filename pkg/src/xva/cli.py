"""Command-line driver: single valuations and the lambda_B sweeps of the two worked examples, written as CSV."""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from importlib.resources import files
from pathlib import Path

from .analytic import black_scholes_price, repo_adjusted_value
from .collateral import CollateralTerms
from .cva import QuadratureError
from .fva import FvaConfig, SolverError, ValuationReport, _workers, solve_premium
from .lattice import solve_predefault_pde
from .market_data import (ConfigError, DiscountCurve, ForwardCurve, MarketConfig, build_market_config,
                          load_curve, parse_config)
from .swap import adjusted_swap_rate, forward_swap_rate, swap_dva_cva, swap_value

OPTION_HEADER = ["lambda_B", "V_e", "CVA_B", "CVA_C", "FVA_S", "FVA_B", "FVA_C", "V_0"]
SWAP_HEADER = ["lambda_B", "V_e", "DVA", "CVA", "V_0", "fair_rate"]
COMMANDS = ("price-option", "price-swap", "example1", "example2", "validate")
EXAMPLE1_SWEEP = "0:0.0025:0.03"
EXAMPLE2_SWEEP = "0:0.005:0.03"
EXAMPLE1_CSA = (4.0, 2.0)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


@dataclass(frozen=True)
class RunRequest:
    command: str
    config: str | None = None
    discount_curve: str | None = None
    forward_curve: str | None = None
    out: str | None = None
    seed: int = 42
    n_paths: int = 100_000
    dt: float | None = None
    csa: bool | None = None
    sweep: str | None = None
    target: str | None = None  # what ``validate`` should check: price-option or price-swap


def parse_sweep(text: str) -> list[float]:
    """``start:step:end`` (inclusive) to a list of intensities; step > 0, finite bounds."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"sweep must be start:step:end, got {text!r}", "sweep")
    try:
        start, step, end = (float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"sweep has a non-numeric field: {text!r}", "sweep") from None
    if not all(math.isfinite(v) for v in (start, step, end)):
        raise ConfigError("sweep bounds must be finite", "sweep")
    if not step > 0:
        raise ConfigError(f"sweep step must be > 0, got {step}", "sweep")
    if end < start:
        raise ConfigError("sweep end must be >= start", "sweep")
    if start < 0:
        raise ConfigError("intensities in the sweep must be >= 0", "sweep")
    n = int(math.floor((end - start) / step + 1e-9))
    # rounding keeps 0.0025 * 3 from printing as 0.0075000000000000006
    return [round(start + i * step, 12) for i in range(n + 1)]


def parse_dt(text: str) -> float:
    try:
        value = float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"dt must be a number or a fraction like 1/52, got {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError("dt must be > 0")
    return value


def _bundled(name: str) -> str:
    return str(files("xva") / "data" / name)


def _config_text(request: RunRequest) -> str:
    if request.config is not None:
        return Path(request.config).read_text(encoding="utf-8")
    if request.command == "example1":
        return Path(_bundled("example1.cfg")).read_text(encoding="utf-8")
    if request.command == "example2":
        return Path(_bundled("example2.cfg")).read_text(encoding="utf-8")
    raise ConfigError(f"{request.command} needs --config", "config")


def _curve_paths(request: RunRequest) -> tuple[str | None, str | None]:
    disc, fwd = request.discount_curve, request.forward_curve
    if request.command == "example2":
        disc = disc or _bundled("ois_synthetic.csv")
        fwd = fwd or _bundled("euribor6m_synthetic.csv")
    return disc, fwd


def _load_setup(request: RunRequest) -> tuple[MarketConfig, DiscountCurve | None, ForwardCurve | None]:
    values = parse_config(_config_text(request))
    if request.dt is not None:
        values["dt"] = request.dt
    disc_path, fwd_path = _curve_paths(request)
    discount = load_curve(disc_path, "discount") if disc_path else None
    forwards = load_curve(fwd_path, "forward") if fwd_path else None
    swap_cmd = request.command in ("price-swap", "example2")
    if swap_cmd and not values["trade"].endswith("swap"):
        raise ConfigError(f"{request.command} needs a swap trade, config has {values['trade']!r}", "trade")
    if not swap_cmd and values["trade"].endswith("swap"):
        raise ConfigError(f"{request.command} needs an option trade, config has {values['trade']!r}", "trade")
    if swap_cmd and (discount is None or forwards is None):
        raise ConfigError("swap valuation needs --discount-curve and --forward-curve", "curve")
    if request.command == "example1" and request.csa is not None:
        values["H"], values["X"] = EXAMPLE1_CSA if request.csa else (0.0, 0.0)
    elif request.csa is False:
        values["H"], values["X"] = 0.0, 0.0
    elif request.csa and not swap_cmd and values["H"] <= 0.0:
        raise ConfigError("--csa needs a positive threshold H in the config", "H")
    # swaps use the curve for discounting; equity trades only when one is supplied
    cfg = build_market_config(values, discount)
    return cfg, discount, forwards


def _sweep_points(request: RunRequest, cfg: MarketConfig) -> list[float]:
    if request.sweep is not None:
        return parse_sweep(request.sweep)
    if request.command == "example1":
        return parse_sweep(EXAMPLE1_SWEEP)
    if request.command == "example2":
        return parse_sweep(EXAMPLE2_SWEEP)
    return [cfg.credit_B.intensity]


# ---------------------------------------------------------------------------
# valuations per sweep point


def _predefault_report(cfg: MarketConfig) -> ValuationReport:
    """Pre-default MTM: the PDE value, split into repo and default parts; no margin funding."""
    spec, env, credit_B = cfg.trade, cfg.env, cfg.credit_B
    if cfg.terms.collateralized or spec.position < 0:
        raise ConfigError("pre_default MTM is supported for an uncollateralized long option only", "mtm")
    V_e = black_scholes_price(spec, env)
    V_s = repo_adjusted_value(spec, env)
    V_0 = solve_predefault_pde(spec, env, credit_B)
    return ValuationReport(V_e, V_0 - V_s, 0.0, V_s - V_e, 0.0, 0.0, V_0)


def option_row(cfg: MarketConfig, lam_B: float, request: RunRequest, inner_workers: int | None = None) -> list[float]:
    cfg = replace(cfg, credit_B=cfg.credit_B.with_intensity(lam_B))
    if cfg.terms.mtm_convention == "pre_default":
        report = _predefault_report(cfg)
    else:
        fva_config = FvaConfig(n_paths=request.n_paths, dt=cfg.dt, seed=request.seed, workers=inner_workers)
        report = solve_premium(cfg.trade, cfg.env, cfg.credit_B, cfg.credit_C, cfg.terms, fva_config)
    return [lam_B, *report.row()]


def swap_row(cfg: MarketConfig, lam_B: float, discount: DiscountCurve, forwards: ForwardCurve) -> list[float]:
    credit_B = cfg.credit_B.with_intensity(lam_B)
    spec, sigma = cfg.trade, cfg.env.volatility
    V_e = swap_value(spec, discount, forwards)
    adj = swap_dva_cva(spec, discount, forwards, sigma, credit_B, cfg.credit_C)
    fair = adjusted_swap_rate(spec, discount, forwards, sigma, credit_B, cfg.credit_C)
    return [lam_B, V_e, adj.dva, adj.cva, V_e + adj.dva + adj.cva, fair]


def compute_rows(request: RunRequest) -> tuple[list[str], list[list[float]]]:
    cfg, discount, forwards = _load_setup(request)
    points = _sweep_points(request, cfg)
    if request.command in ("price-swap", "example2"):
        if request.command == "example2":
            # struck at the par rate so that V_e(0) = 0
            par = forward_swap_rate(discount, forwards, cfg.trade.grid, 0, cfg.trade.n)
            cfg = replace(cfg, trade=replace(cfg.trade, fixed_rate=par))
        return SWAP_HEADER, [swap_row(cfg, lam, discount, forwards) for lam in points]

    workers = _workers(None)
    outer = max(1, min(workers, len(points)))
    inner = max(1, workers // outer)
    with ThreadPoolExecutor(outer) as pool:
        # map keeps the submission order, so rows stay sorted by lambda_B
        rows = list(pool.map(lambda lam: option_row(cfg, lam, request, inner), points))
    return OPTION_HEADER, rows


def format_csv(header: list[str], rows: list[list[float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows([repr(float(v)) for v in row] for row in rows)
    return buf.getvalue()


def _write_atomic(path: str, text: str) -> None:
    target = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent if str(target.parent) else ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# validation


def _check_values(values: dict) -> list[str]:
    findings = []
    is_swap = values["trade"].endswith("swap")
    if not values.get("sigma", 0.0) > 0:
        findings.append(f"sigma must be > 0, got {values.get('sigma')}")
    for side in ("B", "C"):
        if values[f"lambda_{side}"] < 0:
            findings.append(f"lambda_{side} must be >= 0, got {values[f'lambda_{side}']}")
        if not 0.0 <= values[f"R_{side}"] <= 1.0:
            findings.append(f"R_{side} must lie in [0, 1], got {values[f'R_{side}']}")
    for key in ("lambda_S", "lambda_M"):
        if values[key] < 0:
            findings.append(f"{key} must be >= 0, got {values[key]}")
    if values["X"] < 0:
        findings.append(f"X must be >= 0, got {values['X']}")
    if values["H"] < values["X"]:
        findings.append(f"collateral rule H >= X violated: H={values['H']}, X={values['X']}")
    if not values["dt"] > 0:
        findings.append(f"dt must be > 0, got {values['dt']}")
    if is_swap:
        n = values["tenor_years"] * values["pay_freq"]
        if not values["pay_freq"] > 0 or abs(n - round(n)) > 1e-9 or round(n) < 1:
            findings.append("tenor_years * pay_freq must be a positive integer")
        if not values["swap_rate"] > 0:
            findings.append(f"swap_rate must be > 0 for the lognormal swaption model, got {values['swap_rate']}")
    else:
        for key in ("S0", "K", "T"):
            if not values[key] > 0:
                findings.append(f"{key} must be > 0, got {values[key]}")
        if values["T"] > 0 and values["dt"] > 0:
            steps = values["T"] / values["dt"]
            if abs(steps - round(steps)) > 1e-6 * max(1.0, steps):
                findings.append(f"dt={values['dt']} does not divide T={values['T']}")
        if values["mtm"] == "pre_default" and (values["H"] > 0 or values["position"] < 0):
            findings.append("pre_default MTM is supported for an uncollateralized long option only")
    return findings


def validate(request: RunRequest) -> list[str]:
    """Every problem found in the config, curves and sweep; an empty list means runnable."""
    findings: list[str] = []
    target = request.target or request.command
    if target == "validate":
        target = "price-option"
    req = replace(request, command=target)
    try:
        values = parse_config(_config_text(req))
    except FileNotFoundError as exc:
        findings.append(f"config file not found: {exc.filename}")
        values = None
    except ConfigError as exc:
        findings.append(str(exc))
        values = None
    if values is not None:
        if request.dt is not None:
            values["dt"] = request.dt
        findings.extend(_check_values(values))

    curves = {}
    disc_path, fwd_path = _curve_paths(req)
    for kind, path, flag in (("discount", disc_path, "--discount-curve"), ("forward", fwd_path, "--forward-curve")):
        if path is None:
            if target in ("price-swap", "example2"):
                findings.append(f"{target} needs a {kind} curve file ({flag})")
            continue
        if not Path(path).is_file():
            findings.append(f"{kind} curve file not found: {path}")
            continue
        try:
            curves[kind] = load_curve(path, kind)
        except (ConfigError, ValueError) as exc:
            findings.append(f"{kind} curve {path}: {exc}")

    if values is not None and values["trade"].endswith("swap") and "forward" in curves and not findings:
        grid = build_market_config(values, curves.get("discount")).trade.grid
        for a, b in zip(grid, grid[1:]):
            try:
                curves["forward"].rate(a, b)
            except KeyError:
                findings.append(f"forward curve has no period ({a}, {b}) of the swap grid")
                break
    if request.sweep is not None:
        try:
            parse_sweep(request.sweep)
        except ConfigError as exc:
            findings.append(str(exc))
    if values is not None and not findings:
        try:
            _load_setup(req)
        except (ConfigError, ValueError) as exc:
            findings.append(str(exc))
    return findings


# ---------------------------------------------------------------------------
# entry point


def run(request: RunRequest, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    if request.command == "validate":
        findings = validate(request)
        for f in findings:
            print(f, file=stdout)
        return EXIT_OK if not findings else EXIT_CONFIG
    try:
        header, rows = compute_rows(request)
        text = format_csv(header, rows)
        if request.out:
            _write_atomic(request.out, text)
        else:
            stdout.write(text)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, QuadratureError, ValueError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xva", description=__doc__)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--discount-curve", help="CSV with tenor_years,discount_factor")
    parser.add_argument("--forward-curve", help="CSV with start,end,forward_rate")
    parser.add_argument("--out", help="output CSV (stdout when omitted)")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--paths", type=int, default=100_000, dest="n_paths")
    parser.add_argument("--dt", type=parse_dt, default=None, help="time step, e.g. 1/52 (default: config or 1/52)")
    parser.add_argument("--csa", action=argparse.BooleanOptionalAction, default=None,
                        help="collateralized (example1: H=4, X=2) or not (H=X=0)")
    parser.add_argument("--sweep", help="lambda_B sweep start:step:end")
    parser.add_argument("--target", choices=("price-option", "price-swap", "example1", "example2"),
                        help="for validate: the command whose inputs are checked")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.n_paths < 2:
        print("error: --paths must be >= 2", file=sys.stderr)
        return EXIT_CONFIG
    return run(RunRequest(**vars(args)))


if __name__ == "__main__":
    sys.exit(main())
