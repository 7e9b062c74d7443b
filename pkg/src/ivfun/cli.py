"""Command-line surface: simulate, estimate, select, rates, mc.

Exit codes: 0 on success, 2 on configuration errors, 3 when ``mc --check``
fails its acceptance window.
"""

from __future__ import annotations

import functools
import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from . import basis
from .adaptive import deterministic_penalty, select, select_partial
from .datagen import generate, load_csv, save_csv
from .errors import ConfigurationError, DomainError
from .estimator import estimate_trace
from .galerkin import assemble
from .harness import (config_from_dict, operator_from_dict, phi_from_dict,
                      representer_from_dict, run_experiment)
from .plots import render_mse_figure
from .rates import exp_weights, poly_weights, rate_report, regime_exponent

EXIT_CONFIG = 2
EXIT_CHECK = 3


def _config_errors(fn):
    """Map library configuration/domain errors onto exit code 2."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ConfigurationError, DomainError, json.JSONDecodeError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)

    return wrapper


def _emit(payload: dict, out: Path | None, name: str) -> None:
    text = json.dumps(payload, indent=2)
    if out is None:
        click.echo(text)
    else:
        out.mkdir(parents=True, exist_ok=True)
        target = out / name
        target.write_text(text + "\n")
        click.echo(str(target))


def _representer(kind: str, jmax: int, t0: float, b: float):
    params = {}
    if kind == basis.POINT_EVAL:
        params["t0"] = t0
    elif kind == basis.AVERAGE:
        params["b"] = b
    return basis.representer_coeffs(kind, jmax, **params)


operator_options = [
    click.option("--regime", type=click.Choice(["pp", "pe", "ep"]), default="pp",
                 show_default=True, help="Singular value decay regime."),
    click.option("--a", type=float, default=1.0, show_default=True,
                 help="Degree of ill-posedness."),
    click.option("--scale", type=float, default=0.25, show_default=True,
                 help="Singular value scale (positivity budget applies)."),
    click.option("--op-jmax", type=int, default=8, show_default=True,
                 help="Operator series truncation."),
]

phi_options = [
    click.option("--p", type=float, default=2.0, show_default=True,
                 help="Smoothness exponent (weights j^{2p})."),
    click.option("--q", type=float, default=2.6, show_default=True,
                 help="Coefficient decay phi_j ~ j^{-q}."),
    click.option("--rho", type=float, default=1.0, show_default=True,
                 help="Ellipsoid radius."),
]

representer_options = [
    click.option("--h-kind", type=click.Choice([basis.POINT_EVAL, basis.AVERAGE,
                                                basis.WEIGHTED_AVG_DERIV]),
                 default=basis.POINT_EVAL, show_default=True,
                 help="Linear functional to estimate."),
    click.option("--t0", type=float, default=0.3, show_default=True,
                 help="Evaluation point (point kind)."),
    click.option("--b", type=float, default=0.5, show_default=True,
                 help="Averaging endpoint (average kind)."),
    click.option("--h-jmax", type=int, default=basis.DEFAULT_JMAX, show_default=True,
                 help="Representer truncation."),
]


def _add_options(options):
    def deco(fn):
        for opt in reversed(options):
            fn = opt(fn)
        return fn

    return deco


@click.group()
def main():
    """Minimax and adaptive estimation of linear functionals in
    instrumental regression."""


@main.command()
@_add_options(operator_options)
@_add_options(phi_options)
@click.option("--sigma-v", type=float, default=0.5, show_default=True)
@click.option("-n", "--size", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=Path("."),
              show_default=True, help="Directory for sample.csv.")
@_config_errors
def simulate(regime, a, scale, op_jmax, p, q, rho, sigma_v, size, seed, out):
    """Draw a synthetic sample and write it as CSV."""
    spec = operator_from_dict({"regime": regime, "a": a, "scale": scale,
                               "jmax": op_jmax})
    phi = phi_from_dict({"p": p, "q": q, "rho": rho})
    sample = generate(spec, phi, sigma_v, size, seed)
    out.mkdir(parents=True, exist_ok=True)
    target = out / "sample.csv"
    save_csv(sample, target)
    click.echo(str(target))


@main.command()
@click.argument("sample_csv", type=click.Path(exists=True, path_type=Path))
@_add_options(representer_options)
@click.option("-M", "--dim", type=int, default=8, show_default=True,
              help="Largest dimension to estimate at.")
@click.option("--dump-galerkin", type=click.Path(path_type=Path), default=None,
              help="Write the assembled matrices to this .npz path.")
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Directory for estimate.json (default: stdout).")
@_config_errors
def estimate(sample_csv, h_kind, t0, b, h_jmax, dim, dump_galerkin, out):
    """Thresholded plug-in estimates at every dimension up to M."""
    sample = load_csv(sample_csv)
    h = _representer(h_kind, h_jmax, t0, b)
    system = assemble(sample, dim)
    if dump_galerkin is not None:
        np.savez(dump_galerkin, that=system.that, ghat=system.ghat,
                 n=np.array(system.n))
    trace = estimate_trace(system, h)
    payload = {
        "n": system.n,
        "per_m": [
            {"m": m + 1, "lhat": float(trace.lhat[m]),
             "invnorm": None if math.isinf(trace.invnorm[m])
             else float(trace.invnorm[m]),
             "thresholded": bool(trace.thresholded[m])}
            for m in range(trace.M)
        ],
    }
    _emit(payload, out, "estimate.json")


@main.command("select")
@click.argument("sample_csv", type=click.Path(exists=True, path_type=Path))
@_add_options(representer_options)
@click.option("--mode", type=click.Choice(["full", "partial"]), default="full",
              show_default=True, help="Fully data-driven or known-operator penalties.")
@_add_options(operator_options)
@_add_options(phi_options)
@click.option("--sigma-v", type=float, default=0.5, show_default=True,
              help="Noise level (partial mode penalties only).")
@click.option("--dump-galerkin", type=click.Path(path_type=Path), default=None,
              help="Write the assembled matrices to this .npz path.")
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Directory for select.json (default: stdout).")
@_config_errors
def select_cmd(sample_csv, h_kind, t0, b, h_jmax, mode, regime, a, scale, op_jmax,
               p, q, rho, sigma_v, dump_galerkin, out):
    """Adaptive dimension selection on a stored sample."""
    sample = load_csv(sample_csv)
    h = _representer(h_kind, h_jmax, t0, b)
    if mode == "partial":
        spec = operator_from_dict({"regime": regime, "a": a, "scale": scale,
                                   "jmax": op_jmax})
        phi = phi_from_dict({"p": p, "q": q, "rho": rho})
        pen = deterministic_penalty(spec, phi, sigma_v, h, sample.n)
        system = assemble(sample, pen.Mn)
        trace = select_partial(system, pen, h)
    else:
        from .adaptive import M_upper_h

        system = assemble(sample, M_upper_h(h, sample.n))
        trace = select(system, sample, h)
    if dump_galerkin is not None:
        np.savez(dump_galerkin, that=system.that, ghat=system.ghat,
                 n=np.array(system.n))
    _emit(trace.to_dict(), out, "select.json")


@main.command()
@click.option("--regime", type=click.Choice(["pp", "pe", "ep"]), default="pp",
              show_default=True)
@click.option("--p", type=float, default=2.0, show_default=True)
@click.option("--a", type=float, default=1.0, show_default=True)
@click.option("--s", type=float, default=0.0, show_default=True,
              help="Representer decay exponent.")
@click.option("--adaptive", is_flag=True, help="Report the adaptive (log-penalized) order.")
@click.option("--x", type=float, default=None,
              help="Effective sample size for the numeric oracle quantities.")
@_add_options(representer_options)
@click.option("--jmax", type=int, default=basis.DEFAULT_JMAX, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Directory for rates.json (default: stdout).")
@_config_errors
def rates(regime, p, a, s, adaptive, x, h_kind, t0, b, h_jmax, jmax, out):
    """Closed-form rate order; with --x also the numeric oracle quantities."""
    descriptor = regime_exponent(regime, p, a, s, adaptive)
    if x is None:
        _emit(descriptor.to_dict(), out, "rates.json")
        return
    beta = exp_weights(2.0 * p, jmax) if regime == "ep" else poly_weights(2.0 * p, jmax)
    upsilon = np.exp(-(np.arange(1, jmax + 1.0) ** (2.0 * a) - 1.0)) \
        if regime == "pe" else poly_weights(-2.0 * a, jmax)
    h = _representer(h_kind, min(h_jmax, jmax), t0, b)
    report = rate_report(h, beta, upsilon, x, descriptor=descriptor)
    _emit(report.to_dict(), out, "rates.json")


@main.command()
@click.argument("config", type=click.Path(exists=True, path_type=Path))
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--threads", type=int, default=1, show_default=True,
              help="Worker processes for replications.")
@click.option("--out", type=click.Path(path_type=Path), default=Path("."),
              show_default=True, help="Directory for report files.")
@click.option("--check", is_flag=True,
              help="Exit 3 unless the report passes the config's check block.")
@_config_errors
def mc(config, seed, threads, out, check):
    """Run a Monte Carlo experiment from a JSON config.

    Writes report.json, the per-n table report.csv, and a log-log MSE
    figure report.png into --out.
    """
    raw = json.loads(config.read_text())
    cfg = config_from_dict(raw)
    if seed is not None:
        raw = dict(raw, seed=seed)
        cfg = config_from_dict(raw)
    report = run_experiment(cfg, threads=threads)

    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    report.write_csv(out / "report.csv")
    render_mse_figure(report, out / "report.png")
    click.echo(f"slope {report.slope:.4f} ± {report.slope_stderr:.4f}  "
               f"(files in {out})")

    if check:
        window = raw.get("check", {})
        lo = window.get("slope_min", -math.inf)
        hi = window.get("slope_max", math.inf)
        ok = (math.isfinite(report.slope) and lo <= report.slope <= hi
              and report.failures == 0
              and report.min_reduction_gap > -1e-9)
        if not ok:
            click.echo(f"check failed: slope {report.slope:.4f} outside "
                       f"[{lo}, {hi}] or failures/reduction violations", err=True)
            sys.exit(EXIT_CHECK)
        click.echo("check passed")


if __name__ == "__main__":
    main()
