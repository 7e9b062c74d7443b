"""Monte Carlo experiment orchestration and rate-slope regression.

Replications are independent and parallelize across a process pool; each
worker owns an RNG stream keyed by (base seed, n, replication index), so
the report is identical no matter the worker count or completion order.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import basis
from .adaptive import (DeterministicPenalty, M_upper_h, deterministic_penalty,
                       reduction_gap, select, select_partial)
from .basis import Representer, functional_of
from .datagen import OperatorSpec, StructuralFunction, generate
from .errors import ConfigurationError, DomainError
from .estimator import plugin_estimate
from .galerkin import assemble
from .rates import RateDescriptor, m_star, regime_exponent

ORACLE_M = "oracle"
PARTIAL_ADAPTIVE = "partial"
FULLY_ADAPTIVE = "full"
MODES = (ORACLE_M, PARTIAL_ADAPTIVE, FULLY_ADAPTIVE)

_MODE_ALIASES = {
    "oraclem": ORACLE_M,
    "oracle_m": ORACLE_M,
    "oracle": ORACLE_M,
    "partialadaptive": PARTIAL_ADAPTIVE,
    "partial_adaptive": PARTIAL_ADAPTIVE,
    "partial": PARTIAL_ADAPTIVE,
    "fullyadaptive": FULLY_ADAPTIVE,
    "fully_adaptive": FULLY_ADAPTIVE,
    "full": FULLY_ADAPTIVE,
}


def canonical_mode(name: str) -> str:
    try:
        return _MODE_ALIASES[name.replace("-", "_").lower()]
    except KeyError:
        raise ConfigurationError(f"unknown mode {name!r}; expected one of {MODES}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one Monte Carlo experiment."""

    spec: OperatorSpec
    phi: StructuralFunction
    h: Representer
    sigma_v: float
    n_grid: Tuple[int, ...]
    replications: int
    seed: int
    mode: str = ORACLE_M

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        object.__setattr__(self, "mode", canonical_mode(self.mode))
        if len(self.n_grid) < 1 or any(np.diff(self.n_grid) <= 0):
            raise ConfigurationError("n_grid must be nonempty and strictly increasing")
        if self.replications < 1:
            raise ConfigurationError("need at least one replication")
        if self.sigma_v <= 0.0:
            raise ConfigurationError(f"sigma_v must be > 0, got {self.sigma_v}")

    def ground_truth(self) -> float:
        return functional_of(self.phi, self.h)


def oracle_dimension(cfg: ExperimentConfig, n: int) -> int:
    """Theory-optimal m*_n from the unscaled operator class shape.

    Uses the class decay j^{-2a} (or exp(-j^{2a})) rather than the scaled
    singular values: the oracle dimension is a property of the smoothness
    and ill-posedness classes, not of the positivity rescaling.
    """
    jmax = min(cfg.phi.jmax, cfg.h.jmax)
    upsilon = cfg.spec.class_shape(jmax)
    ms, _ = m_star(cfg.phi.weights[:jmax], upsilon, float(n), jmax)
    return ms


@dataclass(frozen=True)
class ReplicationResult:
    n: int
    r: int
    lhat: float
    m: int
    thresholded: bool
    reduction_gap: float = math.inf
    failed: bool = False


def _replicate(cfg: ExperimentConfig, n: int, r: int, m_assemble: int,
               m_oracle: int, pen: Optional[DeterministicPenalty]) -> ReplicationResult:
    sample = generate(cfg.spec, cfg.phi, cfg.sigma_v, n, (cfg.seed, n, r))
    try:
        system = assemble(sample, m_assemble)
        if cfg.mode == ORACLE_M:
            lhat, flag = plugin_estimate(system, cfg.h, m_oracle)
            return ReplicationResult(n, r, lhat, m_oracle, flag)
        if cfg.mode == PARTIAL_ADAPTIVE:
            trace = select_partial(system, pen, cfg.h)
        else:
            trace = select(system, sample, cfg.h)
        gap = reduction_gap(trace)
        return ReplicationResult(n, r, trace.lhat_mhat, trace.mhat,
                                 bool(trace.thresholded[trace.mhat - 1]), gap)
    except np.linalg.LinAlgError:
        # counted, never dropped: the estimator's value is defined as 0 here
        return ReplicationResult(n, r, 0.0, 0, True, failed=True)


def _replicate_star(args) -> ReplicationResult:
    return _replicate(*args)


def slope_fit(pairs: Sequence[Tuple[float, float]]) -> Tuple[float, float]:
    """OLS slope and standard error of log mse on log n."""
    if len(pairs) < 3:
        raise DomainError(f"slope fit needs >= 3 points, got {len(pairs)}")
    n = np.array([p[0] for p in pairs], dtype=float)
    mse = np.array([p[1] for p in pairs], dtype=float)
    if np.any(mse <= 0.0) or np.any(n <= 0.0):
        raise DomainError("slope fit needs strictly positive n and mse")
    x, y = np.log(n), np.log(mse)
    xc = x - x.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ y) / sxx
    resid = y - y.mean() - slope * xc
    s_sq = float(resid @ resid) / (len(pairs) - 2)
    return slope, math.sqrt(max(s_sq, 0.0) / sxx)


@dataclass(frozen=True)
class MonteCarloReport:
    """Aggregated experiment output: per-n statistics and the fitted slope."""

    mode: str
    ground_truth: float
    n: Tuple[int, ...]
    mse: Tuple[float, ...]
    mean_m: Tuple[float, ...]
    threshold_freq: Tuple[float, ...]
    slope: float
    slope_stderr: float
    reference: Optional[RateDescriptor]
    failures: int
    min_reduction_gap: float

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "ground_truth": self.ground_truth,
            "per_n": [
                {"n": n, "mse": m, "mean_m": mm, "threshold_freq": tf}
                for n, m, mm, tf in zip(self.n, self.mse, self.mean_m,
                                        self.threshold_freq)
            ],
            "slope": self.slope,
            "slope_stderr": self.slope_stderr,
            "reference_exponent": None if self.reference is None
            else self.reference.to_dict(),
            "failures": self.failures,
            "min_reduction_gap": None if math.isinf(self.min_reduction_gap)
            else self.min_reduction_gap,
        }

    def write_csv(self, path) -> None:
        """Emit the per-n table as ``n,mse,mean_m,threshold_freq``."""
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "mse", "mean_m", "threshold_freq"])
            for row in zip(self.n, self.mse, self.mean_m, self.threshold_freq):
                writer.writerow([row[0], repr(row[1]), repr(row[2]), repr(row[3])])


def reference_descriptor(cfg: ExperimentConfig) -> Optional[RateDescriptor]:
    """Closed-form exponent matching the configuration, when one applies."""
    if cfg.h.decay_s is None:
        return None
    weights = cfg.phi.weights
    if weights.size < 2 or weights[1] <= 1.0:
        return None
    regime = cfg.spec.regime
    # recover p from beta_2 = 2^{2p} for the polynomial-smoothness regimes
    p = math.log(weights[1]) / (2.0 * math.log(2.0))
    try:
        return regime_exponent(regime, p, cfg.spec.a, cfg.h.decay_s,
                               adaptive=cfg.mode == FULLY_ADAPTIVE)
    except DomainError:
        return None


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> MonteCarloReport:
    """Run the full grid of (n, replication) tasks and aggregate.

    Results are merged in (n, r) order, so the report does not depend on
    the worker count.
    """
    truth = cfg.ground_truth()
    tasks = []
    for n in cfg.n_grid:
        m_oracle = oracle_dimension(cfg, n)
        pen = None
        if cfg.mode == PARTIAL_ADAPTIVE:
            pen = deterministic_penalty(cfg.spec, cfg.phi, cfg.sigma_v, cfg.h, n)
            m_assemble = pen.Mn
        elif cfg.mode == FULLY_ADAPTIVE:
            m_assemble = M_upper_h(cfg.h, n)
        else:
            m_assemble = m_oracle
        for r in range(cfg.replications):
            tasks.append((cfg, n, r, m_assemble, m_oracle, pen))

    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_replicate_star, tasks, chunksize=8))
    else:
        results = [_replicate_star(t) for t in tasks]
    results.sort(key=lambda res: (res.n, res.r))

    mse, mean_m, freq = [], [], []
    failures = 0
    min_gap = math.inf
    for n in cfg.n_grid:
        rows = [res for res in results if res.n == n]
        errs = np.array([res.lhat - truth for res in rows])
        mse.append(float(np.mean(errs**2)))
        mean_m.append(float(np.mean([res.m for res in rows])))
        freq.append(float(np.mean([res.thresholded for res in rows])))
        failures += sum(res.failed for res in rows)
        min_gap = min(min_gap, min(res.reduction_gap for res in rows))

    if len(cfg.n_grid) >= 3 and all(v > 0.0 for v in mse):
        slope, stderr = slope_fit(list(zip(cfg.n_grid, mse)))
    else:
        slope, stderr = math.nan, math.nan
    return MonteCarloReport(
        mode=cfg.mode, ground_truth=truth, n=cfg.n_grid, mse=tuple(mse),
        mean_m=tuple(mean_m), threshold_freq=tuple(freq), slope=slope,
        slope_stderr=stderr, reference=reference_descriptor(cfg),
        failures=failures, min_reduction_gap=min_gap,
    )


def _require(d: dict, key: str):
    try:
        return d[key]
    except KeyError:
        raise ConfigurationError(f"config missing required key {key!r}")


def operator_from_dict(d: dict) -> OperatorSpec:
    return OperatorSpec(
        regime=_require(d, "regime"),
        a=float(_require(d, "a")),
        scale=float(_require(d, "scale")),
        jmax=int(_require(d, "jmax")),
        d=float(d.get("d", 1.0)),
        D=float(d.get("D", 1.0)),
    )


def phi_from_dict(d: dict) -> StructuralFunction:
    rule = d.get("rule", "power_law")
    if rule == "power_law":
        return StructuralFunction.power_law(
            p=float(_require(d, "p")),
            q=float(_require(d, "q")),
            rho=float(d.get("rho", 1.0)),
            jmax=int(d.get("jmax", basis.DEFAULT_JMAX)),
            fill=float(d.get("fill", 1.0)),
        )
    if rule == "explicit":
        return StructuralFunction(
            coeffs=np.asarray(_require(d, "coeffs"), dtype=float),
            weights=np.asarray(_require(d, "weights"), dtype=float),
            rho=float(d.get("rho", 1.0)),
        )
    raise ConfigurationError(f"unknown structural-function rule {rule!r}")


def representer_from_dict(d: dict) -> Representer:
    kind = _require(d, "kind")
    params = {k: v for k, v in d.items() if k not in ("kind", "jmax")}
    try:
        return basis.representer_coeffs(kind, int(d.get("jmax", basis.DEFAULT_JMAX)),
                                        **params)
    except KeyError as exc:
        raise ConfigurationError(f"representer {kind!r} missing parameter {exc}")


def config_from_dict(d: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from the JSON config schema."""
    if not isinstance(d, dict):
        raise ConfigurationError("config must be a JSON object")
    return ExperimentConfig(
        spec=operator_from_dict(_require(d, "operator")),
        phi=phi_from_dict(_require(d, "phi")),
        h=representer_from_dict(_require(d, "h")),
        sigma_v=float(_require(d, "sigma_v")),
        n_grid=_require(d, "n_grid"),
        replications=int(_require(d, "replications")),
        seed=int(d.get("seed", 0)),
        mode=d.get("mode", ORACLE_M),
    )
