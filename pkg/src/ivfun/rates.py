"""Oracle dimensions, minimax risk bounds, and closed-form rate orders.

All quantities are evaluated for diagonal operators described by a
nonincreasing sequence upsilon (squared singular values) and a smoothness
ellipsoid described by a nondecreasing weight sequence beta.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .basis import Representer
from .errors import ConfigurationError, DomainError

PP = "pp"
PE = "pe"
EP = "ep"

BRANCH_SUB = "s-a<1/2"
BRANCH_CRIT = "s-a=1/2"
BRANCH_SUPER = "s-a>1/2"
BRANCH_NONE = "none"

KAPPA_WARN = 1e-3


def poly_weights(exponent: float, jmax: int) -> np.ndarray:
    """j^exponent for j = 1..jmax."""
    return np.arange(1, jmax + 1, dtype=float) ** exponent


def exp_weights(exponent: float, jmax: int) -> np.ndarray:
    """exp(j^exponent) for j = 1..jmax, normalized to start at 1."""
    j = np.arange(1, jmax + 1, dtype=float)
    return np.exp(j**exponent - 1.0)


def _check_sequences(beta: np.ndarray, upsilon: np.ndarray) -> None:
    if abs(beta[0] - 1.0) > 1e-12 or abs(upsilon[0] - 1.0) > 1e-12:
        raise ConfigurationError("weight sequences must start at beta_1 = upsilon_1 = 1")
    if np.any(np.diff(beta) < -1e-12):
        raise ConfigurationError("beta must be nondecreasing")
    if np.any(np.diff(upsilon) > 1e-12):
        raise ConfigurationError("upsilon must be nonincreasing")


def m_star(beta, upsilon, x: float, Jmax: Optional[int] = None) -> Tuple[int, float]:
    """Oracle dimension and a*_x = max(upsilon_{m*}/beta_{m*}, 1/x).

    m* is the smallest minimizer over 1..Jmax of
    max(upsilon_m/beta_m, 1/x) / min(upsilon_m/beta_m, 1/x).
    """
    beta = np.asarray(beta, dtype=float)
    upsilon = np.asarray(upsilon, dtype=float)
    _check_sequences(beta, upsilon)
    if x < 1.0:
        raise ConfigurationError(f"effective sample size x must be >= 1, got {x}")
    jmax = min(beta.size, upsilon.size) if Jmax is None else min(Jmax, beta.size, upsilon.size)
    ratio = upsilon[:jmax] / beta[:jmax]
    inv_x = 1.0 / x
    crit = np.maximum(ratio, inv_x) / np.minimum(ratio, inv_x)
    ms = int(np.argmin(crit)) + 1
    return ms, float(max(ratio[ms - 1], inv_x))


def rate_fixed(h: Representer, beta, upsilon, x: float,
               Jmax: Optional[int] = None) -> float:
    """Minimax risk bound R^h_x = max{a* sum_{j<=m*} [h]_j^2/upsilon_j,
    sum_{j>m*} [h]_j^2/beta_j} with the tail truncated at Jmax."""
    beta = np.asarray(beta, dtype=float)
    upsilon = np.asarray(upsilon, dtype=float)
    jmax = min(beta.size, upsilon.size, h.jmax) if Jmax is None else \
        min(Jmax, beta.size, upsilon.size, h.jmax)
    ms, a_star = m_star(beta, upsilon, x, jmax)
    h_sq = h.coeffs[:jmax] ** 2
    head = a_star * float(np.sum(h_sq[:ms] / upsilon[:ms]))
    tail = float(np.sum(h_sq[ms:] / beta[ms:jmax]))
    return max(head, tail)


def rate_class(omega, beta, upsilon, x: float,
               Jmax: Optional[int] = None) -> float:
    """Weighted-norm risk bound R^omega_x = a* max_{j<=m*} 1/(omega_j upsilon_j)."""
    omega = np.asarray(omega, dtype=float)
    beta = np.asarray(beta, dtype=float)
    upsilon = np.asarray(upsilon, dtype=float)
    jmax = min(omega.size, beta.size, upsilon.size) if Jmax is None else \
        min(Jmax, omega.size, beta.size, upsilon.size)
    if np.min(omega[:jmax] * beta[:jmax]) <= 0.0:
        raise ConfigurationError("need inf_j omega_j beta_j > 0")
    ms, a_star = m_star(beta, upsilon, x, jmax)
    return a_star * float(np.max(1.0 / (omega[:ms] * upsilon[:ms])))


def kappa_check(beta, upsilon, n_grid: Sequence[float]) -> float:
    """Numerical surrogate for kappa = inf_n (a*_n)^{-1} min(upsilon_{m*}/beta_{m*}, 1/n).

    The infimum is over the supplied grid only; a diagnostic, not a proof.
    """
    beta = np.asarray(beta, dtype=float)
    upsilon = np.asarray(upsilon, dtype=float)
    kappa = math.inf
    for n in n_grid:
        ms, a_star = m_star(beta, upsilon, float(n))
        ratio = upsilon[ms - 1] / beta[ms - 1]
        kappa = min(kappa, min(ratio, 1.0 / float(n)) / a_star)
    if kappa < KAPPA_WARN:
        warnings.warn(f"kappa = {kappa:.3g} below {KAPPA_WARN}; "
                      "the weight sequences may violate the regularity assumption")
    return kappa


@dataclass(frozen=True)
class RateDescriptor:
    """Closed-form rate order c * n^poly * (log n)^log * (log log n)^loglog.

    ``log_base`` records whether the logarithmic factor is log(n) or
    (1 + log n); both have identical order, the distinction is cosmetic.
    """

    regime: str
    p: float
    a: float
    s: float
    adaptive: bool
    branch: str
    poly: float
    log: float
    loglog: float = 0.0
    log_base: str = "log"

    def order(self, n: float) -> float:
        """Numerical value of the rate order at sample size n (no constant)."""
        log_n = 1.0 + math.log(n) if self.log_base == "1+log" else math.log(n)
        val = n**self.poly * log_n**self.log
        if self.loglog:
            val *= math.log(math.log(n)) ** self.loglog
        return val

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            "p": self.p,
            "a": self.a,
            "s": self.s,
            "adaptive": self.adaptive,
            "branch": self.branch,
            "poly_exponent": self.poly,
            "log_exponent": self.log,
            "loglog_exponent": self.loglog,
            "log_base": self.log_base,
        }


def _branch(s: float, a: float) -> str:
    gap = s - a
    if abs(gap - 0.5) <= 1e-12:
        return BRANCH_CRIT
    return BRANCH_SUB if gap < 0.5 else BRANCH_SUPER


def regime_exponent(regime: str, p: float, a: float, s: float,
                    adaptive: bool = False) -> RateDescriptor:
    """Closed-form order of R^h for the three regimes.

    regime "pp": beta_j = j^{2p}, upsilon_j = j^{-2a}; "pe": polynomial beta,
    exponential upsilon; "ep": exponential beta, polynomial upsilon.
    s is the representer decay exponent ([h]_j^2 ~ j^{-2s}).
    """
    if regime not in (PP, PE, EP):
        raise DomainError(f"unknown regime {regime!r}")
    if a <= 0.0:
        raise DomainError(f"ill-posedness degree a must be > 0, got {a}")
    if regime == PP and not adaptive and p < 1.5:
        raise DomainError(f"regime pp requires p >= 3/2, got p = {p}")
    if regime == PP and adaptive and 2.0 * p + 2.0 * min(s, 0.0) <= 3.0:
        raise DomainError("adaptive pp requires 2p + 2 min(s, 0) > 3")
    if regime in (PE, EP) and p <= 0.0:
        raise DomainError(f"smoothness p must be > 0, got {p}")

    branch = _branch(s, a) if regime in (PP, EP) else BRANCH_NONE
    if not adaptive:
        if regime == PP:
            if branch == BRANCH_SUB:
                return RateDescriptor(regime, p, a, s, adaptive, branch,
                                      poly=-(2 * p + 2 * s - 1) / (2 * p + 2 * a), log=0.0)
            if branch == BRANCH_CRIT:
                return RateDescriptor(regime, p, a, s, adaptive, branch, poly=-1.0, log=1.0)
            return RateDescriptor(regime, p, a, s, adaptive, branch, poly=-1.0, log=0.0)
        if regime == PE:
            return RateDescriptor(regime, p, a, s, adaptive, branch,
                                  poly=0.0, log=-(2 * p + 2 * s - 1) / (2 * a))
        if branch == BRANCH_SUB:
            return RateDescriptor(regime, p, a, s, adaptive, branch,
                                  poly=-1.0, log=(2 * a - 2 * s + 1) / (2 * p))
        if branch == BRANCH_CRIT:
            return RateDescriptor(regime, p, a, s, adaptive, branch,
                                  poly=-1.0, log=0.0, loglog=1.0)
        return RateDescriptor(regime, p, a, s, adaptive, branch, poly=-1.0, log=0.0)

    # adaptive: the logarithmic price of not knowing (p, a)
    if regime == PP:
        if branch == BRANCH_SUB:
            e = (2 * p + 2 * s - 1) / (2 * p + 2 * a)
            return RateDescriptor(regime, p, a, s, adaptive, branch,
                                  poly=-e, log=e, log_base="1+log")
        if branch == BRANCH_CRIT:
            return RateDescriptor(regime, p, a, s, adaptive, branch,
                                  poly=-1.0, log=2.0, log_base="1+log")
        return RateDescriptor(regime, p, a, s, adaptive, branch,
                              poly=-1.0, log=1.0, log_base="1+log")
    if regime == PE:
        return RateDescriptor(regime, p, a, s, adaptive, branch,
                              poly=0.0, log=-(2 * p + 2 * s - 1) / (2 * a),
                              log_base="1+log")
    if branch == BRANCH_SUB:
        return RateDescriptor(regime, p, a, s, adaptive, branch,
                              poly=-1.0, log=(2 * a + 2 * p - 2 * s + 1) / (2 * p),
                              log_base="1+log")
    if branch == BRANCH_CRIT:
        return RateDescriptor(regime, p, a, s, adaptive, branch,
                              poly=-1.0, log=1.0, loglog=1.0, log_base="1+log")
    return RateDescriptor(regime, p, a, s, adaptive, branch,
                          poly=-1.0, log=1.0, log_base="1+log")


@dataclass(frozen=True)
class RateReport:
    """Numeric oracle quantities at one effective sample size x."""

    x: float
    m_star: int
    a_star: float
    kappa: float
    R_fixed: float
    R_class: Optional[float] = None
    regime_exponent: Optional[RateDescriptor] = None

    def to_dict(self) -> dict:
        out = {
            "x": self.x,
            "m_star": self.m_star,
            "a_star": self.a_star,
            "kappa": self.kappa,
            "R_fixed": self.R_fixed,
            "R_class": self.R_class,
        }
        if self.regime_exponent is not None:
            out["regime_exponent"] = self.regime_exponent.to_dict()
        return out


def rate_report(h: Representer, beta, upsilon, x: float,
                omega=None, descriptor: Optional[RateDescriptor] = None,
                kappa_grid: Optional[Sequence[float]] = None) -> RateReport:
    """Bundle the oracle quantities for one (h, beta, upsilon, x)."""
    ms, a_star = m_star(beta, upsilon, x)
    grid = kappa_grid if kappa_grid is not None else [x]
    return RateReport(
        x=float(x),
        m_star=ms,
        a_star=a_star,
        kappa=kappa_check(beta, upsilon, grid),
        R_fixed=rate_fixed(h, beta, upsilon, x),
        R_class=None if omega is None else rate_class(omega, beta, upsilon, x),
        regime_exponent=descriptor,
    )
