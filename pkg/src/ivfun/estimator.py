"""Thresholded plug-in estimator of the linear functional.

For dimension m the estimate is [h]_m^t [That]_m^{-1} [ghat]_m, replaced
by 0 whenever the block is singular or its inverse spectral norm exceeds
sqrt(n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .basis import Representer
from .errors import DomainError
from .galerkin import GalerkinSystem, inv_spectral_norm


@dataclass(frozen=True)
class EstimateTrace:
    """Per-dimension estimates, inverse norms, and threshold flags."""

    lhat: np.ndarray
    invnorm: np.ndarray
    thresholded: np.ndarray

    @property
    def M(self) -> int:
        return self.lhat.size


def plugin_estimate(system: GalerkinSystem, h: Representer, m: int) -> Tuple[float, bool]:
    """Estimate at dimension m; returns (value, thresholded).

    The threshold test uses the SVD-based inverse spectral norm, not the
    solver's conditioning estimate; the value is computed by a linear solve,
    never an explicit inverse.
    """
    if m > h.jmax:
        raise DomainError(f"representer has only {h.jmax} coefficients, need {m}")
    invnorm = inv_spectral_norm(system, m)
    if not invnorm <= math.sqrt(system.n):
        return 0.0, True
    that_m, ghat_m = system.block(m)
    try:
        x = np.linalg.solve(that_m, ghat_m)
    except np.linalg.LinAlgError:
        return 0.0, True
    if not np.all(np.isfinite(x)):
        return 0.0, True
    return float(h.coeffs[:m] @ x), False


def estimate_trace(system: GalerkinSystem, h: Representer,
                   M: Optional[int] = None) -> EstimateTrace:
    """Batch of plugin_estimate over m = 1..M (default: the full system)."""
    M = system.M if M is None else M
    if M > system.M:
        raise DomainError(f"system covers only {system.M} dimensions, need {M}")
    lhat = np.zeros(M)
    invnorm = np.empty(M)
    flags = np.zeros(M, dtype=bool)
    for m in range(1, M + 1):
        invnorm[m - 1] = inv_spectral_norm(system, m)
        lhat[m - 1], flags[m - 1] = plugin_estimate(system, h, m)
    return EstimateTrace(lhat=lhat, invnorm=invnorm, thresholded=flags)
