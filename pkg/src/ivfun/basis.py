"""Trigonometric basis on [0, 1] and representers of linear functionals.

The basis is e_1 = 1, e_{2j}(t) = sqrt(2) cos(2 pi j t),
e_{2j+1}(t) = sqrt(2) sin(2 pi j t).  A linear functional of a function
given by its coefficient sequence is the inner product with a representer
coefficient sequence; the built-in representers are point evaluation,
the average over [0, b], and a weighted average derivative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError

#: Default truncation level for "infinite" coefficient sequences.
DEFAULT_JMAX = 512

POINT_EVAL = "point"
AVERAGE = "average"
WEIGHTED_AVG_DERIV = "weighted_deriv"
CUSTOM = "custom"


def eval_basis(t, m: int) -> np.ndarray:
    """Evaluate (e_1(t), ..., e_m(t)).

    Parameters
    ----------
    t : float or array of shape (k,)
        Points in [0, 1].
    m : int
        Number of basis functions, m >= 1.

    Returns
    -------
    Array of shape (m,) for scalar t, else (k, m).
    """
    if m < 1:
        raise DomainError(f"basis dimension must be >= 1, got {m}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0) or np.any(t_arr > 1.0):
        raise DomainError("basis argument outside [0, 1]")
    scalar = t_arr.ndim == 0
    t_arr = np.atleast_1d(t_arr)
    out = np.empty((t_arr.size, m))
    out[:, 0] = 1.0
    if m > 1:
        k = np.arange(2, m + 1)
        freq = 2.0 * np.pi * (k // 2)
        phase = np.outer(t_arr, freq)
        vals = np.where(k % 2 == 0, np.cos(phase), np.sin(phase))
        out[:, 1:] = math.sqrt(2.0) * vals
    return out[0] if scalar else out


@dataclass(frozen=True)
class Representer:
    """Coefficient sequence of a linear functional.

    ``decay_s`` is the exponent s in [h]_j^2 ~ j^{-2s}, consumed by the
    rate module; it is 0 for point evaluation (bounded, non-decaying
    coefficients) and may be None for custom representers.
    """

    kind: str
    coeffs: np.ndarray
    decay_s: Optional[float] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.ndim != 1 or coeffs.size < 1:
            raise ConfigurationError("representer needs a nonempty coefficient vector")
        if not np.all(np.isfinite(coeffs)):
            raise ConfigurationError("representer coefficients must be finite")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def jmax(self) -> int:
        return self.coeffs.size


def point_eval(t0: float, jmax: int = DEFAULT_JMAX) -> Representer:
    """Representer of phi -> phi(t0): [h]_j = e_j(t0)."""
    if not 0.0 <= t0 <= 1.0:
        raise DomainError(f"evaluation point {t0} outside [0, 1]")
    return Representer(POINT_EVAL, eval_basis(t0, jmax), decay_s=0.0, params={"t0": t0})


def average(b: float, jmax: int = DEFAULT_JMAX) -> Representer:
    """Representer of phi -> integral of phi over [0, b], 0 < b < 1.

    Coefficients are the inner products of the indicator of [0, b] with the
    basis: [h]_1 = b, [h]_{2j} = sin(2 pi j b) / (sqrt(2) pi j),
    [h]_{2j+1} = (1 - cos(2 pi j b)) / (sqrt(2) pi j).
    """
    if not 0.0 < b < 1.0:
        raise DomainError(f"average endpoint {b} outside (0, 1)")
    coeffs = np.zeros(jmax)
    coeffs[0] = b
    k = np.arange(2, jmax + 1)
    j = k // 2
    angle = 2.0 * np.pi * j * b
    denom = math.sqrt(2.0) * np.pi * j
    coeffs[1:] = np.where(k % 2 == 0, np.sin(angle), 1.0 - np.cos(angle)) / denom
    return Representer(AVERAGE, coeffs, decay_s=1.0, params={"b": b})


def weighted_avg_deriv(jmax: int = DEFAULT_JMAX) -> Representer:
    """Representer of phi -> integral of phi(t) 4(1 - 2t) dt.

    Equals minus the average derivative weighted by H(t) = 1 - (2t - 1)^2:
    [h]_1 = 0, [h]_{2j} = 0, [h]_{2j+1} = 4 sqrt(2) / (pi j).
    """
    coeffs = np.zeros(jmax)
    k = np.arange(2, jmax + 1)
    j = k // 2
    coeffs[1:] = np.where(k % 2 == 0, 0.0, 4.0 * math.sqrt(2.0) / (np.pi * j))
    return Representer(WEIGHTED_AVG_DERIV, coeffs, decay_s=1.0)


def custom(coeffs: Sequence[float], decay_s: Optional[float] = None) -> Representer:
    """Representer from explicit coefficients, passed through unchanged."""
    return Representer(CUSTOM, np.asarray(coeffs, dtype=float), decay_s=decay_s)


def representer_coeffs(kind: str, jmax: int = DEFAULT_JMAX, **params) -> Representer:
    """Build a representer by kind name; see the individual constructors."""
    if jmax < 1:
        raise DomainError(f"jmax must be >= 1, got {jmax}")
    if kind == POINT_EVAL:
        return point_eval(params["t0"], jmax)
    if kind == AVERAGE:
        return average(params["b"], jmax)
    if kind == WEIGHTED_AVG_DERIV:
        return weighted_avg_deriv(jmax)
    if kind == CUSTOM:
        return custom(params["coeffs"], params.get("decay_s"))
    raise ConfigurationError(f"unknown representer kind {kind!r}")


def functional_of(phi_coeffs, h: Representer) -> float:
    """Ground-truth functional value sum_j [h]_j [phi]_j (truncated).

    ``phi_coeffs`` may be a coefficient array or anything with a ``coeffs``
    attribute.  Shorter of the two sequences sets the truncation level.
    """
    coeffs = getattr(phi_coeffs, "coeffs", phi_coeffs)
    coeffs = np.asarray(coeffs, dtype=float)
    j = min(coeffs.size, h.coeffs.size)
    return float(h.coeffs[:j] @ coeffs[:j])
