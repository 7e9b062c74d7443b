"""Synthetic data for the instrumental regression model Y = phi(Z) + U.

The joint density of (Z, W) on the unit square is the series expansion
f(z, w) = 1 + sum_{j>=2} s_j e_j(z) e_j(w), which makes the conditional
expectation operator diagonal with singular values s_j and keeps both
marginals uniform.  Responses are built as Y = [T phi](W) + V with Gaussian
V, so the regression error U = Y - phi(Z) satisfies E[U | W] = 0 exactly
while remaining endogenous.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .basis import eval_basis
from .errors import ConfigurationError, DomainError

PP = "pp"
PE = "pe"
EP = "ep"
REGIMES = (PP, PE, EP)

#: 2 * sum_{j>=2} s_j must stay below this so the density stays >= 0.1.
POSITIVITY_BUDGET = 0.9


def decay_shape(regime: str, a: float, jmax: int) -> np.ndarray:
    """Unscaled singular-value-squared shape: 1, then j^{-2a} or exp(-j^{2a})."""
    if regime not in REGIMES:
        raise ConfigurationError(f"unknown regime {regime!r}")
    if a <= 0.0:
        raise ConfigurationError(f"ill-posedness degree a must be > 0, got {a}")
    j = np.arange(1, jmax + 1, dtype=float)
    if regime == PE:
        shape = np.exp(-(j ** (2.0 * a)))
    else:
        shape = j ** (-2.0 * a)
    shape[0] = 1.0
    return shape


def max_positivity_scale(regime: str, a: float, jmax: int) -> float:
    """Largest scale c (capped at 1) keeping the positivity budget satisfied."""
    tail = np.sqrt(decay_shape(regime, a, jmax)[1:])
    total = tail.sum()
    if total == 0.0:
        return 1.0
    return min(1.0, POSITIVITY_BUDGET / (2.0 * total))


@dataclass(frozen=True)
class OperatorSpec:
    """Diagonal conditional-expectation operator with regular decay.

    Singular values are s_1 = 1 and s_j = scale * shape_j^{1/2} for j >= 2,
    where the shape is j^{-2a} for regimes "pp" and "ep" and exp(-j^{2a})
    for "pe".  d <= D are the link-condition constants used by the
    deterministic model-collection bounds.
    """

    regime: str
    a: float
    scale: float
    jmax: int
    d: float = 1.0
    D: float = 1.0

    def __post_init__(self):
        if self.jmax < 1:
            raise ConfigurationError(f"operator jmax must be >= 1, got {self.jmax}")
        if not 0.0 < self.scale <= 1.0:
            raise ConfigurationError(f"scale must lie in (0, 1], got {self.scale}")
        if not 1.0 <= self.d <= self.D:
            raise ConfigurationError("need 1 <= d <= D")
        decay_shape(self.regime, self.a, 1)  # validates regime and a
        if self.budget() > POSITIVITY_BUDGET + 1e-12:
            raise ConfigurationError(
                f"positivity budget violated: 2*sum s_j = {self.budget():.4f} > "
                f"{POSITIVITY_BUDGET}; reduce scale (max "
                f"{max_positivity_scale(self.regime, self.a, self.jmax):.4f}) or jmax"
            )

    def singular_values(self) -> np.ndarray:
        s = self.scale * np.sqrt(decay_shape(self.regime, self.a, self.jmax))
        s[0] = 1.0
        return s

    def upsilon(self) -> np.ndarray:
        """Actual singular values squared (upsilon_1 = 1, nonincreasing)."""
        return self.singular_values() ** 2

    def class_shape(self, jmax: Optional[int] = None) -> np.ndarray:
        """Decay shape extended analytically to any length (for rate oracles)."""
        return decay_shape(self.regime, self.a, jmax or self.jmax)

    def budget(self) -> float:
        return 2.0 * float(self.singular_values()[1:].sum())

    def envelope(self) -> float:
        """Rejection-sampling envelope constant: sup of the joint density."""
        return 1.0 + self.budget()


@dataclass(frozen=True)
class StructuralFunction:
    """Fourier coefficients of phi inside the smoothness ellipsoid.

    ``weights`` is the nondecreasing sequence beta with beta_1 = 1 and the
    ellipsoid constraint sum beta_j [phi]_j^2 <= rho.
    """

    coeffs: np.ndarray
    weights: np.ndarray
    rho: float

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "weights", weights)
        if coeffs.shape != weights.shape or coeffs.ndim != 1:
            raise ConfigurationError("coeffs and weights must be 1-d and aligned")
        if self.rho <= 0.0:
            raise ConfigurationError(f"radius rho must be > 0, got {self.rho}")
        if abs(weights[0] - 1.0) > 1e-12 or np.any(np.diff(weights) < -1e-12):
            raise ConfigurationError("weights must be nondecreasing with beta_1 = 1")
        mass = float(weights @ coeffs**2)
        if mass > self.rho * (1.0 + 1e-10):
            raise ConfigurationError(
                f"ellipsoid constraint violated: sum beta phi^2 = {mass:.6g} > rho"
            )
        # numeric surrogate for j^3 / beta_j -> 0
        j = np.arange(1, coeffs.size + 1, dtype=float)
        reg = j**3 / weights
        if coeffs.size >= 8 and reg[-1] > 0.5 * reg.max():
            raise ConfigurationError("weights grow too slowly: j^3/beta_j not vanishing")

    @property
    def jmax(self) -> int:
        return self.coeffs.size

    def value(self, t) -> np.ndarray:
        """Truncated series evaluation of phi."""
        return np.asarray(eval_basis(t, self.jmax) @ self.coeffs)

    @classmethod
    def power_law(cls, p: float, q: float, rho: float = 1.0, jmax: int = 512,
                  fill: float = 1.0) -> "StructuralFunction":
        """phi_j proportional to j^{-q}, scaled so sum beta phi^2 = fill * rho,
        with Sobolev-type weights beta_j = j^{2p}."""
        j = np.arange(1, jmax + 1, dtype=float)
        weights = j ** (2.0 * p)
        raw = j ** (-q)
        scale = math.sqrt(fill * rho / float(weights @ raw**2))
        return cls(scale * raw, weights, rho)


@dataclass(frozen=True)
class Sample:
    """An iid sample (Y_i, Z_i, W_i) plus the metadata needed to replay it."""

    y: np.ndarray
    z: np.ndarray
    w: np.ndarray
    seed: tuple
    sigma_v: float
    envelope: float = field(default=1.0)

    def __post_init__(self):
        for name in ("y", "z", "w"):
            arr = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, arr)
        if not (self.y.shape == self.z.shape == self.w.shape) or self.y.ndim != 1:
            raise ConfigurationError("y, z, w must be aligned 1-d arrays")
        if not np.all(np.isfinite(self.y)):
            raise ConfigurationError("nonfinite response values")
        if np.any(self.z < 0) or np.any(self.z > 1) or np.any(self.w < 0) or np.any(self.w > 1):
            raise ConfigurationError("regressor or instrument outside [0, 1]")
        object.__setattr__(self, "seed", tuple(int(s) for s in np.atleast_1d(self.seed)))

    @property
    def n(self) -> int:
        return self.y.size

    def y_sq_mean(self) -> float:
        return float(np.mean(self.y**2))


def joint_density(spec: OperatorSpec, z, w):
    """Series density f(z, w) = 1 + sum_{j>=2} s_j e_j(z) e_j(w)."""
    z_arr = np.asarray(z, dtype=float)
    w_arr = np.asarray(w, dtype=float)
    if np.any(z_arr < 0) or np.any(z_arr > 1) or np.any(w_arr < 0) or np.any(w_arr > 1):
        raise DomainError("density argument outside the unit square")
    s = spec.singular_values()
    ez = np.atleast_2d(eval_basis(z_arr, spec.jmax))
    ew = np.atleast_2d(eval_basis(w_arr, spec.jmax))
    vals = 1.0 + (ez[:, 1:] * ew[:, 1:]) @ s[1:]
    if z_arr.ndim == 0 and w_arr.ndim == 0:
        return float(vals[0])
    return vals


def sample_zw(spec: OperatorSpec, n: int, rng: np.random.Generator):
    """Draw n iid pairs from the joint density by rejection from Uniform([0,1]^2)."""
    bound = spec.envelope()
    z = np.empty(n)
    w = np.empty(n)
    filled = 0
    while filled < n:
        k = max(n - filled, 128)
        batch = int(1.2 * k * bound) + 16
        zc = rng.uniform(size=batch)
        wc = rng.uniform(size=batch)
        u = rng.uniform(size=batch)
        accept = u * bound <= joint_density(spec, zc, wc)
        take = min(int(accept.sum()), n - filled)
        z[filled:filled + take] = zc[accept][:take]
        w[filled:filled + take] = wc[accept][:take]
        filled += take
    return z, w


def apply_operator(spec: OperatorSpec, phi: StructuralFunction, w) -> np.ndarray:
    """[T phi](w) = sum_j s_j [phi]_j e_j(w), truncated at the operator support."""
    j = min(spec.jmax, phi.jmax)
    s = spec.singular_values()[:j]
    return np.asarray(eval_basis(w, j) @ (s * phi.coeffs[:j]))


def generate(spec: OperatorSpec, phi: StructuralFunction, sigma_v: float,
             n: int, seed) -> Sample:
    """Simulate a Sample of size n; deterministic in (spec, phi, sigma_v, n, seed).

    ``seed`` may be an int or a sequence of ints (a stream key), so parallel
    replications can use disjoint streams derived from (base seed, n, r).
    """
    if sigma_v <= 0.0:
        raise ConfigurationError(f"sigma_v must be > 0, got {sigma_v}")
    if n < 1:
        raise ConfigurationError(f"sample size must be >= 1, got {n}")
    key = tuple(int(s) for s in np.atleast_1d(seed))
    rng = np.random.default_rng(list(key))
    z, w = sample_zw(spec, n, rng)
    v = rng.normal(scale=sigma_v, size=n)
    y = apply_operator(spec, phi, w) + v
    return Sample(y=y, z=z, w=w, seed=key, sigma_v=sigma_v, envelope=spec.envelope())


def save_csv(sample: Sample, path) -> None:
    """Write the sample as ``y,z,w`` CSV with a JSON metadata sidecar."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["y", "z", "w"])
        for row in zip(sample.y, sample.z, sample.w):
            writer.writerow([repr(float(v)) for v in row])
    meta = {
        "n": sample.n,
        "seed": list(sample.seed),
        "sigma_v": sample.sigma_v,
        "envelope": sample.envelope,
    }
    path.with_suffix(path.suffix + ".meta.json").write_text(json.dumps(meta, indent=2))


def load_csv(path) -> Sample:
    """Read a sample written by :func:`save_csv`."""
    path = Path(path)
    data = np.genfromtxt(path, delimiter=",", names=True)
    meta_path = path.with_suffix(path.suffix + ".meta.json")
    if meta_path.exists():
        meta = json.loads(meta_path.read_text())
    else:
        meta = {"seed": [0], "sigma_v": 1.0, "envelope": 1.0}
    return Sample(
        y=np.atleast_1d(data["y"]),
        z=np.atleast_1d(data["z"]),
        w=np.atleast_1d(data["w"]),
        seed=meta["seed"],
        sigma_v=meta["sigma_v"],
        envelope=meta.get("envelope", 1.0),
    )
