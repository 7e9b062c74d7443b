"""Nested empirical Galerkin matrices and their inverse spectral norms.

Both bases are the trigonometric system, so the population matrix of a
diagonal operator is diag(s_1, ..., s_M).  The m x m data for every m is
the leading principal block of the M x M assembly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import eval_basis
from .datagen import Sample
from .errors import ConfigurationError, DomainError

FROM_SAMPLE = "from_sample"
INJECTED = "injected"

#: relative sigma_min / sigma_max threshold below which a block counts as singular
SINGULAR_RTOL = 1e-12


@dataclass(frozen=True)
class GalerkinSystem:
    """Empirical matrix [That]_M, vector [ghat]_M, and the sample size n."""

    that: np.ndarray
    ghat: np.ndarray
    n: int
    source: str = FROM_SAMPLE

    def __post_init__(self):
        that = np.asarray(self.that, dtype=float)
        ghat = np.asarray(self.ghat, dtype=float)
        if that.ndim != 2 or that.shape[0] != that.shape[1]:
            raise ConfigurationError("matrix must be square")
        if ghat.shape != (that.shape[0],):
            raise ConfigurationError("vector length must match matrix dimension")
        if not (np.all(np.isfinite(that)) and np.all(np.isfinite(ghat))):
            raise ConfigurationError("nonfinite Galerkin data")
        if self.n < 1:
            raise ConfigurationError(f"sample size must be >= 1, got {self.n}")
        object.__setattr__(self, "that", that)
        object.__setattr__(self, "ghat", ghat)

    @property
    def M(self) -> int:
        return self.that.shape[0]

    def block(self, m: int):
        """Leading m x m matrix and m-vector."""
        if not 1 <= m <= self.M:
            raise DomainError(f"dimension {m} outside 1..{self.M}")
        return self.that[:m, :m], self.ghat[:m]


def assemble(sample: Sample, M: int) -> GalerkinSystem:
    """Single-pass assembly of [That]_M and [ghat]_M from a sample."""
    if M < 1:
        raise DomainError(f"dimension must be >= 1, got {M}")
    ez = eval_basis(sample.z, M)
    fw = eval_basis(sample.w, M)
    that = fw.T @ ez / sample.n
    ghat = fw.T @ sample.y / sample.n
    return GalerkinSystem(that=that, ghat=ghat, n=sample.n, source=FROM_SAMPLE)


def inject(that, ghat, n: int) -> GalerkinSystem:
    """Wrap externally supplied matrices; downstream code treats both alike."""
    return GalerkinSystem(that=np.asarray(that, dtype=float),
                          ghat=np.asarray(ghat, dtype=float),
                          n=n, source=INJECTED)


def inv_spectral_norm(system: GalerkinSystem, m: int) -> float:
    """Spectral norm of the inverse leading block, +inf if singular.

    Computed as 1 / sigma_min via SVD; a block counts as singular when
    sigma_min < SINGULAR_RTOL * sigma_max (or the block is exactly zero).
    """
    block, _ = system.block(m)
    sv = np.linalg.svd(block, compute_uv=False)
    smax, smin = sv[0], sv[-1]
    if smin <= SINGULAR_RTOL * smax or smax == 0.0:
        return math.inf
    return 1.0 / smin
