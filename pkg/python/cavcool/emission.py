"""
Spontaneous-emission angular pattern

N(u) du is the probability that a spontaneously emitted photon leaves at an
angle θ0 to the trap axis with u = cosθ0 in [u, u+du]. The pattern fixes the
diffusion coefficient through its second moment α and the recoil kicks in
Monte Carlo runs through its inverse CDF.
"""

from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

# Inverse-CDF sampling table size
SAMPLING_POINTS = 1024


class EmissionKind(str, Enum):
    """Kinds of emission pattern"""

    DIPOLE_1D = "dipole1d"
    ISOTROPIC = "isotropic"
    TABULATED = "tabulated"


class EmissionPattern(BaseModel):
    """Angular distribution of spontaneously emitted photons.

    ``dipole1d`` is N(u) = 3/8 (1 + u²), ``isotropic`` is N(u) = 1/2 and
    ``tabulated`` takes CDF values on a uniform grid of u from −1 to 1
    (piecewise-constant density between grid points).
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: EmissionKind = Field(EmissionKind.DIPOLE_1D, description="Pattern shape")
    cdf: Optional[List[float]] = Field(
        None, description="CDF on a uniform cosθ0 grid over [-1, 1] (tabulated only)"
    )

    @model_validator(mode="after")
    def _check_table(self) -> "EmissionPattern":
        if self.kind != EmissionKind.TABULATED:
            if self.cdf is not None:
                raise ValueError("cdf is only allowed for the tabulated pattern")
            return self
        if self.cdf is None or len(self.cdf) < 2:
            raise ValueError("tabulated pattern needs at least two CDF values")
        values = np.asarray(self.cdf, dtype=float)
        if abs(values[0]) > 1e-12 or abs(values[-1] - 1.0) > 1e-12:
            raise ValueError("tabulated CDF must start at 0 and end at 1")
        if np.any(np.diff(values) < 0):
            raise ValueError("tabulated CDF must be nondecreasing")
        return self

    def _grid(self) -> np.ndarray:
        return np.linspace(-1.0, 1.0, len(self.cdf or []))

    def density(self, u) -> np.ndarray:
        """N(u) for u in [−1, 1]"""
        u = np.asarray(u, dtype=float)
        if self.kind == EmissionKind.DIPOLE_1D:
            return 0.375 * (1.0 + u**2)
        if self.kind == EmissionKind.ISOTROPIC:
            return np.full_like(u, 0.5)
        grid = self._grid()
        slopes = np.diff(np.asarray(self.cdf)) / np.diff(grid)
        index = np.clip(np.searchsorted(grid, u, side="right") - 1, 0, len(slopes) - 1)
        return slopes[index]

    def cdf_values(self, u) -> np.ndarray:
        """F(u) = ∫_{-1}^{u} N"""
        u = np.asarray(u, dtype=float)
        if self.kind == EmissionKind.DIPOLE_1D:
            return 0.375 * (u + u**3 / 3.0) + 0.5
        if self.kind == EmissionKind.ISOTROPIC:
            return 0.5 * (u + 1.0)
        return np.interp(u, self._grid(), np.asarray(self.cdf))

    @property
    def alpha(self) -> float:
        """Second moment α = ∫ u² N(u) du"""
        if self.kind == EmissionKind.DIPOLE_1D:
            return 0.4
        if self.kind == EmissionKind.ISOTROPIC:
            return 1.0 / 3.0
        grid = self._grid()
        masses = np.diff(np.asarray(self.cdf))
        # Exact moment of a piecewise-constant density.
        moments = (grid[1:] ** 3 - grid[:-1] ** 3) / (3.0 * np.diff(grid))
        return float(np.sum(masses * moments))

    def sampling_table(self, points: int = SAMPLING_POINTS) -> Tuple[np.ndarray, np.ndarray]:
        """CDF values and abscissae for inverse-CDF sampling"""
        u = np.linspace(-1.0, 1.0, points)
        return self.cdf_values(u), u

    def sample(self, rng: np.random.Generator, size=None):
        """Draw cosθ0 values by inverse-CDF interpolation on the sampling table"""
        cdf, u = self.sampling_table()
        return np.interp(rng.random(size), cdf, u)

    def quadrature(self, n_nodes: int = 32) -> Tuple[np.ndarray, np.ndarray]:
        """Gauss-Legendre nodes on [−1, 1] with weights folded with N(u).

        The weights sum to one up to quadrature error.
        """
        nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
        return nodes, weights * self.density(nodes)
