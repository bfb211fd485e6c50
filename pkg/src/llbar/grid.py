"""Box-domain grids for the spectral solver.

A :class:`Grid` fixes the discretisation of a periodic or Neumann
(cosine-basis) box: number of components, per-axis resolution, physical
lengths, and all derived spectral machinery (wavenumber arrays, dealias
mask, quadrature weight).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Boundary", "Grid", "ConfigurationError"]


class ConfigurationError(ValueError):
    """Raised for invalid grid/model/experiment configuration."""


class Boundary(enum.Enum):
    PERIODIC = "periodic"
    NEUMANN_COSINE = "neumann_cosine"


@dataclass(frozen=True)
class Grid:
    """Uniform tensor-product grid on a d-dimensional box.

    Parameters
    ----------
    d : int
        Spatial dimension, 1, 2 or 3.
    m : int
        Number of field components, 1 (scalar order parameter) or 3
        (magnetisation vector).
    n : tuple of int
        Modes per axis; each entry must be even and >= 4 so the 2/3
        dealias cutoff is well defined.
    lengths : tuple of float
        Physical box lengths per axis.
    boundary : Boundary
        Periodic (Fourier basis) or Neumann (cosine basis, d <= 2 only).
    """

    d: int
    m: int
    n: tuple[int, ...]
    lengths: tuple[float, ...]
    boundary: Boundary = Boundary.PERIODIC
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ConfigurationError(f"dimension d must be 1, 2 or 3, got {self.d}")
        if self.m not in (1, 3):
            raise ConfigurationError(f"component count m must be 1 or 3, got {self.m}")
        n = tuple(int(v) for v in self.n)
        lengths = tuple(float(v) for v in self.lengths)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "lengths", lengths)
        if len(n) != self.d or len(lengths) != self.d:
            raise ConfigurationError("n and lengths must have one entry per axis")
        for ni in n:
            if ni < 4 or ni % 2 != 0:
                raise ConfigurationError(f"axis resolution must be even and >= 4, got {ni}")
        for Li in lengths:
            if Li <= 0:
                raise ConfigurationError(f"axis length must be positive, got {Li}")
        if self.boundary is Boundary.NEUMANN_COSINE and self.d > 2:
            raise ConfigurationError("the Neumann cosine basis is supported for d <= 2 only")

    # -- basic geometry ----------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        """Physical-space shape of one component."""
        return self.n

    @property
    def field_shape(self) -> tuple[int, ...]:
        return (self.m,) + self.n

    @property
    def spectral_shape(self) -> tuple[int, ...]:
        if self.boundary is Boundary.PERIODIC:
            return self.n[:-1] + (self.n[-1] // 2 + 1,)
        return self.n

    @property
    def cell_volume(self) -> float:
        dv = 1.0
        for Li, ni in zip(self.lengths, self.n):
            dv *= Li / ni
        return dv

    @property
    def volume(self) -> float:
        v = 1.0
        for Li in self.lengths:
            v *= Li
        return v

    def axis_coordinates(self, axis: int) -> np.ndarray:
        """1-D physical coordinates along ``axis``.

        Periodic grids sample left endpoints i*L/n; the cosine basis
        samples cell midpoints (i+1/2)*L/n (the natural DCT-II nodes).
        """
        ni, Li = self.n[axis], self.lengths[axis]
        if self.boundary is Boundary.PERIODIC:
            return np.arange(ni) * (Li / ni)
        return (np.arange(ni) + 0.5) * (Li / ni)

    def meshgrid(self) -> tuple[np.ndarray, ...]:
        axes = [self.axis_coordinates(a) for a in range(self.d)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    # -- spectral machinery (cached, derived once per grid) -----------------

    def _cached(self, key, builder):
        if key not in self._cache:
            self._cache[key] = builder()
        return self._cache[key]

    def axis_wavenumbers(self, axis: int) -> np.ndarray:
        """Angular wavenumbers along one axis, in transform storage order."""

        def build():
            ni, Li = self.n[axis], self.lengths[axis]
            if self.boundary is Boundary.PERIODIC:
                if axis == self.d - 1:
                    k = 2.0 * np.pi * np.fft.rfftfreq(ni, d=Li / ni)
                else:
                    k = 2.0 * np.pi * np.fft.fftfreq(ni, d=Li / ni)
            else:
                k = np.pi * np.arange(ni) / Li
            k.setflags(write=False)
            return k

        return self._cached(("k1", axis), build)

    def wavenumber_grids(self) -> tuple[np.ndarray, ...]:
        """Per-axis wavenumber arrays broadcast to the spectral shape."""

        def build():
            ks = []
            for a in range(self.d):
                shp = [1] * self.d
                shp[a] = -1
                ks.append(self.axis_wavenumbers(a).reshape(shp))
            return tuple(ks)

        return self._cached("kgrids", build)

    @property
    def k_squared(self) -> np.ndarray:
        def build():
            k2 = np.zeros(self.spectral_shape)
            for ka in self.wavenumber_grids():
                k2 = k2 + ka**2
            k2.setflags(write=False)
            return k2

        return self._cached("k2", build)

    @property
    def nyquist(self) -> tuple[float, ...]:
        """Maximal resolved angular wavenumber per axis, pi*n/L."""
        return tuple(np.pi * ni / Li for ni, Li in zip(self.n, self.lengths))

    def dealias_mask(self, fraction: float = 2.0 / 3.0) -> np.ndarray:
        """Boolean retention mask: keep |k_i| <= fraction * nyquist_i on every axis."""

        def build():
            mask = np.ones(self.spectral_shape, dtype=bool)
            for a, ka in enumerate(self.wavenumber_grids()):
                cutoff = fraction * self.nyquist[a]
                mask &= np.abs(ka) <= cutoff + 1e-12
            mask.setflags(write=False)
            return mask

        return self._cached(("dealias", fraction), build)

    @property
    def parseval_weights(self) -> np.ndarray:
        """Mode weights w_k with sum_x |f|^2 = sum_k w_k |f_hat_k|^2 (ortho transforms).

        For the half-spectrum rfft storage, modes off the self-conjugate
        planes of the last axis count twice; the cosine basis stores the
        full real spectrum, so all weights are one.
        """

        def build():
            w = np.ones(self.spectral_shape)
            if self.boundary is Boundary.PERIODIC:
                nd = self.n[-1]
                w[..., 1:] = 2.0
                if nd % 2 == 0:
                    w[..., -1] = 1.0
            w.setflags(write=False)
            return w

        return self._cached("weights", build)

    def metadata(self) -> dict:
        return {
            "d": self.d,
            "m": self.m,
            "n": list(self.n),
            "lengths": list(self.lengths),
            "boundary": self.boundary.value,
        }

    @classmethod
    def from_metadata(cls, meta: dict) -> "Grid":
        return cls(
            d=int(meta["d"]),
            m=int(meta["m"]),
            n=tuple(meta["n"]),
            lengths=tuple(meta["lengths"]),
            boundary=Boundary(meta["boundary"]),
        )
