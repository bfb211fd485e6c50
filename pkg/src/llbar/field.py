"""Fields on spectral grids: transforms, derivatives, dealiasing.

A :class:`Field` is an m-component real function sampled on a
:class:`~llbar.grid.Grid`, carrying lazily synchronised physical values
and spectral coefficients.  Transforms use orthonormal scaling, so
Parseval holds with the grid's mode weights.

Periodic boxes use the half-spectrum real FFT.  Neumann boxes use the
type-II cosine transform on midpoint nodes; first derivatives move
between the cosine and sine bases, so they carry a parity tag.
"""

from __future__ import annotations

import numpy as np
from scipy import fft as sfft

from .grid import Boundary, ConfigurationError, Grid

__all__ = [
    "Field",
    "laplacian",
    "bilaplacian",
    "gradient",
    "divergence",
    "dealias",
    "diff_axis",
    "cubic_padded",
]


def _spatial_axes(grid: Grid) -> tuple[int, ...]:
    return tuple(range(1, grid.d + 1))


def _forward(values: np.ndarray, grid: Grid) -> np.ndarray:
    axes = _spatial_axes(grid)
    if grid.boundary is Boundary.PERIODIC:
        return sfft.rfftn(values, axes=axes, norm="ortho")
    return sfft.dctn(values, type=2, axes=axes, norm="ortho")


def _inverse(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    axes = _spatial_axes(grid)
    if grid.boundary is Boundary.PERIODIC:
        return sfft.irfftn(coeffs, s=grid.n, axes=axes, norm="ortho")
    return sfft.idctn(coeffs, type=2, axes=axes, norm="ortho")


class Field:
    """m-component field with lazily synchronised representations."""

    __slots__ = ("grid", "_values", "_coeffs")

    def __init__(self, grid: Grid, values=None, coeffs=None):
        if values is None and coeffs is None:
            raise ConfigurationError("a Field needs physical values or spectral coefficients")
        if values is not None and values.shape != grid.field_shape:
            raise ConfigurationError(
                f"field values shape {values.shape} does not match grid {grid.field_shape}"
            )
        if coeffs is not None and coeffs.shape != (grid.m,) + grid.spectral_shape:
            raise ConfigurationError(
                f"field coefficients shape {coeffs.shape} does not match grid "
                f"{(grid.m,) + grid.spectral_shape}"
            )
        self.grid = grid
        self._values = values
        self._coeffs = coeffs

    # -- constructors --------------------------------------------------------

    @classmethod
    def from_values(cls, grid: Grid, values: np.ndarray) -> "Field":
        return cls(grid, values=np.ascontiguousarray(values, dtype=np.float64))

    @classmethod
    def from_coeffs(cls, grid: Grid, coeffs: np.ndarray) -> "Field":
        dtype = np.complex128 if grid.boundary is Boundary.PERIODIC else np.float64
        return cls(grid, coeffs=np.ascontiguousarray(coeffs, dtype=dtype))

    @classmethod
    def zeros(cls, grid: Grid) -> "Field":
        return cls(grid, values=np.zeros(grid.field_shape))

    @classmethod
    def constant(cls, grid: Grid, vec) -> "Field":
        vec = np.asarray(vec, dtype=np.float64).reshape(grid.m)
        values = np.broadcast_to(
            vec.reshape((grid.m,) + (1,) * grid.d), grid.field_shape
        ).copy()
        return cls(grid, values=values)

    def copy(self) -> "Field":
        return Field(
            self.grid,
            values=None if self._values is None else self._values.copy(),
            coeffs=None if self._coeffs is None else self._coeffs.copy(),
        )

    # -- synchronisation -------------------------------------------------------

    def to_spectral(self) -> "Field":
        """Populate the spectral representation; returns self."""
        if self._coeffs is None:
            self._coeffs = _forward(self._values, self.grid)
        return self

    def to_physical(self) -> "Field":
        """Populate the physical representation; returns self."""
        if self._values is None:
            self._values = _inverse(self._coeffs, self.grid)
        return self

    @property
    def values(self) -> np.ndarray:
        return self.to_physical()._values

    @property
    def coeffs(self) -> np.ndarray:
        return self.to_spectral()._coeffs

    # -- arithmetic (physical space, returns fresh fields) ---------------------

    def __add__(self, other: "Field") -> "Field":
        return Field.from_values(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        return Field.from_values(self.grid, self.values - other.values)

    def __mul__(self, scalar: float) -> "Field":
        return Field.from_values(self.grid, self.values * scalar)

    __rmul__ = __mul__

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))


# -- spectral operators -------------------------------------------------------


def _apply_multiplier(f: Field, mult: np.ndarray) -> Field:
    return Field.from_coeffs(f.grid, f.coeffs * mult)


def laplacian(f: Field) -> Field:
    """Spectral Laplacian: mode k scaled by -|k|^2."""
    return _apply_multiplier(f, -f.grid.k_squared)


def bilaplacian(f: Field) -> Field:
    """Spectral bilaplacian: mode k scaled by |k|^4."""
    return _apply_multiplier(f, f.grid.k_squared**2)


def diff_axis(values: np.ndarray, grid: Grid, axis: int, parity: str = "cos") -> np.ndarray:
    """First derivative of sampled values along one spatial axis.

    ``values`` has shape (..., n_0, ..., n_{d-1}) with the spatial axes
    trailing.  ``parity`` only matters for the cosine basis: "cos" means
    the input is a cosine series along ``axis`` (output is a sine
    series); "sin" the reverse.  The sine series drops the frequency-n
    mode, which a gradient of a cosine field never populates.
    """
    ax = values.ndim - grid.d + axis
    if grid.boundary is Boundary.PERIODIC:
        if axis == grid.d - 1:
            c = sfft.rfft(values, axis=ax, norm="ortho")
            k = 2.0 * np.pi * np.fft.rfftfreq(grid.n[axis], d=grid.lengths[axis] / grid.n[axis])
        else:
            c = sfft.fft(values, axis=ax, norm="ortho")
            k = 2.0 * np.pi * np.fft.fftfreq(grid.n[axis], d=grid.lengths[axis] / grid.n[axis])
        shp = [1] * values.ndim
        shp[ax] = -1
        c *= 1j * k.reshape(shp)
        if axis == grid.d - 1:
            return sfft.irfft(c, n=grid.n[axis], axis=ax, norm="ortho")
        return sfft.ifft(c, axis=ax, norm="ortho").real

    k = np.pi * np.arange(grid.n[axis]) / grid.lengths[axis]
    shp = [1] * values.ndim
    shp[ax] = -1
    if parity == "cos":
        c = sfft.dct(values, type=2, axis=ax, norm="ortho")
        s = np.zeros_like(c)
        src = [slice(None)] * values.ndim
        dst = [slice(None)] * values.ndim
        src[ax] = slice(1, None)
        dst[ax] = slice(0, -1)
        s[tuple(dst)] = -(k[1:].reshape([-1] + [1] * (values.ndim - ax - 1))) * c[tuple(src)]
        return sfft.idst(s, type=2, axis=ax, norm="ortho")
    if parity == "sin":
        s = sfft.dst(values, type=2, axis=ax, norm="ortho")
        c = np.zeros_like(s)
        src = [slice(None)] * values.ndim
        dst = [slice(None)] * values.ndim
        src[ax] = slice(0, -1)
        dst[ax] = slice(1, None)
        c[tuple(dst)] = k[1:].reshape([-1] + [1] * (values.ndim - ax - 1)) * s[tuple(src)]
        return sfft.idct(c, type=2, axis=ax, norm="ortho")
    raise ConfigurationError(f"unknown derivative parity {parity!r}")


def gradient(f: Field) -> np.ndarray:
    """Physical-space gradient, shape (d, m, *n).

    Component ``a`` is the exact derivative along axis ``a``; on the
    cosine basis it is a sine series along that axis.
    """
    grid = f.grid
    out = np.empty((grid.d,) + grid.field_shape)
    vals = f.values
    for a in range(grid.d):
        out[a] = diff_axis(vals, grid, a, parity="cos")
    return out


def divergence(g: np.ndarray, grid: Grid, parity: str = "sin") -> Field:
    """Contract a (d, m, *n) array with the derivative along each axis.

    With the default ``parity="sin"`` the input is treated as the output
    of :func:`gradient`, which makes divergence(gradient(f)) the exact
    spectral Laplacian.  Use ``parity="cos"`` for flux-like inputs built
    from pointwise products.
    """
    if g.shape != (grid.d,) + grid.field_shape:
        raise ConfigurationError(
            f"divergence input shape {g.shape} does not match {(grid.d,) + grid.field_shape}"
        )
    acc = np.zeros(grid.field_shape)
    for a in range(grid.d):
        acc += diff_axis(g[a], grid, a, parity=parity)
    return Field.from_values(grid, acc)


def dealias(f: Field, fraction: float = 2.0 / 3.0) -> Field:
    """Zero all modes with any |k_i| above ``fraction`` of the axis Nyquist."""
    return Field.from_coeffs(f.grid, f.coeffs * f.grid.dealias_mask(fraction))


# -- alias-free cubic via zero padding ------------------------------------------


def _pad_index(n_src: int, n_dst: int):
    half = n_src // 2
    pos = np.arange(0, half)  # Nyquist bin dropped: its phase is ambiguous
    neg = np.arange(n_dst - (half - 1), n_dst)
    return np.concatenate([pos, neg])


def cubic_padded(f: Field) -> Field:
    """|u|^2 u evaluated alias-free by zero-padding each axis by 2."""
    grid = f.grid
    axes = _spatial_axes(grid)
    n_fine = tuple(2 * ni for ni in grid.n)
    if grid.boundary is Boundary.PERIODIC:
        c = sfft.fftn(f.values, axes=axes, norm="forward")
        fine = np.zeros((grid.m,) + n_fine, dtype=np.complex128)
        idx = np.ix_(
            np.arange(grid.m), *[_pad_index(grid.n[a], n_fine[a]) for a in range(grid.d)]
        )
        src = np.ix_(
            np.arange(grid.m),
            *[np.concatenate([np.arange(0, ni // 2), np.arange(ni - (ni // 2 - 1), ni)])
              for ni in grid.n],
        )
        fine[idx] = c[src]
        u_fine = sfft.ifftn(fine, axes=axes, norm="forward").real
        cube = (u_fine * u_fine).sum(axis=0, keepdims=True) * u_fine
        c_fine = sfft.fftn(cube, axes=axes, norm="forward")
        out = np.zeros((grid.m,) + grid.n, dtype=np.complex128)
        out[src] = c_fine[idx]
        vals = sfft.ifftn(out, axes=axes, norm="forward").real
        return Field.from_values(grid, vals)

    # cosine basis: frequencies 0..n-1 embed directly into the 2n-mode range
    scale = np.sqrt(2.0) ** grid.d  # ortho DCT scaling is resolution dependent
    c = sfft.dctn(f.values, type=2, axes=axes, norm="ortho") * scale
    fine = np.zeros((grid.m,) + n_fine)
    fine[(slice(None),) + tuple(slice(0, ni) for ni in grid.n)] = c
    u_fine = sfft.idctn(fine, type=2, axes=axes, norm="ortho")
    cube = (u_fine * u_fine).sum(axis=0, keepdims=True) * u_fine
    c_fine = sfft.dctn(cube, type=2, axes=axes, norm="ortho")
    out = c_fine[(slice(None),) + tuple(slice(0, ni) for ni in grid.n)] / scale
    return Field.from_coeffs(grid, out.copy())
