"""Periodic grid, physical/spectral field containers, and the Fourier transforms.

Conventions, fixed once for the whole package:

* The domain is the torus [0, 2pi)^3.  Sample arrays are C-ordered with
  axis 0 = x1 (slowest), axis 2 = x3 (fastest, contiguous); the sample at
  index (i1, i2, i3) sits at x = 2pi*(i1/n1, i2/n2, i3/n3).
* Wavevectors are integers k_i in {-n_i/2, ..., n_i/2 - 1}, laid out in
  standard FFT order along each axis.
* The forward transform divides by n1*n2*n3, so coefficients are true
  Fourier coefficients: f(x) = sum_k c_k exp(i k.x).  Single modes are then
  exact, and Parseval reads sum_k |c_k|^2 = mean_x |f(x)|^2.
"""

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .errors import FieldShapeError, GridMismatchError, NonFiniteFieldError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Grid:
    """An n1 x n2 x n3 periodic grid on [0, 2pi)^3."""

    n1: int
    n2: int
    n3: int

    def __post_init__(self):
        for name, n in (("n1", self.n1), ("n2", self.n2), ("n3", self.n3)):
            if n < 8 or n % 2 != 0:
                raise FieldShapeError(
                    f"{name}={n}: grid sizes must be even and >= 8"
                )

    @property
    def shape(self):
        return (self.n1, self.n2, self.n3)

    @property
    def size(self):
        return self.n1 * self.n2 * self.n3

    @property
    def cell_volume(self):
        return TWO_PI**3 / self.size

    def axis_wavenumbers(self, axis):
        """Integer wavenumbers along one axis (1, 2 or 3), FFT order."""
        n = self.shape[axis - 1]
        return np.fft.fftfreq(n, d=1.0 / n).astype(np.float64)

    def wavevectors(self):
        """Broadcastable (k1, k2, k3) arrays shaped (n1,1,1), (1,n2,1), (1,1,n3)."""
        k1 = self.axis_wavenumbers(1).reshape(-1, 1, 1)
        k2 = self.axis_wavenumbers(2).reshape(1, -1, 1)
        k3 = self.axis_wavenumbers(3).reshape(1, 1, -1)
        return k1, k2, k3

    def k_sq(self):
        k1, k2, k3 = self.wavevectors()
        return k1**2 + k2**2 + k3**2

    def kh_sq(self):
        k1, k2, _ = self.wavevectors()
        return k1**2 + k2**2

    def k_abs(self):
        return np.sqrt(self.k_sq())

    def kh_abs(self):
        return np.sqrt(self.kh_sq())

    def k3_abs(self):
        _, _, k3 = self.wavevectors()
        return np.broadcast_to(np.abs(k3), (1, 1, self.n3))

    @property
    def k_max(self):
        """Largest |k| representable on the grid."""
        return float(
            np.sqrt((self.n1 // 2) ** 2 + (self.n2 // 2) ** 2 + (self.n3 // 2) ** 2)
        )

    def mesh(self):
        """Physical coordinate arrays x1, x2, x3, broadcastable like wavevectors."""
        x1 = (TWO_PI * np.arange(self.n1) / self.n1).reshape(-1, 1, 1)
        x2 = (TWO_PI * np.arange(self.n2) / self.n2).reshape(1, -1, 1)
        x3 = (TWO_PI * np.arange(self.n3) / self.n3).reshape(1, 1, -1)
        return x1, x2, x3


def _check_shape(grid, values, what):
    if values.shape != grid.shape:
        raise FieldShapeError(
            f"{what} has shape {values.shape}, grid expects {grid.shape}"
        )


@dataclass
class RealField:
    """Point samples of a scalar on the grid.

    Samples may be complex (e.g. single Fourier modes used in tests); fields
    coming from physics are real.
    """

    grid: Grid
    samples: np.ndarray

    def __post_init__(self):
        self.samples = np.asarray(self.samples)
        _check_shape(self.grid, self.samples, "sample array")
        if not np.all(np.isfinite(self.samples)):
            raise NonFiniteFieldError("sample array contains NaN/Inf")


@dataclass
class SpectralField:
    """Fourier coefficients of a scalar, indexed by integer wavevector."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        _check_shape(self.grid, self.coeffs, "coefficient array")

    def copy(self):
        return SpectralField(self.grid, self.coeffs.copy())

    @property
    def mean_coefficient(self):
        return complex(self.coeffs[0, 0, 0])

    def zero_mean(self):
        """Return the field with the k=0 coefficient dropped."""
        out = self.coeffs.copy()
        out[0, 0, 0] = 0.0
        return SpectralField(self.grid, out)

    def hermitian_defect(self):
        """Max |c(-k) - conj(c(k))|, zero for transforms of real samples."""
        c = self.coeffs
        flipped = c[
            np.ix_(*(np.concatenate(([0], np.arange(n - 1, 0, -1))) for n in c.shape))
        ]
        return float(np.max(np.abs(flipped - np.conj(c))))


def same_grid(*fields):
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise GridMismatchError(f"grids differ: {f.grid} vs {g}")
    return g


def forward_transform(f: RealField) -> SpectralField:
    """Physical samples -> true Fourier coefficients."""
    coeffs = scipy.fft.fftn(f.samples.astype(np.complex128)) / f.grid.size
    return SpectralField(f.grid, coeffs)


def inverse_transform(a: SpectralField, real=None) -> RealField:
    """Fourier coefficients -> physical samples.

    With real=True the imaginary part (a Hermitian-symmetry residual) is
    discarded; default keeps it, so complex test modes round-trip.
    """
    samples = scipy.fft.ifftn(a.coeffs) * a.grid.size
    if real:
        samples = samples.real
    return RealField(a.grid, samples)


def physical(a: SpectralField) -> np.ndarray:
    """Raw physical samples of a spectral field (complex array)."""
    return scipy.fft.ifftn(a.coeffs) * a.grid.size


def from_samples(grid: Grid, samples) -> SpectralField:
    return forward_transform(RealField(grid, np.asarray(samples)))


def single_mode(grid: Grid, k, amplitude=1.0) -> SpectralField:
    """Field with one coefficient: amplitude * exp(i k.x)."""
    coeffs = np.zeros(grid.shape, dtype=np.complex128)
    idx = tuple(int(ki) % n for ki, n in zip(k, grid.shape))
    coeffs[idx] = amplitude
    return SpectralField(grid, coeffs)
