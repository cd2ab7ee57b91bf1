"""Multiplier calculus and the norms that are diagonal in Fourier space.

Homogeneous convention: the k=0 coefficient never contributes to any norm
here, and multipliers that are singular at 0 simply zero that mode.  Modes
on the plane k_h=0 (resp. k3=0) are excluded from sums whose horizontal
(resp. vertical) exponent is negative; |k_h|^s is singular there and the
full-space integrability argument has no grid analogue.

Spectral norms are plain l^2 sums over true Fourier coefficients.  The
bridge to the physical L^2 norm is the fixed volume factor (2*pi)^{3/2}:

    lp_norm(f, 2) == (2*pi)**1.5 * sobolev_aniso_norm(fhat, 0, 0)
"""

import numpy as np
import scipy.fft

from .errors import (
    MeanModeError,
    MultiplierSingularityError,
    ParameterRangeError,
)
from .grid import Grid, RealField, SpectralField, same_grid

PARSEVAL_FACTOR = (2.0 * np.pi) ** 1.5


def alpha_of_r(r, where="vorticity integrability exponent"):
    """Scaling exponent 1/r - 1/2; decreases from 1/6 to 0 on [3/2, 2]."""
    if not (1.5 <= r <= 2.0):
        raise ParameterRangeError("r", r, "[3/2, 2]", where)
    return 1.0 / r - 0.5


def spectral_derivative(a: SpectralField, axis: int) -> SpectralField:
    """d/dx_axis as the diagonal multiplier i*k_axis (axis in {1,2,3})."""
    if axis not in (1, 2, 3):
        raise ParameterRangeError("axis", axis, "{1, 2, 3}")
    k = a.grid.axis_wavenumbers(axis)
    shape = [1, 1, 1]
    shape[axis - 1] = -1
    return SpectralField(a.grid, a.coeffs * (1j * k.reshape(shape)))


def spectral_gradient(a: SpectralField):
    return tuple(spectral_derivative(a, ax) for ax in (1, 2, 3))


def apply_multiplier(a: SpectralField, m) -> SpectralField:
    """Pointwise multiplier in Fourier space.

    ``m`` maps broadcastable integer wavevector arrays (k1, k2, k3) to a
    complex array.  Non-finite values on the structural degenerate sets
    {k=0}, {k_h=0}, {k3=0} are the homogeneous convention: those modes are
    zeroed (so 1/|k|^2, 1/|k_h|^2 and similar weights just work).  A
    non-finite value anywhere else raises, naming the wavevector.
    """
    g = a.grid
    k1, k2, k3 = g.wavevectors()
    with np.errstate(divide="ignore", invalid="ignore"):
        weights = np.asarray(m(k1, k2, k3), dtype=np.complex128)
    weights = np.array(np.broadcast_to(weights, g.shape))
    bad = ~np.isfinite(weights)
    if np.any(bad):
        degenerate = np.broadcast_to(g.kh_sq() == 0, g.shape) | np.broadcast_to(
            np.abs(k3) == 0, g.shape
        )
        convention = bad & degenerate
        weights[convention] = 0.0
        bad &= ~degenerate
        if np.any(bad):
            i1, i2, i3 = (int(idx[0]) for idx in np.nonzero(bad))
            raise MultiplierSingularityError(
                (k1[i1, 0, 0], k2[0, i2, 0], k3[0, 0, i3])
            )
    return SpectralField(g, a.coeffs * weights)


# ---------------------------------------------------------------------------
# physical-space norms


def lp_norm(f: RealField, p) -> float:
    """L^p norm over the torus; grid Riemann sum, p = inf gives max |f|."""
    mag = np.abs(f.samples)
    if p == np.inf:
        return float(np.max(mag))
    if p < 1:
        raise ParameterRangeError("p", p, "[1, inf]", "Lebesgue exponent")
    return float((np.sum(mag**p) * f.grid.cell_volume) ** (1.0 / p))


def mixed_lp_norm(f: RealField, p_h, q_v) -> float:
    """Anisotropic norm with inner vertical L^q and outer horizontal L^p."""
    mag = np.abs(f.samples)
    g = f.grid
    if q_v == np.inf:
        inner = np.max(mag, axis=2)
    else:
        if q_v < 1:
            raise ParameterRangeError("q_v", q_v, "[1, inf]")
        inner = (np.sum(mag**q_v, axis=2) * (2.0 * np.pi / g.n3)) ** (1.0 / q_v)
    if p_h == np.inf:
        return float(np.max(inner))
    if p_h < 1:
        raise ParameterRangeError("p_h", p_h, "[1, inf]")
    cell_area = (2.0 * np.pi) ** 2 / (g.n1 * g.n2)
    return float((np.sum(inner**p_h) * cell_area) ** (1.0 / p_h))


# ---------------------------------------------------------------------------
# coefficient-sum (homogeneous Sobolev type) norms


def _guard_mean(a: SpectralField):
    c0 = abs(a.mean_coefficient)
    scale = max(1.0, float(np.max(np.abs(a.coeffs))))
    if c0 > 1e-12 * scale:
        raise MeanModeError(
            "field has nonzero mean but a negative-exponent homogeneous "
            f"norm was requested (|c(0)| = {c0:.3e})"
        )


def sobolev_aniso_norm(a: SpectralField, s: float, s_prime: float) -> float:
    """Homogeneous anisotropic Sobolev norm with weight |k_h|^s |k3|^s'.

    Modes with k_h=0 are excluded when s<0, modes with k3=0 when s'<0, and
    k=0 always.
    """
    if min(s, s_prime) < 0:
        _guard_mean(a)
    g = a.grid
    kh = np.broadcast_to(g.kh_abs(), g.shape)
    k3 = np.broadcast_to(g.k3_abs(), g.shape)
    energy = np.abs(a.coeffs) ** 2
    keep = np.ones(g.shape, dtype=bool)
    keep[0, 0, 0] = False
    if s < 0:
        keep &= kh > 0
    if s_prime < 0:
        keep &= k3 > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        w = kh ** (2.0 * s) * k3 ** (2.0 * s_prime)
    total = np.sum(np.where(keep, w, 0.0) * energy)
    return float(np.sqrt(total))


def sobolev_iso_norm(a: SpectralField, s: float) -> float:
    """Homogeneous isotropic Sobolev norm, weight |k|^s, k=0 excluded."""
    if s < 0:
        _guard_mean(a)
    kk = a.grid.k_abs()
    with np.errstate(divide="ignore", invalid="ignore"):
        w = kk ** (2.0 * s)
    w[0, 0, 0] = 0.0
    return float(np.sqrt(np.sum(w * np.abs(a.coeffs) ** 2)))


def sobolev_iso_norm_vector(components, s: float) -> float:
    """l^2 combination of component norms, for vector fields."""
    return float(np.sqrt(sum(sobolev_iso_norm(c, s) ** 2 for c in components)))


def validate_htheta_params(theta, r):
    """Admissible (theta, r) for the anisotropic energy norm: r in [3/2, 2[,
    theta in ]0, alpha(r)[.  Returns alpha(r)."""
    if not (1.5 <= r < 2.0):
        raise ParameterRangeError(
            "r", r, "[3/2, 2[", "anisotropic energy norm index"
        )
    alpha = alpha_of_r(r)
    if not (0.0 < theta < alpha):
        raise ParameterRangeError(
            "theta",
            theta,
            f"]0, alpha(r)[ = ]0, {alpha:.6g}[",
            "anisotropic energy norm index",
        )
    return alpha


def htheta_r_norm(a: SpectralField, theta: float, r: float) -> float:
    """Anisotropic energy norm with weight |k_h|^(-3*alpha(r)+theta) |k3|^(-theta)."""
    alpha = validate_htheta_params(theta, r)
    return sobolev_aniso_norm(a, -3.0 * alpha + theta, -theta)


def sobolev_aniso_gradient_norm(a: SpectralField, s: float, s_prime: float) -> float:
    """Anisotropic norm of the full gradient: the weighted sum carries an
    extra |k|^2 factor.  Same degenerate-plane exclusions as the plain norm."""
    if min(s, s_prime) < 0:
        _guard_mean(a)
    g = a.grid
    kh = np.broadcast_to(g.kh_abs(), g.shape)
    k3 = np.broadcast_to(g.k3_abs(), g.shape)
    keep = np.ones(g.shape, dtype=bool)
    keep[0, 0, 0] = False
    if s < 0:
        keep &= kh > 0
    if s_prime < 0:
        keep &= k3 > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        w = kh ** (2.0 * s) * k3 ** (2.0 * s_prime)
    w = np.where(keep, w, 0.0) * g.k_sq()
    return float(np.sqrt(np.sum(w * np.abs(a.coeffs) ** 2)))


def htheta_gradient_norm(a: SpectralField, theta: float, r: float) -> float:
    """Gradient norm in the anisotropic energy weight."""
    alpha = validate_htheta_params(theta, r)
    return sobolev_aniso_gradient_norm(a, -3.0 * alpha + theta, -theta)


def gradient_l2_sq(a: SpectralField) -> float:
    """|| grad a ||_{L^2}^2 as the weighted coefficient sum (2 pi)^3 sum |k|^2 |c|^2."""
    return float(
        (2.0 * np.pi) ** 3 * np.sum(a.grid.k_sq() * np.abs(a.coeffs) ** 2)
    )


# ---------------------------------------------------------------------------
# dealiased products


class PaddedProduct:
    """3/2-rule zero-padded pointwise products on a shared grid.

    Products live in the open band |k_i| <= n_i/2 - 1: the Nyquist planes of
    both factors and of the result are dropped.  With the factors thus
    band-limited every alias image falls outside the retained band, so the
    truncated product is an exact convolution on all kept modes, and real
    factors give an exactly Hermitian product spectrum.
    """

    def __init__(self, grid: Grid):
        self.grid = grid
        self.padded_shape = tuple(3 * n // 2 for n in grid.shape)
        self._src = []
        self._dst = []
        for n, m in zip(grid.shape, self.padded_shape):
            half = n // 2
            self._src.append(np.r_[0:half, half + 1 : n])
            self._dst.append(np.r_[0:half, m - half + 1 : m])
        self._m_size = int(np.prod(self.padded_shape))

    def to_physical(self, a: SpectralField) -> np.ndarray:
        big = np.zeros(self.padded_shape, dtype=np.complex128)
        big[np.ix_(*self._dst)] = a.coeffs[np.ix_(*self._src)]
        return scipy.fft.ifftn(big) * self._m_size

    def from_physical(self, samples: np.ndarray) -> SpectralField:
        big = scipy.fft.fftn(samples) / self._m_size
        coeffs = np.zeros(self.grid.shape, dtype=np.complex128)
        coeffs[np.ix_(*self._src)] = big[np.ix_(*self._dst)]
        return SpectralField(self.grid, coeffs)

    def multiply(self, a: SpectralField, b: SpectralField) -> SpectralField:
        same_grid(a, b)
        return self.from_physical(self.to_physical(a) * self.to_physical(b))


_PRODUCT_CACHE = {}


def padded_product_engine(grid: Grid) -> PaddedProduct:
    eng = _PRODUCT_CACHE.get(grid.shape)
    if eng is None:
        eng = _PRODUCT_CACHE.setdefault(grid.shape, PaddedProduct(grid))
    return eng


def dealiased_product(a: SpectralField, b: SpectralField) -> SpectralField:
    """Alias-free pointwise product via 3/2-rule zero padding."""
    return padded_product_engine(same_grid(a, b)).multiply(a, b)


def energy_fraction_on_kh_zero(components) -> float:
    """Fraction of total spectral energy carried by the k_h = 0 modes."""
    total = 0.0
    on_axis = 0.0
    for c in components:
        e = np.abs(c.coeffs) ** 2
        total += float(np.sum(e))
        on_axis += float(np.sum(e[0, 0, :]))
    return on_axis / total if total > 0 else 0.0
