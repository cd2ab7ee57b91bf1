"""Velocity-field invariants, Leray projection, vorticity unknowns, and the
horizontal Biot-Savart splitting of the horizontal velocity."""

from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, ParameterRangeError
from .grid import Grid, RealField, SpectralField, from_samples, physical, same_grid
from .spectral import (
    apply_multiplier,
    dealiased_product,
    energy_fraction_on_kh_zero,
    spectral_derivative,
)

DIV_FREE_TOL = 1e-10


def divergence_residual(u1, u2, u3) -> float:
    """max_k |k.u(k)| / max_k |u(k)|, zero for the zero field."""
    g = same_grid(u1, u2, u3)
    k1, k2, k3 = g.wavevectors()
    div = k1 * u1.coeffs + k2 * u2.coeffs + k3 * u3.coeffs
    scale = max(
        float(np.max(np.abs(u1.coeffs))),
        float(np.max(np.abs(u2.coeffs))),
        float(np.max(np.abs(u3.coeffs))),
    )
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(div)) / scale)


@dataclass
class VelocityField:
    """Three spectral components with the divergence-free gate enforced."""

    v1: SpectralField
    v2: SpectralField
    v3: SpectralField

    def __post_init__(self):
        g = same_grid(self.v1, self.v2, self.v3)
        scale = max(1.0, *(float(np.max(np.abs(c.coeffs))) for c in self.components))
        for c in self.components:
            if abs(c.mean_coefficient) > 1e-12 * scale:
                raise DivergenceError(
                    f"velocity component has nonzero mean {c.mean_coefficient!r}"
                )
        res = divergence_residual(*self.components)
        if res >= DIV_FREE_TOL:
            raise DivergenceError(
                f"divergence residual {res:.3e} exceeds gate {DIV_FREE_TOL:g}"
            )
        self.grid: Grid = g

    @property
    def components(self):
        return (self.v1, self.v2, self.v3)

    def copy(self):
        return VelocityField(self.v1.copy(), self.v2.copy(), self.v3.copy())


def leray_project(u1: SpectralField, u2: SpectralField, u3: SpectralField) -> VelocityField:
    """Remove the gradient part: v(k) = u(k) - k (k.u(k)) / |k|^2."""
    c1, c2, c3 = leray_project_coeffs(
        same_grid(u1, u2, u3), u1.coeffs, u2.coeffs, u3.coeffs
    )
    g = u1.grid
    return VelocityField(
        SpectralField(g, c1), SpectralField(g, c2), SpectralField(g, c3)
    )


def leray_project_coeffs(grid: Grid, c1, c2, c3):
    """Array-level Leray projection; the k=0 row is forced to zero.

    Applied twice: the second pass scrubs the longitudinal roundoff left by
    cancellation-heavy inputs, so the divergence gate holds relative to the
    output scale even when the projection removes almost everything.
    """
    k1, k2, k3 = grid.wavevectors()
    ksq_safe = grid.k_sq()
    ksq_safe[0, 0, 0] = 1.0
    for _ in range(2):
        kdotu = (k1 * c1 + k2 * c2 + k3 * c3) / ksq_safe
        c1 = c1 - k1 * kdotu
        c2 = c2 - k2 * kdotu
        c3 = c3 - k3 * kdotu
    c1[0, 0, 0] = c2[0, 0, 0] = c3[0, 0, 0] = 0.0
    return c1, c2, c3


def vertical_vorticity(v: VelocityField) -> SpectralField:
    """omega = d1 v2 - d2 v1, the 2D vorticity of the horizontal velocity."""
    a = spectral_derivative(v.v2, 1)
    b = spectral_derivative(v.v1, 2)
    return SpectralField(v.grid, a.coeffs - b.coeffs)


def d3v3(v: VelocityField) -> SpectralField:
    """d3 v3, which equals -div_h v_h for divergence-free fields."""
    return spectral_derivative(v.v3, 3)


def full_vorticity(v: VelocityField):
    """curl v, three spectral components."""
    d = {(i, j): spectral_derivative(v.components[j - 1], i) for i in (1, 2, 3)
         for j in (1, 2, 3) if i != j}
    g = v.grid
    return (
        SpectralField(g, d[(2, 3)].coeffs - d[(3, 2)].coeffs),
        SpectralField(g, d[(3, 1)].coeffs - d[(1, 3)].coeffs),
        SpectralField(g, d[(1, 2)].coeffs - d[(2, 1)].coeffs),
    )


@dataclass
class VorticityState:
    """The two scalar unknowns the reformulated system evolves."""

    omega: SpectralField
    d3v3: SpectralField

    @classmethod
    def from_velocity(cls, v: VelocityField):
        return cls(vertical_vorticity(v), d3v3(v))


def inverse_horizontal_laplacian(a: SpectralField) -> SpectralField:
    """Multiplier -1/|k_h|^2; the k_h = 0 plane is mapped to zero."""
    return apply_multiplier(a, lambda k1, k2, k3: -1.0 / (k1**2 + k2**2))


def horizontal_biot_savart(state: VorticityState):
    """Split v_h into rotational and potential parts.

    Returns ((vc1, vc2), (vd1, vd2), excluded) where
    (vc1, vc2) = perp-grad of the inverse horizontal Laplacian of omega,
    (vd1, vd2) = -grad_h of the inverse horizontal Laplacian of d3 v3,
    and ``excluded`` is the energy fraction the k_h = 0 convention dropped.
    """
    psi = inverse_horizontal_laplacian(state.omega)
    vc1 = SpectralField(psi.grid, -spectral_derivative(psi, 2).coeffs)
    vc2 = spectral_derivative(psi, 1)
    chi = inverse_horizontal_laplacian(state.d3v3)
    vd1 = SpectralField(chi.grid, -spectral_derivative(chi, 1).coeffs)
    vd2 = SpectralField(chi.grid, -spectral_derivative(chi, 2).coeffs)
    excluded = energy_fraction_on_kh_zero([state.omega, state.d3v3])
    return (vc1, vc2), (vd1, vd2), excluded


def pressure_from_velocity(v: VelocityField) -> SpectralField:
    """Pressure recovered from the div of the momentum equation:
    lap(P) = -sum_{l,m} dl v^m dm v^l, products dealiased."""
    g = v.grid
    grads = [[spectral_derivative(v.components[m], l + 1) for m in range(3)]
             for l in range(3)]
    src = np.zeros(g.shape, dtype=np.complex128)
    for l in range(3):
        for m in range(3):
            src += dealiased_product(grads[l][m], grads[m][l]).coeffs
    ksq = g.k_sq()
    ksq[0, 0, 0] = 1.0
    out = src / ksq
    out[0, 0, 0] = 0.0
    return SpectralField(g, out)


def signed_power(a: RealField, alpha: float) -> RealField:
    """Pointwise sign(a) |a|^alpha; alpha in ]0, 1], alpha=1 is the identity."""
    if not (0.0 < alpha <= 1.0):
        raise ParameterRangeError("alpha", alpha, "]0, 1]", "signed power")
    s = a.samples
    if np.iscomplexobj(s):
        s = s.real
    return RealField(a.grid, np.sign(s) * np.abs(s) ** alpha)


def signed_power_spectral(a: SpectralField, alpha: float) -> SpectralField:
    """signed_power computed in physical space, then re-transformed."""
    phys = physical(a).real
    out = signed_power(RealField(a.grid, phys), alpha)
    return from_samples(a.grid, out.samples)
