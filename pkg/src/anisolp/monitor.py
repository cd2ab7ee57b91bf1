"""Evaluation and accumulation of the tracked blow-up functionals.

Every record row is self-contained: besides the instantaneous norms it
carries the running trapezoidal time-integrals and the frozen initial-data
norms, so a record series can be reproduced bit-identically from stored
snapshots alone.

The two a-priori-estimate diagnostics report both sides together with the
smallest constant C* that makes the inequality hold over the whole run; the
constants are fitted, never asserted.  At the initial time both inequalities
are tight: the first one reduces to an identity there, the second has a free
multiplicative constant which the singleton fit sets to equality.
"""

import math
from dataclasses import dataclass, fields

import numpy as np
import scipy.special

from .errors import ParameterRangeError, TimeOrderError
from .flow import (
    VelocityField,
    VorticityState,
    full_vorticity,
    vertical_vorticity,
)
from .grid import RealField, SpectralField, physical
from .solver import StateSnapshot
from .spectral import (
    alpha_of_r,
    energy_fraction_on_kh_zero,
    gradient_l2_sq,
    htheta_gradient_norm,
    htheta_r_norm,
    lp_norm,
    sobolev_iso_norm,
    spectral_derivative,
)
from .dyadic import DEFAULT_CUTOFF, block, block_range
from .flow import signed_power


@dataclass(frozen=True)
class MonitorConfig:
    p: float
    r: float
    theta: float
    e: tuple = (0.0, 0.0, 1.0)
    cadence: int = 1

    def __post_init__(self):
        if not (1.5 <= self.r < 2.0):
            raise ParameterRangeError(
                "r", self.r, "[3/2, 2[", "vorticity integrability exponent"
            )
        alpha = alpha_of_r(self.r)
        p_hi = 2.0 * self.r / (2.0 - self.r)
        if not (4.0 < self.p < p_hi):
            raise ParameterRangeError(
                "p",
                self.p,
                f"]4, 2r/(2-r)[ = ]4, {p_hi:.6g}[",
                "directional blow-up exponent range",
            )
        th_lo = max(0.0, 3.0 * alpha - 2.0 / self.p)
        if not (th_lo < self.theta < alpha):
            raise ParameterRangeError(
                "theta",
                self.theta,
                f"]max(0, 3*alpha(r)-2/p), alpha(r)[ = ]{th_lo:.6g}, {alpha:.6g}[",
                "anisotropic energy index range",
            )
        e = tuple(float(c) for c in self.e)
        if len(e) != 3 or abs(math.sqrt(sum(c * c for c in e)) - 1.0) > 1e-12:
            raise ParameterRangeError("e", self.e, "unit 3-vectors (|e| = 1)")
        object.__setattr__(self, "e", e)
        if self.cadence < 1:
            raise ParameterRangeError("cadence", self.cadence, "[1, inf[")

    @property
    def alpha(self):
        return alpha_of_r(self.r)


@dataclass
class MonitorRecord:
    time: float
    v3_crit: float
    blowup_int: float
    omega_lr: float
    grad_om_inst: float
    grad_om_int: float
    d33v3_inst: float
    d33v3_int: float
    d3v3_htheta: float
    graddv3_inst: float
    graddv3_int: float
    q51_inst: float
    q51_int: float
    bp_max: float
    excluded_energy: float
    omega_lr0: float
    omega0_full_lr: float
    prop41_lhs: float
    prop41_rhs: float
    prop51_lhs: float
    prop51_rhs: float
    healthy: int


RECORD_FIELDS = tuple(f.name for f in fields(MonitorRecord))


def directional_critical_norm(v: VelocityField, e, p) -> float:
    """Scale-critical norm of the velocity component along the unit vector e."""
    e = tuple(float(c) for c in e)
    if abs(math.sqrt(sum(c * c for c in e)) - 1.0) > 1e-12:
        raise ParameterRangeError("e", e, "unit 3-vectors (|e| = 1)")
    if not p > 0:
        raise ParameterRangeError("p", p, "]0, inf[")
    ev = SpectralField(
        v.grid,
        e[0] * v.v1.coeffs + e[1] * v.v2.coeffs + e[2] * v.v3.coeffs,
    )
    return sobolev_iso_norm(ev, 0.5 + 2.0 / p)


def bp_norm(a: SpectralField, p, cutoff=DEFAULT_CUTOFF) -> float:
    """sup over blocks of 2^{j(-2+2/p)} ||Delta_j a||_{L^inf}."""
    if not (1.0 < p < np.inf):
        raise ParameterRangeError("p", p, "]1, inf[", "endpoint Besov exponent")
    sigma = -2.0 + 2.0 / p
    best = 0.0
    for j in block_range(a.grid, "iso", cutoff):
        piece = block(a, "iso", j, cutoff)
        sup = float(np.max(np.abs(physical(piece))))
        best = max(best, 2.0 ** (j * sigma) * sup)
    return best


def bp_max_gradient(v: VelocityField, p) -> float:
    """max over components k and directions l of the endpoint norm of dl v^k."""
    best = 0.0
    for comp in v.components:
        for axis in (1, 2, 3):
            best = max(best, bp_norm(spectral_derivative(comp, axis), p))
    return best


def _pow(x, y):
    """float power that saturates to inf instead of raising OverflowError."""
    with np.errstate(over="ignore", invalid="ignore"):
        return float(np.power(np.float64(x), np.float64(y)))


def _instantaneous(snapshot: StateSnapshot, cfg: MonitorConfig):
    v = snapshot.velocity
    r = cfg.r
    omega = vertical_vorticity(v)
    omega_phys = RealField(v.grid, physical(omega).real)
    omega_lr = lp_norm(omega_phys, r)
    om_r2 = signed_power(omega_phys, r / 2.0)
    om_r2_hat = SpectralField(v.grid, np.fft.fftn(om_r2.samples) / v.grid.size)
    grad_om_inst = gradient_l2_sq(om_r2_hat)
    dv3 = spectral_derivative(v.v3, 3)
    d33 = spectral_derivative(dv3, 3)
    d33v3_inst = htheta_r_norm(d33, cfg.theta, r) ** 2
    d3v3_htheta = htheta_r_norm(dv3, cfg.theta, r)
    graddv3_inst = htheta_gradient_norm(dv3, cfg.theta, r) ** 2
    v3_crit = directional_critical_norm(v, cfg.e, cfg.p)
    alpha = cfg.alpha
    p = cfg.p
    p_conj = p / (p - 1.0)
    gv = _pow(omega_lr, r / 2.0)  # == || signed_power(omega, r/2) ||_{L^2}
    gn = math.sqrt(grad_om_inst)
    q51_inst = (
        v3_crit
        * _pow(gv, 2.0 * (2.0 * alpha + 1.0 / p))
        * _pow(gn, 2.0 / p_conj)
        + v3_crit**2
        * _pow(gv, 4.0 * (alpha + 1.0 / p))
        * _pow(gn, 2.0 * (1.0 - 2.0 / p))
    )
    return {
        "v3_crit": v3_crit,
        "omega_lr": omega_lr,
        "grad_om_inst": grad_om_inst,
        "d33v3_inst": d33v3_inst,
        "d3v3_htheta": d3v3_htheta,
        "graddv3_inst": graddv3_inst,
        "q51_inst": q51_inst,
        "bp_max": bp_max_gradient(v, p),
        "excluded_energy": energy_fraction_on_kh_zero(v.components),
    }


def accumulate(record_prev, snapshot: StateSnapshot, cfg: MonitorConfig) -> MonitorRecord:
    """Extend the record series by one snapshot (record_prev None at t=0).

    Running integrals use the trapezoidal rule at the monitor cadence;
    instantaneous quantities are recomputed fresh from the snapshot.
    Overflow is not an error here: a non-finite value marks the record
    unhealthy, which terminates the series.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        inst = _instantaneous(snapshot, cfg)
    r = cfg.r
    t = snapshot.time
    if record_prev is None:
        om_full = full_vorticity(snapshot.velocity)
        mag = np.sqrt(sum(np.abs(physical(c)) ** 2 for c in om_full))
        omega0_full_lr = lp_norm(RealField(snapshot.velocity.grid, mag), r)
        integrals = dict(
            blowup_int=0.0, grad_om_int=0.0, d33v3_int=0.0,
            graddv3_int=0.0, q51_int=0.0,
        )
        omega_lr0 = inst["omega_lr"]
    else:
        if not t > record_prev.time:
            raise TimeOrderError(
                f"snapshot time {t} does not exceed previous {record_prev.time}"
            )
        h = t - record_prev.time
        p = cfg.p

        def trap(prev_int, prev_val, new_val):
            return prev_int + 0.5 * h * (prev_val + new_val)

        integrals = dict(
            blowup_int=trap(
                record_prev.blowup_int,
                _pow(record_prev.v3_crit, p),
                _pow(inst["v3_crit"], p),
            ),
            grad_om_int=trap(
                record_prev.grad_om_int, record_prev.grad_om_inst, inst["grad_om_inst"]
            ),
            d33v3_int=trap(
                record_prev.d33v3_int, record_prev.d33v3_inst, inst["d33v3_inst"]
            ),
            graddv3_int=trap(
                record_prev.graddv3_int, record_prev.graddv3_inst, inst["graddv3_inst"]
            ),
            q51_int=trap(record_prev.q51_int, record_prev.q51_inst, inst["q51_inst"]),
        )
        omega_lr0 = record_prev.omega_lr0
        omega0_full_lr = record_prev.omega0_full_lr

    prop41_lhs = (1.0 / r) * _pow(inst["omega_lr"], r) + ((r - 1.0) / r**2) * integrals[
        "grad_om_int"
    ]
    prop41_rhs = (1.0 / r) * _pow(omega_lr0, r) + _pow(integrals["d33v3_int"], r / 2.0)
    prop51_lhs = inst["d3v3_htheta"] ** 2 + integrals["graddv3_int"]
    prop51_rhs = omega0_full_lr**2 + integrals["q51_int"]

    values = dict(
        time=t,
        **inst,
        **integrals,
        omega_lr0=omega_lr0,
        omega0_full_lr=omega0_full_lr,
        prop41_lhs=prop41_lhs,
        prop41_rhs=prop41_rhs,
        prop51_lhs=prop51_lhs,
        prop51_rhs=prop51_rhs,
        healthy=1,
    )
    rec = MonitorRecord(**values)
    vals = [getattr(rec, f) for f in RECORD_FIELDS]
    if not all(np.isfinite(v) for v in vals):
        rec.healthy = 0
    return rec


def monitor_series(snapshots, cfg: MonitorConfig):
    """Run the monitor over an in-order snapshot sequence.

    Stops after the first unhealthy (non-finite) record, which is kept as the
    flagged final entry.
    """
    records = []
    prev = None
    for snap in snapshots:
        rec = accumulate(prev, snap, cfg)
        records.append(rec)
        if not rec.healthy:
            break
        prev = rec
    return records


# ---------------------------------------------------------------------------
# both-sides diagnostics


@dataclass
class PropSides:
    lhs: float
    rhs: float
    cstar: float
    initial_ratio: float
    lhs_series: tuple
    rhs_core_series: tuple


def prop41_sides(history, cfg: MonitorConfig) -> PropSides:
    """Both sides of the L^r vorticity energy bound, with fitted C*.

    C* is the smallest C >= 0 with lhs(t) <= rhs_core(t) * exp(C * I(t)) for
    every record, I being the running directional-norm integral.  At t=0 the
    two sides agree identically.
    """
    if not history:
        raise ParameterRangeError("history", 0, "non-empty record sequences")
    lhs = [rec.prop41_lhs for rec in history]
    core = [rec.prop41_rhs for rec in history]
    growth = [rec.blowup_int for rec in history]
    cstar = 0.0
    for li, ci, ii in zip(lhs, core, growth):
        if li <= ci:
            continue
        if ii <= 0.0:
            cstar = math.inf
            break
        cstar = max(cstar, math.log(li / ci) / ii)
    rhs_final = core[-1] * (
        math.exp(cstar * growth[-1]) if math.isfinite(cstar) else math.inf
    )
    return PropSides(
        lhs=lhs[-1],
        rhs=rhs_final,
        cstar=cstar,
        initial_ratio=lhs[0] / core[0] if core[0] > 0 else 0.0,
        lhs_series=tuple(lhs),
        rhs_core_series=tuple(core),
    )


def prop51_sides(history, cfg: MonitorConfig) -> PropSides:
    """Both sides of the anisotropic energy bound for d3 v3, with fitted C*.

    The constant multiplies the whole right side: the constraint is
    lhs(t) <= C * exp(C * I(t)) * rhs_core(t).  The smallest admissible C is
    found per record via the Lambert W function; at t=0 the singleton fit
    makes the two sides touch, so the initial ratio is exactly 1.
    """
    if not history:
        raise ParameterRangeError("history", 0, "non-empty record sequences")
    lhs = [rec.prop51_lhs for rec in history]
    core = [rec.prop51_rhs for rec in history]
    growth = [rec.blowup_int for rec in history]
    cstar = 0.0
    for li, ci, ii in zip(lhs, core, growth):
        if li <= 0.0:
            continue
        if ci <= 0.0:
            cstar = math.inf
            break
        rho = li / ci
        if ii <= 0.0:
            cstar = max(cstar, rho)
        else:
            w = float(scipy.special.lambertw(rho * ii).real)
            cstar = max(cstar, w / ii)
    c0 = lhs[0] / core[0] if core[0] > 0 else 0.0
    rhs_final = (
        cstar * math.exp(cstar * growth[-1]) * core[-1]
        if math.isfinite(cstar)
        else math.inf
    )
    initial_ratio = lhs[0] / (c0 * core[0]) if c0 > 0 else 0.0
    return PropSides(
        lhs=lhs[-1],
        rhs=rhs_final,
        cstar=cstar,
        initial_ratio=initial_ratio,
        lhs_series=tuple(lhs),
        rhs_core_series=tuple(core),
    )


def vorticity_state(snapshot: StateSnapshot) -> VorticityState:
    return VorticityState.from_velocity(snapshot.velocity)
