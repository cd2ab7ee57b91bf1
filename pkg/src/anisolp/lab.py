"""Empirical stress tests for the functional inequalities.

Each case computes both sides on seeded random ensembles and reports the
worst ratio.  The torus carries no claim about the full-space constants, so
every case is audited as boundedness/stability of lhs/rhs across resolution
doubling, except case (i) whose proof gives constant exactly 1 and survives
the transfer to mean-zero grid sums verbatim.

Degenerate inputs (both sides zero) count as ratio 0: the inequality is
vacuous there.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .dyadic import aniso_besov_norm, besov_norm, block, block_range
from .errors import ParameterRangeError
from .flow import (
    VelocityField,
    VorticityState,
    d3v3,
    signed_power,
    vertical_vorticity,
)
from .grid import Grid, RealField, SpectralField, from_samples, physical
from .solver import initial_random_bandlimited
from .spectral import (
    alpha_of_r,
    dealiased_product,
    gradient_l2_sq,
    htheta_r_norm,
    lp_norm,
    mixed_lp_norm,
    sobolev_aniso_gradient_norm,
    sobolev_aniso_norm,
    sobolev_iso_norm,
    sobolev_iso_norm_vector,
    spectral_derivative,
)

FIELD_CLASSES = (
    "bandlimited_random",
    "divfree_random",
    "positive_smooth",
    "single_cell",
    "anisotropic_pancake",
    "anisotropic_tube",
)


@dataclass(frozen=True)
class EnsembleSpec:
    seed: int
    count: int
    resolution: tuple
    field_class: str

    def __post_init__(self):
        if self.field_class not in FIELD_CLASSES:
            raise ParameterRangeError("field_class", self.field_class, str(FIELD_CLASSES))
        res = self.resolution
        if isinstance(res, int):
            res = (res,)
        object.__setattr__(self, "resolution", tuple(int(n) for n in res))
        if self.count < 1:
            raise ParameterRangeError("count", self.count, "[1, inf[")


def _member_rng(spec: EnsembleSpec, n: int, index: int):
    return np.random.default_rng([spec.seed, n, index])


def _bandlimited_scalar(grid: Grid, rng, extra_mask=None):
    kmax = min(grid.shape) // 4
    white = rng.standard_normal(grid.shape)
    c = np.fft.fftn(white) / grid.size
    kk = grid.k_abs()
    mask = (kk >= 1.0) & (kk <= kmax)
    if extra_mask is not None:
        mask &= extra_mask
    c = np.where(mask, c, 0.0)
    a = SpectralField(grid, c)
    sup = float(np.max(np.abs(physical(a))))
    if sup > 0:
        a = SpectralField(grid, c / sup)
    return a


def make_member(spec: EnsembleSpec, n: int, index: int):
    """One ensemble member; reproducible from (seed, resolution, index)."""
    grid = Grid(n, n, n)
    rng = _member_rng(spec, n, index)
    cls = spec.field_class
    if cls == "bandlimited_random":
        return _bandlimited_scalar(grid, rng)
    if cls == "divfree_random":
        seed = int(rng.integers(0, 2**31 - 1))
        return initial_random_bandlimited(grid, seed, band=(1, n // 4))
    if cls == "positive_smooth":
        pert = _bandlimited_scalar(grid, rng)
        samples = 2.0 + 0.8 * physical(pert).real
        return from_samples(grid, samples)
    if cls == "single_cell":
        ks = list(block_range(grid, "h"))
        ls = list(block_range(grid, "v"))
        k = ks[int(rng.integers(0, max(1, len(ks) - 1)))]
        l = ls[int(rng.integers(0, max(1, len(ls) - 1)))]
        a = _bandlimited_scalar(grid, rng)
        return block(block(a, "h", k), "v", l)
    kk_h = np.broadcast_to(grid.kh_abs(), grid.shape)
    kk_3 = np.broadcast_to(grid.k3_abs(), grid.shape)
    if cls == "anisotropic_pancake":
        return _bandlimited_scalar(grid, rng, extra_mask=(kk_3 <= kk_h / 4.0))
    if cls == "anisotropic_tube":
        return _bandlimited_scalar(grid, rng, extra_mask=(kk_h <= kk_3 / 4.0))
    raise ParameterRangeError("field_class", cls, str(FIELD_CLASSES))


def verify_member(spec: EnsembleSpec, member) -> dict:
    """Post-generation class-constraint checks, reported per member."""
    cls = spec.field_class
    out = {"ok": True}
    if cls == "divfree_random":
        out["divergence_gate"] = True  # constructor already enforced it
    elif cls == "positive_smooth":
        phys = physical(member).real if isinstance(member, SpectralField) else member
        lo = float(np.min(phys.real)) if isinstance(phys, np.ndarray) else float(np.min(phys))
        out["min_value"] = lo
        out["ok"] = lo > 0.0
    elif cls in ("anisotropic_pancake", "anisotropic_tube"):
        g = member.grid
        e = np.abs(member.coeffs) ** 2
        kk_h = np.broadcast_to(g.kh_abs(), g.shape)
        kk_3 = np.broadcast_to(g.k3_abs(), g.shape)
        cond = kk_3 <= kk_h / 4.0 if cls == "anisotropic_pancake" else kk_h <= kk_3 / 4.0
        total = float(np.sum(e))
        inside = float(np.sum(e[cond]))
        out["aligned_energy_fraction"] = inside / total if total > 0 else 1.0
        out["ok"] = total == 0 or inside / total >= 0.99
    return out


def make_ensemble(spec: EnsembleSpec, n: int = None):
    """All members at one resolution (default: the first configured one)."""
    n = n or spec.resolution[0]
    members = [make_member(spec, n, i) for i in range(spec.count)]
    reports = [verify_member(spec, m) for m in members]
    bad = [i for i, rep in enumerate(reports) if not rep["ok"]]
    if bad:
        raise ParameterRangeError(
            "ensemble", bad, "members satisfying the class constraints",
            f"class {spec.field_class} constraint violated",
        )
    return members, reports


# ---------------------------------------------------------------------------
# case implementations: each returns (lhs, rhs) for one member


def _require(cond, name, value, interval, reason):
    if not cond:
        raise ParameterRangeError(name, value, interval, reason)


def _signed_power_hat(a: SpectralField, alpha: float) -> SpectralField:
    phys = physical(a).real
    powered = signed_power(RealField(a.grid, phys), alpha)
    return from_samples(a.grid, powered.samples)


def _grad_magnitude(a: SpectralField) -> RealField:
    g2 = sum(np.abs(physical(spectral_derivative(a, ax))) ** 2 for ax in (1, 2, 3))
    return RealField(a.grid, np.sqrt(g2))


def _case_a(a: SpectralField, params):
    r = params["r"]
    alpha_of_r(r, "case (a) exponent")
    _require(r < 2.0, "r", r, "[3/2, 2[", "case (a) hypothesis")
    lhs = lp_norm(_grad_magnitude(a), r)
    ar2 = _signed_power_hat(a, r / 2.0)
    gn = math.sqrt(gradient_l2_sq(ar2))
    # the L^2 norm of a_{r/2} on the physical side, |a_{r/2}|^2 == |a|^r
    al2 = lp_norm(RealField(a.grid, physical(a).real), r) ** (r / 2.0)
    rhs = gn * al2 ** (2.0 / r - 1.0)
    return lhs, rhs


def _case_b(a: SpectralField, params):
    r, s = params["r"], params["s"]
    alpha = alpha_of_r(r, "case (b) exponent")
    _require(
        -3.0 * alpha <= s <= 1.0 - alpha,
        "s", s, f"[-3*alpha(r), 1-alpha(r)] = [{-3*alpha:.6g}, {1-alpha:.6g}]",
        "case (b) hypothesis",
    )
    lhs = sobolev_iso_norm(a, s)
    ar2 = _signed_power_hat(a, r / 2.0)
    gn = math.sqrt(gradient_l2_sq(ar2))
    al2 = lp_norm(RealField(a.grid, physical(a).real), r) ** (r / 2.0)
    rhs = al2 ** (1.0 - alpha - s) * gn ** (3.0 * alpha + s)
    return lhs, rhs


def _case_c(a: SpectralField, params):
    r, s, p, q = params["r"], params["s"], params["p"], params["q"]
    alpha = alpha_of_r(r, "case (c) exponent")
    holder = 1.0 - 2.0 * alpha
    _require(0.0 < s < 1.0, "s", s, "]0, 1[", "case (c) hypothesis")
    _require(0.0 < holder < 1.0, "1-2*alpha(r)", holder, "]0, 1[", "case (c) hypothesis")
    phys = physical(a).real
    sup = float(np.max(np.abs(phys)))
    flat = float(np.mean(np.abs(phys) < 1e-6 * sup)) if sup > 0 else 1.0
    _require(flat <= 0.01, "flat fraction", flat, "[0, 0.01]",
             "case (c) needs fields bounded away from flat zeros")
    ga = _signed_power_hat(a, holder)
    lhs = besov_norm(ga, holder * s, p / holder, q / holder)
    rhs = besov_norm(a, s, p, q) ** holder
    return lhs, rhs


def _case_d(a: SpectralField, params):
    s, p, q = params["s"], params["p"], params["q"]
    _require(s > 0, "s", s, "]0, inf[", "case (d) hypothesis")
    _require(p >= q, "(p, q)", (p, q), "p >= q", "case (d) hypothesis")
    g = a.grid
    dz = 2.0 * np.pi / g.n3
    cell_area = (2.0 * np.pi) ** 2 / (g.n1 * g.n2)
    weighted = []
    for l in block_range(g, "v"):
        piece = np.abs(physical(block(a, "v", l)))
        if p == np.inf:
            v_l = np.max(piece, axis=2)
        else:
            v_l = (np.sum(piece**p, axis=2) * dz) ** (1.0 / p)
        weighted.append(2.0 ** (l * s) * v_l)
    stack = np.stack(weighted)
    if q == np.inf:
        per_xh = np.max(stack, axis=0)
    else:
        per_xh = np.sum(stack**q, axis=0) ** (1.0 / q)
    if p == np.inf:
        lhs = float(np.max(per_xh))
    else:
        lhs = float((np.sum(per_xh**p) * cell_area) ** (1.0 / p))
    rhs = besov_norm(a, s, p, q)
    return lhs, rhs


def _case_e(a: SpectralField, params):
    s, theta, p, q = params["s"], params["theta"], params["p"], params["q"]
    _require(s > 0, "s", s, "]0, inf[", "case (e) hypothesis")
    _require(0.0 < theta < s, "theta", theta, f"]0, s[ = ]0, {s:.6g}[",
             "case (e) hypothesis")
    lhs = aniso_besov_norm(a, s - theta, q, theta, 1, p)
    rhs = besov_norm(a, s, p, q)
    return lhs, rhs


def _case_f(a: SpectralField, params):
    r, theta, beta = params["r"], params["theta"], params["beta"]
    alpha = alpha_of_r(r, "case (f) exponent")
    _require(0.0 < theta < 3.0 * alpha, "theta", theta,
             f"]0, 3*alpha(r)[ = ]0, {3*alpha:.6g}[", "case (f) hypothesis")
    _require(0.0 < beta < 0.5, "beta", beta, "]0, 1/2[", "case (f) hypothesis")
    lhs = aniso_besov_norm(a, 0.0, 1, 1.0 - 3.0 * alpha - beta, 1, 2)
    s_h, s_v = -3.0 * alpha + theta, -theta
    h0 = sobolev_aniso_norm(a, s_h, s_v)
    h1 = sobolev_aniso_gradient_norm(a, s_h, s_v)
    rhs = h0**beta * h1 ** (1.0 - beta)
    return lhs, rhs


def _case_g(v: VelocityField, params):
    r, theta, beta = params["r"], params["theta"], params["beta"]
    alpha = alpha_of_r(r, "case (g) exponent")
    _require(0.0 < theta < 3.0 * alpha, "theta", theta,
             f"]0, 3*alpha(r)[ = ]0, {3*alpha:.6g}[", "case (g) hypothesis")
    _require(0.0 < beta < 0.5, "beta", beta, "]0, 1/2[", "case (g) hypothesis")
    s_v = 1.0 - 3.0 * alpha - beta
    lhs = math.hypot(
        aniso_besov_norm(v.v1, 1.0, 1, s_v, 1, 2),
        aniso_besov_norm(v.v2, 1.0, 1, s_v, 1, 2),
    )
    omega = vertical_vorticity(v)
    dv3 = d3v3(v)
    om_r2 = _signed_power_hat(omega, r / 2.0)
    gv = lp_norm(RealField(v.grid, physical(omega).real), r) ** (r / 2.0)
    gn = math.sqrt(gradient_l2_sq(om_r2))
    s_h = -3.0 * alpha + theta
    h0 = sobolev_aniso_norm(dv3, s_h, -theta)
    h1 = sobolev_aniso_gradient_norm(dv3, s_h, -theta)
    rhs = gv ** (2.0 * alpha + beta) * gn ** (1.0 - beta) + h0**beta * h1 ** (1.0 - beta)
    return lhs, rhs


def _case_h(pair, params):
    a, b = pair
    s1, s2, g1, g2 = params["s1"], params["s2"], params["sigma1"], params["sigma2"]
    p1, p2, q = params["p1"], params["p2"], params["q"]
    _require(q >= 1, "q", q, "[1, inf]", "case (h) hypothesis")
    _require(p1 >= p2 >= 1, "(p1, p2)", (p1, p2), "p1 >= p2 >= 1", "case (h) hypothesis")
    _require(1.0 / p1 + 1.0 / p2 <= 1.0, "(p1, p2)", (p1, p2),
             "1/p1 + 1/p2 <= 1", "case (h) hypothesis")

    def bound(val, lim, name):
        if q == 1:
            _require(val <= lim, name, val, f"<= {lim:.6g} (q=1 boundary allowed)",
                     "case (h) hypothesis")
        else:
            _require(val < lim, name, val, f"< {lim:.6g}", "case (h) hypothesis")

    bound(s1, 2.0 / p1, "s1")
    bound(s2, 2.0 / p2, "s2")
    bound(g1, 1.0 / p1, "sigma1")
    bound(g2, 1.0 / p2, "sigma2")
    _require(s1 + s2 > 0, "s1+s2", s1 + s2, "]0, inf[", "case (h) hypothesis")
    _require(g1 + g2 > 0, "sigma1+sigma2", g1 + g2, "]0, inf[", "case (h) hypothesis")
    ab = dealiased_product(a, b)
    lhs = aniso_besov_norm(ab, s1 + s2 - 2.0 / p2, q, g1 + g2 - 1.0 / p2, q, p1)
    rhs = aniso_besov_norm(a, s1, q, g1, q, p1) * aniso_besov_norm(b, s2, q, g2, q, p2)
    return lhs, rhs


def _case_i(v: VelocityField, params):
    r, theta = params["r"], params["theta"]
    alpha = alpha_of_r(r, "case (i) exponent")
    state = VorticityState.from_velocity(v)
    lhs = htheta_r_norm(state.d3v3, theta, r)
    rhs = sobolev_iso_norm_vector(v.components, 1.0 - 3.0 * alpha)
    return lhs, rhs


def _bernstein_field(a: SpectralField, direction: str, scale: int) -> SpectralField:
    return block(a, direction, scale)


def _case_j(a: SpectralField, params):
    sub = params["sub"]  # h_ball, v_ball, h_ring, v_ring
    scale = params["scale"]
    p1, p2 = params.get("p1", np.inf), params.get("p2", 2)
    q1, q2 = params.get("q1", 2), params.get("q2", 2)
    direction = "h" if sub.startswith("h") else "v"
    f = _bernstein_field(a, direction, scale)
    two_k = 2.0**scale
    if sub == "h_ball":
        lhs = mixed_lp_norm(RealField(f.grid, physical(spectral_derivative(f, 1))), p1, q1)
        gain = two_k ** (1.0 + 2.0 * (1.0 / p2 - 1.0 / p1))
        rhs = gain * mixed_lp_norm(RealField(f.grid, physical(f)), p2, q1)
    elif sub == "v_ball":
        lhs = mixed_lp_norm(RealField(f.grid, physical(spectral_derivative(f, 3))), p1, q1)
        gain = two_k ** (1.0 + (1.0 / q2 - 1.0 / q1))
        rhs = gain * mixed_lp_norm(RealField(f.grid, physical(f)), p1, q2)
    elif sub == "h_ring":
        lhs = mixed_lp_norm(RealField(f.grid, physical(f)), p1, q1)
        sup_d = max(
            mixed_lp_norm(RealField(f.grid, physical(spectral_derivative(f, ax))), p1, q1)
            for ax in (1, 2)
        )
        rhs = sup_d / two_k
    elif sub == "v_ring":
        lhs = mixed_lp_norm(RealField(f.grid, physical(f)), p1, q1)
        rhs = mixed_lp_norm(
            RealField(f.grid, physical(spectral_derivative(f, 3))), p1, q1
        ) / two_k
    else:
        raise ParameterRangeError("sub", sub, "{h_ball, v_ball, h_ring, v_ring}")
    return lhs, rhs


def _case_k(a: SpectralField, params):
    r = params["r"]
    alpha = alpha_of_r(r, "case (k) exponent")
    lhs = sobolev_iso_norm(a, -3.0 * alpha)
    rhs = lp_norm(RealField(a.grid, physical(a).real), r)
    return lhs, rhs


@dataclass(frozen=True)
class InequalityCase:
    id: str
    params: dict = field(default_factory=dict)
    constant_mode: str = "fitted"  # or "exact_one"


_CASE_TABLE = {
    "a": (_case_a, "positive_smooth", {"r": 1.8}),
    "b": (_case_b, "positive_smooth", {"r": 1.8, "s": 0.45}),
    "c": (_case_c, "positive_smooth", {"r": 1.8, "s": 0.5, "p": 2.0, "q": 2.0}),
    "d": (_case_d, "bandlimited_random", {"s": 0.5, "p": 4.0, "q": 2.0}),
    "e": (_case_e, "bandlimited_random", {"s": 0.8, "theta": 0.3, "p": 2.0, "q": 2.0}),
    "f": (_case_f, "bandlimited_random", {"r": 1.8, "theta": 0.08, "beta": 0.25}),
    "g": (_case_g, "divfree_random", {"r": 1.8, "theta": 0.08, "beta": 0.25}),
    "h": (_case_h, "bandlimited_random",
          {"s1": 0.4, "s2": 0.4, "sigma1": 0.2, "sigma2": 0.2,
           "p1": 2.0, "p2": 2.0, "q": 2.0}),
    "i": (_case_i, "divfree_random", {"r": 1.6, "theta": 0.05}),
    "j1": (_case_j, "bandlimited_random",
           {"sub": "h_ball", "scale": 2, "p1": np.inf, "p2": 2.0, "q1": 2.0}),
    "j2": (_case_j, "bandlimited_random",
           {"sub": "v_ball", "scale": 2, "p1": 2.0, "q1": np.inf, "q2": 2.0}),
    "j3": (_case_j, "bandlimited_random",
           {"sub": "h_ring", "scale": 2, "p1": 2.0, "q1": 2.0}),
    "j4": (_case_j, "bandlimited_random",
           {"sub": "v_ring", "scale": 2, "p1": 2.0, "q1": 2.0}),
    "k": (_case_k, "bandlimited_random", {"r": 1.8}),
}

CASE_IDS = tuple(_CASE_TABLE)
EXACT_ONE_TOL = 1e-8
GROWTH_LIMIT = 2.0


def default_case(case_id: str, overrides=None) -> InequalityCase:
    if case_id not in _CASE_TABLE:
        raise ParameterRangeError("case_id", case_id, str(CASE_IDS))
    _, _, defaults = _CASE_TABLE[case_id]
    params = dict(defaults)
    if overrides:
        params.update(overrides)
    mode = "exact_one" if case_id == "i" else "fitted"
    return InequalityCase(case_id, params, mode)


def default_field_class(case_id: str) -> str:
    return _CASE_TABLE[case_id][1]


@dataclass
class CaseReport:
    case_id: str
    constant_mode: str
    max_ratio: float
    argmax: tuple
    per_resolution: dict
    ratios: dict
    passed: bool
    message: str


def _pair_member(spec: EnsembleSpec, n: int, index: int):
    a = make_member(spec, n, index)
    b = make_member(
        EnsembleSpec(spec.seed + 7919, spec.count, spec.resolution, spec.field_class),
        n, index,
    )
    return a, b


def case_ratio(case: InequalityCase, member):
    """(lhs, rhs, ratio) on one member; vacuous 0/0 counts as ratio 0."""
    fn, _, _ = _CASE_TABLE[case.id]
    lhs, rhs = fn(member, case.params)
    if lhs == 0.0 and rhs == 0.0:
        return lhs, rhs, 0.0
    if rhs == 0.0:
        return lhs, rhs, math.inf
    return lhs, rhs, lhs / rhs


def run_case(case: InequalityCase, ens: EnsembleSpec) -> CaseReport:
    """Evaluate the case on every ensemble member at every resolution.

    exact_one cases pass iff max_ratio <= 1 + 1e-8; fitted cases pass iff
    the worst ratio grows by at most a factor 2 from each resolution to the
    next (single-resolution ensembles just need a finite ratio).
    """
    needs_pair = case.id == "h"
    per_res = {}
    ratios = {}
    argmax = None
    max_ratio = 0.0
    for n in ens.resolution:
        worst = 0.0
        res_ratios = []
        for i in range(ens.count):
            member = _pair_member(ens, n, i) if needs_pair else make_member(ens, n, i)
            if not needs_pair:
                rep = verify_member(ens, member)
                if not rep["ok"]:
                    raise ParameterRangeError(
                        "ensemble member", (n, i), "class constraints", str(rep)
                    )
            _, _, ratio = case_ratio(case, member)
            res_ratios.append(ratio)
            if ratio > worst:
                worst = ratio
            if ratio > max_ratio:
                max_ratio = ratio
                argmax = (n, i)
        per_res[n] = worst
        ratios[n] = res_ratios
    if case.constant_mode == "exact_one":
        passed = max_ratio <= 1.0 + EXACT_ONE_TOL
        message = f"max_ratio = {max_ratio:.12g} vs exact constant 1 + {EXACT_ONE_TOL:g}"
    else:
        passed = math.isfinite(max_ratio)
        message = f"max_ratio = {max_ratio:.6g}"
        res_sorted = sorted(per_res)
        for lo, hi in zip(res_sorted, res_sorted[1:]):
            if per_res[lo] > 0:
                growth = per_res[hi] / per_res[lo]
                message += f"; growth {lo}->{hi}: {growth:.3f}"
                if growth > GROWTH_LIMIT:
                    passed = False
    return CaseReport(
        case_id=case.id,
        constant_mode=case.constant_mode,
        max_ratio=max_ratio,
        argmax=argmax,
        per_resolution=per_res,
        ratios=ratios,
        passed=passed,
        message=message,
    )
