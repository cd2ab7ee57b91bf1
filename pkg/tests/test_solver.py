import numpy as np
import pytest

from anisolp.errors import CFLWarning, ParameterRangeError, SolverAbort
from anisolp.flow import divergence_residual, full_vorticity
from anisolp.grid import Grid, RealField, SpectralField, from_samples, physical
from anisolp.solver import (
    NavierStokesStepper,
    SolverConfig,
    StateSnapshot,
    TransportDiffusionStepper,
    initial_abc,
    initial_random_bandlimited,
    initial_taylor_green,
    ns_rhs,
    step,
    transport_diffusion_step,
)
from anisolp.spectral import gradient_l2_sq, lp_norm

from conftest import bandlimited, rel_err


class TestConfig:
    def test_validation(self):
        with pytest.raises(ParameterRangeError):
            SolverConfig(nu=0.0)
        with pytest.raises(ParameterRangeError):
            SolverConfig(dt=-1e-3)
        with pytest.raises(ParameterRangeError):
            SolverConfig(integrator="rk4")
        with pytest.raises(ParameterRangeError):
            SolverConfig(dealias="none")
        with pytest.raises(ParameterRangeError):
            SolverConfig(monitor_every=0)


class TestStepBasics:
    def test_zero_stays_zero(self, grid16):
        zero = SpectralField(grid16, np.zeros(grid16.shape, dtype=complex))
        from anisolp.flow import VelocityField

        v = VelocityField(zero, zero.copy(), zero.copy())
        out = step(StateSnapshot(0.0, v, 0), SolverConfig(dt=1e-3))
        for c in out.velocity.components:
            assert np.max(np.abs(c.coeffs)) == 0.0

    @pytest.mark.parametrize("scheme", ["etdrk4", "ifrk4"])
    def test_heat_mode_exact_integrating_factor(self, grid16, scheme):
        # test hook: nonlinearity disabled -> every mode decays by the exact factor
        cfg = SolverConfig(nu=0.7, dt=2e-3, integrator=scheme)
        stepper = NavierStokesStepper(grid16, cfg, nonlinear=None)
        v0 = initial_taylor_green(grid16)
        out = stepper.step(StateSnapshot(0.0, v0, 0))
        decay = np.exp(-cfg.nu * 2.0 * cfg.dt)  # |k|^2 = 2 on the TG modes
        assert rel_err(out.velocity.v1.coeffs, decay * v0.v1.coeffs) < 1e-14

    def test_taylor_green_exact_decay(self):
        g = Grid(32, 32, 32)
        cfg = SolverConfig(nu=1.0, dt=1e-3, t_end=0.1)
        stepper = NavierStokesStepper(g, cfg)
        v0 = initial_taylor_green(g)
        last = None
        for snap in stepper.run(v0):
            last = snap
        factor = np.exp(-2.0 * last.time)
        for c, c0 in zip(last.velocity.components, v0.components):
            got = physical(c).real
            want = factor * physical(c0).real
            assert np.max(np.abs(got - want)) < 1e-6

    def test_divergence_preserved(self):
        g = Grid(32, 32, 32)
        cfg = SolverConfig(nu=0.05, dt=2e-3, t_end=0.05)
        stepper = NavierStokesStepper(g, cfg)
        snap = StateSnapshot(0.0, initial_random_bandlimited(g, 3, band=(1, 8)), 0)
        for _ in range(25):
            snap = stepper.step(snap)
            assert divergence_residual(*snap.velocity.components) < 1e-10

    def test_energy_non_increasing(self):
        g = Grid(32, 32, 32)
        cfg = SolverConfig(nu=0.05, dt=2e-3, t_end=0.1)
        stepper = NavierStokesStepper(g, cfg)
        snap = StateSnapshot(0.0, initial_random_bandlimited(g, 4, band=(1, 8)), 0)
        energy = lambda v: sum(np.sum(np.abs(c.coeffs) ** 2) for c in v.components)
        prev = energy(snap.velocity)
        for _ in range(50):
            snap = stepper.step(snap)
            now = energy(snap.velocity)
            assert now <= prev * (1.0 + 1e-12)
            prev = now

    def test_rotational_form_runs(self):
        g = Grid(16, 16, 16)
        cfg = SolverConfig(nu=0.1, dt=1e-3, form="rotational")
        stepper = NavierStokesStepper(g, cfg)
        snap = stepper.step(StateSnapshot(0.0, initial_random_bandlimited(g, 5, band=(1, 4)), 0))
        assert divergence_residual(*snap.velocity.components) < 1e-10

    def test_two_thirds_dealias_runs(self):
        g = Grid(16, 16, 16)
        cfg = SolverConfig(nu=0.1, dt=1e-3, dealias="two_thirds")
        stepper = NavierStokesStepper(g, cfg)
        snap = stepper.step(StateSnapshot(0.0, initial_random_bandlimited(g, 6, band=(1, 4)), 0))
        assert divergence_residual(*snap.velocity.components) < 1e-10

    def test_cfl_warning(self):
        g = Grid(16, 16, 16)
        cfg = SolverConfig(nu=0.1, dt=0.5)
        stepper = NavierStokesStepper(g, cfg)
        v0 = initial_random_bandlimited(g, 7, band=(1, 4), amplitude=5.0)
        with pytest.warns(CFLWarning):
            stepper.step(StateSnapshot(0.0, v0, 0))
        assert stepper.cfl_events == 1

    def test_nan_abort_carries_last_snapshot(self):
        g = Grid(16, 16, 16)
        cfg = SolverConfig(nu=0.1, dt=1e-3)

        def poisoned(u):
            out = np.zeros_like(u)
            out[0, 1, 0, 0] = np.nan
            return out

        stepper = NavierStokesStepper(g, cfg, nonlinear=poisoned)
        snap0 = StateSnapshot(0.0, initial_taylor_green(g), 0)
        with pytest.raises(SolverAbort) as err:
            stepper.step(snap0)
        assert err.value.last_snapshot is snap0


class TestSelfConvergence:
    @pytest.mark.parametrize("scheme", ["etdrk4", "ifrk4"])
    def test_order_at_least_3p8(self, scheme):
        g = Grid(16, 16, 16)
        v0 = initial_random_bandlimited(g, 11, band=(1, 4), amplitude=2.0)
        t_end = 0.04

        def final_state(dt):
            cfg = SolverConfig(nu=0.02, dt=dt, t_end=t_end, integrator=scheme)
            stepper = NavierStokesStepper(g, cfg)
            snap = StateSnapshot(0.0, v0, 0)
            for _ in range(int(round(t_end / dt))):
                snap = stepper.step(snap)
            return np.stack([c.coeffs for c in snap.velocity.components])

        u1 = final_state(4e-3)
        u2 = final_state(2e-3)
        u3 = final_state(1e-3)
        e12 = np.linalg.norm(u1 - u2)
        e23 = np.linalg.norm(u2 - u3)
        order = np.log2(e12 / e23)
        assert order >= 3.8


def _mode_convolution_rhs(modes):
    """Brute-force oracle: projected -div(v x v) from a sparse mode table."""
    prods = {}
    for k1, c1 in modes.items():
        for k2, c2 in modes.items():
            k = tuple(a + b for a, b in zip(k1, k2))
            acc = prods.setdefault(k, np.zeros((3, 3), dtype=complex))
            acc += np.outer(c1, c2)
    out = {}
    for k, mat in prods.items():
        kv = np.array(k, dtype=float)
        tendency = np.array([-1j * np.dot(kv, mat[i]) for i in range(3)])
        ksq = np.dot(kv, kv)
        if ksq == 0:
            continue
        proj = tendency - kv * np.dot(kv, tendency) / ksq
        out[k] = proj
    return out


class TestNsRhs:
    def test_zero_velocity(self, grid16):
        zero = SpectralField(grid16, np.zeros(grid16.shape, dtype=complex))
        from anisolp.flow import VelocityField

        v = VelocityField(zero, zero.copy(), zero.copy())
        for c in ns_rhs(v):
            assert np.max(np.abs(c.coeffs)) == 0.0

    def test_taylor_green_tendency_vanishes(self, grid32):
        # the advection term is a pure gradient: the projector kills it
        v = initial_taylor_green(grid32)
        for c in ns_rhs(v):
            assert np.max(np.abs(c.coeffs)) < 1e-13

    def test_abc_tendency_vanishes(self, grid16):
        # ABC flows are curl eigenfields: the advection term is a gradient
        v = initial_abc(grid16, 1.0, 0.7, 0.3)
        for c in ns_rhs(v):
            assert np.max(np.abs(c.coeffs)) < 1e-13

    def test_shear_triad_against_convolution_oracle(self, grid16):
        # three single-mode shears (non-Beltrami): finitely many interactions
        x1, x2, x3 = grid16.mesh()
        shape = grid16.shape
        from anisolp.flow import VelocityField

        v = VelocityField(
            from_samples(grid16, np.sin(x2) * np.ones(shape)),
            from_samples(grid16, np.sin(x3) * np.ones(shape)),
            from_samples(grid16, np.sin(x1) * np.ones(shape)),
        )
        got = np.stack([c.coeffs for c in ns_rhs(v)])
        modes = {}
        for idx, comp in enumerate(v.components):
            cc = comp.coeffs
            for i1, i2, i3 in np.argwhere(np.abs(cc) > 1e-13):
                k = tuple(
                    int(grid16.axis_wavenumbers(ax + 1)[i])
                    for ax, i in enumerate((i1, i2, i3))
                )
                modes.setdefault(k, np.zeros(3, dtype=complex))[idx] = cc[i1, i2, i3]
        want = _mode_convolution_rhs(modes)
        built = np.zeros((3,) + shape, dtype=complex)
        for k, vec in want.items():
            idx = tuple(int(ki) % n for ki, n in zip(k, shape))
            built[(slice(None),) + idx] = vec
        assert np.max(np.abs(built)) > 1e-3  # the oracle really is non-trivial
        assert rel_err(got, built) < 1e-12


class TestTransportDiffusion:
    def test_pure_heat_decay(self, grid16):
        zero = SpectralField(grid16, np.zeros(grid16.shape, dtype=complex))
        from anisolp.flow import VelocityField

        v = VelocityField(zero, zero.copy(), zero.copy())
        a0 = bandlimited(grid16, 12, kmax=4)
        dt = 1e-3
        out = transport_diffusion_step(a0, v, None, dt, nu=1.3)
        want = a0.coeffs * np.exp(-1.3 * grid16.k_sq() * dt)
        assert rel_err(out.coeffs, want) < 1e-13

    def test_richardson_self_convergence(self, grid16):
        x1 = 2 * np.pi * np.arange(16) / 16
        from anisolp.flow import VelocityField

        zero = SpectralField(grid16, np.zeros(grid16.shape, dtype=complex))
        v2 = from_samples(grid16, np.cos(x1).reshape(-1, 1, 1) * np.ones(grid16.shape))
        v = VelocityField(zero, v2, zero.copy())
        a0 = bandlimited(grid16, 13, kmax=4)
        t_end = 0.02

        def solve(dt):
            stepper = TransportDiffusionStepper(grid16, dt, v, None, nu=1.0)
            a = a0
            for _ in range(int(round(t_end / dt))):
                a = stepper.step(a)
            return a.coeffs

        ref = solve(t_end / 128)
        e1 = np.linalg.norm(solve(t_end / 8) - ref)
        e2 = np.linalg.norm(solve(t_end / 16) - ref)
        order = np.log2(e1 / e2)
        assert order >= 3.8

    def test_l2_energy_balance(self, grid32):
        # r=2 energy balance: 0.5||a||^2 + int ||grad a||^2 = 0.5||a0||^2 + int (f, a)
        from anisolp.flow import VelocityField

        v = initial_taylor_green(grid32)
        x1, _, x3 = grid32.mesh()
        f = from_samples(
            grid32, (0.1 * np.cos(x1) * np.cos(x3)) * np.ones(grid32.shape)
        )
        a0 = bandlimited(grid32, 14, kmax=2)
        dt, nsteps = 1e-4, 100
        vol = (2 * np.pi) ** 3

        def l2sq(c):
            return vol * float(np.sum(np.abs(c) ** 2))

        def f_inner(ahat):
            return vol * float(np.sum(np.conj(f.coeffs) * ahat.coeffs).real)

        stepper = TransportDiffusionStepper(grid32, dt, v, f, nu=1.0)
        a = a0
        grad_int = 0.0
        f_int = 0.0
        prev_grad = gradient_l2_sq(a)
        prev_f = f_inner(a)
        for _ in range(nsteps):
            a = stepper.step(a)
            cur_grad = gradient_l2_sq(a)
            cur_f = f_inner(a)
            grad_int += 0.5 * dt * (prev_grad + cur_grad)
            f_int += 0.5 * dt * (prev_f + cur_f)
            prev_grad, prev_f = cur_grad, cur_f
        lhs = 0.5 * l2sq(a.coeffs) + grad_int
        rhs = 0.5 * l2sq(a0.coeffs) + f_int
        assert abs(lhs - rhs) < 1e-8 * l2sq(a0.coeffs)

    @pytest.mark.parametrize("r", [1.6, 1.8])
    def test_lr_energy_identity_small_scale(self, grid32, r):
        # strictly positive data keeps |a|^{r-2} classical everywhere
        from anisolp.flow import VelocityField, signed_power

        v = initial_taylor_green(grid32)
        x1, x2, x3 = grid32.mesh()
        a0 = from_samples(
            grid32,
            (2.0 + 0.3 * np.sin(x1) * np.cos(x3) + 0.2 * np.cos(2 * x2))
            * np.ones(grid32.shape),
        )
        f = from_samples(grid32, (0.2 * np.cos(x1) * np.cos(x2)) * np.ones(grid32.shape))
        dt, nsteps = 5e-4, 40
        cellvol = grid32.cell_volume

        def diagnostics(ahat):
            phys = physical(ahat).real
            lr_mass = float(np.sum(np.abs(phys) ** r)) * cellvol
            ar2 = from_samples(
                grid32, signed_power(RealField(grid32, phys), r / 2.0).samples
            )
            grad_sq = gradient_l2_sq(ar2)
            f_pair = float(
                np.sum(physical(f).real * np.sign(phys) * np.abs(phys) ** (r - 1.0))
            ) * cellvol
            return lr_mass, grad_sq, f_pair

        stepper = TransportDiffusionStepper(grid32, dt, v, f, nu=1.0)
        a = a0
        lr0, prev_grad, prev_f = diagnostics(a)
        grad_int = f_int = 0.0
        for _ in range(nsteps):
            a = stepper.step(a)
            lr_mass, cur_grad, cur_f = diagnostics(a)
            grad_int += 0.5 * dt * (prev_grad + cur_grad)
            f_int += 0.5 * dt * (prev_f + cur_f)
            prev_grad, prev_f = cur_grad, cur_f
        lhs = lr_mass / r + (4.0 * (r - 1.0) / r**2) * grad_int
        rhs = lr0 / r + f_int
        assert abs(lhs - rhs) / abs(rhs) < 1e-3


class TestInitialData:
    def test_taylor_green_divergence_free_exactly(self, grid32):
        v = initial_taylor_green(grid32)
        assert divergence_residual(*v.components) < 1e-14

    def test_abc_is_curl_eigenfield(self, grid32):
        v = initial_abc(grid32, 1.0, 1.0, 1.0)
        curl = full_vorticity(v)
        for c, w in zip(v.components, curl):
            assert rel_err(w.coeffs, c.coeffs) < 1e-12

    def test_random_deterministic(self, grid16):
        a = initial_random_bandlimited(grid16, 99, band=(1, 4))
        b = initial_random_bandlimited(grid16, 99, band=(1, 4))
        for x, y in zip(a.components, b.components):
            assert np.array_equal(x.coeffs, y.coeffs)

    def test_random_band_respected(self, grid32):
        v = initial_random_bandlimited(grid32, 1, band=(2, 6))
        kk = grid32.k_abs()
        outside = (kk < 2) | (kk > 6)
        for c in v.components:
            assert np.max(np.abs(c.coeffs[outside])) == 0.0

    def test_random_band_out_of_range(self, grid16):
        with pytest.raises(ParameterRangeError):
            initial_random_bandlimited(grid16, 1, band=(2, 8))

    def test_spectrum_slope_fitted(self):
        g = Grid(64, 64, 64)
        slope = -5.0 / 3.0
        v = initial_random_bandlimited(g, 123, band=(3, 14), slope=slope)
        kk = g.k_abs()
        shells = range(4, 13)
        e_k = []
        for k in shells:
            sel = (kk >= k - 0.5) & (kk < k + 0.5)
            e_k.append(sum(float(np.sum(np.abs(c.coeffs[sel]) ** 2)) for c in v.components))
        fit = np.polyfit(np.log(np.array(list(shells), dtype=float)), np.log(e_k), 1)
        assert abs(fit[0] - slope) < 0.1
