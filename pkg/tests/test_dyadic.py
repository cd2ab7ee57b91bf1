import numpy as np
import pytest

from anisolp.dyadic import (
    DEFAULT_CUTOFF,
    DyadicCutoff,
    aniso_besov_norm,
    besov_norm,
    block,
    block_range,
    lowpass_partition_defect,
    partition_defect,
)
from anisolp.errors import ParameterRangeError
from anisolp.grid import Grid, RealField, SpectralField, physical, single_mode
from anisolp.spectral import (
    lp_norm,
    mixed_lp_norm,
    sobolev_aniso_norm,
    sobolev_iso_norm,
    spectral_derivative,
)

from conftest import bandlimited


class TestCutoff:
    def test_supports(self):
        c = DEFAULT_CUTOFF
        taus = np.linspace(0, 4, 4001)
        assert np.all(c.chi(taus[taus <= 0.75]) == 1.0)
        assert np.all(c.chi(taus[taus >= 4.0 / 3.0]) == 0.0)
        phi = c.phi(taus)
        assert np.all(phi[(taus < 0.75) | (taus > 8.0 / 3.0)] == 0.0)
        assert c.phi(1.0) > 0.3  # ring bump is substantial at tau = 1

    def test_ring_partition_of_unity(self):
        taus = np.geomspace(2.0**-8, 2.0**10, 100_000)
        assert partition_defect(DEFAULT_CUTOFF, taus) < 1e-12

    def test_lowpass_partition_of_unity(self):
        taus = np.concatenate([[0.0], np.geomspace(1e-3, 2.0**10, 100_000)])
        assert lowpass_partition_defect(DEFAULT_CUTOFF, taus) < 1e-12

    def test_partition_at_one_over_central_indices(self):
        total = sum(DEFAULT_CUTOFF.phi(2.0**-j * 1.0) for j in range(-2, 3))
        assert total == pytest.approx(1.0, abs=1e-14)

    def test_smoothness_no_overshoot(self):
        taus = np.linspace(0, 3, 30001)
        chi = DEFAULT_CUTOFF.chi(taus)
        assert np.all((chi >= 0) & (chi <= 1))
        assert np.all(np.diff(chi) <= 1e-12)  # monotone non-increasing


class TestBlocks:
    def test_single_mode_iso_block_weight(self, grid16):
        m = single_mode(grid16, (1, 0, 0))
        for j in range(-2, 4):
            out = block(m, "iso", j)
            assert out.coeffs[1, 0, 0] == pytest.approx(
                DEFAULT_CUTOFF.phi(2.0**-j), abs=1e-15
            )

    def test_out_of_range_blocks_vanish(self, grid32):
        a = bandlimited(grid32, 0)
        js = block_range(grid32, "iso")
        for j in (js.start - 2, js.stop + 1):
            assert np.max(np.abs(block(a, "iso", j).coeffs)) == 0.0

    def test_horizontal_block_kills_kh_zero(self, grid16):
        m = single_mode(grid16, (0, 0, 3))
        for k in block_range(grid16, "h"):
            assert np.max(np.abs(block(m, "h", k).coeffs)) == 0.0

    def test_reconstruction(self, grid32):
        for seed in range(3):
            a = bandlimited(grid32, seed, kmax=14)
            total = np.zeros(grid32.shape, dtype=complex)
            for j in block_range(grid32, "iso"):
                total += block(a, "iso", j).coeffs
            assert np.linalg.norm(total - a.coeffs) < 1e-10 * np.linalg.norm(a.coeffs)

    def test_orthogonality_separated_blocks(self, grid32):
        a = bandlimited(grid32, 3, kmax=14)
        for j in block_range(grid32, "iso"):
            bj = block(a, "iso", j)
            for jp in (j + 2, j + 3):
                assert np.max(np.abs(block(bj, "iso", jp).coeffs)) == 0.0

    def test_lowpass_drops_mean_and_planes(self, grid16):
        one = SpectralField(grid16, np.zeros(grid16.shape, dtype=complex))
        one.coeffs[0, 0, 0] = 1.0
        assert np.max(np.abs(block(one, "low_iso", 3).coeffs)) == 0.0
        axis_mode = single_mode(grid16, (0, 0, 2))
        assert np.max(np.abs(block(axis_mode, "low_h", 5).coeffs)) == 0.0
        plane_mode = single_mode(grid16, (2, 1, 0))
        assert np.max(np.abs(block(plane_mode, "low_v", 5).coeffs)) == 0.0

    def test_unknown_kind(self, grid16):
        with pytest.raises(ParameterRangeError):
            block(single_mode(grid16, (1, 0, 0)), "diagonal", 0)


class TestBesovNorm:
    def test_zero_field(self, grid16):
        z = SpectralField(grid16, np.zeros(grid16.shape, dtype=complex))
        assert besov_norm(z, 0.5, 2, 2) == 0.0

    def test_single_mode_closed_form(self, grid16):
        # |k| = 4: finitely many blocks, L^p of the mode is (2 pi)^{3/p}
        m = single_mode(grid16, (4, 0, 0))
        s, p, q = 0.7, 3.0, 2.0
        mode_lp = (2 * np.pi) ** (3.0 / p)
        expected = sum(
            (2.0 ** (j * s) * DEFAULT_CUTOFF.phi(2.0**-j * 4.0) * mode_lp) ** q
            for j in block_range(grid16, "iso")
        ) ** (1.0 / q)
        assert besov_norm(m, s, p, q) == pytest.approx(expected, rel=1e-12)

    def test_q_infinity_is_sup(self, grid16):
        m = single_mode(grid16, (4, 0, 0))
        s = -0.3
        expected = max(
            2.0 ** (j * s) * DEFAULT_CUTOFF.phi(2.0**-j * 4.0) * (2 * np.pi) ** 1.5
            for j in block_range(grid16, "iso")
        )
        assert besov_norm(m, s, 2, np.inf) == pytest.approx(expected, rel=1e-12)

    def test_sobolev_equivalence_oracle(self, grid32):
        # per-mode weight ratio g_s is multiplicatively 2-periodic: scan one
        # period for exact bounds, then require every field ratio inside them
        for s in (0.5, 1.0):
            taus = np.geomspace(1.0, 2.0, 4001)
            gsum = np.zeros_like(taus)
            for j in range(-6, 9):
                gsum += 2.0 ** (2 * j * s) * DEFAULT_CUTOFF.phi(taus * 2.0**-j) ** 2
            gs = gsum * taus ** (-2 * s)
            lo = (2 * np.pi) ** 1.5 * np.sqrt(gs.min())
            hi = (2 * np.pi) ** 1.5 * np.sqrt(gs.max())
            for seed in range(4):
                a = bandlimited(grid32, seed, kmax=12)
                ratio = besov_norm(a, s, 2, 2) / sobolev_iso_norm(a, s)
                assert lo * (1 - 1e-6) <= ratio <= hi * (1 + 1e-6)

    def test_equivalence_bounds_regression(self):
        # frozen from the shipped cutoff at first release (s = 0.5)
        taus = np.geomspace(1.0, 2.0, 4001)
        gsum = np.zeros_like(taus)
        for j in range(-6, 9):
            gsum += 2.0**j * DEFAULT_CUTOFF.phi(taus * 2.0**-j) ** 2
        gs = gsum / taus
        lo = (2 * np.pi) ** 1.5 * np.sqrt(gs.min())
        hi = (2 * np.pi) ** 1.5 * np.sqrt(gs.max())
        assert lo == pytest.approx(9.104226, rel=1e-5)
        assert hi == pytest.approx(14.054861, rel=1e-5)

    def test_invalid_spec(self, grid16):
        m = single_mode(grid16, (1, 0, 0))
        with pytest.raises(ParameterRangeError):
            besov_norm(m, 0.5, 0.5, 2)
        with pytest.raises(ParameterRangeError):
            besov_norm(m, 0.5, 2, 0.0)


class TestAnisoBesovNorm:
    def test_single_cell_closed_form(self, grid32):
        a = block(block(bandlimited(grid32, 4, kmax=14), "h", 2), "v", 1)
        s1, s2, p = 0.4, -0.2, 2.0
        # the occupied cell dominates; neighbours contribute via overlap
        direct = 0.0
        for k in block_range(grid32, "h"):
            inner = 0.0
            for l in block_range(grid32, "v"):
                cell = block(block(a, "h", k), "v", l)
                inner += (
                    2.0 ** (l * s2) * lp_norm(RealField(grid32, physical(cell)), p)
                ) ** 2
            direct += (2.0 ** (k * s1)) ** 2 * inner
        assert aniso_besov_norm(a, s1, 2, s2, 2, p) == pytest.approx(
            np.sqrt(direct), rel=1e-12
        )

    def test_matches_sobolev_at_222(self, grid32):
        # equivalence on fields clear of the degenerate planes
        a = bandlimited(grid32, 5, kmax=10)
        coeffs = a.coeffs.copy()
        coeffs[0, 0, :] = 0.0
        coeffs[:, :, 0] = 0.0
        a = SpectralField(grid32, coeffs)
        s1, s2 = 0.5, 0.3
        ratio = aniso_besov_norm(a, s1, 2, s2, 2, 2) / sobolev_aniso_norm(a, s1, s2)
        assert 1.0 < ratio < 30.0  # bounded equivalence band

    def test_order_of_summation_matters(self, grid32):
        # two separated cells with very different weights witness the order
        a = block(block(bandlimited(grid32, 6, kmax=14), "h", 3), "v", 0)
        b = block(block(bandlimited(grid32, 7, kmax=14), "h", 0), "v", 3)
        two_cell = SpectralField(grid32, a.coeffs + 3.0 * b.coeffs)
        fwd = aniso_besov_norm(two_cell, 0.5, 1, 0.5, np.inf, 2)
        swapped = aniso_besov_norm(two_cell, 0.5, np.inf, 0.5, 1, 2)
        assert abs(fwd - swapped) > 1e-3 * max(fwd, swapped)

    def test_two_cell_direct_computation(self, grid32):
        # oracle: assemble the double sequence norm by hand for q1=1, q2=inf
        a = bandlimited(grid32, 8, kmax=14)
        s1, s2, p = 0.3, 0.6, 2.0
        cells = {}
        for k in block_range(grid32, "h"):
            for l in block_range(grid32, "v"):
                val = lp_norm(
                    RealField(grid32, physical(block(block(a, "h", k), "v", l))), p
                )
                cells[(k, l)] = val
        expected = sum(
            2.0 ** (k * s1)
            * max(2.0 ** (l * s2) * cells[(k, l)] for l in block_range(grid32, "v"))
            for k in block_range(grid32, "h")
        )
        assert aniso_besov_norm(a, s1, 1, s2, np.inf, p) == pytest.approx(
            expected, rel=1e-12
        )


class TestBernstein:
    @pytest.mark.parametrize("n", [32, 64])
    def test_horizontal_ball_first_case(self, n):
        # fields supported in a horizontal ball at scale 2^k; ratio of
        # derivative gain must stay bounded as resolution changes
        g = Grid(n, n, n)
        scale = 2
        worst = 0.0
        for seed in range(3):
            f = block(bandlimited(g, seed, kmax=min(g.shape) // 4), "h", scale)
            lhs = mixed_lp_norm(RealField(g, physical(spectral_derivative(f, 1))), np.inf, 2)
            gain = 2.0 ** (scale * (1 + 2 * (1 / 2 - 0)))
            rhs = gain * mixed_lp_norm(RealField(g, physical(f)), 2, 2)
            worst = max(worst, lhs / rhs)
        # stability fixture: bounded at both resolutions
        assert 0.0 < worst < 1.0

    def test_vertical_ring_case(self, grid32):
        g = grid32
        scale = 2
        for seed in range(3):
            f = block(bandlimited(g, seed, kmax=8), "v", scale)
            lhs = mixed_lp_norm(RealField(g, physical(f)), 2, 2)
            rhs = mixed_lp_norm(
                RealField(g, physical(spectral_derivative(f, 3))), 2, 2
            ) / 2.0**scale
            assert lhs <= 2.0 * rhs  # ring lower bound with moderate constant
