import numpy as np
import pytest

from anisolp.grid import Grid, SpectralField


@pytest.fixture(scope="session")
def grid16():
    return Grid(16, 16, 16)


@pytest.fixture(scope="session")
def grid32():
    return Grid(32, 32, 32)


def bandlimited(grid, seed, kmin=1, kmax=None):
    """Zero-mean random field with spherical band support, unit amplitude."""
    kmax = kmax if kmax is not None else min(grid.shape) // 4
    rng = np.random.default_rng(seed)
    c = np.fft.fftn(rng.standard_normal(grid.shape)) / grid.size
    kk = grid.k_abs()
    c = np.where((kk >= kmin) & (kk <= kmax), c, 0.0)
    sup = np.max(np.abs(np.fft.ifftn(c) * grid.size))
    return SpectralField(grid, c / sup if sup > 0 else c)


def rel_err(got, want):
    scale = np.max(np.abs(want))
    if scale == 0:
        return np.max(np.abs(got))
    return np.max(np.abs(got - want)) / scale
