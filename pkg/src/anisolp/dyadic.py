"""Dyadic frequency decomposition: cutoffs, blocks, Besov norms, paraproducts.

The cutoff pair (chi, phi) is built from the classical C-infinity transition
bump exp(-1/t): chi equals 1 on [0, 3/4], 0 on [4/3, inf), and
phi(tau) = chi(tau/2) - chi(tau).  Then supp phi lies in [3/4, 8/3] and both
partition identities

    sum_j phi(2^-j tau) = 1            (tau > 0)
    chi(tau) + sum_{j>=0} phi(2^-j tau) = 1   (tau >= 0)

hold exactly by telescoping, since for every tau only finitely many terms
are nonzero and the tail low-pass factors are exactly 1 or 0.

All operators here follow the homogeneous convention: isotropic operators
drop the k=0 mode, horizontal (resp. vertical) operators drop the whole
k_h=0 (resp. k3=0) plane.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterRangeError
from .grid import Grid, RealField, SpectralField, physical, same_grid
from .spectral import lp_norm, padded_product_engine

BLOCK_KINDS = ("iso", "h", "v", "low_iso", "low_h", "low_v")


def _bump(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    with np.errstate(over="ignore", under="ignore"):
        out[pos] = np.exp(-1.0 / t[pos])
    return out


@dataclass(frozen=True)
class DyadicCutoff:
    """Smooth low-pass chi and ring bump phi generating all dyadic operators."""

    lo: float = 0.75
    hi: float = 4.0 / 3.0

    def chi(self, tau):
        arr = np.abs(np.asarray(tau, dtype=float))
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        out = np.ones_like(arr)
        out[arr >= self.hi] = 0.0
        mid = (arr > self.lo) & (arr < self.hi)
        u = (arr[mid] - self.lo) / (self.hi - self.lo)
        up, down = _bump(u), _bump(1.0 - u)
        out[mid] = down / (up + down)
        return float(out[0]) if scalar else out

    def phi(self, tau):
        tau = np.asarray(tau, dtype=float)
        return self.chi(tau / 2.0) - self.chi(tau)

    @property
    def phi_support(self):
        return (self.lo, 2.0 * self.hi)


DEFAULT_CUTOFF = DyadicCutoff()


def partition_defect(cutoff: DyadicCutoff, taus) -> float:
    """max |sum_j phi(2^-j tau) - 1| over the given positive taus."""
    taus = np.asarray(taus, dtype=float)
    j_lo = math.floor(math.log2(taus.min() / cutoff.phi_support[1]))
    j_hi = math.ceil(math.log2(taus.max() / cutoff.phi_support[0]))
    total = np.zeros_like(taus)
    for j in range(j_lo, j_hi + 1):
        total += cutoff.phi(taus * 2.0**-j)
    return float(np.max(np.abs(total - 1.0)))


def lowpass_partition_defect(cutoff: DyadicCutoff, taus) -> float:
    """max |chi(tau) + sum_{j>=0} phi(2^-j tau) - 1| over taus >= 0."""
    taus = np.asarray(taus, dtype=float)
    j_hi = max(0, math.ceil(math.log2(max(taus.max(), 1.0) / cutoff.phi_support[0])))
    total = cutoff.chi(taus)
    for j in range(0, j_hi + 1):
        total += cutoff.phi(taus * 2.0**-j)
    return float(np.max(np.abs(total - 1.0)))


# ---------------------------------------------------------------------------
# block operators


def _radial(grid: Grid, kind: str):
    base = kind.removeprefix("low_")
    if base == "iso":
        return grid.k_abs()
    if base == "h":
        return grid.kh_abs()
    if base == "v":
        return grid.k3_abs()
    raise ParameterRangeError("kind", kind, str(BLOCK_KINDS))


def _tau_max(grid: Grid, kind: str) -> float:
    base = kind.removeprefix("low_")
    if base == "iso":
        return grid.k_max
    if base == "h":
        return math.hypot(grid.n1 // 2, grid.n2 // 2)
    return grid.n3 // 2


def block_range(grid: Grid, kind: str, cutoff: DyadicCutoff = DEFAULT_CUTOFF):
    """Indices j for which Delta_j can be non-trivial on this grid.

    Non-trivial blocks need supp phi(2^-j .) to meet [1, tau_max]; outside
    this range the block is exactly the zero field.
    """
    lo, hi = cutoff.phi_support
    j_min = math.ceil(-math.log2(hi))
    j_max = math.floor(math.log2(_tau_max(grid, kind) / lo))
    return range(j_min, j_max + 1)


def _homogeneous_zero(kind: str, weights: np.ndarray) -> np.ndarray:
    # chi(0)=1 would retain the degenerate modes; drop them per convention
    if kind == "low_iso":
        weights[0, 0, 0] = 0.0
    elif kind == "low_h":
        weights[0, 0, :] = 0.0
    elif kind == "low_v":
        weights[:, :, 0] = 0.0
    return weights


def block_multiplier(grid: Grid, kind: str, j: int,
                     cutoff: DyadicCutoff = DEFAULT_CUTOFF) -> np.ndarray:
    radial = _radial(grid, kind)
    if kind.startswith("low_"):
        w = np.array(np.broadcast_to(cutoff.chi(radial * 2.0**-j), grid.shape))
        return _homogeneous_zero(kind, w)
    return np.array(np.broadcast_to(cutoff.phi(radial * 2.0**-j), grid.shape))


def block(a: SpectralField, kind: str, j: int,
          cutoff: DyadicCutoff = DEFAULT_CUTOFF) -> SpectralField:
    """Apply Delta_j (kind 'iso', 'h', 'v') or S_j ('low_iso', 'low_h', 'low_v')."""
    return SpectralField(a.grid, a.coeffs * block_multiplier(a.grid, kind, j, cutoff))


# ---------------------------------------------------------------------------
# Besov norms


def _lq(values, q):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 0.0
    if q == np.inf:
        return float(np.max(values))
    if q < 1:
        raise ParameterRangeError("q", q, "[1, inf]", "sequence exponent")
    return float(np.sum(values**q) ** (1.0 / q))


def validate_besov_spec(s, p, q):
    if p < 1 and p != np.inf:
        raise ParameterRangeError("p", p, "[1, inf]", "Besov integrability")
    if q != np.inf and q < 1:
        raise ParameterRangeError("q", q, "[1, inf]", "Besov summability")


def besov_norm(a: SpectralField, s: float, p, q,
               cutoff: DyadicCutoff = DEFAULT_CUTOFF) -> float:
    """Homogeneous Besov norm: l^q over j of 2^{js} ||Delta_j a||_{L^p}."""
    validate_besov_spec(s, p, q)
    terms = []
    for j in block_range(a.grid, "iso", cutoff):
        piece = block(a, "iso", j, cutoff)
        terms.append(2.0 ** (j * s) * lp_norm(RealField(a.grid, physical(piece)), p))
    return _lq(terms, q)


def aniso_besov_norm(a: SpectralField, s1: float, q1, s2: float, q2, p,
                     cutoff: DyadicCutoff = DEFAULT_CUTOFF) -> float:
    """Anisotropic Besov norm over horizontal/vertical dyadic cells.

    The vertical sum (index l, weight 2^{l s2}, exponent q2) is taken first,
    then the horizontal one (index k, weight 2^{k s1}, exponent q1); when
    q1 != q2 the order matters.
    """
    validate_besov_spec(s1, p, q1)
    validate_besov_spec(s2, p, q2)
    g = a.grid
    outer = []
    for k in block_range(g, "h", cutoff):
        horiz = block(a, "h", k, cutoff)
        if not np.any(horiz.coeffs):
            outer.append(0.0)
            continue
        inner = []
        for l in block_range(g, "v", cutoff):
            cell = block(horiz, "v", l, cutoff)
            inner.append(2.0 ** (l * s2) * lp_norm(RealField(g, physical(cell)), p))
        outer.append(2.0 ** (k * s1) * _lq(inner, q2))
    return _lq(outer, q1)


# ---------------------------------------------------------------------------
# Bony paraproducts
#
# T(a,b) = sum_j S_{j-1}a Delta_j b,  R(a,b) = sum_j Delta_j a Dtilde_j b with
# Dtilde_j = Delta_{j-1} + Delta_j + Delta_{j+1}.  Products are formed on the
# 3/2-padded grid, so T(a,b) + T(b,a) + R(a,b) reconstructs the dealiased
# product of the zero-mean (and, per direction, degenerate-plane-free) parts.


class _BlockStack:
    """Physical-space dyadic blocks of one field on the padded product grid."""

    def __init__(self, a: SpectralField, kind: str, cutoff: DyadicCutoff):
        self.engine = padded_product_engine(a.grid)
        self.js = list(block_range(a.grid, kind, cutoff))
        self.phys = [
            self.engine.to_physical(block(a, kind, j, cutoff)) for j in self.js
        ]

    def near(self, idx):
        out = np.zeros(self.engine.padded_shape, dtype=np.complex128)
        for q in range(max(0, idx - 1), min(len(self.phys), idx + 2)):
            out += self.phys[q]
        return out


def _bony_pieces(a: SpectralField, b: SpectralField, kind: str, cutoff: DyadicCutoff):
    same_grid(a, b)
    sa = _BlockStack(a, kind, cutoff)
    sb = _BlockStack(b, kind, cutoff)
    engine = sa.engine
    t_ab = np.zeros(engine.padded_shape, dtype=np.complex128)
    t_ba = np.zeros_like(t_ab)
    r_ab = np.zeros_like(t_ab)
    low_a = np.zeros_like(t_ab)
    low_b = np.zeros_like(t_ab)
    for idx in range(len(sa.js)):
        if idx >= 2:
            low_a += sa.phys[idx - 2]
            low_b += sb.phys[idx - 2]
        t_ab += low_a * sb.phys[idx]
        t_ba += low_b * sa.phys[idx]
        r_ab += sa.phys[idx] * sb.near(idx)
    return (
        engine.from_physical(t_ab),
        engine.from_physical(t_ba),
        engine.from_physical(r_ab),
    )


def paraproduct_T(a: SpectralField, b: SpectralField, kind: str = "iso",
                  cutoff: DyadicCutoff = DEFAULT_CUTOFF) -> SpectralField:
    """Low-high interaction sum_j S_{j-1}a Delta_j b."""
    return _bony_pieces(a, b, kind, cutoff)[0]


def remainder_R(a: SpectralField, b: SpectralField, kind: str = "iso",
                cutoff: DyadicCutoff = DEFAULT_CUTOFF) -> SpectralField:
    """Comparable-frequency remainder sum_j Delta_j a Dtilde_j b."""
    return _bony_pieces(a, b, kind, cutoff)[2]


def bony_decomposition(a: SpectralField, b: SpectralField, kind: str = "iso",
                       cutoff: DyadicCutoff = DEFAULT_CUTOFF):
    """(T(a,b), T(b,a), R(a,b)) for the requested direction."""
    return _bony_pieces(a, b, kind, cutoff)


def horizontal_bony_split(a: SpectralField, b: SpectralField,
                          cutoff: DyadicCutoff = DEFAULT_CUTOFF):
    return _bony_pieces(a, b, "h", cutoff)


def vertical_bony_split(a: SpectralField, b: SpectralField,
                        cutoff: DyadicCutoff = DEFAULT_CUTOFF):
    return _bony_pieces(a, b, "v", cutoff)
