"""
Dyadic frequency decomposition on the torus.

chi is 1 on [0, 3/4] and 0 beyond 4/3, glued smoothly with exp(-1/x)
flanks; phi(r) = chi(r/2) - chi(r) lives on [3/4, 8/3].  The partition of
unity chi(r) + sum_{j>=0} phi(2^-j r) = 1 is then a telescoping sum and
holds to rounding.

Integer frequencies satisfy |k| >= 1, so on the torus the homogeneous
blocks run from j = -1 (phi(2|k|) = chi(|k|) is non-zero at |k| = 1) up to
the first block covering the grid corners.  The zero mode is in no
homogeneous block; S_{-1} = chi(2D) is exactly the mean projection.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .records import AuditRecord
from .spectral import (
    GridSpec,
    forward_transform,
    get_grid,
    grid_of,
    inverse_transform,
    lp_norm,
    random_band_field,
    symbol_power,
)

CHI_INNER = 0.75
CHI_OUTER = 4.0 / 3.0
ANNULUS = (0.75, 8.0 / 3.0)


def _flank(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def chi(r):
    """Smooth radial low-pass profile: 1 on [0, 3/4], 0 on [4/3, inf)."""
    r = np.asarray(r, dtype=float)
    t = (CHI_OUTER - r) / (CHI_OUTER - CHI_INNER)
    a, b = _flank(t), _flank(1.0 - t)
    return a / (a + b)


def phi(r):
    """Annulus profile phi(r) = chi(r/2) - chi(r), supported in [3/4, 8/3]."""
    r = np.asarray(r, dtype=float)
    return chi(r / 2.0) - chi(r)


@dataclass(frozen=True)
class BesovIndex:
    s: float
    p: float = 2.0
    q: float = 2.0
    homogeneous: bool = True

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ValueError(f"Besov exponents must be >= 1, got p={self.p}, q={self.q}")


@dataclass(frozen=True)
class DyadicCutoffs:
    grid: GridSpec
    j_min: int
    j_max: int
    j_top: int
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    chi = staticmethod(chi)
    phi = staticmethod(phi)

    @property
    def blocks(self) -> range:
        """Homogeneous block indices carrying grid frequencies."""
        return range(self.j_min, self.j_top + 1)

    def phi_j(self, j: int) -> np.ndarray:
        key = ("phi", j)
        if key not in self._cache:
            self._cache[key] = phi(self.grid.kmag * 2.0 ** (-j))
        return self._cache[key]

    def chi_j(self, j: int) -> np.ndarray:
        key = ("chi", j)
        if key not in self._cache:
            self._cache[key] = chi(self.grid.kmag * 2.0 ** (-j))
        return self._cache[key]


@lru_cache(maxsize=None)
def _cutoffs(n: int) -> DyadicCutoffs:
    grid = get_grid(n)
    j_max = 0
    while 0.75 * 2.0 ** (j_max + 1) <= grid.k_max:
        j_max += 1
    corner = float(grid.kmag.max())
    j_top = j_max
    while 0.75 * 2.0 ** (j_top + 1) < corner:
        j_top += 1
    return DyadicCutoffs(grid=grid, j_min=-1, j_max=j_max, j_top=j_top)


def build_cutoffs(grid: GridSpec | int) -> DyadicCutoffs:
    n = grid if isinstance(grid, int) else grid.n
    if n < 16:
        raise ValueError("grid too small to host a full dyadic annulus")
    return _cutoffs(n)


def _cut(f, cut):
    return build_cutoffs(grid_of(f)) if cut is None else cut


def delta_j_hat(fh: np.ndarray, j: int, cut: DyadicCutoffs | None = None) -> np.ndarray:
    cut = _cut(fh, cut)
    if j < cut.j_min - 1 or j > cut.j_top + 1:
        return np.zeros_like(fh)
    return fh * cut.phi_j(j)


def s_j_hat(fh: np.ndarray, j: int, cut: DyadicCutoffs | None = None) -> np.ndarray:
    cut = _cut(fh, cut)
    return fh * cut.chi_j(j)


def delta_j(f: np.ndarray, j: int, cut: DyadicCutoffs | None = None) -> np.ndarray:
    """Delta_j f = phi(2^-j D) f."""
    return inverse_transform(delta_j_hat(forward_transform(f), j, cut))


def s_j(f: np.ndarray, j: int, cut: DyadicCutoffs | None = None) -> np.ndarray:
    """S_j f = chi(2^-j D) f."""
    return inverse_transform(s_j_hat(forward_transform(f), j, cut))


def _lq_sum(terms, q: float) -> float:
    terms = np.asarray(terms, dtype=float)
    if terms.size == 0:
        return 0.0
    if np.isinf(q):
        return float(terms.max())
    return float(np.sum(terms**q) ** (1.0 / q))


def block_norms(f: np.ndarray, p: float, cut: DyadicCutoffs | None = None) -> dict[int, float]:
    """{j: ||Delta_j f||_{L^p}} over every homogeneous block of the grid."""
    cut = _cut(f, cut)
    fh = forward_transform(f)
    return {j: lp_norm(inverse_transform(fh * cut.phi_j(j)), p) for j in cut.blocks}


def besov_norm(f: np.ndarray, idx: BesovIndex, cut: DyadicCutoffs | None = None) -> float:
    """Besov norm with the block sum over the homogeneous blocks of the grid.

    The homogeneous part drops the mean (the zero mode is in no block).  The
    inhomogeneous norm is ||f||_{L^p} plus the homogeneous part.
    """
    norms = block_norms(f, idx.p, cut)
    hom = _lq_sum([2.0 ** (idx.s * j) * v for j, v in norms.items()], idx.q)
    if idx.homogeneous:
        return hom
    return lp_norm(f, idx.p) + hom


def sobolev_norm(f: np.ndarray, s: float, homogeneous: bool = True) -> float:
    fh = forward_transform(f)
    hom = lp_norm(inverse_transform(fh * symbol_power(grid_of(fh), s)), 2)
    if homogeneous:
        return hom
    return lp_norm(f, 2) + hom


def bernstein_audit(
    f: np.ndarray,
    j: int,
    gamma: float,
    p: float,
    q: float,
    cut: DyadicCutoffs | None = None,
    tol: float = 1e-10,
) -> AuditRecord:
    """Ratios for both Bernstein inequalities on a frequency-localized field.

    ratio = ||Lambda^{2 gamma} f||_q / (2^{2 gamma j + 2 j (1/p - 1/q)} ||f||_p);
    for annulus support also ratio_lower = 2^{2 gamma j} ||f||_q / ||Lambda^{2 gamma} f||_q.
    """
    cut = _cut(f, cut)
    fh = forward_transform(f)
    kmag = cut.grid.kmag
    scale = np.abs(fh).max()
    if scale == 0:
        raise ValueError("bernstein_audit needs a non-zero field")
    live = np.abs(fh) > tol * scale
    if np.any(live & (kmag > ANNULUS[1] * 2.0**j)):
        raise ValueError(f"field is not localized to the ball of block {j}")
    annulus = not np.any(live & (kmag < ANNULUS[0] * 2.0**j))

    lhs = lp_norm(inverse_transform(fh * symbol_power(cut.grid, 2 * gamma)), q)
    fp, fq = lp_norm(f, p), lp_norm(f, q)
    d = 2
    weight = 2.0 ** (2 * gamma * j + j * d * (1.0 / p - 1.0 / q))
    rhs = weight * fp
    lower = 2.0 ** (2 * gamma * j) * fq / lhs if annulus and lhs > 0 else None
    return AuditRecord(
        estimate="bernstein",
        lhs=lhs,
        factors={"f_lp": fp, "weight": weight},
        rhs=rhs,
        params={"j": j, "gamma": gamma, "p": p, "q": q, "n": cut.grid.n, "annulus": annulus},
        ratio_lower=lower,
    )


def annulus_field(n: int, seed: int, j: int, slope: float = 0.0) -> np.ndarray:
    """Delta_j of a seeded random field: a field with annulus spectral support."""
    grid = get_grid(n)
    k_hi = min(grid.k_max, int(np.floor(ANNULUS[1] * 2.0**j)))
    return delta_j(random_band_field(n, seed, slope, 1, k_hi), j)
