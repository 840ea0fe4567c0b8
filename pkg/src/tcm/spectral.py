"""
Fourier machinery on the periodic square [0, 2pi)^2.

Physical fields are plain float64 arrays: a scalar field has shape (n, n),
a vector field (2, n, n).  Axis -2 carries x1 and axis -1 carries x2
(``indexing='ij'``).  Spectral fields are the rfft half-plane of shape
(..., n, n//2 + 1), normalized so that

    f(x) = sum_k c_k exp(i k.x).

Every Fourier multiplier with a symbol that is singular or fractional at
k = 0 annihilates the zero mode; homogeneous quantities are therefore
quantities of mean-zero fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

TWO_PI = 2.0 * np.pi
AREA = TWO_PI**2

RealField = np.ndarray
VectorField = np.ndarray
SpectralField = np.ndarray


@dataclass(frozen=True)
class GridSpec:
    """Uniform n x n grid on the 2pi-periodic torus."""

    n: int
    length: float = TWO_PI

    def __post_init__(self):
        if self.n < 16 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two >= 16, got {self.n}")
        if self.length != TWO_PI:
            raise ValueError("only the 2pi-periodic domain is supported")

    @property
    def k_max(self) -> int:
        return self.n // 3

    @property
    def spectral_shape(self) -> tuple[int, int]:
        return (self.n, self.n // 2 + 1)

    @cached_property
    def x(self) -> tuple[np.ndarray, np.ndarray]:
        x1d = np.arange(self.n) * (self.length / self.n)
        return tuple(np.meshgrid(x1d, x1d, indexing="ij"))

    @cached_property
    def k(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.n
        k1 = np.fft.fftfreq(n, 1.0 / n)[:, None] * np.ones((1, n // 2 + 1))
        k2 = np.fft.rfftfreq(n, 1.0 / n)[None, :] * np.ones((n, 1))
        return k1, k2

    @cached_property
    def kd(self) -> tuple[np.ndarray, np.ndarray]:
        # derivative wavenumbers: Nyquist index has no real-valued derivative
        k1, k2 = (c.copy() for c in self.k)
        k1[np.abs(k1) == self.n // 2] = 0.0
        k2[k2 == self.n // 2] = 0.0
        return k1, k2

    @cached_property
    def kmag(self) -> np.ndarray:
        k1, k2 = self.k
        return np.hypot(k1, k2)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        k1, k2 = self.k
        return (np.abs(k1) <= self.k_max) & (np.abs(k2) <= self.k_max)

    @cached_property
    def half_weights(self) -> np.ndarray:
        """Multiplicity of each stored coefficient in the full spectrum."""
        w = np.full(self.spectral_shape, 2.0)
        w[:, 0] = 1.0
        w[:, -1] = 1.0
        return w

    @cached_property
    def signed_coordinate(self) -> tuple[np.ndarray, np.ndarray]:
        """Nearest-image coordinates in (-pi, pi]."""
        return tuple(np.pi - np.mod(np.pi - xi, TWO_PI) for xi in self.x)


@lru_cache(maxsize=None)
def get_grid(n: int) -> GridSpec:
    return GridSpec(n)


def grid_of(a: np.ndarray) -> GridSpec:
    """Grid of a physical or spectral array, inferred from its trailing axes."""
    n = a.shape[-2]
    if a.shape[-1] not in (n, n // 2 + 1):
        raise ValueError(f"not a field array: shape {a.shape}")
    return get_grid(n)


# -- transforms ---------------------------------------------------------------

def forward_transform(f: RealField) -> SpectralField:
    return np.fft.rfft2(f, norm="forward")


def inverse_transform(fh: SpectralField) -> RealField:
    n = fh.shape[-2]
    return np.fft.irfft2(fh, s=(n, n), norm="forward")


def coeff(fh: SpectralField, k1: int, k2: int) -> complex:
    """Coefficient of exp(i(k1 x1 + k2 x2)), using Hermitian symmetry for k2 < 0."""
    n = fh.shape[-2]
    if k2 < 0:
        return np.conj(fh[..., (-k1) % n, -k2])
    return fh[..., k1 % n, k2]


# -- multipliers ----------------------------------------------------------------

def symbol_power(grid: GridSpec, a: float) -> np.ndarray:
    """|k|^a with the zero mode set to 0 whenever a != 0."""
    if a == 0:
        return np.ones(grid.spectral_shape)
    with np.errstate(divide="ignore"):
        out = grid.kmag**a
    out[0, 0] = 0.0
    return out


def fractional_laplacian(fh: SpectralField, a: float) -> SpectralField:
    """Lambda^a as a multiplier on spectral coefficients."""
    return fh * symbol_power(grid_of(fh), a)


def lam(f: RealField, a: float) -> RealField:
    """Lambda^a on a physical field (scalar or vector)."""
    return inverse_transform(fractional_laplacian(forward_transform(f), a))


def dealias(fh: SpectralField) -> SpectralField:
    return fh * grid_of(fh).dealias_mask


def gradient_hat(fh: SpectralField) -> SpectralField:
    k1, k2 = grid_of(fh).kd
    return np.stack([1j * k1 * fh, 1j * k2 * fh])


def divergence_hat(wh: SpectralField) -> SpectralField:
    k1, k2 = grid_of(wh).kd
    return 1j * (k1 * wh[0] + k2 * wh[1])


def riesz_div_hat(wh: SpectralField) -> SpectralField:
    return fractional_laplacian(divergence_hat(wh), -1.0)


def leray_project_hat(wh: SpectralField) -> SpectralField:
    grid = grid_of(wh)
    k1, k2 = grid.kd
    ksq = k1 * k1 + k2 * k2
    with np.errstate(invalid="ignore", divide="ignore"):
        inv = np.where(ksq > 0, 1.0 / ksq, 0.0)
    kw = (k1 * wh[0] + k2 * wh[1]) * inv
    return np.stack([wh[0] - k1 * kw, wh[1] - k2 * kw])


def gradient(f: RealField) -> VectorField:
    return inverse_transform(gradient_hat(forward_transform(f)))


def divergence(w: VectorField) -> RealField:
    return inverse_transform(divergence_hat(forward_transform(w)))


def riesz_div(w: VectorField) -> RealField:
    """R w = Lambda^{-1} div w."""
    return inverse_transform(riesz_div_hat(forward_transform(w)))


def leray_project(w: VectorField) -> VectorField:
    return inverse_transform(leray_project_hat(forward_transform(w)))


def curl_field(psi: RealField) -> VectorField:
    """(-d2 psi, d1 psi), divergence-free by construction."""
    d1, d2 = gradient(psi)
    return np.stack([-d2, d1])


def dealiased(f: RealField) -> RealField:
    """Physical field with the 2/3-rule truncation applied."""
    return inverse_transform(dealias(forward_transform(f)))


# -- norms and pairings ------------------------------------------------------------

def lp_norm(f: np.ndarray, p: float) -> float:
    """Grid quadrature of the L^p norm on the torus.

    Vector fields use the pointwise Euclidean norm over the leading axis.
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    a = np.sqrt(np.sum(f * f, axis=0)) if f.ndim == 3 else np.abs(f)
    if np.isinf(p):
        return float(a.max())
    if p == 2:
        return float(np.sqrt(AREA * np.mean(a * a)))
    return float((AREA * np.mean(a**p)) ** (1.0 / p))


def inner(a: np.ndarray, b: np.ndarray) -> float:
    """L^2 pairing (a|b), summed over components for vector fields."""
    return float(AREA * np.sum(a * b) / (a.shape[-1] * a.shape[-2]))


def spectral_energy(fh: SpectralField) -> float:
    """(2pi)^2 sum_k |c_k|^2 over the full spectrum, summed over components."""
    w = grid_of(fh).half_weights
    return float(AREA * np.sum(w * np.abs(fh) ** 2))


def grad_lp(f: np.ndarray, p: float) -> float:
    """L^p norm of grad f; the Jacobian of a vector field is taken pointwise in Frobenius norm."""
    g = gradient(f)
    return lp_norm(g.reshape(-1, *f.shape[-2:]), p)


def grad_linf(f: np.ndarray) -> float:
    return grad_lp(f, np.inf)


# -- corpus generation -----------------------------------------------------------

def random_band_hat(
    n: int, seed: int | tuple, slope: float, k_lo: int, k_hi: int
) -> SpectralField:
    """Seeded complex Gaussian coefficients scaled by |k|^slope on k_lo <= |k| <= k_hi.

    Draws are made over a canonical, resolution-independent list of
    wavevectors, so the same seed gives the same trigonometric polynomial
    on every grid that resolves the band.
    """
    grid = get_grid(n)
    if not (1 <= k_lo <= k_hi <= grid.k_max):
        raise ValueError(f"invalid band [{k_lo}, {k_hi}] for k_max={grid.k_max}")
    rng = np.random.default_rng(seed if np.isscalar(seed) else list(seed))
    k1s, k2s = np.meshgrid(
        np.arange(-k_hi, k_hi + 1), np.arange(0, k_hi + 1), indexing="ij"
    )
    k1s, k2s = k1s.ravel(), k2s.ravel()
    upper = (k2s > 0) | ((k2s == 0) & (k1s > 0))
    k1s, k2s = k1s[upper], k2s[upper]
    draws = rng.standard_normal((k1s.size, 2))
    kk = np.hypot(k1s, k2s)
    band = (kk >= k_lo) & (kk <= k_hi)
    c = (draws[:, 0] + 1j * draws[:, 1]) / np.sqrt(2.0) * kk**slope
    out = np.zeros(grid.spectral_shape, dtype=complex)
    k1s, k2s, c = k1s[band], k2s[band], c[band]
    out[k1s % n, k2s] = c
    edge = k2s == 0
    out[(-k1s[edge]) % n, 0] = np.conj(c[edge])
    return out


def random_band_field(
    n: int, seed: int | tuple, slope: float = -1.0, k_lo: int = 1, k_hi: int | None = None
) -> RealField:
    """Mean-zero real field with a random band-limited spectrum."""
    k_hi = get_grid(n).k_max if k_hi is None else k_hi
    return inverse_transform(random_band_hat(n, seed, slope, k_lo, k_hi))


def random_solenoidal_field(
    n: int, seed: int | tuple, slope: float = -1.0, k_lo: int = 1, k_hi: int | None = None
) -> VectorField:
    """Leray projection of a random band-limited vector field."""
    second = (*seed, 1) if isinstance(seed, tuple) else (seed, 1)
    w = np.stack([
        random_band_field(n, seed, slope, k_lo, k_hi),
        random_band_field(n, second, slope, k_lo, k_hi),
    ])
    return leray_project(w)
