"""
Commutators of Fourier multipliers with multiplication and advection, and
the ratio audits of the matching estimates.

Every pointwise product is dealiased (2/3 rule) before it is transformed,
on both sides of a commutator, so that [A, B] is bilinear and exact for
fields band-limited to k_max / 2.  Multiplication by a constant commutes
with every multiplier; commutators short-circuit that case to an exact
zero field.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .littlewood_paley import (
    BesovIndex,
    DyadicCutoffs,
    besov_norm,
    build_cutoffs,
    chi,
)
from .records import AuditRecord
from .spectral import (
    AREA,
    dealias,
    divergence,
    forward_transform,
    get_grid,
    grad_linf,
    grad_lp,
    gradient_hat,
    grid_of,
    inverse_transform,
    lp_norm,
    random_band_field,
    random_solenoidal_field,
    riesz_div_hat,
    symbol_power,
)

SOLENOIDAL_TOL = 1e-10


def is_constant(f: np.ndarray) -> bool:
    flat = f.reshape(-1, *f.shape[-2:]) if f.ndim == 3 else f[None]
    return all(np.ptp(c) == 0 for c in flat)


def product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Dealiased pointwise product of two scalar fields."""
    return inverse_transform(dealias(forward_transform(a * b)))


def advect_hat(f: np.ndarray, gh: np.ndarray) -> np.ndarray:
    """Spectral coefficients of the dealiased f . grad g; g given spectrally.

    g may be scalar (n, m) or carry leading component axes, which are
    advected componentwise.
    """
    dg = inverse_transform(gradient_hat(gh))  # (2, *g.shape)
    prod = f[0] * dg[0] + f[1] * dg[1]
    return dealias(forward_transform(prod))


def advect(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    return inverse_transform(advect_hat(f, forward_transform(g)))


def check_solenoidal(f: np.ndarray, name: str = "f") -> None:
    div = divergence(f)
    scale = max(1.0, float(np.abs(f).max()))
    if np.abs(div).max() > SOLENOIDAL_TOL * scale:
        raise ValueError(f"{name} must be divergence-free (max |div| = {np.abs(div).max():.3e})")


def multiplier_adv_commutator(f: np.ndarray, g: np.ndarray, symbol: np.ndarray) -> np.ndarray:
    """A(f . grad g) - f . grad(A g) for the Fourier multiplier A with the given symbol."""
    if is_constant(f) or is_constant(g):
        return np.zeros(g.shape)
    gh = forward_transform(g)
    return inverse_transform(symbol * advect_hat(f, gh) - advect_hat(f, symbol * gh))


def adv_commutator(f: np.ndarray, g: np.ndarray, s: float) -> np.ndarray:
    """[Lambda^s, f . grad] g for a divergence-free vector field f."""
    check_solenoidal(f)
    if s == 0:
        return np.zeros(g.shape)
    return multiplier_adv_commutator(f, g, symbol_power(grid_of(g), s))


def kato_ponce_commutator(f: np.ndarray, g: np.ndarray, s: float) -> np.ndarray:
    """[Lambda^s, f] g = Lambda^s(f g) - f Lambda^s g."""
    if s <= 0:
        raise ValueError("Kato-Ponce commutator needs s > 0")
    if is_constant(f) or not g.any():
        return np.zeros(g.shape)
    sym = symbol_power(grid_of(g), s)
    lsg = inverse_transform(sym * forward_transform(g))
    return inverse_transform(
        sym * dealias(forward_transform(f * g)) - dealias(forward_transform(f * lsg))
    )


def mollifier_commutator(a, b, lam: float, profile=chi) -> np.ndarray:
    """[theta(lam^-1 D), a] b with theta the given radial profile."""
    if is_constant(a):
        return np.zeros(b.shape)
    sym = profile(get_grid(b.shape[-1]).kmag / lam)
    tb = inverse_transform(sym * forward_transform(b))
    return inverse_transform(
        sym * dealias(forward_transform(a * b)) - dealias(forward_transform(a * tb))
    )


def periodic_convolve_hat(hker: np.ndarray, gh: np.ndarray) -> np.ndarray:
    return AREA * forward_transform(hker) * gh


def convolution_commutator(hker: np.ndarray, f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """h * (f g) - f (h * g), with periodic convolution on the torus."""
    if is_constant(f):
        return np.zeros(g.shape)
    hh = AREA * forward_transform(hker)
    hg = inverse_transform(hh * forward_transform(g))
    return inverse_transform(
        hh * dealias(forward_transform(f * g)) - dealias(forward_transform(f * hg))
    )


def riesz_adv_commutator(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """[R, u . grad] v = R(u . grad v) - u . grad(R v), R = Lambda^-1 div."""
    check_solenoidal(u, "u")
    if is_constant(u):
        return np.zeros(v.shape[-2:])
    vh = forward_transform(v)
    return inverse_transform(riesz_div_hat(advect_hat(u, vh)) - advect_hat(u, riesz_div_hat(vh)))


# -- audits ------------------------------------------------------------------------

def adv_commutator_audit(f, g, s: float, sigma: float, p: float = 2.0, r: float = 2.0,
                         seed=None, cut: DyadicCutoffs | None = None) -> AuditRecord:
    """Besov-norm ratio for the advective commutator [Lambda^s, f . grad] g."""
    if s < 0 or sigma <= -1:
        raise ValueError(f"need s >= 0 and sigma > -1 (got s={s}, sigma={sigma})")
    cut = cut or build_cutoffs(grid_of(g))
    lhs = besov_norm(adv_commutator(f, g, s), BesovIndex(sigma, p, r), cut)
    idx = BesovIndex(sigma + s, p, r)
    factors = {
        "gradf_linf": grad_linf(f),
        "g_besov": besov_norm(g, idx, cut),
        "gradg_linf": grad_linf(g),
        "f_besov": besov_norm(f, idx, cut),
    }
    rhs = factors["gradf_linf"] * factors["g_besov"] + factors["gradg_linf"] * factors["f_besov"]
    return AuditRecord(
        "adv_commutator", lhs, factors, rhs, seed,
        {"n": cut.grid.n, "s": s, "sigma": sigma, "p": p, "r": r,
         "regime_s_sigma_gt_m1": s + sigma > -1},
    )


def kp_audit(f, g, s: float, p=2.0, p1=np.inf, p2=2.0, p3=np.inf, p4=2.0, seed=None) -> AuditRecord:
    if not (np.isclose(1 / p, 1 / p1 + 1 / p2) and np.isclose(1 / p, 1 / p3 + 1 / p4)):
        raise ValueError("exponents must satisfy 1/p = 1/p1 + 1/p2 = 1/p3 + 1/p4")
    lhs = lp_norm(kato_ponce_commutator(f, g, s), p)
    factors = {
        "gradf_lp1": grad_lp(f, p1),
        "lam_sm1_g_lp2": lp_norm(inverse_transform(
            symbol_power(grid_of(g), s - 1) * forward_transform(g)), p2),
        "lam_s_f_lp3": lp_norm(inverse_transform(
            symbol_power(grid_of(f), s) * forward_transform(f)), p3),
        "g_lp4": lp_norm(g, p4),
    }
    rhs = factors["gradf_lp1"] * factors["lam_sm1_g_lp2"] + factors["lam_s_f_lp3"] * factors["g_lp4"]
    return AuditRecord("kato_ponce", lhs, factors, rhs, seed,
                       {"n": f.shape[-1], "s": s, "p": p})


def product_audit(f, g, s: float, p=2.0, r=2.0, p1=np.inf, p2=2.0, r1=np.inf, r2=2.0,
                  seed=None, cut: DyadicCutoffs | None = None) -> AuditRecord:
    if s <= 0:
        raise ValueError("product estimate needs s > 0")
    if not (np.isclose(1 / p, 1 / p1 + 1 / p2) and np.isclose(1 / p, 1 / r1 + 1 / r2)):
        raise ValueError("exponents must satisfy 1/p = 1/p1 + 1/p2 = 1/r1 + 1/r2")
    cut = cut or build_cutoffs(grid_of(g))
    lhs = besov_norm(product(f, g), BesovIndex(s, p, r), cut)
    factors = {
        "f_lp1": lp_norm(f, p1),
        "g_besov_p2": besov_norm(g, BesovIndex(s, p2, r), cut),
        "g_lr1": lp_norm(g, r1),
        "f_besov_r2": besov_norm(f, BesovIndex(s, r2, r), cut),
    }
    rhs = factors["f_lp1"] * factors["g_besov_p2"] + factors["g_lr1"] * factors["f_besov_r2"]
    return AuditRecord("product", lhs, factors, rhs, seed,
                       {"n": cut.grid.n, "s": s, "p": p, "r": r})


def mollifier_audit(a, b, lam: float, p=np.inf, q=2.0, r=2.0, profile=chi, seed=None) -> AuditRecord:
    """lam ||[theta(lam^-1 D), a] b||_r against ||grad a||_p ||b||_q."""
    if not np.isclose(1 / r, 1 / p + 1 / q):
        raise ValueError("exponents must satisfy 1/p + 1/q = 1/r")
    lhs = lam * lp_norm(mollifier_commutator(a, b, lam, profile), r)
    factors = {"grada_lp": grad_lp(a, p), "b_lq": lp_norm(b, q)}
    return AuditRecord("mollifier", lhs, factors, factors["grada_lp"] * factors["b_lq"], seed,
                       {"n": a.shape[-1], "lam": lam, "p": r})


def moment_norm(hker: np.ndarray, p1: float) -> float:
    """||x h||_{L^p1} with x the nearest-image coordinate in (-pi, pi]^2."""
    x1, x2 = get_grid(hker.shape[-1]).signed_coordinate
    return lp_norm(np.stack([x1 * hker, x2 * hker]), p1)


def conv_audit(hker, f, g, p=2.0, p1=1.0, p2=2.0, seed=None) -> AuditRecord:
    if not np.isclose(1 + 1 / p, 1 / p1 + 1 / p2):
        raise ValueError("exponents must satisfy 1 + 1/p = 1/p1 + 1/p2")
    lhs = lp_norm(convolution_commutator(hker, f, g), p)
    factors = {"xh_lp1": moment_norm(hker, p1), "gradf_linf": grad_linf(f), "g_lp2": lp_norm(g, p2)}
    rhs = factors["xh_lp1"] * factors["gradf_linf"] * factors["g_lp2"]
    return AuditRecord("convolution", lhs, factors, rhs, seed, {"n": f.shape[-1], "p": p})


def riesz_audit(u, v, seed=None) -> AuditRecord:
    lhs = lp_norm(riesz_adv_commutator(u, v), 2)
    factors = {"u_linf": lp_norm(u, np.inf), "gradv_l2": grad_lp(v, 2)}
    return AuditRecord("riesz", lhs, factors, factors["u_linf"] * factors["gradv_l2"], seed,
                       {"n": u.shape[-1], "p": 2.0})


def block_kernel(n: int, j: int) -> np.ndarray:
    """Physical kernel h with h * g = Delta_j g."""
    cut = build_cutoffs(n)
    return inverse_transform(cut.phi_j(j) / AREA)


# -- Bony decomposition of block commutators ---------------------------------------

@dataclass
class BonySplit:
    """The four term groups of one block commutator, their L^p norms, and the direct block."""

    which: str
    j: int
    terms: dict[str, np.ndarray]
    norms: dict[str, float]
    direct: np.ndarray

    def total(self) -> np.ndarray:
        return sum(self.terms.values())

    def recombination_error(self) -> float:
        ref = lp_norm(self.direct, 2)
        err = lp_norm(self.total() - self.direct, 2)
        return err / ref if ref > 0 else err


def _block_list(fh: np.ndarray, cut: DyadicCutoffs) -> dict[int, np.ndarray]:
    """{l: B_l f} with B_{-2} the mean projection and B_l = Delta_l for l >= -1."""
    out = {}
    mean = np.zeros_like(fh)
    mean[..., 0, 0] = fh[..., 0, 0]
    out[-2] = mean
    for l in cut.blocks:
        out[l] = fh * cut.phi_j(l)
    return out


def bony_split(f, g, s: float, j: int, which: str = "K1", p: float = 2.0,
               cut: DyadicCutoffs | None = None) -> BonySplit:
    """Split [A, f . grad] H for block j into its four Bony term groups.

    K1: A = Delta_j,          H = Lambda^s g   (so the block is [Delta_j, f.grad] Lambda^s g)
    K2: A = Delta_j Lambda^s, H = g            (the block is [Delta_j Lambda^s, f.grad] g)

    With S_{k-1} = sum_{l <= k-2} B_l and ~Delta_k = B_{k-1} + B_k + B_{k+1}:

      T1 = sum_{|k-j|<=4} [A, S_{k-1}f . grad] Delta_k H
      T2 = sum_{|k-j|<=4} A(Delta_k f . grad S_{k-1} H)
      T3 = -sum_{k>=j-2} Delta_k f . grad (A S_{k+2} H)
      T4 = sum_{k>=j-3} A(Delta_k f . grad ~Delta_k H)
    """
    check_solenoidal(f)
    if which not in ("K1", "K2"):
        raise ValueError(f"which must be K1 or K2, got {which!r}")
    cut = cut or build_cutoffs(grid_of(g))
    lam_s = symbol_power(cut.grid, s)
    gh = forward_transform(g)
    if which == "K1":
        A, Hh = cut.phi_j(j), lam_s * gh
    else:
        A, Hh = cut.phi_j(j) * lam_s, gh

    if is_constant(f) or is_constant(g):
        zero = np.zeros(g.shape)
        return BonySplit(which, j, {f"{which}{i}": zero for i in range(1, 5)},
                         {f"{which}{i}": 0.0 for i in range(1, 5)}, zero)

    fb = {l: inverse_transform(b) for l, b in _block_list(forward_transform(f), cut).items()}
    hb = _block_list(Hh, cut)
    lo, hi = -2, cut.j_top

    def blk(d, l):
        return d.get(l, 0.0)

    def partial(d, top):
        # sum_{l <= top} d[l]
        acc = 0.0
        for l in range(lo, min(top, hi) + 1):
            acc = acc + d[l]
        return acc

    def adv(fv, hh):
        if np.isscalar(fv) or np.isscalar(hh):
            return 0.0
        return advect_hat(fv, hh)

    terms = {f"{which}{i}": 0.0 for i in range(1, 5)}
    for k in range(max(lo, j - 4), min(hi, j + 4) + 1):
        sf = partial(fb, k - 2)
        terms[f"{which}1"] = terms[f"{which}1"] + A * adv(sf, hb[k]) - adv(sf, A * hb[k])
        terms[f"{which}2"] = terms[f"{which}2"] + A * adv(fb[k], partial(hb, k - 2))
    for k in range(max(lo, j - 2), hi + 1):
        terms[f"{which}3"] = terms[f"{which}3"] - adv(fb[k], A * partial(hb, k + 1))
    for k in range(max(lo, j - 3), hi + 1):
        tilde = blk(hb, k - 1) + blk(hb, k) + blk(hb, k + 1)
        terms[f"{which}4"] = terms[f"{which}4"] + A * adv(fb[k], tilde)

    shape = g.shape
    fields = {
        name: (inverse_transform(t) if not np.isscalar(t) else np.zeros(shape))
        for name, t in terms.items()
    }
    direct = inverse_transform(A * advect_hat(f, Hh) - advect_hat(f, A * Hh))
    return BonySplit(which, j, fields, {k: lp_norm(v, p) for k, v in fields.items()}, direct)


def bony_recombination_errors(f, g, s: float, cut: DyadicCutoffs | None = None,
                              floor: float = 1e-9) -> dict[tuple[str, int], float]:
    """Recombination error per (K1|K2, j).

    Blocks whose direct commutator is below floor times the largest block
    are zero up to rounding (outside the band of f.grad g); their error is
    measured against that largest block instead of their own norm.
    """
    cut = cut or build_cutoffs(grid_of(g))
    splits = {(w, j): bony_split(f, g, s, j, w, cut=cut) for w in ("K1", "K2") for j in cut.blocks}
    refs = {key: lp_norm(b.direct, 2) for key, b in splits.items()}
    peak = max(refs.values())
    out = {}
    for key, b in splits.items():
        err = lp_norm(b.total() - b.direct, 2)
        den = refs[key] if refs[key] > floor * peak else peak
        out[key] = err / den if den > 0 else err
    return out


def block_commutators(f, g, s: float, j: int, cut: DyadicCutoffs | None = None):
    """(K1 block, K2 block): [Delta_j, f.grad] Lambda^s g and [Delta_j Lambda^s, f.grad] g."""
    cut = cut or build_cutoffs(grid_of(g))
    lam_s = symbol_power(cut.grid, s)
    gh = forward_transform(g)
    A1, H1 = cut.phi_j(j), lam_s * gh
    A2 = cut.phi_j(j) * lam_s
    k1 = inverse_transform(A1 * advect_hat(f, H1) - advect_hat(f, A1 * H1))
    k2 = inverse_transform(A2 * advect_hat(f, gh) - advect_hat(f, A2 * gh))
    return k1, k2


# -- corpus --------------------------------------------------------------------------

@dataclass(frozen=True)
class CorpusSpec:
    """Seeded audit corpus.  The band is fixed in absolute wavenumbers, so the
    same seed gives the same trigonometric polynomials on every grid that
    resolves it (products stay alias-free when k_hi <= k_max / 2)."""

    seeds: tuple[int, ...] = tuple(range(100))
    slope: float = -1.0
    k_lo: int = 1
    k_hi: int = 16


def corpus_pair(n: int, seed: int, corpus: CorpusSpec = CorpusSpec()):
    """(solenoidal vector field f, scalar field g) for one corpus seed."""
    f = random_solenoidal_field(n, (seed, 11), corpus.slope, corpus.k_lo, corpus.k_hi)
    g = random_band_field(n, (seed, 12), corpus.slope, corpus.k_lo, corpus.k_hi)
    return f, g


def corpus_scalars(n: int, seed: int, corpus: CorpusSpec = CorpusSpec()):
    a = random_band_field(n, (seed, 21), corpus.slope, corpus.k_lo, corpus.k_hi)
    b = random_band_field(n, (seed, 22), corpus.slope, corpus.k_lo, corpus.k_hi)
    return a, b
