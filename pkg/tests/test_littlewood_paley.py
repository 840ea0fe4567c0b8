import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tcm.littlewood_paley import (
    BesovIndex,
    annulus_field,
    bernstein_audit,
    besov_norm,
    block_norms,
    build_cutoffs,
    chi,
    delta_j,
    delta_j_hat,
    phi,
    s_j,
    sobolev_norm,
)
from tcm.spectral import forward_transform, get_grid, lp_norm, random_band_field

seeds = st.integers(0, 2**31 - 1)


def test_cutoff_range():
    cut = build_cutoffs(64)
    assert cut.j_max == 4
    assert 0.75 * 2**4 <= 21 < 0.75 * 2**5
    assert cut.j_min == -1
    with pytest.raises(ValueError):
        build_cutoffs(8)


def test_profiles():
    r = np.linspace(0, 4, 4001)
    c = chi(r)
    assert np.all(c[r <= 0.75] == 1.0) and np.all(c[r >= 4 / 3] == 0.0)
    assert np.all(np.diff(c) <= 0)
    assert phi(0.5) == 0.0
    p = phi(r)
    assert np.all(p[(r < 0.75) | (r > 8 / 3)] == 0.0) and np.all(p >= 0)


@pytest.mark.parametrize("n", [64, 128])
def test_partition_of_unity(n):
    cut = build_cutoffs(n)
    kmag = cut.grid.kmag
    band = (kmag >= 1) & (kmag <= cut.grid.k_max)
    inhom = cut.chi_j(0) + sum(cut.phi_j(j) for j in range(0, cut.j_top + 1))
    hom = sum(cut.phi_j(j) for j in cut.blocks)
    assert np.abs(inhom[band] - 1).max() <= 1e-12
    assert np.abs(hom[band] - 1).max() <= 1e-12
    at5 = chi(5.0) + sum(phi(5.0 / 2**j) for j in range(0, cut.j_max + 1))
    assert at5 == pytest.approx(1.0, abs=1e-12)


def test_single_mode_blocks():
    x1, _ = get_grid(64).x
    f = np.cos(2 * x1)
    live = {j for j in range(-2, 7) if lp_norm(delta_j(f, j), 2) > 1e-14}
    assert live == {0, 1}


@given(seeds)
@settings(max_examples=10, deadline=None)
def test_reconstruction_and_orthogonality(seed):
    cut = build_cutoffs(64)
    f = random_band_field(64, seed, -1.0)
    rec = s_j(f, 0, cut) + sum(delta_j(f, j, cut) for j in range(0, cut.j_top + 1))
    assert lp_norm(f - rec, 2) <= 1e-10 * lp_norm(f, 2)
    fh = forward_transform(f)
    for j in cut.blocks:
        for k in cut.blocks:
            if abs(j - k) >= 2:
                assert np.abs(delta_j_hat(delta_j_hat(fh, k, cut), j, cut)).max() == 0.0
                assert lp_norm(delta_j(delta_j(f, k, cut), j, cut), 2) <= 1e-10 * lp_norm(f, 2)


def test_besov_single_mode_oracle():
    x1, _ = get_grid(64).x
    f = np.cos(4 * x1)
    # only the j = 1 and j = 2 annuli meet |k| = 4
    oracle = np.sqrt(sum((2.0**j * phi(4 / 2**j) * np.pi * np.sqrt(2)) ** 2 for j in (1, 2)))
    assert besov_norm(f, BesovIndex(1, 2, 2)) == pytest.approx(oracle, rel=1e-12)


def test_besov_basic():
    f = random_band_field(64, 1)
    idx = BesovIndex(0.7, 2, 2)
    assert besov_norm(np.zeros((64, 64)), idx) == 0.0
    assert besov_norm(3.5 * f, idx) == pytest.approx(3.5 * besov_norm(f, idx), rel=1e-12)
    sup = besov_norm(f, BesovIndex(0.7, 2, np.inf))
    assert sup == pytest.approx(max(2**(0.7 * j) * v for j, v in block_norms(f, 2).items()))
    inh = besov_norm(f + 2.0, BesovIndex(0.7, 2, 2, homogeneous=False))
    assert inh == pytest.approx(lp_norm(f + 2.0, 2) + besov_norm(f, idx), rel=1e-12)
    with pytest.raises(ValueError):
        BesovIndex(1, 0.5, 2)


def test_sobolev_examples():
    x1, _ = get_grid(64).x
    f = np.cos(2 * x1)
    assert sobolev_norm(f, 1) == pytest.approx(2 * np.sqrt(2 * np.pi**2))
    g = random_band_field(64, 2)
    assert sobolev_norm(g, 0) == pytest.approx(lp_norm(g, 2))
    assert sobolev_norm(g + 1, 1.5, homogeneous=False) == pytest.approx(lp_norm(g + 1, 2) + sobolev_norm(g, 1.5))


def _equivalence_bracket(n, s=1.0):
    r = [sobolev_norm(f, s) / besov_norm(f, BesovIndex(s, 2, 2))
         for f in (random_band_field(n, seed, -1.0, 1, 16) for seed in range(50))]
    return min(r), max(r)


def test_sobolev_besov_equivalence_is_refinement_stable():
    lo64, hi64 = _equivalence_bracket(64)
    lo128, hi128 = _equivalence_bracket(128)
    assert 0.5 < lo64 <= hi64 < 2.0
    assert abs(lo128 / lo64 - 1) < 0.1 and abs(hi128 / hi64 - 1) < 0.1


def test_bernstein_single_mode():
    x1, _ = get_grid(64).x
    j = 2
    f = delta_j(np.cos(4 * x1), j)
    r = bernstein_audit(f, j, 0.5, 2, 2)
    assert r.ratio == pytest.approx(4 / 2**j)
    assert 0.75 <= r.ratio <= 8 / 3


@pytest.mark.parametrize("gamma", [0.5, 1.0, 1.5])
def test_bernstein_l2_bounds_literal(gamma):
    lo, hi = 0.75 ** (2 * gamma), (8 / 3) ** (2 * gamma)
    for seed in range(100):
        j = seed % 5
        r = bernstein_audit(annulus_field(64, seed, j), j, gamma, 2, 2)
        assert lo <= r.ratio <= hi
        assert lo <= 1 / r.ratio_lower <= hi


def test_bernstein_linf_refinement():
    def worst(n):
        return max(bernstein_audit(annulus_field(n, seed, 3), 3, 0.0, 2, np.inf).ratio for seed in range(20))
    a, b = worst(64), worst(128)
    assert np.isfinite(a) and abs(b / a - 1) < 0.2


def test_bernstein_rejects_unlocalized():
    f = random_band_field(64, 0)
    with pytest.raises(ValueError):
        bernstein_audit(f, 1, 1.0, 2, 2)
    ball = s_j(random_band_field(64, 1), 2)
    r = bernstein_audit(ball, 1, 1.0, 2, 2)
    assert r.ratio_lower is None


def test_out_of_range_block_is_zero():
    f = random_band_field(64, 3)
    assert np.abs(delta_j(f, 20)).max() == 0.0
    assert np.abs(delta_j(f, -5)).max() == 0.0
