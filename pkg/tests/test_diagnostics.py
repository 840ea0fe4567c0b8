import numpy as np
import pytest
from conftest import random_state
from hypothesis import given, settings, strategies as st

from tcm.diagnostics import (
    grad_v_hs_sq,
    hs_energy_audit,
    hs_identity_errors,
    hs_norm,
    hs_sum,
    hs_terms,
    l2_energy,
    l2_energy_audit,
    lyapunov_constants,
    lyapunov_record,
    lyapunov_series,
    omega,
    omega_equation_residual,
    omega_hs_audit,
    omega_l2_audit,
    omega_terms,
    theta_from_omega,
)
from tcm.solver import Params, State, record
from tcm.spectral import curl_field, get_grid, gradient, lam, lp_norm

N = 32


def test_omega_single_modes():
    x1, x2 = get_grid(N).x
    # v = grad cos(3 x1): R v = Lambda^{-1} div v = -3 cos(3 x1)
    v = gradient(np.cos(3 * x1))
    x = State(np.zeros((2, N, N)), v, np.cos(3 * x1))
    assert np.allclose(omega(x, 2.0), -3 * np.cos(3 * x1) + 2 * 3 * np.cos(3 * x1), atol=1e-12)
    # solenoidal v does not enter
    xs = State(np.zeros((2, N, N)), curl_field(np.sin(x1 + x2)), np.zeros((N, N)))
    assert np.abs(omega(xs, 1.0)).max() < 1e-13


@given(st.integers(0, 10**6), st.floats(0.1, 5.0))
@settings(max_examples=10, deadline=None)
def test_theta_recovered_from_omega(seed, eta):
    x = random_state(N, seed)
    th = x.theta - x.theta.mean()
    back = theta_from_omega(omega(x, eta), x.v, eta)
    assert np.allclose(back, th, atol=1e-11 * max(1.0, np.abs(th).max()))


def test_zero_state_budgets():
    p = Params(n=N, dt=1e-2, t_end=0.05)
    traj = record(State.zeros(N), p, 1e-2)
    for audit in (l2_energy_audit, hs_energy_audit, omega_l2_audit, omega_hs_audit):
        for r in audit(traj, p):
            assert r.residual == 0.0 and r.lhs_rate == 0.0
    assert not omega_equation_residual(traj, p).any()
    terms = hs_terms(State.zeros(N), 2.5)
    assert all(v == 0.0 for v in terms["direct"].values())


def test_transport_terms_vanish_without_u():
    x = random_state(N, 1)
    x = State(np.zeros_like(x.u), x.v, x.theta)
    d = hs_terms(x, 2.5)
    for key in ("I1", "I3", "I5"):
        assert d["direct"][key] == 0.0 and d["commutator"][key] == 0.0
    L = omega_terms(x, Params(n=N), 1.5)
    assert L["L2"] == 0.0 and L["L3"] == 0.0 and L["L5"] == 0.0


@given(st.integers(0, 10**6), st.sampled_from([1.0, 1.5, 2.5]))
@settings(max_examples=10, deadline=None)
def test_rewriting_identities(seed, s):
    gaps = hs_identity_errors(random_state(N, seed, 1.0, k_hi=8), s)
    assert max(gaps.values()) <= 1e-8


def test_resonant_damping_term_vanishes():
    x = random_state(N, 2)
    p = Params(n=N, alpha=0.5, eta=2.0)
    assert omega_terms(x, p)["J1"] == 0.0
    assert omega_terms(x, p, 1.5)["L1"] == 0.0
    q = Params(n=N, alpha=1.0, eta=2.0)
    assert omega_terms(x, q)["J1"] < 0 or omega_terms(x, q)["J1"] > 0


def _residuals(dt, audit):
    x = random_state(N, 3, 0.3, k_hi=8)
    p = Params(n=N, alpha=0.5, eta=0.2, dt=dt, t_end=0.1)
    traj = record(x, p, dt)
    return max(abs(r.residual) for r in audit(traj, p)[2:-2])


@pytest.mark.parametrize("audit", [l2_energy_audit, hs_energy_audit, omega_l2_audit, omega_hs_audit])
def test_budget_residuals_converge(audit):
    r = [_residuals(dt, audit) for dt in (4e-3, 2e-3, 1e-3)]
    assert r[0] / r[1] > 3.0 and r[1] / r[2] > 3.0


def test_omega_equation_residual_converges():
    x = random_state(N, 4, 0.3, k_hi=8)
    out = []
    for dt in (4e-3, 2e-3):
        p = Params(n=N, alpha=0.5, eta=0.2, dt=dt, t_end=0.1)
        out.append(omega_equation_residual(record(x, p, dt), p)[2:-2].max())
    assert out[0] / out[1] > 3.0


def test_lyapunov_constants():
    assert lyapunov_constants(1.0, 1.0) == (1.0, 0.5)
    assert lyapunov_constants(1.0, 2.0) == (1.0, 0.25)
    M, m = lyapunov_constants(0.1, 1.0)
    assert M == pytest.approx(2 * 0.81 / 0.1)
    assert m == pytest.approx(min(M * 0.05, M / 2, 0.5))
    Ms = [lyapunov_constants(0.1, 1.0, c)[0] for c in (0.5, 1.0, 2.0, 4.0)]
    assert np.all(np.diff(Ms) >= 0)
    for bad in ((0.0, 1.0), (1.0, 0.0), (-1.0, 1.0)):
        with pytest.raises(ValueError):
            lyapunov_constants(*bad)
    with pytest.raises(ValueError):
        lyapunov_constants(1.0, 1.0, 0.0)


def test_norms_and_lyapunov_value():
    x1, _ = get_grid(N).x
    f = np.cos(2 * x1)
    assert hs_norm(f, 1.0) == pytest.approx(np.sqrt(0.5 * 4 * np.pi**2) * 3)
    x = random_state(N, 5)
    assert hs_sum(x, 2.5) == pytest.approx(hs_norm(x.u, 2.5) + hs_norm(x.v, 2.5) + hs_norm(x.theta, 2.5))
    v = np.stack([f, np.zeros_like(f)])
    xv = State(np.zeros((2, N, N)), v, np.zeros((N, N)))
    g = lp_norm(gradient(f), 2)
    assert grad_v_hs_sq(xv, 1.0) == pytest.approx((g + 2 * g) ** 2)
    p = Params(n=N)
    rec = lyapunov_record(x, p, 3.0)
    om = omega(x, p.eta)
    assert rec.omega_part == pytest.approx((lp_norm(om, 2) + lp_norm(lam(om, 1.5), 2)) ** 2)
    assert rec.value == pytest.approx(3.0 * rec.hs_part + rec.omega_part)


def test_lyapunov_decreases_on_small_data():
    x = random_state(N, 6, 1e-3, k_hi=8)
    p = Params(n=N, dt=1e-2, t_end=2.0)
    vals = [r.value for r in lyapunov_series(record(x, p, 0.1), p)]
    assert vals[-1] < vals[0]


def test_l2_energy_nonincreasing():
    x = random_state(N, 7, 0.5, k_hi=8)
    p = Params(n=N, dt=5e-3, t_end=0.5)
    e = [l2_energy(record(x, p, 0.05)[i]) for i in range(11)]
    assert np.all(np.diff(e) < 0)
