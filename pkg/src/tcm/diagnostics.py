"""
Budget identities and monitored quantities along trajectories.

Pairings (f|g)_{H^s-dot} are (Lambda^s f | Lambda^s g).  The budgets below
are exact for the semi-discrete (dealiased) dynamics: transport terms such
as (u.grad Lambda^s u | Lambda^s u) vanish to rounding because triple
products of fields banded at k_max = n//3 are integrated exactly by the
grid quadrature.  What is left in each residual is the time-sampling error
of the finite-difference rate.

Homogeneous H^s-dot budget (I-terms):

    1/2 d/dt ||Lambda^s (u,v,theta)||^2 + alpha ||Lambda^s (u,v)||^2 + eta ||Lambda^s grad v||^2
        = I1 + I2 + I3 + I4 + I5
    I1 = -(u.grad u|u),  I2 = -(div(v(x)v)|u),  I3 = -(u.grad v|v),
    I4 = -(v.grad u|v),  I5 = -(u.grad theta|theta)

with commutator forms I1 = -([Lambda^s, u.grad]u | Lambda^s u) and likewise
for I3, I5, and

    I2 + I4 = -(v div v|u) - ([Lambda^s, v.grad]v | Lambda^s u)
              - ([Lambda^s, v.grad]u | Lambda^s v) + (div v | Lambda^s u . Lambda^s v).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .commutators import advect, multiplier_adv_commutator, riesz_adv_commutator
from .solver import Params, State
from .spectral import (
    dealias,
    dealiased,
    divergence,
    forward_transform,
    get_grid,
    grad_lp,
    gradient,
    inner,
    inverse_transform,
    lam,
    lp_norm,
    riesz_div,
    symbol_power,
)


@dataclass
class BudgetRecord:
    t: float
    lhs_rate: float
    dissipation: float
    terms: dict = field(default_factory=dict)
    residual: float = 0.0
    checks: dict = field(default_factory=dict)

    def row(self) -> dict:
        out = {"t": self.t, "lhs_rate": self.lhs_rate, "dissipation": self.dissipation}
        out.update(self.terms)
        out["residual"] = self.residual
        return out


@dataclass
class LyapunovRecord:
    t: float
    hs_part: float
    omega_part: float
    M: float
    m: float

    @property
    def value(self) -> float:
        return self.M * self.hs_part + self.omega_part


def _rate(values: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Centered differences inside, second-order one-sided stencils at the ends."""
    if len(times) < 3:
        raise ValueError("budget audits need at least 3 samples")
    return np.gradient(values, times, edge_order=2)


def _states(traj) -> list[State]:
    return [traj[i] for i in range(len(traj))]


def _times(states: Sequence[State]) -> np.ndarray:
    return np.array([s.t for s in states])


def _rel(a: float, b: float, floor: float = 0.0) -> float:
    scale = max(abs(a), abs(b), floor)
    return abs(a - b) / scale if scale > 0 else 0.0


# -- Omega ---------------------------------------------------------------------------

def omega(x: State, eta: float) -> np.ndarray:
    """Omega = R v + eta Lambda theta."""
    return riesz_div(x.v) + eta * lam(x.theta, 1.0)


def theta_from_omega(om: np.ndarray, v: np.ndarray, eta: float) -> np.ndarray:
    """Mean-zero theta with eta Lambda theta = Omega - R v."""
    return lam(om - riesz_div(v), -1.0) / eta


# -- L^2 energy -------------------------------------------------------------------

def l2_energy(x: State) -> float:
    return 0.5 * (lp_norm(x.u, 2) ** 2 + lp_norm(x.v, 2) ** 2 + lp_norm(x.theta, 2) ** 2)


def l2_dissipation(x: State, p: Params) -> tuple[float, float]:
    damp = p.alpha * (lp_norm(x.u, 2) ** 2 + lp_norm(x.v, 2) ** 2)
    visc = p.eta * grad_lp(x.v, 2) ** 2
    return damp, visc


def l2_energy_audit(traj, p: Params) -> list[BudgetRecord]:
    states = _states(traj)
    t = _times(states)
    rate = _rate(np.array([l2_energy(x) for x in states]), t)
    out = []
    for ti, r, x in zip(t, rate, states):
        damp, visc = l2_dissipation(x, p)
        out.append(BudgetRecord(float(ti), float(r), damp + visc,
                                {"diss_damp": damp, "diss_visc": visc}, float(r + damp + visc)))
    return out


# -- homogeneous H^s budget --------------------------------------------------------

def hs_pair(f: np.ndarray, g: np.ndarray, s: float) -> float:
    """(f|g)_{H^s-dot}, componentwise for vector fields."""
    return inner(lam(f, s), lam(g, s))


def div_tensor(v: np.ndarray) -> np.ndarray:
    """div(v (x) v)_i = d_j (v_j v_i), from the dealiased product tensor."""
    vvh = forward_transform(v[:, None] * v[None, :])  # [j, i]
    k1, k2 = get_grid(v.shape[-1]).kd
    return inverse_transform(dealias(1j * k1 * vvh[0] + 1j * k2 * vvh[1]))


def hs_terms(x: State, s: float) -> dict:
    """I1..I5 in direct form, the commutator forms, and the v-transport identity."""
    u, v, th = x.u, x.v, x.theta
    lu, lv, lth = lam(u, s), lam(v, s), lam(th, s)
    sym = symbol_power(get_grid(x.n), s)
    div_v = divergence(v)

    direct = {
        "I1": -hs_pair(advect(u, u), u, s),
        "I2": -hs_pair(div_tensor(v), u, s),
        "I3": -hs_pair(advect(u, v), v, s),
        "I4": -hs_pair(advect(v, u), v, s),
        "I5": -hs_pair(advect(u, th), th, s),
    }
    comm = {
        "I1": -inner(multiplier_adv_commutator(u, u, sym), lu),
        "I3": -inner(multiplier_adv_commutator(u, v, sym), lv),
        "I5": -inner(multiplier_adv_commutator(u, th, sym), lth),
        "I2+I4": (
            -hs_pair(dealiased(v * div_v), u, s)
            - inner(multiplier_adv_commutator(v, v, sym), lu)
            - inner(multiplier_adv_commutator(v, u, sym), lv)
            + inner(div_v, np.sum(lu * lv, axis=0))
        ),
    }
    transport_lhs = inner(advect(v, lu), lv) + inner(advect(v, lv), lu)
    transport_rhs = -inner(div_v, np.sum(lu * lv, axis=0))
    # Cauchy-Schwarz size of each pairing; gaps are measured against it since
    # some of the pairings vanish identically (e.g. I1 at s = 1 in 2D)
    nu, nv, nth = lp_norm(lu, 2), lp_norm(lv, 2), lp_norm(lth, 2)
    cs = lambda f, norm: lp_norm(lam(f, s), 2) * norm
    scale = {
        "I1": cs(advect(u, u), nu),
        "I3": cs(advect(u, v), nv),
        "I5": cs(advect(u, th), nth),
        "I2+I4": cs(div_tensor(v), nu) + cs(advect(v, u), nv),
        "transport": lp_norm(advect(v, lu), 2) * nv + lp_norm(advect(v, lv), 2) * nu,
    }
    return {"direct": direct, "commutator": comm, "transport": (transport_lhs, transport_rhs),
            "scale": scale}


def _identity_gaps(t: dict) -> dict:
    d, c, sc = t["direct"], t["commutator"], t["scale"]
    pairs = {
        "I1": (d["I1"], c["I1"]),
        "I3": (d["I3"], c["I3"]),
        "I5": (d["I5"], c["I5"]),
        "I2+I4": (d["I2"] + d["I4"], c["I2+I4"]),
        "transport": t["transport"],
    }
    return {k: _rel(a, b, sc[k]) for k, (a, b) in pairs.items()}


def hs_identity_errors(x: State, s: float) -> dict:
    """Relative gaps between the equal forms of each exact rewriting."""
    return _identity_gaps(hs_terms(x, s))


def hs_energy(x: State, s: float) -> float:
    return 0.5 * (lp_norm(lam(x.u, s), 2) ** 2 + lp_norm(lam(x.v, s), 2) ** 2
                  + lp_norm(lam(x.theta, s), 2) ** 2)


def hs_energy_audit(traj, p: Params, s: float | None = None) -> list[BudgetRecord]:
    s = p.s if s is None else s
    states = _states(traj)
    t = _times(states)
    rate = _rate(np.array([hs_energy(x, s) for x in states]), t)
    out = []
    for ti, r, x in zip(t, rate, states):
        damp = p.alpha * (lp_norm(lam(x.u, s), 2) ** 2 + lp_norm(lam(x.v, s), 2) ** 2)
        visc = p.eta * lp_norm(lam(x.v, s + 1), 2) ** 2
        terms = hs_terms(x, s)
        d = terms["direct"]
        out.append(BudgetRecord(float(ti), float(r), damp + visc, dict(d),
                                float(r + damp + visc - sum(d.values())), _identity_gaps(terms)))
    return out


# -- Omega budgets -------------------------------------------------------------------

def _omega_forcing(x: State, eta: float) -> dict:
    """The four forcing fields of the Omega equation except the (1/eta - alpha) R v term."""
    u, v, th = x.u, x.v, x.theta
    lam1 = symbol_power(get_grid(x.n), 1.0)
    return {
        "riesz_comm": riesz_adv_commutator(u, v),
        "riesz_vgradu": riesz_div(advect(v, u)),
        "lam_comm": eta * multiplier_adv_commutator(u, th, lam1),
    }


def omega_terms(x: State, p: Params, s_minus_1: float | None = None) -> dict:
    """J1..J4 (s_minus_1 None) or L1..L5 (pairings in H^{s-1}-dot)."""
    om = omega(x, p.eta)
    rv = riesz_div(x.v)
    f = _omega_forcing(x, p.eta)
    c = 1.0 / p.eta - p.alpha
    if s_minus_1 is None:
        return {
            "J1": c * inner(rv, om),
            "J2": -inner(f["riesz_comm"], om),
            "J3": -inner(f["riesz_vgradu"], om),
            "J4": -inner(f["lam_comm"], om),
        }
    a = s_minus_1
    sym = symbol_power(get_grid(x.n), a)
    return {
        "L1": c * hs_pair(rv, om, a),
        "L2": -inner(multiplier_adv_commutator(x.u, om, sym), lam(om, a)),
        "L3": -hs_pair(f["riesz_comm"], om, a),
        "L4": -hs_pair(f["riesz_vgradu"], om, a),
        "L5": -hs_pair(f["lam_comm"], om, a),
    }


def _omega_audit(traj, p: Params, a: float | None) -> list[BudgetRecord]:
    states = _states(traj)
    t = _times(states)
    oms = [omega(x, p.eta) for x in states]
    sq = np.array([lp_norm(om if a is None else lam(om, a), 2) ** 2 for om in oms])
    rate = _rate(0.5 * sq, t)
    out = []
    for ti, r, x, q in zip(t, rate, states, sq):
        terms = omega_terms(x, p, a)
        diss = q / p.eta
        out.append(BudgetRecord(float(ti), float(r), float(diss), terms,
                                float(r + diss - sum(terms.values()))))
    return out


def omega_l2_audit(traj, p: Params) -> list[BudgetRecord]:
    return _omega_audit(traj, p, None)


def omega_hs_audit(traj, p: Params, s: float | None = None) -> list[BudgetRecord]:
    s = p.s if s is None else s
    return _omega_audit(traj, p, s - 1.0)


def omega_equation_residual(traj, p: Params) -> np.ndarray:
    """L^2 norm of the pointwise residual of the Omega equation at each sample."""
    states = _states(traj)
    t = _times(states)
    oms = np.stack([omega(x, p.eta) for x in states])
    dom = np.gradient(oms, t, axis=0, edge_order=2)
    c = 1.0 / p.eta - p.alpha
    out = []
    for x, om, d in zip(states, oms, dom):
        f = _omega_forcing(x, p.eta)
        res = (d + advect(x.u, om) + om / p.eta - c * riesz_div(x.v)
               + f["riesz_comm"] + f["riesz_vgradu"] + f["lam_comm"])
        out.append(lp_norm(res, 2))
    return np.array(out)


# -- Lyapunov functional ----------------------------------------------------------

def lyapunov_constants(alpha: float, eta: float, c_cal: float = 1.0, m_floor: float = 1.0):
    """(M, m) with M = max(2 c eta |1/eta - alpha|^2 / alpha, floor), m = min(M alpha/2, eta M/2, 1/(2 eta))."""
    if alpha <= 0 or eta <= 0 or c_cal <= 0:
        raise ValueError("alpha, eta and c_cal must be positive")
    M = max(2.0 * c_cal * eta * (1.0 / eta - alpha) ** 2 / alpha, m_floor)
    m = min(M * alpha / 2.0, eta * M / 2.0, 1.0 / (2.0 * eta))
    return M, m


def hs_norm(f: np.ndarray, s: float) -> float:
    """||f||_{L^2} + ||Lambda^s f||_{L^2}; stacked fields use the Euclidean norm over components."""
    return lp_norm(f, 2) + lp_norm(lam(f, s), 2)


def _stack(x: State) -> np.ndarray:
    return np.concatenate([x.u, x.v, x.theta[None]])


def hs_sum(x: State, s: float) -> float:
    """||u||_{H^s} + ||v||_{H^s} + ||theta||_{H^s}."""
    return hs_norm(x.u, s) + hs_norm(x.v, s) + hs_norm(x.theta, s)


def grad_v_hs_sq(x: State, s: float) -> float:
    """||grad v||^2_{H^s} with the Jacobian stacked as four scalar components."""
    g = gradient(x.v).reshape(4, x.n, x.n)
    return hs_norm(g, s) ** 2


def lyapunov_record(x: State, p: Params, M: float, m: float = 0.0, s: float | None = None) -> LyapunovRecord:
    s = p.s if s is None else s
    om = omega(x, p.eta)
    return LyapunovRecord(x.t, hs_norm(_stack(x), s) ** 2, hs_norm(om, s - 1.0) ** 2, M, m)


def lyapunov_series(traj, p: Params, s: float | None = None, M: float | None = None,
                    c_cal: float = 1.0) -> list[LyapunovRecord]:
    M0, m = lyapunov_constants(p.alpha, p.eta, c_cal)
    M = M0 if M is None else M
    return [lyapunov_record(x, p, M, m, s) for x in _states(traj)]
