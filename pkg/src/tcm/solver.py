"""
Pseudo-spectral integration of the tropical climate system without thermal
diffusion,

    u_t + u.grad u + alpha u + grad p = -div(v (x) v),     div u = 0
    v_t + u.grad v + v.grad u + alpha v - eta Lap v = grad theta
    theta_t + u.grad theta = div v

on the 2pi-periodic torus, and the exact per-mode solution of its
linearization (advection and quadratic terms dropped).

The state is advanced in packed spectral form X = (u1, u2, v1, v2, theta),
shape (5, n, n//2+1).  Damping and viscosity form the diagonal operator D;
the integrating factor E = exp(D h) handles them exactly, while the
coupling grad theta / div v and the quadratic terms are explicit.

Schemes (h = dt, N = explicit tendency):
  imex_euler    X+ = E (X + h N(X))                                  order 1
  imex_bdf2     X+ = (4 E X - E^2 X- + 2h (2 E N - E^2 N-)) / 3      order 2
                (integrating-factor SBDF2, started with one IF-Heun step)
  rk4_explicit  classical RK4 on D X + N(X)                           order 4
                stable only while dt * eta * |k|_max^2 <~ 2.78
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .spectral import (
    GridSpec,
    dealias,
    forward_transform,
    get_grid,
    inverse_transform,
    leray_project_hat,
)

SCHEMES = ("imex_euler", "imex_bdf2", "rk4_explicit")
RK4_STABILITY = 2.78


class InstabilityError(RuntimeError):
    def __init__(self, t: float):
        super().__init__(f"non-finite state at t = {t:.6g}")
        self.t = t


@dataclass(frozen=True)
class Params:
    alpha: float = 1.0
    eta: float = 1.0
    s: float = 2.5
    n: int = 64
    dt: float = 1e-3
    t_end: float = 1.0
    scheme: str = "imex_bdf2"
    nonlinear: bool = True

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.eta <= 0:
            raise ValueError("eta must be > 0")
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        if self.t_end < 0:
            raise ValueError("t_end must be >= 0")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        GridSpec(self.n)

    @property
    def grid(self) -> GridSpec:
        return get_grid(self.n)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def stiffness(self) -> float:
        """dt * eta * |k|^2 at the largest retained wavenumber."""
        k = self.grid.k_max
        return self.dt * self.eta * 2 * k * k


@dataclass
class State:
    u: np.ndarray
    v: np.ndarray
    theta: np.ndarray
    t: float = 0.0

    @classmethod
    def zeros(cls, n: int, t: float = 0.0) -> "State":
        return cls(np.zeros((2, n, n)), np.zeros((2, n, n)), np.zeros((n, n)), t)

    @property
    def n(self) -> int:
        return self.theta.shape[-1]

    def pack(self) -> np.ndarray:
        return forward_transform(np.concatenate([self.u, self.v, self.theta[None]]))

    @classmethod
    def unpack(cls, xh: np.ndarray, t: float) -> "State":
        x = inverse_transform(xh)
        return cls(x[0:2], x[2:4], x[4], t)

    def copy(self) -> "State":
        return State(self.u.copy(), self.v.copy(), self.theta.copy(), self.t)


@dataclass
class Tendency:
    du: np.ndarray
    dv: np.ndarray
    dtheta: np.ndarray


# -- right-hand side ---------------------------------------------------------------

def _linear_diag(p: Params) -> np.ndarray:
    ksq = p.grid.kmag**2
    d = np.empty((5, *ksq.shape))
    d[0:2] = -p.alpha
    d[2:4] = -(p.alpha + p.eta * ksq)
    d[4] = 0.0
    return d


def explicit_hat(xh: np.ndarray, p: Params) -> np.ndarray:
    """Coupling terms plus (when enabled) the projected quadratic terms."""
    k1, k2 = p.grid.kd
    out = np.zeros_like(xh)
    out[2] = 1j * k1 * xh[4]
    out[3] = 1j * k2 * xh[4]
    out[4] = 1j * (k1 * xh[2] + k2 * xh[3])
    if not p.nonlinear:
        return out

    ik = np.stack([1j * k1, 1j * k2])
    phys = inverse_transform(np.concatenate([
        xh,
        (ik[:, None] * xh[None, 0:4]).reshape(8, *xh.shape[1:]),
        ik * xh[4],
    ]))
    u, v, th = phys[0:2], phys[2:4], phys[4]
    # gradients: g[i, c] = d_i of component c, for c in (u1, u2, v1, v2)
    g = phys[5:13].reshape(2, 4, *th.shape)
    gu, gv = g[:, 0:2], g[:, 2:4]
    gth = phys[13:15]

    u_grad_u = u[0] * gu[0] + u[1] * gu[1]
    v_grad_v = v[0] * gv[0] + v[1] * gv[1]
    div_v = gv[0, 0] + gv[1, 1]
    u_grad_v = u[0] * gv[0] + u[1] * gv[1]
    v_grad_u = v[0] * gu[0] + v[1] * gu[1]
    u_grad_th = u[0] * gth[0] + u[1] * gth[1]

    quad = forward_transform(np.concatenate([
        -u_grad_u - v_grad_v - v * div_v,  # div(v (x) v) = v div v + v.grad v
        -u_grad_v - v_grad_u,
        -u_grad_th[None],
    ]))
    quad = dealias(quad)
    quad[0:2] = leray_project_hat(quad[0:2])
    return out + quad


def full_rhs_hat(xh: np.ndarray, p: Params, diag: np.ndarray | None = None) -> np.ndarray:
    diag = _linear_diag(p) if diag is None else diag
    return diag * xh + explicit_hat(xh, p)


def nonlinear_rhs(x: State, p: Params) -> Tendency:
    """Full time derivative of the state (projected u equation)."""
    rh = full_rhs_hat(dealias(x.pack()), p)
    r = inverse_transform(rh)
    return Tendency(r[0:2], r[2:4], r[4])


def pressure_recover(x: State) -> np.ndarray:
    """Zero-mean p with Lap p = -div(u.grad u + div(v (x) v))."""
    grid = get_grid(x.n)
    k1, k2 = grid.kd
    xh = dealias(x.pack())
    # unprojected quadratic forcing of the u equation, -w
    ik = (1j * k1, 1j * k2)
    u = inverse_transform(xh[0:2])
    v = inverse_transform(xh[2:4])
    gu = inverse_transform(np.stack([ik[0] * xh[0:2], ik[1] * xh[0:2]]))
    gv = inverse_transform(np.stack([ik[0] * xh[2:4], ik[1] * xh[2:4]]))
    w = (u[0] * gu[0] + u[1] * gu[1]) + (v[0] * gv[0] + v[1] * gv[1]) + v * (gv[0, 0] + gv[1, 1])
    wh = dealias(forward_transform(w))
    ksq = grid.kmag**2
    with np.errstate(divide="ignore", invalid="ignore"):
        ph = np.where(ksq > 0, 1j * (k1 * wh[0] + k2 * wh[1]) / ksq, 0.0)
    return inverse_transform(ph)


# -- time stepping -----------------------------------------------------------------

class Stepper:
    """Owns the packed spectral state and the multistep history."""

    def __init__(self, x0: State, p: Params):
        if x0.n != p.n:
            raise ValueError(f"state grid {x0.n} does not match params n={p.n}")
        self.p = p
        self.t0 = float(x0.t)
        self.t = self.t0
        self.steps = 0
        self.x = dealias(x0.pack())
        self.x[0:2] = leray_project_hat(self.x[0:2])
        diag = _linear_diag(p)
        self.diag = diag
        self.E = np.exp(diag * p.dt)
        self.E2 = self.E * self.E
        # SBDF2 weights
        h = p.dt
        self._w = (4.0 / 3.0 * self.E, -self.E2 / 3.0, 4.0 / 3.0 * h * self.E, -2.0 / 3.0 * h * self.E2)
        self._prev = None  # (X_{n-1}, N_{n-1}) for imex_bdf2

    def state(self) -> State:
        return State.unpack(self.x, self.t)

    def _euler(self, x, nx):
        return self.E * (x + self.p.dt * nx)

    def _heun(self, x, nx):
        h = self.p.dt
        star = self.E * (x + h * nx)
        return self.E * x + 0.5 * h * (self.E * nx + explicit_hat(star, self.p))

    def _bdf2(self, x, nx):
        xm, nm = self._prev
        a, b, c, d = self._w
        return a * x + b * xm + c * nx + d * nm

    def _rk4(self, x):
        h, p, d = self.p.dt, self.p, self.diag
        k1 = full_rhs_hat(x, p, d)
        k2 = full_rhs_hat(x + 0.5 * h * k1, p, d)
        k3 = full_rhs_hat(x + 0.5 * h * k2, p, d)
        k4 = full_rhs_hat(x + h * k3, p, d)
        return x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)

    def advance(self) -> None:
        x, scheme = self.x, self.p.scheme
        # overflow shows up as a non-finite state below
        with np.errstate(over="ignore", invalid="ignore"):
            if scheme == "rk4_explicit":
                new = self._rk4(x)
            else:
                nx = explicit_hat(x, self.p)
                if scheme == "imex_euler":
                    new = self._euler(x, nx)
                elif self._prev is None:
                    new = self._heun(x, nx)
                else:
                    new = self._bdf2(x, nx)
                self._prev = (x, nx)
        new[0:2] = leray_project_hat(new[0:2])
        self.steps += 1
        self.t = self.t0 + self.steps * self.p.dt
        if not np.isfinite(new).all():
            raise InstabilityError(self.t)
        self.x = new


def step(x: State, p: Params) -> State:
    """One step from x (multistep schemes take their one-step starter)."""
    st = Stepper(x, p)
    st.advance()
    return st.state()


Observer = Callable[[State], object]


@dataclass
class SolveResult:
    final: State
    times: list[float] = field(default_factory=list)
    outputs: list[list] = field(default_factory=list)


def solve(x0: State, p: Params, observers: Sequence[Observer] = (), cadence: float | None = None) -> SolveResult:
    """Integrate to t_end, calling each observer at t0 and every `cadence` time units."""
    st = Stepper(x0, p)
    every = 1 if cadence is None else max(1, int(round(cadence / p.dt)))
    res = SolveResult(final=x0, outputs=[[] for _ in observers])

    def observe():
        s = st.state()
        res.times.append(s.t)
        for out, obs in zip(res.outputs, observers):
            out.append(obs(s))

    if observers:
        observe()
    for i in range(1, p.n_steps + 1):
        st.advance()
        if observers and (i % every == 0 or i == p.n_steps):
            observe()
    res.final = st.state() if p.n_steps else x0
    return res


@dataclass
class Trajectory:
    """Uniformly sampled states; arrays are stacked along the first axis."""

    times: np.ndarray
    u: np.ndarray
    v: np.ndarray
    theta: np.ndarray

    @classmethod
    def from_states(cls, states: Sequence[State]) -> "Trajectory":
        return cls(
            np.array([s.t for s in states]),
            np.stack([s.u for s in states]),
            np.stack([s.v for s in states]),
            np.stack([s.theta for s in states]),
        )

    def __len__(self) -> int:
        return len(self.times)

    def __getitem__(self, i: int) -> State:
        return State(self.u[i], self.v[i], self.theta[i], float(self.times[i]))


def record(x0: State, p: Params, cadence: float | None = None) -> Trajectory:
    res = solve(x0, p, [lambda s: s.copy()], cadence)
    return Trajectory.from_states(res.outputs[0])


# -- exact linearized dynamics ------------------------------------------------------

def _sinhc(z):
    """sinh(z)/z for complex z, with a series near 0."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-3
    safe = np.where(small, 1.0, z)
    z2 = z * z
    return np.where(small, 1 + z2 / 6 + z2 * z2 / 120, np.sinh(safe) / safe)


def pair_propagator(kappa, gamma, t):
    """exp(A t) for A = [[-gamma, -kappa], [kappa, 0]], as (a11, a12, a21, a22).

    Closed form through the eigenvalues lambda = mu +- delta,
    mu = -gamma/2, delta = sqrt(gamma^2/4 - kappa^2).  For |delta t| <= 1 the
    Cayley-Hamilton form e^{mu t}(cosh(delta t) I + t sinhc(delta t)(A - mu I))
    is used; beyond that the spectral form with the slow eigenvalue taken as
    kappa^2 / lambda_fast (no cancellation when gamma >> kappa).
    """
    kappa, gamma, t = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (kappa, gamma, t)))
    mu = -0.5 * gamma
    delta = np.sqrt((0.25 * gamma * gamma - kappa * kappa).astype(complex))
    z = delta * t
    near = np.abs(z) <= 1.0

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        em = np.exp(mu * t)
        f1 = em * t * _sinhc(np.where(near, z, 0.0))
        f0 = em * np.cosh(np.where(near, z, 0.0)) - mu * f1
        # A = f0 I + f1 A  ->  entries
        c11, c12, c21, c22 = f0 - f1 * gamma, -f1 * kappa, f1 * kappa, f0

        lb = mu - delta  # fast (Re lb <= Re la)
        la = np.where(lb != 0, kappa * kappa / np.where(lb != 0, lb, 1.0), 0.0)
        ea, eb = np.exp(la * t), np.exp(lb * t)
        den = np.where(near, 1.0, la - lb)
        # e^{At} = [ea (A - lb I) - eb (A - la I)] / (la - lb)
        s11 = (ea * (-gamma - lb) - eb * (-gamma - la)) / den
        s12 = (ea - eb) * (-kappa) / den
        s21 = (ea - eb) * kappa / den
        s22 = (ea * (-lb) - eb * (-la)) / den

    pick = lambda a, b: np.where(near, a, b).real
    return pick(c11, s11), pick(c12, s12), pick(c21, s21), pick(c22, s22)


def linearized_exact_mode(k, vhat0, thetahat0, alpha: float, eta: float, t):
    """Exact solution of the linearized system for one Fourier mode k.

    v-hat splits into a solenoidal part, which decays like exp(-(alpha + eta|k|^2) t),
    and a potential part along k.  With rho = i k.v-hat/|k| (the symbol of
    Lambda^-1 div), the pair (rho, theta-hat) obeys
        rho' = -(alpha + eta|k|^2) rho - |k| theta-hat,   theta-hat' = |k| rho.
    """
    k = np.asarray(k, dtype=float)
    kap = float(np.hypot(*k))
    if kap == 0:
        raise ValueError("linearized_exact_mode needs k != 0")
    vhat0 = np.asarray(vhat0, dtype=complex)
    khat = k / kap
    gamma = alpha + eta * kap * kap
    t = np.asarray(t, dtype=float)

    rho0 = 1j * (khat @ vhat0)
    vsol0 = vhat0 - khat * (khat @ vhat0)
    a11, a12, a21, a22 = pair_propagator(kap, gamma, t)
    rho = a11 * rho0 + a12 * thetahat0
    th = a21 * rho0 + a22 * thetahat0
    decay = np.exp(-gamma * t)
    vhat = np.multiply.outer(decay, vsol0) + np.multiply.outer(-1j * rho, khat)
    if t.ndim == 0:
        vhat = vhat.reshape(2)
    return vhat, th


def linearized_state_at(x0: State, p: Params, t: float) -> State:
    """Exact propagation of x0 by the linearized system over time t."""
    grid = p.grid
    xh = dealias(x0.pack())
    k1, k2 = grid.k
    kap = grid.kmag
    live = kap > 0
    safe = np.where(live, kap, 1.0)
    n1, n2 = k1 / safe, k2 / safe
    gamma = p.alpha + p.eta * kap * kap

    vh, th = xh[2:4], xh[4]
    kv = n1 * vh[0] + n2 * vh[1]
    rho = 1j * kv
    sol = vh - np.stack([n1 * kv, n2 * kv])
    a11, a12, a21, a22 = pair_propagator(kap, gamma, t)
    rho_t = a11 * rho + a12 * th
    th_t = np.where(live, a21 * rho + a22 * th, th)
    out = np.empty_like(xh)
    out[0:2] = np.exp(-p.alpha * t) * xh[0:2]
    out[2:4] = np.exp(-gamma * t) * sol - 1j * rho_t * np.stack([n1, n2])
    out[2:4, 0, 0] = np.exp(-p.alpha * t) * vh[:, 0, 0]
    out[4] = th_t
    return State.unpack(out, x0.t + t)


def linearized_solve(x0: State, p: Params, times: Sequence[float] | None = None) -> Trajectory:
    """Exact linearized trajectory at the given offsets (default: every dt up to t_end)."""
    if times is None:
        times = np.arange(p.n_steps + 1) * p.dt
    return Trajectory.from_states([linearized_state_at(x0, p, float(t)) for t in times])


def linear_params(p: Params) -> Params:
    return replace(p, nonlinear=False)
