"""Parallel pipe flow in an annulus: solvers, pressure, corrector, remainder.

In the annulus ``r_L < r < r_R`` (periodic in the axial direction with
period ``L``) the velocity ``u_phi(r, t) e_phi + u_x(phi, r, t) e_x`` obeys
the weakly coupled system

    du_phi/dt = eps ((1/r) d/dr (r du_phi/dr) - u_phi / r**2) + f_phi,
    du_x/dt + (u_phi / r) du_x/dphi
        = eps ((1/r) d/dr (r du_x/dr) + (1/r**2) d2u_x/dphi2) + f_x,
    dp/dr = u_phi**2 / r,

with no-slip walls.  Circularly symmetric flow is the special case
``u_x = 0``.  The Euler limit is solved along angular characteristics, the
pressure is recovered by radial quadrature, and the corrector
``Theta = Theta_phi e_phi + Theta_x e_x`` combines erfc kernels
(``Theta_phi``) with half-strip drift-diffusion solves (``Theta_x``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .channel import CutoffProfile
from .halfstrip import HalfStripProblem, solve_psi_halfstrip
from .heat_kernels import BoundarySignal, phi_values
from .mesh import (GradedAxis, GridMismatchError, PeriodicAxis, ScalarField1D,
                   ScalarField2D, TimeGrid, Trajectory, build_graded_axis,
                   build_time_grid, check_nested, graded_derivative,
                   periodic_derivative, periodic_shift, subsample_axis)
from .stepping import SpectralCNStepper, half_step_shifts

__all__ = [
    "PipeProblem",
    "PipeGrids",
    "PipeState",
    "PipeCorrector",
    "pipe_grids",
    "pipe_cutoff",
    "solve_pipe_viscous",
    "solve_pipe_euler",
    "pipe_euler_fields",
    "recover_pressure",
    "build_pipe_corrector",
    "pipe_remainder",
    "pipe_vorticity",
]

_GL_T_NODES, _GL_T_WEIGHTS = np.polynomial.legendre.leggauss(24)
_TWO_PI = 2.0 * math.pi
# Implicit Euler start-up steps of the viscous solver (see the channel solver).
STARTUP_STEPS = 4


@dataclass(frozen=True)
class PipeProblem:
    """Data of a parallel pipe flow in the annulus ``rL < r < rR``.

    Parameters
    ----------
    u0phi : callable
        ``u0phi(r)``, initial azimuthal velocity.
    u0x : callable
        ``u0x(phi, r)``, initial axial velocity, ``2 pi``-periodic in ``phi``;
        must broadcast ``phi`` against ``r``.
    fphi, fx : callable or None
        Forcing ``fphi(r, t)`` and ``fx(phi, r, t)``; ``None`` means zero.
    rL, rR : float
        Inner and outer radii, ``0 < rL < rR``.
    T : float
        Final time.
    axial_period : float
        Axial period ``L``; enters norms as a constant factor only.
    name : str
    """

    u0phi: Callable
    u0x: Callable
    fphi: Optional[Callable] = None
    fx: Optional[Callable] = None
    rL: float = 1.0
    rR: float = 3.0
    T: float = 0.25
    axial_period: float = 1.0
    name: str = "custom"

    def __post_init__(self):
        if not 0 < self.rL < self.rR:
            raise ValueError("need 0 < rL < rR")
        if not (self.T > 0 and self.axial_period > 0):
            raise ValueError("T and axial_period must be positive")


@dataclass(frozen=True)
class PipeGrids:
    """Grids of one pipe solve.

    As for the channel, ``u_phi`` lives on the fine radial axis ``r1`` and
    is stepped on ``time1``; ``u_x`` lives on ``phi`` by ``r`` (every
    ``stride``-th node of ``r1``) and is stepped on ``time``.
    """

    phi: PeriodicAxis
    r: GradedAxis
    time: TimeGrid
    r1: Optional[GradedAxis] = None
    time1: Optional[TimeGrid] = None
    stride: int = field(init=False, default=1)
    substeps: int = field(init=False, default=1)

    def __post_init__(self):
        if self.r1 is None:
            object.__setattr__(self, "r1", self.r)
        if self.time1 is None:
            object.__setattr__(self, "time1", self.time)
        stride, substeps = check_nested(self.r1, self.r, self.time1, self.time)
        object.__setattr__(self, "stride", stride)
        object.__setattr__(self, "substeps", substeps)

    def check(self, p: PipeProblem) -> None:
        if (abs(self.phi.period - _TWO_PI) > 1e-14 or self.r.domain != (p.rL, p.rR)
                or self.time.T != p.T):
            raise GridMismatchError("grids do not match the problem geometry")


@dataclass(frozen=True)
class PipeState:
    """Velocity ``(u_phi, u_x)`` and pressure at time ``t``.

    ``uphi`` and ``pressure`` live on the fine radial axis, ``ux`` on the
    ``(phi, r)`` grid.
    """

    uphi: ScalarField1D
    ux: ScalarField2D
    pressure: ScalarField1D
    t: float


@dataclass(frozen=True)
class PipeCorrector:
    """Boundary-layer corrector ``(Theta_phi, Theta_x)`` at the sampled times."""

    thetaphi: Trajectory
    thetax: Trajectory
    eps: float
    metadata: dict = field(default_factory=dict)


def pipe_grids(p: PipeProblem, eps: float, n_r: int = 1025, n_phi: int = 16,
               n_steps: int = 2048, n_samples: int = 33,
               layer_nodes: int | None = None, refine: int = 4) -> PipeGrids:
    """Layer-resolving nested grids for viscosity ``eps`` (see :func:`channel_grids`)."""
    n1 = refine * (n_r - 1) + 1
    layer_nodes = n1 // 8 if layer_nodes is None else layer_nodes
    width = min(math.sqrt(eps * p.T), 0.5 * (p.rR - p.rL))
    r1 = build_graded_axis(p.rL, p.rR, n1, width, min_layer_nodes=layer_nodes)
    r = r1 if refine == 1 else subsample_axis(r1, refine)
    t1 = build_time_grid(p.T, refine * n_steps, n_samples)
    t2 = t1 if refine == 1 else build_time_grid(p.T, n_steps, n_samples)
    return PipeGrids(PeriodicAxis(n_phi, _TWO_PI), r, t2, r1, t1)


def pipe_cutoff(p: PipeProblem) -> CutoffProfile:
    """Cut-off in wall distance: 1 on ``[0, a0]``, 0 beyond ``2 a0``, ``a0 = (rR - rL) / 8``."""
    a0 = (p.rR - p.rL) / 8.0
    return CutoffProfile(a0, 2.0 * a0)


# --------------------------------------------------------------------------
# Pressure
# --------------------------------------------------------------------------

def recover_pressure(uphi: ScalarField1D) -> ScalarField1D:
    """``p(r) = int_{rL}^r u_phi(s)**2 / s ds`` by cumulative trapezoid quadrature.

    The pressure is normalized by ``p(rL) = 0``; it is nondecreasing in ``r``.
    """
    r = uphi.axis.nodes
    if r[0] <= 0:
        raise ValueError("the radial axis must lie in r > 0")
    q = uphi.values ** 2 / r
    pr = np.concatenate([[0.0], np.cumsum(0.5 * (q[1:] + q[:-1]) * np.diff(r))])
    return ScalarField1D(uphi.axis, pr)


# --------------------------------------------------------------------------
# Viscous solver
# --------------------------------------------------------------------------

def _theta(step: int) -> float:
    return 1.0 if step < STARTUP_STEPS else 0.5


def _energy(state: PipeState, L: float) -> float:
    r1, r = state.uphi.axis, state.ux.axis
    e1 = float((r1.weights * r1.nodes) @ state.uphi.values ** 2) * _TWO_PI
    e2 = float((r.weights * r.nodes) @ (state.ux.values ** 2).sum(axis=1)) * state.ux.periodic_axis.spacing
    return (e1 + e2) * L


def solve_pipe_viscous(p: PipeProblem, eps: float, grids: PipeGrids) -> Trajectory:
    """Crank-Nicolson / exact-rotation solve of the viscous pipe system.

    ``u_phi`` uses the conservative radial operator with the ``-1/r**2``
    potential; ``u_x`` uses the radial operator, ``d2/dphi2`` weighted by
    ``1/r**2`` and an exact rotation by the angular drift ``u_phi / r``.

    Returns
    -------
    Trajectory
        ``PipeState`` snapshots with the recovered pressure; ``metadata``
        holds the radially weighted energy at each sample and a
        ``resolution_warning`` when fewer than eight nodes lie within
        ``sqrt(eps T)`` of a wall.
    """
    grids.check(p)
    phi, r, r1, tg = grids.phi.nodes, grids.r.nodes, grids.r1.nodes, grids.time
    times1, stride, sub = grids.time1.times, grids.stride, grids.substeps
    rcol = r[:, None]
    s1 = SpectralCNStepper(grids.r1, eps, radial=True, potential=-1.0 / r1 ** 2)
    s2 = SpectralCNStepper(grids.r, eps, grids.phi, radial=True, tau_weight=1.0 / r ** 2)
    u1 = np.asarray(p.u0phi(r1), dtype=float) * np.ones(r1.size)
    u2 = np.asarray(p.u0x(phi[None, :], rcol), dtype=float) * np.ones((r.size, phi.size))
    c1, c2 = s1.to_spectral(u1), s2.to_spectral(u2)
    meta: dict = {"eps": eps}
    lo, hi = grids.r.domain
    width = math.sqrt(eps * p.T)
    n_layer = int(min(np.count_nonzero(r <= lo + width), np.count_nonzero(r >= hi - width)))
    if n_layer < 8:
        meta["resolution_warning"] = f"only {n_layer} nodes within sqrt(eps T) of a wall"

    def state(u1, u2, t):
        f1 = ScalarField1D(grids.r1, u1)
        return PipeState(f1, ScalarField2D(grids.phi, grids.r, u2), recover_pressure(f1), t)

    snaps = [state(u1, u2, 0.0)]
    times = tg.times
    for n in range(tg.n_steps):
        w_now = u1[::stride] / r
        for j in range(n * sub, (n + 1) * sub):
            dt1 = times1[j + 1] - times1[j]
            f1 = None
            if p.fphi is not None:
                tm1 = 0.5 * (times1[j] + times1[j + 1])
                f1 = s1.to_spectral(np.asarray(p.fphi(r1, tm1), float) * np.ones(r1.size))
            c1 = s1.step(c1, dt1, forcing=f1, step_index=j + 1, theta=_theta(j))
        u1 = s1.to_physical(c1)
        t0, t1 = times[n], times[n + 1]
        dt, tm = t1 - t0, 0.5 * (t0 + t1)
        sa, sb = half_step_shifts(w_now, u1[::stride] / r, dt)
        f2 = None
        if p.fx is not None:
            f2 = s2.to_spectral(np.asarray(p.fx(phi[None, :], rcol, tm), float) * np.ones((r.size, phi.size)))
        c2 = s2.step(c2, dt, sa, sb, f2, step_index=n + 1, theta=_theta(n))
        if (n + 1) % tg.sample_every == 0:
            snaps.append(state(u1, s2.to_physical(c2), t1))
    meta["energy"] = [_energy(s, p.axial_period) for s in snaps]
    return Trajectory(tg, tuple(snaps), meta)


# --------------------------------------------------------------------------
# Euler solver
# --------------------------------------------------------------------------

def _gl_rule(t: float):
    return 0.5 * t * (_GL_T_NODES + 1.0), 0.5 * t * _GL_T_WEIGHTS


def _euler_uphi(p: PipeProblem, t: float, r) -> np.ndarray:
    """``u_phi_0(r, t) = u0phi(r) + int_0^t f_phi(r, s) ds``."""
    r = np.asarray(r, dtype=float)
    u = np.asarray(p.u0phi(r), dtype=float) * np.ones(r.shape)
    if p.fphi is not None and t > 0:
        s, w = _gl_rule(t)
        u = u + sum(wk * np.asarray(p.fphi(r, sk), float) for sk, wk in zip(s, w))
    return u


def pipe_euler_fields(p: PipeProblem, grids: PipeGrids, t: float, r=None):
    """Euler velocity ``(u_phi_0, u_x_0, A)`` at time ``t`` on the radii ``r``.

    ``A(r, t) = int_0^t u_phi_0(r, s) / r ds`` is the rotation angle of the
    angular characteristics.  Exact for zero forcing; otherwise the time
    integrals use 24-point Gauss-Legendre quadrature.
    """
    r = grids.r.nodes if r is None else np.asarray(r, dtype=float)
    phi = grids.phi.nodes
    u0 = np.asarray(p.u0phi(r), dtype=float) * np.ones(r.size)
    g = np.asarray(p.u0x(phi[None, :], r[:, None]), dtype=float) * np.ones((r.size, phi.size))

    def angle(tt):
        # A(r, t) = (u0phi t + int_0^t (t - s) f_phi(r, s) ds) / r
        a = u0 * tt
        if p.fphi is not None and tt > 0:
            s, w = _gl_rule(tt)
            a = a + sum(wk * (tt - sk) * np.asarray(p.fphi(r, sk), float) for sk, wk in zip(s, w))
        return a / r

    a_t = angle(t)
    ux = periodic_shift(g, a_t, _TWO_PI)
    if p.fx is not None and t > 0:
        s, w = _gl_rule(t)
        for sk, wk in zip(s, w):
            fx = np.asarray(p.fx(phi[None, :], r[:, None], sk), float) * np.ones_like(g)
            ux = ux + wk * periodic_shift(fx, a_t - angle(sk), _TWO_PI)
    return _euler_uphi(p, t, r), ux, a_t


def solve_pipe_euler(p: PipeProblem, grids: PipeGrids) -> Trajectory:
    """Inviscid pipe solution with recovered pressure at the sampled times."""
    grids.check(p)
    snaps = []
    for t in grids.time.sample_times:
        t = float(t)
        _, ux, _ = pipe_euler_fields(p, grids, t)
        uphi = ScalarField1D(grids.r1, _euler_uphi(p, t, grids.r1.nodes))
        snaps.append(PipeState(uphi, ScalarField2D(grids.phi, grids.r, ux), recover_pressure(uphi), t))
    return Trajectory(grids.time, tuple(snaps), {"solver": "characteristics"})


# --------------------------------------------------------------------------
# Corrector
# --------------------------------------------------------------------------

def _wall_signals(p: PipeProblem):
    """``g_L(t) = -u_phi_0(rL, t)`` and ``g_R(t) = -u_phi_0(rR, t)``."""
    signals = []
    for rw in (p.rL, p.rR):
        if p.fphi is None:
            signals.append(BoundarySignal.const(-float(_euler_uphi(p, 0.0, np.array([rw]))[0]), p.T))
            continue

        def value(t, rw=rw):
            t = np.asarray(t, dtype=float)
            out = np.empty(t.shape)
            for i, ti in np.ndenumerate(t):
                out[i] = -float(_euler_uphi(p, float(ti), np.array([rw]))[0])
            return out

        def deriv(t, rw=rw):
            t = np.asarray(t, dtype=float)
            out = np.empty(t.shape)
            for i, ti in np.ndenumerate(t):
                out[i] = -float(np.asarray(p.fphi(np.array([rw]), float(ti))).ravel()[0])
            return out

        signals.append(BoundarySignal(value, deriv, p.T, False))
    return signals


def _thetaphi_profile(p: PipeProblem, sig: CutoffProfile, gl, gr, eps, t, r):
    """``Theta_phi = sigma(r - rL) Phi[g_L](r - rL) + sigma(rR - r) Phi[g_R](rR - r)``."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    dl, dr = r - p.rL, p.rR - r
    lo, hi = dl <= sig.b, dr <= sig.b
    if np.any(lo):
        out[lo] += sig(dl[lo]) * phi_values(gl, eps, t, dl[lo])
    if np.any(hi):
        out[hi] += sig(dr[hi]) * phi_values(gr, eps, t, dr[hi])
    return out


def _distance_axis(axis: GradedAxis, wall: float, lower: bool) -> GradedAxis:
    """The radial axis as wall distance ``|r - wall|``, increasing from 0."""
    d = axis.nodes - wall if lower else (wall - axis.nodes)[::-1]
    d = d.copy()
    d[0], d[-1] = 0.0, axis.length
    w = axis.weights if lower else axis.weights[::-1]
    return GradedAxis(d, w.copy(), (0.0, axis.length), axis.grading)


def build_pipe_corrector(p: PipeProblem, euler: Trajectory, eps: float,
                         grids: PipeGrids) -> PipeCorrector:
    """Assemble ``Theta_phi`` from erfc kernels and ``Theta_x`` from half-strip solves.

    Each wall gets a half-strip problem in the wall distance ``eta`` (the
    radial axis shifted to ``eta = r - rL`` or reflected to ``eta = rR - r``)
    with period ``2 pi`` in ``phi``, drift ``(Theta_phi + u_phi_0) / r``,
    forcing ``-(Theta_phi / r) du_x_0/dphi`` and wall data ``-u_x_0``.  The
    coefficient ``1/r`` is evaluated at the actual radius of each node.
    """
    grids.check(p)
    if not np.array_equal(euler.times, grids.time.sample_times):
        raise GridMismatchError("Euler trajectory sampled on different times")
    sig = pipe_cutoff(p)
    gl, gr = _wall_signals(p)
    r = grids.r.nodes
    rev = slice(None, None, -1)
    eta_axis = _distance_axis(grids.r, p.rL, lower=True)
    eta_axis_upper = _distance_axis(grids.r, p.rR, lower=False)

    def thetaphi(t, rr):
        return _thetaphi_profile(p, sig, gl, gr, eps, t, rr)

    cache: dict = {}

    def euler_grid(t):
        if t not in cache:
            cache.clear()
            _, ux, _ = pipe_euler_fields(p, grids, t)
            cache[t] = (ux, periodic_derivative(ux, _TWO_PI))
        return cache[t]

    def make(lower: bool):
        def to_r(eta):
            eta = np.asarray(eta, dtype=float)
            return p.rL + eta if lower else p.rR - eta

        def drift(eta, t):
            rr = to_r(eta)
            return (thetaphi(t, rr) + _euler_uphi(p, t, rr)) / rr

        def forcing(tau, eta, t):
            _, dux = euler_grid(t)
            vals = -(thetaphi(t, r) / r)[:, None] * dux
            return vals if lower else vals[rev]

        def boundary(tau, t):
            ux, _ = euler_grid(t)
            return -(ux[0] if lower else ux[-1])

        axis = eta_axis if lower else eta_axis_upper
        return HalfStripProblem(drift, forcing, boundary, _TWO_PI, eps, grids.phi, axis, grids.time)

    psi_l = solve_psi_halfstrip(make(True))
    psi_u = solve_psi_halfstrip(make(False))
    sl, su = sig(r - p.rL), sig(p.rR - r)
    th_phi, th_x = [], []
    for k, t in enumerate(grids.time.sample_times):
        t = float(t)
        th_phi.append(ScalarField1D(grids.r1, thetaphi(t, grids.r1.nodes)))
        vals = sl[:, None] * psi_l[k].values + su[:, None] * psi_u[k].values[rev]
        th_x.append(ScalarField2D(grids.phi, grids.r, vals))
    meta = {"far_field_max": max(psi_l.metadata["far_field_max"], psi_u.metadata["far_field_max"])}
    return PipeCorrector(Trajectory(grids.time, tuple(th_phi)), Trajectory(grids.time, tuple(th_x)),
                         eps, meta)


# --------------------------------------------------------------------------
# Remainder and vorticity
# --------------------------------------------------------------------------

def pipe_remainder(viscous: Trajectory, euler: Trajectory, corrector: PipeCorrector) -> Trajectory:
    """``v = u_eps - u_0 - Theta``; the pressure slot holds ``p_eps - p_0``."""
    if not (len(viscous) == len(euler) == len(corrector.thetaphi)):
        raise GridMismatchError("trajectories have different sample counts")
    snaps = []
    for sv, se, t1, t2 in zip(viscous, euler, corrector.thetaphi, corrector.thetax):
        if not (sv.ux.axis.same_as(se.ux.axis) and sv.ux.axis.same_as(t2.axis)
                and sv.uphi.axis.same_as(se.uphi.axis) and sv.uphi.axis.same_as(t1.axis)):
            raise GridMismatchError("trajectories live on different grids")
        v1 = sv.uphi.values - se.uphi.values - t1.values
        v2 = sv.ux.values - se.ux.values - t2.values
        dp = sv.pressure.values - se.pressure.values
        snaps.append(PipeState(ScalarField1D(sv.uphi.axis, v1),
                               ScalarField2D(sv.ux.periodic_axis, sv.ux.axis, v2),
                               ScalarField1D(sv.uphi.axis, dp), sv.t))
    return Trajectory(viscous.time_grid, tuple(snaps), {})


def pipe_vorticity(state: PipeState):
    """``(omega_phi, omega_x, omega_r) = (-dF_x/dr, (1/r) d(r F_phi)/dr, (1/r) dF_x/dphi)``.

    Radial derivatives use second-order (one-sided at the walls) stencils,
    the angular derivative is spectral.
    """
    pax, rax = state.ux.periodic_axis, state.ux.axis
    r1 = state.uphi.axis.nodes
    w_phi = -graded_derivative(state.ux.values, rax.nodes, axis=0)
    w_x = graded_derivative(r1 * state.uphi.values, r1) / r1
    w_r = periodic_derivative(state.ux.values, pax.period) / rax.nodes[:, None]
    return (ScalarField2D(pax, rax, w_phi), ScalarField1D(state.uphi.axis, w_x),
            ScalarField2D(pax, rax, w_r))
