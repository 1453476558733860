"""Plane-parallel channel flow: viscous and inviscid solvers, corrector, remainder.

The velocity ``(u1(z, t), u2(x, z, t), 0)`` in the channel
``(0, L)**2 x (0, h)`` obeys the weakly coupled system

    du1/dt = eps d2u1/dz2 + f1,
    du2/dt + u1 du2/dx = eps (d2/dx2 + d2/dz2) u2 + f2,

with no-slip walls at ``z = 0, h`` and zero pressure.  The Euler limit drops
the viscous terms and the boundary condition, so it is solved in closed form
along characteristics.  The boundary-layer corrector ``Theta = (Theta1,
Theta2, 0)`` is assembled from erfc kernels (``Theta1``) and half-strip
drift-diffusion solves (``Theta2``), each localized near its wall by a
smooth cut-off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .halfstrip import HalfStripProblem, solve_psi_halfstrip
from .heat_kernels import BoundarySignal, phi_values
from .mesh import (GradedAxis, GridMismatchError, PeriodicAxis, ScalarField1D,
                   ScalarField2D, TimeGrid, Trajectory, build_graded_axis,
                   build_time_grid, check_nested, graded_derivative, periodic_derivative,
                   periodic_shift, subsample_axis)
from .stepping import SpectralCNStepper, half_step_shifts

__all__ = [
    "ChannelProblem",
    "ChannelGrids",
    "ChannelState",
    "CutoffProfile",
    "ChannelCorrector",
    "channel_grids",
    "solve_channel_viscous",
    "solve_channel_euler",
    "channel_euler_fields",
    "channel_halfstrip_problems",
    "build_channel_corrector",
    "channel_remainder",
    "channel_vorticity",
    "lighthill_bounds_check",
]

_GL_T_NODES, _GL_T_WEIGHTS = np.polynomial.legendre.leggauss(24)
# Implicit Euler start-up steps: incompatible wall data (u != 0 at the wall
# at t = 0) excite grid-scale modes that Crank-Nicolson does not damp.
STARTUP_STEPS = 4


@dataclass(frozen=True)
class ChannelProblem:
    """Data of a plane-parallel channel flow.

    Parameters
    ----------
    g1 : callable
        ``g1(z)``, initial first (``x``) velocity component (vectorized).
    g2 : callable
        ``g2(x, z)``, initial second (``y``) velocity component, periodic in
        ``x`` with period ``L``; must broadcast ``x`` against ``z``.
    f1, f2 : callable or None
        Forcing ``f1(z, t)`` and ``f2(x, z, t)``; ``None`` means zero.
    h, L, T : float
        Channel height, period and final time.
    name : str
        Label used in reports.
    """

    g1: Callable
    g2: Callable
    f1: Optional[Callable] = None
    f2: Optional[Callable] = None
    h: float = 1.0
    L: float = 1.0
    T: float = 0.25
    name: str = "custom"

    def __post_init__(self):
        if not (self.h > 0 and self.L > 0 and self.T > 0):
            raise ValueError("h, L and T must be positive")


@dataclass(frozen=True)
class ChannelGrids:
    """Grids of one channel solve.

    The one-dimensional field ``u1`` (and everything derived from it) lives
    on ``z1`` and is stepped on ``time1``; the two-dimensional field ``u2``
    lives on ``x`` by ``z`` and is stepped on ``time``.  ``z`` must consist of
    every ``stride``-th node of ``z1`` and the steps of ``time`` must be
    unions of consecutive steps of ``time1``, so ``u1`` can be read off at
    the ``u2`` rows and step ends without interpolation.  Both time grids
    share their sample times.

    Parameters
    ----------
    x : PeriodicAxis
    z : GradedAxis
    time : TimeGrid
    z1 : GradedAxis, optional
        Defaults to ``z``.
    time1 : TimeGrid, optional
        Defaults to ``time``.
    """

    x: PeriodicAxis
    z: GradedAxis
    time: TimeGrid
    z1: Optional[GradedAxis] = None
    time1: Optional[TimeGrid] = None
    stride: int = field(init=False, default=1)
    substeps: int = field(init=False, default=1)

    def __post_init__(self):
        if self.z1 is None:
            object.__setattr__(self, "z1", self.z)
        if self.time1 is None:
            object.__setattr__(self, "time1", self.time)
        stride, substeps = check_nested(self.z1, self.z, self.time1, self.time)
        object.__setattr__(self, "stride", stride)
        object.__setattr__(self, "substeps", substeps)

    def check(self, p: ChannelProblem) -> None:
        if self.x.period != p.L or self.z.domain != (0.0, p.h) or self.time.T != p.T:
            raise GridMismatchError("grids do not match the problem geometry")


@dataclass(frozen=True)
class ChannelState:
    """Velocity ``(u1, u2)`` at time ``t`` (pressure is identically zero).

    ``u1`` and ``u2`` may live on different (nested) ``z`` axes.
    """

    u1: ScalarField1D
    u2: ScalarField2D
    t: float


@dataclass(frozen=True)
class CutoffProfile:
    """Smooth cut-off equal to 1 on ``[0, a]`` and 0 on ``[b, inf)``.

    The transition is the quintic smoothstep, so the profile is C2 with
    ``|sigma'| <= 15 / (8 (b - a))`` and ``|sigma''| <= 10 / (sqrt(3) (b - a)**2)``.
    """

    a: float
    b: float

    def __post_init__(self):
        if not 0 < self.a < self.b:
            raise ValueError("cut-off needs 0 < a < b")

    def _s(self, x):
        return np.clip((np.asarray(x, dtype=float) - self.a) / (self.b - self.a), 0.0, 1.0)

    def __call__(self, x):
        s = self._s(x)
        return 1.0 - s ** 3 * (10.0 - 15.0 * s + 6.0 * s * s)

    def derivative(self, x):
        s = self._s(x)
        return -30.0 * s * s * (1.0 - s) ** 2 / (self.b - self.a)

    def second_derivative(self, x):
        s = self._s(x)
        return -60.0 * s * (1.0 - s) * (1.0 - 2.0 * s) / (self.b - self.a) ** 2


@dataclass(frozen=True)
class ChannelCorrector:
    """Boundary-layer corrector ``(Theta1, Theta2, 0)`` at the sampled times."""

    theta1: Trajectory
    theta2: Trajectory
    eps: float
    metadata: dict = field(default_factory=dict)


def channel_grids(p: ChannelProblem, eps: float, n_z: int = 1025, n_x: int = 16,
                  n_steps: int = 2048, n_samples: int = 33,
                  layer_nodes: int | None = None, refine: int = 4) -> ChannelGrids:
    """Layer-resolving grids for viscosity ``eps``.

    The fine axis ``z1`` has ``refine * (n_z - 1) + 1`` nodes, ``layer_nodes``
    of them (default one eighth) inside ``sqrt(eps T)`` of each wall; ``z``
    keeps every ``refine``-th node.  ``time1`` has ``refine * n_steps``
    steps.  The one-dimensional wall-normal derivative of ``u1`` carries the
    largest layer gradients and gets the finer grids; ``refine = 1`` uses a
    single grid.
    """
    n1 = refine * (n_z - 1) + 1
    layer_nodes = n1 // 8 if layer_nodes is None else layer_nodes
    width = min(math.sqrt(eps * p.T), 0.5 * p.h)
    z1 = build_graded_axis(0.0, p.h, n1, width, min_layer_nodes=layer_nodes)
    z = z1 if refine == 1 else subsample_axis(z1, refine)
    t1 = build_time_grid(p.T, refine * n_steps, n_samples)
    t2 = t1 if refine == 1 else build_time_grid(p.T, n_steps, n_samples)
    return ChannelGrids(PeriodicAxis(n_x, p.L), z, t2, z1, t1)


def _layer_node_count(z: GradedAxis, width: float) -> int:
    lo, hi = z.domain
    nodes = z.nodes
    return int(min(np.count_nonzero(nodes <= lo + width), np.count_nonzero(nodes >= hi - width)))


# --------------------------------------------------------------------------
# Viscous solver
# --------------------------------------------------------------------------

def solve_channel_viscous(p: ChannelProblem, eps: float, grids: ChannelGrids) -> Trajectory:
    """Crank-Nicolson / exact-translation solve of the viscous channel system.

    Returns
    -------
    Trajectory
        ``ChannelState`` snapshots; ``metadata`` holds the discrete energy at
        each sample and a ``resolution_warning`` entry when fewer than eight
        nodes lie within ``sqrt(eps T)`` of a wall.
    """
    grids.check(p)
    x, z, z1, tg = grids.x.nodes, grids.z.nodes, grids.z1.nodes, grids.time
    times1, stride, sub = grids.time1.times, grids.stride, grids.substeps
    zcol = z[:, None]
    s1 = SpectralCNStepper(grids.z1, eps)
    s2 = SpectralCNStepper(grids.z, eps, grids.x)
    u1 = np.asarray(p.g1(z1), dtype=float) * np.ones(z1.size)
    u2 = np.asarray(p.g2(x[None, :], zcol), dtype=float) * np.ones((z.size, x.size))
    c1, c2 = s1.to_spectral(u1), s2.to_spectral(u2)
    meta: dict = {"eps": eps}
    n_layer = _layer_node_count(grids.z, math.sqrt(eps * p.T))
    if n_layer < 8:
        meta["resolution_warning"] = f"only {n_layer} nodes within sqrt(eps T) of a wall"
    snaps = [ChannelState(ScalarField1D(grids.z1, u1), ScalarField2D(grids.x, grids.z, u2), 0.0)]
    times = tg.times
    for n in range(tg.n_steps):
        u1_now = u1[::stride]
        for j in range(n * sub, (n + 1) * sub):
            dt1 = times1[j + 1] - times1[j]
            f1 = None
            if p.f1 is not None:
                tm1 = 0.5 * (times1[j] + times1[j + 1])
                f1 = s1.to_spectral(np.asarray(p.f1(z1, tm1), float) * np.ones(z1.size))
            c1 = s1.step(c1, dt1, forcing=f1, step_index=j + 1, theta=_theta(j))
        u1 = s1.to_physical(c1)
        t0, t1 = times[n], times[n + 1]
        dt, tm = t1 - t0, 0.5 * (t0 + t1)
        sa, sb = half_step_shifts(u1_now, u1[::stride], dt)
        f2 = None
        if p.f2 is not None:
            f2 = s2.to_spectral(np.asarray(p.f2(x[None, :], zcol, tm), float) * np.ones((z.size, x.size)))
        c2 = s2.step(c2, dt, sa, sb, f2, step_index=n + 1, theta=_theta(n))
        if (n + 1) % tg.sample_every == 0:
            snaps.append(ChannelState(ScalarField1D(grids.z1, u1),
                                      ScalarField2D(grids.x, grids.z, s2.to_physical(c2)), t1))
    meta["energy"] = [_energy(s, p.L) for s in snaps]
    return Trajectory(tg, tuple(snaps), meta)


def _theta(step: int) -> float:
    """Backward Euler for the first steps, Crank-Nicolson afterwards."""
    return 1.0 if step < STARTUP_STEPS else 0.5


def _energy(state: ChannelState, L: float) -> float:
    w1, w2 = state.u1.axis.weights, state.u2.axis.weights
    return (float(w1 @ state.u1.values ** 2) * L * L
            + float(w2 @ (state.u2.values ** 2).sum(axis=1)) * state.u2.periodic_axis.spacing * L)


# --------------------------------------------------------------------------
# Euler solver
# --------------------------------------------------------------------------

def _gl_rule(t: float):
    return 0.5 * t * (_GL_T_NODES + 1.0), 0.5 * t * _GL_T_WEIGHTS


def channel_euler_fields(p: ChannelProblem, grids: ChannelGrids, t: float, z=None):
    """Euler velocity ``(u1_0, u2_0, A)`` at time ``t`` on the grid rows ``z``.

    ``A(z, t) = int_0^t u1_0(z, s) ds`` is the characteristic displacement.
    With zero forcing the fields are exact; otherwise the time integrals use
    24-point Gauss-Legendre quadrature.
    """
    z = grids.z.nodes if z is None else np.asarray(z, dtype=float)
    x = grids.x.nodes
    g1 = np.asarray(p.g1(z), dtype=float) * np.ones(z.size)
    g2 = np.asarray(p.g2(x[None, :], z[:, None]), dtype=float) * np.ones((z.size, x.size))

    def disp(tt):
        # A(z, t) = g1 t + int_0^t (t - s) f1(z, s) ds
        a = g1 * tt
        if p.f1 is not None and tt > 0:
            s, w = _gl_rule(tt)
            a = a + sum(wk * (tt - sk) * np.asarray(p.f1(z, sk), float) for sk, wk in zip(s, w))
        return a

    u1 = _euler_u1(p, t, z)
    a_t = disp(t)
    u2 = periodic_shift(g2, a_t, p.L)
    if p.f2 is not None and t > 0:
        s, w = _gl_rule(t)
        for sk, wk in zip(s, w):
            f2 = np.asarray(p.f2(x[None, :], z[:, None], sk), float) * np.ones_like(g2)
            u2 = u2 + wk * periodic_shift(f2, a_t - disp(sk), p.L)
    return u1, u2, a_t


def _euler_u1(p: ChannelProblem, t: float, z) -> np.ndarray:
    """``u1_0(z, t) = g1(z) + int_0^t f1(z, s) ds``."""
    z = np.asarray(z, dtype=float)
    u1 = np.asarray(p.g1(z), dtype=float) * np.ones(z.size)
    if p.f1 is not None and t > 0:
        s, w = _gl_rule(t)
        u1 = u1 + sum(wk * np.asarray(p.f1(z, sk), float) for sk, wk in zip(s, w))
    return u1


def solve_channel_euler(p: ChannelProblem, grids: ChannelGrids) -> Trajectory:
    """Inviscid channel solution at the sampled times (exact characteristics)."""
    grids.check(p)
    snaps = []
    for t in grids.time.sample_times:
        _, u2, _ = channel_euler_fields(p, grids, float(t))
        u1 = _euler_u1(p, float(t), grids.z1.nodes)
        snaps.append(ChannelState(ScalarField1D(grids.z1, u1), ScalarField2D(grids.x, grids.z, u2), float(t)))
    return Trajectory(grids.time, tuple(snaps), {"solver": "characteristics"})


# --------------------------------------------------------------------------
# Corrector
# --------------------------------------------------------------------------

def channel_cutoff(p: ChannelProblem) -> CutoffProfile:
    """Cut-off equal to 1 on ``[0, h/4]`` and 0 beyond ``h/2``."""
    return CutoffProfile(0.25 * p.h, 0.5 * p.h)


def _wall_signals(p: ChannelProblem):
    """``g_L(t) = -u1_0(0, t)`` and ``g_U(t) = -u1_0(h, t)`` as boundary signals."""
    signals = []
    for zw in (0.0, p.h):
        c = float(np.asarray(p.g1(np.array([zw]))).ravel()[0])
        if p.f1 is None:
            signals.append(BoundarySignal.const(-c, p.T))
            continue

        def value(t, zw=zw, c=c):
            t = np.asarray(t, dtype=float)
            out = np.empty(t.shape)
            for i, ti in np.ndenumerate(t):
                s, w = _gl_rule(float(ti))
                out[i] = -(c + sum(wk * float(np.asarray(p.f1(np.array([zw]), sk)).ravel()[0])
                                   for sk, wk in zip(s, w)))
            return out

        def deriv(t, zw=zw):
            t = np.asarray(t, dtype=float)
            out = np.empty(t.shape)
            for i, ti in np.ndenumerate(t):
                out[i] = -float(np.asarray(p.f1(np.array([zw]), float(ti))).ravel()[0])
            return out

        signals.append(BoundarySignal(value, deriv, p.T, False))
    return signals


def _theta1_profile(p, sig: CutoffProfile, gl, gu, eps, t, z):
    """Assembled ``Theta1 = sigma(z) Phi[g_L](z) + sigma(h - z) Phi[g_U](h - z)``."""
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    lo = z <= sig.b
    hi = (p.h - z) <= sig.b
    if np.any(lo):
        out[lo] += sig(z[lo]) * phi_values(gl, eps, t, z[lo])
    if np.any(hi):
        out[hi] += sig(p.h - z[hi]) * phi_values(gu, eps, t, p.h - z[hi])
    return out


def channel_halfstrip_problems(p: ChannelProblem, eps: float, grids: ChannelGrids):
    """Half-strip problems ``(lower, upper)`` whose solutions build ``Theta2``.

    The half-strip problems use the channel ``z`` axis as their ``eta`` axis
    (the lower wall at ``eta = z``, the upper at ``eta = h - z``), with the
    drift ``u1_0 + Theta1`` and forcing ``-Theta1 du2_0/dx`` evaluated at the
    wall distance, wall data ``-u2_0`` and homogeneous Dirichlet data at
    ``eta = h``.
    """
    grids.check(p)
    sig = channel_cutoff(p)
    gl, gu = _wall_signals(p)
    z = grids.z.nodes
    rev = slice(None, None, -1)

    def theta1(t, eta):
        return _theta1_profile(p, sig, gl, gu, eps, t, eta)

    cache: dict = {}

    def euler_grid(t):
        if t not in cache:
            cache.clear()
            u1, u2, _ = channel_euler_fields(p, grids, t)
            cache[t] = (u2, periodic_derivative(u2, p.L))
        return cache[t]

    def make(lower: bool):
        def to_z(eta):
            return np.asarray(eta, dtype=float) if lower else p.h - np.asarray(eta, dtype=float)

        def drift(eta, t):
            return _euler_u1(p, t, to_z(eta)) + theta1(t, to_z(eta))

        def forcing(tau, eta, t):
            _, du2 = euler_grid(t)
            th = theta1(t, z)
            vals = -th[:, None] * du2
            return vals if lower else vals[rev]

        def boundary(tau, t):
            u2, _ = euler_grid(t)
            return -(u2[0] if lower else u2[-1])

        return HalfStripProblem(drift, forcing, boundary, p.L, eps, grids.x, grids.z, grids.time)

    return make(True), make(False)


def build_channel_corrector(p: ChannelProblem, euler: Trajectory, eps: float,
                            grids: ChannelGrids) -> ChannelCorrector:
    """Assemble ``Theta1`` from erfc kernels and ``Theta2`` from half-strip solves.

    See :func:`channel_halfstrip_problems` for the half-strip data; both
    pieces are localized by the cut-off of :func:`channel_cutoff`.
    """
    grids.check(p)
    if not np.array_equal(euler.times, grids.time.sample_times):
        raise GridMismatchError("Euler trajectory sampled on different times")
    sig = channel_cutoff(p)
    gl, gu = _wall_signals(p)
    z = grids.z.nodes
    rev = slice(None, None, -1)
    lower, upper = channel_halfstrip_problems(p, eps, grids)
    psi_l = solve_psi_halfstrip(lower)
    psi_u = solve_psi_halfstrip(upper)
    sz, szu = sig(z), sig(p.h - z)
    th1, th2 = [], []
    for k, t in enumerate(grids.time.sample_times):
        t = float(t)
        th1.append(ScalarField1D(grids.z1, _theta1_profile(p, sig, gl, gu, eps, t, grids.z1.nodes)))
        vals = sz[:, None] * psi_l[k].values + szu[:, None] * psi_u[k].values[rev]
        th2.append(ScalarField2D(grids.x, grids.z, vals))
    meta = {"far_field_max": max(psi_l.metadata["far_field_max"], psi_u.metadata["far_field_max"])}
    return ChannelCorrector(Trajectory(grids.time, tuple(th1)), Trajectory(grids.time, tuple(th2)),
                            eps, meta)


# --------------------------------------------------------------------------
# Remainder and vorticity
# --------------------------------------------------------------------------

def channel_remainder(viscous: Trajectory, euler: Trajectory,
                      corrector: ChannelCorrector) -> Trajectory:
    """``v = u_eps - u_0 - Theta`` at every sampled time."""
    if not (len(viscous) == len(euler) == len(corrector.theta1)):
        raise GridMismatchError("trajectories have different sample counts")
    snaps = []
    for sv, se, t1, t2 in zip(viscous, euler, corrector.theta1, corrector.theta2):
        if not (sv.u2.axis.same_as(se.u2.axis) and sv.u2.axis.same_as(t2.axis)
                and sv.u1.axis.same_as(se.u1.axis) and sv.u1.axis.same_as(t1.axis)):
            raise GridMismatchError("trajectories live on different grids")
        v1 = sv.u1.values - se.u1.values - t1.values
        v2 = sv.u2.values - se.u2.values - t2.values
        snaps.append(ChannelState(ScalarField1D(sv.u1.axis, v1),
                                  ScalarField2D(sv.u2.periodic_axis, sv.u2.axis, v2), sv.t))
    return Trajectory(viscous.time_grid, tuple(snaps), {})


def channel_vorticity(state: ChannelState):
    """``(omega1, omega2, omega3) = (-dv2/dz, dv1/dz, dv2/dx)``.

    ``z`` derivatives use second-order (one-sided at the walls) stencils and
    the ``x`` derivative is spectral.
    """
    pax, zax = state.u2.periodic_axis, state.u2.axis
    w1 = -graded_derivative(state.u2.values, zax.nodes, axis=0)
    w2 = graded_derivative(state.u1.values, state.u1.axis.nodes)
    w3 = periodic_derivative(state.u2.values, pax.period)
    return (ScalarField2D(pax, zax, w1), ScalarField1D(state.u1.axis, w2),
            ScalarField2D(pax, zax, w3))


# --------------------------------------------------------------------------
# Lighthill bounds
# --------------------------------------------------------------------------

def _data_norms(p: ChannelProblem, n_fine: int = 4097, n_x: int = 256):
    """Norms of the initial data by fine-grid quadrature."""
    z = np.linspace(0.0, p.h, n_fine)
    wz = np.full(n_fine, p.h / (n_fine - 1))
    wz[[0, -1]] *= 0.5
    x = np.arange(n_x) * (p.L / n_x)
    dx = p.L / n_x
    g1 = np.asarray(p.g1(z), dtype=float) * np.ones(n_fine)
    g2 = np.asarray(p.g2(x[None, :], z[:, None]), dtype=float) * np.ones((n_fine, n_x))
    dg1 = graded_derivative(g1, z)
    dzg2 = graded_derivative(g2, z, axis=0)
    dxg2 = periodic_derivative(g2, p.L)
    dxxg2 = periodic_derivative(g2, p.L, order=2)
    return {
        "dz_g2_L1": float(dx * (wz @ np.abs(dzg2).sum(axis=1))),
        "g2_inf": float(np.abs(g2).max()),
        "dxx_g2_inf": float(np.abs(dxxg2).max()),
        "dg1_L1": float(wz @ np.abs(dg1)),
        "g1_inf": float(np.abs(g1).max()),
        "dx_g2_inf": float(np.abs(dxg2).max()),
    }


def lighthill_bounds_check(traj: Trajectory, p: ChannelProblem, slack: float = 0.05):
    """Check the three vorticity bounds on a viscous trajectory.

    Norms follow the slice convention of the bounds: ``omega1`` in
    ``L1((0, L) x (0, h))``, ``omega2`` in ``L1(0, h)`` and ``omega3`` in
    ``L_inf``.  The trivial ``y`` factor would multiply both sides equally.

    Returns
    -------
    list of BoundsReport
        One report per bound (``omega1est``, ``omega2est``, ``omega3est``),
        plus the wall Neumann data of ``omega2`` as an informational entry in
        each report's ``info``.
    """
    from .analysis import BoundsReport

    d = _data_norms(p)
    rhs1 = (d["dz_g2_L1"] + 2 * p.L * (d["g2_inf"] + d["dxx_g2_inf"])
            + p.T * (d["dg1_L1"] + d["g1_inf"]) * d["dx_g2_inf"])
    rhs2 = d["dg1_L1"] + 2 * d["g1_inf"]
    rhs3 = d["dx_g2_inf"]
    lhs1, lhs2, lhs3 = [], [], []
    for st in traj:
        w1, w2, w3 = channel_vorticity(st)
        dx = st.u2.periodic_axis.spacing
        lhs1.append(float(dx * (st.u2.axis.weights @ np.abs(w1.values).sum(axis=1))))
        lhs2.append(float(st.u1.axis.weights @ np.abs(w2.values)))
        lhs3.append(float(np.abs(w3.values).max()))
    z = traj[0].u1.axis.nodes
    g1 = np.asarray(p.g1(z), dtype=float) * np.ones(z.size)
    d2g1 = graded_derivative(graded_derivative(g1, z), z)
    info = {"pressure": 0.0, "omega2_wall_neumann_lower": float(-d2g1[0]),
            "omega2_wall_neumann_upper": float(-d2g1[-1])}
    times = [float(t) for t in traj.times]
    return [BoundsReport.build(name, times, lhs, [rhs] * len(times), slack, info)
            for name, lhs, rhs in (("omega1est", lhs1, rhs1), ("omega2est", lhs2, rhs2),
                                   ("omega3est", lhs3, rhs3))]
