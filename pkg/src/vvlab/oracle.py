"""Independent brute-force references for the main-path solvers.

Nothing here shares code with the implicit solvers or with the erfc kernels:
the quadrature is an adaptive Gauss-Kronrod bisection with its own node table,
and the PDE reference is forward Euler with centered finite differences on
uniform grids (second order in the bounded direction, fourth order in the
periodic one).  Both are meant for small instances inside tests.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .mesh import (PeriodicAxis, ScalarField1D, ScalarField2D, TimeGrid,
                   Trajectory, uniform_axis)

__all__ = [
    "QuadratureBudgetError",
    "OracleStabilityError",
    "reference_quadrature",
    "ExplicitProblem",
    "explicit_reference_solver",
    "stable_dt",
]


class QuadratureBudgetError(RuntimeError):
    """Raised when the adaptive quadrature exhausts its node budget."""


class OracleStabilityError(ValueError):
    """Raised when a requested explicit step violates the stability bounds."""


# Gauss-Kronrod 7/15 rule (abscissae on [0, 1] half of [-1, 1]).
_XK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000])
_WK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])
_X15 = np.concatenate([-_XK[:-1], _XK[::-1]])
_W15 = np.concatenate([_WK[:-1], _WK[::-1]])
# Gauss points are the odd-indexed Kronrod abscissae _XK[1], _XK[3], ...
_G_IDX = np.array([1, 3, 5, 7, 9, 11, 13])
_W7 = np.concatenate([_WG[:-1], _WG[::-1]])


def _gk15(f, a, b):
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    y = np.asarray(f(c + h * _X15), dtype=float)
    k = h * (_W15 @ y)
    g = h * (_W7 @ y[_G_IDX])
    return k, abs(k - g)


def reference_quadrature(integrand: Callable, a: float, b: float, tol: float = 1e-14,
                         atol: float = 0.0, max_intervals: int = 20000,
                         with_error: bool = False):
    """Adaptive Gauss-Kronrod (7/15) bisection quadrature.

    Parameters
    ----------
    integrand : callable
        Vectorized ``f(x)``.
    a, b : float
        Interval; ``b = inf`` is mapped to ``[0, 1)`` by ``x = a + u/(1-u)``.
    tol, atol : float
        Stop once the summed error estimate is below ``max(atol, tol |I|)``.
    max_intervals : int
        Node budget expressed in subintervals (15 evaluations each).
    with_error : bool
        Return ``(value, error_estimate)`` instead of the value.

    Raises
    ------
    QuadratureBudgetError
        If the tolerance is not met within the budget.
    """
    if math.isinf(b):
        if b < 0:
            raise ValueError("only +inf upper limits are supported")
        f0 = integrand

        def f(u):
            u = np.asarray(u, dtype=float)
            one_m = 1.0 - u
            return f0(a + u / one_m) / (one_m * one_m)

        lo, hi = 0.0, 1.0
    else:
        f, lo, hi = integrand, float(a), float(b)
    val, err = _gk15(f, lo, hi)
    heap = [(-err, lo, hi, val, err)]
    total, total_err = val, err
    n = 1
    while total_err > max(atol, tol * abs(total)):
        if n >= max_intervals:
            raise QuadratureBudgetError(
                f"error estimate {total_err:.3e} above tolerance after {n} intervals")
        _, l, r, v, e = heapq.heappop(heap)
        m = 0.5 * (l + r)
        v1, e1 = _gk15(f, l, m)
        v2, e2 = _gk15(f, m, r)
        total += v1 + v2 - v
        total_err += e1 + e2 - e
        heapq.heappush(heap, (-e1, l, m, v1, e1))
        heapq.heappush(heap, (-e2, m, r, v2, e2))
        n += 1
    # Re-sum from the leaves so the running updates leave no rounding residue.
    total = math.fsum(item[3] for item in heap)
    total_err = math.fsum(item[4] for item in heap)
    return (total, total_err) if with_error else total


@dataclass
class ExplicitProblem:
    """Drift-diffusion problem for the explicit reference solver.

    The solved equation, with ``u = u(tau, eta, t)`` (or ``u(eta, t)`` when
    ``n_tau`` is None), is::

        du/dt = eps * (L_eta u + potential(eta) u + tau_weight(eta) d2u/dtau2)
                - drift(eta, t) du/dtau + forcing(tau, eta, t)

    where ``L_eta`` is ``d2/deta2`` or, for ``radial=True``, the conservative
    ``(1/eta) d/deta (eta d/deta)``.  Dirichlet data is imposed at both ends
    of the uniform ``eta`` grid.  Callables receive and return arrays shaped
    ``(n_eta, n_tau)`` for two-dimensional quantities.
    """

    eta_lo: float
    eta_hi: float
    n_eta: int
    eps: float
    sample_times: np.ndarray
    initial: Callable
    bc_lo: Callable = lambda tau, t: 0.0
    bc_hi: Callable = lambda tau, t: 0.0
    n_tau: Optional[int] = None
    period: float = 2 * math.pi
    drift: Optional[Callable] = None
    forcing: Optional[Callable] = None
    radial: bool = False
    potential: Optional[Callable] = None
    tau_weight: Optional[Callable] = None
    metadata: dict = field(default_factory=dict)


def _grids(p: ExplicitProblem, n_eta: int):
    eta = np.linspace(p.eta_lo, p.eta_hi, n_eta)
    tau = None if p.n_tau is None else np.arange(p.n_tau) * (p.period / p.n_tau)
    return eta, tau


def stable_dt(p: ExplicitProblem, n_eta: int | None = None) -> float:
    """Largest step satisfying the explicit stability bounds.

    Bounds: ``dt <= 0.2 d**2 / eps`` with ``d`` the smallest effective
    spacing, ``dt <= 0.5 d_tau / max|drift|`` and, because centered
    advection under forward Euler is only stabilized by the periodic
    diffusion, ``dt <= eps * tau_weight / drift**2`` row by row.
    """
    n_eta = p.n_eta if n_eta is None else n_eta
    eta, tau = _grids(p, n_eta)
    d_eta = eta[1] - eta[0]
    limits = [0.2 * d_eta ** 2 / p.eps]
    if tau is not None:
        d_tau = tau[1]
        m = np.ones_like(eta) if p.tau_weight is None else np.asarray(p.tau_weight(eta), float)
        d_eff = d_tau / math.sqrt(float(m.max()))
        limits.append(0.2 * d_eff ** 2 / p.eps)
        if p.drift is not None:
            umax = max(float(np.max(np.abs(p.drift(eta, t)))) for t in p.sample_times)
            if umax > 0:
                limits.append(0.5 * d_tau / umax)
                limits.append(p.eps * float(m.min()) / umax ** 2)
    return min(limits)


def _laplacian_eta(u, eta, radial):
    d = eta[1] - eta[0]
    out = np.zeros_like(u)
    if radial:
        rp = 0.5 * (eta[1:-1] + eta[2:])
        rm = 0.5 * (eta[1:-1] + eta[:-2])
        shape = (-1,) + (1,) * (u.ndim - 1)
        rp, rm, r = rp.reshape(shape), rm.reshape(shape), eta[1:-1].reshape(shape)
        out[1:-1] = (rp * (u[2:] - u[1:-1]) - rm * (u[1:-1] - u[:-2])) / (r * d * d)
    else:
        out[1:-1] = (u[2:] - 2 * u[1:-1] + u[:-2]) / (d * d)
    return out


def _d_tau(u, d):
    return (-np.roll(u, -2, -1) + 8 * np.roll(u, -1, -1)
            - 8 * np.roll(u, 1, -1) + np.roll(u, 2, -1)) / (12 * d)


def _d2_tau(u, d):
    return (-np.roll(u, -2, -1) + 16 * np.roll(u, -1, -1) - 30 * u
            + 16 * np.roll(u, 1, -1) - np.roll(u, 2, -1)) / (12 * d * d)


def _run(p: ExplicitProblem, n_eta: int, dt_max: float) -> list[np.ndarray]:
    eta, tau = _grids(p, n_eta)
    two_d = tau is not None
    col = eta.reshape(-1, 1) if two_d else eta
    d_tau = tau[1] if two_d else None
    pot = None if p.potential is None else np.asarray(p.potential(eta), float)
    m = None
    if two_d:
        m = np.ones_like(eta) if p.tau_weight is None else np.asarray(p.tau_weight(eta), float)
        m = m.reshape(-1, 1)
        if pot is not None:
            pot = pot.reshape(-1, 1)
    if two_d:
        u = np.asarray(p.initial(tau[None, :], col), dtype=float) * np.ones((n_eta, tau.size))
    else:
        u = np.asarray(p.initial(eta), dtype=float) * np.ones(n_eta)
    snaps = [u.copy()]
    times = np.asarray(p.sample_times, dtype=float)
    for t0, t1 in zip(times[:-1], times[1:]):
        nsub = max(1, int(math.ceil((t1 - t0) / dt_max * (1 + 1e-12))))
        dt = (t1 - t0) / nsub
        for s in range(nsub):
            t = t0 + s * dt
            rhs = _laplacian_eta(u, eta, p.radial)
            if pot is not None:
                rhs = rhs + pot * u
            if two_d:
                rhs = rhs + m * _d2_tau(u, d_tau)
            rhs = p.eps * rhs
            if two_d and p.drift is not None:
                rhs = rhs - np.asarray(p.drift(eta, t), float).reshape(-1, 1) * _d_tau(u, d_tau)
            if p.forcing is not None:
                rhs = rhs + (p.forcing(tau[None, :], col, t) if two_d else p.forcing(eta, t))
            u = u + dt * rhs
            tn = t0 + (s + 1) * dt if s < nsub - 1 else t1
            if two_d:
                u[0] = p.bc_lo(tau, tn)
                u[-1] = p.bc_hi(tau, tn)
            else:
                u[0] = p.bc_lo(None, tn)
                u[-1] = p.bc_hi(None, tn)
        snaps.append(u.copy())
    return snaps


def explicit_reference_solver(p: ExplicitProblem, dt: float | None = None,
                              richardson: bool = False) -> Trajectory:
    """Forward-Euler, centered-difference reference solution.

    Parameters
    ----------
    p : ExplicitProblem
        Problem on a uniform ``eta`` grid (at most 128**2 nodes in 2D is the
        intended scale).
    dt : float, optional
        Maximal step.  If given it must satisfy :func:`stable_dt`; otherwise
        the solver refuses.  Defaults to ``0.9 * stable_dt``.
    richardson : bool
        Also solve on the grid with halved ``eta`` spacing (and quartered
        step) and return ``(4 u_fine - u_coarse) / 3`` at the coarse nodes,
        which cancels the leading ``O(d_eta**2 + dt)`` error.

    Returns
    -------
    Trajectory
        Snapshots (ScalarField1D or ScalarField2D on the uniform grid) at
        ``p.sample_times``.
    """
    limit = stable_dt(p)
    if dt is None:
        dt = 0.9 * limit
    elif dt > limit * (1 + 1e-12):
        raise OracleStabilityError(
            f"dt={dt:.3e} violates the explicit stability bound {limit:.3e}")
    snaps = _run(p, p.n_eta, dt)
    if richardson:
        n_fine = 2 * p.n_eta - 1
        fine = _run(p, n_fine, min(dt / 4, 0.9 * stable_dt(p, n_fine)))
        snaps = [(4 * f[::2] - c) / 3 for f, c in zip(fine, snaps)]
    axis = uniform_axis(p.eta_lo, p.eta_hi, p.n_eta)
    times = np.asarray(p.sample_times, dtype=float)
    grid = TimeGrid(times, float(times[-1]), 1)
    if p.n_tau is None:
        fields = tuple(ScalarField1D(axis, s) for s in snaps)
    else:
        pax = PeriodicAxis(p.n_tau, p.period)
        fields = tuple(ScalarField2D(pax, axis, s) for s in snaps)
    return Trajectory(grid, fields, {"dt": dt, "richardson": richardson})
