"""Norms, rate fits, viscosity sweeps, vortex-sheet pairings and bound checks.

Everything here turns solver trajectories into numbers and verdicts:

* :func:`lp_norm` realizes the discrete ``L^p`` norms (plain measure for the
  channel, ``r dr dphi`` for the pipe) including the trivial third-direction
  factor through ``extent``;
* :func:`convergence_sweep` runs the viscous, Euler, corrector and remainder
  solves for every viscosity and records the norm series, and
  :func:`fit_rate` turns each series into an empirical exponent;
* :func:`vortex_sheet_pairing` measures how far the vorticity defect is from
  the wall vortex sheet, and :func:`uniform_l1_check` checks the uniform
  ``L1`` bound on the vorticity;
* :func:`halfstrip_scaled_norms` forms the scaled ``L^p`` quantities of the
  half-strip estimates.

``L_inf(0, T; X)`` norms are the maximum over the sampled times.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .mesh import ScalarField1D, ScalarField2D, Trajectory, graded_derivative, periodic_derivative

__all__ = [
    "DegenerateSeriesError",
    "NormSeries",
    "RateFit",
    "ConvergenceTable",
    "BoundsReport",
    "SheetPairing",
    "GridSettings",
    "EXPECTED_RATES",
    "DEFAULT_EPS",
    "lp_norm",
    "fit_rate",
    "convergence_sweep",
    "vortex_sheet_pairing",
    "sheet_gap_summary",
    "uniform_l1_check",
    "halfstrip_scaled_norms",
    "channel_preset",
    "pipe_preset",
    "data_hash",
]

DEFAULT_EPS = (1e-2, 3.16e-3, 1e-3, 3.16e-4, 1e-4)

# Target exponent and tolerance of each fitted series, per case.
EXPECTED_RATES = {
    "channel": {
        "v_LinfL2": (1.0, 0.15),
        "omega3_LinfL2": (1.0, 0.15),
        "omega2_LinfL2": (0.75, 0.12),
        "omega1_LinfL2": (0.25, 0.10),
        "vvl_LinfL2": (0.25, 0.08),
    },
    "pipe": {
        "v_LinfL2": (0.75, 0.12),
        "omega_r_LinfL2": (0.75, 0.12),
        "omega_phi_LinfL2": (0.25, 0.10),
        "omega_x_LinfL2": (0.25, 0.10),
        "vvl_LinfL2": (0.25, 0.08),
        "pressure_LinfL1": (0.25, 0.10),
    },
    "csf": {
        "v_LinfL2": (0.75, 0.12),
        "omega_x_LinfL2": (0.25, 0.10),
        "vvl_LinfL2": (0.25, 0.08),
        "pressure_LinfL1": (0.25, 0.10),
    },
}


class DegenerateSeriesError(ValueError):
    """Raised when a series cannot be fitted on a log-log scale."""


# --------------------------------------------------------------------------
# Result types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class NormSeries:
    """One norm evaluated along a viscosity sweep.

    Parameters
    ----------
    norm_id : str
        Name of the norm, e.g. ``"v_LinfL2"`` for ``||v||_{L_inf(0,T;L2)}``.
    values : tuple of float
        One value per viscosity, nonnegative and finite.
    eps_list : tuple of float
        Strictly decreasing viscosities.
    """

    norm_id: str
    values: tuple
    eps_list: tuple

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        eps = tuple(float(e) for e in self.eps_list)
        if len(values) != len(eps):
            raise ValueError("one value per viscosity is required")
        if not all(math.isfinite(v) and v >= 0 for v in values):
            raise ValueError(f"{self.norm_id}: values must be finite and nonnegative")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("eps_list must be strictly decreasing")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "eps_list", eps)


@dataclass(frozen=True)
class RateFit:
    """Least-squares power law ``value ~ exp(intercept) eps**slope``.

    ``residual`` is the largest relative deviation of a value from the fitted
    line.  Degenerate series carry NaN entries and ``degenerate = True``.
    """

    norm_id: str
    slope: float
    intercept: float
    residual: float
    n_points: int
    degenerate: bool = False

    def within(self, target: float, tol: float) -> bool:
        return (not self.degenerate) and abs(self.slope - target) <= tol


@dataclass(frozen=True)
class BoundsReport:
    """Comparison ``lhs <= rhs (1 + slack)`` at a list of points.

    The points are sample times for the vorticity bounds and viscosities
    for the uniform ``L1`` check; ``point_label`` says which.
    """

    bound_id: str
    points: tuple
    lhs: tuple
    rhs: tuple
    slack: float
    verdict: bool
    point_label: str = "t"
    info: dict = field(default_factory=dict)

    @classmethod
    def build(cls, bound_id: str, points, lhs, rhs, slack: float, info: Optional[dict] = None,
              point_label: str = "t") -> "BoundsReport":
        lhs = tuple(float(v) for v in lhs)
        rhs = tuple(float(v) for v in rhs)
        if len(lhs) != len(rhs) or len(lhs) != len(points):
            raise ValueError("lhs, rhs and points must have equal lengths")
        verdict = all(a <= b * (1.0 + slack) for a, b in zip(lhs, rhs))
        return cls(bound_id, tuple(float(p) for p in points), lhs, rhs, float(slack), verdict,
                   point_label, dict(info or {}))

    @property
    def worst_ratio(self) -> float:
        """Largest ``lhs / rhs`` over the points (0 when every ``rhs`` is 0 and ``lhs`` is 0)."""
        ratios = [a / b if b > 0 else (math.inf if a > 0 else 0.0) for a, b in zip(self.lhs, self.rhs)]
        return max(ratios) if ratios else 0.0


@dataclass
class ConvergenceTable:
    """Norm series, rate fits and diagnostics of one sweep.

    ``runs`` keeps the per-viscosity grids and trajectories for further
    post-processing (pairings, bound checks); it is not serialized.
    """

    case: str
    series: tuple
    fits: tuple
    metadata: dict
    diagnostics: dict = field(default_factory=dict)
    runs: dict = field(default_factory=dict, repr=False)

    def get_series(self, norm_id: str) -> NormSeries:
        for s in self.series:
            if s.norm_id == norm_id:
                return s
        raise KeyError(norm_id)

    def get_fit(self, norm_id: str) -> RateFit:
        for f in self.fits:
            if f.norm_id == norm_id:
                return f
        raise KeyError(norm_id)

    def rows(self):
        """``(eps, norm_id, value)`` rows, viscosities in descending order."""
        out = []
        eps_list = self.series[0].eps_list if self.series else ()
        for k, eps in enumerate(eps_list):
            for s in self.series:
                out.append((eps, s.norm_id, s.values[k]))
        return out


@dataclass(frozen=True)
class SheetPairing:
    """Vorticity defect paired with a test function, and the sheet term.

    ``gap = defect - sheet`` at each sampled time.
    """

    times: tuple
    defect: tuple
    sheet: tuple
    gap: tuple

    @property
    def max_gap(self) -> float:
        """Largest ``|gap|`` over the sampled times after ``t = 0``."""
        return max(abs(g) for t, g in zip(self.times, self.gap) if t > 0)

    @property
    def max_sheet(self) -> float:
        return max(abs(s) for t, s in zip(self.times, self.sheet) if t > 0)


@dataclass(frozen=True)
class GridSettings:
    """Resolution of the per-viscosity grids of a sweep.

    ``n_wall`` is the number of coarse wall-normal nodes, ``refine`` the
    nesting factor of the one-dimensional fine grids.
    """

    n_wall: int = 1025
    n_periodic: int = 8
    n_steps: int = 2048
    n_samples: int = 33
    refine: int = 4

    def channel(self, problem, eps: float):
        from .channel import channel_grids

        return channel_grids(problem, eps, n_z=self.n_wall, n_x=self.n_periodic,
                             n_steps=self.n_steps, n_samples=self.n_samples, refine=self.refine)

    def pipe(self, problem, eps: float):
        from .pipe import pipe_grids

        return pipe_grids(problem, eps, n_r=self.n_wall, n_phi=self.n_periodic,
                          n_steps=self.n_steps, n_samples=self.n_samples, refine=self.refine)


# --------------------------------------------------------------------------
# Norms and fits
# --------------------------------------------------------------------------

def _graded_weights(axis, measure: str) -> np.ndarray:
    if measure == "plain":
        return np.asarray(axis.weights)
    if measure == "radial":
        return np.asarray(axis.weights) * axis.nodes
    raise ValueError(f"unknown measure {measure!r}")


def lp_norm(fld, p, measure: str = "plain", extent: float = 1.0) -> float:
    """Discrete ``L^p`` norm of a sampled field.

    Parameters
    ----------
    fld : ScalarField1D or ScalarField2D
    p : {1, 2, inf}
    measure : {"plain", "radial"}
        ``"radial"`` weights the bounded direction by ``r``.
    extent : float
        Size of the directions the field does not depend on (for example
        ``L`` for a channel field of ``(x, z)``); multiplies the integral.

    Returns
    -------
    float
        ``(extent int |f|**p)**(1/p)`` by trapezoidal quadrature, or
        ``max |f|`` over the nodes for ``p = inf``.
    """
    if not isinstance(fld, (ScalarField1D, ScalarField2D)):
        raise TypeError("lp_norm expects a ScalarField1D or ScalarField2D")
    if p in (math.inf, np.inf, "inf"):
        return float(np.max(np.abs(fld.values))) if fld.values.size else 0.0
    if p not in (1, 2):
        raise ValueError(f"unsupported p = {p!r}")
    a = np.abs(fld.values) ** p
    if isinstance(fld, ScalarField2D):
        w = _graded_weights(fld.axis, measure)
        total = float(w @ a.sum(axis=1)) * fld.periodic_axis.spacing
    else:
        total = float(_graded_weights(fld.axis, measure) @ a)
    return (extent * total) ** (1.0 / p)


def fit_rate(series: NormSeries) -> RateFit:
    """Least-squares fit of ``log value`` against ``log eps``.

    Raises
    ------
    DegenerateSeriesError
        With fewer than three points or a nonpositive value.
    """
    eps = np.asarray(series.eps_list)
    vals = np.asarray(series.values)
    if vals.size < 3:
        raise DegenerateSeriesError(f"{series.norm_id}: at least three points are needed")
    if np.any(vals <= 0):
        raise DegenerateSeriesError(f"{series.norm_id}: nonpositive value in the series")
    x, y = np.log(eps), np.log(vals)
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.max(np.abs(np.exp(y - (slope * x + intercept)) - 1.0)))
    return RateFit(series.norm_id, float(slope), float(intercept), resid, int(vals.size))


def _safe_fit(series: NormSeries) -> RateFit:
    try:
        return fit_rate(series)
    except DegenerateSeriesError:
        return RateFit(series.norm_id, math.nan, math.nan, math.nan, len(series.values), True)


# --------------------------------------------------------------------------
# Per-viscosity norm evaluation
# --------------------------------------------------------------------------

def _restrict(values_fine: np.ndarray, stride: int) -> np.ndarray:
    return values_fine[::stride]


def _channel_norms(p, grids, viscous, euler, remainder) -> dict:
    from .channel import channel_vorticity

    L = p.L
    e2, e1 = L, L * L  # y (and x) extents of 2D and 1D fields

    def l2sq(f, ext):
        return lp_norm(f, 2, extent=ext) ** 2

    v_sq, om = [], {"omega1": [], "omega2": [], "omega3": []}
    omega_tot, h1 = [], []
    for st in remainder:
        w1, w2, w3 = channel_vorticity(st)
        a = l2sq(st.u1, e1) + l2sq(st.u2, e2)
        b1, b2, b3 = l2sq(w1, e2), l2sq(w2, e1), l2sq(w3, e2)
        v_sq.append(a)
        om["omega1"].append(b1)
        om["omega2"].append(b2)
        om["omega3"].append(b3)
        omega_tot.append(b1 + b2 + b3)
        # grad v = (dv1/dz, dv2/dx, dv2/dz): same squares as the vorticity
        h1.append(a + b1 + b2 + b3)
    vvl, curl_l1, curl_l2 = [], [], []
    for sv, se in zip(viscous, euler):
        d1 = ScalarField1D(sv.u1.axis, sv.u1.values - se.u1.values)
        d2 = ScalarField2D(sv.u2.periodic_axis, sv.u2.axis, sv.u2.values - se.u2.values)
        vvl.append(l2sq(d1, e1) + l2sq(d2, e2))
        w1, w2, w3 = channel_vorticity(sv)
        w2c = _restrict(w2.values, grids.stride)
        mag = np.sqrt(w1.values ** 2 + w2c[:, None] ** 2 + w3.values ** 2)
        curl_l1.append(lp_norm(ScalarField2D(w1.periodic_axis, w1.axis, mag), 1, extent=e2))
        curl_l2.append(math.sqrt(l2sq(w1, e2) + l2sq(w2, e1) + l2sq(w3, e2)))
    out = {
        "v_LinfL2": math.sqrt(max(v_sq)),
        "omega1_LinfL2": math.sqrt(max(om["omega1"])),
        "omega2_LinfL2": math.sqrt(max(om["omega2"])),
        "omega3_LinfL2": math.sqrt(max(om["omega3"])),
        "omega_LinfL2": math.sqrt(max(omega_tot)),
        "v_LinfH1": math.sqrt(max(h1)),
        "vvl_LinfL2": math.sqrt(max(vvl)),
        "curl_u_LinfL1": max(curl_l1),
        "curl_u_LinfL2": max(curl_l2),
    }
    return out


def _pipe_norms(p, grids, viscous, euler, remainder) -> dict:
    from .pipe import pipe_vorticity

    L = p.axial_period
    e2, e1 = L, 2.0 * math.pi * L

    def l2sq(f, ext):
        return lp_norm(f, 2, measure="radial", extent=ext) ** 2

    v_sq, o_phi, o_x, o_r, h1 = [], [], [], [], []
    for st in remainder:
        w_phi, w_x, w_r = pipe_vorticity(st)
        a = l2sq(st.uphi, e1) + l2sq(st.ux, e2)
        b_phi, b_x, b_r = l2sq(w_phi, e2), l2sq(w_x, e1), l2sq(w_r, e2)
        r1 = st.uphi.axis.nodes
        # grad v: d v_phi/dr, v_phi/r, d v_x/dr, (1/r) d v_x/dphi
        g_phi = ScalarField1D(st.uphi.axis, graded_derivative(st.uphi.values, r1))
        g_hoop = ScalarField1D(st.uphi.axis, st.uphi.values / r1)
        grad_sq = l2sq(g_phi, e1) + l2sq(g_hoop, e1) + b_phi + b_r
        v_sq.append(a)
        o_phi.append(b_phi)
        o_x.append(b_x)
        o_r.append(b_r)
        h1.append(a + grad_sq)
    vvl, press, curl_l1, curl_l2 = [], [], [], []
    for sv, se in zip(viscous, euler):
        d1 = ScalarField1D(sv.uphi.axis, sv.uphi.values - se.uphi.values)
        d2 = ScalarField2D(sv.ux.periodic_axis, sv.ux.axis, sv.ux.values - se.ux.values)
        vvl.append(l2sq(d1, e1) + l2sq(d2, e2))
        # r dp/dr = u_phi**2 for the recovered pressure
        dp = ScalarField1D(sv.uphi.axis, sv.uphi.values ** 2 - se.uphi.values ** 2)
        press.append(lp_norm(dp, 1, measure="radial", extent=e1))
        w_phi, w_x, w_r = pipe_vorticity(sv)
        wxc = _restrict(w_x.values, grids.stride)
        mag = np.sqrt(w_phi.values ** 2 + wxc[:, None] ** 2 + w_r.values ** 2)
        curl_l1.append(lp_norm(ScalarField2D(w_phi.periodic_axis, w_phi.axis, mag), 1,
                               measure="radial", extent=e2))
        curl_l2.append(math.sqrt(l2sq(w_phi, e2) + l2sq(w_x, e1) + l2sq(w_r, e2)))
    return {
        "v_LinfL2": math.sqrt(max(v_sq)),
        "omega_phi_LinfL2": math.sqrt(max(o_phi)),
        "omega_x_LinfL2": math.sqrt(max(o_x)),
        "omega_r_LinfL2": math.sqrt(max(o_r)),
        "omega_LinfL2": math.sqrt(max(np.add(np.add(o_phi, o_x), o_r))),
        "v_LinfH1": math.sqrt(max(h1)),
        "vvl_LinfL2": math.sqrt(max(vvl)),
        "pressure_LinfL1": max(press),
        "curl_u_LinfL1": max(curl_l1),
        "curl_u_LinfL2": max(curl_l2),
    }


def _run_one(case: str, problem, eps: float, grids_policy: Callable, keep: bool):
    """Viscous, Euler, corrector and remainder solves for one viscosity."""
    grids = grids_policy(problem, eps)
    if case == "channel":
        from .channel import (build_channel_corrector, channel_remainder, solve_channel_euler,
                              solve_channel_viscous)

        viscous = solve_channel_viscous(problem, eps, grids)
        euler = solve_channel_euler(problem, grids)
        corr = build_channel_corrector(problem, euler, eps, grids)
        rem = channel_remainder(viscous, euler, corr)
        norms = _channel_norms(problem, grids, viscous, euler, rem)
    else:
        from .pipe import build_pipe_corrector, pipe_remainder, solve_pipe_euler, solve_pipe_viscous

        viscous = solve_pipe_viscous(problem, eps, grids)
        euler = solve_pipe_euler(problem, grids)
        corr = build_pipe_corrector(problem, euler, eps, grids)
        rem = pipe_remainder(viscous, euler, corr)
        norms = _pipe_norms(problem, grids, viscous, euler, rem)
    run = {"grids": grids, "viscous": viscous, "euler": euler} if keep else {}
    meta = {k: viscous.metadata[k] for k in ("resolution_warning",) if k in viscous.metadata}
    return norms, run, meta


def convergence_sweep(case: str, problem, eps_list: Sequence[float] = DEFAULT_EPS,
                      grids_policy: Optional[Callable] = None, threads: int = 1,
                      keep_trajectories: bool = False) -> ConvergenceTable:
    """Solve one problem for every viscosity and fit the norm series.

    Parameters
    ----------
    case : {"channel", "pipe", "csf"}
        ``"csf"`` is the pipe solver applied to circularly symmetric data.
    problem : ChannelProblem or PipeProblem
    eps_list : sequence of float
        Strictly decreasing, at least four entries.
    grids_policy : callable, optional
        ``grids_policy(problem, eps) -> grids``; defaults to
        :class:`GridSettings` with its default resolution.
    threads : int
        Worker threads; viscosities are solved independently and the table
        is assembled in the order of ``eps_list``, so the result does not
        depend on this number.
    keep_trajectories : bool
        Store grids and viscous/Euler trajectories in ``table.runs``.

    Returns
    -------
    ConvergenceTable
        A viscosity whose solve raises is left out of the series and its
        error message recorded in ``diagnostics``.
    """
    if case not in ("channel", "pipe", "csf"):
        raise ValueError(f"unknown case {case!r}")
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 4 or any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing with at least four entries")
    settings = GridSettings()
    if grids_policy is None:
        grids_policy = settings.channel if case == "channel" else settings.pipe
    solver_case = "channel" if case == "channel" else "pipe"

    def job(eps):
        try:
            return _run_one(solver_case, problem, eps, grids_policy, keep_trajectories)
        except Exception as exc:  # recorded per viscosity, the sweep goes on
            return exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, eps_list))
    else:
        results = [job(e) for e in eps_list]

    done_eps, norms_list, diagnostics, runs, warnings = [], [], {}, {}, {}
    for eps, res in zip(eps_list, results):
        if isinstance(res, Exception):
            diagnostics[eps] = f"{type(res).__name__}: {res}"
            continue
        norms, run, meta = res
        done_eps.append(eps)
        norms_list.append(norms)
        if run:
            runs[eps] = run
        if meta:
            warnings[eps] = meta
    series, fits = [], []
    if norms_list:
        for norm_id in norms_list[0]:
            s = NormSeries(norm_id, tuple(n[norm_id] for n in norms_list), tuple(done_eps))
            series.append(s)
            fits.append(_safe_fit(s))
    metadata = {"eps_list": eps_list, "T": problem.T, "data_hash": data_hash(problem),
                "problem": problem.name}
    if warnings:
        metadata["warnings"] = warnings
    return ConvergenceTable(case, tuple(series), tuple(fits), metadata, diagnostics, runs)


# --------------------------------------------------------------------------
# Vortex sheet
# --------------------------------------------------------------------------

def _resample_rows(values: np.ndarray, n: int) -> np.ndarray:
    """Band-limited interpolation of periodic rows (last axis) onto ``n`` points."""
    m = values.shape[-1]
    c = np.fft.rfft(values, axis=-1)
    out = np.zeros(values.shape[:-1] + (n // 2 + 1,), dtype=complex)
    k = min(c.shape[-1], out.shape[-1])
    out[..., :k] = c[..., :k]
    if m % 2 == 0 and k == m // 2 + 1 and n > m:
        out[..., k - 1] *= 0.5  # split the Nyquist mode symmetrically
    return np.fft.irfft(out, n=n, axis=-1) * (n / m)


def vortex_sheet_pairing(viscous: Trajectory, euler: Trajectory, testfn: Callable,
                         geometry: str, n_fine: int = 256) -> SheetPairing:
    """Pair the vorticity defect with a test function and subtract the sheet term.

    Parameters
    ----------
    viscous, euler : Trajectory
        Viscous and Euler states on the same grids and sample times.
    testfn : callable
        Channel: ``testfn(x, z) -> (psi1, psi2, psi3)``; pipe:
        ``testfn(phi, r) -> (psi_phi, psi_x, psi_r)``.  Arguments broadcast as
        a row (periodic coordinate) against a column (wall-normal).
    geometry : {"channel", "pipe"}
    n_fine : int
        Points of the periodic quadrature used for the wall integrals and the
        periodic average of the one-dimensional component.

    Returns
    -------
    SheetPairing
        ``defect = <curl u_eps - curl u_0, psi>`` over the domain and
        ``sheet = int_wall (u_0 x n) . psi dS`` with the Euler trace at the
        same time; the third direction contributes the factor ``L`` to both.
    """
    if len(viscous) != len(euler) or not np.allclose(viscous.times, euler.times):
        raise ValueError("trajectories are not aligned in time")
    if geometry == "channel":
        return _channel_sheet(viscous, euler, testfn, n_fine)
    if geometry == "pipe":
        return _pipe_sheet(viscous, euler, testfn, n_fine)
    raise ValueError(f"unknown geometry {geometry!r}")


def _psi(testfn, s_row, w_col):
    comps = testfn(s_row, w_col)
    if len(comps) != 3:
        raise ValueError("the test function must return three components")
    shape = (np.size(w_col), np.size(s_row))
    return [np.asarray(c, dtype=float) * np.ones(shape) for c in comps]


def _channel_sheet(viscous, euler, testfn, n_fine):
    from .channel import channel_vorticity

    st0 = viscous[0]
    xax, zax, z1ax = st0.u2.periodic_axis, st0.u2.axis, st0.u1.axis
    L = xax.period
    h = zax.domain[1]
    x, z, z1 = xax.nodes, zax.nodes, z1ax.nodes
    xf = np.arange(n_fine) * (L / n_fine)
    dxf = L / n_fine
    psi1, _, psi3 = _psi(testfn, x[None, :], z[:, None])
    _, psi2f, _ = _psi(testfn, xf[None, :], z1[:, None])
    psi2_bar = psi2f.sum(axis=1) * dxf
    walls = _psi(testfn, xf[None, :], np.array([[0.0], [h]]))

    def pair(state):
        w1, w2, w3 = channel_vorticity(state)
        two = float(zax.weights @ (w1.values * psi1 + w3.values * psi3).sum(axis=1)) * xax.spacing
        one = float(z1ax.weights @ (w2.values * psi2_bar))
        return L * (two + one)

    times, defect, sheet, gap = [], [], [], []
    for sv, se in zip(viscous, euler):
        d = pair(sv) - pair(se)
        u2w = _resample_rows(se.u2.values[[0, -1]], n_fine)
        u1w = se.u1.values[[0, -1]]
        # u_0 x n with n = (0, 0, -1) at z = 0 and (0, 0, 1) at z = h
        lo = -u2w[0] * walls[0][0] + u1w[0] * walls[1][0]
        hi = u2w[1] * walls[0][1] - u1w[1] * walls[1][1]
        s = L * float((lo + hi).sum() * dxf)
        times.append(float(sv.t))
        defect.append(d)
        sheet.append(s)
        gap.append(d - s)
    return SheetPairing(tuple(times), tuple(defect), tuple(sheet), tuple(gap))


def _pipe_sheet(viscous, euler, testfn, n_fine):
    from .pipe import pipe_vorticity

    st0 = viscous[0]
    pax, rax, r1ax = st0.ux.periodic_axis, st0.ux.axis, st0.uphi.axis
    r, r1 = rax.nodes, r1ax.nodes
    rL, rR = rax.domain
    L = 1.0  # the axial factor multiplies defect and sheet alike
    phf = np.arange(n_fine) * (2.0 * math.pi / n_fine)
    dphf = 2.0 * math.pi / n_fine
    psi_phi, _, psi_r = _psi(testfn, pax.nodes[None, :], r[:, None])
    _, psi_xf, _ = _psi(testfn, phf[None, :], r1[:, None])
    psi_x_bar = psi_xf.sum(axis=1) * dphf
    walls = _psi(testfn, phf[None, :], np.array([[rL], [rR]]))

    def pair(state):
        w_phi, w_x, w_r = pipe_vorticity(state)
        two = float((rax.weights * r) @ (w_phi.values * psi_phi + w_r.values * psi_r).sum(axis=1))
        one = float((r1ax.weights * r1) @ (w_x.values * psi_x_bar))
        return L * (two * pax.spacing + one)

    times, defect, sheet, gap = [], [], [], []
    for sv, se in zip(viscous, euler):
        d = pair(sv) - pair(se)
        uxw = _resample_rows(se.ux.values[[0, -1]], n_fine)
        uphw = se.uphi.values[[0, -1]]
        # u_0 x n with n = -e_r at rL and +e_r at rR; e_phi x e_r = -e_x, e_x x e_r = e_phi
        lo = rL * (-uxw[0] * walls[0][0] + uphw[0] * walls[1][0])
        hi = rR * (uxw[1] * walls[0][1] - uphw[1] * walls[1][1])
        s = L * float((lo + hi).sum() * dphf)
        times.append(float(sv.t))
        defect.append(d)
        sheet.append(s)
        gap.append(d - s)
    return SheetPairing(tuple(times), tuple(defect), tuple(sheet), tuple(gap))


def sheet_gap_summary(pairings: Sequence[SheetPairing]) -> dict:
    """Gap trend along a sweep (pairings ordered by decreasing viscosity).

    Returns the largest gaps, the number of increases between consecutive
    viscosities, and the final gap relative to the sheet magnitude.
    """
    gaps = [pp.max_gap for pp in pairings]
    inversions = sum(1 for a, b in zip(gaps, gaps[1:]) if b > a)
    final_sheet = pairings[-1].max_sheet
    rel = gaps[-1] / final_sheet if final_sheet > 0 else (0.0 if gaps[-1] == 0 else math.inf)
    return {"gaps": gaps, "inversions": inversions, "final_relative_gap": rel,
            "final_sheet": final_sheet}


# --------------------------------------------------------------------------
# Uniform L1 vorticity bound
# --------------------------------------------------------------------------

def uniform_l1_check(table: ConvergenceTable) -> BoundsReport:
    """Uniform ``L_inf(0,T;L1)`` bound on the viscous vorticity along a sweep.

    The report compares each ``||curl u_eps||_{L_inf L1}`` with twice the
    smallest one, so the verdict is the ratio test ``max / min < 2`` (up to
    equality).  ``info`` carries the ratio and the fitted slope of the
    contrasting ``L_inf L2`` series.
    """
    s1 = table.get_series("curl_u_LinfL1")
    s2 = table.get_series("curl_u_LinfL2")
    if len(s1.values) < 3:
        raise ValueError("at least three viscosities are needed")
    lo, hi = min(s1.values), max(s1.values)
    ratio = 1.0 if hi == 0 else (math.inf if lo == 0 else hi / lo)
    fit2 = _safe_fit(s2)
    info = {"ratio": ratio, "l2_slope": fit2.slope, "l2_fit_degenerate": fit2.degenerate}
    return BoundsReport.build("uniform_l1_vorticity", s1.eps_list, s1.values,
                              [2.0 * lo] * len(s1.values), 0.0, info, point_label="eps")


# --------------------------------------------------------------------------
# Half-strip estimates
# --------------------------------------------------------------------------

def halfstrip_scaled_norms(traj: Trajectory, eps: float) -> dict:
    """Scaled ``L_inf(0,T;.)`` norms of a half-strip solution.

    Returns ``eps**(-1/(2p)) ||Psi||_{L^p}`` for ``p = 1, 2, inf``,
    ``||dPsi/deta||_{L1}`` and ``eps**(1/4) ||dPsi/deta||_{L2}``; each should
    stay bounded as ``eps -> 0``.
    """
    out = {"psi_L1": 0.0, "psi_L2": 0.0, "psi_Linf": 0.0, "dpsi_L1": 0.0, "dpsi_L2": 0.0}
    for f in traj:
        d = ScalarField2D(f.periodic_axis, f.axis, graded_derivative(f.values, f.axis.nodes, axis=0))
        out["psi_L1"] = max(out["psi_L1"], lp_norm(f, 1) * eps ** -0.5)
        out["psi_L2"] = max(out["psi_L2"], lp_norm(f, 2) * eps ** -0.25)
        out["psi_Linf"] = max(out["psi_Linf"], lp_norm(f, math.inf))
        out["dpsi_L1"] = max(out["dpsi_L1"], lp_norm(d, 1))
        out["dpsi_L2"] = max(out["dpsi_L2"], lp_norm(d, 2) * eps ** 0.25)
    return out


# --------------------------------------------------------------------------
# Presets
# --------------------------------------------------------------------------

def channel_preset(name: str = "reference", T: float = 0.25):
    """Channel problems on ``h = L = 1``.

    ``"reference"`` has ill-prepared data ``g1 = 1 - 2 z**2`` and
    ``g2 = (1 + cos 2 pi x)(1 + z - z**2)`` (nonzero wall traces, so the
    boundary layer is active); ``"compatible"`` has ``g1 = sin(pi z)`` and
    ``g2 = cos(2 pi x) sin(pi z)`` (vanishing traces); ``"zero"`` is zero.
    """
    from .channel import ChannelProblem

    if name == "reference":
        return ChannelProblem(lambda z: 1.0 - 2.0 * z ** 2,
                              lambda x, z: (1.0 + np.cos(2 * np.pi * x)) * (1.0 + z - z ** 2),
                              T=T, name="channel-reference")
    if name == "compatible":
        return ChannelProblem(lambda z: np.sin(np.pi * z),
                              lambda x, z: np.cos(2 * np.pi * x) * np.sin(np.pi * z),
                              T=T, name="channel-compatible")
    if name == "zero":
        return ChannelProblem(lambda z: np.zeros_like(np.asarray(z, dtype=float)),
                              lambda x, z: 0.0 * x * z, T=T, name="channel-zero")
    raise ValueError(f"unknown channel preset {name!r}")


def pipe_preset(name: str = "reference", T: float = 0.25):
    """Pipe problems in the annulus ``1 < r < 3``.

    ``"reference"``: ``u0phi = 1 - 2 s**2`` and
    ``u0x = (1 + cos phi)(1 + s - s**2)`` with ``s = (r - 1)/2``;
    ``"csf"``: rigid rotation ``u0phi = r``, ``u0x = 0``; ``"zero"``: zero.
    """
    from .pipe import PipeProblem

    rL, rR = 1.0, 3.0

    def s(r):
        return (np.asarray(r, dtype=float) - rL) / (rR - rL)

    if name == "reference":
        return PipeProblem(lambda r: 1.0 - 2.0 * s(r) ** 2,
                           lambda ph, r: (1.0 + np.cos(ph)) * (1.0 + s(r) - s(r) ** 2),
                           rL=rL, rR=rR, T=T, name="pipe-reference")
    if name == "csf":
        return PipeProblem(lambda r: np.asarray(r, dtype=float) * 1.0, lambda ph, r: 0.0 * ph * r,
                           rL=rL, rR=rR, T=T, name="csf-rigid")
    if name == "zero":
        return PipeProblem(lambda r: np.zeros_like(np.asarray(r, dtype=float)),
                           lambda ph, r: 0.0 * ph * r, rL=rL, rR=rR, T=T, name="pipe-zero")
    raise ValueError(f"unknown pipe preset {name!r}")


def data_hash(problem, n: int = 64) -> str:
    """SHA-256 of the initial data sampled on a fixed grid (first 16 hex digits)."""
    h = hashlib.sha256()
    if hasattr(problem, "g1"):
        z = np.linspace(0.0, problem.h, n)
        x = np.arange(n) * (problem.L / n)
        arrays = [problem.g1(z) * np.ones(n), problem.g2(x[None, :], z[:, None]) * np.ones((n, n))]
        scalars = [problem.h, problem.L, problem.T]
    else:
        r = np.linspace(problem.rL, problem.rR, n)
        ph = np.arange(n) * (2 * np.pi / n)
        arrays = [problem.u0phi(r) * np.ones(n), problem.u0x(ph[None, :], r[:, None]) * np.ones((n, n))]
        scalars = [problem.rL, problem.rR, problem.T, problem.axial_period]
    for a in arrays:
        h.update(np.ascontiguousarray(np.asarray(a, dtype=np.float64)).tobytes())
    h.update(np.asarray(scalars, dtype=np.float64).tobytes())
    return h.hexdigest()[:16]
