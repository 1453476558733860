"""Grids, quadrature and field containers shared by every solver.

The wall-normal direction (channel height or pipe radius) is discretized by a
:class:`GradedAxis` whose nodes cluster near both endpoints, the periodic
direction (channel ``x`` or pipe ``phi``) by a uniform :class:`PeriodicAxis`,
and time by a front-loaded :class:`TimeGrid` with ``t_k = T (k / N)**2``.

Fields are stored as plain numpy arrays inside small frozen containers.  Two
dimensional fields use the layout ``values[j, i]`` with ``j`` the graded
(wall-normal) index and ``i`` the periodic index, so that a "row" is one
wall-normal level and periodic operations act along the last axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "InvalidDomainError",
    "GridMismatchError",
    "GradedAxis",
    "PeriodicAxis",
    "TimeGrid",
    "ScalarField1D",
    "ScalarField2D",
    "Trajectory",
    "build_graded_axis",
    "subsample_axis",
    "check_nested",
    "uniform_axis",
    "build_time_grid",
    "trapezoid_weights",
    "integrate",
    "periodic_shift",
    "periodic_derivative",
    "graded_derivative",
]


class InvalidDomainError(ValueError):
    """Raised for non-finite, inverted or otherwise unusable axis bounds."""


class GridMismatchError(ValueError):
    """Raised when fields or operators refer to incompatible grids."""


def trapezoid_weights(nodes: np.ndarray) -> np.ndarray:
    """Composite trapezoidal weights for an ordered set of nodes."""
    nodes = np.asarray(nodes, dtype=float)
    h = np.diff(nodes)
    w = np.zeros_like(nodes)
    w[:-1] += 0.5 * h
    w[1:] += 0.5 * h
    return w


@dataclass(frozen=True, eq=False)
class GradedAxis:
    """Wall-normal axis with nodes clustered toward both endpoints.

    Parameters
    ----------
    nodes : ndarray
        Strictly increasing coordinates with ``nodes[0] == lo`` and
        ``nodes[-1] == hi``.
    weights : ndarray
        Trapezoidal quadrature weights, positive, summing to ``hi - lo``.
    domain : tuple of float
        ``(lo, hi)``.
    grading : float
        Tanh stretching parameter ``beta`` (0 means uniform).  The same value
        is used at both endpoints, which keeps the axis mirror symmetric.
    """

    nodes: np.ndarray
    weights: np.ndarray
    domain: tuple[float, float]
    grading: float = 0.0

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        lo, hi = self.domain
        if nodes.ndim != 1 or nodes.size < 2:
            raise InvalidDomainError("a graded axis needs at least two nodes")
        if not np.all(np.isfinite(nodes)) or np.any(np.diff(nodes) <= 0):
            raise InvalidDomainError("nodes must be finite and strictly increasing")
        if nodes[0] != lo or nodes[-1] != hi:
            raise InvalidDomainError("first/last node must coincide with the domain ends")
        if weights.shape != nodes.shape or np.any(weights <= 0):
            raise InvalidDomainError("weights must be positive, one per node")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def length(self) -> float:
        return self.domain[1] - self.domain[0]

    @property
    def spacing(self) -> np.ndarray:
        """Cell widths ``nodes[i+1] - nodes[i]``."""
        return np.diff(self.nodes)

    def same_as(self, other: "GradedAxis") -> bool:
        return self is other or (
            self.n == other.n and np.array_equal(self.nodes, other.nodes)
        )


@dataclass(frozen=True, eq=False)
class PeriodicAxis:
    """Uniform periodic axis ``{k * period / n}``, endpoint excluded."""

    n: int
    period: float

    def __post_init__(self):
        if self.n < 4 or self.n % 2:
            raise InvalidDomainError("periodic axis needs an even node count >= 4")
        if not (np.isfinite(self.period) and self.period > 0):
            raise InvalidDomainError("period must be positive and finite")

    @property
    def spacing(self) -> float:
        return self.period / self.n

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n) * self.spacing

    @property
    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers ``2 pi k / period`` of the rfft modes."""
        return 2.0 * np.pi * np.arange(self.n // 2 + 1) / self.period

    def same_as(self, other: "PeriodicAxis") -> bool:
        return self.n == other.n and self.period == other.period


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Front-loaded time steps with a subset of sampled times.

    Attributes
    ----------
    times : ndarray
        All step times, ``times[0] = 0`` and ``times[-1] = T``.
    T : float
        Final time.
    sample_every : int
        Every ``sample_every``-th step time is a sample; the last step is
        always a sample because the step count is a multiple of it.
    """

    times: np.ndarray
    T: float
    sample_every: int = 1

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or times.size < 2:
            raise InvalidDomainError("a time grid needs at least two times")
        if times[0] != 0.0 or times[-1] != self.T:
            raise InvalidDomainError("time grid must start at 0 and end at T")
        dt = np.diff(times)
        if np.any(dt <= 0):
            raise InvalidDomainError("times must be strictly increasing")
        if np.any(np.diff(dt) < -1e-12 * self.T):
            raise InvalidDomainError("early steps must not exceed late steps")
        if self.sample_every < 1 or (times.size - 1) % self.sample_every:
            raise InvalidDomainError("step count must be a multiple of sample_every")
        times.setflags(write=False)
        object.__setattr__(self, "times", times)

    @property
    def n_steps(self) -> int:
        return self.times.size - 1

    @property
    def sample_indices(self) -> np.ndarray:
        return np.arange(0, self.times.size, self.sample_every)

    @property
    def sample_times(self) -> np.ndarray:
        return self.times[:: self.sample_every]


@dataclass(frozen=True, eq=False)
class ScalarField1D:
    """Values on the nodes of a :class:`GradedAxis`."""

    axis: GradedAxis
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.axis.n,):
            raise GridMismatchError(
                f"expected {self.axis.n} values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True, eq=False)
class ScalarField2D:
    """Values on ``GradedAxis x PeriodicAxis`` stored as ``values[j, i]``."""

    periodic_axis: PeriodicAxis
    axis: GradedAxis
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        shape = (self.axis.n, self.periodic_axis.n)
        if values.shape != shape:
            raise GridMismatchError(f"expected shape {shape}, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Snapshots of a solution at the sampled times of a :class:`TimeGrid`.

    ``snapshots`` may hold fields, states or plain arrays; ``metadata`` carries
    solver diagnostics such as resolution warnings.
    """

    time_grid: TimeGrid
    snapshots: tuple
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        snaps = tuple(self.snapshots)
        if len(snaps) != self.time_grid.sample_times.size:
            raise GridMismatchError(
                f"{len(snaps)} snapshots for {self.time_grid.sample_times.size} samples")
        object.__setattr__(self, "snapshots", snaps)

    @property
    def times(self) -> np.ndarray:
        return self.time_grid.sample_times

    def __len__(self) -> int:
        return len(self.snapshots)

    def __iter__(self):
        return iter(self.snapshots)

    def __getitem__(self, k):
        return self.snapshots[k]


def _tanh_profile(n: int, beta: float) -> np.ndarray:
    """Mirror-symmetric tanh stretching of ``[0, 1]`` with ``n`` nodes."""
    s = np.linspace(0.0, 1.0, n)
    if beta == 0.0:
        u = s.copy()
    else:
        u = 0.5 * (1.0 + np.tanh(beta * (2.0 * s - 1.0)) / np.tanh(beta))
    half = n // 2
    u[0] = 0.0
    u[n - half:] = 1.0 - u[:half][::-1]
    if n % 2:
        u[half] = 0.5
    return u


def build_graded_axis(lo: float, hi: float, n: int, layer_width: float,
                      min_layer_nodes: int = 8) -> GradedAxis:
    """Build a two-sided tanh-graded axis that resolves a wall layer.

    Parameters
    ----------
    lo, hi : float
        Domain ends, ``lo < hi``.
    n : int
        Node count, at least 8.
    layer_width : float
        Width of the wall layer that must be resolved at each end.  A width of
        at least ``(hi - lo) / 2`` is a request for a uniform axis.
    min_layer_nodes : int, optional
        Required node count inside ``[lo, lo + layer_width]`` (and the mirror
        interval at ``hi``), endpoint included.  Capped at ``n // 2``.

    Returns
    -------
    GradedAxis
        The axis with the smallest stretching parameter meeting the request,
        which keeps the spacing as even as the layer allows.
    """
    lo, hi, layer_width = float(lo), float(hi), float(layer_width)
    if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
        raise InvalidDomainError(f"invalid domain ({lo}, {hi})")
    if n < 8:
        raise InvalidDomainError("n must be at least 8")
    if not (np.isfinite(layer_width) and layer_width > 0):
        raise InvalidDomainError("layer_width must be positive and finite")
    length = hi - lo
    frac = layer_width / length
    target = min(min_layer_nodes, n // 2)

    def count(beta: float) -> int:
        return int(np.count_nonzero(_tanh_profile(n, beta) <= frac * (1 - 1e-9)))

    beta = 0.0
    if frac < 0.5 and count(0.0) < target:
        b_lo, b_hi = 0.0, 1.0
        while count(b_hi) < target:
            b_hi *= 2.0
            if b_hi > 1e3:
                raise InvalidDomainError("layer too thin for the requested node count")
        for _ in range(80):
            mid = 0.5 * (b_lo + b_hi)
            if count(mid) >= target:
                b_hi = mid
            else:
                b_lo = mid
        beta = b_hi
    u = _tanh_profile(n, beta)
    if np.any(np.diff(u) <= 1e-12):
        # The stretching needed to meet the request collapses nodes in floating point.
        raise InvalidDomainError("layer too thin for the requested node count")
    nodes = lo + length * u
    nodes[0], nodes[-1] = lo, hi
    return GradedAxis(nodes, trapezoid_weights(nodes), (lo, hi), beta)


def subsample_axis(axis: GradedAxis, stride: int) -> GradedAxis:
    """Every ``stride``-th node of ``axis`` (both ends kept), with its own weights."""
    stride = int(stride)
    if stride < 1 or (axis.n - 1) % stride:
        raise InvalidDomainError("stride must divide n - 1")
    nodes = axis.nodes[::stride].copy()
    return GradedAxis(nodes, trapezoid_weights(nodes), axis.domain, axis.grading)


def check_nested(fine: GradedAxis, coarse: GradedAxis, fine_time: "TimeGrid",
                 coarse_time: "TimeGrid") -> tuple[int, int]:
    """Validate a nested pair of axes and time grids.

    ``coarse`` must consist of every ``stride``-th node of ``fine``, every
    step of ``coarse_time`` must be a union of ``substeps`` consecutive steps
    of ``fine_time`` and the two time grids must share their sample times.

    Returns
    -------
    (stride, substeps) : tuple of int

    Raises
    ------
    GridMismatchError
    """
    if (fine.n - 1) % (coarse.n - 1):
        raise GridMismatchError("coarse axis is not a regular subsample of the fine axis")
    stride = (fine.n - 1) // (coarse.n - 1)
    if not np.array_equal(fine.nodes[::stride], coarse.nodes):
        raise GridMismatchError("coarse axis is not a regular subsample of the fine axis")
    if fine_time.n_steps % coarse_time.n_steps:
        raise GridMismatchError("coarse time grid is not a regular subset of the fine one")
    substeps = fine_time.n_steps // coarse_time.n_steps
    if not np.allclose(fine_time.times[::substeps], coarse_time.times, rtol=1e-13, atol=0.0):
        raise GridMismatchError("coarse time grid is not a regular subset of the fine one")
    if (fine_time.sample_times.shape != coarse_time.sample_times.shape
            or not np.allclose(fine_time.sample_times, coarse_time.sample_times, rtol=1e-13, atol=0.0)):
        raise GridMismatchError("the two time grids must share their sample times")
    return stride, substeps


def uniform_axis(lo: float, hi: float, n: int) -> GradedAxis:
    """Uniform axis on ``[lo, hi]`` with ``n`` nodes (zero grading)."""
    if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo or n < 2:
        raise InvalidDomainError(f"invalid uniform axis ({lo}, {hi}, {n})")
    nodes = np.linspace(lo, hi, n)
    return GradedAxis(nodes, trapezoid_weights(nodes), (float(lo), float(hi)), 0.0)


def build_time_grid(T: float, n_steps: int, n_samples: int = 33) -> TimeGrid:
    """Quadratically graded times ``t_k = T (k / N)**2``.

    ``n_steps`` must be a multiple of ``n_samples - 1``; samples then sit at
    ``T (j / (n_samples - 1))**2`` and include both endpoints.
    """
    if not (np.isfinite(T) and T > 0):
        raise InvalidDomainError("T must be positive")
    if n_samples < 2 or n_steps % (n_samples - 1):
        raise InvalidDomainError("n_steps must be a multiple of n_samples - 1")
    k = np.arange(n_steps + 1)
    times = T * (k / n_steps) ** 2
    times[-1] = T
    return TimeGrid(times, float(T), n_steps // (n_samples - 1))


def integrate(fld: ScalarField1D | ScalarField2D, measure: str = "plain",
              axis: GradedAxis | None = None) -> float:
    """Quadrature of a field over its grid.

    Parameters
    ----------
    fld : ScalarField1D or ScalarField2D
        Integrand.
    measure : {"plain", "radial"}
        ``plain`` uses the trapezoidal weights; ``radial`` multiplies each
        weight by the node coordinate (the ``r dr`` element).  In two
        dimensions the periodic direction contributes its uniform spacing.
    axis : GradedAxis, optional
        If given, must match the field's axis.
    """
    if axis is not None and not axis.same_as(fld.axis):
        raise GridMismatchError("field lives on a different axis")
    w = fld.axis.weights
    if measure == "radial":
        w = w * fld.axis.nodes
    elif measure != "plain":
        raise ValueError(f"unknown measure {measure!r}")
    if isinstance(fld, ScalarField2D):
        return float(fld.periodic_axis.spacing * (w @ fld.values.sum(axis=1)))
    return float(w @ fld.values)


def periodic_shift(fld: ScalarField2D | np.ndarray, row_shifts, period: float | None = None):
    """Translate every row by its own displacement using Fourier interpolation.

    Row ``j`` of the result is ``f(x - row_shifts[j])`` evaluated through the
    trigonometric interpolant of row ``j``.  A plain array input (with
    ``period`` given) returns a plain array.
    """
    if isinstance(fld, ScalarField2D):
        values, period_ = fld.values, fld.periodic_axis.period
    else:
        values, period_ = np.asarray(fld, dtype=float), period
        if period_ is None:
            raise ValueError("period required for array input")
    shifts = np.broadcast_to(np.asarray(row_shifts, dtype=float), values.shape[:1])
    if not np.all(np.isfinite(shifts)):
        raise ValueError("row shifts must be finite")
    n = values.shape[-1]
    k = 2.0 * np.pi * np.arange(n // 2 + 1) / period_
    phase = np.exp(-1j * np.outer(shifts, k))
    out = np.fft.irfft(np.fft.rfft(values, axis=-1) * phase, n=n, axis=-1)
    still = shifts == 0.0
    out[still] = values[still]  # unshifted rows are returned bit for bit
    if isinstance(fld, ScalarField2D):
        return ScalarField2D(fld.periodic_axis, fld.axis, out)
    return out


def periodic_derivative(values: np.ndarray, period: float, order: int = 1) -> np.ndarray:
    """Spectral derivative along the last axis (Nyquist mode dropped for odd orders)."""
    values = np.asarray(values, dtype=float)
    n = values.shape[-1]
    k = 2.0 * np.pi * np.arange(n // 2 + 1) / period
    mult = (1j * k) ** order
    if order % 2:
        mult[-1] = 0.0
    return np.fft.irfft(np.fft.rfft(values, axis=-1) * mult, n=n, axis=-1)


def graded_derivative(values: np.ndarray, nodes: Sequence[float], axis: int = 0) -> np.ndarray:
    """Second-order first derivative on a nonuniform axis.

    Interior nodes use the three-point Lagrange stencil and the end nodes the
    one-sided three-point stencil, so the result is exact for quadratics.
    """
    x = np.asarray(nodes, dtype=float)
    f = np.moveaxis(np.asarray(values, dtype=float), axis, 0)
    h = np.diff(x)
    shape = (-1,) + (1,) * (f.ndim - 1)
    out = np.empty_like(f)
    h0, h1 = h[:-1].reshape(shape), h[1:].reshape(shape)
    out[1:-1] = (-h1 / (h0 * (h0 + h1)) * f[:-2]
                 + (h1 - h0) / (h0 * h1) * f[1:-1]
                 + h0 / (h1 * (h0 + h1)) * f[2:])
    a, b = h[0], h[1]
    out[0] = (-(2 * a + b) / (a * (a + b)) * f[0] + (a + b) / (a * b) * f[1]
              - a / (b * (a + b)) * f[2])
    a, b = h[-1], h[-2]
    out[-1] = ((2 * a + b) / (a * (a + b)) * f[-1] - (a + b) / (a * b) * f[-2]
               + a / (b * (a + b)) * f[-3])
    return np.moveaxis(out, 0, axis)
