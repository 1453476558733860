"""Explicit half-line heat machinery used by the boundary-layer correctors.

The corrector kernel is the solution of the half-line heat problem

    dPhi/dt = eps d2Phi/deta2,   Phi(0, t) = g(t),   Phi(eta, 0) = 0,

written with the Gaussian-tail complementary error function

    erfc(z) = (2 pi)**-0.5 * int_z^inf exp(-y**2 / 2) dy,

so that ``erfc(0) = 1/2`` (note the factor relative to ``scipy.special.erfc``):

    Phi = 2 g(0) erfc(eta / sqrt(2 eps t))
          + 2 int_0^t g'(s) erfc(eta / sqrt(2 eps (t - s))) ds.

The convolution is evaluated after the substitution ``s = t - sigma**2``,
which turns the ``(t - s)**-1/2`` behaviour of the kernel into a smooth
integrand, on dyadic Gauss-Legendre panels in ``sigma``.  Because the
integrand depends on ``eta / sigma`` the dyadic panels resolve it uniformly
for every ``eta``, including ``eta = 0`` where ``Phi(0, t) = g(t)`` is
reproduced to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .mesh import GradedAxis, ScalarField1D, build_graded_axis

__all__ = [
    "SingularTimeError",
    "SignalDomainError",
    "BoundarySignal",
    "LayerProfileParams",
    "scaled_erfc",
    "phi_values",
    "phi_eta_values",
    "phi_halfline",
    "phi_eta_derivative",
    "delta_sheet_pairing",
    "layer_axis",
]

_SQRT2 = math.sqrt(2.0)
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
# Panels sigma in [sqrt(t) 2**-(j+1), sqrt(t) 2**-j]; the neglected piece
# [0, sqrt(t) 2**-J] carries at most sup|g'| t 4**-J of the integral.
_N_PANELS = 28


class SingularTimeError(ValueError):
    """Raised when the eta-derivative is requested at t = 0."""


class SignalDomainError(ValueError):
    """Raised when a time lies outside the boundary signal's domain."""


@dataclass(frozen=True)
class BoundarySignal:
    """Wall data ``g(t)`` with its derivative.

    Parameters
    ----------
    value, derivative : callable
        Vectorized maps ``t -> g(t)`` and ``t -> g'(t)``.
    T : float
        End of the time interval on which the signal is defined.
    constant : bool
        True when ``g' == 0``; the convolution integral is then skipped.
    """

    value: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    T: float = math.inf
    constant: bool = False

    @property
    def initial(self) -> float:
        return float(self.value(np.float64(0.0)))

    @classmethod
    def const(cls, c: float, T: float = math.inf) -> "BoundarySignal":
        c = float(c)
        return cls(lambda t: np.full_like(np.asarray(t, dtype=float), c),
                   lambda t: np.zeros_like(np.asarray(t, dtype=float)), T, True)

    @classmethod
    def polynomial(cls, coeffs, T: float = math.inf) -> "BoundarySignal":
        """``g(t) = sum_k coeffs[k] t**k``."""
        p = np.polynomial.Polynomial(np.asarray(coeffs, dtype=float))
        dp = p.deriv()
        return cls(lambda t: p(np.asarray(t, dtype=float)),
                   lambda t: dp(np.asarray(t, dtype=float)), T,
                   bool(np.all(p.coef[1:] == 0)))


@dataclass(frozen=True)
class LayerProfileParams:
    """Viscosity, evaluation time and wall-normal grid for a kernel evaluation."""

    eps: float
    t: float
    eta_grid: GradedAxis
    T: float | None = None

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if not self.t >= 0:
            raise ValueError("t must be nonnegative")
        T = self.t if self.T is None else self.T
        if self.t > T:
            raise SignalDomainError("t exceeds T")
        eta_max = self.eta_grid.domain[1]
        if self.eta_grid.domain[0] != 0.0 or eta_max < 10.0 * math.sqrt(2 * self.eps * T) * (1 - 1e-12):
            raise ValueError("eta grid must cover [0, 10 sqrt(2 eps T)]")


def layer_axis(eps: float, T: float, n: int = 513, factor: float = 12.0) -> GradedAxis:
    """Wall-clustered axis on ``[0, factor sqrt(2 eps T)]`` for kernel profiles."""
    eta_max = factor * math.sqrt(2.0 * eps * T)
    return build_graded_axis(0.0, eta_max, n, math.sqrt(eps * T) / 4, min_layer_nodes=16)


def scaled_erfc(z):
    """Gaussian tail ``(2 pi)**-0.5 int_z^inf exp(-y**2/2) dy``.

    Accepts scalars or arrays; returns a float for scalar input.
    """
    out = 0.5 * special.erfc(np.asarray(z, dtype=float) / _SQRT2)
    return float(out) if np.ndim(out) == 0 else out


def _sigma_rule(t: float) -> tuple[np.ndarray, np.ndarray]:
    """Dyadic Gauss-Legendre nodes/weights for ``sigma`` in ``(0, sqrt(t)]``."""
    rt = math.sqrt(t)
    j = np.arange(_N_PANELS)
    a = rt * 0.5 ** (j + 1)
    b = rt * 0.5 ** j
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b))[:, None] + half[:, None] * _GL_NODES[None, :]
    weights = half[:, None] * _GL_WEIGHTS[None, :]
    return nodes.ravel(), weights.ravel()


def _check_time(g: BoundarySignal, t: float) -> None:
    if t < 0 or t > g.T * (1 + 1e-14):
        raise SignalDomainError(f"t={t} outside the signal domain [0, {g.T}]")


def phi_values(g: BoundarySignal, eps: float, t: float, eta) -> np.ndarray:
    """Kernel ``Phi[g](eta, t)`` at arbitrary nonnegative ``eta``.

    At ``t = 0`` the initial condition ``Phi = 0`` is returned everywhere,
    including the wall node (the boundary condition holds for ``t > 0``).
    """
    _check_time(g, t)
    eta = np.asarray(eta, dtype=float)
    if t == 0.0:
        return np.zeros_like(eta)
    out = 2.0 * g.initial * scaled_erfc(eta / math.sqrt(2.0 * eps * t))
    if not g.constant:
        sig, w = _sigma_rule(t)
        gp = np.asarray(g.derivative(t - sig * sig), dtype=float) * (2.0 * sig) * w
        arg = eta.reshape(-1, 1) / (math.sqrt(2.0 * eps) * sig)
        out = out + 2.0 * (scaled_erfc(arg) @ gp).reshape(eta.shape)
    return out


def phi_eta_values(g: BoundarySignal, eps: float, t: float, eta) -> np.ndarray:
    """Wall-normal derivative ``dPhi/deta`` at ``t > 0``.

    Uses ``dPhi/deta = 2 g(0) K(eta, t) + 2 int_0^t g'(s) K(eta, t - s) ds``
    with ``K(eta, t) = -(4 pi eps t)**-0.5 exp(-eta**2 / (4 eps t))``.
    """
    _check_time(g, t)
    if t <= 0.0:
        raise SingularTimeError("dPhi/deta is singular at t = 0")
    eta = np.asarray(eta, dtype=float)
    out = 2.0 * g.initial * (-np.exp(-eta * eta / (4 * eps * t)) / math.sqrt(4 * math.pi * eps * t))
    if not g.constant:
        sig, w = _sigma_rule(t)
        gp = np.asarray(g.derivative(t - sig * sig), dtype=float) * w
        gauss = np.exp(-(eta.reshape(-1, 1) ** 2) / (4 * eps * sig * sig))
        # K(eta, sigma^2) * 2 sigma dsigma = -(pi eps)**-0.5 exp(...) dsigma
        out = out - 2.0 / math.sqrt(math.pi * eps) * (gauss @ gp).reshape(eta.shape)
    return out


def phi_halfline(g: BoundarySignal, params: LayerProfileParams) -> ScalarField1D:
    """Corrector kernel ``Phi[g]`` sampled on the parameter grid.

    Parameters
    ----------
    g : BoundarySignal
        Wall data.
    params : LayerProfileParams
        ``eps``, ``t`` and the ``eta`` grid.

    Returns
    -------
    ScalarField1D
        ``Phi(eta_j, t)``; ``Phi(0, t) = g(t)`` for ``t > 0``.
    """
    grid = params.eta_grid
    return ScalarField1D(grid, phi_values(g, params.eps, params.t, grid.nodes))


def phi_eta_derivative(g: BoundarySignal, params: LayerProfileParams) -> ScalarField1D:
    """``dPhi/deta`` sampled on the parameter grid (``t > 0`` required)."""
    grid = params.eta_grid
    return ScalarField1D(grid, phi_eta_values(g, params.eps, params.t, grid.nodes))


def delta_sheet_pairing(g: BoundarySignal, eps: float, t: float, testfn,
                        eta_grid: GradedAxis | None = None) -> float:
    """Pairing ``int_0^eta_max dPhi/deta(eta, t) * testfn(eta) deta``.

    As ``eps -> 0`` the value tends to ``-g(t) testfn(0)``.

    Parameters
    ----------
    g : BoundarySignal
    eps, t : float
        Viscosity and time, ``t > 0``.
    testfn : callable or ScalarField1D
        A callable is integrated with Gauss-Legendre panels scaled to the
        layer width ``sqrt(eps t)`` out to ``12 sqrt(2 eps t)``, beyond which
        the kernel is below 1e-31.  A sampled field is integrated with the
        trapezoidal weights of its own grid.
    eta_grid : GradedAxis, optional
        Upper integration limit when ``testfn`` is a callable; defaults to
        the Gaussian truncation point.
    """
    if isinstance(testfn, ScalarField1D):
        axis = testfn.axis
        dphi = phi_eta_values(g, eps, t, axis.nodes)
        return float(axis.weights @ (dphi * testfn.values))
    eta_cut = 12.0 * math.sqrt(2.0 * eps * t)
    if eta_grid is not None:
        eta_cut = min(eta_cut, eta_grid.domain[1])
    n_panels = 96
    edges = np.linspace(0.0, eta_cut, n_panels + 1)
    half = 0.5 * np.diff(edges)
    nodes = ((0.5 * (edges[:-1] + edges[1:]))[:, None] + half[:, None] * _GL_NODES).ravel()
    weights = (half[:, None] * _GL_WEIGHTS).ravel()
    vals = np.asarray(testfn(nodes), dtype=float) * phi_eta_values(g, eps, t, nodes)
    return float(weights @ vals)
