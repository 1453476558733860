"""Implicit drift-diffusion stepping shared by the half-strip and flow solvers.

All evolution equations in this package have the form

    du/dt + a(eta, t) du/dtau = eps (L_eta u + c(eta) u + m(eta) d2u/dtau2) + F

on ``PeriodicAxis(tau) x GradedAxis(eta)`` with Dirichlet data at both ends
of the graded axis, where ``L_eta`` is ``d2/deta2`` or the radial operator
``(1/r) d/dr (r d/dr)``.  The drift ``a`` never depends on ``tau``, so the
state is kept as rfft coefficients in ``tau`` and one time step is

1. a rigid half-step translation of each row (a phase multiply),
2. a Crank-Nicolson step of ``eps (L_eta + c - m k**2)`` for every Fourier
   mode ``k``, with the forcing sampled at the step midpoint,
3. the second half-step translation.

The modes are decoupled, so the Crank-Nicolson systems of all modes are
stacked into one tridiagonal band and solved together.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

from .mesh import GradedAxis, PeriodicAxis

__all__ = ["SolverDiagnosticError", "eta_operator_bands", "SpectralCNStepper"]


class SolverDiagnosticError(RuntimeError):
    """Raised when an implicit step produces non-finite values."""

    def __init__(self, message: str, step_index: int | None = None):
        super().__init__(message if step_index is None else f"{message} (step {step_index})")
        self.step_index = step_index


def eta_operator_bands(nodes: np.ndarray, radial: bool = False):
    """Three-point bands ``(lower, diag, upper)`` of ``L_eta`` at interior nodes.

    ``lower[i]`` multiplies ``u[i-1]`` in row ``i`` (entries 0 and n-1 are
    unused).  With trapezoid weights ``w`` (times ``r`` when radial) the
    operator is symmetric, which is what makes the discrete energy decay.
    """
    x = np.asarray(nodes, dtype=float)
    h = np.diff(x)
    n = x.size
    lower, diag, upper = np.zeros(n), np.zeros(n), np.zeros(n)
    hm, hp = h[:-1], h[1:]
    span = 0.5 * (hm + hp)
    if radial:
        r = x[1:-1]
        rm = 0.5 * (x[1:-1] + x[:-2])
        rp = 0.5 * (x[1:-1] + x[2:])
        lower[1:-1] = rm / (r * hm * span)
        upper[1:-1] = rp / (r * hp * span)
    else:
        lower[1:-1] = 1.0 / (hm * span)
        upper[1:-1] = 1.0 / (hp * span)
    diag[1:-1] = -(lower[1:-1] + upper[1:-1])
    return lower, diag, upper


def apply_bands(bands, u: np.ndarray) -> np.ndarray:
    """Apply three-point bands along axis 0 (boundary rows return 0)."""
    lower, diag, upper = bands
    shape = (-1,) + (1,) * (u.ndim - 1)
    out = np.zeros_like(u)
    out[1:-1] = (lower[1:-1].reshape(shape) * u[:-2] + diag[1:-1].reshape(shape) * u[1:-1]
                 + upper[1:-1].reshape(shape) * u[2:])
    return out


class SpectralCNStepper:
    """Strang-split Crank-Nicolson stepper in rfft space.

    Parameters
    ----------
    axis : GradedAxis
        Bounded direction (``eta``, ``z`` or ``r``).
    eps : float
        Diffusion coefficient.
    periodic_axis : PeriodicAxis or None
        Periodic direction; ``None`` gives a one-dimensional solver (a single
        "mode" with ``k = 0`` and no translation).
    radial : bool
        Use ``(1/r) d/dr (r d/dr)`` instead of ``d2/deta2``.
    potential : ndarray, optional
        ``c(eta)``, e.g. ``-1/r**2`` for the azimuthal pipe velocity.
    tau_weight : ndarray, optional
        ``m(eta)`` multiplying ``d2/dtau2`` (``1/r**2`` for the pipe).
    """

    def __init__(self, axis: GradedAxis, eps: float, periodic_axis: PeriodicAxis | None = None,
                 radial: bool = False, potential=None, tau_weight=None):
        self.axis = axis
        self.eps = float(eps)
        self.periodic_axis = periodic_axis
        n = axis.n
        lower, diag, upper = eta_operator_bands(axis.nodes, radial)
        if potential is not None:
            diag = diag.copy()
            diag[1:-1] += np.asarray(potential, dtype=float)[1:-1]
        self.bands = (lower, diag, upper)
        if periodic_axis is None:
            self.k = np.zeros(1)
        else:
            self.k = periodic_axis.wavenumbers
        m = np.ones(n) if tau_weight is None else np.asarray(tau_weight, dtype=float)
        self.n_modes = self.k.size
        # Per-mode diagonal of eps * (L + c - m k^2), stacked mode-major.
        interior = np.zeros(n, dtype=bool)
        interior[1:-1] = True
        self._interior = np.tile(interior, self.n_modes)
        full_diag = diag[None, :] - (self.k ** 2)[:, None] * m[None, :]
        full_diag[:, 0] = 0.0
        full_diag[:, -1] = 0.0
        self._diag = self.eps * full_diag.ravel()
        self._lower = self.eps * np.tile(lower, self.n_modes)
        self._upper = self.eps * np.tile(upper, self.n_modes)

    # -- transforms -------------------------------------------------------
    def to_spectral(self, values: np.ndarray) -> np.ndarray:
        """Physical ``(n_eta, n_tau)`` (or ``(n_eta,)``) array to mode-major coefficients."""
        if self.periodic_axis is None:
            return np.asarray(values, dtype=complex).reshape(1, -1)
        return np.fft.rfft(np.asarray(values, dtype=float), axis=-1).T.copy()

    def to_physical(self, coeffs: np.ndarray) -> np.ndarray:
        if self.periodic_axis is None:
            return coeffs[0].real.copy()
        return np.fft.irfft(coeffs.T, n=self.periodic_axis.n, axis=-1)

    def boundary_spectral(self, value) -> np.ndarray:
        """Boundary data (scalar or per-``tau`` array) as one coefficient per mode."""
        if self.periodic_axis is None:
            return np.array([float(np.asarray(value))], dtype=complex)
        v = np.broadcast_to(np.asarray(value, dtype=float), (self.periodic_axis.n,))
        return np.fft.rfft(v)

    # -- stepping ---------------------------------------------------------
    def translate(self, coeffs: np.ndarray, shifts) -> np.ndarray:
        """Row translation by ``shifts[j]`` applied to spectral coefficients."""
        if self.periodic_axis is None or shifts is None:
            return coeffs
        shifts = np.asarray(shifts, dtype=float)
        return coeffs * np.exp(-1j * self.k[:, None] * shifts[None, :])

    def step(self, coeffs: np.ndarray, dt: float, shift_a=None, shift_b=None,
             forcing=None, bc_lo=0.0, bc_hi=0.0, step_index: int | None = None,
             theta: float = 0.5) -> np.ndarray:
        """Advance spectral coefficients over one step of length ``dt``.

        Parameters
        ----------
        coeffs : ndarray, shape (n_modes, n_eta)
        dt : float
        shift_a, shift_b : array over eta, optional
            Row displacements of the two half-step translations.
        forcing : ndarray, optional
            Spectral forcing (same shape as ``coeffs``) at the step midpoint.
        bc_lo, bc_hi : ndarray
            Spectral Dirichlet data (one entry per mode) at the step end.
        theta : float
            Implicitness of the diffusion step: 0.5 is Crank-Nicolson, 1.0 is
            backward Euler (used for a few start-up steps to damp the
            high-wavenumber content of incompatible initial data).
        """
        c = self.translate(coeffs, shift_a).ravel()
        expl = (1.0 - theta) * dt
        half = theta * dt
        rhs = c.copy()
        rhs[1:] += expl * self._lower[1:] * c[:-1]
        rhs += expl * self._diag * c
        rhs[:-1] += expl * self._upper[:-1] * c[1:]
        if forcing is not None:
            rhs += dt * (np.asarray(forcing).ravel() * self._interior)
        n = self.axis.n
        rhs = rhs.reshape(self.n_modes, n)
        rhs[:, 0] = bc_lo
        rhs[:, -1] = bc_hi
        rhs = rhs.ravel()
        ab = np.zeros((3, rhs.size))
        ab[0, 1:] = -half * self._upper[:-1]
        ab[1] = 1.0 - half * self._diag
        ab[2, :-1] = -half * self._lower[1:]
        # Boundary rows are identity rows: remove their couplings.
        bmask = ~self._interior
        ab[1][bmask] = 1.0
        idx = np.flatnonzero(bmask)
        ab[0, idx[idx + 1 < rhs.size] + 1] = 0.0
        ab[2, idx[idx - 1 >= 0] - 1] = 0.0
        sol = solve_banded((1, 1), ab, np.column_stack([rhs.real, rhs.imag]),
                           overwrite_ab=True, check_finite=False)
        out = (sol[:, 0] + 1j * sol[:, 1]).reshape(self.n_modes, n)
        # Pivoting may mix the identity rows with their neighbours; restore the data exactly.
        out[:, 0] = rhs.reshape(self.n_modes, n)[:, 0]
        out[:, -1] = rhs.reshape(self.n_modes, n)[:, -1]
        if not np.all(np.isfinite(out)):
            raise SolverDiagnosticError("implicit step produced non-finite values", step_index)
        return self.translate(out, shift_b)


def half_step_shifts(drift_now: np.ndarray, drift_next: np.ndarray, dt: float):
    """Displacements of the two half-step translations for a linear-in-time drift."""
    a = (dt / 8.0) * (3.0 * drift_now + drift_next)
    b = (dt / 8.0) * (drift_now + 3.0 * drift_next)
    return a, b
