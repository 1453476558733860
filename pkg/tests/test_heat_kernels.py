import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vvlab.heat_kernels import (BoundarySignal, LayerProfileParams, SignalDomainError,
                                SingularTimeError, delta_sheet_pairing, layer_axis, phi_eta_derivative,
                                phi_eta_values, phi_halfline, phi_values, scaled_erfc)
from vvlab.mesh import ScalarField1D, uniform_axis
from vvlab.oracle import ExplicitProblem, explicit_reference_solver, reference_quadrature

# (2 pi)**-0.5 int_1^inf exp(-y**2/2) dy by the adaptive Gauss-Kronrod oracle
ERFC_AT_ONE = 0.15865525393145707


def _gauss_tail(z):
    return reference_quadrature(lambda y: np.exp(-y * y / 2) / math.sqrt(2 * math.pi), z, math.inf)


# --------------------------------------------------------------------------
# scaled_erfc
# --------------------------------------------------------------------------

def test_scaled_erfc_special_values():
    assert scaled_erfc(0.0) == 0.5
    assert 0.0 <= scaled_erfc(40.0) <= 1e-300
    assert isinstance(scaled_erfc(1.0), float)
    assert abs(scaled_erfc(1.0) - ERFC_AT_ONE) <= 1e-12 * ERFC_AT_ONE


def test_frozen_erfc_value_matches_series():
    # Independent check of the frozen oracle value through the Taylor series of erf.
    x = 1.0 / math.sqrt(2.0)
    erf = 2.0 / math.sqrt(math.pi) * math.fsum(
        (-1) ** n * x ** (2 * n + 1) / (math.factorial(n) * (2 * n + 1)) for n in range(40))
    assert abs(0.5 * (1.0 - erf) - ERFC_AT_ONE) <= 1e-15


@pytest.mark.parametrize("z", [-3.0, -0.5, 0.25, 1.0, 2.5, 5.0, 9.0])
def test_scaled_erfc_matches_reference_quadrature(z):
    ref = _gauss_tail(z)
    assert abs(scaled_erfc(z) - ref) <= 1e-12 * ref


@given(a=st.floats(-50, 50), b=st.floats(-50, 50))
def test_scaled_erfc_bounded_monotone(a, b):
    lo, hi = min(a, b), max(a, b)
    va, vb = scaled_erfc(lo), scaled_erfc(hi)
    assert 0.0 <= vb <= va <= 1.0


def test_scaled_erfc_vectorized():
    z = np.array([[0.0, 1.0], [2.0, -1.0]])
    out = scaled_erfc(z)
    assert out.shape == z.shape
    assert math.isclose(out[1, 1], 1.0 - ERFC_AT_ONE, rel_tol=1e-14)


# --------------------------------------------------------------------------
# Boundary signals and parameters
# --------------------------------------------------------------------------

@pytest.mark.parametrize("coeffs", [[1.0], [0.0, 1.0], [1.0, -2.0, 3.0], [0.5, 0.0, 0.0, 4.0]])
def test_signal_derivative_consistent(coeffs):
    g = BoundarySignal.polynomial(coeffs, 1.0)
    t = np.linspace(0.05, 0.95, 19)
    h = 1e-5
    fd = (g.value(t + h) - g.value(t - h)) / (2 * h)
    np.testing.assert_allclose(fd, g.derivative(t), atol=1e-6)


def test_layer_params_invariants():
    ax = layer_axis(1e-3, 1.0)
    LayerProfileParams(1e-3, 0.5, ax, 1.0)
    with pytest.raises(ValueError):
        LayerProfileParams(0.0, 0.5, ax, 1.0)
    with pytest.raises(ValueError):
        LayerProfileParams(1e-3, -0.1, ax, 1.0)
    with pytest.raises(ValueError):
        LayerProfileParams(1e-3, 0.5, uniform_axis(0.0, 0.01, 9), 1.0)
    with pytest.raises(SignalDomainError):
        LayerProfileParams(1e-3, 2.0, ax, 1.0)


def test_phi_rejects_time_beyond_signal():
    g = BoundarySignal.polynomial([0.0, 1.0], T=1.0)
    with pytest.raises(SignalDomainError):
        phi_values(g, 1e-3, 1.5, np.zeros(1))


# --------------------------------------------------------------------------
# Phi
# --------------------------------------------------------------------------

SIGNALS = {
    "const": BoundarySignal.const(-0.7, 1.0),
    "linear": BoundarySignal.polynomial([0.0, 1.0], 1.0),
    "quadratic": BoundarySignal.polynomial([1.0, -2.0, 3.0], 1.0),
    "trig": BoundarySignal(lambda t: np.cos(3 * np.asarray(t)), lambda t: -3 * np.sin(3 * np.asarray(t)), 1.0),
}


@pytest.mark.parametrize("name", sorted(SIGNALS))
@pytest.mark.parametrize("eps", [1e-2, 1e-4])
@pytest.mark.parametrize("t", [1e-4, 0.3, 1.0])
def test_phi_wall_value(name, eps, t):
    g = SIGNALS[name]
    assert abs(phi_values(g, eps, t, np.zeros(1))[0] - float(g.value(t))) <= 1e-10


def test_phi_zero_at_initial_time():
    g = SIGNALS["quadratic"]
    np.testing.assert_array_equal(phi_values(g, 1e-3, 0.0, np.linspace(0, 1, 5)), 0.0)


def test_phi_constant_signal_closed_form():
    c, eps, t = 1.3, 1e-3, 0.4
    params = LayerProfileParams(eps, t, layer_axis(eps, 1.0), 1.0)
    f = phi_halfline(BoundarySignal.const(c), params)
    eta = params.eta_grid.nodes
    np.testing.assert_allclose(f.values, 2 * c * scaled_erfc(eta / math.sqrt(2 * eps * t)), atol=1e-15)
    assert abs(f.values[-1]) < 1e-30


def test_phi_matches_explicit_reference():
    # g(t) = t, eps = 1e-3, up to t = 0.5
    eps, T = 1e-3, 0.5
    eta_max = 12 * math.sqrt(2 * eps * T)
    samples = np.array([0.0, T / 16, T / 4, T])
    prob = ExplicitProblem(0.0, eta_max, 129, eps, samples, lambda e: 0.0 * e,
                           bc_lo=lambda tau, t: t)
    ref = explicit_reference_solver(prob, richardson=True)
    eta = np.linspace(0.0, eta_max, 129)
    g = BoundarySignal.polynomial([0.0, 1.0], T)
    for k, t in enumerate(samples[1:], start=1):
        phi = phi_values(g, eps, t, eta)
        rel = np.linalg.norm(phi - ref[k].values) / np.linalg.norm(ref[k].values)
        assert rel <= 1e-4, (t, rel)


def test_phi_pde_residual_second_order():
    g, eps, t0 = SIGNALS["quadratic"], 1e-2, 0.1
    residuals = []
    for h in (4e-3, 2e-3, 1e-3):
        eta = np.arange(0.02, 0.2, h)
        dt = h
        p_mid = phi_values(g, eps, t0, eta)
        dphidt = (phi_values(g, eps, t0 + dt, eta) - phi_values(g, eps, t0 - dt, eta)) / (2 * dt)
        lap = (phi_values(g, eps, t0, eta + h) - 2 * p_mid + phi_values(g, eps, t0, eta - h)) / h ** 2
        residuals.append(np.max(np.abs(dphidt - eps * lap)))
    assert residuals[0] / residuals[1] >= 3.5
    assert residuals[1] / residuals[2] >= 3.5


@given(c0=st.floats(-2, 2), c1=st.floats(-2, 2), c2=st.floats(-2, 2),
       eps=st.floats(1e-5, 1e-2), frac=st.floats(0.01, 1.0))
def test_phi_gaussian_envelope(c0, c1, c2, eps, frac):
    T = 1.0
    g = BoundarySignal.polynomial([c0, c1, c2], T)
    t = frac * T
    ts = np.linspace(0, T, 201)
    kappa = 2 * np.max(np.abs(g.value(ts))) + 2 * T * np.max(np.abs(g.derivative(ts)))
    eta = layer_axis(eps, T).nodes
    bound = kappa * np.exp(-eta ** 2 / (4 * eps * t))
    assert np.all(np.abs(phi_values(g, eps, t, eta)) <= bound + 1e-14)


def _phi_norms(g, eps, t):
    ax = layer_axis(eps, t, n=2049)
    phi = ScalarField1D(ax, phi_values(g, eps, t, ax.nodes))
    dphi = ScalarField1D(ax, phi_eta_values(g, eps, t, ax.nodes))
    l1 = float(ax.weights @ np.abs(phi.values))
    l2 = math.sqrt(float(ax.weights @ phi.values ** 2))
    d2 = math.sqrt(float(ax.weights @ dphi.values ** 2))
    return l1, l2, d2, float(np.max(np.abs(phi.values)))


def test_phi_lp_scaling_bounded():
    g = SIGNALS["quadratic"]
    rows = []
    for eps in np.logspace(-5, -2, 7):
        l1, l2, d2, linf = _phi_norms(g, eps, 0.5)
        rows.append([l1 * eps ** -0.5, l2 * eps ** -0.25, d2 * eps ** 0.25, linf])
    rows = np.array(rows)
    ratios = rows.max(axis=0) / rows.min(axis=0)
    assert np.all(ratios < 1.05), ratios


# --------------------------------------------------------------------------
# dPhi/deta and the delta-sheet limit
# --------------------------------------------------------------------------

def test_phi_eta_singular_time():
    params = LayerProfileParams(1e-3, 0.0, layer_axis(1e-3, 1.0), 1.0)
    with pytest.raises(SingularTimeError):
        phi_eta_derivative(SIGNALS["const"], params)


def test_phi_eta_zero_signal():
    params = LayerProfileParams(1e-3, 0.3, layer_axis(1e-3, 1.0), 1.0)
    d = phi_eta_derivative(BoundarySignal.const(0.0), params)
    np.testing.assert_array_equal(d.values, 0.0)


@pytest.mark.parametrize("name", sorted(SIGNALS))
@pytest.mark.parametrize("eps", [1e-2, 1e-3, 1e-4])
def test_phi_eta_integrates_to_minus_g(name, eps):
    g, t = SIGNALS[name], 0.6
    total = delta_sheet_pairing(g, eps, t, lambda e: np.ones_like(e))
    assert abs(total + float(g.value(t))) <= 1e-8


def test_phi_eta_leading_sign():
    g = BoundarySignal.const(0.8)
    d = phi_eta_values(g, 1e-3, 0.2, np.array([0.0, 0.01, 0.02]))
    assert np.all(d < 0)


def test_phi_eta_l2_slope():
    g, t = SIGNALS["linear"], 0.5
    eps = np.array([1e-2, 1e-3, 1e-4])
    norms = [_phi_norms(g, e, t)[2] for e in eps]
    slope = np.polyfit(np.log(eps), np.log(norms), 1)[0]
    assert abs(slope + 0.25) <= 0.05


def test_delta_pairing_zero_testfn():
    assert delta_sheet_pairing(SIGNALS["trig"], 1e-3, 0.5, lambda e: 0.0 * e) == 0.0


def test_delta_pairing_sampled_testfn():
    eps, t = 1e-3, 0.5
    ax = layer_axis(eps, 1.0, n=4097)
    f = ScalarField1D(ax, np.ones(ax.n))
    assert abs(delta_sheet_pairing(SIGNALS["const"], eps, t, f) - 0.7) <= 1e-4


def test_delta_pairing_limit():
    g, t = BoundarySignal.polynomial([1.0, 1.0], 1.0), 0.5
    bump = lambda e: np.exp(-e ** 2) * np.cos(e)
    vals = [delta_sheet_pairing(g, e, t, bump) for e in (1e-2, 1e-3, 1e-4)]
    limit = -(1.0 + t)
    gaps = [abs(v - limit) for v in vals]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[-1] <= 0.02 * abs(limit)
