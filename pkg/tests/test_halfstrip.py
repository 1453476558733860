import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vvlab.analysis import channel_preset
from vvlab.channel import ChannelGrids, channel_halfstrip_problems
from vvlab.halfstrip import HalfStripProblem, SolverDiagnosticError, solve_psi_halfstrip
from vvlab.heat_kernels import BoundarySignal, phi_values
from vvlab.mesh import PeriodicAxis, build_graded_axis, build_time_grid, uniform_axis
from vvlab.oracle import ExplicitProblem, explicit_reference_solver

TWO_PI = 2 * math.pi


def _eta_max(eps, T):
    return 12 * math.sqrt(2 * eps * T)


def _problem(drift, forcing, boundary, eps=1e-3, T=0.25, n_eta=129, n_tau=16, n_steps=64,
             n_samples=5, graded=True, layer=1.0):
    emax = _eta_max(eps, T)
    if graded:
        ax = build_graded_axis(0.0, emax, n_eta, layer * math.sqrt(eps * T), min_layer_nodes=n_eta // 8)
    else:
        ax = uniform_axis(0.0, emax, n_eta)
    return HalfStripProblem(drift, forcing, boundary, TWO_PI, eps, PeriodicAxis(n_tau, TWO_PI), ax,
                            build_time_grid(T, n_steps, n_samples))


def _tanh_drift(eps, amp=3.0):
    return lambda eta, t: amp * np.tanh(np.asarray(eta) / math.sqrt(eps))


# --------------------------------------------------------------------------
# Problem validation and trivial data
# --------------------------------------------------------------------------

def test_drift_must_vanish_at_wall():
    with pytest.raises(ValueError):
        _problem(lambda eta, t: 1.0 + 0.0 * eta, None, lambda tau, t: 0.0 * tau)


def test_period_mismatch_rejected():
    p = _problem(_tanh_drift(1e-3), None, lambda tau, t: 0.0 * tau)
    with pytest.raises(ValueError):
        HalfStripProblem(p.drift, None, p.boundary, 1.0, p.eps, p.tau_axis, p.eta_axis, p.time_grid)


def test_zero_data_gives_zero():
    p = _problem(_tanh_drift(1e-3), None, lambda tau, t: 0.0 * tau)
    for snap in solve_psi_halfstrip(p):
        assert np.all(snap.values == 0.0)


def test_initial_and_wall_conditions_hold_at_nodes():
    bnd = lambda tau, t: (1 + 0.5 * np.sin(tau)) * (1 + t)
    p = _problem(_tanh_drift(1e-3), None, bnd)
    traj = solve_psi_halfstrip(p)
    assert np.all(traj[0].values == 0.0)
    tau = p.tau_axis.nodes
    for snap, t in zip(traj.snapshots[1:], p.time_grid.sample_times[1:]):
        np.testing.assert_allclose(snap.values[0], bnd(tau, t), atol=1e-12)
        assert np.all(snap.values[-1] == 0.0)


def test_nonfinite_forcing_reports_step():
    p = _problem(_tanh_drift(1e-3), lambda tau, eta, t: np.full(np.broadcast(tau, eta).shape, np.inf),
                 lambda tau, t: 0.0 * tau)
    with pytest.raises(SolverDiagnosticError) as info, np.errstate(invalid="ignore"):
        solve_psi_halfstrip(p)
    assert info.value.step_index == 1


def test_truncation_flag():
    eps, T = 1e-3, 0.25
    ax = uniform_axis(0.0, 0.5 * _eta_max(eps, T), 65)
    p = HalfStripProblem(_tanh_drift(eps), None, lambda tau, t: 0.0 * tau, TWO_PI, eps,
                         PeriodicAxis(8, TWO_PI), ax, build_time_grid(T, 16, 3))
    meta = solve_psi_halfstrip(p).metadata
    assert meta["eta_max_ok"] is False and "warning" in meta


# --------------------------------------------------------------------------
# Reduction to the heat half-line kernel
# --------------------------------------------------------------------------

def test_tau_independent_data_reduces_to_phi():
    # The drift term annihilates tau-independent solutions, so Psi = Phi[g].
    eps, T = 1e-2, 0.25
    g = BoundarySignal.polynomial([0.0, 0.0, 4.0], T)
    p = _problem(_tanh_drift(eps), None, lambda tau, t: float(g.value(t)) + 0.0 * tau, eps=eps, T=T,
                 n_eta=4097, n_tau=4, n_steps=2048, layer=0.25)
    traj = solve_psi_halfstrip(p)
    w = p.eta_axis.weights
    for snap, t in zip(traj.snapshots[1:], p.time_grid.sample_times[1:]):
        ref = phi_values(g, eps, t, p.eta_axis.nodes)
        for col in snap.values.T:
            rel = math.sqrt(float(w @ (col - ref) ** 2) / float(w @ ref ** 2))
            assert rel <= 1e-6, (t, rel)


# --------------------------------------------------------------------------
# Oracle equivalence with channel drift data
# --------------------------------------------------------------------------

def oracle_instance_error():
    """Worst relative L2 gap to the oracle over the positive sample times.

    Lower-wall problem of the reference channel: drift u1_0 + Theta1 from the
    channel module, wall data -u2_0 and forcing -Theta1 du2_0/dx in closed form.
    """
    p = channel_preset("reference")
    eps, T, n_tau = 1e-2, p.T, 32
    grids = ChannelGrids(PeriodicAxis(n_tau, 1.0), uniform_axis(0.0, 1.0, 257), build_time_grid(T, 256, 5))
    lower, _ = channel_halfstrip_problems(p, eps, grids)
    emax = _eta_max(eps, T)
    g_lower = BoundarySignal.const(-1.0, T)

    def boundary(tau, t):
        return -(1.0 + np.cos(2 * np.pi * (tau - t)))

    def forcing(tau, eta, t):
        eta = np.asarray(eta, dtype=float)
        theta1 = phi_values(g_lower, eps, t, eta.ravel()).reshape(eta.shape) if t > 0 else 0.0 * eta
        du2 = -2 * np.pi * np.sin(2 * np.pi * (tau - t * (1 - 2 * eta ** 2))) * (1 + eta - eta ** 2)
        return -theta1 * du2

    tg = build_time_grid(T, 1024, 5)
    hs = HalfStripProblem(lower.drift, forcing, boundary, 1.0, eps, PeriodicAxis(n_tau, 1.0),
                          uniform_axis(0.0, emax, 1025), tg)
    traj = solve_psi_halfstrip(hs)
    ref = explicit_reference_solver(
        ExplicitProblem(0.0, emax, 129, eps, tg.sample_times, lambda tau, e: 0.0 * tau * e,
                        bc_lo=boundary, n_tau=n_tau, period=1.0, drift=lower.drift, forcing=forcing),
        richardson=True)
    return max(np.linalg.norm(traj[j].values[::8] - ref[j].values) / np.linalg.norm(ref[j].values)
               for j in range(1, len(tg.sample_times)))


def test_matches_explicit_reference_on_channel_data():
    assert oracle_instance_error() <= 1e-4


# --------------------------------------------------------------------------
# Maximum principle, far-field decay, equivariance, energy
# --------------------------------------------------------------------------

@pytest.mark.parametrize("eps", [1e-2, 1e-4])
@pytest.mark.parametrize("graded", [False, True])
def test_maximum_principle_and_far_field(eps, graded):
    bnd = lambda tau, t: 1.0 + 0.5 * np.sin(3 * tau)
    p = _problem(_tanh_drift(eps, 5.0), None, bnd, eps=eps, n_eta=257, n_steps=128, n_samples=129,
                 graded=graded)
    traj = solve_psi_halfstrip(p)
    sup_g = max(np.max(np.abs(bnd(p.tau_axis.nodes, t))) for t in p.time_grid.sample_times)
    assert max(np.max(np.abs(s.values)) for s in traj) <= sup_g + 1e-10
    assert traj.metadata["far_field_max"] < 1e-8


@given(k=st.integers(-15, 15), amp=st.floats(-3, 3))
def test_tau_translation_equivariance(k, amp):
    eps = 1e-3
    d_tau = TWO_PI / 16
    bnd = lambda tau, t: (np.cos(tau) + 0.3 * np.sin(2 * tau)) * (1 + t)
    frc = lambda tau, eta, t: amp * np.exp(-eta / math.sqrt(eps)) * np.sin(tau + 0.4) * t
    base = solve_psi_halfstrip(_problem(_tanh_drift(eps), frc, bnd, n_eta=65, n_steps=32, n_samples=3))
    s = k * d_tau
    moved = solve_psi_halfstrip(_problem(_tanh_drift(eps), lambda tau, eta, t: frc(tau - s, eta, t),
                                         lambda tau, t: bnd(tau - s, t), n_eta=65, n_steps=32, n_samples=3))
    for a, b in zip(base, moved):
        np.testing.assert_allclose(b.values, np.roll(a.values, k, axis=1), atol=1e-12)


@pytest.mark.parametrize("drift_amp", [0.0, 3.0])
@pytest.mark.parametrize("phase", [0.0, 1.0])
def test_energy_inequality_with_zero_wall_data(drift_amp, phase):
    # E(t_{n+1}) - E(t_n) <= 2 dt <G, (Psi_n + Psi_{n+1}) / 2> up to round-off.
    eps, T, n = 1e-3, 0.25, 64
    frc = lambda tau, eta, t: 5 * np.exp(-eta / math.sqrt(eps)) * np.sin(tau + phase) * (1 + t)
    p = _problem(_tanh_drift(eps, drift_amp), frc, lambda tau, t: 0.0 * tau, eps=eps, T=T,
                 n_steps=n, n_samples=n + 1)
    traj = solve_psi_halfstrip(p)
    w, tau, eta = p.eta_axis.weights, p.tau_axis.nodes, p.eta_axis.nodes
    energy = [float(w @ (s.values ** 2).sum(axis=1)) for s in traj]
    times = p.time_grid.sample_times
    for k in range(n):
        dt = times[k + 1] - times[k]
        g = frc(tau[None, :], eta[:, None], 0.5 * (times[k] + times[k + 1]))
        mid = 0.5 * (traj[k].values + traj[k + 1].values)
        work = 2 * dt * float(w @ (g * mid).sum(axis=1))
        assert energy[k + 1] - energy[k] <= work + 1e-10 * max(energy)
