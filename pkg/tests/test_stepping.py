import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vvlab.mesh import PeriodicAxis, build_graded_axis, uniform_axis
from vvlab.stepping import (SolverDiagnosticError, SpectralCNStepper, apply_bands,
                            eta_operator_bands, half_step_shifts)


@pytest.mark.parametrize("radial", [False, True])
def test_operator_symmetric_in_weighted_inner_product(radial):
    ax = build_graded_axis(1.0, 3.0, 41, 0.1)
    x = ax.nodes
    bands = eta_operator_bands(x, radial)
    n = x.size
    A = np.zeros((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        A[:, j] = apply_bands(bands, e)
    # weights of the control-volume inner product (times r when radial)
    w = 0.5 * (np.diff(x, prepend=x[0]) + np.diff(x, append=x[-1]))
    if radial:
        w = w * x
    inner = (w[:, None] * A)[1:-1, 1:-1]
    np.testing.assert_allclose(inner, inner.T, atol=1e-10)


def test_operator_exact_for_linear_profiles():
    ax = build_graded_axis(1.0, 3.0, 65, 0.05)
    r = ax.nodes
    bands = eta_operator_bands(r)
    scale = np.max(np.abs(bands[1]))
    assert np.max(np.abs(apply_bands(bands, 2.0 - 3.0 * r))) < 1e-12 * scale
    radial = eta_operator_bands(r, radial=True)
    assert np.max(np.abs(apply_bands(radial, np.full(r.size, 2.5)))) < 1e-12 * scale


def test_radial_operator_second_order():
    # (1/r) d/dr (r d/dr) ln r = 0
    errs = []
    for n in (33, 65, 129):
        r = uniform_axis(1.0, 3.0, n).nodes
        errs.append(np.max(np.abs(apply_bands(eta_operator_bands(r, radial=True), np.log(r)))))
    assert errs[0] / errs[1] >= 3.5 and errs[1] / errs[2] >= 3.5


def test_steady_linear_profile_preserved():
    ax = build_graded_axis(0.0, 1.0, 33, 0.05)
    s = SpectralCNStepper(ax, 0.1)
    u = 1.0 + 2.0 * ax.nodes
    c = s.to_spectral(u)
    for k in range(10):
        c = s.step(c, 0.01, bc_lo=np.array([1.0]), bc_hi=np.array([3.0]), theta=1.0 if k < 2 else 0.5)
    np.testing.assert_allclose(s.to_physical(c), u, atol=1e-12)


@given(theta=st.sampled_from([0.5, 1.0]), dt=st.floats(1e-4, 10.0), seed=st.integers(0, 2 ** 16))
def test_energy_nonincreasing(theta, dt, seed):
    ax = build_graded_axis(0.0, 1.0, 33, 0.05)
    pax = PeriodicAxis(8, 1.0)
    s = SpectralCNStepper(ax, 0.05, pax)
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((33, 8))
    u[[0, -1]] = 0.0
    energy = lambda v: float(ax.weights @ (v ** 2).sum(axis=1))
    e0 = energy(u)
    shifts = rng.uniform(-1, 1, 33)
    v = s.to_physical(s.step(s.to_spectral(u), dt, shifts, shifts, theta=theta))
    assert energy(v) <= e0 * (1 + 1e-10)


def test_single_mode_decay_rate():
    # u = sin(pi z) cos(2 pi x): exact decay exp(-eps (pi^2 + 4 pi^2) t)
    ax = uniform_axis(0.0, 1.0, 257)
    pax = PeriodicAxis(8, 1.0)
    eps, T, N = 0.05, 0.5, 400
    s = SpectralCNStepper(ax, eps, pax)
    z, x = ax.nodes[:, None], pax.nodes[None, :]
    u0 = np.sin(np.pi * z) * np.cos(2 * np.pi * x)
    c = s.to_spectral(u0)
    for _ in range(N):
        c = s.step(c, T / N)
    exact = u0 * math.exp(-eps * 5 * np.pi ** 2 * T)
    assert np.max(np.abs(s.to_physical(c) - exact)) < 1e-4


def test_translation_is_exact_for_pure_drift():
    ax = uniform_axis(0.0, 1.0, 9)
    pax = PeriodicAxis(16, 1.0)
    s = SpectralCNStepper(ax, 1e-300, pax)
    x = pax.nodes[None, :]
    u0 = np.sin(2 * np.pi * x) * np.ones((9, 1))
    shifts = np.linspace(0.0, 0.4, 9)
    c = s.step(s.to_spectral(u0), 1.0, shifts, shifts, bc_lo=s.to_spectral(u0)[:, 0],
               bc_hi=s.to_spectral(np.sin(2 * np.pi * (x - 0.8)) * np.ones((9, 1)))[:, -1])
    np.testing.assert_allclose(s.to_physical(c)[1:-1],
                               np.sin(2 * np.pi * (x - 2 * shifts[:, None]))[1:-1], atol=1e-12)


def test_half_step_shifts_trapezoid():
    a, b = half_step_shifts(np.array([1.0, 2.0]), np.array([3.0, 2.0]), 0.5)
    np.testing.assert_allclose(a + b, 0.5 * 0.5 * (np.array([1.0, 2.0]) + np.array([3.0, 2.0])))


def test_nonfinite_step_raises_with_index():
    ax = uniform_axis(0.0, 1.0, 9)
    s = SpectralCNStepper(ax, 0.1)
    c = s.to_spectral(np.zeros(9))
    with pytest.raises(SolverDiagnosticError) as info:
        s.step(c, 0.1, forcing=np.full((1, 9), np.nan), step_index=7)
    assert info.value.step_index == 7
