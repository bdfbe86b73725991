import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from leapfrog.numerics import (
    BoundaryField,
    DegenerateModeError,
    IntegrationError,
    d_phi,
    d_theta,
    dealias,
    dealiased_product,
    elliptic_E,
    elliptic_K,
    gauss_legendre,
    hilbert_theta,
    invert_theta_elliptic,
    locate_event,
    ode_solve,
    spectral_derivative,
    trig_interpolate,
)

GRID = 2 * np.pi * np.arange(32) / 32


@given(st.floats(0.0, 0.999))
def test_elliptic_integrals_match_mpmath(m):
    assert elliptic_K(m) == pytest.approx(float(mpmath.ellipk(m)), rel=1e-14)
    assert elliptic_E(m) == pytest.approx(float(mpmath.ellipe(m)), rel=1e-14)


def test_elliptic_special_values():
    assert elliptic_K(0.0) == pytest.approx(math.pi / 2, rel=1e-15)
    assert elliptic_E(0.0) == pytest.approx(math.pi / 2, rel=1e-15)
    assert elliptic_E(1.0) == 1.0


@given(st.floats(0.01, 0.99))
def test_legendre_relation(m):
    # E K' + E' K - K K' = pi/2 ties the two integrals together independently of either routine
    k, e = elliptic_K(m), elliptic_E(m)
    kp, ep = elliptic_K(1 - m), elliptic_E(1 - m)
    assert e * kp + ep * k - k * kp == pytest.approx(math.pi / 2, rel=1e-12)


@given(st.integers(0, 31))
def test_gauss_legendre_exact_for_polynomials(deg):
    x, w = gauss_legendre(16, 0.0, 2.0)
    assert np.sum(w * x**deg) == pytest.approx(2.0 ** (deg + 1) / (deg + 1), rel=1e-13)


def test_field_grid_must_be_power_of_two():
    with pytest.raises(ValueError):
        BoundaryField(np.zeros((6, 8)))
    with pytest.raises(ValueError):
        BoundaryField(np.zeros(8))


@given(st.integers(0, 2**31))
def test_field_record_round_trip(seed):
    rng = np.random.default_rng(seed)
    f = BoundaryField(rng.normal(size=(8, 16)))
    g = BoundaryField.from_record(f.to_record())
    assert np.allclose(f.values, g.values, atol=1e-14)


def test_field_arithmetic_and_norms():
    f = BoundaryField(np.ones((4, 8)) * 2.0)
    assert (3 * f - f).norm_sup() == 4.0
    assert f.without_mean().norm_l2() == 0.0
    assert np.all(f.spatial_mean() == 2.0)


@given(st.integers(1, 10), st.floats(0, 2 * np.pi))
def test_theta_derivative_and_hilbert_of_a_mode(k, shift):
    f = np.cos(k * GRID + shift)[None, :]
    assert np.allclose(d_theta(f), -k * np.sin(k * GRID + shift), atol=1e-12)
    # H e^{ik theta} = i sign(k) e^{ik theta}, so H cos = -sin
    assert np.allclose(hilbert_theta(f), -np.sin(k * GRID + shift), atol=1e-12)


def test_phi_derivative_of_a_mode():
    f = np.sin(3 * GRID)[:, None] * np.ones((1, 8))
    assert np.allclose(d_phi(f), 3 * np.cos(3 * GRID)[:, None], atol=1e-12)
    bf = BoundaryField(f)
    assert np.allclose(spectral_derivative(bf, "phi").values, d_phi(f))
    with pytest.raises(ValueError):
        spectral_derivative(bf, "psi")


def test_dealiasing_removes_high_modes_only():
    low = np.cos(2 * GRID)[None, :] * np.ones((4, 1))
    high = np.cos(15 * GRID)[None, :] * np.ones((4, 1))
    assert np.allclose(dealias(low), low)
    assert np.allclose(dealias(high), 0, atol=1e-14)
    prod = dealiased_product(BoundaryField(low), BoundaryField(low))
    assert np.allclose(prod.values, low * low, atol=1e-13)


@given(st.integers(0, 2**31))
def test_elliptic_inverse_solves_the_operator(seed):
    rng = np.random.default_rng(seed)
    c = np.zeros((8, 32), dtype=complex)
    for j in range(2, 6):
        z = rng.normal() + 1j * rng.normal()
        c[rng.integers(0, 8), j] = z
    vals = np.fft.ifft2(c).real * c.size
    c = np.fft.fft2(vals) / vals.size
    f = BoundaryField(vals)
    u = invert_theta_elliptic(f)
    back = d_theta(u.values) - hilbert_theta(u.values)
    assert np.allclose(back, f.values, atol=1e-12)


def test_elliptic_inverse_rejects_kernel_modes():
    f = BoundaryField(np.cos(GRID)[None, :] * np.ones((4, 1)))
    with pytest.raises(DegenerateModeError):
        invert_theta_elliptic(f)


def test_trig_interpolation_is_exact_for_band_limited_data():
    samples = np.cos(3 * GRID) + 0.5 * np.sin(GRID)
    phi = np.array([0.1, 1.3, 4.0])
    assert np.allclose(trig_interpolate(samples, phi), np.cos(3 * phi) + 0.5 * np.sin(phi), atol=1e-13)


def test_ode_solve_matches_exponential_and_reports_failure():
    traj = ode_solve(lambda t, y: -y, [1.0], (0.0, 2.0), 1e-12)
    assert traj.final[0] == pytest.approx(math.exp(-2.0), rel=1e-10)
    with pytest.raises(IntegrationError):
        ode_solve(lambda t, y: y**2, [1.0], (0.0, 2.0), 1e-10)


def test_locate_event_finds_zero_of_sine():
    traj = ode_solve(lambda t, y: np.array([y[1], -y[0]]), [0.0, 1.0], (0.0, 4.0), 1e-12)
    (t,) = locate_event(traj, lambda t, y: y[0], direction=-1)
    assert t == pytest.approx(math.pi, abs=1e-9)


@pytest.mark.parametrize("m", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_elliptic_integrals_against_defining_quadrature(m):
    # K = int_0^{pi/2} dt / sqrt(1 - m sin^2 t), E = int_0^{pi/2} sqrt(1 - m sin^2 t) dt;
    # smooth periodic integrands, so a 10^4-point midpoint rule is exact to rounding
    t = (np.arange(10_000) + 0.5) * (math.pi / 2) / 10_000
    s = 1 - m * np.sin(t) ** 2
    h = (math.pi / 2) / 10_000
    assert elliptic_K(m) == pytest.approx(np.sum(h / np.sqrt(s)), rel=1e-12)
    assert elliptic_E(m) == pytest.approx(np.sum(h * np.sqrt(s)), rel=1e-12)
