import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from leapfrog.contour import (
    G_residual,
    PatchGeometry,
    RadiusPositivityError,
    SeriesConvergenceError,
    _segments_intersect,
    approx_solution,
    boundary_area,
    boundary_centroid,
    count_sign_changes,
    g0_series,
    g_field,
    psi1_theta_derivative,
    psi1_values,
    psi_eval,
    radial_modes,
    redistribute_arclength,
    second_order_forcing,
    series_tail_bound,
    simulate_patches,
)
from leapfrog.numerics import BoundaryField, d_theta
from leapfrog.pointvortex import VortexParams, period_closed_form


@pytest.fixture(scope="module")
def geom64():
    return PatchGeometry.build(VortexParams(1.0, 0.5), 64)


def _grid(n):
    return 2 * np.pi * np.arange(n) / n


def test_leading_coefficient_at_alignment(geom64):
    # at phi = 0 the pair is aligned vertically; a_2 = 1/xi0^2 + 1/(y0+xi0)^2 ... evaluates to 23/9
    assert geom64.a2[0] == pytest.approx(23 / 9, rel=1e-12)
    assert geom64.coefficient(3).shape == (64,)
    with pytest.raises(ValueError):
        geom64.coefficient(1)


def test_self_potential_of_a_disc():
    # potential of the unit disc on its own boundary vanishes: (1/2pi) * pi * log 1
    vals = psi1_values(np.ones((2, 32)))
    assert np.allclose(vals, 0.0, atol=1e-14)
    assert np.allclose(psi1_theta_derivative(np.ones((2, 32))), 0.0, atol=1e-14)


@given(st.integers(0, 2**31))
def test_self_potential_derivative_two_routes(seed):
    # contour velocity route vs spectral derivative of the contour potential route
    rng = np.random.default_rng(seed)
    th = _grid(64)
    r = sum(rng.normal() * 0.05 * np.cos(k * th + rng.uniform(0, 6)) for k in range(2, 6))
    R = np.sqrt(1 + 2 * 0.2 * r)[None, :]
    a = psi1_theta_derivative(R)
    b = d_theta(psi1_values(R))
    assert np.abs(a - b).max() < 1e-9 * max(1.0, np.abs(a).max())


def test_self_potential_against_direct_area_quadrature():
    # ellipse-like boundary: compare with brute-force polar quadrature of the area integral
    th = _grid(64)
    R = 1 + 0.1 * np.cos(2 * th)
    vals = psi1_values(R[None, :])[0]
    t = 5
    z = R[t] * np.exp(1j * th[t])
    # area integral in polar coordinates, radial Gauss-Legendre on [0, R(eta)]
    x, w = np.polynomial.legendre.leggauss(200)
    eta = _grid(2048)
    Re = 1 + 0.1 * np.cos(2 * eta)
    s = 0.5 * (x[None, :] + 1) * Re[:, None]
    ws = 0.5 * w[None, :] * Re[:, None]
    zeta = s * np.exp(1j * eta[:, None])
    direct = np.sum(np.log(np.abs(z - zeta)) * s * ws) * (2 * np.pi / eta.size) / (2 * np.pi)
    assert vals[t] == pytest.approx(direct, abs=5e-5)


def test_far_potentials_vanish_at_zero_eps(geom64):
    zero = BoundaryField.zeros(64, 32)
    for n in (2, 3, 4):
        assert np.all(psi_eval(n, 0.0, zero, geom64) == 0.0)
    with pytest.raises(ValueError):
        psi_eval(5, 0.1, zero, geom64)
    with pytest.raises(ValueError):
        psi_eval(2, 0.1, BoundaryField.zeros(32, 32), geom64)


def test_g0_quadrature_matches_series_on_a_small_grid(geom64):
    zero = BoundaryField.zeros(64, 64)
    for eps in (0.05, 0.1):
        quad = G_residual(eps, zero, geom64, n_l=32)
        series = g0_series(eps, geom64, 64)
        assert np.abs(quad.values - series.values).max() < 1e-10
    assert series_tail_bound(0.1, geom64) < 1e-12


def test_g0_leading_order_is_minus_half_eps_squared_im_a2(geom64):
    eps = 1e-3
    series = g0_series(eps, geom64, 32)
    lead = 0.5 * eps**2 * (geom64.a2[:, None] * np.exp(2j * _grid(32))[None, :]).imag
    assert np.abs(series.values - lead).max() < 10 * eps**3


def test_series_refuses_large_eps(geom64):
    with pytest.raises(SeriesConvergenceError):
        g0_series(0.3, geom64, 32)


def test_radius_positivity_is_checked(geom64):
    r = BoundaryField(-10 * np.ones((64, 16)))
    with pytest.raises(RadiusPositivityError):
        G_residual(0.1, r, geom64)


def test_approx_solution_structure(geom64):
    sol = approx_solution(0.0, geom64, 32)
    assert np.allclose(sol.r_eps.values, g_field(geom64, 32).values)
    sol = approx_solution(0.05, geom64, 32)
    # r_eps differs from g by O(eps); the correction has no kernel modes
    assert (sol.r_eps - sol.g).norm_sup() < 10 * 0.05 * sol.g.norm_sup()
    c = np.fft.fft(sol.r1.values, axis=1)
    assert np.abs(c[:, [0, 1, -1]]).max() < 1e-10
    assert sol.state().norm_sup() == pytest.approx(0.05 * sol.r_eps.norm_sup())


def test_transport_term_improves_the_residual(geom64):
    # the order-eps^4 forcing must include the transport of g; without it the residual is larger
    eps = 0.05
    full = approx_solution(eps, geom64, 64, with_transport=True)
    partial = approx_solution(eps, geom64, 64, with_transport=False)
    r_full = G_residual(eps, full.state(), geom64, n_l=32).norm_sup()
    r_part = G_residual(eps, partial.state(), geom64, n_l=32).norm_sup()
    assert r_full < 0.5 * r_part
    A = second_order_forcing(geom64, 32)
    assert A.values.shape == (64, 32)


def test_curve_geometry_helpers():
    th = _grid(128)
    circle = 2 + 1j + 0.5 * np.exp(1j * th)
    assert boundary_area(circle) == pytest.approx(math.pi * 0.25, rel=1e-13)
    assert boundary_centroid(circle) == pytest.approx(2 + 1j, abs=1e-13)
    modes = radial_modes(circle, 2 + 1j, 0.5)
    assert modes[0] == pytest.approx(1.0) and np.all(modes[1:] < 1e-12)
    ell = np.exp(1j * th) * (1 + 0.01 * np.cos(2 * th))
    assert radial_modes(ell, 0j, 1.0)[2] == pytest.approx(0.005, rel=1e-3)


def test_arclength_redistribution_keeps_the_curve():
    th = _grid(64)
    t = th + 0.3 * np.sin(th)          # non-uniform parametrisation of a circle
    z = np.exp(1j * t)
    w = redistribute_arclength(z)
    assert np.allclose(np.abs(w), 1.0, atol=1e-10)
    gaps = np.abs(np.diff(np.append(w, w[0])))
    assert gaps.max() / gaps.min() < 1 + 1e-8


def test_self_intersection_detection():
    th = _grid(64)
    assert not _segments_intersect(np.exp(1j * th))
    figure_eight = np.sin(th) + 1j * np.sin(2 * th)
    assert _segments_intersect(figure_eight)


def test_sign_change_counter():
    assert count_sign_changes(np.array([-1.0, 0.0, 2.0, 1.0, -3.0])) == 2


def test_short_simulation_from_circular_data(tmp_path):
    p = VortexParams(1.0, 0.5, 0.1)
    T = period_closed_form(p)
    traj = simulate_patches(p, None, 0.02 * T, n_snapshots=3, n_nodes=64)
    assert np.all(np.abs(traj.areas(0) / traj.areas(0)[0] - 1) < 1e-8)
    # circular start: mode 2 begins at zero and is then forced by the strain of the others
    m2 = [s.modes[0][2] for s in traj.snapshots]
    assert m2[0] < 1e-12 and m2[-1] > m2[0]
    manifest = traj.write(tmp_path, plot_data=False)
    data = json.loads(manifest.read_text())
    assert len(data["snapshots"]) == 3
    first = (tmp_path / data["snapshots"][0]["file"]).read_text().splitlines()
    assert first[0] == "k,x,y" and len(first) == 1 + 4 * 64
    traj.write(tmp_path / "plot", plot_data=True)
    assert (tmp_path / "plot" / "snapshot_00000.csv").read_text().startswith("# k x y")


def test_simulation_needs_positive_eps():
    with pytest.raises(ValueError):
        simulate_patches(VortexParams(1.0, 0.5, 0.0), None, 0.1)


def test_g_field_has_only_modes_two(geom64):
    g = g_field(geom64, 32)
    c = np.abs(np.fft.fft(g.values, axis=1))
    mask = np.ones(32, dtype=bool)
    mask[[2, -2]] = False
    assert c[:, mask].max() < 1e-13 * c.max()
    # half a period later the patch is the lower member of its pair, closer to the
    # mirror: a_2 is 2 pi- but not pi-periodic; at phi = pi it equals 4 - 4 - 1 = -1
    assert geom64.a2[32] == pytest.approx(-1.0, abs=1e-9)


def test_pole_positions_stay_away(geom64):
    # the image distance is smallest when the patch is the lower member: y0 - xi0
    assert np.abs(geom64.w3).min() == pytest.approx(0.5, abs=1e-9)
    assert np.all(np.abs(geom64.w4) >= 1.0 - 1e-12)


def test_functional_vanishes_at_zero_eps(geom64):
    r = BoundaryField(np.cos(3 * _grid(32))[None, :] * np.ones((64, 1)))
    assert G_residual(0.0, r, geom64).norm_sup() < 1e-14


def test_zero_mean_and_even_forcing(geom64):
    sol = approx_solution(0.08, geom64, 32)
    for f in (sol.r_eps, sol.r0, sol.r1, G_residual(0.08, sol.state(), geom64, n_l=16)):
        assert np.abs(f.spatial_mean()).max() < 1e-13
    c = np.abs(np.fft.fft(sol.forcing.values, axis=1))
    assert c[:, 1::2].max() < 1e-12          # only even modes in space


def test_initial_mode_two_amplitude_matches_the_leading_profile():
    from leapfrog.contour import initial_boundaries

    p = VortexParams(1.0, 0.5, 0.1)
    geom = PatchGeometry.build(VortexParams(1.0, 0.5), 64)
    sol = approx_solution(0.1, geom, 128)
    pred = 0.01 * abs(geom.a2[0]) / 2
    # the leading profile eps * r0 reproduces eps^2 |a_2(0)| / 2 within 10%
    w1, _ = initial_boundaries(p, 0.1 * sol.r0, geom.orbit)
    m_r0 = radial_modes(w1, boundary_centroid(w1), 0.1)[2]
    assert abs(m_r0 - pred) < 0.1 * pred
    # with the eps r_1 correction the amplitude equals that field's own mode-2 coefficient
    w1, _ = initial_boundaries(p, sol.state(), geom.orbit)
    m_full = radial_modes(w1, boundary_centroid(w1), 0.1)[2]
    own = 0.01 * abs(np.fft.fft(sol.r_eps.values[0])[2]) / 128
    assert abs(m_full - own) < 0.02 * own
