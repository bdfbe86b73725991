import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from leapfrog.monodromy import (
    A0,
    CONJ_SWAP,
    GAUGE,
    HALF_SHIFT,
    NearSingularError,
    _union_length,
    a0_det_identity,
    a0_exponential,
    a0_integrated,
    a0_reference,
    build_system,
    cantor_measure,
    divisor,
    frequency_map,
    fundamental_matrix,
    mu,
    singular_scan,
    solve_mode_one,
)
from leapfrog.numerics import gauss_legendre, ode_solve
from leapfrog.pointvortex import VortexParams, solve_q_theta


@pytest.fixture(scope="module")
def system_half():
    p = VortexParams(1.0, 0.5, 0.1)
    return build_system(0.1, p, solve_q_theta(p, 128))


def test_reference_exponential_at_zero():
    E, det = a0_reference(0.0)
    assert np.allclose(E, np.eye(4), atol=1e-15) and det == 0.0


@given(st.floats(0.0, 4 * math.pi))
def test_closed_form_exponential_matches_matrix_ode(phi):
    assert np.abs(a0_exponential(phi) - a0_integrated(phi)).max() < 1e-9


@given(st.floats(0.0, 4 * math.pi))
def test_determinant_identity(phi):
    E = a0_exponential(phi)
    assert np.linalg.det(E - np.eye(4)).real == pytest.approx(a0_det_identity(phi), abs=1e-12)


def test_reference_matrix_symmetries():
    assert np.allclose(CONJ_SWAP @ A0.conj() @ CONJ_SWAP, A0)
    assert np.allclose(HALF_SHIFT @ A0 @ HALF_SHIFT, A0)


def test_coefficients_small_gap_limit():
    p = VortexParams(1.0, 0.02)
    s = build_system(0.0, p, solve_q_theta(p, 64))
    # in the gauge fixed by Theta(0) = pi/2 the limit is (i, i/4, 0, -i/2)
    limit = np.array([1j, -0.25j, 0.0, 0.5j]) * np.array([1, -1, 1, -1])
    err = np.abs(s.rho - limit[:, None]).max()
    assert err < 10 * p.alpha0
    A = s.matrix(0.7)
    assert np.abs(A - GAUGE @ A0 @ GAUGE).max() < 10 * p.alpha0


def test_coefficients_are_periodic_and_structured(system_half):
    s = system_half
    for phi in (0.0, 0.4, 2.0):
        A = s.matrix(phi)
        assert np.allclose(s.matrix(phi + 2 * math.pi), A, atol=1e-11)
        assert np.allclose(CONJ_SWAP @ A.conj() @ CONJ_SWAP, A, atol=1e-12)
        assert np.allclose(s.matrix(phi + math.pi), HALF_SHIFT @ A @ HALF_SHIFT, atol=1e-11)
    # trigonometric interpolation reproduces the grid samples
    assert np.allclose(s.coefficients(s.orbit.phi[5]), s.rho[:, 5], atol=1e-13)


def test_fundamental_matrix_report(system_half):
    rep = fundamental_matrix(system_half)
    assert rep.structure_ok
    assert abs(rep.det_gap.imag) < 1e-10
    assert rep.sup_norm < 1e3


def _random_forcing(rng, phi, modes=3):
    c = rng.normal(size=2 * modes + 1) + 1j * rng.normal(size=2 * modes + 1)
    return sum(ck * np.exp(1j * (k - modes) * phi) for k, ck in enumerate(c))


def test_zero_forcing_gives_zero(system_half):
    sol = solve_mode_one(system_half, np.zeros(system_half.n_phi))
    assert np.abs(sol.H).max() == 0.0


@pytest.mark.parametrize("seed", [0, 1])
def test_mode_one_solution_matches_variation_of_constants(system_half, seed):
    s = system_half
    rng = np.random.default_rng(seed)
    g1 = _random_forcing(rng, s.orbit.phi)
    sol = solve_mode_one(s, g1)
    assert sol.residual < 1e-8 and sol.periodicity_gap < 1e-8
    assert sol.conjugation_error < 1e-10
    # independent route: H(0) = (Id - M)^{-1} M(2pi) int_0^{2pi} M(phi)^{-1} F(phi) d phi
    x, w = gauss_legendre(96, 0.0, 2 * math.pi)
    traj = ode_solve(lambda t, y: (s.matrix(t) @ y.reshape(4, 4)).ravel(), np.eye(4, dtype=complex).ravel(),
                     (0.0, 2 * math.pi), 1e-12, atol=1e-14, t_eval=np.append(x, 2 * math.pi))
    Ms = traj.y.T.reshape(-1, 4, 4)
    coef = np.fft.fft(g1) / g1.size
    k = np.fft.fftfreq(g1.size, d=1.0 / g1.size)

    def g_at(phi):
        b = np.exp(1j * k * phi)
        b[g1.size // 2] = math.cos(phi * g1.size // 2)
        return coef @ b

    integral = np.zeros(4, dtype=complex)
    for Mi, xi, wi in zip(Ms[:-1], x, w):
        a, b = g_at(xi), g_at(xi + math.pi)
        F = np.array([a, np.conj(a), b, np.conj(b)]) / (s.omega0 * s.eps**2)
        integral += wi * np.linalg.solve(Mi, F)
    M = Ms[-1]
    H0 = np.linalg.solve(np.eye(4) - M, M @ integral)
    assert np.abs(H0 - sol.H0).max() < 1e-8 * np.abs(H0).max()


def test_solver_refuses_near_singular_parameters(system_half):
    with pytest.raises(NearSingularError):
        solve_mode_one(system_half, np.ones(system_half.n_phi), singular_roots=(0.5005,))
    with pytest.raises(ValueError):
        solve_mode_one(system_half, np.ones(7))


def test_singular_scan_near_the_first_root():
    scan = singular_scan(1.0, np.linspace(0.14, 0.16, 5), xtol=1e-9)
    assert len(scan.roots) == 1
    root, slope = scan.roots[0]
    assert root == pytest.approx(0.15187, abs=1e-4) and slope != 0
    # halving the grid spacing finds the same single root (no sign chatter)
    finer = singular_scan(1.0, np.linspace(0.14, 0.16, 9), xtol=1e-9)
    assert len(finer.roots) == 1 and finer.roots[0][0] == pytest.approx(root, abs=1e-8)


def test_no_singular_roots_near_zero():
    scan = singular_scan(1.0, np.linspace(0.01, 0.1, 4))
    assert scan.roots == []
    # the gap approaches the small-gap value with an O(xi0^2) deviation
    assert np.all(np.abs(scan.det_gap.real - 0.121262) < 2 * scan.xi0**2)


def test_multiplier_values():
    assert mu(2, 2, 0.0, 1.0) == 0.5
    assert mu(-3, 2, 0.0, 1.0) == -1.0
    assert mu(3, 1, 0.0, 1.0) == 1.5


def test_unperturbed_divisors_are_never_excluded():
    # |mu_{j,2}| >= 1/2 at eps = 0, so lambda < 1/2 never excludes; checked over a large box
    j = np.arange(-1000, 1001)
    j = j[np.abs(j) >= 2]
    vals = np.abs(j * 0.5 - 0.5 * np.sign(j))
    assert vals.min() == 0.5
    for jj, ll in ((2, 0), (-3, 7), (1000, -1000), (-1000, 999)):
        val, excluded = divisor(jj, ll, 0.3, 0.0, 0.3, 1.5)
        assert not excluded and abs(val) >= 0.5
    with pytest.raises(ValueError):
        divisor(1, 0, 0.3, 0.1, 0.3, 1.5, k=2)


def test_union_length():
    assert _union_length(np.array([0.0, 0.5, 2.0]), np.array([1.0, 1.5, 3.0])) == 2.5
    assert _union_length(np.empty(0), np.empty(0)) == 0.0


def test_frequency_map_round_trip():
    fwd, inv, _ = frequency_map(1.0, 0.2, 0.4, 201)
    xs = np.array([0.21, 0.3, 0.39])
    assert np.allclose(inv(fwd(xs)), xs, atol=1e-8)


def test_cantor_measure_bounds_and_records():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        scan = cantor_measure(0.05, 0.3, 1.5, (0.2, 0.4), j_max=32, singular_roots=(0.3,))
        zero = cantor_measure(0.0, 0.3, 1.5, (0.2, 0.4), j_max=32)
    assert 0 <= scan.measure <= 0.2
    assert scan.singular_measure == pytest.approx(2e-3)
    assert scan.measure >= scan.diophantine_measure
    assert zero.measure == 0.0
    rec = scan.records(limit=3)
    assert len(rec) == 3 and all(0.2 <= r["lo"] < r["hi"] <= 0.4 for r in rec)
    # every recorded interval really violates the condition at its midpoint
    for r in scan.records(limit=50):
        _, excluded = divisor(r["j"], r["l"], 0.5 * (r["lo"] + r["hi"]), 0.05, 0.3, 1.5, k=r["k"])
        assert excluded
    with pytest.raises(ValueError):
        cantor_measure(0.05, 0.3, 1.0, (0.2, 0.4))


def test_cantor_truncation_warning():
    with pytest.warns(RuntimeWarning, match="truncation"):
        scan = cantor_measure(0.1, 0.3, 1.5, (0.2, 0.4), j_max=16)
    assert scan.truncation_warning
