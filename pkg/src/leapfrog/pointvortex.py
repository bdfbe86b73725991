"""Symmetric leapfrogging quartet of point vortices in reduced coordinates.

Two counter-rotating pairs share the horizontal axis of symmetry: the upper
vortices ``z_1, z_2`` carry circulation ``+pi`` and their mirror images carry
``-pi``. With ``eta + i xi = z_1 - z_2`` and ``x0 = Re(z_1 + z_2)`` the motion
reduces to a planar Hamiltonian system in ``(eta, xi)`` plus a quadrature for
the drift ``x0``. This module integrates that system, evaluates its period in
three independent ways (event-detecting ODE, Gauss-Legendre quadrature,
elliptic closed form) and builds the polar representation ``(q, Theta)`` of
the relative motion on a uniform grid of the phase ``phi = omega0 t``.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .numerics import (
    FloatArray,
    IntegrationError,
    elliptic_E,
    elliptic_K,
    gauss_legendre,
    locate_event,
    ode_solve,
)


class SingularConfigurationError(ValueError):
    """Raised when the reduced vector field is evaluated at a collision."""


class ConventionMismatchError(RuntimeError):
    """Raised when the elliptic closed form disagrees with the quadrature."""


@dataclass(frozen=True)
class VortexParams:
    """Physical configuration of the quartet.

    Attributes
    ----------
    y0 : float
        Sum of the heights of the two upper vortices (conserved).
    xi0 : float
        Initial vertical gap of the upper pair when the four vortices are
        aligned on the vertical axis. Leapfrogging requires ``xi0 < y0/sqrt(2)``.
    eps : float
        Patch concentration scale (patch radius), in ``[0, 1)``.
    """

    y0: float = 1.0
    xi0: float = 0.5
    eps: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.y0) and self.y0 > 0):
            raise ValueError("y0 must be positive")
        if not (np.isfinite(self.xi0) and 0 < self.xi0 < self.y0 / math.sqrt(2.0)):
            raise ValueError("xi0 must satisfy 0 < xi0 < y0/sqrt(2) (leapfrogging regime)")
        if not (0.0 <= self.eps < 1.0):
            raise ValueError("eps must lie in [0, 1)")

    @property
    def alpha0(self) -> float:
        return (self.xi0 / self.y0) ** 2

    @property
    def h0(self) -> float:
        """``exp(2 H)`` on the orbit: ``y0^2 (y0^2/xi0^2 - 1)``."""
        return self.y0**2 * (self.y0**2 / self.xi0**2 - 1.0)

    def with_xi0(self, xi0: float) -> "VortexParams":
        return VortexParams(self.y0, xi0, self.eps)


@dataclass(frozen=True)
class PairState:
    """Reduced state: ``eta = Re(z1 - z2)``, ``xi = Im(z1 - z2)``, ``x0 = Re(z1 + z2)``."""

    eta: float
    xi: float
    x0: float = 0.0
    t: float = 0.0

    def as_array(self) -> FloatArray:
        return np.array([self.eta, self.xi, self.x0])


@dataclass(frozen=True)
class ActionAngleState:
    """Polar coordinates of the relative position: ``eta + i xi = sqrt(I) e^{i phi}``."""

    action: float
    angle: float

    @classmethod
    def from_pair(cls, state: PairState) -> "ActionAngleState":
        return cls(state.eta**2 + state.xi**2, math.atan2(state.xi, state.eta))


# ---------------------------------------------------------------------------
# vector field and invariant
# ---------------------------------------------------------------------------

def _rhs(eta, xi, y0):
    r2 = xi**2 + eta**2
    lo = y0**2 - xi**2
    hi = y0**2 + eta**2
    deta = -xi * hi / (r2 * lo)
    dxi = eta * lo / (r2 * hi)
    dx0 = y0 * (1.0 / hi + 1.0 / lo)
    return deta, dxi, dx0


def pair_rhs(state: PairState, params: VortexParams) -> PairState:
    """Time derivative ``(d eta/dt, d xi/dt, d x0/dt)`` of the reduced system."""
    y0 = params.y0
    if state.xi**2 >= y0**2:
        raise SingularConfigurationError("xi^2 >= y0^2: an upper vortex meets its image")
    if state.eta == 0.0 and state.xi == 0.0:
        raise SingularConfigurationError("eta = xi = 0: the upper vortices collide")
    deta, dxi, dx0 = _rhs(state.eta, state.xi, y0)
    return PairState(deta, dxi, dx0, state.t)


def hamiltonian(eta, xi, y0: float):
    """Conserved energy ``-1/2 log(1/(y0^2 - xi^2) - 1/(y0^2 + eta^2))``."""
    eta = np.asarray(eta, dtype=float)
    xi = np.asarray(xi, dtype=float)
    arg = 1.0 / (y0**2 - xi**2) - 1.0 / (y0**2 + eta**2)
    if np.any(y0**2 - xi**2 <= 0) or np.any(arg <= 0):
        raise ValueError("hamiltonian: logarithm argument must be positive")
    out = -0.5 * np.log(arg)
    return float(out) if out.ndim == 0 else out


def orbit_residual(eta, xi, params: VortexParams):
    """Normalized defect of the algebraic orbit equation.

    On the orbit through ``(0, xi0)``:
    ``(eta^2 + y0^4/xi0^2)(xi^2 + y0^4/xi0^2 - 2 y0^2) = y0^4 (y0^2/xi0^2 - 1)^2``.
    Returned as (left - right) / right.
    """
    y0, xi0 = params.y0, params.xi0
    c = y0**4 / xi0**2
    rhs = y0**4 * (y0**2 / xi0**2 - 1.0) ** 2
    lhs = (np.asarray(eta) ** 2 + c) * (np.asarray(xi) ** 2 + c - 2 * y0**2)
    return (lhs - rhs) / rhs


def eta_quarter(params: VortexParams) -> float:
    """Horizontal gap when the upper pair is level: ``xi0 y0 / sqrt(y0^2 - 2 xi0^2)``."""
    y0, xi0 = params.y0, params.xi0
    d = y0**2 - 2 * xi0**2
    if d <= 0:
        raise ValueError("eta_quarter requires xi0 < y0/sqrt(2)")
    return xi0 * y0 / math.sqrt(d)


# ---------------------------------------------------------------------------
# orbit integration
# ---------------------------------------------------------------------------

@dataclass
class OrbitTrajectory:
    """Sampled trajectory of the reduced system with energy bookkeeping."""

    t: FloatArray
    eta: FloatArray
    xi: FloatArray
    x0: FloatArray
    H: FloatArray
    params: VortexParams
    dense: object = field(repr=False, default=None)

    @property
    def hamiltonian_drift(self) -> float:
        H0 = self.H[0]
        return float(np.max(np.abs(self.H - H0)) / abs(H0))

    def state(self, k: int) -> PairState:
        return PairState(self.eta[k], self.xi[k], self.x0[k], self.t[k])

    def at(self, t) -> np.ndarray:
        """Dense-output evaluation; returns rows ``(eta, xi, x0)``."""
        return self.dense(t)

    def positions(self, t) -> tuple[np.ndarray, np.ndarray]:
        """Upper vortex positions ``(z1, z2)`` at times ``t``."""
        eta, xi, x0 = self.dense(t)
        y0 = self.params.y0
        centre = 0.5 * (x0 + 1j * y0)
        rel = 0.5 * (eta + 1j * xi)
        return centre + rel, centre - rel

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "eta", "xi", "x0", "H"])
            for row in zip(self.t, self.eta, self.xi, self.x0, self.H):
                w.writerow([f"{v:.17g}" for v in row])


def _orbit_rhs(y0: float):
    def f(t, y):
        return np.array(_rhs(y[0], y[1], y0))
    return f


def integrate_orbit(
    params: VortexParams,
    t_end: float,
    tol: float = 1e-12,
    n_samples: int | None = None,
) -> OrbitTrajectory:
    """Integrate from ``(eta, xi, x0) = (0, xi0, 0)`` to ``t_end``.

    With ``n_samples`` the trajectory is reported on a uniform time grid
    (including both endpoints); otherwise at the accepted steps.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    t_eval = None
    if n_samples is not None:
        t_eval = np.linspace(0.0, t_end, n_samples)
    traj = ode_solve(
        _orbit_rhs(params.y0), [0.0, params.xi0, 0.0], (0.0, t_end), tol,
        atol=tol * params.xi0 * 1e-2, t_eval=t_eval,
    )
    eta, xi, x0 = traj.y
    if np.any(xi**2 >= params.y0**2) or np.any(eta**2 + xi**2 <= 0):
        raise SingularConfigurationError("trajectory approached a singular configuration")
    H = hamiltonian(eta, xi, params.y0)
    return OrbitTrajectory(traj.t, eta, xi, x0, np.atleast_1d(H), params, traj.dense)


# ---------------------------------------------------------------------------
# period and frequency
# ---------------------------------------------------------------------------

def _period_kernel(alpha: float, s):
    """Integrand factor ``K(alpha, s)`` of the period integral."""
    one = 1.0 - 2.0 * alpha
    return (1 - alpha) * (one + alpha * s) ** 2 / (one * (one + alpha**2 * s) ** 1.5)


def period_quadrature(params: VortexParams, n_nodes: int = 128) -> float:
    """Period ``T = 4 xi0^2 int_0^1 K(alpha0, s^2) / sqrt(1 - s^2) ds``.

    The substitution ``s = sin u`` removes the endpoint singularity; the
    resulting smooth integral over ``[0, pi/2]`` is done by Gauss-Legendre.
    """
    u, w = gauss_legendre(n_nodes, 0.0, 0.5 * math.pi)
    vals = _period_kernel(params.alpha0, np.sin(u) ** 2)
    return float(4.0 * params.xi0**2 * np.dot(w, vals))


def _closed_form(xi0, alpha):
    kmod = alpha / (1.0 - alpha)      # elliptic modulus k
    m = kmod**2                        # parameter m = k^2
    lead = 8.0 * xi0**2 * (1.0 - alpha) / (1.0 - 2.0 * alpha)
    return lead * (((1 - alpha) ** 2 / alpha**2) * elliptic_E(m)
                   - ((1 - 2 * alpha) / alpha**2) * elliptic_K(m))


def period_closed_form(params: VortexParams, check: bool = True) -> float:
    """Period in terms of complete elliptic integrals.

    ``T = 8 xi0^2 (1-a)/(1-2a) [ (1-a)^2/a^2 E - (1-2a)/a^2 K ]`` where the
    elliptic modulus is ``k = a/(1-a)`` (parameter ``m = k^2``), ``a = alpha0``.
    For very small ``alpha0`` the bracket suffers cancellation, so a series
    in ``m`` is used there instead.

    With ``check`` the value is compared with :func:`period_quadrature` and a
    :class:`ConventionMismatchError` is raised beyond ``1e-8`` relative.
    """
    a = params.alpha0
    if a < 0.05:
        T = _closed_form_series(params.xi0, a)
    else:
        T = float(_closed_form(params.xi0, a))
    if check:
        Tq = period_quadrature(params)
        if abs(T - Tq) > 1e-8 * Tq:
            raise ConventionMismatchError(
                f"closed-form period {T!r} disagrees with quadrature {Tq!r}"
            )
    return T


def _closed_form_series(xi0: float, a: float) -> float:
    # Expand the bracket with the hypergeometric series of K and E in m = k^2:
    # (1-a)^2 E - (1-2a) K = (pi/2) sum_n c_n m^n with
    # K = (pi/2) sum ((2n)!/(2^{2n} n!^2))^2 m^n, E = (pi/2) sum (...)^2 m^n/(1-2n).
    k = a / (1 - a)
    m = k * k
    coef = 1.0
    total = a * a  # n = 0 term, (1-a)^2 - (1-2a), written without cancellation
    for n in range(1, 40):
        coef *= ((2 * n - 1) / (2 * n)) ** 2
        total += ((1 - a) ** 2 / (1 - 2 * n) - (1 - 2 * a)) * coef * m**n
    bracket = 0.5 * math.pi * total / a**2
    return 8.0 * xi0**2 * (1 - a) / (1 - 2 * a) * bracket


def period_numeric(params: VortexParams, tol: float = 1e-13) -> float:
    """Four times the first zero of ``xi(t)`` located by event detection.

    The orbit is integrated over a safe horizon (the upper bound of the period
    bracket) and the sign change of ``xi`` is refined on the dense output.
    """
    upper = period_upper_bound(params)
    traj = ode_solve(
        _orbit_rhs(params.y0), [0.0, params.xi0, 0.0], (0.0, 0.3 * upper),
        1e-12, atol=1e-14 * params.xi0,
    )
    roots = locate_event(traj, lambda t, y: y[1], xtol=tol)
    if not roots:
        raise IntegrationError("xi(t) never crossed zero: parameters outside the leapfrogging regime")
    return 4.0 * roots[0]


def period_lower_bound(params: VortexParams) -> float:
    return 2.0 * math.pi * params.xi0**2


def period_upper_bound(params: VortexParams) -> float:
    return 2.0 * math.pi * params.xi0**2 / (1.0 - 2.0 * params.alpha0)


def frequency(params: VortexParams) -> float:
    """``omega0 = 2 pi / T``."""
    return 2.0 * math.pi / period_closed_form(params, check=False)


@dataclass
class FrequencyProfile:
    xi0: FloatArray
    T: FloatArray
    omega0: FloatArray
    domega: FloatArray

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["xi0", "T", "omega0", "domega"])
            for row in zip(self.xi0, self.T, self.omega0, self.domega):
                w.writerow([f"{v:.17g}" for v in row])


def frequency_profile(
    y0: float,
    xi0_values,
    *,
    step: float | None = None,
    threads: int | None = None,
) -> FrequencyProfile:
    """Tabulate ``T``, ``omega0`` and ``d omega0 / d xi0`` on a grid of ``xi0``.

    The derivative is a central difference with step ``1e-4 y0``.
    """
    xs = np.asarray(xi0_values, dtype=float)
    h = 1e-4 * y0 if step is None else step

    def one(x):
        p = VortexParams(y0, x)
        T = period_closed_form(p)
        wp = frequency(VortexParams(y0, x + h))
        wm = frequency(VortexParams(y0, x - h))
        return T, 2 * math.pi / T, (wp - wm) / (2 * h)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        rows = list(pool.map(one, xs))
    T, w, dw = (np.array(c) for c in zip(*rows)) if rows else (np.array([]),) * 3
    return FrequencyProfile(xs, T, w, dw)


# ---------------------------------------------------------------------------
# polar representation on the phase grid
# ---------------------------------------------------------------------------

@dataclass
class PolarOrbit:
    """``(q, Theta)`` on ``phi_k = 2 pi k / n_phi`` with ``eta + i xi = sqrt(q) e^{i Theta}``.

    ``theta_dot`` is ``dTheta/dphi``; ``Theta`` is lifted continuously.
    """

    n_phi: int
    q: FloatArray
    theta_big: FloatArray
    theta_dot: FloatArray
    omega0: float
    period: float
    params: VortexParams

    @property
    def phi(self) -> FloatArray:
        return 2 * np.pi * np.arange(self.n_phi) / self.n_phi

    @property
    def theta_hat(self) -> FloatArray:
        """Periodic part ``Theta(phi) - phi``."""
        return self.theta_big - self.phi


def _polar_rhs(y0: float, omega0: float):
    def f(phi, y):
        q, th = y
        s2 = math.sin(th) ** 2
        c2 = math.cos(th) ** 2
        lo = y0**2 - q * s2
        hi = y0**2 + q * c2
        dq = -(1.0 / lo + 1.0 / hi) * math.sin(2 * th) * q / omega0
        dth = (1.0 / q + s2 / lo - c2 / hi) / omega0
        return np.array([dq, dth])
    return f


def theta_rate_bound(params: VortexParams) -> float:
    """Uniform bound ``6 pi / (y0^2 (1 - 2a)) exp(6 pi a / (1 - 2a))``."""
    a = params.alpha0
    return 6 * math.pi / (params.y0**2 * (1 - 2 * a)) * math.exp(6 * math.pi * a / (1 - 2 * a))


def solve_q_theta(params: VortexParams, n_phi: int = 256, tol: float = 1e-12) -> PolarOrbit:
    """Integrate the ``(q, Theta)`` system over one phase period.

    Starts from ``Theta(0) = pi/2``, ``q(0) = xi0^2`` with ``omega0`` from the
    closed-form period, and checks ``Theta(2 pi) = Theta(0) + 2 pi``.
    """
    if n_phi < 64 or n_phi & (n_phi - 1):
        raise ValueError("n_phi must be a power of two >= 64")
    T = period_closed_form(params)
    omega0 = 2 * math.pi / T
    rhs = _polar_rhs(params.y0, omega0)
    grid = 2 * np.pi * np.arange(n_phi + 1) / n_phi
    traj = ode_solve(rhs, [params.xi0**2, 0.5 * math.pi], (0.0, 2 * math.pi), tol,
                     atol=tol * 1e-2 * params.xi0**2, t_eval=grid)
    q, th = traj.y
    winding = th[-1] - th[0] - 2 * math.pi
    if abs(winding) > 1e3 * tol * 2 * math.pi:
        raise IntegrationError(f"Theta(2pi) - Theta(0) - 2pi = {winding:.3e}: period mismatch")
    q, th = q[:-1], th[:-1]
    if np.any(q <= 0):
        raise IntegrationError("q became non-positive")
    thdot = np.array([rhs(0.0, np.array([a, b]))[1] for a, b in zip(q, th)])
    return PolarOrbit(n_phi, q, th, thdot, omega0, T, params)
