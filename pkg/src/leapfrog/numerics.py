"""Shared numerical kernels.

Complete elliptic integrals by the arithmetic-geometric mean, FFT-based
calculus on the 2-torus (time angle ``phi`` x boundary angle ``theta``), the
boundary Hilbert transform, the inverse of ``d/dtheta - Hilbert`` away from
its kernel, and a thin adaptive ODE engine with dense output and event
location.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

FloatArray = NDArray[np.float64]
ComplexArray = NDArray[np.complex128]

#: absolute tolerance used to decide that spatial modes +-1 are "zero"
MODE_ONE_TOL = 1e-12


class DegenerateModeError(ValueError):
    """Raised when inverting ``d/dtheta - Hilbert`` on its kernel (modes +-1)."""


class IntegrationError(RuntimeError):
    """Raised when the ODE engine fails (step underflow, NaN, missing event)."""


# ---------------------------------------------------------------------------
# complete elliptic integrals (parameter convention: m = k^2)
# ---------------------------------------------------------------------------

def elliptic_K(m):
    """Complete elliptic integral of the first kind, ``K(m)``, with ``m = k**2``.

    Computed as ``pi / (2 * AGM(1, sqrt(1 - m)))``. Accepts scalars or arrays
    with ``0 <= m < 1``.
    """
    arr = np.asarray(m, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr >= 1.0):
        raise ValueError("elliptic_K requires 0 <= m < 1")
    a = np.ones_like(arr)
    b = np.sqrt(1.0 - arr)
    for _ in range(64):
        a, b = 0.5 * (a + b), np.sqrt(a * b)
        if np.all(np.abs(a - b) <= 1e-16 * a):
            break
    out = np.pi / (2.0 * a)
    return float(out) if out.ndim == 0 else out


def elliptic_E(m):
    """Complete elliptic integral of the second kind, ``E(m)``, with ``m = k**2``.

    Uses the AGM together with the classical sum
    ``E = K * (1 - sum_n 2**(n-1) c_n**2)``. ``E(1) = 1`` is returned exactly.
    """
    arr = np.asarray(m, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("elliptic_E requires 0 <= m <= 1")
    out = np.ones_like(arr)
    inner = arr < 1.0
    mm = arr[inner]
    b0 = np.sqrt(1.0 - mm)
    a, b = 0.5 * (1.0 + b0), np.sqrt(b0)   # a_1, b_1
    c = mm / (2.0 * (1.0 + b0))            # c_1 = (a_0 - b_0)/2 without cancellation
    total = 0.5 * mm                        # 2^{-1} c_0^2 with c_0^2 = m
    weight = 1.0                            # 2^{n-1} at n = 1
    for _ in range(64):
        total = total + weight * c * c
        a_next = 0.5 * (a + b)
        b = np.sqrt(a * b)
        c = c * c / (4.0 * a_next)          # c_{n+1} = c_n^2 / (4 a_{n+1})
        a = a_next
        weight *= 2.0
        if np.all(weight * c * c <= 1e-18 * a):
            break
    out[inner] = np.pi / (2.0 * a) * (1.0 - total)
    return float(out) if out.ndim == 0 else out


def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0) -> tuple[FloatArray, FloatArray]:
    """Gauss-Legendre nodes and weights mapped to ``[a, b]``."""
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


# ---------------------------------------------------------------------------
# fields on the torus
# ---------------------------------------------------------------------------

def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class BoundaryField:
    """Real scalar field ``r(phi, theta)`` sampled on a uniform torus grid.

    ``values[m, n]`` is the value at ``phi_m = 2 pi m / n_phi`` and
    ``theta_n = 2 pi n / n_theta``. The spectral view ``coeffs`` is normalized
    so that ``values = sum coeffs[l, j] exp(i (l phi + j theta))``.
    """

    values: FloatArray
    real: bool = field(default=True)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2:
            raise ValueError("BoundaryField values must be a 2-D (n_phi, n_theta) array")
        if not (_is_pow2(v.shape[0]) and _is_pow2(v.shape[1])):
            raise ValueError("grid sizes must be powers of two")
        v = v.astype(float) if self.real else v.astype(complex)
        object.__setattr__(self, "values", v)

    @property
    def n_phi(self) -> int:
        return self.values.shape[0]

    @property
    def n_theta(self) -> int:
        return self.values.shape[1]

    @property
    def coeffs(self) -> ComplexArray:
        return np.fft.fft2(self.values) / self.values.size

    @classmethod
    def from_coeffs(cls, coeffs: ComplexArray, real: bool = True) -> "BoundaryField":
        vals = np.fft.ifft2(coeffs) * coeffs.size
        return cls(vals.real if real else vals, real=real)

    @classmethod
    def zeros(cls, n_phi: int, n_theta: int) -> "BoundaryField":
        return cls(np.zeros((n_phi, n_theta)))

    def spatial_mean(self) -> FloatArray:
        """Mean over ``theta`` for each ``phi`` slice."""
        return self.values.mean(axis=1)

    def without_mean(self) -> "BoundaryField":
        return BoundaryField(self.values - self.values.mean(axis=1, keepdims=True), real=self.real)

    def norm_l2(self) -> float:
        """Root-mean-square over the grid (equals the spectral l2 norm)."""
        return float(np.sqrt(np.mean(np.abs(self.values) ** 2)))

    def norm_sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __add__(self, other: "BoundaryField") -> "BoundaryField":
        return BoundaryField(self.values + _vals(other), real=self.real)

    def __sub__(self, other: "BoundaryField") -> "BoundaryField":
        return BoundaryField(self.values - _vals(other), real=self.real)

    def __mul__(self, scalar: float) -> "BoundaryField":
        return BoundaryField(self.values * scalar, real=self.real)

    __rmul__ = __mul__

    def __neg__(self) -> "BoundaryField":
        return BoundaryField(-self.values, real=self.real)

    # -- serialization -----------------------------------------------------
    def to_record(self) -> dict:
        c = self.coeffs
        return {
            "n_phi": self.n_phi,
            "n_theta": self.n_theta,
            "real": self.real,
            "coeffs": np.stack([c.real.ravel(), c.imag.ravel()], axis=1).tolist(),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "BoundaryField":
        pairs = np.asarray(rec["coeffs"], dtype=float)
        c = (pairs[:, 0] + 1j * pairs[:, 1]).reshape(rec["n_phi"], rec["n_theta"])
        return cls.from_coeffs(c, real=bool(rec["real"]))

    def to_json(self) -> str:
        return json.dumps(self.to_record())


def _vals(f) -> np.ndarray:
    return f.values if isinstance(f, BoundaryField) else np.asarray(f)


def wavenumbers(n: int) -> FloatArray:
    """Integer FFT wavenumbers ``0, 1, ..., n/2-1, -n/2, ..., -1``."""
    return np.fft.fftfreq(n, d=1.0 / n)


def dealias(values: np.ndarray) -> np.ndarray:
    """Zero every mode above two thirds of the Nyquist index on both axes."""
    c = np.fft.fft2(values)
    for axis, n in enumerate(values.shape):
        k = np.abs(wavenumbers(n))
        mask = k <= (n // 2) * 2 // 3
        shape = [1, 1]
        shape[axis] = n
        c = c * mask.reshape(shape)
    out = np.fft.ifft2(c)
    return out.real if np.isrealobj(values) else out


def dealiased_product(*factors: BoundaryField) -> BoundaryField:
    """Pointwise product of fields followed by 2/3-rule filtering."""
    prod = np.ones_like(_vals(factors[0]))
    for f in factors:
        prod = prod * dealias(_vals(f))
    return BoundaryField(dealias(prod))


def theta_multiplier(values: np.ndarray, symbol: np.ndarray) -> np.ndarray:
    """Apply a Fourier multiplier along the last (theta) axis."""
    c = np.fft.fft(values, axis=-1) * symbol
    out = np.fft.ifft(c, axis=-1)
    return out.real if np.isrealobj(values) else out


def hilbert_theta(values: np.ndarray) -> np.ndarray:
    """Array version of :func:`hilbert_transform` (multiplier ``i sign(j)``)."""
    j = wavenumbers(values.shape[-1])
    return theta_multiplier(values, 1j * np.sign(j))


def d_theta(values: np.ndarray) -> np.ndarray:
    """Spectral derivative along theta (last axis); Nyquist mode dropped."""
    n = values.shape[-1]
    j = wavenumbers(n)
    j[n // 2] = 0.0
    return theta_multiplier(values, 1j * j)


def d_phi(values: np.ndarray) -> np.ndarray:
    """Spectral derivative along phi (first axis); Nyquist mode dropped."""
    n = values.shape[0]
    ell = wavenumbers(n)
    ell[n // 2] = 0.0
    c = np.fft.fft(values, axis=0) * (1j * ell)[:, None]
    out = np.fft.ifft(c, axis=0)
    return out.real if np.isrealobj(values) else out


def hilbert_transform(h: BoundaryField) -> BoundaryField:
    """Boundary Hilbert transform: mode ``j`` is multiplied by ``i sign(j)``."""
    return BoundaryField(hilbert_theta(h.values))


def spectral_derivative(h: BoundaryField, axis: str = "theta", dealiased: bool = False) -> BoundaryField:
    """Derivative of ``h`` along ``"phi"`` or ``"theta"``, optionally 2/3-filtered."""
    v = dealias(h.values) if dealiased else h.values
    if axis == "theta":
        return BoundaryField(d_theta(v))
    if axis == "phi":
        return BoundaryField(d_phi(v))
    raise ValueError(f"unknown axis {axis!r}; expected 'phi' or 'theta'")


def invert_theta_elliptic(f: BoundaryField, tol: float = MODE_ONE_TOL) -> BoundaryField:
    """Solve ``(d/dtheta - Hilbert) u = f`` for the zero-mean ``u`` without modes +-1.

    The symbol is ``i (j - sign j)``, which vanishes on ``j in {-1, 0, 1}``;
    those modes of ``f`` must be (numerically) zero.
    """
    n = f.n_theta
    c = np.fft.fft(f.values, axis=-1) / n
    j = wavenumbers(n)
    kernel = np.abs(j) <= 1
    bad = np.max(np.abs(c[:, kernel])) if f.n_phi else 0.0
    if bad > tol:
        raise DegenerateModeError(
            f"right-hand side has |mode| = {bad:.3e} on j in {{-1,0,1}}; "
            "d/dtheta - Hilbert is not invertible there"
        )
    symbol = 1j * (j - np.sign(j))
    safe = np.where(kernel, 1.0, symbol)
    u = np.where(kernel, 0.0, c / safe)
    return BoundaryField(np.fft.ifft(u * n, axis=-1).real)


def trig_interpolate(samples: np.ndarray, phi: float | np.ndarray) -> np.ndarray:
    """Evaluate the trigonometric interpolant of periodic samples (axis 0) at ``phi``.

    The Nyquist coefficient is split symmetrically so real data stays real.
    """
    n = samples.shape[0]
    c = np.fft.fft(samples, axis=0) / n
    k = wavenumbers(n)
    phi_arr = np.atleast_1d(np.asarray(phi, dtype=float))
    basis = np.exp(1j * np.outer(phi_arr, k))
    basis[:, n // 2] = np.cos(phi_arr * (n // 2))
    out = basis @ c.reshape(n, -1)
    out = out.reshape((phi_arr.size,) + samples.shape[1:])
    if np.isrealobj(samples):
        out = out.real
    return out[0] if np.ndim(phi) == 0 else out


# ---------------------------------------------------------------------------
# ODE engine
# ---------------------------------------------------------------------------

@dataclass
class Trajectory:
    """Output of :func:`ode_solve`: step times, states and a dense interpolant."""

    t: FloatArray
    y: np.ndarray          # shape (n_state, n_steps)
    dense: Callable[[float | FloatArray], np.ndarray]
    nfev: int

    def __call__(self, t):
        return self.dense(t)

    @property
    def final(self) -> np.ndarray:
        return self.y[:, -1]


def ode_solve(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    state0,
    t_span: tuple[float, float],
    tol: float = 1e-12,
    *,
    atol: float | None = None,
    method: str = "RK45",
    t_eval=None,
    max_step: float = np.inf,
) -> Trajectory:
    """Adaptive embedded Runge-Kutta integration with dense output.

    Thin wrapper over :func:`scipy.integrate.solve_ivp` (Dormand-Prince 5(4)
    by default) that accepts real or complex states, raises
    :class:`IntegrationError` on failure or non-finite values, and always
    keeps the dense interpolant.
    """
    y0 = np.atleast_1d(np.asarray(state0))
    if tol <= 0:
        raise ValueError("tol must be positive")
    if atol is None:
        atol = tol * 1e-2
    sol = solve_ivp(
        rhs, t_span, y0, method=method, rtol=tol, atol=atol,
        dense_output=True, t_eval=t_eval, max_step=max_step,
    )
    if sol.status != 0:
        raise IntegrationError(f"integration failed: {sol.message}")
    if not np.all(np.isfinite(sol.y)):
        raise IntegrationError("integration produced non-finite values")
    return Trajectory(t=sol.t, y=sol.y, dense=sol.sol, nfev=sol.nfev)


def locate_event(
    traj: Trajectory,
    fn: Callable[[float, np.ndarray], float],
    *,
    xtol: float = 1e-13,
    direction: int = 0,
    first_only: bool = True,
) -> list[float]:
    """Times where ``fn(t, y(t))`` changes sign, refined on the dense output.

    Sign changes are bracketed between accepted steps; each bracket is refined
    by a bracketing root finder (Brent) to ``xtol``.
    """
    g = np.array([fn(t, traj.y[:, k]) for k, t in enumerate(traj.t)])
    roots: list[float] = []
    for k in range(len(g) - 1):
        g0, g1 = g[k], g[k + 1]
        if g0 == 0.0 and k == 0:
            continue
        if g0 * g1 > 0 or (g0 == 0.0):
            continue
        if direction > 0 and not g1 > g0:
            continue
        if direction < 0 and not g1 < g0:
            continue
        f = lambda s: fn(s, traj.dense(s))
        roots.append(brentq(f, traj.t[k], traj.t[k + 1], xtol=xtol, rtol=4 * np.finfo(float).eps))
        if first_only:
            break
    return roots
