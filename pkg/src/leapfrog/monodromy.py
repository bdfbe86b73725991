"""Degenerate +-1 boundary modes: monodromy, singular set, small divisors.

The spatial modes +-1 of the linearized patch equation (one complex amplitude
per patch and its conjugate) obey a 4x4 linear ODE in the phase ``phi`` whose
coefficients are 2pi-periodic and built from the polar orbit ``(q, Theta)``.
This module assembles that coefficient matrix, integrates its fundamental
matrix, compares it with the closed-form exponential of the small-gap limit
matrix ``A0``, scans for parameters where ``det(M(2pi) - Id)`` vanishes,
solves the periodic forced problem, and measures the parameter sets removed
by the Diophantine (small divisor) conditions.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .numerics import (
    ComplexArray,
    FloatArray,
    d_phi,
    ode_solve,
)
from .pointvortex import PolarOrbit, VortexParams, frequency, period_closed_form, solve_q_theta


class NearSingularError(RuntimeError):
    """Raised when ``Id - M(2pi)`` is (numerically) not invertible."""


SQ15 = math.sqrt(15.0)
SQ7 = math.sqrt(7.0)

#: small-gap limit of the coefficient matrix, in the phase convention of the
#: closed-form exponential below
A0 = np.array(
    [
        [1j, -0.25j, 0.0, 0.5j],
        [0.25j, -1j, -0.5j, 0.0],
        [0.0, 0.5j, 1j, -0.25j],
        [-0.5j, 0.0, 0.25j, -1j],
    ]
)

#: sign gauge relating the literal coefficient formulas (with Theta(0) = pi/2)
#: to ``A0``: the limit of the assembled matrix is ``GAUGE @ A0 @ GAUGE``
GAUGE = np.diag([1.0, -1.0, 1.0, -1.0])

#: swap (1,2) <-> (3,4): the half-period shift acts as ``A(phi+pi) = P A(phi) P``
HALF_SHIFT = np.array(
    [[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]], dtype=float
)
#: swap 1<->2 and 3<->4: the reality symmetry reads ``conj(A) = J A J``
CONJ_SWAP = np.array(
    [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=float
)


# ---------------------------------------------------------------------------
# closed-form reference
# ---------------------------------------------------------------------------

def _a_entries(phi: float):
    u, v = SQ15 * phi / 4, SQ7 * phi / 4
    a1 = 0.5 * math.cos(u) + 0.5 * math.cos(v) + 1j * (2 / SQ15 * math.sin(u) + 2 / SQ7 * math.sin(v))
    a2 = 0.5j * (math.sin(u) / SQ15 - 3 * math.sin(v) / SQ7)
    a3 = 0.5 * math.cos(u) - 0.5 * math.cos(v) + 1j * (2 / SQ15 * math.sin(u) - 2 / SQ7 * math.sin(v))
    a4 = 0.5j * (math.sin(u) / SQ15 + 3 * math.sin(v) / SQ7)
    return a1, a2, a3, a4


def a0_exponential(phi: float) -> ComplexArray:
    """``exp(phi A0)`` from its explicit trigonometric entries."""
    a1, a2, a3, a4 = _a_entries(phi)
    c = np.conj
    return np.array(
        [
            [a1, a2, a3, a4],
            [c(a2), c(a1), c(a4), c(a3)],
            [a3, a4, a1, a2],
            [c(a4), c(a3), c(a2), c(a1)],
        ]
    )


def a0_det_identity(phi):
    """``16 sin^2(sqrt15 phi/8) sin^2(sqrt7 phi/8)``."""
    phi = np.asarray(phi, dtype=float)
    return 16 * np.sin(SQ15 * phi / 8) ** 2 * np.sin(SQ7 * phi / 8) ** 2


def a0_reference(phi: float) -> tuple[ComplexArray, float]:
    """Closed-form ``exp(phi A0)`` together with ``det(exp(phi A0) - Id)``."""
    return a0_exponential(phi), float(a0_det_identity(phi))


def a0_integrated(phi: float, tol: float = 1e-12) -> ComplexArray:
    """``exp(phi A0)`` by integrating ``M' = A0 M`` with the shared ODE engine."""
    if phi == 0:
        return np.eye(4, dtype=complex)
    traj = ode_solve(lambda t, y: (A0 @ y.reshape(4, 4)).ravel(),
                     np.eye(4, dtype=complex).ravel(), (0.0, phi), tol, atol=tol * 1e-2)
    return traj.final.reshape(4, 4)


# ---------------------------------------------------------------------------
# coefficient matrix
# ---------------------------------------------------------------------------

@dataclass
class ModeOneSystem:
    """Coefficients ``rho_1..rho_4`` sampled on the phase grid of ``orbit``."""

    rho: ComplexArray          # shape (4, n_phi)
    eps: float
    xi0: float
    omega0: float
    c2: float
    orbit: PolarOrbit = field(repr=False)

    @property
    def rho1(self) -> ComplexArray:
        return self.rho[0]

    @property
    def rho2(self) -> ComplexArray:
        return self.rho[1]

    @property
    def rho3(self) -> ComplexArray:
        return self.rho[2]

    @property
    def rho4(self) -> ComplexArray:
        return self.rho[3]

    @property
    def n_phi(self) -> int:
        return self.rho.shape[1]

    def __post_init__(self):
        self._coef = np.fft.fft(self.rho, axis=1) / self.rho.shape[1]
        n = self.rho.shape[1]
        self._k = np.fft.fftfreq(n, d=1.0 / n)

    def coefficients(self, phi: float) -> ComplexArray:
        """Trigonometric interpolant of ``(rho_1, ..., rho_4)`` at ``phi``."""
        n = self._k.size
        basis = np.exp(1j * self._k * phi)
        basis[n // 2] = math.cos(phi * (n // 2))
        return self._coef @ basis

    def matrix(self, phi: float) -> ComplexArray:
        """Assembled 4x4 coefficient matrix ``A(phi)``."""
        r = self.coefficients(phi)
        s = self.coefficients(phi + math.pi)
        return assemble_matrix(r, s)


def assemble_matrix(r, s) -> ComplexArray:
    """Layout rows 1-4 from coefficients ``r`` at ``phi`` and ``s`` at ``phi + pi``."""
    c = np.conj
    return np.array(
        [
            [r[0], r[1], r[2], r[3]],
            [c(r[1]), c(r[0]), c(r[3]), c(r[2])],
            [s[2], s[3], s[0], s[1]],
            [c(s[3]), c(s[2]), c(s[1]), c(s[0])],
        ]
    )


def build_system(eps: float, params: VortexParams, orbit: PolarOrbit, c2: float = 0.0) -> ModeOneSystem:
    """Sample ``rho_1..rho_4`` on the orbit's phase grid.

    ``c2`` is the constant correction to the transport frequency; it is not
    computable without the full normal-form reduction and defaults to 0.
    """
    q, th, w0 = orbit.q, orbit.theta_big, orbit.omega0
    phi = orbit.phi
    th_hat = th - phi
    sq = np.sqrt(q)
    w3 = 1j * (sq * np.sin(th) + params.y0)
    w4 = sq * np.cos(th) + 1j * params.y0
    e2 = np.exp(2j * phi)
    rho1 = (1j / w0) * (w0 + 1.0 / (2 * w3**2) - eps * c2)
    rho2 = -(1j / (4 * w0)) * (np.exp(-2j * th_hat) / q - e2 / w3**2 - e2 / w4**2)
    rho3 = -1j / (2 * w0 * w4**2)
    rho4 = 1j * np.exp(2j * th_hat) / (2 * w0 * q)
    return ModeOneSystem(np.array([rho1, rho2, rho3, rho4]), eps, params.xi0, w0, c2, orbit)


# ---------------------------------------------------------------------------
# fundamental matrix
# ---------------------------------------------------------------------------

@dataclass
class MonodromyReport:
    M: ComplexArray                  # M(2pi, 0)
    det_gap: complex                 # det(M - Id)
    structure_ok: bool
    conj_error: float                # || J conj(M) J - M ||
    shift_error: float               # || (P M(pi))^2 - M(2pi) ||
    sup_norm: float                  # max over the grid of ||M(phi)||
    M_half: ComplexArray = field(repr=False, default=None)


def _matrix_rhs(system: ModeOneSystem):
    def f(phi, y):
        return (system.matrix(phi) @ y.reshape(4, 4)).ravel()
    return f


def fundamental_matrix(system: ModeOneSystem, tol: float = 1e-12, n_report: int = 65) -> MonodromyReport:
    """Integrate ``M' = A(phi) M``, ``M(0) = Id`` over ``[0, 2pi]`` and check its symmetries."""
    grid = np.linspace(0.0, 2 * math.pi, 2 * ((n_report - 1) // 2) + 1)
    traj = ode_solve(_matrix_rhs(system), np.eye(4, dtype=complex).ravel(),
                     (0.0, 2 * math.pi), tol, atol=tol * 1e-2, t_eval=grid)
    Ms = traj.y.T.reshape(-1, 4, 4)
    M = Ms[-1]
    M_half = Ms[(len(grid) - 1) // 2]
    scale = max(1.0, np.linalg.norm(M))
    conj_err = float(np.linalg.norm(CONJ_SWAP @ M.conj() @ CONJ_SWAP - M) / scale)
    PM = HALF_SHIFT @ M_half
    shift_err = float(np.linalg.norm(PM @ PM - M) / scale)
    det_gap = complex(np.linalg.det(M - np.eye(4)))
    sup = float(max(np.linalg.norm(m, 2) for m in Ms))
    ok = conj_err < 1e-8 and shift_err < 1e-8
    return MonodromyReport(M, det_gap, ok, conj_err, shift_err, sup, M_half)


def monodromy_at(params: VortexParams, eps: float = 0.0, n_phi: int = 128, c2: float = 0.0,
                 tol: float = 1e-12) -> MonodromyReport:
    """Convenience pipeline: polar orbit -> coefficients -> monodromy report."""
    orbit = solve_q_theta(params, max(n_phi, 64))
    return fundamental_matrix(build_system(eps, params, orbit, c2), tol=tol)


def perturbation_ratio(report: MonodromyReport, params: VortexParams) -> float:
    """``|| M(2pi) - G exp(2pi A0) G || / (xi0/y0)^2`` with the sign gauge ``G``."""
    ref = GAUGE @ a0_exponential(2 * math.pi) @ GAUGE
    return float(np.linalg.norm(report.M - ref, 2) / params.alpha0)


# ---------------------------------------------------------------------------
# singular set
# ---------------------------------------------------------------------------

@dataclass
class SingularScan:
    xi0: FloatArray
    det_gap: ComplexArray
    roots: list[tuple[float, float]]    # (xi0 root, local slope d g / d xi0)

    def write_csv(self, path) -> None:
        import csv
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["xi0", "det_gap_re", "det_gap_im"])
            for x, g in zip(self.xi0, self.det_gap):
                w.writerow([f"{x:.17g}", f"{g.real:.17g}", f"{g.imag:.17g}"])


def det_gap(y0: float, xi0: float, n_phi: int = 128, tol: float = 1e-11) -> complex:
    """``g(xi0) = det(M0(2pi) - Id)`` at ``eps = 0``."""
    return monodromy_at(VortexParams(y0, xi0), 0.0, n_phi, tol=tol).det_gap


def singular_scan(
    y0: float,
    xi0_grid,
    *,
    n_phi: int = 128,
    tol: float = 1e-11,
    xtol: float = 1e-10,
    threads: int | None = None,
) -> SingularScan:
    """Bracket sign changes of the real determinant gap and refine them by bisection."""
    xs = np.asarray(xi0_grid, dtype=float)
    g_of = lambda x: det_gap(y0, x, n_phi, tol)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        gs = np.array(list(pool.map(g_of, xs)))
    roots = []
    re = gs.real
    for k in range(len(xs) - 1):
        if re[k] == 0.0:
            roots.append((float(xs[k]), float((re[k + 1] - re[k]) / (xs[k + 1] - xs[k]))))
            continue
        if re[k] * re[k + 1] < 0:
            lo, hi, glo = xs[k], xs[k + 1], re[k]
            while hi - lo > xtol:
                mid = 0.5 * (lo + hi)
                gm = g_of(mid).real
                if gm * glo > 0:
                    lo, glo = mid, gm
                else:
                    hi = mid
            root = 0.5 * (lo + hi)
            slope = (re[k + 1] - re[k]) / (xs[k + 1] - xs[k])
            roots.append((float(root), float(slope)))
    return SingularScan(xs, gs, roots)


def default_sigma(y0: float) -> float:
    """Default half-width of the excluded neighbourhood of each singular root."""
    return 1e-3 * y0


# ---------------------------------------------------------------------------
# forced periodic problem
# ---------------------------------------------------------------------------

@dataclass
class ModeOneSolution:
    phi: FloatArray
    H: ComplexArray            # shape (4, n_phi)
    H0: ComplexArray
    residual: float            # relative back-substitution residual on the grid
    periodicity_gap: float     # |H(2pi) - H(0)| / |H(0)|
    conjugation_error: float   # mismatch of components 2,4 vs conj of 1,3


def solve_mode_one(
    system: ModeOneSystem,
    g1,
    *,
    tol: float = 1e-12,
    singular_roots=(),
    sigma: float | None = None,
) -> ModeOneSolution:
    """Unique 2pi-periodic solution of ``H' - A H = eps^-2 G``.

    ``G = (g1, conj g1, g1(.+pi), conj g1(.+pi)) / omega0`` with ``g1`` sampled
    on the phase grid. ``H(0)`` solves ``(Id - M(2pi)) H(0) = P(2pi)`` where
    ``P`` is the response started from rest; then ``H`` is re-integrated from
    ``H(0)``. For ``eps = 0`` the forcing is taken without the ``eps^-2`` factor.
    """
    y0 = system.orbit.params.y0
    sig = default_sigma(y0) if sigma is None else sigma
    for root in singular_roots:
        if abs(system.xi0 - root) < sig:
            raise NearSingularError(
                f"xi0 = {system.xi0} lies within sigma = {sig} of the singular root {root}"
            )
    g1 = np.asarray(g1, dtype=complex)
    if g1.shape != (system.n_phi,):
        raise ValueError("forcing must be sampled on the system's phase grid")
    scale = system.eps**-2 if system.eps > 0 else 1.0
    gcoef = np.fft.fft(g1) / g1.size
    n = g1.size
    k = np.fft.fftfreq(n, d=1.0 / n)

    def g_at(phi):
        basis = np.exp(1j * k * phi)
        basis[n // 2] = math.cos(phi * (n // 2))
        return gcoef @ basis

    def forcing(phi):
        a, b = g_at(phi), g_at(phi + math.pi)
        return scale * np.array([a, np.conj(a), b, np.conj(b)]) / system.omega0

    def rhs_h(phi, y):
        return system.matrix(phi) @ y + forcing(phi)

    report = fundamental_matrix(system, tol=tol)
    gap = abs(report.det_gap)
    if gap < 1e-10:
        raise NearSingularError(f"|det(M(2pi) - Id)| = {gap:.3e}: monodromy is singular")
    part = ode_solve(rhs_h, np.zeros(4, dtype=complex), (0.0, 2 * math.pi), tol, atol=tol * 1e-2)
    H0 = np.linalg.solve(np.eye(4) - report.M, part.final)
    phi = 2 * math.pi * np.arange(n + 1) / n
    full = ode_solve(rhs_h, H0, (0.0, 2 * math.pi), tol, atol=tol * 1e-2 * max(1.0, np.abs(H0).max()),
                     t_eval=phi)
    H = full.y
    hnorm = max(np.abs(H).max(), 1e-300)
    periodicity = float(np.abs(H[:, -1] - H[:, 0]).max() / hnorm)
    H = H[:, :-1]
    dH = d_phi(H.T).T
    F = np.array([forcing(p) for p in phi[:-1]]).T
    AH = np.array([system.matrix(p) @ H[:, i] for i, p in enumerate(phi[:-1])]).T
    res_scale = max(np.abs(F).max(), np.abs(dH).max(), 1e-300)
    residual = float(np.abs(dH - AH - F).max() / res_scale)
    conj_err = float(max(np.abs(H[1] - H[0].conj()).max(), np.abs(H[3] - H[2].conj()).max()) / hnorm)
    return ModeOneSolution(phi[:-1], H, H0, residual, periodicity, conj_err)


# ---------------------------------------------------------------------------
# small divisors and Cantor-set measure
# ---------------------------------------------------------------------------

def transport_constant(eps: float, omega0: float, c2: float = 0.0) -> float:
    """Leading constant ``1/2 - eps^2 (omega0 - eps c2)`` of the transport multiplier."""
    return 0.5 - eps**2 * (omega0 - eps * c2)


def mu(j: int, k: int, eps: float, omega0: float, c2: float = 0.0) -> float:
    """Multiplier ``mu_{j,k} = j c - (k-1)/2 sign(j)``."""
    return j * transport_constant(eps, omega0, c2) - 0.5 * (k - 1) * np.sign(j)


def divisor(
    j: int,
    l: int,
    xi0: float,
    eps: float,
    delta: float,
    tau: float,
    *,
    k: int = 2,
    y0: float = 1.0,
    c2: float = 0.0,
    radius_factor: float = 2.0,
) -> tuple[float, bool]:
    """Small divisor ``eps^2 omega l + mu_{j,k}`` and whether it is excluded.

    Excluded means ``|value| < radius_factor * eps^(2+delta) / |j|^tau``.
    """
    if abs(j) < k:
        raise ValueError(f"family k={k} requires |j| >= {k}")
    w = frequency(VortexParams(y0, xi0))
    val = eps**2 * w * l + mu(j, k, eps, w, c2)
    lam = eps ** (2 + delta)
    return float(val), bool(abs(val) < radius_factor * lam / abs(j) ** tau)


@dataclass
class DivisorScan:
    eps: float
    delta: float
    tau: float
    lam: float
    radius_factor: float
    interval: tuple[float, float]
    excluded: np.ndarray             # structured: l, j, k, lo, hi
    measure: float
    diophantine_measure: float
    singular_measure: float
    tail_estimate: float
    truncation_warning: bool
    j_max: int
    l_max: int

    def summary(self) -> dict:
        return {"eps": self.eps, "delta": self.delta, "tau": self.tau, "measure": self.measure}

    def records(self, limit: int | None = None):
        rows = self.excluded if limit is None else self.excluded[:limit]
        return [
            {"l": int(r["l"]), "j": int(r["j"]), "k": int(r["k"]), "lo": float(r["lo"]), "hi": float(r["hi"])}
            for r in rows
        ]


_REC = np.dtype([("l", np.int64), ("j", np.int64), ("k", np.int8), ("lo", float), ("hi", float)])


def _union_length(lo: np.ndarray, hi: np.ndarray) -> float:
    if lo.size == 0:
        return 0.0
    order = np.argsort(lo, kind="stable")
    lo, hi = lo[order], hi[order]
    reach = np.maximum.accumulate(hi)
    starts = np.ones(lo.size, dtype=bool)
    starts[1:] = lo[1:] > reach[:-1]
    idx = np.flatnonzero(starts)
    ends = np.append(idx[1:], lo.size) - 1
    return float(np.sum(reach[ends] - lo[idx]))


def frequency_map(y0: float, lo: float, hi: float, n: int = 2001):
    """Monotone interpolants ``xi0 -> omega0`` and its inverse on ``[lo, hi]``."""
    xs = np.linspace(lo, hi, n)
    ws = np.array([2 * math.pi / period_closed_form(VortexParams(y0, x), check=False) for x in xs])
    if not np.all(np.diff(ws) < 0):
        raise RuntimeError("frequency map is not strictly decreasing on the requested interval")
    fwd = PchipInterpolator(xs, ws)
    inv = PchipInterpolator(ws[::-1], xs[::-1])
    return fwd, inv, ws


def cantor_measure(
    eps: float,
    delta: float,
    tau: float,
    interval: tuple[float, float],
    *,
    y0: float = 1.0,
    j_max: int = 512,
    l_max: int | None = None,
    radius_factor: float = 2.0,
    c2: float = 0.0,
    singular_roots=(),
    sigma: float | None = None,
    n_grid: int = 2001,
    keep_records: bool = True,
) -> DivisorScan:
    """Measure of parameters in ``interval`` removed by the Diophantine conditions.

    For the families ``k = 1`` (``|j| >= 1``) and ``k = 2`` (``|j| >= 2``) the
    set ``{xi0 : |eps^2 omega(xi0) l + mu_{j,k}| < radius_factor eps^(2+delta)/|j|^tau}``
    is obtained exactly by mapping the admissible ``omega`` window back through
    the monotone frequency map. Only ``j > 0`` is enumerated: ``(l, j)`` and
    ``(-l, -j)`` exclude the same set. The union with the ``sigma``-neighbourhood
    of the singular roots is added at the end.
    """
    if tau <= 1:
        raise ValueError("tau must exceed 1")
    a, b = interval
    if eps == 0.0:
        lam = 0.0
    else:
        lam = eps ** (2 + delta)
    fwd, inv, ws = frequency_map(y0, a, b, n_grid)
    w_min, w_max = float(ws.min()), float(ws.max())
    e2 = eps**2
    if l_max is None:
        # eps^2 omega l_max spans three times the multiplier range
        mu_range = 0.5 * j_max + 1.0
        l_max = int(math.ceil(3 * mu_range / max(e2 * w_min, 1e-300))) if eps > 0 else 0
    chunks_lo, chunks_hi, recs = [], [], []
    per_j = np.zeros(j_max + 1)
    if eps > 0:
        for k in (1, 2):
            for j in range(k, j_max + 1):
                rho = radius_factor * lam / j**tau
                # value = e2 * omega * (l - j) + c_j, with c_j = j/2 - (k-1)/2 > 0 at c2 = 0
                c_j = j * (0.5 + e2 * eps * c2) - 0.5 * (k - 1)
                if c_j - rho <= 0:
                    # divisor can vanish at m = 0 for every xi0: whole interval excluded
                    m_lo, m_hi = 0, 0
                else:
                    m_hi = -int(math.ceil((c_j - rho) / (e2 * w_max)))   # least negative
                    m_lo = -int(math.floor((c_j + rho) / (e2 * w_min)))  # most negative
                m = np.arange(m_lo, m_hi + 1, dtype=np.int64)
                ell = m + j
                m = m[np.abs(ell) <= l_max]
                if m.size == 0:
                    continue
                if np.any(m == 0):
                    lo_x = np.full(1, a)
                    hi_x = np.full(1, b)
                    ell_keep = np.array([j])
                else:
                    mf = m.astype(float)
                    w_a = (-c_j - rho) / (e2 * mf)   # omega window endpoints (m < 0)
                    w_b = (-c_j + rho) / (e2 * mf)
                    w_lo = np.minimum(w_a, w_b)
                    w_hi = np.maximum(w_a, w_b)
                    keep = (w_hi > w_min) & (w_lo < w_max)
                    if not np.any(keep):
                        continue
                    w_lo = np.clip(w_lo[keep], w_min, w_max)
                    w_hi = np.clip(w_hi[keep], w_min, w_max)
                    lo_x = inv(w_hi)   # omega decreasing in xi0
                    hi_x = inv(w_lo)
                    ell_keep = m[keep] + j
                    good = hi_x > lo_x
                    lo_x, hi_x, ell_keep = lo_x[good], hi_x[good], ell_keep[good]
                per_j[j] += float(np.sum(hi_x - lo_x))
                chunks_lo.append(lo_x)
                chunks_hi.append(hi_x)
                if keep_records:
                    r = np.empty(lo_x.size, dtype=_REC)
                    r["l"], r["j"], r["k"], r["lo"], r["hi"] = ell_keep, j, k, lo_x, hi_x
                    recs.append(r)
    lo_all = np.concatenate(chunks_lo) if chunks_lo else np.empty(0)
    hi_all = np.concatenate(chunks_hi) if chunks_hi else np.empty(0)
    dioph = _union_length(lo_all, hi_all)
    sig = default_sigma(y0) if sigma is None else sigma
    s_lo = np.array([max(a, r - sig) for r in singular_roots if a - sig < r < b + sig])
    s_hi = np.array([min(b, r + sig) for r in singular_roots if a - sig < r < b + sig])
    sing = _union_length(s_lo, s_hi)
    total = _union_length(np.concatenate([lo_all, s_lo]), np.concatenate([hi_all, s_hi]))
    # tail of the j-sum: per-j excluded length decays like j^-tau
    tail = 0.0
    if j_max >= 8 and dioph > 0:
        upper = np.arange(j_max // 2, j_max + 1)
        amp = float(np.mean(per_j[upper] * upper.astype(float) ** tau))
        tail = amp * j_max ** (1 - tau) / (tau - 1)
    warn = total > 0 and tail > 0.1 * total
    if warn:
        warnings.warn(
            f"truncation tail estimate {tail:.3e} exceeds 10% of the measure {total:.3e}; "
            "increase j_max", RuntimeWarning, stacklevel=2,
        )
    excluded = np.concatenate(recs) if recs else np.empty(0, dtype=_REC)
    return DivisorScan(eps, delta, tau, lam, radius_factor, (a, b), excluded, total, dioph, sing,
                       tail, bool(warn), j_max, int(l_max))
