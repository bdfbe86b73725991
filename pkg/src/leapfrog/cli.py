"""Command-line front end: ``python -m leapfrog <command> [options]``.

Every subcommand writes its data files plus a ``manifest.json`` (configuration,
its SHA-256 hash, results, file list) into ``--out``. Exit codes: 0 success,
2 invalid input, 3 numerical failure, 4 acceptance failure (``verify`` only).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import math
import os
import sys
import time
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import acceptance
from .contour import (
    PatchGeometry,
    PatchGeometryError,
    G_residual,
    approx_solution,
    g0_series,
    patch_diagnostics,
    series_tail_bound,
    simulate_patches,
)
from .monodromy import (
    NearSingularError,
    a0_det_identity,
    a0_exponential,
    a0_integrated,
    cantor_measure,
    monodromy_at,
    perturbation_ratio,
    singular_scan,
)
from .numerics import BoundaryField, IntegrationError
from .pointvortex import (
    ConventionMismatchError,
    SingularConfigurationError,
    VortexParams,
    integrate_orbit,
    period_closed_form,
    period_lower_bound,
    period_numeric,
    period_quadrature,
    period_upper_bound,
    solve_q_theta,
)

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_ACCEPTANCE = 0, 2, 3, 4

NUMERICAL_ERRORS = (IntegrationError, NearSingularError, PatchGeometryError, ConventionMismatchError,
                    SingularConfigurationError, FloatingPointError, np.linalg.LinAlgError)


@dataclass
class RunConfig:
    """All knobs of a run; serialised as ``key = value`` lines."""

    y0: float = 1.0
    xi0: float = 0.5
    xi0_range: str = ""          # "lo:hi:n"; empty means command default
    eps: float = 0.1
    grid: str = "128x128"        # n_phi x n_theta
    tol: float = 1e-12
    kmax: int = 20
    delta: float = 0.3
    tau: float = 1.5
    jmax: int = 256
    radius: float = 2.0          # Diophantine radius factor: 1 (lambda) or 2 (2 lambda)
    periods: float = 1.25        # simulation length in orbit periods
    nodes: int = 128             # boundary nodes per patch in simulations
    snapshots: int = 101
    only: str = ""               # verify: comma-separated criterion numbers
    out: str = "leapfrog-out"
    threads: int = 0             # 0 = logical cores
    plot_data: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        VortexParams(self.y0, self.xi0, self.eps)
        self.grid_shape()
        if self.xi0_range:
            self.xi0_values()
        if self.radius not in (1.0, 2.0):
            raise ValueError("radius must be 1 (lambda) or 2 (2 lambda)")
        if self.tol <= 0 or self.kmax < 2 or self.tau <= 1 or self.delta <= 0 or self.jmax < 2:
            raise ValueError("tol > 0, kmax >= 2, tau > 1, delta > 0 and jmax >= 2 are required")

    def grid_shape(self) -> tuple[int, int]:
        try:
            a, b = (int(v) for v in self.grid.lower().split("x"))
        except ValueError as exc:
            raise ValueError(f"--grid expects NxM, got {self.grid!r}") from exc
        for v in (a, b):
            if v < 8 or v & (v - 1):
                raise ValueError("grid sizes must be powers of two >= 8")
        return a, b

    def xi0_values(self, default: str = "") -> np.ndarray:
        text = self.xi0_range or default
        try:
            lo, hi, n = text.split(":")
            lo, hi, n = float(lo), float(hi), int(n)
        except ValueError as exc:
            raise ValueError(f"--xi0-range expects lo:hi:n, got {text!r}") from exc
        if n < 1 or not 0 < lo <= hi < self.y0 / math.sqrt(2):
            raise ValueError("xi0 range must satisfy 0 < lo <= hi < y0/sqrt(2) and n >= 1")
        return np.linspace(lo, hi, n)

    @property
    def n_threads(self) -> int:
        return self.threads or os.cpu_count() or 1

    def params(self, eps: float | None = None) -> VortexParams:
        return VortexParams(self.y0, self.xi0, self.eps if eps is None else eps)

    # serialisation -----------------------------------------------------
    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            lines.append(f"{f.name} = {_encode(v)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, **overrides) -> "RunConfig":
        values = {}
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line without '=': {raw!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in types:
                raise ValueError(f"unknown config key {key!r}")
            values[key] = _decode(val, types[key])
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()


def _encode(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _decode(text: str, typ: str):
    if typ == "bool":
        if text.lower() not in ("true", "false", "1", "0", "yes", "no"):
            raise ValueError(f"bad boolean {text!r}")
        return text.lower() in ("true", "1", "yes")
    if typ == "int":
        return int(text)
    if typ == "float":
        return float(text)
    return text


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _num(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return v


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_num(v) for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _write_manifest(out: Path, command: str, cfg: RunConfig, results: dict, files: list[str]) -> None:
    manifest = {
        "command": command,
        "config": {f.name: getattr(cfg, f.name) for f in dataclasses.fields(cfg)},
        "config_hash": cfg.digest(),
        "files": sorted(files),
        "results": _jsonable(results),
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True))


# ---------------------------------------------------------------------------
# subcommands; each returns (results, files, exit code)
# ---------------------------------------------------------------------------

def cmd_orbit(cfg: RunConfig, out: Path):
    p = cfg.params(0.0)
    T = period_closed_form(p)
    traj = integrate_orbit(p, T, tol=cfg.tol, n_samples=cfg.grid_shape()[1] + 1)
    traj.write_csv(out / "orbit.csv")
    closure = math.hypot(traj.eta[-1], traj.xi[-1] - p.xi0)
    return {"period": T, "hamiltonian_drift": traj.hamiltonian_drift, "closure": closure,
            "x0_shift": float(traj.x0[-1])}, ["orbit.csv"], EXIT_OK


def cmd_period(cfg: RunConfig, out: Path):
    xs = cfg.xi0_values(f"{0.05 * cfg.y0}:{0.65 * cfg.y0}:13")
    rows, all_ok = [], True
    for x in xs:
        p = VortexParams(cfg.y0, float(x))
        T = period_closed_form(p)
        lo, hi = period_lower_bound(p), period_upper_bound(p)
        ok = lo <= T <= hi
        all_ok &= ok
        rows.append([float(x), T, period_quadrature(p), period_numeric(p), lo, hi, int(ok)])
    _write_csv(out / "period.csv", ["xi0", "T", "T_quadrature", "T_numeric", "lower", "upper", "bounds_ok"], rows)
    return {"rows": len(rows), "all_bounds_ok": bool(all_ok)}, ["period.csv"], EXIT_OK


def cmd_qtheta(cfg: RunConfig, out: Path):
    n_phi = max(cfg.grid_shape()[0], 64)
    orb = solve_q_theta(cfg.params(0.0), n_phi, tol=cfg.tol)
    _write_csv(out / "qtheta.csv", ["phi", "q", "Theta", "Theta_dot"],
               zip(orb.phi, orb.q, orb.theta_big, orb.theta_dot))
    return {"omega0": orb.omega0, "period": orb.period, "q_min": float(orb.q.min()),
            "q_max": float(orb.q.max())}, ["qtheta.csv"], EXIT_OK


def _geometry(cfg: RunConfig) -> PatchGeometry:
    n_phi, _ = cfg.grid_shape()
    if n_phi < 64:
        raise ValueError("this command needs a phase grid of at least 64 points")
    return PatchGeometry.build(cfg.params(0.0), n_phi, k_max=cfg.kmax)


def cmd_g0(cfg: RunConfig, out: Path):
    geom = _geometry(cfg)
    n_theta = cfg.grid_shape()[1]
    zero = BoundaryField.zeros(geom.n_phi, n_theta)
    quad = G_residual(cfg.eps, zero, geom)
    series = g0_series(cfg.eps, geom, n_theta, k_max=cfg.kmax)
    diff = float(np.abs(quad.values - series.values).max())
    np.savetxt(out / "g0_quadrature.csv", quad.values, delimiter=",", fmt="%.17g")
    np.savetxt(out / "g0_series.csv", series.values, delimiter=",", fmt="%.17g")
    return {"sup_diff": diff, "sup_G0": quad.norm_sup(), "series_tail_bound": series_tail_bound(cfg.eps, geom, cfg.kmax)}, \
        ["g0_quadrature.csv", "g0_series.csv"], EXIT_OK


def cmd_approx(cfg: RunConfig, out: Path):
    geom = _geometry(cfg)
    n_theta = cfg.grid_shape()[1]
    eps_set = [cfg.eps, cfg.eps / 2, cfg.eps / 4]
    zero = BoundaryField.zeros(geom.n_phi, n_theta)
    rows = []
    for eps in eps_set:
        sol = approx_solution(eps, geom, n_theta, cfg.kmax)
        rows.append([eps, G_residual(eps, zero, geom).norm_sup(), G_residual(eps, sol.state(), geom).norm_sup()])
        if eps == cfg.eps:
            (out / "r_eps.json").write_text(sol.r_eps.to_json())
    _write_csv(out / "approx.csv", ["eps", "G_zero_sup", "G_approx_sup"], rows)
    r = np.array(rows)
    return {"slope_G_zero": acceptance.loglog_slope(r[:, 0], r[:, 1]),
            "slope_G_approx": acceptance.loglog_slope(r[:, 0], r[:, 2])}, ["approx.csv", "r_eps.json"], EXIT_OK


def cmd_simulate(cfg: RunConfig, out: Path):
    p = cfg.params()
    if p.eps <= 0:
        raise ValueError("simulate needs --eps > 0")
    geom = PatchGeometry.build(VortexParams(cfg.y0, cfg.xi0), 64, k_max=cfg.kmax)
    sol = approx_solution(p.eps, geom, cfg.nodes, cfg.kmax)
    T = period_closed_form(p)
    traj = simulate_patches(p, sol.state(), cfg.periods * T, n_snapshots=cfg.snapshots, n_nodes=cfg.nodes,
                            orbit=geom.orbit)
    snap_dir = out / "snapshots"
    traj.write(snap_dir, plot_data=cfg.plot_data)
    rep = patch_diagnostics(traj, geom)
    _write_csv(out / "diagnostics.csv", ["t", "centroid_error", "area_drift", "mode2", "mode2_prediction", "x_gap"],
               zip(rep.times, rep.centroid_error, rep.area_drift, rep.mode2, rep.mode2_prediction, rep.x_gap))
    files = ["diagnostics.csv"] + sorted(f"snapshots/{f.name}" for f in snap_dir.iterdir())
    return {"period": T, "max_centroid_error": float(rep.centroid_error.max()),
            "max_area_drift": float(rep.area_drift.max()), "exchanges": rep.exchanges,
            "mode2_initial": float(rep.mode2[0]), "mode2_leading_prediction": float(rep.mode2_prediction[0]),
            "half_period_defect": rep.half_period_defect,
            "steps": traj.n_steps, "dt": traj.dt}, files, EXIT_OK


def cmd_monodromy(cfg: RunConfig, out: Path):
    p = cfg.params()
    n_phi = max(cfg.grid_shape()[0], 64)
    rep = monodromy_at(VortexParams(cfg.y0, cfg.xi0), cfg.eps, n_phi, tol=cfg.tol)
    E = a0_integrated(2 * math.pi)
    results = {
        "det_gap": rep.det_gap,
        "structure_ok": rep.structure_ok,
        "conj_error": rep.conj_error,
        "shift_error": rep.shift_error,
        "sup_norm": rep.sup_norm,
        "perturbation_ratio": perturbation_ratio(rep, p),
        "a0_det_closed_form": a0_det_identity(2 * math.pi),
        "a0_det_integrated": float(np.linalg.det(E - np.eye(4)).real),
        "a0_exp_error": float(np.abs(E - a0_exponential(2 * math.pi)).max()),
    }
    rows = [[i, j, rep.M[i, j].real, rep.M[i, j].imag] for i in range(4) for j in range(4)]
    _write_csv(out / "monodromy.csv", ["row", "col", "re", "im"], rows)
    return results, ["monodromy.csv"], EXIT_OK


def cmd_scan_singular(cfg: RunConfig, out: Path):
    xs = cfg.xi0_values(f"{0.01 * cfg.y0}:{0.70 * cfg.y0}:70")
    scan = singular_scan(cfg.y0, xs, n_phi=max(cfg.grid_shape()[0], 64), threads=cfg.n_threads)
    scan.write_csv(out / "det_gap.csv")
    _write_csv(out / "roots.csv", ["xi0", "slope"], scan.roots)
    return {"roots": [r for r, _ in scan.roots]}, ["det_gap.csv", "roots.csv"], EXIT_OK


def cmd_cantor(cfg: RunConfig, out: Path):
    xs = cfg.xi0_values(f"{0.2 * cfg.y0}:{0.4 * cfg.y0}:2")
    interval = (float(xs[0]), float(xs[-1]))
    if interval[1] <= interval[0]:
        raise ValueError("cantor needs a non-empty xi0 interval")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        scan = cantor_measure(cfg.eps, cfg.delta, cfg.tau, interval, y0=cfg.y0, j_max=cfg.jmax,
                              radius_factor=cfg.radius)
    _write_csv(out / "cantor.csv", ["l", "j", "k", "lo", "hi"],
               ([r["l"], r["j"], r["k"], r["lo"], r["hi"]] for r in scan.records()))
    return {"interval": list(interval), "lambda": scan.lam, "radius_factor": scan.radius_factor, "measure": scan.measure,
            "diophantine_measure": scan.diophantine_measure, "singular_measure": scan.singular_measure,
            "tail_estimate": scan.tail_estimate, "truncation_warning": scan.truncation_warning,
            "warnings": [str(w.message) for w in caught]}, ["cantor.csv"], EXIT_OK


def cmd_verify(cfg: RunConfig, out: Path):
    numbers = [int(s) for s in cfg.only.split(",") if s.strip()] or None
    results = []
    for number in numbers or sorted(acceptance.CHECKS):
        r = acceptance.run_check(number)
        print(r.line(), flush=True)
        results.append(r)
    rows = [[r.number, r.name, "PASS" if r.passed else "FAIL", f"{r.seconds:.1f}"] for r in results]
    _write_csv(out / "verify.csv", ["criterion", "name", "status", "seconds"], rows)
    summary = {str(r.number): {"passed": r.passed, "detail": r.detail} for r in results}
    code = EXIT_OK if all(r.passed for r in results) else EXIT_ACCEPTANCE
    return summary, ["verify.csv"], code


COMMANDS = {
    "orbit": (cmd_orbit, "integrate the reduced point-vortex orbit over one period"),
    "period": (cmd_period, "period table with bracket bounds over a xi0 grid"),
    "qtheta": (cmd_qtheta, "polar orbit (q, Theta) on the phase grid"),
    "g0": (cmd_g0, "G(0): quadrature against the closed-form series"),
    "approx": (cmd_approx, "approximate boundary solution and residual slopes"),
    "simulate": (cmd_simulate, "time-dependent contour dynamics of the four patches"),
    "monodromy": (cmd_monodromy, "monodromy matrix of the mode-one system and reference checks"),
    "scan-singular": (cmd_scan_singular, "zeros of the unperturbed determinant gap"),
    "cantor": (cmd_cantor, "excluded measure of the Diophantine conditions"),
    "verify": (cmd_verify, "run every acceptance check and report pass/fail"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="leapfrog", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", help="key = value configuration file (flags override it)")
        sp.add_argument("--y0", type=float)
        sp.add_argument("--xi0", type=float)
        sp.add_argument("--xi0-range", dest="xi0_range", help="lo:hi:n")
        sp.add_argument("--eps", type=float)
        sp.add_argument("--grid", help="NxM phase x angle grid")
        sp.add_argument("--tol", type=float)
        sp.add_argument("--kmax", type=int)
        sp.add_argument("--delta", type=float)
        sp.add_argument("--tau", type=float)
        sp.add_argument("--jmax", type=int)
        sp.add_argument("--radius", type=float, help="Diophantine radius factor, 1 or 2")
        sp.add_argument("--periods", type=float)
        sp.add_argument("--nodes", type=int)
        sp.add_argument("--snapshots", type=int)
        sp.add_argument("--only", help="verify: comma-separated criterion numbers")
        sp.add_argument("--out")
        sp.add_argument("--threads", type=int)
        sp.add_argument("--plot-data", dest="plot_data", action="store_const", const=True)
    return parser


def _error_record(out: Path | None, kind: str, exc: BaseException) -> None:
    record = {"error": kind, "type": type(exc).__name__, "message": str(exc)}
    print(json.dumps(record), file=sys.stderr)
    if out is not None and out.is_dir():
        (out / "error.json").write_text(json.dumps(record, indent=1))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    out = None
    try:
        text = Path(args.config).read_text() if args.config else ""
        cfg = RunConfig.from_text(text, **overrides)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.txt").write_text(cfg.to_text())
        fn, _ = COMMANDS[args.command]
        results, files, code = fn(cfg, out)
    except (ValueError, OSError) as exc:
        _error_record(out, "validation", exc)
        return EXIT_INVALID
    except NUMERICAL_ERRORS as exc:
        _error_record(out, "numerical", exc)
        return EXIT_NUMERICAL
    _write_manifest(out, args.command, cfg, results, files + ["config.txt"])
    if args.command != "verify":
        print(json.dumps(_jsonable(results), indent=1, sort_keys=True))
    return code


if __name__ == "__main__":
    sys.exit(main())
