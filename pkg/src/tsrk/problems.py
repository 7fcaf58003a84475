"""Stiff test problems with their integration windows and certified references.

Window starts that sit mid-trajectory (Van der Pol at t=0.1, Robertson at
t=1000, HIRES at t=20) are computed by the reference solver from the
classical initial data and cached on disk, so every number is reproducible
in-repo.  Endpoint references are produced the same way, each with an
order-2 Richardson error estimate attached.

Set the environment variable TSRK_CACHE_DIR to relocate the cache.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .reference import reference_integrate

__all__ = [
    "CACHE_ENV",
    "IvpProblem",
    "ReferenceValue",
    "StartInfo",
    "PROBLEMS",
    "vdpol",
    "rober",
    "hires",
    "burgers",
    "heat1d",
    "heat1d_exact_state",
    "cache_dir",
    "window_start_info",
]

CACHE_ENV = "TSRK_CACHE_DIR"

VDPOL_EPS = 1e-6
BURGERS_MU = 0.005


@dataclass(frozen=True)
class ReferenceValue:
    """A reference endpoint with its certified error estimate."""

    y: np.ndarray
    estimate: float


@dataclass(frozen=True)
class StartInfo:
    """A cached window-start state with its self-consistency check."""

    y: np.ndarray
    diff: float  # max-norm gap between the base and step-doubled runs
    estimate: float  # diff / 3 (order-2 Richardson)


@dataclass(frozen=True)
class IvpProblem:
    """An initial value problem over one output window."""

    name: str
    dim: int
    rhs: Callable[[float, np.ndarray], np.ndarray]
    t0: float
    y0: np.ndarray
    t_out: float
    jac: Callable[[float, np.ndarray], np.ndarray] | None = None
    rho_bound: Callable[[float, np.ndarray], float] | None = None
    reference: Callable[[], ReferenceValue] | None = None

    def __post_init__(self):
        y0 = np.ascontiguousarray(self.y0, dtype=float)
        if y0.ndim != 1 or y0.size != self.dim:
            raise ValueError(f"y0 must be a vector of length {self.dim}")
        if not np.all(np.isfinite(y0)):
            raise ValueError("y0 must be finite")
        if not self.t_out > self.t0:
            raise ValueError(f"need t_out > t0, got [{self.t0}, {self.t_out}]")
        y0.setflags(write=False)
        object.__setattr__(self, "y0", y0)


# ---------------------------------------------------------------------------
# disk cache for reference-solver products

def cache_dir() -> Path:
    root = os.environ.get(CACHE_ENV)
    path = Path(root) if root else Path.home() / ".cache" / "tsrk"
    path.mkdir(parents=True, exist_ok=True)
    return path


_memory_cache: dict[str, dict] = {}


def _cached(key: str, compute: Callable[[], dict]) -> dict:
    """Fetch a JSON-serializable record by content-addressed key."""
    if key in _memory_cache:
        return _memory_cache[key]
    digest = hashlib.sha1(key.encode()).hexdigest()[:12]
    path = cache_dir() / f"{key.split('|')[0]}_{digest}.json"
    if path.exists():
        record = json.loads(path.read_text())
    else:
        record = compute()
        record["key"] = key
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(record))
        tmp.replace(path)
    _memory_cache[key] = record
    return record


@dataclass(frozen=True)
class _RawOde:
    """Bare ODE for the reference solver (no window attached)."""

    rhs: Callable
    jac: Callable | None
    t0: float
    y0: np.ndarray


def _run_schedule(raw: _RawOde, segments, factor: int = 1) -> np.ndarray:
    y = raw.y0
    for t_from, t_to, steps in segments:
        y = reference_integrate(raw, t_from, t_to, factor * steps, y_from=y)
    return y


def _start_info(name: str, raw: _RawOde, segments) -> StartInfo:
    """Window-start state with base/doubled self-consistency, cached."""
    key = f"{name}|start|{segments!r}"

    def compute() -> dict:
        base = _run_schedule(raw, segments, factor=1)
        fine = _run_schedule(raw, segments, factor=2)
        diff = float(np.max(np.abs(base - fine)))
        return {"y": fine.tolist(), "diff": diff}

    rec = _cached(key, compute)
    return StartInfo(y=np.array(rec["y"]), diff=rec["diff"],
                     estimate=rec["diff"] / 3.0)


def _endpoint_reference(name: str, raw: _RawOde, t_from: float, t_to: float,
                        y_from: np.ndarray, steps: int) -> ReferenceValue:
    """Certified endpoint reference over [t_from, t_to], cached."""
    key = (f"{name}|end|{t_from!r}|{t_to!r}|{steps}|"
           f"{hashlib.sha1(y_from.tobytes()).hexdigest()[:10]}")

    def compute() -> dict:
        coarse = reference_integrate(raw, t_from, t_to, steps, y_from=y_from)
        fine = reference_integrate(raw, t_from, t_to, 2 * steps, y_from=y_from)
        diff = float(np.max(np.abs(coarse - fine)))
        return {"y": fine.tolist(), "estimate": diff / 3.0}

    rec = _cached(key, compute)
    return ReferenceValue(y=np.array(rec["y"]), estimate=rec["estimate"])


# ---------------------------------------------------------------------------
# Van der Pol

def _vdpol_rhs(t, y):
    return np.array([y[1], ((1.0 - y[0] ** 2) * y[1] - y[0]) / VDPOL_EPS])


def _vdpol_jac(t, y):
    return np.array([
        [0.0, 1.0],
        [(-2.0 * y[0] * y[1] - 1.0) / VDPOL_EPS, (1.0 - y[0] ** 2) / VDPOL_EPS],
    ])


# The t=0 transient has width ~VDPOL_EPS, so the start schedule resolves it
# with a dense leading segment before striding across the smooth phase.
_VDPOL_START_SEGMENTS = ((0.0, 1e-4, 8000), (1e-4, 0.1, 10000))
_VDPOL_ENDPOINT_STEPS = 20000


def vdpol() -> IvpProblem:
    """Stiff Van der Pol over the smooth window [0.1, 0.6]."""
    raw = _RawOde(_vdpol_rhs, _vdpol_jac, 0.0, np.array([2.0, 0.0]))
    y0 = _start_info("vdpol", raw, _VDPOL_START_SEGMENTS).y

    def reference() -> ReferenceValue:
        return _endpoint_reference("vdpol", raw, 0.1, 0.6, y0,
                                   _VDPOL_ENDPOINT_STEPS)

    return IvpProblem(
        name="vdpol", dim=2, rhs=_vdpol_rhs, t0=0.1, y0=y0, t_out=0.6,
        jac=_vdpol_jac, reference=reference,
    )


def window_start_info(name: str) -> StartInfo:
    """Self-consistency record of a cached window-start state."""
    if name == "vdpol":
        raw = _RawOde(_vdpol_rhs, _vdpol_jac, 0.0, np.array([2.0, 0.0]))
        return _start_info("vdpol", raw, _VDPOL_START_SEGMENTS)
    if name == "rober":
        raw = _RawOde(_rober_rhs, _rober_jac, 0.0, np.array([1.0, 0.0, 0.0]))
        return _start_info("rober", raw, _ROBER_START_SEGMENTS)
    if name == "hires":
        raw = _RawOde(_hires_rhs, _hires_jac, 0.0, _HIRES_Y0)
        return _start_info("hires", raw, _HIRES_START_SEGMENTS)
    raise ValueError(f"no cached window start for problem {name!r}")


# ---------------------------------------------------------------------------
# Robertson kinetics

def _rober_rhs(t, y):
    r1 = 0.04 * y[0]
    r2 = 1e4 * y[1] * y[2]
    r3 = 3e7 * y[1] ** 2
    return np.array([-r1 + r2, r1 - r2 - r3, r3])


def _rober_jac(t, y):
    return np.array([
        [-0.04, 1e4 * y[2], 1e4 * y[1]],
        [0.04, -1e4 * y[2] - 6e7 * y[1], -1e4 * y[1]],
        [0.0, 6e7 * y[1], 0.0],
    ])


_ROBER_START_SEGMENTS = ((0.0, 1.0, 4000), (1.0, 30.0, 8000), (30.0, 1000.0, 24000))
_ROBER_ENDPOINT_STEPS = 20000


def _rober_rho_bound(t, y):
    """Gershgorin bound on the stiff row, with y3 <= sum(y) = 1 (mass).

    The spectral radius grows along the window as y3 rises, so a bound
    evaluated only at the window start would be overtaken mid-run; using the
    conserved mass keeps it valid for the whole trajectory.
    """
    total = float(y[0] + y[1] + y[2])
    return 0.04 + 1e4 * total + (6e7 + 1e4) * float(y[1])


def rober() -> IvpProblem:
    """Robertson kinetics over the slow window [1000, 2000]."""
    raw = _RawOde(_rober_rhs, _rober_jac, 0.0, np.array([1.0, 0.0, 0.0]))
    y0 = _start_info("rober", raw, _ROBER_START_SEGMENTS).y

    def reference() -> ReferenceValue:
        return _endpoint_reference("rober", raw, 1000.0, 2000.0, y0,
                                   _ROBER_ENDPOINT_STEPS)

    return IvpProblem(
        name="rober", dim=3, rhs=_rober_rhs, t0=1000.0, y0=y0, t_out=2000.0,
        jac=_rober_jac, rho_bound=_rober_rho_bound, reference=reference,
    )


# ---------------------------------------------------------------------------
# HIRES

_HIRES_Y0 = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0057])


def _hires_rhs(t, y):
    y1, y2, y3, y4, y5, y6, y7, y8 = y
    f7 = 280.0 * y6 * y8 - 1.81 * y7
    return np.array([
        -1.71 * y1 + 0.43 * y2 + 8.32 * y3 + 0.0007,
        1.71 * y1 - 8.75 * y2,
        -10.03 * y3 + 0.43 * y4 + 0.035 * y5,
        8.32 * y2 + 1.71 * y3 - 1.12 * y4,
        -1.745 * y5 + 0.43 * y6 + 0.43 * y7,
        -280.0 * y6 * y8 + 0.69 * y4 + 1.71 * y5 - 0.43 * y6 + 0.69 * y7,
        f7,
        -f7,
    ])


def _hires_jac(t, y):
    y6, y8 = y[5], y[7]
    jac = np.zeros((8, 8))
    jac[0, 0:3] = [-1.71, 0.43, 8.32]
    jac[1, 0:2] = [1.71, -8.75]
    jac[2, 2:5] = [-10.03, 0.43, 0.035]
    jac[3, 1:4] = [8.32, 1.71, -1.12]
    jac[4, 4:7] = [-1.745, 0.43, 0.43]
    jac[5, 3] = 0.69
    jac[5, 4] = 1.71
    jac[5, 5] = -280.0 * y8 - 0.43
    jac[5, 6] = 0.69
    jac[5, 7] = -280.0 * y6
    jac[6, 5] = 280.0 * y8
    jac[6, 6] = -1.81
    jac[6, 7] = 280.0 * y6
    jac[7, 5] = -280.0 * y8
    jac[7, 6] = 1.81
    jac[7, 7] = -280.0 * y6
    return jac


_HIRES_START_SEGMENTS = ((0.0, 20.0, 20000),)
_HIRES_ENDPOINT_STEPS = 25000


def hires() -> IvpProblem:
    """HIRES over the spike-free window [20, 270]."""
    raw = _RawOde(_hires_rhs, _hires_jac, 0.0, _HIRES_Y0)
    y0 = _start_info("hires", raw, _HIRES_START_SEGMENTS).y

    def reference() -> ReferenceValue:
        return _endpoint_reference("hires", raw, 20.0, 270.0, y0,
                                   _HIRES_ENDPOINT_STEPS)

    return IvpProblem(
        name="hires", dim=8, rhs=_hires_rhs, t0=20.0, y0=y0, t_out=270.0,
        jac=_hires_jac, reference=reference,
    )


# ---------------------------------------------------------------------------
# Burgers (method of lines)

_BURGERS_ENDPOINT_STEPS = 1500


def burgers(n_interior: int = 500, conservative: bool = True) -> IvpProblem:
    """Viscous Burgers u_t = mu u_xx - u u_x on (0, 1), Dirichlet zero walls.

    Second-order central differences; the advection term defaults to the
    conservative form (u^2/2)_x, with the non-conservative central form
    available for sensitivity checks.  Initial profile u(x, 0) = 1.5 x (1-x)^2
    and window [0, 2.5], the classical mildly-stiff configuration.
    """
    if n_interior < 10:
        raise ValueError(f"grid must have at least 10 interior points, got {n_interior}")
    n = int(n_interior)
    dx = 1.0 / (n + 1)
    x = np.linspace(dx, 1.0 - dx, n)
    mu = BURGERS_MU

    if conservative:
        def rhs(t, u):
            up = np.zeros(n + 2)
            up[1:-1] = u
            diff = (up[2:] - 2.0 * up[1:-1] + up[:-2]) / dx**2
            adv = (up[2:] ** 2 - up[:-2] ** 2) / (4.0 * dx)
            return mu * diff - adv

        def jac(t, u):
            up = np.zeros(n + 2)
            up[1:-1] = u
            out = np.zeros((n, n))
            idx = np.arange(n)
            out[idx, idx] = -2.0 * mu / dx**2
            out[idx[:-1], idx[:-1] + 1] = mu / dx**2 - up[2:-1] / (2.0 * dx)
            out[idx[1:], idx[1:] - 1] = mu / dx**2 + up[1:-2] / (2.0 * dx)
            return out
    else:
        def rhs(t, u):
            up = np.zeros(n + 2)
            up[1:-1] = u
            diff = (up[2:] - 2.0 * up[1:-1] + up[:-2]) / dx**2
            adv = u * (up[2:] - up[:-2]) / (2.0 * dx)
            return mu * diff - adv

        def jac(t, u):
            up = np.zeros(n + 2)
            up[1:-1] = u
            out = np.zeros((n, n))
            idx = np.arange(n)
            out[idx, idx] = -2.0 * mu / dx**2 - (up[2:] - up[:-2]) / (2.0 * dx)
            out[idx[:-1], idx[:-1] + 1] = mu / dx**2 - u[:-1] / (2.0 * dx)
            out[idx[1:], idx[1:] - 1] = mu / dx**2 + u[1:] / (2.0 * dx)
            return out

    u0 = 1.5 * x * (1.0 - x) ** 2

    def rho_bound(t, u):
        return 4.0 * mu / dx**2 + float(np.max(np.abs(u))) / dx

    raw = _RawOde(rhs, jac, 0.0, u0)
    tag = f"burgers_n{n}_{'cons' if conservative else 'noncons'}"

    def reference() -> ReferenceValue:
        return _endpoint_reference(tag, raw, 0.0, 2.5, u0, _BURGERS_ENDPOINT_STEPS)

    return IvpProblem(
        name="burgers", dim=n, rhs=rhs, t0=0.0, y0=u0, t_out=2.5,
        jac=jac, rho_bound=rho_bound, reference=reference,
    )


# ---------------------------------------------------------------------------
# 1-D heat equation (linear calibration problem)

def _heat1d_eigen(n: int):
    """Eigenvalues and sine modes of the n-point tridiagonal Laplacian."""
    dx = 1.0 / (n + 1)
    x = np.linspace(dx, 1.0 - dx, n)
    k = np.arange(1, n + 1)
    eigvals = -4.0 * np.sin(k * np.pi / (2.0 * (n + 1))) ** 2 / dx**2
    modes = np.sin(np.outer(k, x) * np.pi)  # orthogonal with weight 2/(n+1)
    return eigvals, modes


def heat1d_exact_state(n_interior: int, t: float, u_start: np.ndarray) -> np.ndarray:
    """Exact solution of the discrete heat system at time t from u_start."""
    n = int(n_interior)
    eigvals, modes = _heat1d_eigen(n)
    coeff = (2.0 / (n + 1)) * modes @ np.asarray(u_start, dtype=float)
    return (coeff * np.exp(eigvals * t)) @ modes


def heat1d(n_interior: int = 50, t_out: float = 0.1) -> IvpProblem:
    """u_t = u_xx on (0, 1), Dirichlet zero walls, u(x, 0) = sin(pi x).

    The reference endpoint is the exact solution of the *discrete* system via
    the known eigenpairs of the tridiagonal Laplacian, so time-integration
    error is measured cleanly, free of spatial discretization error.
    """
    if n_interior < 4:
        raise ValueError(f"grid must have at least 4 interior points, got {n_interior}")
    n = int(n_interior)
    dx = 1.0 / (n + 1)
    x = np.linspace(dx, 1.0 - dx, n)

    def rhs(t, u):
        up = np.zeros(n + 2)
        up[1:-1] = u
        return (up[2:] - 2.0 * up[1:-1] + up[:-2]) / dx**2

    lap = (np.diag(np.full(n, -2.0)) + np.diag(np.ones(n - 1), 1)
           + np.diag(np.ones(n - 1), -1)) / dx**2
    lap.setflags(write=False)

    def jac(t, u):
        return lap

    u0 = np.sin(np.pi * x)
    rho = 4.0 * math.sin(n * math.pi / (2.0 * (n + 1))) ** 2 / dx**2

    def reference() -> ReferenceValue:
        return ReferenceValue(y=heat1d_exact_state(n, t_out, u0), estimate=1e-14)

    return IvpProblem(
        name="heat1d", dim=n, rhs=rhs, t0=0.0, y0=u0, t_out=float(t_out),
        jac=jac, rho_bound=lambda t, u: rho, reference=reference,
    )


PROBLEMS: dict[str, Callable[[], IvpProblem]] = {
    "vdpol": vdpol,
    "rober": rober,
    "hires": hires,
    "burgers": burgers,
    "heat1d": heat1d,
}
