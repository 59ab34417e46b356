"""Flow integrators for inference.

Two solvers: an adaptive Dormand-Prince 5(4) pair with PI step control for
flat spaces, and a fixed-step geodesic Euler method that stays on a curved
manifold by stepping through the exponential map and reprojecting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .manifolds import Euclidean, Manifold


@dataclass(frozen=True)
class Dopri5:
    """Adaptive embedded 5(4) Runge-Kutta pair; flat spaces only."""

    rtol: float = 1e-5
    atol: float = 1e-5
    max_steps: int = 10_000

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("rtol and atol must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass(frozen=True)
class GeodesicEuler:
    """Fixed-step forward Euler through the exponential map."""

    num_steps: int = 10

    def __post_init__(self):
        if self.num_steps < 1:
            raise ValueError("num_steps must be >= 1")


SolverConfig = Dopri5 | GeodesicEuler


def solver_to_dict(cfg: SolverConfig) -> dict:
    if isinstance(cfg, Dopri5):
        return {"kind": "dopri5", "rtol": cfg.rtol, "atol": cfg.atol,
                "max_steps": cfg.max_steps}
    if isinstance(cfg, GeodesicEuler):
        return {"kind": "geodesic_euler", "num_steps": cfg.num_steps}
    raise TypeError(f"unknown solver config {type(cfg)!r}")


def solver_from_dict(d: dict) -> SolverConfig:
    kind = d.get("kind")
    if kind == "dopri5":
        return Dopri5(rtol=float(d.get("rtol", 1e-5)), atol=float(d.get("atol", 1e-5)),
                      max_steps=int(d.get("max_steps", 10_000)))
    if kind in ("geodesic_euler", "euler"):
        return GeodesicEuler(num_steps=int(d.get("num_steps", 10)))
    raise ValueError(f"unknown solver kind {kind!r}")


# Dormand-Prince 5(4) tableau. _B5 is the 5th-order propagating weight row
# (FSAL: equal to the last stage row), _ERR the difference to the embedded
# 4th-order weights.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_ERR = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200,
                 22 / 525, -1 / 40])

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
# PI controller exponents for a 4th-order error estimate
_PI_ALPHA = 0.7 / 5.0
_PI_BETA = 0.4 / 5.0


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(x * x)))


def _initial_step(f, t0: float, y0: np.ndarray, f0: np.ndarray, t1: float,
                  rtol: float, atol: float) -> float:
    sc = atol + rtol * np.abs(y0)
    d0 = _rms(y0 / sc)
    d1 = _rms(f0 / sc)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = np.asarray(f(t0 + h0, y1), dtype=float)
    d2 = _rms((f1 - f0) / sc) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, t1 - t0)


def dopri5(f, y0: np.ndarray, t0: float, t1: float, cfg: Dopri5):
    """Integrate dy/dt = f(t, y) from t0 to t1 on a flat vector state.

    Returns (y(t1), info) where info carries step statistics. Raises
    NumericalError when the step budget is exhausted or the field returns
    non-finite values.
    """
    y = np.asarray(y0, dtype=float).copy()
    if t1 <= t0:
        return y, {"steps": 0, "rejected": 0, "nfev": 0}
    t = float(t0)
    k1 = np.asarray(f(t, y), dtype=float)
    nfev = 1
    h = _initial_step(f, t, y, k1, t1, cfg.rtol, cfg.atol)
    nfev += 1
    steps = 0
    rejected = 0
    prev_err = 1.0
    k = [k1] + [np.empty_like(y) for _ in range(6)]
    while t < t1:
        if steps >= cfg.max_steps:
            raise NumericalError(
                f"dopri5 exceeded max_steps={cfg.max_steps} at t={t:.6g}"
            )
        h = min(h, t1 - t)
        for i in range(1, 7):
            yi = y + h * sum(a * k[j] for j, a in enumerate(_A[i]))
            k[i] = np.asarray(f(t + _C[i] * h, yi), dtype=float)
        nfev += 6
        y_new = y + h * sum(b * k[j] for j, b in enumerate(_B5) if b != 0.0)
        if not np.all(np.isfinite(y_new)):
            raise NumericalError("dopri5 produced non-finite state; check the field")
        err_vec = h * sum(e * k[j] for j, e in enumerate(_ERR) if e != 0.0)
        sc = cfg.atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = _rms(err_vec / sc)
        steps += 1
        if err <= 1.0:
            t = t + h
            y = y_new
            k[0] = k[6]  # FSAL
            if err == 0.0:
                factor = _MAX_FACTOR
            else:
                factor = _SAFETY * err ** (-_PI_ALPHA) * prev_err ** _PI_BETA
                factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
            prev_err = max(err, 1e-10)
            h = h * factor
        else:
            rejected += 1
            factor = max(_MIN_FACTOR, _SAFETY * err ** (-0.2))
            h = h * min(1.0, factor)
    return y, {"steps": steps, "rejected": rejected, "nfev": nfev}


def _euler_segment(field, a: np.ndarray, t0: float, t1: float, steps: int,
                   manifold: Manifold) -> np.ndarray:
    h = (t1 - t0) / steps
    for i in range(steps):
        v = np.asarray(field(t0 + i * h, a), dtype=float)
        if not np.all(np.isfinite(v)):
            raise NumericalError("field returned non-finite values")
        a = manifold.exp(a, h * v)
        a = manifold.to_manifold(a)
    return a


def integrate_flow(field, a_init: np.ndarray, cfg: SolverConfig,
                   manifold: Manifold) -> np.ndarray:
    """Integrate a learned velocity field over t in [0, 1].

    ``field(t, a)`` takes a (horizon, ambient) state and returns tangent
    vectors of the same shape.
    """
    a0 = np.asarray(a_init, dtype=float)
    if isinstance(cfg, Dopri5):
        if not isinstance(manifold, Euclidean):
            raise ValueError("Dopri5 runs on flat spaces only; use GeodesicEuler")
        shape = a0.shape

        def fvec(t, y):
            return np.asarray(field(t, y.reshape(shape)), dtype=float).reshape(-1)

        y, _ = dopri5(fvec, a0.reshape(-1), 0.0, 1.0, cfg)
        return y.reshape(shape)
    if isinstance(cfg, GeodesicEuler):
        return _euler_segment(field, a0.copy(), 0.0, 1.0, cfg.num_steps, manifold)
    raise TypeError(f"unknown solver config {type(cfg)!r}")


def trace_flow(field, a_init: np.ndarray, cfg: SolverConfig, manifold: Manifold,
               num_snapshots: int) -> list[tuple[float, np.ndarray]]:
    """Integrate as in integrate_flow but record evenly spaced snapshots,
    always including t = 0 and t = 1."""
    if num_snapshots < 2:
        raise ValueError("num_snapshots must be >= 2")
    a = np.asarray(a_init, dtype=float).copy()
    times = np.linspace(0.0, 1.0, num_snapshots)
    out = [(0.0, a.copy())]
    shape = a.shape
    for lo, hi in zip(times[:-1], times[1:]):
        if isinstance(cfg, Dopri5):
            if not isinstance(manifold, Euclidean):
                raise ValueError("Dopri5 runs on flat spaces only; use GeodesicEuler")

            def fvec(t, y):
                return np.asarray(field(t, y.reshape(shape)), dtype=float).reshape(-1)

            y, _ = dopri5(fvec, a.reshape(-1), float(lo), float(hi), cfg)
            a = y.reshape(shape)
        elif isinstance(cfg, GeodesicEuler):
            steps = max(1, round(cfg.num_steps * (hi - lo)))
            a = _euler_segment(field, a, float(lo), float(hi), steps, manifold)
        else:
            raise TypeError(f"unknown solver config {type(cfg)!r}")
        out.append((float(hi), a.copy()))
    return out
