"""Conditional probability paths and their target velocity fields.

Training regresses a network onto the velocity of a per-sample path that
carries a base draw a0 to a data draw a1 as t runs from 0 to 1. Over an
action horizon the path acts componentwise (product manifold); the caller
supplies a0 as one repeated base point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .manifolds import Manifold


@dataclass
class PathSample:
    """A point on a conditional path together with its regression target.

    point and target have shape (..., horizon, ambient); target[i] is the
    path velocity at point[i], tangent to the manifold there.
    """

    t: float | np.ndarray
    point: np.ndarray
    target: np.ndarray


def _check_inputs(a0, a1, t):
    a0 = np.asarray(a0, dtype=float)
    a1 = np.asarray(a1, dtype=float)
    if a0.shape != a1.shape:
        raise ValueError(f"horizon shapes differ: {a0.shape} vs {a1.shape}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0) or np.any(t > 1.0):
        raise ValueError("path time t must lie in [0, 1]")
    # broadcast over (horizon, ambient)
    t_b = t[..., None, None]
    return a0, a1, t, t_b


def sample_geodesic_path(a0, a1, t, manifold: Manifold) -> PathSample:
    """Constant-speed geodesic interpolant between horizons a0 and a1.

    point = exp_{a0}(t * log_{a0}(a1)); the velocity is the initial log
    vector parallel transported to the current point, so its norm equals the
    geodesic distance for every t.
    """
    a0, a1, t, t_b = _check_inputs(a0, a1, t)
    v = manifold.log(a0, a1)
    point = manifold.exp(a0, t_b * v)
    target = manifold.transport(v, a0, point)
    return PathSample(t=t, point=point, target=target)


def sample_gaussian_path(a0, a1, t, sigma_min: float) -> PathSample:
    """Gaussian conditional path on Euclidean space.

    point = t*a1 + (1 - (1-s)t)*a0 with s = sigma_min: the base draw is
    carried linearly toward the data draw while its scale shrinks from 1 to
    s. The target field is (a1 - (1-s)*point) / (1 - (1-s)t), which along
    the path equals the time derivative a1 - (1-s)*a0.
    """
    if not 0.0 <= sigma_min < 1.0:
        raise ValueError(f"sigma_min must lie in [0, 1), got {sigma_min}")
    a0, a1, t, t_b = _check_inputs(a0, a1, t)
    shrink = 1.0 - (1.0 - sigma_min) * t_b
    if np.any(shrink < 1e-9):
        raise NumericalError(
            "degenerate path denominator: t too close to 1 with sigma_min near 0"
        )
    point = t_b * a1 + shrink * a0
    target = (a1 - (1.0 - sigma_min) * point) / shrink
    return PathSample(t=t, point=point, target=target)


def flow_matching_loss(v_pred, path: PathSample) -> float:
    """Squared metric norm of the regression residual, summed over the horizon.

    On the embedded sphere and on flat space the metric is the ambient inner
    product, so this is the plain squared norm of tangent residuals.
    """
    v_pred = np.asarray(v_pred, dtype=float)
    if v_pred.shape != path.target.shape:
        raise ValueError(
            f"prediction shape {v_pred.shape} does not match target {path.target.shape}"
        )
    r = v_pred - path.target
    return float(np.sum(r * r))
