"""Geometry kernels for Euclidean space and the embedded unit hypersphere.

Points and tangent vectors are plain float64 arrays in ambient coordinates,
and every operation broadcasts over arbitrary leading batch axes. Sphere
points live on S^d embedded in R^{d+1}; a tangent vector at x is an ambient
vector orthogonal to x. All operations are pure functions of their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ManifoldDomainError

# Below this angle, sin(t)/t style ratios switch to series expansions to
# avoid catastrophic cancellation.
_SMALL = 1e-6
# Inner products at or below -1 + slack count as antipodal (cut locus).
_ANTIPODAL_SLACK = 1e-12


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sum(a * b, axis=-1, keepdims=True)


def _arr(v) -> np.ndarray:
    return np.asarray(v, dtype=float)


@dataclass(frozen=True)
class Euclidean:
    """Flat R^d; geodesics are straight lines and transport is the identity."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")

    @property
    def ambient_dim(self) -> int:
        return self.dim

    @property
    def origin(self) -> np.ndarray:
        return np.zeros(self.dim)

    def _check(self, *vs: np.ndarray) -> None:
        for v in vs:
            if v.shape[-1] != self.dim:
                raise ValueError(
                    f"expected trailing dimension {self.dim}, got shape {v.shape}"
                )

    def exp(self, x, u) -> np.ndarray:
        x, u = _arr(x), _arr(u)
        self._check(x, u)
        return x + u

    def log(self, x, y) -> np.ndarray:
        x, y = _arr(x), _arr(y)
        self._check(x, y)
        return y - x

    def transport(self, u, x, y) -> np.ndarray:
        u, x, y = _arr(u), _arr(x), _arr(y)
        self._check(u, x, y)
        return np.broadcast_to(u, np.broadcast_shapes(u.shape, x.shape, y.shape)).copy()

    def distance(self, x, y) -> np.ndarray:
        x, y = _arr(x), _arr(y)
        self._check(x, y)
        return np.linalg.norm(y - x, axis=-1)

    def to_tangent(self, v, x) -> np.ndarray:
        v = _arr(v)
        self._check(v)
        return v.copy()

    def to_manifold(self, v) -> np.ndarray:
        v = _arr(v)
        self._check(v)
        return v.copy()

    def point_defect(self, x) -> np.ndarray:
        """Distance from the membership invariant; identically zero here."""
        x = _arr(x)
        self._check(x)
        return np.zeros(x.shape[:-1])

    def tangent_defect(self, u, x) -> np.ndarray:
        u = _arr(u)
        self._check(u)
        return np.zeros(u.shape[:-1])

    def sample_base(self, rng: np.random.Generator, sigma: float, origin=None, size=None) -> np.ndarray:
        """Isotropic Gaussian draw with per-axis standard deviation sigma."""
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        shape = (self.dim,) if size is None else (int(size), self.dim)
        z = sigma * rng.standard_normal(shape)
        if origin is not None:
            origin = _arr(origin)
            self._check(origin)
            z = z + origin
        return z


@dataclass(frozen=True)
class Sphere:
    """Unit sphere S^d embedded in R^{d+1} with the round metric.

    The metric is the ambient inner product restricted to tangent spaces, so
    norms and inner products of tangent vectors are plain Euclidean ones.
    """

    intrinsic_dim: int

    def __post_init__(self):
        if self.intrinsic_dim < 1:
            raise ValueError(f"intrinsic_dim must be >= 1, got {self.intrinsic_dim}")

    @property
    def ambient_dim(self) -> int:
        return self.intrinsic_dim + 1

    @property
    def origin(self) -> np.ndarray:
        """The pole (0, ..., 0, 1) used as the default base-distribution center."""
        e = np.zeros(self.ambient_dim)
        e[-1] = 1.0
        return e

    def _check(self, *vs: np.ndarray) -> None:
        for v in vs:
            if v.shape[-1] != self.ambient_dim:
                raise ValueError(
                    f"expected trailing dimension {self.ambient_dim}, got shape {v.shape}"
                )

    def exp(self, x, u) -> np.ndarray:
        """Follow the geodesic from x with initial velocity u for unit time."""
        x, u = _arr(x), _arr(u)
        self._check(x, u)
        theta = np.linalg.norm(u, axis=-1, keepdims=True)
        safe = np.where(theta < _SMALL, 1.0, theta)
        # sin(t)/t, series near zero
        ratio = np.where(theta < _SMALL, 1.0 - theta * theta / 6.0, np.sin(safe) / safe)
        return np.cos(theta) * x + ratio * u

    def log(self, x, y) -> np.ndarray:
        """Tangent vector at x pointing to y along the minimizing geodesic."""
        x, y = _arr(x), _arr(y)
        self._check(x, y)
        c = np.clip(_dot(x, y), -1.0, 1.0)
        if np.any(c <= -1.0 + _ANTIPODAL_SLACK):
            raise ManifoldDomainError(
                "antipodal points: the logarithmic map is undefined at the cut locus"
            )
        theta = np.arccos(c)
        # y - <x,y> x has norm sin(theta) for unit inputs
        w = y - c * x
        sin_t = np.sin(theta)
        safe = np.where(theta < _SMALL, 1.0, sin_t)
        factor = np.where(theta < _SMALL, 1.0 + theta * theta / 6.0, theta / safe)
        return factor * w

    def transport(self, u, x, y) -> np.ndarray:
        """Parallel transport of u from T_x to T_y along the minimizing geodesic.

        The component of u along the geodesic direction rotates in the plane
        spanned by x and that direction; the orthogonal complement is carried
        unchanged. Isometric by construction.
        """
        u, x, y = _arr(u), _arr(x), _arr(y)
        self._check(u, x, y)
        v = self.log(x, y)  # raises at the cut locus
        theta = np.linalg.norm(v, axis=-1, keepdims=True)
        safe = np.where(theta < _SMALL, 1.0, theta)
        e = v / safe
        a = _dot(u, e)
        moved = u + a * ((np.cos(theta) - 1.0) * e - np.sin(theta) * x)
        out = np.where(theta < _SMALL, np.broadcast_to(u, moved.shape), moved)
        return out

    def distance(self, x, y) -> np.ndarray:
        x, y = _arr(x), _arr(y)
        self._check(x, y)
        c = np.clip(_dot(x, y), -1.0, 1.0)
        return np.arccos(c)[..., 0]

    def to_tangent(self, v, x) -> np.ndarray:
        """Project an ambient vector onto the tangent space at x."""
        v, x = _arr(v), _arr(x)
        self._check(v, x)
        return v - _dot(v, x) * x

    def to_manifold(self, v) -> np.ndarray:
        """Radially project an ambient vector back onto the sphere."""
        v = _arr(v)
        self._check(v)
        n = np.linalg.norm(v, axis=-1, keepdims=True)
        if np.any(n <= 1e-12):
            raise ManifoldDomainError("cannot project a near-zero vector onto the sphere")
        return v / n

    def point_defect(self, x) -> np.ndarray:
        x = _arr(x)
        self._check(x)
        return np.abs(np.linalg.norm(x, axis=-1) - 1.0)

    def tangent_defect(self, u, x) -> np.ndarray:
        u, x = _arr(u), _arr(x)
        self._check(u, x)
        return np.abs(_dot(u, x))[..., 0]

    def sample_base(self, rng: np.random.Generator, sigma: float, origin=None, size=None) -> np.ndarray:
        """Wrapped Gaussian: a tangent-space draw pushed through the exp map.

        The draw is N(0, sigma^2 I) in the tangent space at the pole, whose
        orthonormal basis is the first intrinsic_dim ambient axes; for a
        different origin the tangent draw is parallel transported there first.
        """
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        n = 1 if size is None else int(size)
        z = sigma * rng.standard_normal((n, self.intrinsic_dim))
        t = np.concatenate([z, np.zeros((n, 1))], axis=-1)
        base = self.origin
        if origin is not None:
            origin = _arr(origin)
            self._check(origin)
            t = self.transport(t, base, origin)
            base = origin
        pts = self.exp(base, t)
        return pts[0] if size is None else pts


Manifold = Euclidean | Sphere


def manifold_to_dict(m: Manifold) -> dict:
    if isinstance(m, Euclidean):
        return {"kind": "euclidean", "dim": m.dim}
    if isinstance(m, Sphere):
        return {"kind": "sphere", "intrinsic_dim": m.intrinsic_dim}
    raise TypeError(f"unknown manifold type {type(m)!r}")


def manifold_from_dict(d: dict) -> Manifold:
    kind = d.get("kind")
    if kind == "euclidean":
        return Euclidean(int(d["dim"]))
    if kind == "sphere":
        return Sphere(int(d["intrinsic_dim"]))
    raise ValueError(f"unknown manifold kind {kind!r}")
