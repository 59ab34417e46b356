"""Demonstration datasets: CSV ingestion, synthetic letter generators,
normalization, sphere projection, splitting, and training-pair sampling.

CSV schema (UTF-8, header required, lines starting with '#' are comments):

    demo_id (int), t (int, 0-based, contiguous per demo), x0..x{d-1} (float)

A prepared dataset is a CSV plus a JSON manifest sidecar recording the
manifold, normalization parameters, tangent radius, and the train/val/test
split of (demo, step) pairs. Timesteps use 1-based positions internally
when talking about pair indices tau (the action horizon starts at point
tau, the reference observation is point tau-1, the context is point c with
1 <= c <= tau-2).
"""

from __future__ import annotations

import csv
import datetime as _dt
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SchemaError
from .manifolds import Euclidean, Manifold, Sphere, manifold_from_dict, manifold_to_dict

DATASET_SCHEMA = "flowpolicy.dataset"
DATASET_VERSION = 1

LETTER_SHAPES = ("S", "W", "J", "L", "L_mirrored_pair")


@dataclass(frozen=True)
class Normalization:
    """Invertible affine map applied to raw Euclidean data: shift by the
    centroid, then divide by one scalar so the largest per-axis absolute
    value becomes 1. tangent_radius records a later sphere projection."""

    shift: np.ndarray
    scale: float
    tangent_radius: float | None = None

    def apply(self, points: np.ndarray) -> np.ndarray:
        return (points - self.shift) / self.scale

    def invert(self, points: np.ndarray) -> np.ndarray:
        return points * self.scale + self.shift

    def to_dict(self) -> dict:
        return {
            "shift": np.asarray(self.shift, dtype=float).tolist(),
            "scale": float(self.scale),
            "tangent_radius": self.tangent_radius,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Normalization":
        radius = d.get("tangent_radius")
        return cls(shift=np.asarray(d["shift"], dtype=float), scale=float(d["scale"]),
                   tangent_radius=None if radius is None else float(radius))


@dataclass(frozen=True)
class Split:
    """Disjoint (demo_id, tau) assignments; tau is 1-based and ranges over
    the sampleable positions 3..T_m-1."""

    train: np.ndarray
    val: np.ndarray
    test: np.ndarray

    def to_dict(self) -> dict:
        return {
            "train": np.asarray(self.train, dtype=int).tolist(),
            "val": np.asarray(self.val, dtype=int).tolist(),
            "test": np.asarray(self.test, dtype=int).tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Split":
        def arr(rows):
            a = np.asarray(rows, dtype=int)
            return a.reshape(-1, 2) if a.size else np.empty((0, 2), dtype=int)

        return cls(train=arr(d["train"]), val=arr(d["val"]), test=arr(d["test"]))

    def pairs(self, name: str) -> np.ndarray:
        if name not in ("train", "val", "test"):
            raise ValueError(f"unknown split name {name!r}")
        return getattr(self, name)


@dataclass
class Demonstration:
    id: int
    points: np.ndarray  # (T_m, ambient)
    source_dim: int

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim != 2 or len(self.points) < 3:
            raise ValueError("a demonstration needs at least 3 points of equal width")


@dataclass
class Dataset:
    demos: list[Demonstration]
    manifold: Manifold
    normalization: Normalization | None = None
    split: Split | None = None

    def __post_init__(self):
        if not self.demos:
            raise ValueError("dataset must contain at least one demonstration")
        lengths = {len(d.points) for d in self.demos}
        if len(lengths) != 1:
            raise SchemaError(f"demonstrations have ragged lengths {sorted(lengths)}")
        widths = {d.points.shape[1] for d in self.demos}
        if widths != {self.manifold.ambient_dim}:
            raise ValueError("demonstration width does not match the manifold")

    @property
    def num_demos(self) -> int:
        return len(self.demos)

    @property
    def timesteps(self) -> int:
        return len(self.demos[0].points)

    @property
    def dim(self) -> int:
        return self.manifold.ambient_dim

    def stacked(self) -> np.ndarray:
        """All demo points as one (num_demos, timesteps, ambient) array."""
        return np.stack([d.points for d in self.demos])

    def index_of(self, demo_id: int) -> int:
        for i, d in enumerate(self.demos):
            if d.id == demo_id:
                return i
        raise KeyError(f"no demonstration with id {demo_id}")


@dataclass(frozen=True)
class ObservationVector:
    """Conditioning input: the state just before the horizon, one earlier
    context state, and their normalized index gap."""

    reference: np.ndarray
    context: np.ndarray
    gap: float

    def __post_init__(self):
        if not 0.0 < self.gap <= 1.0:
            raise ValueError(f"gap must lie in (0, 1], got {self.gap}")

    def flat(self) -> np.ndarray:
        return np.concatenate([np.asarray(self.reference, dtype=float),
                               np.asarray(self.context, dtype=float),
                               [self.gap]])


@dataclass(frozen=True)
class TrainingPair:
    action_horizon: np.ndarray  # (T_a, ambient)
    observation: ObservationVector


# ---------------------------------------------------------------------------
# synthetic letters

def _polyline(waypoints: np.ndarray, n: int) -> np.ndarray:
    """Densify a polyline to n points spaced uniformly in arc length."""
    seg = np.diff(waypoints, axis=0)
    lengths = np.linalg.norm(seg, axis=1)
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    s = np.linspace(0.0, cum[-1], n)
    out = np.empty((n, waypoints.shape[1]))
    for j in range(waypoints.shape[1]):
        out[:, j] = np.interp(s, cum, waypoints[:, j])
    return out


def _smooth(points: np.ndarray, window: int) -> np.ndarray:
    """Moving-average smoothing with edge padding; endpoints stay fixed."""
    if window <= 1:
        return points
    if window % 2 == 0:
        window += 1
    half = window // 2
    padded = np.concatenate([np.repeat(points[:1], half, axis=0), points,
                             np.repeat(points[-1:], half, axis=0)])
    kernel = np.ones(window) / window
    out = np.empty_like(points)
    for j in range(points.shape[1]):
        out[:, j] = np.convolve(padded[:, j], kernel, mode="valid")
    return out


def _resample(points: np.ndarray, n: int) -> np.ndarray:
    return _polyline(points, n)


def _curve_s(n: int) -> np.ndarray:
    s = np.linspace(0.0, 1.0, 4 * n)
    y = 1.0 - 2.0 * s
    x = 0.75 * np.sin(np.pi * y)
    return _resample(np.stack([x, y], axis=1), n)


def _curve_w(n: int) -> np.ndarray:
    s = np.linspace(0.0, 1.0, 4 * n)
    x = -1.0 + 2.0 * s
    y = 0.85 * np.cos(4.0 * np.pi * s) * (0.7 + 0.3 * np.cos(2.0 * np.pi * s))
    return _resample(np.stack([x, y], axis=1), n)


def _curve_j(n: int) -> np.ndarray:
    k = 4 * n
    stem = np.stack([np.full(k, 0.45), np.linspace(0.95, -0.3, k)], axis=1)
    phi = np.linspace(0.0, np.pi, k)
    hook = np.stack([0.45 * np.cos(phi), -0.3 - 0.45 * np.sin(phi)], axis=1)
    dense = np.concatenate([stem, hook[1:]])
    return _resample(_smooth(dense, max(3, k // 25)), n)


def _curve_l(n: int, mirror: bool) -> np.ndarray:
    x0, xe = (-0.12, 0.85) if not mirror else (0.12, -0.85)
    waypoints = np.array([[x0, 1.0], [x0, -0.8], [xe, -0.8]])
    dense = _polyline(waypoints, 4 * n)
    return _resample(_smooth(dense, max(3, n // 8)), n)


def _base_curves(shape: str, timesteps: int) -> list[np.ndarray]:
    if shape == "S":
        return [_curve_s(timesteps)]
    if shape == "W":
        return [_curve_w(timesteps)]
    if shape == "J":
        return [_curve_j(timesteps)]
    if shape == "L":
        return [_curve_l(timesteps, mirror=False)]
    if shape == "L_mirrored_pair":
        return [_curve_l(timesteps, mirror=False), _curve_l(timesteps, mirror=True)]
    raise ValueError(f"unknown letter shape {shape!r}; choose from {LETTER_SHAPES}")


def synthesize_letter(shape: str, num_demos: int, timesteps: int,
                      noise_scale: float, rng: np.random.Generator) -> Dataset:
    """Generate smooth planar demos tracing the named letter.

    Each demo is the base curve plus a per-demo deformation (constant offset
    and three low-frequency harmonics) scaled by noise_scale and faded to
    zero at the end, so every demo of a mode shares the goal point.
    L_mirrored_pair emits num_demos for each of the two mirrored variants,
    whose strokes start in a common region near the top.
    """
    if num_demos < 1:
        raise ValueError("num_demos must be >= 1")
    if timesteps < 16:
        raise ValueError("timesteps must be >= 16")
    curves = _base_curves(shape, timesteps)
    s = np.linspace(0.0, 1.0, timesteps)
    envelope = (1.0 - s)[:, None]
    demos = []
    demo_id = 0
    for curve in curves:
        for _ in range(num_demos):
            offset = 0.5 * rng.standard_normal(2)
            delta = np.broadcast_to(offset, (timesteps, 2)).copy()
            for k in (1, 2, 3):
                amp = rng.standard_normal(2) / k
                phase = rng.uniform(0.0, 2.0 * np.pi, 2)
                delta += amp * np.sin(np.pi * k * s[:, None] + phase)
            points = curve + noise_scale * envelope * delta
            demos.append(Demonstration(id=demo_id, points=points, source_dim=2))
            demo_id += 1
    return Dataset(demos=demos, manifold=Euclidean(2))


# ---------------------------------------------------------------------------
# normalization and sphere projection

def normalize(dataset: Dataset) -> Dataset:
    """Center on the centroid and rescale so max |coordinate| is 1."""
    if not isinstance(dataset.manifold, Euclidean):
        raise ValueError("normalize expects raw Euclidean data")
    pts = dataset.stacked()
    shift = pts.reshape(-1, pts.shape[-1]).mean(axis=0)
    centered = pts - shift
    scale = float(np.max(np.abs(centered)))
    if scale < 1e-12:
        raise ValueError("degenerate dataset: all points coincide")
    norm = Normalization(shift=shift, scale=scale)
    demos = [replace_points(d, norm.apply(d.points)) for d in dataset.demos]
    return Dataset(demos=demos, manifold=dataset.manifold,
                   normalization=norm, split=dataset.split)


def replace_points(demo: Demonstration, points: np.ndarray) -> Demonstration:
    return Demonstration(id=demo.id, points=points, source_dim=demo.source_dim)


def plane_to_sphere(points: np.ndarray, tangent_radius: float) -> np.ndarray:
    """Treat planar points p as tangent vectors radius*p at the pole and
    push them through the exponential map onto S^d."""
    points = np.asarray(points, dtype=float)
    d = points.shape[-1]
    sphere = Sphere(d)
    tangent = tangent_radius * np.concatenate(
        [points, np.zeros(points.shape[:-1] + (1,))], axis=-1)
    return sphere.exp(sphere.origin, tangent)


def sphere_to_plane(points: np.ndarray, tangent_radius: float) -> np.ndarray:
    """Inverse of plane_to_sphere inside the injectivity radius."""
    points = np.asarray(points, dtype=float)
    sphere = Sphere(points.shape[-1] - 1)
    tangent = sphere.log(sphere.origin, points)
    return tangent[..., :-1] / tangent_radius


def project_to_sphere(dataset: Dataset, tangent_radius: float = 0.8) -> Dataset:
    """Map a normalized planar dataset onto the sphere through the pole's
    tangent space."""
    if not isinstance(dataset.manifold, Euclidean):
        raise ValueError("project_to_sphere expects a Euclidean dataset")
    if dataset.normalization is None:
        raise ValueError("normalize the dataset before projecting it")
    if not 0.0 < tangent_radius < np.pi / 2:
        raise ValueError(f"tangent_radius must lie in (0, pi/2), got {tangent_radius}")
    sphere = Sphere(dataset.dim)
    norm = Normalization(shift=dataset.normalization.shift,
                         scale=dataset.normalization.scale,
                         tangent_radius=float(tangent_radius))
    demos = [replace_points(d, plane_to_sphere(d.points, tangent_radius))
             for d in dataset.demos]
    return Dataset(demos=demos, manifold=sphere, normalization=norm,
                   split=dataset.split)


# ---------------------------------------------------------------------------
# pairs, splits, sampling

def pair_universe(dataset: Dataset) -> np.ndarray:
    """All sampleable (demo_id, tau) pairs: tau in 3..T_m-1 so the context
    range {1..tau-2} is nonempty and the horizon starts inside the demo."""
    taus = np.arange(3, dataset.timesteps)
    out = []
    for d in dataset.demos:
        out.append(np.stack([np.full(len(taus), d.id), taus], axis=1))
    return np.concatenate(out)


def split_dataset(dataset: Dataset, fractions, rng: np.random.Generator) -> Dataset:
    """Shuffle the pair universe and assign train/val/test by fractions."""
    fractions = [float(f) for f in fractions]
    if len(fractions) != 3 or any(f < 0 for f in fractions):
        raise ValueError("fractions must be three nonnegative numbers")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError(f"fractions must sum to 1, got {sum(fractions)}")
    pairs = pair_universe(dataset)
    n = len(pairs)
    perm = rng.permutation(n)
    n_train = int(round(n * fractions[0]))
    n_val = int(round(n * (fractions[0] + fractions[1]))) - n_train
    counts = (n_train, n_val, n - n_train - n_val)
    for frac, count, name in zip(fractions, counts, ("train", "val", "test")):
        if frac > 0 and count == 0:
            raise ValueError(f"too few pairs for a nonempty {name} split")
    shuffled = pairs[perm]
    split = Split(train=shuffled[:n_train],
                  val=shuffled[n_train:n_train + n_val],
                  test=shuffled[n_train + n_val:])
    return Dataset(demos=dataset.demos, manifold=dataset.manifold,
                   normalization=dataset.normalization, split=split)


def draw_context(taus: np.ndarray, rng: np.random.Generator,
                 window: int | None = None) -> np.ndarray:
    """Uniform context indices c, one per tau, with 1 <= c <= tau-2 and an
    optional lower window bound max(1, tau-window)."""
    taus = np.asarray(taus, dtype=int)
    hi = taus - 2
    if np.any(hi < 1):
        raise ValueError("tau must be >= 3 so the context range is nonempty")
    lo = np.ones_like(taus) if window is None else np.maximum(1, taus - int(window))
    return rng.integers(lo, hi + 1)


def horizon_indices(timesteps: int, tau: np.ndarray, horizon: int) -> np.ndarray:
    """0-based point indices of the action horizon starting at position tau,
    clamped to repeat the final point past the end of the demo."""
    tau = np.asarray(tau, dtype=int)
    idx = (tau - 1)[..., None] + np.arange(horizon)
    return np.minimum(idx, timesteps - 1)


def build_training_pair(dataset: Dataset, demo_id: int, tau: int, c: int,
                        horizon: int) -> TrainingPair:
    demo = dataset.demos[dataset.index_of(demo_id)]
    t_m = dataset.timesteps
    if not 3 <= tau <= t_m - 1:
        raise ValueError(f"tau must lie in [3, {t_m - 1}], got {tau}")
    if not 1 <= c <= tau - 2:
        raise ValueError(f"context index must lie in [1, {tau - 2}], got {c}")
    idx = horizon_indices(t_m, np.asarray(tau), horizon)
    obs = ObservationVector(reference=demo.points[tau - 2].copy(),
                            context=demo.points[c - 1].copy(),
                            gap=float(tau - c) / t_m)
    return TrainingPair(action_horizon=demo.points[idx].copy(), observation=obs)


def sample_training_pair(dataset: Dataset, split_name: str, horizon: int,
                         rng: np.random.Generator,
                         context_window: int | None = None) -> TrainingPair:
    """Draw one (action horizon, observation) pair from the named split."""
    if dataset.split is None:
        raise ValueError("dataset has no split; call split_dataset first")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    pairs = dataset.split.pairs(split_name)
    if len(pairs) == 0:
        raise ValueError(f"split {split_name!r} is empty")
    demo_id, tau = pairs[int(rng.integers(len(pairs)))]
    c = int(draw_context(np.asarray([tau]), rng, context_window)[0])
    return build_training_pair(dataset, int(demo_id), int(tau), c, horizon)


def gather_batch(dataset: Dataset, pair_rows: np.ndarray, contexts: np.ndarray,
                 horizon: int):
    """Vectorized assembly of a batch of training pairs.

    Returns (actions (B, horizon, D), reference (B, D), context (B, D),
    gap (B,)). pair_rows holds (demo_id, tau); contexts the per-row c.
    """
    stacked = dataset.stacked()
    id_to_idx = {d.id: i for i, d in enumerate(dataset.demos)}
    demo_idx = np.asarray([id_to_idx[int(i)] for i in pair_rows[:, 0]])
    taus = pair_rows[:, 1].astype(int)
    t_m = dataset.timesteps
    idx = horizon_indices(t_m, taus, horizon)
    actions = stacked[demo_idx[:, None], idx]
    reference = stacked[demo_idx, taus - 2]
    context = stacked[demo_idx, np.asarray(contexts, dtype=int) - 1]
    gap = (taus - np.asarray(contexts, dtype=int)) / t_m
    return actions, reference, context, gap


# ---------------------------------------------------------------------------
# CSV and manifest I/O

def _manifest_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.stem + ".manifest.json")


def load_csv(path) -> Dataset:
    """Read raw Euclidean trajectories from the documented CSV schema."""
    path = Path(path)
    rows = []
    header = None
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for line_num, row in enumerate(reader, start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if header is None:
                header = [c.strip() for c in row]
                continue
            rows.append((line_num, row))
    if header is None:
        raise SchemaError(f"{path}: empty file, expected a CSV header")
    if len(header) < 3 or header[0] != "demo_id" or header[1] != "t":
        raise SchemaError(f"{path}: header must start with demo_id,t,x0,...")
    dim = len(header) - 2
    expected_cols = ["demo_id", "t"] + [f"x{i}" for i in range(dim)]
    if header != expected_cols:
        raise SchemaError(f"{path}: header {header} != {expected_cols}")
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    per_demo: dict[int, list[tuple[int, np.ndarray]]] = {}
    seen: set[tuple[int, int]] = set()
    for line_num, row in rows:
        if len(row) != len(header):
            raise SchemaError(f"{path}:{line_num}: expected {len(header)} columns")
        try:
            demo_id = int(row[0])
            t = int(row[1])
            coords = np.asarray([float(v) for v in row[2:]])
        except ValueError as exc:
            raise SchemaError(f"{path}:{line_num}: {exc}") from exc
        if (demo_id, t) in seen:
            raise SchemaError(f"{path}:{line_num}: duplicate (demo_id={demo_id}, t={t})")
        seen.add((demo_id, t))
        per_demo.setdefault(demo_id, []).append((t, coords))
    demos = []
    for demo_id in sorted(per_demo):
        entries = sorted(per_demo[demo_id], key=lambda e: e[0])
        ts = [t for t, _ in entries]
        if ts != list(range(len(ts))):
            raise SchemaError(
                f"{path}: demo {demo_id} timesteps are not contiguous from 0"
            )
        demos.append(Demonstration(id=demo_id,
                                   points=np.stack([c for _, c in entries]),
                                   source_dim=dim))
    lengths = {len(d.points) for d in demos}
    if len(lengths) != 1:
        raise SchemaError(f"{path}: ragged demos, lengths {sorted(lengths)}")
    return Dataset(demos=demos, manifold=Euclidean(dim))


def save_dataset(dataset: Dataset, csv_path, comments: list[str] | None = None,
                 manifest_extra: dict | None = None) -> Path:
    """Write the dataset CSV and its manifest sidecar; returns the CSV path."""
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    dim = dataset.dim
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        for line in comments or []:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(["demo_id", "t"] + [f"x{i}" for i in range(dim)])
        for demo in dataset.demos:
            for t, point in enumerate(demo.points):
                writer.writerow([demo.id, t] + [repr(float(v)) for v in point])
    manifest = {
        "schema": DATASET_SCHEMA,
        "version": DATASET_VERSION,
        "manifold": manifold_to_dict(dataset.manifold),
        "normalization": None if dataset.normalization is None
        else dataset.normalization.to_dict(),
        "split": None if dataset.split is None else dataset.split.to_dict(),
        "num_demos": dataset.num_demos,
        "timesteps": dataset.timesteps,
        "created_at": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    manifest.update(manifest_extra or {})
    _manifest_path(csv_path).write_text(
        json.dumps(manifest, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    return csv_path


def load_dataset(csv_path) -> Dataset:
    """Load a prepared dataset (CSV + manifest)."""
    csv_path = Path(csv_path)
    manifest_file = _manifest_path(csv_path)
    if not manifest_file.exists():
        raise FileNotFoundError(f"missing dataset manifest {manifest_file}")
    try:
        manifest = json.loads(manifest_file.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{manifest_file}: invalid JSON: {exc}") from exc
    if manifest.get("schema") != DATASET_SCHEMA:
        raise SchemaError(f"{manifest_file}: not a dataset manifest")
    raw = load_csv(csv_path)
    manifold = manifold_from_dict(manifest["manifold"])
    if manifold.ambient_dim != raw.dim:
        raise SchemaError(
            f"{csv_path}: CSV width {raw.dim} does not match manifest manifold"
        )
    defect = float(np.max(manifold.point_defect(raw.stacked())))
    if defect > 1e-9:
        raise SchemaError(
            f"{csv_path}: points violate the manifold invariant (defect {defect:.2e})"
        )
    norm = manifest.get("normalization")
    split = manifest.get("split")
    return Dataset(
        demos=raw.demos,
        manifold=manifold,
        normalization=None if norm is None else Normalization.from_dict(norm),
        split=None if split is None else Split.from_dict(split),
    )


def dataset_manifest(csv_path) -> dict:
    """Raw manifest dict for a prepared dataset."""
    manifest_file = _manifest_path(csv_path)
    return json.loads(manifest_file.read_text(encoding="utf-8"))
