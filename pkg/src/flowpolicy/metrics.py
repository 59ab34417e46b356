"""Trajectory evaluation: dynamic time warping distance under the geodesic
point metric, and jerkiness (mean squared third finite difference)."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .manifolds import Manifold

# DTW alignment cost is divided by n + m - 1 (the maximal alignment length)
# so values are comparable across trajectory lengths.
DTW_NORMALIZATION = "n+m-1"


def dtwd(a: np.ndarray, b: np.ndarray, manifold: Manifold) -> float:
    """Dynamic time warping distance between two trajectories.

    Classic boundary-matched dynamic program with steps (1,0), (0,1), (1,1)
    and geodesic point distances as cell costs; the minimal accumulated cost
    is normalized by n + m - 1.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or b.ndim != 2 or len(a) == 0 or len(b) == 0:
        raise ValueError("trajectories must be nonempty (steps, ambient) arrays")
    n, m = len(a), len(b)
    cost = manifold.distance(a[:, None, :], b[None, :, :])
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, n + 1):
        row = acc[i]
        prev = acc[i - 1]
        ci = cost[i - 1]
        for j in range(1, m + 1):
            row[j] = ci[j - 1] + min(prev[j], row[j - 1], prev[j - 1])
    return float(acc[n, m]) / (n + m - 1)


def jerkiness(traj: np.ndarray, dt: float = 1.0) -> float:
    """Mean squared third finite difference of the ambient coordinates.

    Zero for constant, linear, and quadratic-in-time motion. On the sphere
    the differences are taken in ambient coordinates, an approximation of
    the covariant derivative that keeps values comparable across manifolds.
    """
    traj = np.asarray(traj, dtype=float)
    if traj.ndim != 2 or len(traj) < 4:
        raise ValueError("jerkiness needs a (steps, ambient) trajectory with >= 4 steps")
    if dt <= 0:
        raise ValueError("dt must be positive")
    d3 = (traj[3:] - 3.0 * traj[2:-1] + 3.0 * traj[1:-2] - traj[:-3]) / dt ** 3
    return float(np.mean(np.sum(d3 * d3, axis=-1)))


@dataclass
class MetricReport:
    rows: list[dict]
    dtwd_mean: float
    dtwd_std: float
    jerk_mean: float
    jerk_std: float
    pairing: str
    metadata: dict

    def to_summary(self) -> dict:
        return {
            "dtwd_mean": self.dtwd_mean,
            "dtwd_std": self.dtwd_std,
            "jerk_mean": self.jerk_mean,
            "jerk_std": self.jerk_std,
            "pairing": self.pairing,
            "num_pairs": len(self.rows),
            "dtw_normalization": DTW_NORMALIZATION,
            **self.metadata,
        }


def evaluate_rollouts(demos: list[np.ndarray], rollouts: list[np.ndarray],
                      manifold: Manifold, pairing: str = "matched",
                      dt: float = 1.0, metadata: dict | None = None) -> MetricReport:
    """Score rollouts against demonstrations.

    matched: rollout i is compared with demo i (counts must agree).
    nearest: each rollout is scored against its minimum-distance demo, for
    rollouts that were not initialized from a specific demonstration.
    Jerkiness is averaged over all rollouts either way.
    """
    if pairing not in ("matched", "nearest"):
        raise ValueError(f"pairing must be 'matched' or 'nearest', got {pairing!r}")
    if not demos or not rollouts:
        raise ValueError("need at least one demo and one rollout")
    if pairing == "matched" and len(demos) != len(rollouts):
        raise ValueError(
            f"matched pairing needs equal counts, got {len(demos)} demos "
            f"and {len(rollouts)} rollouts"
        )
    rows = []
    for i, traj in enumerate(rollouts):
        if pairing == "matched":
            j = i
            dist = dtwd(traj, demos[j], manifold)
        else:
            dists = [dtwd(traj, demo, manifold) for demo in demos]
            j = int(np.argmin(dists))
            dist = float(dists[j])
        rows.append({
            "rollout": i,
            "demo": j,
            "dtwd": dist,
            "jerkiness": jerkiness(traj, dt),
        })
    dtwds = np.asarray([r["dtwd"] for r in rows])
    jerks = np.asarray([r["jerkiness"] for r in rows])
    return MetricReport(
        rows=rows,
        dtwd_mean=float(dtwds.mean()),
        dtwd_std=float(dtwds.std()),
        jerk_mean=float(jerks.mean()),
        jerk_std=float(jerks.std()),
        pairing=pairing,
        metadata=metadata or {},
    )


def write_report_csv(report: MetricReport, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        for key in ("config_hash", "seed"):
            if key in report.metadata:
                fh.write(f"# {key}={report.metadata[key]}\n")
        writer = csv.writer(fh)
        writer.writerow(["rollout", "demo", "dtwd", "jerkiness"])
        for r in report.rows:
            writer.writerow([r["rollout"], r["demo"], repr(r["dtwd"]),
                             repr(r["jerkiness"])])
        writer.writerow(["mean", "", repr(report.dtwd_mean), repr(report.jerk_mean)])
        writer.writerow(["std", "", repr(report.dtwd_std), repr(report.jerk_std)])
    return path


def write_report_summary(report: MetricReport, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report.to_summary(), sort_keys=True, indent=1) + "\n",
                    encoding="utf-8")
    return path
