"""Command-line entry point for the full experimental pipeline.

Subcommands: synth | train | rollout | eval | flow | ablate-horizon.
Experiments are described by a JSON config file (see configs/ for
examples); command-line flags override file values. Every output artifact
embeds the hash of the resolved config and the seed, so a rerun with the
same config and seed reproduces the same files byte for byte (wall-clock
fields excepted: manifest timestamps and the elapsed_seconds column of
training logs).

Exit codes: 0 success, 2 usage, 3 I/O, 4 config/file schema, 5 numerical
failure. Set FLOWPOLICY_LOG=INFO (or DEBUG) for progress output.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import (Dataset, LETTER_SHAPES, dataset_manifest, load_csv,
                   load_dataset, normalize, project_to_sphere, save_dataset,
                   sample_training_pair, split_dataset, synthesize_letter)
from .errors import NumericalError, SchemaError
from .manifolds import Euclidean
from .metrics import evaluate_rollouts, write_report_csv, write_report_summary
from .net import load_checkpoint, save_checkpoint, tangent_head
from .policy import (PolicyConfig, TrainedPolicy, checkpoint_to_policy,
                     infer_action, perturb_history, policy_to_checkpoint,
                     rollout, train)
from .solvers import Dopri5, GeodesicEuler, solver_from_dict, solver_to_dict, trace_flow

logger = logging.getLogger("flowpolicy")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_SCHEMA = 4
EXIT_NUMERICAL = 5


# ---------------------------------------------------------------------------
# declarative run configuration

@dataclass
class DatasetSection:
    source: str = "synth"          # synth | csv
    path: str | None = None        # csv source file
    shape: str = "S"
    num_demos: int = 7
    timesteps: int = 200
    noise_scale: float = 0.08
    manifold: str = "euclidean"    # euclidean | sphere
    tangent_radius: float = 0.8
    split: list = field(default_factory=lambda: [0.8, 0.1, 0.1])


@dataclass
class PolicySection:
    prediction_horizon: int = 8
    execution_horizon: int | None = None   # defaults to prediction_horizon // 2
    path_kind: str | None = None           # default by manifold
    sigma_min: float = 0.01
    base_sigma: float | None = None        # default by manifold
    solver: dict | None = None             # default by manifold
    epochs: int = 200
    batch_size: int = 128
    learning_rate: float = 1e-4
    ema_decay: float = 0.999
    context_window: int | None = None


@dataclass
class RolloutSection:
    num_steps: int = 200
    init_mode: str = "demo_starts"   # demo_starts | perturbed
    perturb_scale: float = 0.05
    history_len: int = 2


@dataclass
class EvalSection:
    pairing: str = "matched"


@dataclass
class FlowSection:
    num_samples: int = 8
    num_snapshots: int = 11


@dataclass
class AblationSection:
    horizons: list = field(default_factory=lambda: [2, 4, 8])
    execution_horizons: list | None = None


@dataclass
class RunConfig:
    seed: int = 0
    out_dir: str = "results/run"
    dataset: DatasetSection = field(default_factory=DatasetSection)
    policy: PolicySection = field(default_factory=PolicySection)
    rollout: RolloutSection = field(default_factory=RolloutSection)
    eval: EvalSection = field(default_factory=EvalSection)
    flow: FlowSection = field(default_factory=FlowSection)
    ablation: AblationSection = field(default_factory=AblationSection)


def _build_section(cls, value, path: str):
    if value is None:
        return cls()
    if not isinstance(value, dict):
        raise SchemaError(f"config section {path!r} must be an object")
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, val in value.items():
        if key not in names:
            raise SchemaError(f"unknown config key {path}.{key}")
        kwargs[key] = val
    return cls(**kwargs)


_SECTIONS = {
    "dataset": DatasetSection,
    "policy": PolicySection,
    "rollout": RolloutSection,
    "eval": EvalSection,
    "flow": FlowSection,
    "ablation": AblationSection,
}


def parse_run_config(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise SchemaError("config root must be a JSON object")
    cfg = RunConfig()
    for key, val in doc.items():
        if key == "seed":
            cfg.seed = int(val)
        elif key == "out_dir":
            cfg.out_dir = str(val)
        elif key in _SECTIONS:
            setattr(cfg, key, _build_section(_SECTIONS[key], val, key))
        else:
            raise SchemaError(f"unknown config key {key}")
    _validate_run_config(cfg)
    return cfg


def _validate_run_config(cfg: RunConfig) -> None:
    d = cfg.dataset
    if d.source not in ("synth", "csv"):
        raise SchemaError(f"dataset.source must be 'synth' or 'csv', got {d.source!r}")
    if d.shape not in LETTER_SHAPES:
        raise SchemaError(f"dataset.shape must be one of {LETTER_SHAPES}, got {d.shape!r}")
    if d.manifold not in ("euclidean", "sphere"):
        raise SchemaError(f"dataset.manifold must be 'euclidean' or 'sphere'")
    if len(d.split) != 3:
        raise SchemaError("dataset.split needs three fractions")
    if cfg.rollout.init_mode not in ("demo_starts", "perturbed"):
        raise SchemaError("rollout.init_mode must be 'demo_starts' or 'perturbed'")
    if cfg.eval.pairing not in ("matched", "nearest"):
        raise SchemaError("eval.pairing must be 'matched' or 'nearest'")


def load_run_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError:
        raise
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_run_config(doc)


def resolve_policy_config(cfg: RunConfig) -> PolicyConfig:
    """Materialize manifold-dependent defaults into a full PolicyConfig."""
    p = cfg.policy
    spherical = cfg.dataset.manifold == "sphere"
    path_kind = p.path_kind or ("geodesic" if spherical else "gaussian")
    base_sigma = p.base_sigma if p.base_sigma is not None else (0.5 if spherical else 1.0)
    if p.solver is not None:
        solver = solver_from_dict(p.solver)
    else:
        solver = GeodesicEuler(10) if spherical else Dopri5()
    t_e = p.execution_horizon
    if t_e is None:
        t_e = max(1, p.prediction_horizon // 2)
    return PolicyConfig(
        prediction_horizon=p.prediction_horizon,
        execution_horizon=t_e,
        path_kind=path_kind,
        sigma_min=p.sigma_min,
        base_sigma=base_sigma,
        solver=solver,
        epochs=p.epochs,
        batch_size=p.batch_size,
        learning_rate=p.learning_rate,
        ema_decay=p.ema_decay,
        seed=cfg.seed,
        context_window=p.context_window,
    )


def resolved_config_dict(cfg: RunConfig) -> dict:
    doc = dataclasses.asdict(cfg)
    doc["policy"] = resolve_policy_config(cfg).to_dict()
    return doc


def config_hash(cfg: RunConfig) -> str:
    doc = resolved_config_dict(cfg)
    doc.pop("out_dir", None)
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]


def _rng(seed: int, *tags: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, tags)]))


def _stamp(cfg: RunConfig) -> list[str]:
    return [f"config_hash={config_hash(cfg)}", f"seed={cfg.seed}"]


# ---------------------------------------------------------------------------
# commands

def cmd_synth(cfg: RunConfig, out_dir: Path) -> Path:
    """Synthesize, normalize, optionally sphere-project, split, and save."""
    rng = _rng(cfg.seed, 10)
    d = cfg.dataset
    dataset = synthesize_letter(d.shape, d.num_demos, d.timesteps, d.noise_scale, rng)
    dataset = normalize(dataset)
    if d.manifold == "sphere":
        dataset = project_to_sphere(dataset, d.tangent_radius)
    dataset = split_dataset(dataset, d.split, _rng(cfg.seed, 11))
    out = save_dataset(
        dataset, out_dir / "dataset.csv", comments=_stamp(cfg),
        manifest_extra={"config_hash": config_hash(cfg), "seed": cfg.seed,
                        "shape": d.shape, "source": "synth"})
    logger.info("wrote %s (%d demos x %d steps on %s)", out, dataset.num_demos,
                dataset.timesteps, d.manifold)
    return out


def _resolve_dataset_path(cfg: RunConfig, flag_value: str | None) -> Path:
    path = flag_value or cfg.dataset.path
    if path is None:
        raise SchemaError("no dataset path: set dataset.path or pass --dataset")
    return Path(path)


def _load_prepared_dataset(cfg: RunConfig, path: Path) -> Dataset:
    """Load a prepared dataset; raw CSVs are prepared per the config first."""
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    manifest = path.with_name(path.stem + ".manifest.json")
    if manifest.exists():
        return load_dataset(path)
    dataset = normalize(load_csv(path))
    if cfg.dataset.manifold == "sphere":
        dataset = project_to_sphere(dataset, cfg.dataset.tangent_radius)
    return split_dataset(dataset, cfg.dataset.split, _rng(cfg.seed, 11))


def cmd_train(cfg: RunConfig, out_dir: Path, dataset_path: Path,
              resume: Path | None = None) -> Path:
    dataset = _load_prepared_dataset(cfg, dataset_path)
    pconfig = resolve_policy_config(cfg)
    previous = None
    if resume is not None:
        previous = checkpoint_to_policy(load_checkpoint(resume))
        pconfig = dataclasses.replace(previous.config, epochs=pconfig.epochs)
    tic = time.perf_counter()
    policy = train(dataset, pconfig, resume_from=previous)
    train_seconds = time.perf_counter() - tic
    ckpt_path = out_dir / "checkpoint.json"
    out_dir.mkdir(parents=True, exist_ok=True)
    save_checkpoint(ckpt_path, policy_to_checkpoint(
        policy, extra={"config_hash": config_hash(cfg),
                       "dataset_file": str(dataset_path)}))
    log_path = out_dir / "training_log.csv"
    with log_path.open("w", newline="", encoding="utf-8") as fh:
        for line in _stamp(cfg):
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_loss", "val_loss", "elapsed_seconds"])
        for row in policy.log:
            writer.writerow([row["epoch"], repr(row["train_loss"]),
                             repr(row["val_loss"]), repr(row["elapsed_seconds"])])
    logger.info("trained %d epochs in %.1fs; best val %.5f at epoch %d",
                policy.epochs_done, train_seconds, policy.best_val_loss,
                policy.best_epoch)
    return ckpt_path


def _load_policy(checkpoint_path: Path) -> TrainedPolicy:
    if not checkpoint_path.exists():
        raise FileNotFoundError(f"checkpoint not found: {checkpoint_path}")
    return checkpoint_to_policy(load_checkpoint(checkpoint_path))


def cmd_rollout(cfg: RunConfig, out_dir: Path, checkpoint_path: Path,
                dataset_path: Path) -> list[Path]:
    policy = _load_policy(checkpoint_path)
    dataset = _load_prepared_dataset(cfg, dataset_path)
    r = cfg.rollout
    rng = _rng(cfg.seed, 12)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    statuses = []
    for i, demo in enumerate(dataset.demos):
        history = [demo.points[k].copy() for k in range(r.history_len)]
        if r.init_mode == "perturbed":
            history = perturb_history(history, r.perturb_scale, policy.manifold, rng)
        tic = time.perf_counter()
        try:
            traj = rollout(policy, history, r.num_steps, rng)
            status = "ok"
        except NumericalError as exc:
            logger.warning("rollout %d failed: %s", i, exc)
            statuses.append({"rollout": i, "status": f"error: {exc}"})
            continue
        seconds = time.perf_counter() - tic
        path = out_dir / f"rollout_{i:03d}.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            for line in _stamp(cfg):
                fh.write(f"# {line}\n")
            writer = csv.writer(fh)
            writer.writerow(["t"] + [f"x{j}" for j in range(dataset.dim)])
            for t, point in enumerate(traj):
                writer.writerow([t] + [repr(float(v)) for v in point])
        written.append(path)
        statuses.append({"rollout": i, "status": "ok", "file": path.name,
                         "init_demo": demo.id, "seconds": seconds})
    manifest = {
        "schema": "flowpolicy.rollouts",
        "version": 1,
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        "init_mode": r.init_mode,
        "perturb_scale": r.perturb_scale if r.init_mode == "perturbed" else 0.0,
        "num_steps": r.num_steps,
        "history_len": r.history_len,
        "checkpoint": str(checkpoint_path),
        "rollouts": statuses,
        "created_at": _now(),
    }
    (out_dir / "rollouts.manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    logger.info("wrote %d rollouts to %s", len(written), out_dir)
    return written


def _now() -> str:
    import datetime as _dt

    return _dt.datetime.now(_dt.timezone.utc).isoformat()


def _read_rollout_csvs(rollout_dir: Path) -> list[np.ndarray]:
    files = sorted(rollout_dir.glob("rollout_*.csv"))
    if not files:
        raise FileNotFoundError(f"no rollout_*.csv files in {rollout_dir}")
    out = []
    for f in files:
        rows = []
        with f.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = None
            for row in reader:
                if not row or row[0].lstrip().startswith("#"):
                    continue
                if header is None:
                    header = row
                    continue
                rows.append([float(v) for v in row[1:]])
        if not rows:
            raise SchemaError(f"{f}: empty rollout file")
        out.append(np.asarray(rows))
    return out


def cmd_eval(cfg: RunConfig, out_dir: Path, dataset_path: Path,
             rollout_dir: Path) -> Path:
    dataset = _load_prepared_dataset(cfg, dataset_path)
    rollouts = _read_rollout_csvs(rollout_dir)
    if rollouts[0].shape[1] != dataset.dim:
        raise SchemaError(
            f"rollout width {rollouts[0].shape[1]} does not match dataset "
            f"manifold width {dataset.dim}"
        )
    demos = [d.points for d in dataset.demos]
    report = evaluate_rollouts(
        demos, rollouts, dataset.manifold, pairing=cfg.eval.pairing,
        metadata={"config_hash": config_hash(cfg), "seed": cfg.seed,
                  "dataset_file": str(dataset_path),
                  "rollout_dir": str(rollout_dir)})
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = write_report_csv(report, out_dir / "metrics.csv")
    write_report_summary(report, out_dir / "metrics_summary.json")
    logger.info("dtwd %.4f +- %.4f | jerkiness %.4g +- %.4g",
                report.dtwd_mean, report.dtwd_std, report.jerk_mean,
                report.jerk_std)
    return csv_path


def cmd_flow(cfg: RunConfig, out_dir: Path, checkpoint_path: Path,
             dataset_path: Path) -> Path:
    policy = _load_policy(checkpoint_path)
    dataset = _load_prepared_dataset(cfg, dataset_path)
    rng = _rng(cfg.seed, 13)
    f = cfg.flow
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "flow_trace.csv"
    with path.open("w", newline="", encoding="utf-8") as fh:
        for line in _stamp(cfg):
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(["sample", "t", "horizon_step"]
                        + [f"x{j}" for j in range(dataset.dim)])
        for s in range(f.num_samples):
            pair = sample_training_pair(dataset, "train",
                                        policy.config.prediction_horizon, rng,
                                        policy.config.context_window)
            obs = pair.observation
            base = policy.manifold.sample_base(rng, policy.config.base_sigma)
            a0 = np.repeat(base[None, :], policy.config.prediction_horizon, axis=0)
            o_flat = obs.flat()
            net = policy.ema_net

            def fieldfn(t, a):
                x = np.concatenate([[t], a.reshape(-1), o_flat])
                return tangent_head(net.forward(x), a, policy.manifold)

            snapshots = trace_flow(fieldfn, a0, policy.config.solver,
                                   policy.manifold, f.num_snapshots)
            for t, horizon in snapshots:
                for h, point in enumerate(horizon):
                    writer.writerow([s, repr(float(t)), h]
                                    + [repr(float(v)) for v in point])
    logger.info("wrote flow trace for %d samples to %s", f.num_samples, path)
    return path


def cmd_ablate_horizon(cfg: RunConfig, out_dir: Path, dataset_path: Path,
                       horizons: list[int] | None = None) -> Path:
    a = cfg.ablation
    horizons = horizons if horizons is not None else [int(h) for h in a.horizons]
    if a.execution_horizons is not None:
        if len(a.execution_horizons) != len(horizons):
            raise SchemaError("ablation.execution_horizons must match horizons")
        exec_horizons = [int(h) for h in a.execution_horizons]
    else:
        for h in horizons:
            if h % 2 != 0:
                raise SchemaError(
                    f"horizon {h} is odd: give ablation.execution_horizons explicitly"
                )
        exec_horizons = [h // 2 for h in horizons]
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for t_a, t_e in zip(horizons, exec_horizons):
        cell_dir = out_dir / f"Ta_{t_a}"
        cell_cfg = dataclasses.replace(cfg)
        cell_cfg.policy = dataclasses.replace(
            cfg.policy, prediction_horizon=t_a, execution_horizon=t_e)
        tic = time.perf_counter()
        try:
            ckpt = cmd_train(cell_cfg, cell_dir, dataset_path)
            cmd_rollout(cell_cfg, cell_dir / "rollouts", ckpt, dataset_path)
            metrics_csv = cmd_eval(cell_cfg, cell_dir, dataset_path,
                                   cell_dir / "rollouts")
            summary = json.loads(
                (cell_dir / "metrics_summary.json").read_text(encoding="utf-8"))
            rows.append({
                "prediction_horizon": t_a, "execution_horizon": t_e,
                "status": "ok",
                "dtwd_mean": summary["dtwd_mean"], "dtwd_std": summary["dtwd_std"],
                "jerk_mean": summary["jerk_mean"], "jerk_std": summary["jerk_std"],
                "wall_seconds": time.perf_counter() - tic,
            })
        except (NumericalError, SchemaError, OSError) as exc:
            logger.warning("ablation cell T_a=%d failed: %s", t_a, exc)
            rows.append({"prediction_horizon": t_a, "execution_horizon": t_e,
                         "status": f"error: {exc}", "dtwd_mean": "", "dtwd_std": "",
                         "jerk_mean": "", "jerk_std": "",
                         "wall_seconds": time.perf_counter() - tic})
    path = out_dir / "ablation_summary.csv"
    with path.open("w", newline="", encoding="utf-8") as fh:
        for line in _stamp(cfg):
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        cols = ["prediction_horizon", "execution_horizon", "status", "dtwd_mean",
                "dtwd_std", "jerk_mean", "jerk_std", "wall_seconds"]
        writer.writerow(cols)
        for row in rows:
            writer.writerow([row[c] if not isinstance(row[c], float) else repr(row[c])
                             for c in cols])
    logger.info("ablation summary at %s", path)
    return path


# ---------------------------------------------------------------------------
# argument parsing

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowpolicy",
        description="Flow-matching policies on Euclidean and spherical spaces")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON experiment config")
        p.add_argument("--seed", type=int, help="override config seed")
        p.add_argument("--out", help="override config out_dir")

    p = sub.add_parser("synth", help="synthesize a letter dataset")
    common(p)
    p.add_argument("--shape", choices=LETTER_SHAPES, help="override dataset shape")

    p = sub.add_parser("train", help="train a policy on a dataset")
    common(p)
    p.add_argument("--dataset", help="prepared dataset CSV")
    p.add_argument("--resume", help="checkpoint to continue from")

    p = sub.add_parser("rollout", help="run receding-horizon rollouts")
    common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--dataset", help="prepared dataset CSV")
    p.add_argument("--init-mode", choices=("demo_starts", "perturbed"))
    p.add_argument("--perturb-scale", type=float)
    p.add_argument("--num-steps", type=int)

    p = sub.add_parser("eval", help="score rollouts against demonstrations")
    common(p)
    p.add_argument("--dataset", help="prepared dataset CSV")
    p.add_argument("--rollouts", required=True, help="directory of rollout CSVs")
    p.add_argument("--pairing", choices=("matched", "nearest"))

    p = sub.add_parser("flow", help="trace flows for plotting")
    common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--dataset", help="prepared dataset CSV")
    p.add_argument("--num-samples", type=int)
    p.add_argument("--num-snapshots", type=int)

    p = sub.add_parser("ablate-horizon", help="train/eval across horizons")
    common(p)
    p.add_argument("--dataset", help="prepared dataset CSV")
    p.add_argument("--horizons", help="comma-separated list, e.g. 2,4,8")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("FLOWPOLICY_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_run_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.out is not None:
            cfg.out_dir = args.out
        if getattr(args, "shape", None) is not None:
            cfg.dataset.shape = args.shape
        if getattr(args, "init_mode", None) is not None:
            cfg.rollout.init_mode = args.init_mode
        if getattr(args, "perturb_scale", None) is not None:
            cfg.rollout.perturb_scale = args.perturb_scale
        if getattr(args, "num_steps", None) is not None:
            cfg.rollout.num_steps = args.num_steps
        if getattr(args, "pairing", None) is not None:
            cfg.eval.pairing = args.pairing
        if getattr(args, "num_samples", None) is not None:
            cfg.flow.num_samples = args.num_samples
        if getattr(args, "num_snapshots", None) is not None:
            cfg.flow.num_snapshots = args.num_snapshots
        out_dir = Path(cfg.out_dir)
        if args.command == "synth":
            cmd_synth(cfg, out_dir)
        elif args.command == "train":
            dataset = _resolve_dataset_path(cfg, args.dataset)
            resume = Path(args.resume) if args.resume else None
            cmd_train(cfg, out_dir, dataset, resume=resume)
        elif args.command == "rollout":
            dataset = _resolve_dataset_path(cfg, args.dataset)
            cmd_rollout(cfg, out_dir, Path(args.checkpoint), dataset)
        elif args.command == "eval":
            dataset = _resolve_dataset_path(cfg, args.dataset)
            cmd_eval(cfg, out_dir, dataset, Path(args.rollouts))
        elif args.command == "flow":
            dataset = _resolve_dataset_path(cfg, args.dataset)
            cmd_flow(cfg, out_dir, Path(args.checkpoint), dataset)
        elif args.command == "ablate-horizon":
            dataset = _resolve_dataset_path(cfg, args.dataset)
            horizons = None
            if args.horizons:
                horizons = [int(h) for h in args.horizons.split(",") if h]
            cmd_ablate_horizon(cfg, out_dir, dataset, horizons)
        else:  # pragma: no cover
            parser.error(f"unknown command {args.command}")
    except SchemaError as exc:
        logger.error("schema error: %s", exc)
        print(f"flowpolicy: schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (FileNotFoundError, OSError) as exc:
        print(f"flowpolicy: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(f"flowpolicy: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def entry() -> None:  # console-script wrapper
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
