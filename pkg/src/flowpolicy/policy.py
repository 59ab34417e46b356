"""Receding-horizon flow-matching policy: training and inference.

Training (per batch element): draw t ~ U[0,1], a data horizon a1 with its
observation o, and a base draw repeated along the horizon as a0; sample the
conditional path at t; regress the network output, projected onto the
tangent spaces at the path point, onto the path velocity. One epoch is one
shuffled pass over the training (demo, tau) pairs; context indices, times,
and base draws are redrawn on every visit.

Inference: draw one base point, repeat it along the horizon, integrate the
learned field conditioned on the observation from t=0 to 1, and hand the
first T_e actions to the executor.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .data import Dataset, ObservationVector, draw_context, gather_batch
from .errors import NumericalError
from .manifolds import Euclidean, Manifold, manifold_from_dict, manifold_to_dict
from .net import MLP, AdamEma, mlp_from_dict, mlp_to_dict, tangent_head
from .paths import sample_gaussian_path, sample_geodesic_path
from .solvers import (Dopri5, GeodesicEuler, SolverConfig, integrate_flow,
                      solver_from_dict, solver_to_dict)

logger = logging.getLogger("flowpolicy")

HIDDEN_WIDTH = 64
NUM_LAYERS = 5

PATH_KINDS = ("geodesic", "gaussian")


@dataclass(frozen=True)
class PolicyConfig:
    prediction_horizon: int = 8
    execution_horizon: int = 4
    path_kind: str = "geodesic"
    sigma_min: float = 0.01
    base_sigma: float = 1.0
    solver: SolverConfig = field(default_factory=GeodesicEuler)
    epochs: int = 200
    batch_size: int = 128
    learning_rate: float = 1e-4
    ema_decay: float = 0.999
    seed: int = 0
    context_window: int | None = None

    def __post_init__(self):
        if not 1 <= self.execution_horizon <= self.prediction_horizon:
            raise ValueError("need 1 <= execution_horizon <= prediction_horizon")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.path_kind not in PATH_KINDS:
            raise ValueError(f"path_kind must be one of {PATH_KINDS}")
        if not 0.0 <= self.sigma_min < 1.0:
            raise ValueError("sigma_min must lie in [0, 1)")
        if self.base_sigma <= 0:
            raise ValueError("base_sigma must be positive")
        if self.context_window is not None and self.context_window < 2:
            raise ValueError("context_window must be >= 2")

    def to_dict(self) -> dict:
        return {
            "prediction_horizon": self.prediction_horizon,
            "execution_horizon": self.execution_horizon,
            "path_kind": self.path_kind,
            "sigma_min": self.sigma_min,
            "base_sigma": self.base_sigma,
            "solver": solver_to_dict(self.solver),
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "ema_decay": self.ema_decay,
            "seed": self.seed,
            "context_window": self.context_window,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PolicyConfig":
        d = dict(d)
        d["solver"] = solver_from_dict(d["solver"])
        window = d.get("context_window")
        d["context_window"] = None if window is None else int(window)
        return cls(**d)


@dataclass
class TrainedPolicy:
    """Best-validation network snapshot plus everything needed to run and
    resume it. ``net``/``ema_params`` are the inference weights; ``final_*``
    and ``opt_state`` carry the end-of-training state for resumption."""

    net: MLP
    ema_params: list[np.ndarray]
    config: PolicyConfig
    manifold: Manifold
    dataset_meta: dict
    log: list[dict]
    best_epoch: int
    best_val_loss: float
    epochs_done: int
    final_net: MLP
    opt_state: dict

    _ema_net: MLP | None = None

    @property
    def ema_net(self) -> MLP:
        if self._ema_net is None:
            net = self.net.clone()
            net.set_params(self.ema_params)
            self._ema_net = net
        return self._ema_net


def _rng(seed: int, *tags: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, tags)]))


def _sample_path(a0, a1, t, manifold, config: PolicyConfig):
    if config.path_kind == "gaussian":
        return sample_gaussian_path(a0, a1, t, config.sigma_min)
    return sample_geodesic_path(a0, a1, t, manifold)


def _batch_inputs(t, point, reference, context, gap) -> np.ndarray:
    b = len(t)
    return np.concatenate([
        t[:, None],
        point.reshape(b, -1),
        reference,
        context,
        gap[:, None],
    ], axis=1)


def _draw_batch(dataset: Dataset, rows: np.ndarray, rng, manifold, config):
    """Fresh (c, t, a0) draws for the given (demo_id, tau) rows, then the
    assembled path sample and network inputs. Draw order is fixed:
    contexts, times, base points."""
    b = len(rows)
    contexts = draw_context(rows[:, 1], rng, config.context_window)
    t = rng.random(b)
    base = manifold.sample_base(rng, config.base_sigma, size=b)
    a0 = np.repeat(base[:, None, :], config.prediction_horizon, axis=1)
    actions, reference, context, gap = gather_batch(
        dataset, rows, contexts, config.prediction_horizon)
    path = _sample_path(a0, actions, t, manifold, config)
    x = _batch_inputs(t, path.point, reference, context, gap)
    return x, path


def train(dataset: Dataset, config: PolicyConfig,
          resume_from: "TrainedPolicy | None" = None) -> TrainedPolicy:
    """Run the training loop and return the best-validation policy.

    Validation uses a frozen set of (pair, context, t, base) draws from a
    dedicated stream so the per-epoch validation loss, and therefore the
    selected model, is deterministic for a given seed.
    """
    if dataset.split is None:
        raise ValueError("dataset has no train/val/test split")
    manifold = dataset.manifold
    if config.path_kind == "gaussian" and not isinstance(manifold, Euclidean):
        raise ValueError("the gaussian path is only valid on Euclidean manifolds")
    if isinstance(config.solver, Dopri5) and not isinstance(manifold, Euclidean):
        raise ValueError("Dopri5 inference requires a Euclidean manifold")
    if dataset.timesteps < config.prediction_horizon + 2:
        raise ValueError("demos must contain at least prediction_horizon + 2 points")
    train_rows = dataset.split.train
    if len(train_rows) == 0:
        raise ValueError("training split is empty")

    dim = manifold.ambient_dim
    t_a = config.prediction_horizon
    input_dim = 1 + t_a * dim + 2 * dim + 1
    output_dim = t_a * dim

    if resume_from is None:
        net = MLP(input_dim, output_dim, HIDDEN_WIDTH, NUM_LAYERS,
                  rng=_rng(config.seed, 0))
        opt = AdamEma(net.params(), learning_rate=config.learning_rate,
                      ema_decay=config.ema_decay)
        start_epoch = 1
        best_val = np.inf
        best_epoch = 0
        best_params = [p.copy() for p in net.params()]
        best_ema = [p.copy() for p in opt.ema]
        logger.info("vector field net: %d parameters (%d -> %s -> %d)",
                    net.num_params, input_dim,
                    "x".join([str(HIDDEN_WIDTH)] * (NUM_LAYERS - 1)), output_dim)
    else:
        net = resume_from.final_net.clone()
        opt = AdamEma.from_state_dict(resume_from.opt_state)
        start_epoch = resume_from.epochs_done + 1
        best_val = resume_from.best_val_loss
        best_epoch = resume_from.best_epoch
        best_params = [p.copy() for p in resume_from.net.params()]
        best_ema = [p.copy() for p in resume_from.ema_params]

    # frozen validation draws
    val_rows = dataset.split.val
    val_x = val_target = None
    if len(val_rows) > 0:
        val_rng = _rng(config.seed, 1)
        val_x, val_path = _draw_batch(dataset, val_rows, val_rng, manifold, config)
        val_target = val_path.target

    log: list[dict] = list(resume_from.log) if resume_from is not None else []
    params = net.params()
    loss_history: list[float] = []

    val_point = None
    if val_x is not None:
        # the path points sit inside the frozen input block after the time column
        val_point = val_x[:, 1:1 + t_a * dim].reshape(len(val_rows), t_a, dim)

    def evaluate_val() -> float:
        if val_x is None:
            return float("nan")
        out = net.forward(val_x)
        v_pred = tangent_head(out, val_point, manifold)
        r = v_pred - val_target
        return float(np.mean(np.sum(r * r, axis=(1, 2))))

    for epoch in range(start_epoch, config.epochs + 1):
        tic = time.perf_counter()
        rng_e = _rng(config.seed, 2, epoch)
        order = rng_e.permutation(len(train_rows))
        epoch_loss = 0.0
        for lo in range(0, len(order), config.batch_size):
            rows = train_rows[order[lo:lo + config.batch_size]]
            x, path = _draw_batch(dataset, rows, rng_e, manifold, config)
            out, cache = net.forward_cached(x)
            v_pred = tangent_head(out, path.point, manifold)
            resid = v_pred - path.target
            batch_loss = float(np.mean(np.sum(resid * resid, axis=(1, 2))))
            if not np.isfinite(batch_loss):
                raise NumericalError(
                    f"non-finite training loss at epoch {epoch}, batch {lo // config.batch_size}; "
                    f"recent losses: {loss_history[-5:]}"
                )
            loss_history.append(batch_loss)
            dout = manifold.to_tangent(2.0 * resid / len(rows), path.point)
            grads = net.backward(cache, dout.reshape(len(rows), -1))
            opt.step(params, net.grads_as_list(grads))
            epoch_loss += batch_loss * len(rows)
        epoch_loss /= len(train_rows)
        val = evaluate_val()
        if np.isnan(val):
            val = epoch_loss
        elapsed = time.perf_counter() - tic
        log.append({"epoch": epoch, "train_loss": epoch_loss, "val_loss": val,
                    "elapsed_seconds": elapsed})
        if val < best_val:
            best_val = val
            best_epoch = epoch
            best_params = [p.copy() for p in params]
            best_ema = [p.copy() for p in opt.ema]
        if epoch == start_epoch or epoch % 50 == 0:
            logger.info("epoch %d: train %.5f val %.5f (%.2fs)",
                        epoch, epoch_loss, val, elapsed)

    best_net = net.clone()
    best_net.set_params(best_params)
    return TrainedPolicy(
        net=best_net,
        ema_params=best_ema,
        config=config,
        manifold=manifold,
        dataset_meta={
            "manifold": manifold_to_dict(manifold),
            "timesteps": dataset.timesteps,
            "num_demos": dataset.num_demos,
            "normalization": None if dataset.normalization is None
            else dataset.normalization.to_dict(),
        },
        log=log,
        best_epoch=best_epoch,
        best_val_loss=best_val,
        epochs_done=config.epochs,
        final_net=net,
        opt_state=opt.state_dict(),
    )


def infer_action(policy: TrainedPolicy, observation: ObservationVector,
                 rng: np.random.Generator) -> np.ndarray:
    """Sample one action horizon: integrate the learned field from a
    repeated base draw, conditioned on the observation. Uses EMA weights."""
    cfg = policy.config
    manifold = policy.manifold
    base = manifold.sample_base(rng, cfg.base_sigma)
    a0 = np.repeat(base[None, :], cfg.prediction_horizon, axis=0)
    o_flat = observation.flat()
    net = policy.ema_net

    def fieldfn(t, a):
        x = np.concatenate([[t], a.reshape(-1), o_flat])
        out = net.forward(x)
        return tangent_head(out, a, manifold)

    return integrate_flow(fieldfn, a0, cfg.solver, manifold)


def rollout(policy: TrainedPolicy, initial_history, num_steps: int,
            rng: np.random.Generator) -> np.ndarray:
    """Receding-horizon execution: take the first T_e actions of each
    inferred horizon, refresh the observation from the executed history,
    repeat until num_steps actions are emitted.

    The context index is drawn uniformly over the executed history (minus
    the reference), clipped to the configured window when one is set. The
    gap is normalized by the training demo length and saturates at 1 once
    the history outgrows it.
    """
    history = [np.asarray(p, dtype=float) for p in initial_history]
    if len(history) < 2:
        raise ValueError("initial_history needs at least 2 points")
    if num_steps < 1:
        raise ValueError("num_steps must be >= 1")
    cfg = policy.config
    t_m = int(policy.dataset_meta["timesteps"])
    executed: list[np.ndarray] = []
    while len(executed) < num_steps:
        h = len(history)
        lo = 1 if cfg.context_window is None else max(1, h + 1 - cfg.context_window)
        c = int(rng.integers(lo, h))  # c in {lo, ..., h-1}
        gap = min(1.0, (h + 1 - c) / t_m)
        obs = ObservationVector(reference=history[-1], context=history[c - 1], gap=gap)
        horizon = infer_action(policy, obs, rng)
        take = min(cfg.execution_horizon, num_steps - len(executed))
        for k in range(take):
            history.append(horizon[k])
            executed.append(horizon[k])
    return np.asarray(executed)


def perturb_history(history, scale: float, manifold: Manifold,
                    rng: np.random.Generator) -> list[np.ndarray]:
    """Displace each history point by tangent Gaussian noise of the given
    scale (per-axis std in the tangent space), staying on the manifold."""
    out = []
    for p in history:
        p = np.asarray(p, dtype=float)
        z = rng.standard_normal(manifold.ambient_dim)
        u = manifold.to_tangent(z, p)
        out.append(manifold.to_manifold(manifold.exp(p, scale * u)))
    return out


# ---------------------------------------------------------------------------
# checkpoint packing

def policy_to_checkpoint(policy: TrainedPolicy, extra: dict | None = None) -> dict:
    payload = {
        "net": mlp_to_dict(policy.net),
        "ema_params": [p.tolist() for p in policy.ema_params],
        "final_net": mlp_to_dict(policy.final_net),
        "opt_state": policy.opt_state,
        "config": policy.config.to_dict(),
        "manifold": manifold_to_dict(policy.manifold),
        "dataset_meta": policy.dataset_meta,
        "best_epoch": policy.best_epoch,
        "best_val_loss": policy.best_val_loss,
        "epochs_done": policy.epochs_done,
        "param_count": policy.net.num_params,
        "seed": policy.config.seed,
    }
    payload.update(extra or {})
    return payload


def checkpoint_to_policy(doc: dict) -> TrainedPolicy:
    net = mlp_from_dict(doc["net"])
    return TrainedPolicy(
        net=net,
        ema_params=[np.asarray(p, dtype=float) for p in doc["ema_params"]],
        config=PolicyConfig.from_dict(doc["config"]),
        manifold=manifold_from_dict(doc["manifold"]),
        dataset_meta=doc["dataset_meta"],
        log=[],
        best_epoch=int(doc["best_epoch"]),
        best_val_loss=float(doc["best_val_loss"]),
        epochs_done=int(doc["epochs_done"]),
        final_net=mlp_from_dict(doc["final_net"]),
        opt_state=doc["opt_state"],
    )
