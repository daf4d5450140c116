"""Losses, optimizers, finite-difference gradient checking and the full-batch training loop.

Randomness everywhere in the package goes through ``numpy.random.default_rng``
(PCG64), seeded explicitly, so runs are reproducible across platforms.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .module import LinearDecoder, Module

logger = logging.getLogger(__name__)


class DivergenceError(FloatingPointError):
    def __init__(self, step: int, loss: float):
        super().__init__(f"loss became non-finite ({loss}) at step {step}")
        self.step = step
        self.loss = loss


class NonFiniteGradientError(FloatingPointError):
    def __init__(self, name: str):
        super().__init__(f"non-finite gradient entries in parameter {name!r}")
        self.name = name


def mse_loss(pred, target) -> tuple[float, np.ndarray]:
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    if pred.shape != target.shape:
        raise ValueError(f"prediction shape {pred.shape} does not match target {target.shape}")
    if pred.size == 0:
        raise ValueError("mse_loss needs at least one element")
    diff = pred - target
    return float(np.mean(diff**2)), 2.0 * diff / diff.size


class Model(Module):
    """A time encoder followed by a linear decoder to one scalar per time point."""

    def __init__(self, encoder: Module, decoder: LinearDecoder | None = None, rng=None):
        self.encoder = encoder
        self.decoder = decoder if decoder is not None else LinearDecoder(encoder.dim, rng=rng)

    def parameters(self):
        params = {f"enc.{k}": v for k, v in self.encoder.parameters().items()}
        params.update({f"dec.{k}": v for k, v in self.decoder.parameters().items()})
        return params

    def parameter_masks(self):
        return {f"enc.{k}": v for k, v in parameter_masks(self.encoder).items()}

    @property
    def frozen(self) -> set[str]:
        return {f"enc.{k}" for k in getattr(self.encoder, "frozen", ())}

    def forward_cached(self, t):
        h, enc_cache = self.encoder.forward_cached(t)
        y, dec_cache = self.decoder.forward_cached(h)
        return y, (enc_cache, dec_cache)

    def backward(self, cache, upstream):
        enc_cache, dec_cache = cache
        dec_grads = self.decoder.backward(dec_cache, upstream)
        g_h = dec_grads.pop("input")
        grads = {f"enc.{k}": v for k, v in self.encoder.backward(enc_cache, g_h).items()}
        grads.update({f"dec.{k}": v for k, v in dec_grads.items()})
        return grads

    def value_and_grad(self, t, y) -> tuple[float, dict[str, np.ndarray]]:
        pred, cache = self.forward_cached(t)
        loss, g = mse_loss(pred, y)
        return loss, self.backward(cache, g)

    def loss(self, t, y) -> float:
        return mse_loss(self(t), y)[0]


def parameter_masks(module) -> dict[str, np.ndarray]:
    """Structural masks (1 = free entry) for parameters with fixed-zero patterns."""
    masks = {}
    fourier = getattr(module, "fourier", None)
    if fourier is not None and fourier.diagonal_only:
        masks["fourier.w_cos"] = fourier.mask()
        masks["fourier.w_sin"] = fourier.mask()
    spline = getattr(module, "spline", None)
    if spline is not None and spline.dense_mix is not None:
        masks["spline.dense_mix"] = spline.mix_mask()
    return masks


@dataclass
class TrainConfig:
    steps: int = 5000
    learning_rate: float = 1e-2
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    full_batch: bool = True

    def __post_init__(self):
        if self.steps < 0:
            raise ValueError("steps must be non-negative")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


@dataclass
class AdamState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0


def _check_finite(grads):
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradientError(name)


def adam_step(params: dict, grads: dict, state: AdamState, cfg: TrainConfig) -> AdamState:
    """In-place Adam update with bias correction for every key present in ``grads``."""
    _check_finite(grads)
    state.step += 1
    b1, b2 = cfg.beta1, cfg.beta2
    c1 = 1.0 - b1**state.step
    c2 = 1.0 - b2**state.step
    for name, g in grads.items():
        p = params[name]
        m = state.m.setdefault(name, np.zeros_like(p))
        v = state.v.setdefault(name, np.zeros_like(p))
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= cfg.learning_rate * (m / c1) / (np.sqrt(v / c2) + cfg.eps)
    return state


def sgd_step(params: dict, grads: dict, cfg: TrainConfig) -> None:
    _check_finite(grads)
    for name, g in grads.items():
        params[name] -= cfg.learning_rate * g


def _loss_of(model, batch) -> float:
    t, y = batch
    return mse_loss(model(t), y)[0]


def grad_check_report(model: Model, input_batch, h: float = 1e-5) -> dict[str, tuple[float, tuple]]:
    """Per-parameter worst relative error and its index.

    Relative error is ``|analytic - numeric| / max(1, |analytic|, |numeric|)`` with
    central differences of the MSE loss. Entries fixed at zero by a structural
    mask (diagonal Fourier weights, dense-mix diagonal) are skipped.
    """
    if not 1e-7 <= h <= 1e-3:
        raise ValueError(f"step h must lie in [1e-7, 1e-3], got {h}")
    t, y = input_batch
    _, analytic = model.value_and_grad(t, y)
    masks = model.parameter_masks()
    report = {}
    for name, p in model.parameters().items():
        mask = masks.get(name)
        worst, worst_idx = 0.0, ()
        for idx in np.ndindex(p.shape):
            if mask is not None and mask[idx] == 0:
                continue
            orig = p[idx]
            p[idx] = orig + h
            up = _loss_of(model, input_batch)
            p[idx] = orig - h
            down = _loss_of(model, input_batch)
            p[idx] = orig
            numeric = (up - down) / (2.0 * h)
            a = analytic[name][idx]
            err = abs(a - numeric) / max(1.0, abs(a), abs(numeric))
            if err > worst:
                worst, worst_idx = float(err), tuple(int(i) for i in idx)
        report[name] = (worst, worst_idx)
    return report


def grad_check(model: Model, input_batch, h: float = 1e-5) -> float:
    """Largest relative analytic-vs-numeric gradient error over all parameters."""
    report = grad_check_report(model, input_batch, h)
    name, (err, idx) = max(report.items(), key=lambda kv: kv[1][0])
    if err > 1e-4:
        logger.warning("gradient mismatch in %s%s: relative error %.3g", name, list(idx), err)
    return err


@dataclass
class TrainReport:
    loss_curve: list[float]
    final_loss: float
    wall_time: float
    seed: int

    def to_dict(self) -> dict:
        return {
            "loss_curve": self.loss_curve,
            "final_loss": self.final_loss,
            "wall_time": self.wall_time,
            "seed": self.seed,
        }


def train_fit(model: Module, dataset, decoder: LinearDecoder | None, cfg: TrainConfig) -> TrainReport:
    """Full-batch minimisation of the MSE of ``decoder(model(t))`` against ``y``.

    ``model`` may already be a :class:`Model`, in which case ``decoder`` must be
    ``None``. Parameters are updated in place; names listed in the encoder's
    ``frozen`` set are left untouched.
    """
    t, y = (np.asarray(a, dtype=float) for a in dataset)
    if t.size == 0 or t.shape != y.shape:
        raise ValueError("dataset must be two equal-length, non-empty arrays")
    if isinstance(model, Model):
        if decoder is not None:
            raise ValueError("pass either a Model or an encoder plus decoder, not both")
        full = model
    else:
        full = Model(model, decoder if decoder is not None else LinearDecoder(model.dim, rng=cfg.seed))
    params = full.parameters()
    trainable = [k for k in params if k not in full.frozen]
    state = AdamState()
    curve: list[float] = []
    start = time.perf_counter()
    for step in range(cfg.steps):
        loss, grads = full.value_and_grad(t, y)
        if not np.isfinite(loss):
            raise DivergenceError(step, loss)
        curve.append(loss)
        grads = {k: grads[k] for k in trainable}
        if cfg.optimizer == "adam":
            adam_step(params, grads, state, cfg)
        else:
            sgd_step(params, grads, cfg)
    final = full.loss(t, y)
    if not np.isfinite(final):
        raise DivergenceError(cfg.steps, final)
    return TrainReport(curve, final, time.perf_counter() - start, cfg.seed)
