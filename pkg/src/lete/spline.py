"""Tanh-plus-B-spline transfer layer.

Each output dimension is ``base_weight[i] * tanh(x_i) + sum_j coeffs[i, j] B_j(x_i)``.
An optional ``dense_mix`` tensor adds cross-dimension spline terms
``sum_{k != i} sum_j dense_mix[i, k, j] B_j(x_k)``; its diagonal is held at zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bspline import KnotVector, basis_eval, basis_eval_with_dx, make_uniform_knots


@dataclass
class SplineLayerParams:
    kv: KnotVector
    coeffs: np.ndarray
    base_weight: np.ndarray
    dense_mix: np.ndarray | None = None

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        self.base_weight = np.asarray(self.base_weight, dtype=float)
        if self.coeffs.ndim != 2 or self.coeffs.shape[1] != self.kv.grid_size:
            raise ValueError(
                f"coeffs must have shape (d, {self.kv.grid_size}), got {self.coeffs.shape}"
            )
        d = self.coeffs.shape[0]
        if self.base_weight.shape != (d,):
            raise ValueError(f"base_weight must have shape ({d},), got {self.base_weight.shape}")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("spline coefficients must be finite")
        if self.dense_mix is not None:
            mix = np.asarray(self.dense_mix, dtype=float)
            if mix.shape != (d, d, self.kv.grid_size):
                raise ValueError(f"dense_mix must have shape ({d}, {d}, {self.kv.grid_size})")
            self.dense_mix = mix * self.mix_mask()

    @property
    def dim(self) -> int:
        return self.coeffs.shape[0]

    def mix_mask(self) -> np.ndarray:
        d = self.dim
        return np.broadcast_to((1.0 - np.eye(d))[:, :, None], (d, d, self.kv.grid_size)).copy()

    @classmethod
    def init(
        cls,
        d: int,
        grid_size: int = 8,
        degree: int = 3,
        span: tuple[float, float] = (-2.0, 2.0),
        dense_mix: bool = False,
        rng=None,
    ):
        rng = np.random.default_rng(rng)
        kv = make_uniform_knots(span[0], span[1], grid_size, degree)
        coeffs = rng.normal(0.0, 0.1, size=(d, grid_size))
        mix = rng.normal(0.0, 0.1, size=(d, d, grid_size)) if dense_mix else None
        return cls(kv, coeffs, np.ones(d), mix)


def _check(x, sp: SplineLayerParams) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != sp.dim:
        raise ValueError(f"input has {x.shape[-1]} dims, layer expects {sp.dim}")
    return x


def spline_forward(x, sp: SplineLayerParams) -> np.ndarray:
    x = _check(x, sp)
    return _apply(x, basis_eval(sp.kv, x), sp)


def _apply(x: np.ndarray, B: np.ndarray, sp: SplineLayerParams) -> np.ndarray:
    out = sp.base_weight * np.tanh(x) + np.einsum("...ij,ij->...i", B, sp.coeffs)
    if sp.dense_mix is not None:
        out = out + np.einsum("...kj,ikj->...i", B, sp.dense_mix)
    return out


def spline_backward(
    x, sp: SplineLayerParams, upstream, bases=None
) -> tuple[dict[str, np.ndarray], np.ndarray]:
    """Gradients of ``sum(upstream * spline_forward(x))`` for coeffs, base_weight and input.

    ``bases`` may carry the ``(values, derivatives)`` pair already evaluated at ``x``.
    """
    x = _check(x, sp)
    upstream = np.asarray(upstream, dtype=float)
    if upstream.shape != x.shape:
        raise ValueError(f"upstream shape {upstream.shape} does not match input {x.shape}")
    B, dB = basis_eval_with_dx(sp.kv, x) if bases is None else bases
    th = np.tanh(x)
    d = sp.dim
    grads = {
        "coeffs": np.einsum("ni,nij->ij", upstream.reshape(-1, d), B.reshape(-1, d, B.shape[-1])),
        "base_weight": (upstream * th).reshape(-1, d).sum(axis=0),
    }
    input_grad = upstream * (sp.base_weight * (1.0 - th**2) + np.einsum("...ij,ij->...i", dB, sp.coeffs))
    if sp.dense_mix is not None:
        grads["dense_mix"] = (
            np.einsum("ni,nkj->ikj", upstream.reshape(-1, d), B.reshape(-1, d, B.shape[-1]))
            * sp.mix_mask()
        )
        input_grad = input_grad + np.einsum("...i,ikj,...kj->...k", upstream, sp.dense_mix, dB)
    return grads, input_grad
