"""Combined learnable time encoder.

The first ``floor(p * d)`` dimensions go through the Fourier layer and the
rest through the spline layer; the concatenation is layer-normalised over
all ``d`` dimensions and multiplied by a learnable per-dimension scale.
``p = 1`` and ``p = 0`` give the pure Fourier and pure spline encoders.
With ``raw_output`` the normalisation and scale are skipped.
"""

from __future__ import annotations

import math

import numpy as np

from . import fourier as _fourier
from . import spline as _spline
from .bspline import basis_eval_with_dx
from .fourier import (
    FourierLayerParams,
    LinearTimeMap,
    fourier_backward,
    fourier_forward,
    geometric_frequencies,
    linear_map,
    linear_map_backward,
)
from .module import Module
from .spline import SplineLayerParams, spline_backward, spline_forward


def split_dims(d: int, p: float) -> tuple[int, int]:
    if d < 1:
        raise ValueError(f"d must be at least 1, got {d}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"split ratio p must lie in [0, 1], got {p}")
    d_fourier = math.floor(p * d)
    return d_fourier, d - d_fourier


def layer_norm(v, eps: float = 1e-5) -> np.ndarray:
    """Normalise over the last axis with population variance; no affine terms."""
    v = np.asarray(v, dtype=float)
    # shifting by the first entry keeps constant rows exactly zero
    shifted = v - v[..., :1]
    centred = shifted - shifted.mean(axis=-1, keepdims=True)
    var = (centred**2).mean(axis=-1, keepdims=True)
    return centred / np.sqrt(var + eps)


def layer_norm_backward(v, eps: float, upstream) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    g = np.asarray(upstream, dtype=float)
    y = layer_norm(v, eps)
    shifted = v - v[..., :1]
    var = shifted.var(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    return inv_std * (g - g.mean(axis=-1, keepdims=True) - y * (g * y).mean(axis=-1, keepdims=True))


class CombinedEncoder(Module):
    def __init__(
        self,
        lm: LinearTimeMap,
        fourier: FourierLayerParams | None,
        spline: SplineLayerParams | None,
        p: float,
        scale=None,
        ln_eps: float = 1e-5,
        raw_output: bool = False,
    ):
        d = lm.dim
        d_f, d_s = split_dims(d, p)
        if d_f and (fourier is None or fourier.dim != d_f):
            raise ValueError(f"Fourier block must cover {d_f} dims")
        if d_s and (spline is None or spline.dim != d_s):
            raise ValueError(f"spline block must cover {d_s} dims")
        if not ln_eps > 0:
            raise ValueError("ln_eps must be positive")
        self.lm = lm
        self.fourier = fourier if d_f else None
        self.spline = spline if d_s else None
        self.p = float(p)
        self.scale = np.ones(d) if scale is None else np.asarray(scale, dtype=float).copy()
        if self.scale.shape != (d,) or not np.all(np.isfinite(self.scale)):
            raise ValueError(f"scale must be a finite vector of length {d}")
        self.ln_eps = float(ln_eps)
        self.raw_output = bool(raw_output)
        self.frozen: set[str] = set()

    @classmethod
    def init(
        cls,
        d: int,
        p: float = 0.5,
        k_max: int = 5,
        diagonal_only: bool = False,
        grid_size: int = 8,
        degree: int = 3,
        span: tuple[float, float] = (-2.0, 2.0),
        dense_mix: bool = False,
        ln_eps: float = 1e-5,
        raw_output: bool = False,
        rng=None,
    ) -> "CombinedEncoder":
        rng = np.random.default_rng(rng)
        d_f, d_s = split_dims(d, p)
        lm = LinearTimeMap(geometric_frequencies(d), np.zeros(d))
        fourier = FourierLayerParams.init(d_f, k_max, diagonal_only, rng) if d_f else None
        spline = (
            SplineLayerParams.init(d_s, grid_size, degree, span, dense_mix, rng) if d_s else None
        )
        return cls(lm, fourier, spline, p, None, ln_eps, raw_output)

    @property
    def dim(self) -> int:
        return self.lm.dim

    @property
    def dims(self) -> tuple[int, int]:
        return split_dims(self.dim, self.p)

    @property
    def kind(self) -> str:
        if self.p == 1.0:
            return "fourier"
        if self.p == 0.0:
            return "spline"
        return "combined"

    def parameters(self) -> dict[str, np.ndarray]:
        params = {"omega": self.lm.omega, "phi": self.lm.phi}
        if self.fourier is not None:
            params["fourier.w_cos"] = self.fourier.w_cos
            params["fourier.w_sin"] = self.fourier.w_sin
            params["fourier.bias"] = self.fourier.bias
        if self.spline is not None:
            params["spline.coeffs"] = self.spline.coeffs
            params["spline.base_weight"] = self.spline.base_weight
            if self.spline.dense_mix is not None:
                params["spline.dense_mix"] = self.spline.dense_mix
        if not self.raw_output:
            params["scale"] = self.scale
        return params

    def transfer(self, x) -> np.ndarray:
        """Apply the per-block transfer functions to pre-activations ``x``."""
        x = np.asarray(x, dtype=float)
        d_f, _ = self.dims
        parts = []
        if self.fourier is not None:
            parts.append(fourier_forward(x[..., :d_f], self.fourier))
        if self.spline is not None:
            parts.append(spline_forward(x[..., d_f:], self.spline))
        return np.concatenate(parts, axis=-1)

    def forward_cached(self, t):
        t = np.asarray(t, dtype=float)
        if not np.all(np.isfinite(t)):
            raise ValueError("time inputs must be finite")
        x = linear_map(t, self.lm)
        d_f, _ = self.dims
        parts, tables = [], {}
        if self.fourier is not None:
            tables["fourier"] = _fourier._harmonics(x[..., :d_f], self.fourier.k_max)
            parts.append(_fourier._apply(tables["fourier"], self.fourier))
        if self.spline is not None:
            xs = x[..., d_f:]
            tables["spline"] = basis_eval_with_dx(self.spline.kv, xs)
            parts.append(_spline._apply(xs, tables["spline"][0], self.spline))
        h = np.concatenate(parts, axis=-1)
        if self.raw_output:
            return h, (t, x, h, None, tables)
        z = layer_norm(h, self.ln_eps)
        return self.scale * z, (t, x, h, z, tables)

    def backward(self, cache, upstream) -> dict[str, np.ndarray]:
        t, x, h, z, tables = cache
        g = np.asarray(upstream, dtype=float)
        if g.shape != h.shape:
            raise ValueError(f"upstream shape {g.shape} does not match output {h.shape}")
        grads = {}
        if not self.raw_output:
            grads["scale"] = (g * z).reshape(-1, self.dim).sum(axis=0)
            g = layer_norm_backward(h, self.ln_eps, g * self.scale)
        d_f, _ = self.dims
        gx = np.zeros_like(x)
        if self.fourier is not None:
            fg, gx[..., :d_f] = fourier_backward(
                x[..., :d_f], self.fourier, g[..., :d_f], tables["fourier"]
            )
            grads.update({f"fourier.{k}": v for k, v in fg.items()})
        if self.spline is not None:
            sg, gx[..., d_f:] = spline_backward(
                x[..., d_f:], self.spline, g[..., d_f:], tables["spline"]
            )
            grads.update({f"spline.{k}": v for k, v in sg.items()})
        grads.update(linear_map_backward(t, gx))
        return grads


def encode(t, cp: CombinedEncoder) -> np.ndarray:
    return cp(t)


def encode_backward(t, cp: CombinedEncoder, upstream) -> dict[str, np.ndarray]:
    _, cache = cp.forward_cached(t)
    return cp.backward(cache, upstream)
