"""Fourier-series transfer layer and the affine time map that feeds it.

The layer evaluates

    out_j = sum_i sum_m (w_cos[j, i, m] cos((m+1) x_i) + w_sin[j, i, m] sin((m+1) x_i)) + bias_j

over a batch of input vectors. In diagonal mode only ``i == j`` terms are
kept, giving one independent truncated Fourier series per dimension.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class LinearTimeMap:
    omega: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=float)
        self.phi = np.asarray(self.phi, dtype=float)
        if self.omega.ndim != 1 or self.omega.size < 1 or self.omega.shape != self.phi.shape:
            raise ValueError("omega and phi must be equal-length non-empty vectors")
        if not (np.all(np.isfinite(self.omega)) and np.all(np.isfinite(self.phi))):
            raise ValueError("omega and phi must be finite")

    @property
    def dim(self) -> int:
        return self.omega.size


def geometric_frequencies(d: int) -> np.ndarray:
    """Frequency ladder ``10 ** (-4 i / d)`` for ``i = 0..d-1``."""
    return 1.0 / 10.0 ** (np.arange(d) * 4.0 / d)


def prescale_times(t, lo: float | None = None, hi: float | None = None) -> np.ndarray:
    """Affine map of absolute timestamps onto ``[0, 1]``.

    ``lo``/``hi`` default to the range of ``t``; pass them explicitly to apply
    a training-time range to new data. Any such rescaling can be absorbed by
    ``omega`` and ``phi``, so it changes conditioning, not expressiveness.
    """
    t = np.asarray(t, dtype=float)
    lo = float(t.min()) if lo is None else float(lo)
    hi = float(t.max()) if hi is None else float(hi)
    if not hi > lo:
        raise ValueError("time range must have positive width")
    return (t - lo) / (hi - lo)


def linear_map(t, lm: LinearTimeMap) -> np.ndarray:
    """``omega * t + phi``; a scalar ``t`` gives shape ``(d,)``, a vector gives ``(n, d)``."""
    t = np.asarray(t, dtype=float)
    return t[..., None] * lm.omega + lm.phi


def linear_map_backward(t, upstream: np.ndarray) -> dict[str, np.ndarray]:
    t = np.asarray(t, dtype=float)
    upstream = np.asarray(upstream, dtype=float)
    g_omega = upstream * t[..., None]
    axes = tuple(range(upstream.ndim - 1))
    return {"omega": g_omega.sum(axis=axes), "phi": upstream.sum(axis=axes)}


@dataclass
class FourierLayerParams:
    w_cos: np.ndarray
    w_sin: np.ndarray
    bias: np.ndarray
    diagonal_only: bool = False

    def __post_init__(self):
        self.w_cos = np.asarray(self.w_cos, dtype=float)
        self.w_sin = np.asarray(self.w_sin, dtype=float)
        self.bias = np.asarray(self.bias, dtype=float)
        if self.w_cos.ndim != 3 or self.w_cos.shape != self.w_sin.shape:
            raise ValueError("w_cos and w_sin must share a 3-d shape (out, in, K)")
        m_out, d_in, k = self.w_cos.shape
        if m_out != d_in:
            raise ValueError(f"Fourier layer must be square, got {m_out} x {d_in}")
        if k < 1:
            raise ValueError("need at least one harmonic")
        if self.bias.shape != (m_out,):
            raise ValueError(f"bias must have shape ({m_out},), got {self.bias.shape}")
        if self.diagonal_only:
            mask = self.mask()
            self.w_cos = self.w_cos * mask
            self.w_sin = self.w_sin * mask

    @property
    def dim(self) -> int:
        return self.bias.size

    @property
    def k_max(self) -> int:
        return self.w_cos.shape[2]

    def mask(self) -> np.ndarray:
        """Multiplicative weight mask: all ones when dense, identity on (out, in) when diagonal."""
        d, k = self.dim, self.k_max
        if not self.diagonal_only:
            return np.ones((d, d, k))
        return np.broadcast_to(np.eye(d)[:, :, None], (d, d, k)).copy()

    @classmethod
    def init(cls, d: int, k_max: int = 5, diagonal_only: bool = False, rng=None):
        rng = np.random.default_rng(rng)
        std = 1.0 / np.sqrt(d * k_max)
        w_cos = rng.normal(0.0, std, size=(d, d, k_max))
        w_sin = rng.normal(0.0, std, size=(d, d, k_max))
        return cls(w_cos, w_sin, np.zeros(d), diagonal_only)


def _harmonics(x: np.ndarray, k_max: int):
    mx = x[..., None] * np.arange(1, k_max + 1)
    return np.cos(mx), np.sin(mx)


def fourier_forward(x, fp: FourierLayerParams) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != fp.dim:
        raise ValueError(f"input has {x.shape[-1]} dims, layer expects {fp.dim}")
    return _apply(_harmonics(x, fp.k_max), fp)


def _apply(harmonics, fp: FourierLayerParams) -> np.ndarray:
    c, s = harmonics
    return (
        np.einsum("...im,jim->...j", c, fp.w_cos)
        + np.einsum("...im,jim->...j", s, fp.w_sin)
        + fp.bias
    )


def fourier_backward(
    x, fp: FourierLayerParams, upstream, harmonics=None
) -> tuple[dict[str, np.ndarray], np.ndarray]:
    """Gradients of ``sum(upstream * fourier_forward(x))``.

    Returns ``({"w_cos", "w_sin", "bias"}, input_grad)``; parameter grads are
    summed over any leading batch axes. ``harmonics`` may carry the
    ``(cos, sin)`` tables from the forward pass.
    """
    x = np.asarray(x, dtype=float)
    upstream = np.asarray(upstream, dtype=float)
    if x.shape[-1] != fp.dim or upstream.shape != x.shape:
        raise ValueError(
            f"shape mismatch: x {x.shape}, upstream {upstream.shape}, layer dim {fp.dim}"
        )
    c, s = _harmonics(x, fp.k_max) if harmonics is None else harmonics
    mask = fp.mask()
    d, k = fp.dim, fp.k_max
    u2 = upstream.reshape(-1, d)
    g_cos = np.einsum("nj,nim->jim", u2, c.reshape(-1, d, k)) * mask
    g_sin = np.einsum("nj,nim->jim", u2, s.reshape(-1, d, k)) * mask
    g_bias = upstream.reshape(-1, fp.dim).sum(axis=0)
    m = np.arange(1, fp.k_max + 1)
    # d/dx_i of cos(m x_i) is -m sin(m x_i), of sin(m x_i) is m cos(m x_i)
    dc = -s * m
    ds = c * m
    input_grad = np.einsum("...j,jim,...im->...i", upstream, fp.w_cos, dc) + np.einsum(
        "...j,jim,...im->...i", upstream, fp.w_sin, ds
    )
    return {"w_cos": g_cos, "w_sin": g_sin, "bias": g_bias}, input_grad
