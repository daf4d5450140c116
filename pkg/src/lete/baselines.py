"""Fixed-sinusoid time encodings (FTR, Time2Vec, plain sine) with trainable frequencies."""

from __future__ import annotations

import enum

import numpy as np

from .combined import CombinedEncoder
from .fourier import FourierLayerParams, LinearTimeMap, geometric_frequencies
from .module import Module


class BaselineKind(str, enum.Enum):
    FTR = "ftr"
    T2V = "t2v"
    UNIFIED_SIN = "unified_sin"


class BaselineEncoder(Module):
    """``kind`` selects the fixed non-linearity.

    * FTR: ``[cos(w_1 t), sin(w_1 t), ..., cos(w_k t), sin(w_k t)]``; ``omega`` has
      length ``d / 2`` and there is no phase.
    * T2V: ``[w_1 t + phi_1, sin(w_2 t + phi_2), ...]``.
    * UNIFIED_SIN: ``sin(w_i t + phi_i)`` in every dimension.
    """

    def __init__(self, kind, omega, phi=None):
        self.kind = BaselineKind(kind)
        self.omega = np.asarray(omega, dtype=float).copy()
        if self.omega.ndim != 1 or self.omega.size < 1:
            raise ValueError("omega must be a non-empty vector")
        if self.kind is BaselineKind.FTR:
            self.phi = None
        else:
            self.phi = np.zeros_like(self.omega) if phi is None else np.asarray(phi, dtype=float).copy()
            if self.phi.shape != self.omega.shape:
                raise ValueError("omega and phi must have equal length")
        self.frozen: set[str] = set()

    @classmethod
    def init(cls, kind, d: int, rng=None) -> "BaselineEncoder":
        kind = BaselineKind(kind)
        if kind is BaselineKind.FTR:
            if d % 2:
                raise ValueError(f"FTR needs an even dimension, got {d}")
            return cls(kind, geometric_frequencies(d // 2))
        return cls(kind, geometric_frequencies(d), np.zeros(d))

    @property
    def dim(self) -> int:
        return 2 * self.omega.size if self.kind is BaselineKind.FTR else self.omega.size

    def parameters(self):
        if self.phi is None:
            return {"omega": self.omega}
        return {"omega": self.omega, "phi": self.phi}

    def forward_cached(self, t):
        t = np.asarray(t, dtype=float)
        if not np.all(np.isfinite(t)):
            raise ValueError("time inputs must be finite")
        if self.kind is BaselineKind.FTR:
            x = t[..., None] * self.omega
            out = np.empty(x.shape[:-1] + (self.dim,))
            out[..., 0::2] = np.cos(x)
            out[..., 1::2] = np.sin(x)
            return out, (t, x)
        x = t[..., None] * self.omega + self.phi
        out = np.sin(x)
        if self.kind is BaselineKind.T2V:
            out[..., 0] = x[..., 0]
        return out, (t, x)

    def backward(self, cache, upstream):
        t, x = cache
        g = np.asarray(upstream, dtype=float)
        if self.kind is BaselineKind.FTR:
            gx = -g[..., 0::2] * np.sin(x) + g[..., 1::2] * np.cos(x)
        else:
            gx = g * np.cos(x)
            if self.kind is BaselineKind.T2V:
                gx[..., 0] = g[..., 0]
        lead = tuple(range(gx.ndim - 1))
        grads = {"omega": (gx * t[..., None]).sum(axis=lead)}
        if self.phi is not None:
            grads["phi"] = gx.sum(axis=lead)
        return grads


def baseline_encode(t, bp: BaselineEncoder) -> np.ndarray:
    return bp(t)


def unify_ftr(bp: BaselineEncoder) -> BaselineEncoder:
    """Rewrite an FTR encoder as plain sines: cosines become sines shifted by pi/2."""
    if bp.kind is not BaselineKind.FTR:
        raise ValueError(f"unify_ftr expects an FTR encoder, got {bp.kind.value}")
    omega = np.repeat(bp.omega, 2)
    phi = np.tile([np.pi / 2, 0.0], bp.omega.size)
    return BaselineEncoder(BaselineKind.UNIFIED_SIN, omega, phi)


def lete_params_replicating_sin(omega, phi) -> CombinedEncoder:
    """A raw-output Fourier encoder whose dimension ``i`` is exactly ``sin(omega_i t + phi_i)``.

    One harmonic, zero bias, zero cosine weights, unit diagonal sine weights.
    """
    omega = np.asarray(omega, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if omega.shape != phi.shape:
        raise ValueError("omega and phi must have equal length")
    d = omega.size
    w_sin = np.eye(d)[:, :, None].copy()
    fourier = FourierLayerParams(np.zeros((d, d, 1)), w_sin, np.zeros(d), diagonal_only=True)
    return CombinedEncoder(LinearTimeMap(omega, phi), fourier, None, p=1.0, raw_output=True)
