"""Minimal parameter-container protocol shared by encoders and decoders."""

from __future__ import annotations

import numpy as np


class Module:
    """Something with named parameter arrays, a forward pass and a manual backward pass.

    ``parameters()`` returns live references; optimizers update them in place.
    ``forward_cached`` returns the output together with whatever the backward
    pass needs, and ``backward`` maps an upstream gradient on the output to
    gradients for every entry of ``parameters()``.
    """

    def parameters(self) -> dict[str, np.ndarray]:
        raise NotImplementedError

    def forward_cached(self, t):
        raise NotImplementedError

    def backward(self, cache, upstream) -> dict[str, np.ndarray]:
        raise NotImplementedError

    def __call__(self, t) -> np.ndarray:
        return self.forward_cached(t)[0]

    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters().values())


class LinearDecoder(Module):
    """Maps a batch of ``d``-dim encodings to scalars: ``h @ weight + bias``."""

    def __init__(self, d: int, rng=None, weight=None, bias: float = 0.0):
        rng = np.random.default_rng(rng)
        if weight is None:
            weight = rng.normal(0.0, 1.0 / np.sqrt(d), size=d)
        self.weight = np.asarray(weight, dtype=float).copy()
        self.bias = np.array([float(bias)])
        if self.weight.shape != (d,):
            raise ValueError(f"decoder weight must have shape ({d},)")

    @property
    def dim(self) -> int:
        return self.weight.size

    def parameters(self):
        return {"weight": self.weight, "bias": self.bias}

    def forward_cached(self, h):
        h = np.asarray(h, dtype=float)
        return h @ self.weight + self.bias[0], h

    def backward(self, cache, upstream):
        h = cache
        upstream = np.asarray(upstream, dtype=float)
        grads = {
            "weight": upstream @ h if h.ndim > 1 else upstream * h,
            "bias": np.array([np.sum(upstream)]),
        }
        grads["input"] = np.multiply.outer(upstream, self.weight)
        return grads

    def to_dict(self) -> dict:
        return {"weight": self.weight.tolist(), "bias": float(self.bias[0])}

    @classmethod
    def from_dict(cls, data: dict) -> "LinearDecoder":
        w = np.asarray(data["weight"], dtype=float)
        return cls(w.size, weight=w, bias=data["bias"])
