"""Desk-scale experiment drivers: function fitting, signal reconstruction,
feature maps and transfer-function reconstruction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .baselines import BaselineEncoder, BaselineKind
from .bspline import basis_eval
from .combined import CombinedEncoder, layer_norm
from .module import LinearDecoder
from .train import Model, TrainConfig, TrainReport, train_fit


def _softplus(x):
    return np.logaddexp(0.0, x)


def _swish(x):
    return x / (1.0 + np.exp(-x))


def _modulated_sin(x):
    return (1.0 + np.sin(x)) * np.sin(2.0 * x)


# name -> (function, default range, period or None)
TARGETS = {
    "sin": (np.sin, (-2 * np.pi, 2 * np.pi), 2 * np.pi),
    "modulated_sin": (_modulated_sin, (-2 * np.pi, 2 * np.pi), 2 * np.pi),
    "softplus": (_softplus, (-4.0, 4.0), None),
    "swish": (_swish, (-4.0, 4.0), None),
}

ENCODER_KINDS = ("fte", "fourier", "spline", "lete")

# fraction of a full period covered by a non-periodic target's range under
# the frozen Fourier map; wide enough to keep the cos/sin features well
# conditioned, narrow enough that the periodic extension is not forced
NONPERIODIC_WINDOW = 1.4 * np.pi


@dataclass
class TargetFunction:
    name: str
    sample_range: tuple[float, float] | None = None
    n_samples: int = 200

    def __post_init__(self):
        if self.name not in TARGETS:
            raise ValueError(f"unknown target {self.name!r}; choose from {sorted(TARGETS)}")
        if self.sample_range is None:
            self.sample_range = TARGETS[self.name][1]
        lo, hi = self.sample_range
        if not lo < hi:
            raise ValueError("sample range needs lo < hi")
        if self.n_samples < 16:
            raise ValueError("need at least 16 samples")

    def __call__(self, x):
        return TARGETS[self.name][0](np.asarray(x, dtype=float))

    @property
    def period(self) -> float | None:
        return TARGETS[self.name][2]


def gen_target(tf: TargetFunction, seed=None) -> tuple[np.ndarray, np.ndarray]:
    """Equispaced samples, or sorted seeded-uniform ones when ``seed`` is given."""
    lo, hi = tf.sample_range
    if seed is None:
        x = np.linspace(lo, hi, tf.n_samples)
    else:
        x = np.sort(np.random.default_rng(seed).uniform(lo, hi, tf.n_samples))
    return x, tf(x)


@dataclass
class SyntheticSignal:
    kind: str
    t_grid: np.ndarray
    values: np.ndarray
    generator_spec: dict = field(default_factory=dict)


SIGNAL_KINDS = ("periodic", "nonperiodic", "mixed")


def _periodic_part(t, n, window, seed):
    rng = np.random.default_rng([seed, 0])
    fundamental = float(rng.integers(n // 8, n // 4 + 1)) * window / n
    n_comp = int(rng.integers(2, 4))
    harmonics = np.sort(rng.choice(np.arange(1, 5), size=n_comp, replace=False))
    amps = rng.uniform(0.5, 1.5, n_comp)
    phases = rng.uniform(0.0, 2 * np.pi, n_comp)
    values = sum(
        a * np.sin(2 * np.pi * k * t / fundamental + ph) for a, k, ph in zip(amps, harmonics, phases)
    )
    spec = {
        "formula": "sum_c amp_c * sin(2 pi k_c t / fundamental + phase_c)",
        "fundamental": fundamental,
        "harmonics": harmonics.tolist(),
        "amps": amps.tolist(),
        "phases": phases.tolist(),
    }
    return values, spec


def _nonperiodic_part(t, window, seed):
    rng = np.random.default_rng([seed, 1])
    u = 2.0 * t / window - 1.0
    cubic = rng.uniform(-1.0, 1.0, 3)
    bump_amp = rng.uniform(0.5, 1.5) * rng.choice([-1.0, 1.0])
    bump_center = rng.uniform(-0.5, 0.5)
    bump_width = rng.uniform(0.05, 0.2)
    values = (
        cubic[0] * u
        + cubic[1] * u**2
        + cubic[2] * u**3
        + bump_amp * np.exp(-((u - bump_center) ** 2) / (2 * bump_width**2))
    )
    spec = {
        "formula": "c1 u + c2 u^2 + c3 u^3 + A exp(-(u - u0)^2 / (2 w^2)), u = 2 t / window - 1",
        "cubic": cubic.tolist(),
        "bump_amp": float(bump_amp),
        "bump_center": float(bump_center),
        "bump_width": float(bump_width),
    }
    return values, spec


def gen_signal(kind: str, n: int = 256, seed: int = 0, window: float = 128.0) -> SyntheticSignal:
    """Seeded synthetic signal sampled at ``n`` points over ``[0, window)``.

    Periodic: 2-3 harmonics of a fundamental spanning n/8..n/4 samples.
    NonPeriodic: cubic drift plus a Gaussian bump. Mixed: their pointwise sum.
    """
    kind = kind.lower()
    if kind not in SIGNAL_KINDS:
        raise ValueError(f"unknown signal kind {kind!r}; choose from {SIGNAL_KINDS}")
    if n < 32:
        raise ValueError("need at least 32 samples")
    t = np.arange(n) * (window / n)
    spec = {"kind": kind, "seed": seed, "n": n, "window": window}
    values = np.zeros(n)
    if kind in ("periodic", "mixed"):
        v, spec["periodic"] = _periodic_part(t, n, window, seed)
        values = values + v
    if kind in ("nonperiodic", "mixed"):
        v, spec["nonperiodic"] = _nonperiodic_part(t, window, seed)
        values = values + v
    return SyntheticSignal(kind, t, values, spec)


@dataclass
class FitReport:
    encoder_kind: str
    final_mse: float
    oracle_mse: float | None
    x: np.ndarray = field(repr=False)
    target: np.ndarray = field(repr=False)
    fitted: np.ndarray = field(repr=False)
    train: TrainReport | None = field(default=None, repr=False)
    model: Model | None = field(default=None, repr=False)
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "encoder_kind": self.encoder_kind,
            "final_mse": self.final_mse,
            "oracle_mse": self.oracle_mse,
            **self.meta,
        }
        if self.train is not None:
            out["train"] = self.train.to_dict()
        return out


def frozen_map_for(kind: str, tf: TargetFunction, span: tuple[float, float] = (-2.0, 2.0)):
    """Fixed ``(omega, phi)`` placing the sample range where each basis family works well.

    Fourier: periodic targets use their natural period; others map onto a
    centred window of width ``NONPERIODIC_WINDOW``. Spline: the range maps
    onto the interior knot span.
    """
    lo, hi = tf.sample_range
    if kind == "fourier":
        if tf.period is not None:
            return 2 * np.pi / tf.period, 0.0
        omega = NONPERIODIC_WINDOW / (hi - lo)
        return omega, -omega * (lo + hi) / 2
    if kind == "spline":
        omega = (span[1] - span[0]) / (hi - lo)
        return omega, span[0] - omega * lo
    raise ValueError(f"no frozen map for encoder kind {kind!r}")


def build_fit_encoder(kind: str, tf: TargetFunction, grid_size: int = 32, k_max: int = 5, rng=None):
    """One-dimensional encoder for the fitting task.

    LeTE variants get a frozen linear map (see :func:`frozen_map_for`) so the
    model is linear in its trainable coefficients; the FTE keeps trainable
    frequency and phase.
    """
    if kind == "fte":
        return BaselineEncoder(BaselineKind.UNIFIED_SIN, [1.0], [0.0])
    if kind not in ("fourier", "spline"):
        raise ValueError(f"fitting supports 'fte', 'fourier' and 'spline', got {kind!r}")
    p = 1.0 if kind == "fourier" else 0.0
    enc = CombinedEncoder.init(
        1, p=p, k_max=k_max, diagonal_only=True, grid_size=grid_size, raw_output=True, rng=rng
    )
    omega, phi = frozen_map_for(kind, tf)
    enc.lm.omega[:] = omega
    enc.lm.phi[:] = phi
    enc.frozen = {"omega", "phi"}
    return enc


def coefficient_features(enc: CombinedEncoder, t) -> np.ndarray:
    """Design matrix spanning everything a 1-d LeTE with frozen map plus decoder can express."""
    x = enc.lm.omega[0] * np.asarray(t, dtype=float) + enc.lm.phi[0]
    cols = [np.ones_like(x)]
    if enc.fourier is not None:
        m = np.arange(1, enc.fourier.k_max + 1)
        cols += list(np.cos(np.outer(x, m)).T) + list(np.sin(np.outer(x, m)).T)
    else:
        cols.append(np.tanh(x))
        cols += list(basis_eval(enc.spline.kv, x).T)
    return np.column_stack(cols)


def least_squares_oracle(enc: CombinedEncoder, t, y) -> float:
    A = coefficient_features(enc, t)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(np.mean((A @ coef - y) ** 2))


def run_fit(
    encoder_kind: str,
    tf: TargetFunction,
    cfg: TrainConfig | None = None,
    grid_size: int = 32,
    k_max: int = 5,
) -> FitReport:
    cfg = cfg or TrainConfig()
    x, y = gen_target(tf)
    enc = build_fit_encoder(encoder_kind, tf, grid_size, k_max, rng=cfg.seed)
    oracle = None if encoder_kind == "fte" else least_squares_oracle(enc, x, y)
    model = Model(enc, rng=cfg.seed)
    report = train_fit(model, (x, y), None, cfg)
    meta = {"target": tf.name, "sample_range": list(tf.sample_range), "n_samples": tf.n_samples}
    return FitReport(encoder_kind, report.final_loss, oracle, x, y, model(x), report, model, meta)


def build_reconstruction_encoder(kind: str, d: int, rng=None, p: float = 0.5):
    if kind == "fte":
        return BaselineEncoder.init(BaselineKind.UNIFIED_SIN, d)
    ratios = {"lete": p, "fourier": 1.0, "spline": 0.0}
    if kind not in ratios:
        raise ValueError(f"unknown encoder kind {kind!r}; choose from {ENCODER_KINDS}")
    return CombinedEncoder.init(d, p=ratios[kind], rng=rng)


def run_reconstruction(
    encoder_kind: str, signal: SyntheticSignal, d: int = 8, cfg: TrainConfig | None = None, p: float = 0.5
) -> FitReport:
    """Encoder plus linear decoder trained to reproduce ``signal.values`` from ``signal.t_grid``."""
    if d < 2:
        raise ValueError("reconstruction needs d >= 2")
    cfg = cfg or TrainConfig(steps=2000)
    enc = build_reconstruction_encoder(encoder_kind, d, rng=cfg.seed, p=p)
    model = Model(enc, rng=cfg.seed)
    report = train_fit(model, (signal.t_grid, signal.values), None, cfg)
    meta = {"signal": signal.generator_spec, "d": d}
    return FitReport(
        encoder_kind, report.final_loss, None, signal.t_grid, signal.values,
        model(signal.t_grid), report, model, meta,
    )


def export_feature_map(encoder, t_grid) -> np.ndarray:
    """Rows are encodings of successive grid times; shape ``(len(t_grid), d)``."""
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("t_grid must be a non-empty 1-d array")
    if np.any(np.diff(t) < 0):
        raise ValueError("t_grid must be sorted")
    return np.atleast_2d(encoder(t))


# ---------------------------------------------------------------------------
# transfer functions


@dataclass
class TransferCurve:
    dim: int
    family: str
    x: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    terms: list = field(default_factory=list)
    constant: float = 0.0


def _fourier_terms(enc: CombinedEncoder, j: int) -> list[tuple]:
    fp = enc.fourier
    terms = []
    for i in range(fp.dim):
        for m in range(fp.k_max):
            for fn, w in (("cos", fp.w_cos), ("sin", fp.w_sin)):
                c = float(w[j, i, m])
                if c != 0.0:
                    terms.append((c, fn, m + 1, i))
    return terms


def _spline_terms(enc: CombinedEncoder, j: int) -> list[tuple]:
    sp = enc.spline
    d_f, _ = enc.dims
    supports = sp.kv.supports()
    terms = []
    sources = [(j, sp.coeffs[j])]
    if sp.dense_mix is not None:
        sources += [(k, sp.dense_mix[j, k]) for k in range(sp.dim) if k != j]
    for k, row in sources:
        for b, c in enumerate(row):
            if c != 0.0:
                terms.append((float(c), "B", b, d_f + k, supports[b]))
    if sp.base_weight[j] != 0.0:
        terms.append((float(sp.base_weight[j]), "tanh", 0, d_f + j))
    return terms


def reconstruct_transfer_functions(encoder, x_grid) -> list[TransferCurve]:
    """Per-dimension transfer curves sampled over ``x_grid`` with their symbolic terms.

    Curves are functions of the encoder input ``x`` through the linear map
    ``x'_k = omega_k x + phi_k``; they are the encoder's pre-normalisation
    output, so for raw encoders they coincide with the feature map.
    """
    x = np.asarray(x_grid, dtype=float)
    curves = []
    if isinstance(encoder, BaselineEncoder):
        values = encoder(x)
        for i in range(encoder.dim):
            curves.append(TransferCurve(i, encoder.kind.value, x, values[:, i]))
        return curves
    pre = encoder.lm.omega * x[:, None] + encoder.lm.phi
    h = encoder.transfer(pre)
    d_f, _ = encoder.dims
    for j in range(encoder.dim):
        if j < d_f:
            curves.append(
                TransferCurve(j, "fourier", x, h[:, j], _fourier_terms(encoder, j), float(encoder.fourier.bias[j]))
            )
        else:
            curves.append(TransferCurve(j, "spline", x, h[:, j], _spline_terms(encoder, j - d_f)))
    return curves


def _num(v: float, digits: int | None) -> str:
    if digits is None:
        return repr(abs(float(v)))
    return f"{abs(v):.{digits}f}"


def _signed(v: float, digits: int | None) -> str:
    return ("-" if v < 0 else "+") + _num(v, digits)


def _num_s(v: float, digits: int | None) -> str:
    return repr(float(v)) if digits is None else f"{v:.{digits}f}"


def format_listing(encoder, curves: list[TransferCurve], digits: int | None = 4) -> str:
    """Human-readable expansion of each transfer function.

    ``digits=None`` prints every number at full round-trip precision.
    """
    lines = []
    degree = encoder.spline.kv.degree if getattr(encoder, "spline", None) is not None else None
    for c in curves:
        parts = []
        for term in c.terms:
            coef, fn = term[0], term[1]
            if fn in ("cos", "sin"):
                parts.append(f"{_signed(coef, digits)}·{fn}({term[2]}·x'_{term[3]})")
            elif fn == "B":
                lo, hi = term[4]
                parts.append(
                    f"{_signed(coef, digits)}·B_{term[2]}(x'_{term[3]}) "
                    f"(support: [{_num_s(lo, digits)},{_num_s(hi, digits)}])"
                )
            else:
                parts.append(f"{_signed(coef, digits)}·Tanh(x'_{term[3]})")
        if c.constant != 0.0:
            parts.append(_signed(c.constant, digits))
        lines.append(f"f_{c.dim}(x) = " + (" ".join(parts) if parts else "0"))
    if hasattr(encoder, "lm"):
        maps = [
            f"x'_{k} = {_num_s(w, digits)}·x {_signed(p, digits)}"
            for k, (w, p) in enumerate(zip(encoder.lm.omega, encoder.lm.phi))
        ]
        lines.append("where " + ", ".join(maps))
    if degree is not None:
        lines.append(f"B_j are degree-{degree} B-splines on uniform knots")
    return "\n".join(lines)


def fourier_coefficient_table(encoder: CombinedEncoder, dim: int) -> np.ndarray:
    """Magnitude spectrum ``sqrt(a_k^2 + b_k^2)`` per (input dim, harmonic) for a Fourier output dim."""
    fp = encoder.fourier
    return np.hypot(fp.w_cos[dim], fp.w_sin[dim])


def normalised_curves(encoder: CombinedEncoder, curves: list[TransferCurve]) -> np.ndarray:
    """Stack curves and apply the encoder's LayerNorm and scale, if any."""
    h = np.column_stack([c.values for c in curves])
    if getattr(encoder, "raw_output", True):
        return h
    return encoder.scale * layer_norm(h, encoder.ln_eps)


def periodic_autocorrelation(values, lag: int) -> float:
    """Pearson correlation of a sequence with itself shifted by ``lag`` samples."""
    v = np.asarray(values, dtype=float)
    if not 0 < lag < v.size - 1:
        raise ValueError("lag out of range")
    return float(np.corrcoef(v[:-lag], v[lag:])[0, 1])


def fundamental_lag(signal: SyntheticSignal) -> int:
    spec = signal.generator_spec["periodic"]
    dt = signal.t_grid[1] - signal.t_grid[0]
    return int(round(spec["fundamental"] / dt))


__all__ = [
    "TARGETS",
    "TargetFunction",
    "gen_target",
    "SyntheticSignal",
    "gen_signal",
    "FitReport",
    "run_fit",
    "run_reconstruction",
    "export_feature_map",
    "TransferCurve",
    "reconstruct_transfer_functions",
    "format_listing",
    "least_squares_oracle",
]
