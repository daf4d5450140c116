"""Model files (JSON) and event / curve files (CSV)."""

from __future__ import annotations

import csv
import json
import logging
from collections import defaultdict
from pathlib import Path

import numpy as np

from .baselines import BaselineEncoder
from .bspline import KnotVector
from .combined import CombinedEncoder
from .fourier import FourierLayerParams, LinearTimeMap
from .module import LinearDecoder
from .spectral import EventSequence
from .spline import SplineLayerParams
from .train import Model

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


class DataFileError(ValueError):
    """A data or model file exists but its content cannot be used."""


class SchemaError(DataFileError):
    pass


class VersionMismatchError(DataFileError):
    pass


def _arr(x) -> list:
    return np.asarray(x, dtype=float).tolist()


def encoder_to_dict(enc) -> dict:
    if isinstance(enc, BaselineEncoder):
        out = {"kind": "baseline", "baseline": enc.kind.value, "omega": _arr(enc.omega)}
        if enc.phi is not None:
            out["phi"] = _arr(enc.phi)
    elif isinstance(enc, CombinedEncoder):
        out = {
            "kind": enc.kind,
            "d": enc.dim,
            "p": enc.p,
            "ln_eps": enc.ln_eps,
            "raw_output": enc.raw_output,
            "omega": _arr(enc.lm.omega),
            "phi": _arr(enc.lm.phi),
            "scale": _arr(enc.scale),
        }
        if enc.fourier is not None:
            f = enc.fourier
            out["fourier"] = {
                "k_max": f.k_max,
                "diagonal_only": f.diagonal_only,
                "w_cos": _arr(f.w_cos),
                "w_sin": _arr(f.w_sin),
                "bias": _arr(f.bias),
            }
        if enc.spline is not None:
            s = enc.spline
            out["spline"] = {
                "degree": s.kv.degree,
                "grid_size": s.kv.grid_size,
                "knots": _arr(s.kv.knots),
                "coeffs": _arr(s.coeffs),
                "base_weight": _arr(s.base_weight),
                "dense_mix": None if s.dense_mix is None else _arr(s.dense_mix),
            }
    else:
        raise TypeError(f"cannot serialise {type(enc).__name__}")
    out["frozen"] = sorted(getattr(enc, "frozen", ()))
    return out


def _shaped(data: dict, key: str, shape: tuple | None = None) -> np.ndarray:
    if key not in data:
        raise SchemaError(f"missing field {key!r}")
    try:
        arr = np.asarray(data[key], dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"field {key!r} is not a numeric array") from exc
    if shape is not None and arr.shape != shape:
        raise SchemaError(f"field {key!r} has shape {arr.shape}, expected {shape}")
    return arr


def encoder_from_dict(data: dict):
    try:
        kind = data["kind"]
    except (KeyError, TypeError) as exc:
        raise SchemaError("encoder entry lacks a 'kind' tag") from exc
    try:
        if kind == "baseline":
            omega = _shaped(data, "omega")
            phi = _shaped(data, "phi", omega.shape) if "phi" in data else None
            enc = BaselineEncoder(data["baseline"], omega, phi)
        elif kind in ("fourier", "spline", "combined"):
            d = int(data["d"])
            lm = LinearTimeMap(_shaped(data, "omega", (d,)), _shaped(data, "phi", (d,)))
            fourier = spline = None
            if "fourier" in data:
                f = data["fourier"]
                n = len(f["bias"])
                shape = (n, n, int(f["k_max"]))
                fourier = FourierLayerParams(
                    _shaped(f, "w_cos", shape), _shaped(f, "w_sin", shape),
                    _shaped(f, "bias", (n,)), bool(f["diagonal_only"]),
                )
            if "spline" in data:
                s = data["spline"]
                kv = KnotVector(_shaped(s, "knots"), int(s["degree"]), int(s["grid_size"]))
                n = len(s["base_weight"])
                mix = s.get("dense_mix")
                spline = SplineLayerParams(
                    kv,
                    _shaped(s, "coeffs", (n, kv.grid_size)),
                    _shaped(s, "base_weight", (n,)),
                    None if mix is None else _shaped(s, "dense_mix", (n, n, kv.grid_size)),
                )
            enc = CombinedEncoder(
                lm, fourier, spline, float(data["p"]), _shaped(data, "scale", (d,)),
                float(data["ln_eps"]), bool(data["raw_output"]),
            )
        else:
            raise SchemaError(f"unknown encoder kind {kind!r}")
    except SchemaError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"invalid encoder entry: {exc}") from exc
    enc.frozen = set(data.get("frozen", ()))
    return enc


def model_to_dict(model, seed: int | None = None) -> dict:
    out = {"format_version": FORMAT_VERSION, "seed": seed}
    if isinstance(model, Model):
        out["encoder"] = encoder_to_dict(model.encoder)
        out["decoder"] = model.decoder.to_dict()
    else:
        out["encoder"] = encoder_to_dict(model)
    return out


def model_from_dict(data: dict):
    if not isinstance(data, dict) or "format_version" not in data:
        raise SchemaError("model file lacks a format_version")
    if data["format_version"] != FORMAT_VERSION:
        raise VersionMismatchError(
            f"model file has format_version {data['format_version']!r}; this build reads {FORMAT_VERSION}"
        )
    if "encoder" not in data:
        raise SchemaError("model file lacks an encoder entry")
    enc = encoder_from_dict(data["encoder"])
    if data.get("decoder") is None:
        return enc
    try:
        dec = LinearDecoder.from_dict(data["decoder"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"invalid decoder entry: {exc}") from exc
    if dec.dim != enc.dim:
        raise SchemaError(f"decoder expects {dec.dim} inputs, encoder produces {enc.dim}")
    return Model(enc, dec)


def save_model(path, model, seed: int | None = None) -> None:
    # json writes floats with repr, which round-trips exactly
    Path(path).write_text(json.dumps(model_to_dict(model, seed), indent=1))


def load_model(path):
    """Load an encoder or :class:`Model`; raises OSError, SchemaError or VersionMismatchError."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    return model_from_dict(data)


def read_event_csv(path, min_events: int = 5) -> list[EventSequence]:
    """Group ``node_id,timestamp`` rows into per-node time-sorted sequences.

    Nodes with ``min_events`` events or fewer are dropped. Duplicate
    timestamps are kept.
    """
    groups: dict[str, list[float]] = defaultdict(list)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            logger.warning("%s is empty; no event sequences read", path)
            return []
        if [h.strip() for h in header] != ["node_id", "timestamp"]:
            raise DataFileError(f"{path}:1: expected header 'node_id,timestamp', got {header!r}")
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != 2:
                raise DataFileError(f"{path}:{line}: expected 2 fields, got {len(row)}")
            try:
                ts = float(row[1])
            except ValueError:
                raise DataFileError(f"{path}:{line}: timestamp {row[1]!r} is not numeric") from None
            if not np.isfinite(ts):
                raise DataFileError(f"{path}:{line}: timestamp must be finite")
            groups[row[0].strip()].append(ts)
    return [
        EventSequence(np.sort(np.array(times), kind="stable"), node)
        for node, times in groups.items()
        if len(times) > min_events
    ]


def write_event_csv(path, sequences) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node_id", "timestamp"])
        for seq in sequences:
            for t in seq.times:
                w.writerow([seq.node_id, repr(float(t))])


def write_csv(path, header: list[str], columns) -> None:
    """Write equal-length columns with full round-trip float precision."""
    rows = zip(*columns)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=1, default=_json_default))


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")
