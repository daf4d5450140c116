"""Learnable time encodings: Fourier, spline and combined encoders with fixed sinusoidal baselines."""

from .baselines import BaselineEncoder, BaselineKind, baseline_encode, lete_params_replicating_sin, unify_ftr
from .bspline import KnotVector, basis_eval, basis_eval_dx, basis_eval_with_dx, make_uniform_knots
from .combined import CombinedEncoder, encode, encode_backward, layer_norm, split_dims
from .fourier import FourierLayerParams, LinearTimeMap, fourier_backward, fourier_forward, geometric_frequencies
from .io import SchemaError, VersionMismatchError, load_model, read_event_csv, save_model
from .module import LinearDecoder, Module
from .spectral import EventSequence, SpectralReport, analyze_batch, analyze_sequence, dft_magnitude, fft_radix2, spectral_entropy
from .spline import SplineLayerParams, spline_backward, spline_forward
from .train import DivergenceError, Model, TrainConfig, TrainReport, adam_step, grad_check, train_fit

__version__ = "0.1.0"

__all__ = [
    "BaselineEncoder", "BaselineKind", "baseline_encode", "lete_params_replicating_sin", "unify_ftr",
    "KnotVector", "basis_eval", "basis_eval_dx", "basis_eval_with_dx", "make_uniform_knots",
    "CombinedEncoder", "encode", "encode_backward", "layer_norm", "split_dims",
    "FourierLayerParams", "LinearTimeMap", "fourier_backward", "fourier_forward", "geometric_frequencies",
    "SchemaError", "VersionMismatchError", "load_model", "read_event_csv", "save_model",
    "LinearDecoder", "Module",
    "EventSequence", "SpectralReport", "analyze_batch", "analyze_sequence", "dft_magnitude", "fft_radix2",
    "spectral_entropy",
    "SplineLayerParams", "spline_backward", "spline_forward",
    "DivergenceError", "Model", "TrainConfig", "TrainReport", "adam_step", "grad_check", "train_fit",
]
