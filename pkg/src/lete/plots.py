"""Figure rendering for CLI reports (matplotlib, headless Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path) -> None:
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_fit(path, x, target, fitted, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(x, target, "k-", lw=1.5, label="target")
    ax.plot(x, fitted, "C1--", lw=1.2, label="fitted")
    ax.set_xlabel("x")
    ax.set_title(title)
    ax.legend()
    _save(fig, path)


def plot_loss_curves(path, curves: dict[str, np.ndarray], title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for name, curve in curves.items():
        ax.semilogy(np.arange(1, len(curve) + 1), curve, label=name)
    ax.set_xlabel("step")
    ax.set_ylabel("MSE")
    ax.set_title(title)
    ax.legend()
    _save(fig, path)


def plot_reconstruction(path, t, target, fitted: dict[str, np.ndarray], title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.plot(t, target, "k-", lw=1.5, label="signal")
    for i, (name, y) in enumerate(fitted.items()):
        ax.plot(t, y, f"C{i + 1}--", lw=1.1, label=name)
    ax.set_xlabel("t")
    ax.set_title(title)
    ax.legend()
    _save(fig, path)


def plot_entropy_density(path, entropies, bins: int = 30) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.hist(np.asarray(entropies, dtype=float), bins=bins, density=True, color="C0", alpha=0.8)
    ax.set_xlabel("spectral entropy (nats)")
    ax.set_ylabel("density")
    _save(fig, path)


def plot_feature_map(path, t_grid, features) -> None:
    features = np.atleast_2d(features)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    im = ax.imshow(
        features.T,
        aspect="auto",
        origin="lower",
        extent=(float(t_grid[0]), float(t_grid[-1]), -0.5, features.shape[1] - 0.5),
        cmap="viridis",
    )
    fig.colorbar(im, ax=ax)
    ax.set_xlabel("t")
    ax.set_ylabel("dimension")
    _save(fig, path)


def plot_transfer_functions(path, curves) -> None:
    n = len(curves)
    cols = min(n, 4)
    rows = -(-n // cols)
    fig, axes = plt.subplots(rows, cols, figsize=(3 * cols, 2.4 * rows), squeeze=False)
    for ax in axes.flat[n:]:
        ax.axis("off")
    for ax, c in zip(axes.flat, curves):
        ax.plot(c.x, c.values, color="C0" if c.family == "fourier" else "C2")
        ax.set_title(f"dim {c.dim} ({c.family})", fontsize=9)
    _save(fig, path)
