"""B-spline basis functions on uniform extended knot grids.

Basis values come from the Cox-de Boor recursion. Degree-0 cells are
half-open ``[t_i, t_{i+1})`` except the very last cell of the knot vector,
which is closed on the right so that evaluation at the final knot is
well defined.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class KnotVector:
    knots: np.ndarray
    degree: int
    grid_size: int

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        object.__setattr__(self, "knots", knots)
        if self.degree < 0:
            raise ValueError(f"degree must be non-negative, got {self.degree}")
        if self.grid_size < 1:
            raise ValueError(f"grid_size must be positive, got {self.grid_size}")
        if knots.ndim != 1 or knots.size != self.grid_size + self.degree + 1:
            raise ValueError(
                f"expected {self.grid_size + self.degree + 1} knots, got shape {knots.shape}"
            )
        if not np.all(np.isfinite(knots)):
            raise ValueError("knots must be finite")
        if np.any(np.diff(knots) < 0):
            raise ValueError("knots must be non-decreasing")
        if not knots[self.grid_size] > knots[self.degree]:
            raise ValueError("interior knot span is degenerate")

    @property
    def interior(self) -> tuple[float, float]:
        """The span ``[knots[p], knots[M]]`` on which the bases sum to one."""
        return float(self.knots[self.degree]), float(self.knots[self.grid_size])

    def supports(self) -> list[tuple[float, float]]:
        p = self.degree
        return [
            (float(self.knots[i]), float(self.knots[i + p + 1]))
            for i in range(self.grid_size)
        ]


def make_uniform_knots(lo: float, hi: float, grid_size: int = 8, degree: int = 3) -> KnotVector:
    """Equally spaced knots over ``[lo, hi]`` extended by ``degree`` cells per side.

    ``grid_size`` is the number of basis functions, so the interior is cut
    into ``grid_size - degree`` cells.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got lo={lo}, hi={hi}")
    if degree < 0:
        raise ValueError(f"degree must be non-negative, got {degree}")
    if grid_size < degree + 1:
        raise ValueError(f"grid_size must be at least degree + 1 = {degree + 1}, got {grid_size}")
    n_cells = grid_size - degree
    step = (hi - lo) / n_cells
    knots = lo + step * np.arange(-degree, n_cells + degree + 1, dtype=float)
    # pin the interior endpoints exactly
    knots[degree] = lo
    knots[grid_size] = hi
    return KnotVector(knots, degree, grid_size)


def _check_x(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("basis evaluation requires finite inputs")
    return x


def _safe_inv(d: np.ndarray) -> np.ndarray:
    return np.divide(1.0, d, out=np.zeros_like(d), where=d > 0)


def _basis_levels(knots: np.ndarray, x: np.ndarray, degree: int) -> list[np.ndarray]:
    """All recursion levels ``0..degree``; level ``q`` has shape ``x.shape + (m - q,)``."""
    t = knots
    xe = x[..., None]
    n0 = len(t) - 1
    left, right = t[:-1], t[1:]
    level = ((xe >= left) & (xe < right)).astype(float)
    # close the last non-empty cell on the right
    last = np.nonzero(right > left)[0][-1]
    level[..., last] = np.where(x == t[last + 1], 1.0, level[..., last])
    levels = [level]
    for q in range(1, degree + 1):
        n = n0 - q
        # zero-width spans carry a zero lower-degree basis, so their term is dropped
        inv_l = _safe_inv(t[q : q + n] - t[:n])
        inv_r = _safe_inv(t[q + 1 : q + 1 + n] - t[1 : 1 + n])
        level = (xe - t[:n]) * inv_l * level[..., :-1] + (t[q + 1 : q + 1 + n] - xe) * inv_r * level[..., 1:]
        levels.append(level)
    return levels


def basis_eval(kv: KnotVector, x) -> np.ndarray:
    """Values ``N_{i,p}(x)`` for all ``grid_size`` bases; shape ``x.shape + (M,)``."""
    x = _check_x(x)
    return _basis_levels(kv.knots, x, kv.degree)[-1]


def _dx_from_lower(kv: KnotVector, lower: np.ndarray) -> np.ndarray:
    t, p, M = kv.knots, kv.degree, kv.grid_size
    inv_l = p * _safe_inv(t[p : p + M] - t[:M])
    inv_r = p * _safe_inv(t[p + 1 : p + 1 + M] - t[1 : 1 + M])
    return lower[..., :-1] * inv_l - lower[..., 1:] * inv_r


def basis_eval_dx(kv: KnotVector, x) -> np.ndarray:
    """Input derivatives ``dN_{i,p}/dx``; identically zero for degree 0."""
    return basis_eval_with_dx(kv, x)[1]


def basis_eval_with_dx(kv: KnotVector, x) -> tuple[np.ndarray, np.ndarray]:
    """Values and input derivatives from a single recursion."""
    x = _check_x(x)
    levels = _basis_levels(kv.knots, x, kv.degree)
    if kv.degree == 0:
        return levels[-1], np.zeros(x.shape + (kv.grid_size,))
    return levels[-1], _dx_from_lower(kv, levels[-2])
