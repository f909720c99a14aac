"""Cylinder functionals ``F(x) = sum_j c_j exp(i <u_j, x>)``.

A functional is stored as its finitely-atomic complex measure: a weight vector
and a stack of support points (one kernel per row).  Everything here acts on
that measure directly, so equality of functionals reduces to comparing atoms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .kernels import Grid, GridMismatchError, KernelFn, _check_grids

DROP_TOL = 1e-12
MERGE_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class SamplePath:
    """A path in C_0[0, T] sampled at grid nodes."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.shape != (self.grid.n_nodes,):
            raise ValueError(f"expected {self.grid.n_nodes} samples, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("sample path has non-finite values")
        if values[0] != 0.0:
            raise ValueError("sample path must start at 0")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, grid: Grid, fn):
        return cls(grid, np.broadcast_to(fn(grid.nodes), grid.nodes.shape))

    def __mul__(self, rho: float) -> "SamplePath":
        return SamplePath(self.grid, float(rho) * self.values)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class CylinderFunctional:
    grid: Grid
    weights: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=complex, copy=True).reshape(-1)
        p = np.array(self.points, dtype=float, copy=True).reshape(len(w), self.grid.n_nodes)
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(p))):
            raise ValueError("functional has non-finite weights or points")
        w.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "points", p)

    @classmethod
    def empty(cls, grid: Grid) -> "CylinderFunctional":
        return cls(grid, np.zeros(0, complex), np.zeros((0, grid.n_nodes)))

    @classmethod
    def from_atoms(cls, grid: Grid, atoms: Iterable[tuple[complex, KernelFn]]):
        atoms = list(atoms)
        for _, u in atoms:
            _check_grids(grid, u.grid)
        if not atoms:
            return cls.empty(grid)
        return cls(grid, [c for c, _ in atoms], np.stack([u.values for _, u in atoms]))

    @classmethod
    def delta(cls, u: KernelFn, weight: complex = 1.0) -> "CylinderFunctional":
        return cls.from_atoms(u.grid, [(weight, u)])

    @property
    def atoms(self) -> list[tuple[complex, KernelFn]]:
        return [(complex(c), KernelFn(self.grid, p)) for c, p in zip(self.weights, self.points)]

    def __len__(self):
        return len(self.weights)

    def total_variation(self) -> float:
        return float(np.sum(np.abs(self.weights)))

    def __add__(self, other: "CylinderFunctional") -> "CylinderFunctional":
        _check_grids(self.grid, other.grid)
        return CylinderFunctional(
            self.grid,
            np.concatenate([self.weights, other.weights]),
            np.concatenate([self.points, other.points]),
        )

    def __mul__(self, c: complex) -> "CylinderFunctional":
        if isinstance(c, CylinderFunctional):
            raise TypeError("use product(F, G) for the pointwise product of functionals")
        return CylinderFunctional(self.grid, complex(c) * self.weights, self.points)

    __rmul__ = __mul__

    def __repr__(self):
        return f"CylinderFunctional(n_atoms={len(self)}, grid={self.grid})"


def _midpoints(values: np.ndarray) -> np.ndarray:
    return 0.5 * (values[..., 1:] + values[..., :-1])


def _path_matrix(paths, grid: Grid) -> np.ndarray:
    if isinstance(paths, SamplePath):
        paths = [paths]
    if isinstance(paths, np.ndarray):
        arr = np.atleast_2d(paths)
    else:
        for y in paths:
            _check_grids(grid, y.grid)
        arr = np.stack([y.values for y in paths]) if paths else np.zeros((0, grid.n_nodes))
    if arr.shape[-1] != grid.n_nodes:
        raise GridMismatchError(f"paths have {arr.shape[-1]} nodes, grid has {grid.n_nodes}")
    return arr


def pwz_integral(u: KernelFn, y: SamplePath) -> float:
    """Stieltjes sum ``sum_i ubar_i (y_{i+1} - y_i)`` with ``ubar`` the node average."""
    _check_grids(u.grid, y.grid)
    return float(np.dot(_midpoints(u.values), np.diff(y.values)))


def pwz_matrix(points: np.ndarray, paths: np.ndarray) -> np.ndarray:
    """PWZ integrals of every point (rows) against every path (rows).

    Returns shape ``(n_paths, n_points)``.
    """
    return np.diff(paths, axis=-1) @ _midpoints(points).T


def evaluate(F: CylinderFunctional, y: SamplePath) -> complex:
    _check_grids(F.grid, y.grid)
    return complex(evaluate_many(F, [y])[0])


def evaluate_many(F: CylinderFunctional, paths) -> np.ndarray:
    """``F`` at each path; accepts a sequence of SamplePath or an (n, nodes) array."""
    arr = _path_matrix(paths, F.grid)
    if len(F) == 0:
        return np.zeros(len(arr), complex)
    return np.exp(1j * pwz_matrix(F.points, arr)) @ F.weights


def scale_argument(F: CylinderFunctional, rho: float) -> CylinderFunctional:
    """The functional ``y -> F(rho y)``."""
    rho = float(rho)
    if rho == 0.0 or not np.isfinite(rho):
        raise ValueError("scale factor must be finite and nonzero")
    return CylinderFunctional(F.grid, F.weights, rho * F.points)


def product(F: CylinderFunctional, G: CylinderFunctional, **canon) -> CylinderFunctional:
    grid = _check_grids(F.grid, G.grid)
    if len(F) == 0 or len(G) == 0:
        return CylinderFunctional.empty(grid)
    w = np.outer(F.weights, G.weights).reshape(-1)
    p = (F.points[:, None, :] + G.points[None, :, :]).reshape(-1, grid.n_nodes)
    return canonicalize(CylinderFunctional(grid, w, p), **canon)


def _sq_dists(points: np.ndarray, ref: np.ndarray, weights: np.ndarray) -> np.ndarray:
    diff = points - ref
    return np.maximum((diff * diff) @ weights, 0.0)


def canonicalize(F: CylinderFunctional, merge_rtol: float = MERGE_RTOL,
                 drop_tol: float = DROP_TOL) -> CylinderFunctional:
    """Merge atoms closer than ``merge_rtol * max(1, norms)`` and drop negligible ones.

    Clusters are grown greedily in atom order around the first unassigned
    atom, whose point is kept as the representative.
    """
    n = len(F)
    if n == 0:
        return F
    wq = F.grid.simpson_weights
    norms = np.sqrt(np.maximum((F.points**2) @ wq, 0.0))
    assigned = np.zeros(n, bool)
    weights, points = [], []
    for i in range(n):
        if assigned[i]:
            continue
        rest = np.flatnonzero(~assigned)
        d = np.sqrt(_sq_dists(F.points[rest], F.points[i], wq))
        tol = merge_rtol * np.maximum(1.0, np.maximum(norms[rest], norms[i]))
        members = rest[d <= tol]
        assigned[members] = True
        weights.append(F.weights[members].sum())
        points.append(F.points[i])
    weights = np.array(weights)
    keep = np.abs(weights) > drop_tol
    if not keep.any():
        return CylinderFunctional.empty(F.grid)
    return CylinderFunctional(F.grid, weights[keep], np.stack(points)[keep])


@dataclass(frozen=True)
class MeasureComparison:
    equal: bool
    discrepancy: float

    def __bool__(self):
        return self.equal


def measures_equal(F: CylinderFunctional, G: CylinderFunctional, tol: float = 1e-9,
                   **canon) -> MeasureComparison:
    """Compare canonical measures by greedy nearest-point pairing.

    The discrepancy is the worst of: matched point distance, matched weight
    difference, and the modulus of any unmatched atom.
    """
    grid = _check_grids(F.grid, G.grid)
    A, B = canonicalize(F, **canon), canonicalize(G, **canon)
    wq = grid.simpson_weights
    free = np.ones(len(B), bool)
    worst = 0.0
    equal = True
    for c, p in zip(A.weights, A.points):
        idx = np.flatnonzero(free)
        if len(idx) == 0:
            worst = max(worst, abs(c))
            equal = False
            continue
        d = np.sqrt(_sq_dists(B.points[idx], p, wq))
        j = idx[int(np.argmin(d))]
        free[j] = False
        dist, dw = float(d.min()), float(abs(c - B.weights[j]))
        worst = max(worst, dist, dw)
        equal &= dist <= tol and dw <= tol
    if free.any():
        worst = max(worst, float(np.max(np.abs(B.weights[free]))))
        equal = False
    return MeasureComparison(bool(equal), float(worst))


def pointwise_discrepancy(F: CylinderFunctional, G: CylinderFunctional, paths) -> float:
    """Max ``|F(y) - G(y)|`` over the paths, relative to the larger total variation.

    ``sum |c_j|`` bounds ``|F(y)|`` for every ``y``, so it is the scale used.
    """
    _check_grids(F.grid, G.grid)
    arr = _path_matrix(paths, F.grid)
    if len(arr) == 0:
        return 0.0
    diff = np.abs(evaluate_many(F, arr) - evaluate_many(G, arr))
    scale = max(F.total_variation(), G.total_variation(), np.finfo(float).tiny)
    return float(diff.max() / scale)


def linear_combination(terms: Sequence[tuple[complex, CylinderFunctional]]) -> CylinderFunctional:
    if not terms:
        raise ValueError("empty combination")
    out = terms[0][1] * terms[0][0]
    for a, F in terms[1:]:
        out = out + F * a
    return canonicalize(out)
