"""Monte Carlo estimates of generalized Wiener integrals at real ``lambda > 0``.

Paths are Brownian motion at grid resolution.  Path ``i`` is row
``i % BLOCK`` of block ``i // BLOCK``; each block has its own Philox stream
keyed by ``(seed, block)``, so a path depends only on ``(seed, i)`` and never
on how the sampling is chunked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .functionals import CylinderFunctional, SamplePath, _midpoints
from .kernels import Grid, KernelFn, _check_grids, l2_norm, require_nonzero, s_combine

BLOCK = 1024
DEFAULT_SEED = 20190301


@dataclass(frozen=True)
class McConfig:
    n_samples: int = 100_000
    seed: int = DEFAULT_SEED
    lambdas: tuple[float, ...] = (0.5, 1.0, 2.0)
    grid: Grid = field(default_factory=lambda: Grid(1.0, 256))

    def __post_init__(self):
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise ValueError("n_samples must be a positive integer")
        if any(not lam > 0 for lam in self.lambdas):
            raise ValueError("every lambda must be positive")
        object.__setattr__(self, "lambdas", tuple(float(x) for x in self.lambdas))


@dataclass(frozen=True)
class McEstimate:
    mean: complex
    std_error: float
    n_samples: int

    def within(self, target: complex, n_sigma: float = 3.0) -> bool:
        return abs(self.mean - target) <= n_sigma * self.std_error


def _block_rng(seed: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=(block,))
    return np.random.Generator(np.random.Philox(ss))


def brownian_increments(grid: Grid, seed: int, n_paths: int, start: int = 0):
    """Yield increment blocks for paths ``start .. start+n_paths-1`` in order.

    Each yielded array has shape ``(rows, n_intervals)``.
    """
    stop = start + n_paths
    sd = math.sqrt(grid.step)
    i = start
    while i < stop:
        block, row = divmod(i, BLOCK)
        rows = min(BLOCK - row, stop - i)
        z = _block_rng(seed, block).standard_normal((row + rows, grid.n_intervals))
        yield sd * z[row:]
        i += rows


def brownian_paths(grid: Grid, seed: int, n_paths: int, start: int = 0) -> np.ndarray:
    """Paths as an ``(n_paths, n_nodes)`` array with a zero first column."""
    out = np.zeros((n_paths, grid.n_nodes))
    r = 0
    for dx in brownian_increments(grid, seed, n_paths, start):
        np.cumsum(dx, axis=1, out=out[r:r + len(dx), 1:])
        r += len(dx)
    return out


def sample_brownian(grid: Grid, seed: int, index: int) -> SamplePath:
    return SamplePath(grid, brownian_paths(grid, seed, 1, index)[0])


def _mean_and_error(vals: np.ndarray) -> tuple[complex, float]:
    n = len(vals)
    mean = complex(math.fsum(vals.real) / n, math.fsum(vals.imag) / n)
    if n < 2:
        return mean, math.inf
    dev = vals - mean
    var = math.fsum((dev.real**2 + dev.imag**2)) / (n - 1)
    return mean, math.sqrt(var / n)


def mc_generalized_wiener_integral(F: CylinderFunctional, h: KernelFn, lam: float,
                                   cfg: McConfig) -> McEstimate:
    """Sample mean of ``F(lam^{-1/2} Z_h(x, .))`` over Brownian ``x``.

    Uses ``<u, Z_h(x)> = <u h, x>``.  The standard error is the jackknife
    estimate of the mean, ``s / sqrt(n)`` with ``s^2`` the total (real plus
    imaginary) sample variance.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive; complex parameters are closed-form only")
    _check_grids(F.grid, h.grid, cfg.grid)
    require_nonzero(h)
    n = cfg.n_samples
    if len(F) == 0:
        return McEstimate(0j, 0.0, n)
    mids = _midpoints(F.points * h.values) / math.sqrt(lam)
    vals = np.empty(n, complex)
    r = 0
    for dx in brownian_increments(cfg.grid, cfg.seed, n):
        vals[r:r + len(dx)] = np.exp(1j * (dx @ mids.T)) @ F.weights
        r += len(dx)
    mean, err = _mean_and_error(vals)
    return McEstimate(mean, err, n)


def closed_form_wiener_integral(F: CylinderFunctional, h: KernelFn, lam: float) -> complex:
    """``sum_j c_j exp(-||u_j h||^2 / (2 lam))``, the Gaussian characteristic function."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    _check_grids(F.grid, h.grid)
    if len(F) == 0:
        return 0j
    prod = F.points * h.values
    sq = (prod * prod) @ F.grid.simpson_weights
    return complex(np.exp(-sq / (2.0 * lam)) @ F.weights)


@dataclass(frozen=True)
class VarianceCheck:
    sample_variance: float
    expected: float
    sigma: float
    n_samples: int
    n_sigma: float = 4.0

    @property
    def z(self) -> float:
        if self.sigma == 0:
            return 0.0 if self.sample_variance == self.expected else math.inf
        return (self.sample_variance - self.expected) / self.sigma

    @property
    def passed(self) -> bool:
        return abs(self.sample_variance - self.expected) <= self.n_sigma * self.sigma

    def __bool__(self):
        return self.passed


def check_variance_of_Zs(h1: KernelFn, h2: KernelFn, cfg: McConfig,
                         n_sigma: float = 4.0) -> VarianceCheck:
    """Sample variance of ``Z_s(x, T)`` for ``s = s(h1, h2)`` against ``||h1||^2 + ||h2||^2``.

    ``sigma`` is the plug-in standard error of the sample variance,
    ``sqrt((m4 - m2^2) / n)``.
    """
    _check_grids(h1.grid, h2.grid, cfg.grid)
    s = s_combine([h1, h2])
    w = _midpoints(s.values)
    n = cfg.n_samples
    z = np.empty(n)
    r = 0
    for dx in brownian_increments(cfg.grid, cfg.seed, n):
        z[r:r + len(dx)] = dx @ w
        r += len(dx)
    expected = l2_norm(h1) ** 2 + l2_norm(h2) ** 2
    if n < 2:
        return VarianceCheck(0.0, expected, math.inf, n, n_sigma)
    mean = math.fsum(z) / n
    dev2 = (z - mean) ** 2
    var = math.fsum(dev2) / (n - 1)
    m2 = math.fsum(dev2) / n
    m4 = math.fsum(dev2 * dev2) / n
    sigma = math.sqrt(max(m4 - m2 * m2, 0.0) / n)
    return VarianceCheck(var, expected, sigma, n, n_sigma)
