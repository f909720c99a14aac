"""Square-integrable functions on a uniform grid over [0, T].

Kernels serve two roles: as the integrands of Gaussian processes
``Z_h(x, t) = int_0^t h dx`` and as support points of the discrete measures
that define cylinder functionals.  All integrals are composite Simpson sums.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

ZERO_TOL = 1e-12


class GridMismatchError(ValueError):
    """Two objects that must share a grid do not."""


class ZeroKernelError(ValueError):
    """A kernel that must be nonzero in L2 has (numerically) zero norm."""


class RegistryError(KeyError):
    """Unknown built-in family name."""


@dataclass(frozen=True)
class Grid:
    """Uniform grid with ``n_intervals`` panels on ``[0, horizon]``."""

    horizon: float = 1.0
    n_intervals: int = 1024

    def __post_init__(self):
        if not (np.isfinite(self.horizon) and self.horizon > 0):
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if int(self.n_intervals) != self.n_intervals or self.n_intervals < 2:
            raise ValueError(f"n_intervals must be an integer >= 2, got {self.n_intervals}")
        if self.n_intervals % 2:
            raise ValueError("n_intervals must be even for Simpson quadrature")
        object.__setattr__(self, "horizon", float(self.horizon))
        object.__setattr__(self, "n_intervals", int(self.n_intervals))

    @property
    def step(self) -> float:
        return self.horizon / self.n_intervals

    @property
    def n_nodes(self) -> int:
        return self.n_intervals + 1

    @cached_property
    def nodes(self) -> np.ndarray:
        t = np.linspace(0.0, self.horizon, self.n_nodes)
        t.setflags(write=False)
        return t

    @cached_property
    def simpson_weights(self) -> np.ndarray:
        w = np.ones(self.n_nodes)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        w *= self.step / 3.0
        w.setflags(write=False)
        return w


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class KernelFn:
    """Grid samples of a function in L2[0, T].

    ``tag`` is a free-form descriptor used only in reports.
    """

    grid: Grid
    values: np.ndarray
    tag: str | None = field(default=None)

    def __post_init__(self):
        values = _frozen(self.values)
        if values.shape != (self.grid.n_nodes,):
            raise ValueError(
                f"expected {self.grid.n_nodes} samples, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError(f"kernel {self.tag or ''} has non-finite samples")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray], tag=None):
        return cls(grid, np.broadcast_to(fn(grid.nodes), grid.nodes.shape), tag)

    @classmethod
    def constant(cls, grid: Grid, c: float = 1.0, tag=None):
        return cls(grid, np.full(grid.n_nodes, float(c)), tag or f"const:{c:g}")

    def _other(self, other):
        if isinstance(other, KernelFn):
            _check_grids(self.grid, other.grid)
            return other.values
        return float(other)

    def __add__(self, other):
        return KernelFn(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return KernelFn(self.grid, self.values - self._other(other))

    def __mul__(self, other):
        if isinstance(other, KernelFn):
            return KernelFn(self.grid, self.values * self._other(other))
        c = float(other)
        tag = f"{c:g}*{self.tag}" if self.tag else None
        return KernelFn(self.grid, c * self.values, tag)

    __rmul__ = __mul__

    def __truediv__(self, c: float):
        return self * (1.0 / float(c))

    def __neg__(self):
        return self * -1.0

    def __abs__(self):
        return KernelFn(self.grid, np.abs(self.values), self.tag and f"|{self.tag}|")

    def norm(self) -> float:
        return l2_norm(self)

    def allclose(self, other: "KernelFn", atol: float = 0.0, rtol: float = 0.0) -> bool:
        _check_grids(self.grid, other.grid)
        return bool(np.allclose(self.values, other.values, atol=atol, rtol=rtol))

    def __repr__(self):
        return f"KernelFn(tag={self.tag!r}, n_nodes={self.grid.n_nodes})"


def _check_grids(*grids: Grid) -> Grid:
    first = grids[0]
    for g in grids[1:]:
        if g != first:
            raise GridMismatchError(f"grid {g} differs from {first}")
    return first


def l2_inner(a: KernelFn, b: KernelFn) -> float:
    """Composite Simpson approximation of ``int_0^T a(t) b(t) dt``."""
    grid = _check_grids(a.grid, b.grid)
    return float(np.dot(grid.simpson_weights, a.values * b.values))


def l2_norm(a: KernelFn) -> float:
    return float(np.sqrt(max(l2_inner(a, a), 0.0)))


def require_nonzero(k: KernelFn, what: str = "kernel") -> KernelFn:
    if l2_norm(k) <= ZERO_TOL:
        raise ZeroKernelError(f"{what} {k.tag or ''} has zero L2 norm")
    return k


def s_combine(hs: Sequence[KernelFn]) -> KernelFn:
    """Nonnegative root ``sqrt(sum_j h_j(t)^2)`` of a list of kernels.

    Any ``s`` with ``s^2 = sum h_j^2`` a.e. is equivalent for every formula in
    this package, since only ``||u s||^2`` ever enters.  The pointwise
    nonnegative root is the representative returned here.
    """
    hs = list(hs)
    if not hs:
        raise ValueError("s_combine needs at least one kernel")
    grid = _check_grids(*(h.grid for h in hs))
    for h in hs:
        require_nonzero(h)
    total = np.zeros(grid.n_nodes)
    for h in hs:
        total += h.values**2
    tags = [h.tag for h in hs]
    tag = f"s({', '.join(tags)})" if all(tags) else None
    return KernelFn(grid, np.sqrt(total), tag)


# --- solution sets of h^2 = k1 k2, s1^2 = h^2 + k1^2, s2^2 = h^2 + k2^2 -----


@dataclass(frozen=True, eq=False)
class SystemSolutionSet:
    h: KernelFn
    k1: KernelFn
    k2: KernelFn
    s1: KernelFn
    s2: KernelFn
    name: str = "custom"

    def __post_init__(self):
        _check_grids(self.h.grid, self.k1.grid, self.k2.grid, self.s1.grid, self.s2.grid)

    @property
    def grid(self) -> Grid:
        return self.h.grid

    @classmethod
    def from_kernels(cls, h: KernelFn, k1: KernelFn, k2: KernelFn, name="custom"):
        """Complete ``(h, k1, k2)`` with the canonical ``s(h, k1)``, ``s(h, k2)``."""
        return cls(h, k1, k2, s_combine([h, k1]), s_combine([h, k2]), name)

    def scaled(self, factor: float) -> "SystemSolutionSet":
        return SystemSolutionSet(
            self.h * factor, self.k1 * factor, self.k2 * factor,
            self.s1 * factor, self.s2 * factor, self.name,
        )


@dataclass(frozen=True)
class SystemCheck:
    residuals: tuple[float, float, float]
    tol: float
    scale: float

    @property
    def clause_passed(self) -> tuple[bool, bool, bool]:
        limit = self.tol * self.scale
        return tuple(r <= limit for r in self.residuals)

    @property
    def passed(self) -> bool:
        return all(self.clause_passed)

    def __bool__(self):
        return self.passed


def check_system(candidate: SystemSolutionSet, tol: float = 1e-10, *, relative: bool = True) -> SystemCheck:
    """Max-node residuals of the three clauses.

    With ``relative=True`` the threshold is ``tol * max(1, largest squared
    node value)``; residuals themselves are always absolute.
    """
    h, k1, k2 = candidate.h.values, candidate.k1.values, candidate.k2.values
    s1, s2 = candidate.s1.values, candidate.s2.values
    hh = h * h
    res = (
        float(np.max(np.abs(hh - k1 * k2))),
        float(np.max(np.abs(s1 * s1 - hh - k1 * k1))),
        float(np.max(np.abs(s2 * s2 - hh - k2 * k2))),
    )
    scale = 1.0
    if relative:
        mags = [hh, k1 * k1, k2 * k2, s1 * s1, s2 * s2, np.abs(k1 * k2)]
        scale = max(1.0, max(float(np.max(m)) for m in mags))
    return SystemCheck(res, tol, scale)


# --- built-in families --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class IteratedFamily:
    """Kernel sequences for the iterated-transform relations.

    ``hs`` is a chain whose combined kernel satisfies ``s(hs)^2 = k1 k2``;
    ``k1_chain``/``k2_chain`` are chains with ``h^2 = s(k1_chain) s(k2_chain)``.
    ``system`` is the induced solution set.
    """

    name: str
    system: SystemSolutionSet
    hs: tuple[KernelFn, ...]
    k1_chain: tuple[KernelFn, ...]
    k2_chain: tuple[KernelFn, ...]

    @property
    def grid(self) -> Grid:
        return self.system.grid


@dataclass(frozen=True)
class FamilyInfo:
    name: str
    title: str
    formulas: dict[str, str]
    builder: Callable[[Grid], "SystemSolutionSet | IteratedFamily"]


def _k(grid: Grid, fn, tag: str) -> KernelFn:
    with np.errstate(all="ignore"):
        vals = fn(grid.nodes)
    vals = np.broadcast_to(np.asarray(vals, dtype=float), grid.nodes.shape)
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"kernel {tag} is unbounded on [0, {grid.horizon}]")
    return KernelFn(grid, vals, tag)


def _poly(grid):
    return SystemSolutionSet(
        _k(grid, lambda t: 2 * t * (t**2 - 1), "2t(t^2-1)"),
        _k(grid, lambda t: (t**2 - 1) ** 2, "(t^2-1)^2"),
        _k(grid, lambda t: 4 * t**2, "4t^2"),
        _k(grid, lambda t: (t**2 - 1) * (t**2 + 1), "(t^2-1)(t^2+1)"),
        _k(grid, lambda t: 2 * t * (t**2 + 1), "2t(t^2+1)"),
        "poly",
    )


def _trig1(grid):
    return SystemSolutionSet(
        _k(grid, lambda t: np.sin(2 * t), "sin 2t"),
        _k(grid, lambda t: 2 * np.sin(t) ** 2, "2sin^2 t"),
        _k(grid, lambda t: 2 * np.cos(t) ** 2, "2cos^2 t"),
        _k(grid, lambda t: 2 * np.sin(t), "2sin t"),
        _k(grid, lambda t: 2 * np.cos(t), "2cos t"),
        "trig1",
    )


def _trig2(grid):
    r2 = np.sqrt(2.0)
    return SystemSolutionSet(
        _k(grid, lambda t: r2 * np.sin(t), "sqrt2 sin t"),
        _k(grid, lambda t: r2 * np.sin(t) * np.tan(t), "sqrt2 sin t tan t"),
        _k(grid, lambda t: r2 * np.cos(t), "sqrt2 cos t"),
        _k(grid, lambda t: r2 * np.tan(t), "sqrt2 tan t"),
        _k(grid, lambda t: r2 + 0 * t, "sqrt2"),
        "trig2",
    )


def _hyperbolic(grid):
    return SystemSolutionSet(
        _k(grid, lambda t: 1 + 0 * t, "1"),
        _k(grid, lambda t: np.sinh(t + 0.5), "sinh(t+1/2)"),
        _k(grid, lambda t: 1 / np.sinh(t + 0.5), "csch(t+1/2)"),
        _k(grid, lambda t: np.cosh(t + 0.5), "cosh(t+1/2)"),
        _k(grid, lambda t: 1 / np.tanh(t + 0.5), "coth(t+1/2)"),
        "hyperbolic",
    )


def _theta(t):
    return np.pi / 4 * (t + 0.5)


def _sec_family(grid):
    sin_ = _k(grid, lambda t: np.sin(_theta(t)), "sin th")
    cos_ = _k(grid, lambda t: np.cos(_theta(t)), "cos th")
    tan_ = _k(grid, lambda t: np.tan(_theta(t)), "tan th")
    h = _k(grid, lambda t: 1 / np.cos(_theta(t)), "sec th")
    k1 = _k(grid, lambda t: np.tan(_theta(t)), "tan th")
    k2 = _k(grid, lambda t: 1 / (np.cos(_theta(t)) * np.sin(_theta(t))), "sec th csc th")
    s1 = _k(grid, lambda t: np.sqrt(1 / np.cos(_theta(t)) ** 2 + np.tan(_theta(t)) ** 2),
            "sqrt(sec^2 th + tan^2 th)")
    s2 = _k(grid, lambda t: np.sqrt(1 / np.cos(_theta(t)) ** 2
                                    + 1 / (np.cos(_theta(t)) * np.sin(_theta(t))) ** 2),
            "sqrt(sec^2 th + sec^2 th csc^2 th)")
    system = SystemSolutionSet(h, k1, k2, s1, s2, "sec-family")
    return IteratedFamily("sec-family", system, (sin_, cos_, tan_), (k1,), (k2,))


def _mixed_hyp_trig(grid):
    def h_fn(t):
        return 2 * np.sqrt(np.cosh(_theta(t)) / np.sin(_theta(t)))

    def k1_fn(t):
        return 2 / np.sin(_theta(t))

    def k2_fn(t):
        return 2 * np.cosh(_theta(t))

    r2 = np.sqrt(2.0)
    h = _k(grid, h_fn, "2sqrt(csc th cosh th)")
    k1 = _k(grid, k1_fn, "2csc th")
    k2 = _k(grid, k2_fn, "2cosh th")
    s1 = _k(grid, lambda t: np.sqrt(h_fn(t) ** 2 + k1_fn(t) ** 2), "sqrt(h^2 + 4csc^2 th)")
    s2 = _k(grid, lambda t: np.sqrt(h_fn(t) ** 2 + k2_fn(t) ** 2), "sqrt(h^2 + 4cosh^2 th)")
    k1_chain = (
        _k(grid, lambda t: 2 * np.tanh(_theta(t)), "2tanh th"),
        _k(grid, lambda t: 2 / np.cosh(_theta(t)), "2sech th"),
        _k(grid, lambda t: 2 / np.tan(_theta(t)), "2cot th"),
    )
    k2_chain = (
        _k(grid, lambda t: r2 * np.sin(_theta(t)), "sqrt2 sin th"),
        _k(grid, lambda t: r2 * np.cos(_theta(t)), "sqrt2 cos th"),
        _k(grid, lambda t: r2 * np.sinh(_theta(t)), "sqrt2 sinh th"),
        _k(grid, lambda t: r2 * np.cosh(_theta(t)), "sqrt2 cosh th"),
    )
    system = SystemSolutionSet(h, k1, k2, s1, s2, "mixed-hyp-trig")
    return IteratedFamily("mixed-hyp-trig", system, (h,), k1_chain, k2_chain)


FAMILIES: dict[str, FamilyInfo] = {
    info.name: info
    for info in [
        FamilyInfo("poly", "Polynomials", {
            "h": "2t(t^2-1)", "k1": "(t^2-1)^2", "k2": "4t^2",
            "s1": "(t^2-1)(t^2+1)", "s2": "2t(t^2+1)"}, _poly),
        FamilyInfo("trig1", "Trigonometric functions I", {
            "h": "sin 2t", "k1": "2sin^2 t", "k2": "2cos^2 t",
            "s1": "2sin t", "s2": "2cos t"}, _trig1),
        FamilyInfo("trig2", "Trigonometric functions II", {
            "h": "sqrt2 sin t", "k1": "sqrt2 sin t tan t", "k2": "sqrt2 cos t",
            "s1": "sqrt2 tan t", "s2": "sqrt2"}, _trig2),
        FamilyInfo("hyperbolic", "Hyperbolic functions", {
            "h": "1", "k1": "sinh(t+1/2)", "k2": "csch(t+1/2)",
            "s1": "cosh(t+1/2)", "s2": "coth(t+1/2)"}, _hyperbolic),
        FamilyInfo("sec-family", "Iterated chain with s(H) = sec th, th = (pi/4)(t+1/2)", {
            "H": "{sin th, cos th, tan th}", "h=s(H)": "sec th",
            "k1": "tan th", "k2": "sec th csc th"}, _sec_family),
        FamilyInfo("mixed-hyp-trig", "Trigonometric/hyperbolic chains, th = (pi/4)(t+1/2)", {
            "h": "2sqrt(csc th cosh th)",
            "K1": "{2tanh th, 2sech th, 2cot th}", "s(K1)": "2csc th",
            "K2": "{sqrt2 sin th, sqrt2 cos th, sqrt2 sinh th, sqrt2 cosh th}",
            "s(K2)": "2cosh th"}, _mixed_hyp_trig),
    ]
}

SYSTEM_FAMILIES = ("poly", "trig1", "trig2", "hyperbolic")


def builtin_family(name: str, grid: Grid | None = None) -> "SystemSolutionSet | IteratedFamily":
    """Sample a registered family on ``grid`` (default grid if omitted)."""
    try:
        info = FAMILIES[name]
    except KeyError:
        raise RegistryError(f"unknown family {name!r}; known: {sorted(FAMILIES)}") from None
    return info.builder(grid or Grid())


def family_system(name: str, grid: Grid | None = None) -> SystemSolutionSet:
    fam = builtin_family(name, grid)
    return fam.system if isinstance(fam, IteratedFamily) else fam


def family_kernels(name: str, grid: Grid | None = None) -> list[KernelFn]:
    """Every distinct kernel a family defines, in a fixed order."""
    fam = builtin_family(name, grid)
    system = fam.system if isinstance(fam, IteratedFamily) else fam
    out = [system.h, system.k1, system.k2, system.s1, system.s2]
    if isinstance(fam, IteratedFamily):
        out.extend(fam.hs + fam.k1_chain + fam.k2_chain)
    seen, unique = [], []
    for k in out:
        if not any(np.array_equal(k.values, s) for s in seen):
            seen.append(k.values)
            unique.append(k)
    return unique


def iter_families(names: Iterable[str] | None = None):
    for name in names if names is not None else FAMILIES:
        yield name, FAMILIES[name]
