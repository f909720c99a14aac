"""Generalized Fourier-Feynman transforms and convolution products on S(L2[0,T]).

On a finitely-atomic measure the transform ``T_{q,h}`` multiplies each weight
by ``exp(-i ||u h||^2 / (2q))`` and the convolution ``(F*G)_q^{(k1,k2)}``
pairs atoms with phase ``exp(-i ||u k1 - v k2||^2 / (4q))`` at the point
``(u + v)/sqrt 2``.  The L_p index plays no role for these functionals and
is not part of the API.

The ``verify_*`` functions build every side of a relation independently and
compare them both as measures and at sample paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .functionals import (
    CylinderFunctional,
    canonicalize,
    measures_equal,
    pointwise_discrepancy,
    product,
    scale_argument,
)
from .kernels import (
    KernelFn,
    _check_grids,
    require_nonzero,
    s_combine,
)

SQRT2 = math.sqrt(2.0)
HYPOTHESIS_TOL = 1e-8


class HypothesisViolation(ValueError):
    """A kernel relation required by an identity does not hold."""


class SignConditionError(ValueError):
    """Parameters that must share a sign do not."""


def _check_q(q: float) -> float:
    q = float(q)
    if q == 0.0 or not math.isfinite(q):
        raise ValueError(f"parameter q must be finite and nonzero, got {q}")
    return q


@dataclass(frozen=True)
class TransformSpec:
    q: float
    h: KernelFn

    def __post_init__(self):
        object.__setattr__(self, "q", _check_q(self.q))
        require_nonzero(self.h, "transform kernel")


@dataclass(frozen=True)
class ConvolutionSpec:
    q: float
    k1: KernelFn
    k2: KernelFn

    def __post_init__(self):
        object.__setattr__(self, "q", _check_q(self.q))
        _check_grids(self.k1.grid, self.k2.grid)
        require_nonzero(self.k1, "convolution kernel k1")
        require_nonzero(self.k2, "convolution kernel k2")


def harmonic_parameter(qs: Sequence[float]) -> float:
    """``1 / sum_j (1/q_j)``."""
    return 1.0 / math.fsum(1.0 / _check_q(q) for q in qs)


def _same_sign(qs: Sequence[float]) -> bool:
    signs = {math.copysign(1.0, _check_q(q)) for q in qs}
    return len(signs) == 1


def _root(x: float) -> float:
    if not x > 0:
        raise SignConditionError(f"scale radicand {x} must be positive")
    return math.sqrt(x)


@dataclass(frozen=True)
class MixedChainSpec:
    specs: tuple[TransformSpec, ...]

    def __post_init__(self):
        specs = tuple(self.specs)
        if not specs:
            raise ValueError("chain must be nonempty")
        if not _same_sign([s.q for s in specs]):
            raise SignConditionError("all chain parameters must share one sign")
        object.__setattr__(self, "specs", specs)

    @classmethod
    def from_lists(cls, qs: Sequence[float], hs: Sequence[KernelFn]) -> "MixedChainSpec":
        if len(qs) != len(hs):
            raise ValueError("need one parameter per kernel")
        return cls(tuple(TransformSpec(q, h) for q, h in zip(qs, hs)))

    @property
    def alpha(self) -> float:
        return harmonic_parameter([s.q for s in self.specs])

    @property
    def taus(self) -> tuple[float, ...]:
        a = self.alpha
        return tuple(_root(a / s.q) for s in self.specs)

    def combined_kernel(self) -> KernelFn:
        return s_combine([t * s.h for t, s in zip(self.taus, self.specs)])

    def collapsed(self) -> TransformSpec:
        return TransformSpec(self.alpha, self.combined_kernel())


# --- the operations -----------------------------------------------------------


def _sq_norms(points: np.ndarray, k: KernelFn) -> np.ndarray:
    prod = points * k.values
    return (prod * prod) @ k.grid.simpson_weights


def gfft(F: CylinderFunctional, spec: TransformSpec) -> CylinderFunctional:
    _check_grids(F.grid, spec.h.grid)
    phase = np.exp(-0.5j / spec.q * _sq_norms(F.points, spec.h))
    return CylinderFunctional(F.grid, F.weights * phase, F.points)


def gfft_inverse(F: CylinderFunctional, spec: TransformSpec) -> CylinderFunctional:
    return gfft(F, TransformSpec(-spec.q, spec.h))


def gcp(F: CylinderFunctional, G: CylinderFunctional, spec: ConvolutionSpec) -> CylinderFunctional:
    """Convolution product; pass a negative ``q`` for the ``(.)_{-q}`` product."""
    grid = _check_grids(F.grid, G.grid, spec.k1.grid)
    if len(F) == 0 or len(G) == 0:
        return CylinderFunctional.empty(grid)
    wq = grid.simpson_weights
    a = F.points * spec.k1.values
    b = G.points * spec.k2.values
    diff = a[:, None, :] - b[None, :, :]
    sq = (diff * diff) @ wq
    w = np.outer(F.weights, G.weights) * np.exp(-0.25j / spec.q * sq)
    p = (F.points[:, None, :] + G.points[None, :, :]) / SQRT2
    return canonicalize(CylinderFunctional(grid, w.reshape(-1), p.reshape(-1, grid.n_nodes)))


def iterated_gfft(F: CylinderFunctional, specs: Sequence[TransformSpec]) -> CylinderFunctional:
    """Apply ``specs[0]`` first, then ``specs[1]``, and so on."""
    if not specs:
        raise ValueError("need at least one transform")
    for spec in specs:
        F = gfft(F, spec)
    return F


# --- verification -------------------------------------------------------------


@dataclass
class IdentityCheck:
    """Outcome of comparing the sides of one relation.

    ``comparisons`` maps a side-pair label to its measure discrepancy;
    ``pointwise`` holds the same for sample-path discrepancies.
    """

    identity: str
    passed: bool
    measure_discrepancy: float
    pointwise_discrepancy: float | None
    tol: float
    pointwise_tol: float | None
    comparisons: dict[str, float] = field(default_factory=dict)
    pointwise: dict[str, float] = field(default_factory=dict)

    def __bool__(self):
        return self.passed


def compare_sides(identity: str, sides: dict[str, CylinderFunctional], tol: float = 1e-9,
                  paths=None, pointwise_tol: float = 1e-8) -> IdentityCheck:
    """Pairwise measure (and optionally pointwise) comparison of named sides."""
    comparisons, pointwise = {}, {}
    passed = True
    for (na, A), (nb, B) in combinations(sides.items(), 2):
        cmp = measures_equal(A, B, tol)
        comparisons[f"{na}~{nb}"] = cmp.discrepancy
        passed &= cmp.equal
        if paths is not None:
            d = pointwise_discrepancy(A, B, paths)
            pointwise[f"{na}~{nb}"] = d
            passed &= d <= pointwise_tol
    return IdentityCheck(
        identity,
        bool(passed),
        max(comparisons.values(), default=0.0),
        max(pointwise.values(), default=0.0) if paths is not None else None,
        tol,
        pointwise_tol if paths is not None else None,
        comparisons,
        pointwise,
    )


def _relation_residual(lhs: np.ndarray, rhs: np.ndarray) -> tuple[float, float]:
    residual = float(np.max(np.abs(lhs - rhs)))
    scale = max(1.0, float(np.max(np.abs(lhs))), float(np.max(np.abs(rhs))))
    return residual, scale


def require_product_relation(h2: np.ndarray, a: np.ndarray, b: np.ndarray,
                             tol: float = HYPOTHESIS_TOL, what: str = "h^2 = k1 k2"):
    """Raise unless ``h2 == a*b`` at every node within ``tol * scale``."""
    residual, scale = _relation_residual(h2, a * b)
    if residual > tol * scale:
        raise HypothesisViolation(f"{what} fails: max residual {residual:.3e} "
                                  f"(allowed {tol * scale:.3e})")
    return residual


def require_same_sign(*qs: float, what: str = "parameters"):
    if not _same_sign(qs):
        raise SignConditionError(f"{what} must share one sign, got {qs}")


def gfft_inverse_check(F: CylinderFunctional, spec: TransformSpec, tol: float = 1e-10) -> IdentityCheck:
    back = gfft_inverse(gfft(F, spec), spec)
    return compare_sides("inverse", {"roundtrip": back, "F": F}, tol)


def rescale_parameter_check(F: CylinderFunctional, q: float, h: KernelFn, beta: float,
                            tol: float = 1e-12) -> IdentityCheck:
    """``T_{beta q, h} = T_{q, h/sqrt(beta)}`` for ``beta > 0``."""
    beta = float(beta)
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    lhs = gfft(F, TransformSpec(beta * q, h))
    rhs = gfft(F, TransformSpec(q, h / math.sqrt(beta)))
    return compare_sides("rescale", {"scaled-q": lhs, "scaled-h": rhs}, tol)


def collapse_equal_q(F: CylinderFunctional, q: float, hs: Sequence[KernelFn],
                     tol: float = 1e-9, paths=None, pointwise_tol: float = 1e-8) -> IdentityCheck:
    for h in hs:
        require_nonzero(h)
    chain = iterated_gfft(F, [TransformSpec(q, h) for h in hs])
    single = gfft(F, TransformSpec(q, s_combine(hs)))
    return compare_sides("iterated-collapse", {"iterated": chain, "combined": single},
                         tol, paths, pointwise_tol)


def collapse_mixed_q(F: CylinderFunctional, chain: MixedChainSpec, tol: float = 1e-9,
                     paths=None, pointwise_tol: float = 1e-8) -> IdentityCheck:
    iterated = iterated_gfft(F, chain.specs)
    a = chain.alpha
    rescaled = iterated_gfft(F, [TransformSpec(a, t * s.h) for t, s in zip(chain.taus, chain.specs)])
    single = gfft(F, chain.collapsed())
    return compare_sides("mixed-collapse",
                         {"iterated": iterated, "common-alpha": rescaled, "combined": single},
                         tol, paths, pointwise_tol)


def _scaled_product(F: CylinderFunctional, G: CylinderFunctional) -> CylinderFunctional:
    return product(scale_argument(F, 1 / SQRT2), scale_argument(G, 1 / SQRT2))


def verify_transform_of_convolution(F, G, h: KernelFn, k1: KernelFn, k2: KernelFn, q: float,
                                    paths=None, tol: float = 1e-9, pointwise_tol: float = 1e-8,
                                    hypothesis_tol: float = HYPOTHESIS_TOL) -> IdentityCheck:
    """``T_{q,h}((F*G)_q) (y) = T_{q,s(h,k1)/sqrt2}(F)(y/sqrt2) T_{q,s(h,k2)/sqrt2}(G)(y/sqrt2)``."""
    require_product_relation(h.values**2, k1.values, k2.values, hypothesis_tol)
    lhs = gfft(gcp(F, G, ConvolutionSpec(q, k1, k2)), TransformSpec(q, h))
    tf = gfft(F, TransformSpec(q, s_combine([h, k1]) / SQRT2))
    tg = gfft(G, TransformSpec(q, s_combine([h, k2]) / SQRT2))
    rhs = _scaled_product(tf, tg)
    return compare_sides("fft-of-gcp", {"lhs": lhs, "rhs": rhs}, tol, paths, pointwise_tol)


def verify_convolution_of_transforms(F, G, h: KernelFn, k1: KernelFn, k2: KernelFn, q: float,
                                     paths=None, tol: float = 1e-9, pointwise_tol: float = 1e-8,
                                     hypothesis_tol: float = HYPOTHESIS_TOL) -> IdentityCheck:
    """``(T_{q,s(h,k1)/sqrt2}F * T_{q,s(h,k2)/sqrt2}G)_{-q} = T_{q,h}(F(./sqrt2) G(./sqrt2))``."""
    require_product_relation(h.values**2, k1.values, k2.values, hypothesis_tol)
    tf = gfft(F, TransformSpec(q, s_combine([h, k1]) / SQRT2))
    tg = gfft(G, TransformSpec(q, s_combine([h, k2]) / SQRT2))
    lhs = gcp(tf, tg, ConvolutionSpec(-q, k1, k2))
    rhs = gfft(_scaled_product(F, G), TransformSpec(q, h))
    return compare_sides("gcp-of-fft", {"lhs": lhs, "rhs": rhs}, tol, paths, pointwise_tol)


def verify_equal_kernels(F, G, h: KernelFn, q: float, paths=None, tol: float = 1e-9,
                         pointwise_tol: float = 1e-8) -> IdentityCheck:
    """``(T_{q,h}F * T_{q,h}G)_{-q}^{(h,h)} = T_{q,h}(F(./sqrt2) G(./sqrt2))``, as written.

    With ``h = 1`` this is the classical transform/convolution relation.
    """
    spec = TransformSpec(q, h)
    lhs = gcp(gfft(F, spec), gfft(G, spec), ConvolutionSpec(-q, h, h))
    rhs = gfft(_scaled_product(F, G), spec)
    return compare_sides("equal-kernels", {"lhs": lhs, "rhs": rhs}, tol, paths, pointwise_tol)


def verify_iterated_convolution(F, G, hs: Sequence[KernelFn], k1: KernelFn, k2: KernelFn,
                                q: float, paths=None, tol: float = 1e-9,
                                pointwise_tol: float = 1e-8,
                                hypothesis_tol: float = HYPOTHESIS_TOL) -> IdentityCheck:
    """Chains ``h_1/sqrt2 .. h_n/sqrt2`` then ``k_i/sqrt2`` under ``s(H)^2 = k1 k2``."""
    sH = s_combine(hs)
    require_product_relation(sH.values**2, k1.values, k2.values, hypothesis_tol,
                             "s(H)^2 = k1 k2")
    conv = ConvolutionSpec(-q, k1, k2)
    chain = [TransformSpec(q, h / SQRT2) for h in hs]
    a = gcp(iterated_gfft(F, chain + [TransformSpec(q, k1 / SQRT2)]),
            iterated_gfft(G, chain + [TransformSpec(q, k2 / SQRT2)]), conv)
    b = gcp(gfft(F, TransformSpec(q, s_combine([*hs, k1]) / SQRT2)),
            gfft(G, TransformSpec(q, s_combine([*hs, k2]) / SQRT2)), conv)
    c = gfft(_scaled_product(F, G), TransformSpec(q, sH))
    return compare_sides("iterated-gcp", {"iterated": a, "combined": b, "product": c},
                         tol, paths, pointwise_tol)


def verify_iterated_convolution_split(F, G, h: KernelFn, k1s: Sequence[KernelFn],
                                      k2s: Sequence[KernelFn], q: float, paths=None,
                                      tol: float = 1e-9, pointwise_tol: float = 1e-8,
                                      hypothesis_tol: float = HYPOTHESIS_TOL) -> IdentityCheck:
    """Split chains ``K1``, ``K2`` with GCP kernels ``s(K1), s(K2)`` under ``h^2 = s(K1)s(K2)``."""
    sK1, sK2 = s_combine(k1s), s_combine(k2s)
    require_product_relation(h.values**2, sK1.values, sK2.values, hypothesis_tol,
                             "h^2 = s(K1) s(K2)")
    conv = ConvolutionSpec(-q, sK1, sK2)
    last = TransformSpec(q, h / SQRT2)
    a = gcp(iterated_gfft(F, [TransformSpec(q, k / SQRT2) for k in k1s] + [last]),
            iterated_gfft(G, [TransformSpec(q, k / SQRT2) for k in k2s] + [last]), conv)
    b = gcp(iterated_gfft(F, [TransformSpec(q, sK1 / SQRT2), last]),
            iterated_gfft(G, [TransformSpec(q, sK2 / SQRT2), last]), conv)
    c = gcp(gfft(F, TransformSpec(q, s_combine([h, sK1]) / SQRT2)),
            gfft(G, TransformSpec(q, s_combine([h, sK2]) / SQRT2)), conv)
    d = gfft(_scaled_product(F, G), TransformSpec(q, h))
    return compare_sides("iterated-gcp-split",
                         {"iterated": a, "chain-combined": b, "combined": c, "product": d},
                         tol, paths, pointwise_tol)


def verify_lemma_mixed_convolution(F, G, h: KernelFn, k1: KernelFn, k2: KernelFn, q: float,
                                   q1: float, q2: float, paths=None, tol: float = 1e-9,
                                   pointwise_tol: float = 1e-8,
                                   hypothesis_tol: float = HYPOTHESIS_TOL) -> IdentityCheck:
    """``(T_{q1, sqrt(q1/2q) s(h,k1)}F * T_{q2, sqrt(q2/2q) s(h,k2)}G)_{-q} = T_{q,h}(F(./sqrt2)G(./sqrt2))``."""
    require_same_sign(q, q1, q2)
    require_product_relation(h.values**2, k1.values, k2.values, hypothesis_tol)
    tf = gfft(F, TransformSpec(q1, _root(q1 / (2 * q)) * s_combine([h, k1])))
    tg = gfft(G, TransformSpec(q2, _root(q2 / (2 * q)) * s_combine([h, k2])))
    lhs = gcp(tf, tg, ConvolutionSpec(-q, k1, k2))
    rhs = gfft(_scaled_product(F, G), TransformSpec(q, h))
    return compare_sides("mixed-gcp", {"lhs": lhs, "rhs": rhs}, tol, paths, pointwise_tol)


def verify_grand_identity(F, G, h: KernelFn, hs1: Sequence[KernelFn], qs1: Sequence[float],
                          hs2: Sequence[KernelFn], qs2: Sequence[float], q: float,
                          q1: float | None = None, q2: float | None = None, paths=None,
                          tol: float = 1e-9, pointwise_tol: float = 1e-8,
                          hypothesis_tol: float = HYPOTHESIS_TOL) -> IdentityCheck:
    """Four-way chain for mixed-parameter iterated transforms under a GCP.

    ``q1`` and ``q2`` parametrize the outermost transform of each chain and
    default to ``q``.
    """
    q1 = q if q1 is None else q1
    q2 = q if q2 is None else q2
    require_same_sign(q, q1, q2, *qs1, *qs2)
    chain1 = MixedChainSpec.from_lists(qs1, hs1)
    chain2 = MixedChainSpec.from_lists(qs2, hs2)
    a1, a2 = chain1.alpha, chain2.alpha
    b1 = harmonic_parameter([q1, *qs1])
    b2 = harmonic_parameter([q2, *qs2])
    sk1, sk2 = chain1.combined_kernel(), chain2.combined_kernel()
    require_product_relation(h.values**2, sk1.values, sk2.values, hypothesis_tol,
                             "h^2 = s(tau1 H1) s(tau2 H2)")
    conv = ConvolutionSpec(-q, sk1, sk2)
    c1, c2 = _root(a1 / (2 * q)), _root(a2 / (2 * q))
    outer1 = TransformSpec(q1, _root(q1 / (2 * q)) * h)
    outer2 = TransformSpec(q2, _root(q2 / (2 * q)) * h)

    e1 = gcp(iterated_gfft(F, [TransformSpec(qj, c1 * hj) for qj, hj in zip(qs1, hs1)] + [outer1]),
             iterated_gfft(G, [TransformSpec(qj, c2 * hj) for qj, hj in zip(qs2, hs2)] + [outer2]),
             conv)
    e2 = gcp(iterated_gfft(F, [TransformSpec(a1, c1 * sk1), outer1]),
             iterated_gfft(G, [TransformSpec(a2, c2 * sk2), outer2]), conv)
    e3 = gcp(gfft(F, TransformSpec(b1, _root(b1 / (2 * q)) * s_combine([h, sk1]))),
             gfft(G, TransformSpec(b2, _root(b2 / (2 * q)) * s_combine([h, sk2]))), conv)
    e4 = gfft(_scaled_product(F, G), TransformSpec(q, h))
    return compare_sides("grand-chain",
                         {"iterated": e1, "collapsed-chains": e2, "combined": e3, "product": e4},
                         tol, paths, pointwise_tol)

