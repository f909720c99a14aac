import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wiener_gfft.kernels import (
    FAMILIES,
    Grid,
    GridMismatchError,
    IteratedFamily,
    KernelFn,
    RegistryError,
    SystemSolutionSet,
    ZeroKernelError,
    builtin_family,
    check_system,
    family_kernels,
    family_system,
    l2_inner,
    l2_norm,
    s_combine,
)


def k(grid, fn):
    return KernelFn.from_callable(grid, fn)


class TestGrid:
    def test_nodes_and_spacing(self):
        g = Grid(2.0, 8)
        assert g.nodes[0] == 0.0 and g.nodes[-1] == 2.0
        assert np.allclose(np.diff(g.nodes), 0.25)

    @pytest.mark.parametrize("n", [0, 3, 7, -2])
    def test_rejects_odd_or_small(self, n):
        with pytest.raises(ValueError):
            Grid(1.0, n)

    def test_rejects_nonpositive_horizon(self):
        with pytest.raises(ValueError):
            Grid(0.0, 4)

    def test_simpson_weights_sum_to_horizon(self):
        g = Grid(3.0, 10)
        assert math.isclose(g.simpson_weights.sum(), 3.0)


class TestInner:
    def test_constant(self, grid):
        one = KernelFn.constant(grid)
        assert math.isclose(l2_inner(one, one), 1.0, rel_tol=1e-14)

    def test_t_squared(self, grid):
        t = k(grid, lambda t: t)
        assert math.isclose(l2_inner(t, t), 1 / 3, rel_tol=1e-14)

    def test_t_one_minus_t(self, grid):
        assert math.isclose(l2_inner(k(grid, lambda t: t), k(grid, lambda t: 1 - t)), 1 / 6,
                            rel_tol=1e-14)

    @pytest.mark.parametrize("deg", [0, 1, 2, 3])
    def test_exact_for_cubics_on_coarse_grid(self, deg):
        g = Grid(1.5, 2)
        mono = KernelFn.from_callable(g, lambda t: t**deg)
        one = KernelFn.constant(g)
        assert math.isclose(l2_inner(mono, one), 1.5 ** (deg + 1) / (deg + 1), rel_tol=1e-14)

    def test_smooth_trig_accuracy(self, grid):
        s = k(grid, np.sin)
        exact = 0.5 - math.sin(2.0) / 4
        assert abs(l2_inner(s, s) - exact) < 1e-12

    def test_norm_is_root_of_inner(self, grid):
        u = k(grid, lambda t: np.exp(t))
        assert math.isclose(l2_norm(u), math.sqrt(l2_inner(u, u)))

    def test_grid_mismatch(self, grid, small_grid):
        with pytest.raises(GridMismatchError):
            l2_inner(KernelFn.constant(grid), KernelFn.constant(small_grid))


class TestKernelFn:
    def test_values_are_read_only(self, grid):
        u = KernelFn.constant(grid)
        with pytest.raises(ValueError):
            u.values[0] = 2.0

    def test_rejects_wrong_length_and_nonfinite(self, grid):
        with pytest.raises(ValueError):
            KernelFn(grid, np.ones(3))
        vals = np.ones(grid.n_nodes)
        vals[4] = np.nan
        with pytest.raises(ValueError):
            KernelFn(grid, vals)


class TestSCombine:
    def test_five_term_polynomial(self, grid):
        hs = [k(grid, lambda t: t**4), k(grid, lambda t: math.sqrt(2) * t**3),
              k(grid, lambda t: math.sqrt(3) * t**2), k(grid, lambda t: math.sqrt(2) * t),
              KernelFn.constant(grid)]
        s = s_combine(hs)
        assert np.allclose(s.values, grid.nodes**4 + grid.nodes**2 + 1, rtol=0, atol=1e-14)

    def test_alternative_representation_same_class(self, grid):
        t = grid.nodes
        gs = [KernelFn(grid, -t**4 - 1), KernelFn(grid, math.sqrt(2) * t * np.sqrt(t**4 + 1)),
              KernelFn(grid, t**2)]
        assert np.allclose(s_combine(gs).values, t**4 + t**2 + 1, atol=1e-14)

    def test_two_term_example(self, grid):
        t = grid.nodes
        s = s_combine([KernelFn(grid, t**4 + t**2), KernelFn(grid, t**4 - t**2)])
        assert np.allclose(s.values, np.sqrt(2 * (t**8 + t**4)), atol=1e-14)
        s_alt = s_combine([KernelFn(grid, math.sqrt(2) * (t**4 - t**2)),
                           KernelFn(grid, 2 * t**3)])
        assert np.allclose(s_alt.values, s.values, atol=1e-14)

    def test_single_kernel_is_abs(self, grid):
        h = k(grid, lambda t: np.cos(5 * t))
        assert np.array_equal(s_combine([h]).values, np.abs(h.values))

    def test_trig_hyperbolic_identities(self, grid):
        t = grid.nodes
        one = KernelFn.constant(grid)
        a = np.pi / 4 * t
        sec = s_combine([one, KernelFn(grid, np.tan(a))])
        assert np.allclose(sec.values, 1 / np.cos(a), atol=1e-14)
        three = s_combine([k(grid, np.sin), k(grid, np.cos), KernelFn(grid, np.tan(a))])
        assert np.allclose(three.values, sec.values, atol=1e-14)
        cosh = s_combine([-one, k(grid, np.sinh)])
        assert np.allclose(cosh.values, np.cosh(t), atol=1e-14)
        coth = s_combine([-k(grid, np.sin), k(grid, np.cos), KernelFn(grid, -1 / np.sinh(t + 0.5))])
        # the class contains -coth; the canonical representative is its absolute value
        assert np.allclose(coth.values, np.abs(-1 / np.tanh(t + 0.5)), atol=1e-13)

    def test_empty_and_zero(self, grid):
        with pytest.raises(ValueError):
            s_combine([])
        with pytest.raises(ZeroKernelError):
            s_combine([KernelFn.constant(grid), KernelFn.constant(grid, 0.0)])

    @given(st.lists(st.tuples(st.integers(0, 5), st.floats(0.1, 3.0), st.booleans()),
                    min_size=1, max_size=5),
           st.integers(0, 5))
    def test_sign_class_invariance(self, spec, ui):
        g = Grid(1.0, 64)
        base = [np.ones_like, lambda t: t, np.sin, np.cos, np.exp, lambda t: 1 + t**2]
        hs = [KernelFn(g, a * base[i](g.nodes)) for i, a, _ in spec]
        flipped = [-h if f else h for h, (_, _, f) in zip(hs, spec)]
        s = s_combine(hs)
        assert np.array_equal(s.values, s_combine(flipped).values)
        u = KernelFn(g, base[ui](g.nodes))
        lhs = l2_norm(u * s) ** 2
        rhs = sum(l2_norm(u * h) ** 2 for h in hs)
        assert math.isclose(lhs, rhs, rel_tol=1e-12)

    @given(st.lists(st.floats(0.1, 3.0), min_size=2, max_size=6))
    def test_induction(self, scales):
        g = Grid(1.0, 32)
        hs = [KernelFn(g, a * (1 + j * g.nodes)) for j, a in enumerate(scales)]
        nested = s_combine([s_combine(hs[:-1]), hs[-1]])
        assert np.allclose(nested.values, s_combine(hs).values, rtol=1e-15, atol=0)


POLY_FNS = (lambda t: 2 * t * (t**2 - 1), lambda t: (t**2 - 1) ** 2, lambda t: 4 * t**2,
            lambda t: (t**2 - 1) * (t**2 + 1), lambda t: 2 * t * (t**2 + 1))


class TestSystem:
    def test_polynomial_set(self, grid):
        cand = SystemSolutionSet(*(k(grid, f) for f in POLY_FNS))
        assert check_system(cand)

    def test_trig_set(self, grid):
        fns = (lambda t: np.sin(2 * t), lambda t: 2 * np.sin(t) ** 2,
               lambda t: 2 * np.cos(t) ** 2, lambda t: 2 * np.sin(t), lambda t: 2 * np.cos(t))
        assert check_system(SystemSolutionSet(*(k(grid, f) for f in fns)))

    def test_constants(self, grid):
        one, r2 = KernelFn.constant(grid), KernelFn.constant(grid, math.sqrt(2))
        assert check_system(SystemSolutionSet(one, one, one, r2, r2))

    def test_failing_clause_one(self, grid):
        one, two = KernelFn.constant(grid), KernelFn.constant(grid, 2.0)
        chk = check_system(SystemSolutionSet(one, one, two, one, one))
        assert not chk
        assert chk.residuals[0] == pytest.approx(1.0)
        assert not chk.clause_passed[0]

    @pytest.mark.parametrize("name", list(FAMILIES))
    def test_builtins_pass(self, grid, name):
        assert check_system(family_system(name, grid), 1e-10).passed


class TestRegistry:
    def test_unknown(self, grid):
        with pytest.raises(RegistryError):
            builtin_family("nope", grid)

    def test_hyperbolic(self, grid):
        fam = builtin_family("hyperbolic", grid)
        t = grid.nodes + 0.5
        assert np.allclose(fam.h.values, 1.0)
        assert np.allclose(fam.k1.values, np.sinh(t))
        assert np.allclose(fam.k2.values, 1 / np.sinh(t))
        assert np.allclose(fam.s1.values, np.cosh(t))
        assert np.allclose(fam.s2.values, 1 / np.tanh(t))

    def test_trig2(self, grid):
        fam = builtin_family("trig2", grid)
        t = grid.nodes
        r2 = math.sqrt(2)
        assert np.allclose(fam.k1.values, r2 * np.sin(t) * np.tan(t))
        assert np.allclose(fam.s1.values, r2 * np.tan(t))
        assert np.allclose(fam.s2.values, r2)

    def test_sec_family_chain(self, grid):
        fam = builtin_family("sec-family", grid)
        assert isinstance(fam, IteratedFamily)
        theta = np.pi / 4 * (grid.nodes + 0.5)
        assert np.allclose(s_combine(fam.hs).values, 1 / np.cos(theta), atol=1e-14)
        assert np.allclose(s_combine(fam.hs).values ** 2,
                           fam.system.k1.values * fam.system.k2.values, rtol=1e-13)

    def test_mixed_chains(self, grid):
        fam = builtin_family("mixed-hyp-trig", grid)
        theta = np.pi / 4 * (grid.nodes + 0.5)
        assert np.allclose(s_combine(fam.k1_chain).values, 2 / np.sin(theta), rtol=1e-13)
        assert np.allclose(s_combine(fam.k2_chain).values, 2 * np.cosh(theta), rtol=1e-13)
        hh = fam.system.h.values ** 2
        assert np.allclose(hh, s_combine(fam.k1_chain).values * s_combine(fam.k2_chain).values,
                           rtol=1e-13)

    def test_family_kernels_unique(self, grid):
        ks = family_kernels("hyperbolic", grid)
        assert len(ks) == 5
