import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from capindex.errors import EmptyRange, NoRootInRange
from capindex.roots import (
    Equation,
    RootSpec,
    coth_fixed_point,
    enumerate_roots,
    first_cot_root,
    first_root,
    residual,
)


def test_coth_fixed_point_anchor():
    assert abs(coth_fixed_point() - 1.19968) <= 1e-4


def test_first_cot_root_anchor():
    assert abs(first_cot_root() - 2.79838) <= 1e-4


def test_catenoid_boundary_root_matches_coth():
    # cosh x = x sinh x  <=>  coth x = x
    tc = first_root(RootSpec(Equation.CATENOID_BDRY, 10.0))
    assert abs(tc - coth_fixed_point()) <= 1e-10


def test_tan_first_root_against_brentq():
    # [DERIVED] oracle: scipy brentq on sin x - x cos x inside (pi, 3 pi / 2)
    oracle = brentq(lambda x: math.sin(x) - x * math.cos(x), math.pi, 1.5 * math.pi, xtol=1e-15)
    x = first_root(RootSpec(Equation.TAN, 10.0))
    assert abs(x - oracle) <= 1e-12
    assert abs(x - 4.493409457909064) <= 1e-12


@pytest.mark.parametrize("eq", [Equation.TAN, Equation.COT])
def test_one_root_per_period(eq):
    roots = enumerate_roots(RootSpec(eq, 60.0))
    offset = 0 if eq == Equation.COT else 1
    for j, x in enumerate(roots):
        lo = (j + offset) * math.pi + (math.pi / 2 if eq == Equation.COT else 0.0)
        assert lo < x < lo + math.pi / 2 + 1e-12


def test_cot_and_fredholm_agree():
    a = enumerate_roots(RootSpec(Equation.COT, 40.0))
    b = enumerate_roots(RootSpec(Equation.FREDHOLM_CYL, 40.0))
    assert len(a) == len(b)
    assert np.allclose(a, b, atol=1e-12, rtol=0)


def test_coth_has_a_single_root():
    assert len(enumerate_roots(RootSpec(Equation.COTH, 50.0))) == 1


@pytest.mark.parametrize("eq", list(Equation))
def test_residuals_are_small(eq):
    for x in enumerate_roots(RootSpec(eq, 30.0)):
        assert abs(residual(eq, x)) <= 1e-12 * (1 + x)


def test_roots_against_brentq_scan():
    # [DERIVED] independent scan with brentq on a finer grid
    f = lambda x: math.cos(x) + x * math.sin(x)
    xs = np.linspace(1e-3, 25.0, 25001)
    vals = np.array([f(x) for x in xs])
    idx = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    oracle = [brentq(f, xs[i], xs[i + 1], xtol=1e-14) for i in idx]
    ours = enumerate_roots(RootSpec(Equation.FREDHOLM_CYL, 25.0))
    assert np.allclose(ours, oracle, atol=1e-10, rtol=0)


def test_empty_range():
    with pytest.raises(EmptyRange):
        enumerate_roots(RootSpec(Equation.TAN, 0.0))
    with pytest.raises(EmptyRange):
        enumerate_roots(RootSpec(Equation.COTH, -1.0))


def test_no_root_in_range():
    with pytest.raises(NoRootInRange):
        first_root(RootSpec(Equation.TAN, 4.0))
    assert enumerate_roots(RootSpec(Equation.COTH, 1.0)) == []


def test_equation_accepts_string():
    assert RootSpec("coth").equation is Equation.COTH


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=2.0, max_value=40.0))
def test_roots_are_increasing_and_inside_range(range_max):
    for eq in Equation:
        roots = enumerate_roots(RootSpec(eq, range_max))
        assert all(0 < x <= range_max for x in roots)
        assert all(b > a for a, b in zip(roots, roots[1:]))


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=5.0, max_value=30.0), st.floats(min_value=0.5, max_value=5.0))
def test_enlarging_range_extends_the_list(r1, extra):
    small = enumerate_roots(RootSpec(Equation.TAN, r1))
    big = enumerate_roots(RootSpec(Equation.TAN, r1 + extra))
    assert big[: len(small)] == small
