"""Bracketed root finding for the characteristic equations of the model surfaces.

Every equation is evaluated in a form without poles, so a sign change in a
scan cell always brackets a genuine root:

=============  ===================  =================================
equation       original             scanned form
=============  ===================  =================================
TAN            tan x = x            sin x - x cos x
COT            cot x = -x           cos x + x sin x
COTH           coth x = x           x tanh x - 1
FREDHOLM_CYL   cos x + x sin x = 0  cos x + x sin x
CATENOID_BDRY  cosh x = x sinh x    exp(-x) (cosh x - x sinh x)
=============  ===================  =================================

TAN and COT use their known one-root-per-period brackets; the others go
through a uniform sign-change scan.  COT and FREDHOLM_CYL are the same
equation isolated two different ways, which makes them a mutual check.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyRange, NoRootInRange

SCAN_STEP = min(1e-2, math.pi / 100)
RESIDUAL_TOL = 1e-12
MIN_SEPARATION = 1e-8


class Equation(str, enum.Enum):
    TAN = "tan"
    COT = "cot"
    COTH = "coth"
    FREDHOLM_CYL = "fredholm"
    CATENOID_BDRY = "catenoid"


def _tan_eq(x):
    return np.sin(x) - x * np.cos(x), x * np.sin(x)


def _cot_eq(x):
    return np.cos(x) + x * np.sin(x), x * np.cos(x)


def _coth_eq(x):
    th = np.tanh(x)
    return x * th - 1.0, th + x * (1.0 - th * th)


def _catenoid_eq(x):
    # exp(-x) * (cosh x - x sinh x), written without overflow
    e2 = np.exp(-2.0 * x)
    g = 0.5 * (1.0 + e2) - 0.5 * x * (1.0 - e2)
    # derivative of the scaled form: -g + exp(-x) * (-x cosh x)
    dg = -g - 0.5 * x * (1.0 + e2)
    return g, dg


_FUNCS = {
    Equation.TAN: _tan_eq,
    Equation.COT: _cot_eq,
    Equation.COTH: _coth_eq,
    Equation.FREDHOLM_CYL: _cot_eq,
    Equation.CATENOID_BDRY: _catenoid_eq,
}


@dataclass(frozen=True)
class RootSpec:
    equation: Equation
    range_max: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "equation", Equation(self.equation))


def residual(equation, x):
    """Scanned-form value at ``x``; zero at a root."""
    g, _ = _FUNCS[Equation(equation)](x)
    return float(g)


def bisect(func, a, b, xtol=1e-15, maxiter=200):
    """Plain bisection on a sign-change bracket ``[a, b]``."""
    fa, fb = func(a), func(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if np.sign(fa) == np.sign(fb):
        raise ValueError("bracket does not change sign")
    for _ in range(maxiter):
        m = 0.5 * (a + b)
        fm = func(m)
        if fm == 0.0 or 0.5 * (b - a) < xtol * max(1.0, abs(m)):
            return m
        if np.sign(fm) == np.sign(fa):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def newton_bracketed(func_and_deriv, a, b, xtol=1e-15, maxiter=100):
    """Newton iteration that falls back to bisection whenever a step would
    leave the current bracket. The bracket shrinks every iteration."""
    fa, _ = func_and_deriv(a)
    fb, _ = func_and_deriv(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if np.sign(fa) == np.sign(fb):
        raise ValueError("bracket does not change sign")
    if fa > 0:
        a, b = b, a  # keep func(a) < 0 < func(b)
    x = 0.5 * (a + b)
    for _ in range(maxiter):
        g, dg = func_and_deriv(x)
        if g == 0.0:
            return x
        if g < 0:
            a = x
        else:
            b = x
        lo, hi = min(a, b), max(a, b)
        step_ok = dg != 0.0
        if step_ok:
            xn = x - g / dg
            step_ok = lo < xn < hi
        if not step_ok:
            xn = 0.5 * (a + b)
        if abs(xn - x) < xtol * max(1.0, abs(x)):
            return xn
        x = xn
    return x


def _scan_brackets(g, lo, hi, step):
    n = max(2, int(math.ceil((hi - lo) / step)) + 1)
    xs = np.linspace(lo, hi, n)
    vals = g(xs)
    cells = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)[0]
    out = []
    for i in cells:
        if vals[i] == 0.0 and i > 0 and (i - 1) in cells:
            continue  # a node root already bracketed by the previous cell
        out.append((xs[i], xs[i + 1]))
    return out


def _scan(equation, range_max, step=SCAN_STEP):
    func = _FUNCS[equation]

    def g(x):
        return func(x)[0]

    lo = step * 1e-3  # stay off x = 0, where TAN has its trivial root
    brackets = _scan_brackets(g, lo, range_max, step)
    # two sign changes in adjacent cells: rescan the pair finer
    refined = []
    i = 0
    while i < len(brackets):
        a, b = brackets[i]
        if i + 1 < len(brackets) and abs(brackets[i + 1][0] - b) < 1e-12:
            refined.extend(_scan_brackets(g, a, brackets[i + 1][1], step / 50))
            i += 2
            continue
        refined.append((a, b))
        i += 1
    return refined


def _structured_brackets(equation, range_max):
    brackets = []
    if equation == Equation.TAN:
        j = 1
        while j * math.pi < range_max:
            brackets.append((j * math.pi, j * math.pi + math.pi / 2))
            j += 1
    elif equation == Equation.COT:
        j = 0
        while j * math.pi + math.pi / 2 < range_max:
            brackets.append((j * math.pi + math.pi / 2, (j + 1) * math.pi))
            j += 1
    return brackets


def enumerate_roots(spec):
    """All roots of ``spec.equation`` in ``(0, spec.range_max]``, increasing."""
    spec = spec if isinstance(spec, RootSpec) else RootSpec(*spec)
    if not spec.range_max > 0:
        raise EmptyRange(f"range_max must be positive, got {spec.range_max}")
    eq = spec.equation
    func = _FUNCS[eq]
    if eq in (Equation.TAN, Equation.COT):
        brackets = _structured_brackets(eq, spec.range_max)
    else:
        brackets = _scan(eq, spec.range_max)

    roots = []
    for a, b in brackets:
        x = newton_bracketed(func, a, b)
        if not 0.0 < x <= spec.range_max:
            continue
        g, _ = func(x)
        if abs(g) > RESIDUAL_TOL * (1.0 + abs(x)):
            continue  # sign change from a pole, not a root
        if roots and x - roots[-1] < MIN_SEPARATION:
            continue
        roots.append(float(x))
    return roots


def first_root(spec):
    spec = spec if isinstance(spec, RootSpec) else RootSpec(*spec)
    roots = enumerate_roots(spec)
    if not roots:
        raise NoRootInRange(f"{spec.equation.value}: no root in (0, {spec.range_max}]")
    return roots[0]


def coth_fixed_point():
    """The unique positive solution of coth x = x (about 1.19968)."""
    return first_root(RootSpec(Equation.COTH, 10.0))


def first_cot_root():
    """Smallest positive solution of cot x = -x (about 2.79838)."""
    return first_root(RootSpec(Equation.COT, 4.0))
