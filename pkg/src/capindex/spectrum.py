"""Eigenvalue counting for the reduced mode problems.

Counts are obtained without eigensolves. The quadratic form

    Q(f) = int (f'^2 + V f^2) dt - qhat (f(-T)^2 + f(T)^2)

is discretized with piecewise-linear elements on a uniform grid (three-point
second difference, trapezoidal lumped mass). The Robin term enters the two
corner entries of the stiffness matrix, so the matrix stays symmetric
tridiagonal. By Sylvester's law of inertia, the number of negative pivots in
the LDL^T factorization of ``K - sigma M`` equals the number of eigenvalues of
the pencil ``(K, M)`` below ``sigma``. Counting at ``sigma = -eps`` and
``+eps`` separates negative eigenvalues from those in the zero band.

The Jacobi-Steklov count is read off the 2x2 Dirichlet-to-Neumann matrix
built from two fundamental solutions integrated with classical RK4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import DirichletKernel, GridTooCoarse, NearKernel, UnsupportedSurface
from .geometry import (
    SurfaceKind,
    harmonic_multiplicity,
    reduce_to_modes,
    torus_kernel_count,
    torus_spectrum_counts,
)
from .roots import Equation, RootSpec, coth_fixed_point, enumerate_roots, newton_bracketed

GRID_MIN = 64
EPS_COUNT = 1e-9
STEKLOV_BAND = 1e-7
DIRICHLET_KERNEL_TOL = 1e-7
KERNEL_PERTURBATION = 1e-7


class Inertia(NamedTuple):
    negative: int
    zero: int
    positive: int


@dataclass(frozen=True)
class FormMatrices:
    """Tridiagonal stiffness ``(diag, off)`` and diagonal mass on nodes ``t``."""

    t: np.ndarray
    diag: np.ndarray
    off: np.ndarray
    mass: np.ndarray

    def dense(self):
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)

    def interior(self):
        return FormMatrices(self.t[1:-1], self.diag[1:-1], self.off[1:-1], self.mass[1:-1])


def _check_grid(grid_n):
    if grid_n < GRID_MIN:
        raise GridTooCoarse(f"grid_n must be >= {GRID_MIN}, got {grid_n}")


def assemble(mode, grid_n):
    """Stiffness and mass of the Robin form on ``grid_n`` cells."""
    _check_grid(grid_n)
    T = mode.half_length
    t = np.linspace(-T, T, grid_n + 1)
    h = t[1] - t[0]
    quad = np.full(grid_n + 1, h)
    quad[0] = quad[-1] = 0.5 * h
    diag = np.full(grid_n + 1, 2.0 / h)
    diag[0] = diag[-1] = 1.0 / h
    diag = diag + quad * mode.potential(t)
    diag[0] -= mode.robin_coeff
    diag[-1] -= mode.robin_coeff
    off = np.full(grid_n, -1.0 / h)
    return FormMatrices(t, diag, off, quad * mode.weight(t))


def sturm_count(diag, off):
    """Number of negative pivots of the LDL^T factorization of a symmetric
    tridiagonal matrix, i.e. its number of negative eigenvalues."""
    tiny = np.finfo(float).tiny
    count = 0
    d = diag[0]
    for i in range(len(diag)):
        if i:
            d = diag[i] - off[i - 1] * off[i - 1] / d
        if d == 0.0:
            d = -np.finfo(float).eps * (abs(off[i - 1]) if i else 1.0) - tiny
        if d < 0.0:
            count += 1
    return count


def count_below(form, sigma):
    """Number of eigenvalues of the pencil ``(K, M)`` strictly below ``sigma``."""
    return sturm_count(form.diag - sigma * form.mass, form.off)


def count_scale(mode):
    T = mode.half_length
    return 1.0 + mode.potential.maximum(T) - min(0.0, mode.potential.minimum(T)) \
        + mode.robin_coeff**2


def _inertia(form, eps):
    below_lo = count_below(form, -eps)
    below_hi = count_below(form, eps)
    size = len(form.diag)
    return Inertia(below_lo, below_hi - below_lo, size - below_hi)


def _fundamental(mode, steps, shift=0.0):
    pot = mode.potential if shift == 0.0 else _Shifted(mode.potential, shift)
    with np.errstate(over="ignore", invalid="ignore"):
        return propagate(pot, mode.half_length, [1.0, 0.0], [0.0, 1.0], steps)


def robin_kernel_residual(mode, grid_n=256):
    """Relative defect of the right Robin condition for the solution that
    satisfies the left one; zero exactly when the Robin problem has a kernel."""
    _, ys, dys = _fundamental(mode, 2 * grid_n)
    if not (np.all(np.isfinite(ys)) and np.all(np.isfinite(dys))):
        return math.inf  # growth this strong rules out a kernel
    q = mode.robin_coeff
    f = ys[:, 0] - q * ys[:, 1]
    df_T = dys[-1, 0] - q * dys[-1, 1]
    return abs(df_T - q * f[-1]) / max(np.max(np.abs(f)) * (1.0 + q), abs(df_T))


def dirichlet_kernel_residual(mode, grid_n=256):
    _, ys, _ = _fundamental(mode, 2 * grid_n)
    if not np.all(np.isfinite(ys)):
        return math.inf
    return abs(ys[-1, 1]) / np.max(np.abs(ys[:, 1]))


def discretization_band(mode, grid_n):
    """Width inside which the O(h^2) finite-difference error can place a true
    zero eigenvalue."""
    h = 2.0 * mode.half_length / grid_n
    return h * h * count_scale(mode)


def robin_inertia(mode, grid_n, eps_rel=EPS_COUNT):
    """Inertia of the Robin pencil with zero band ``eps_rel * count_scale``.

    When shooting confirms a kernel, the band is widened to the discretization
    band so the finite-difference image of the kernel lands in it.
    """
    form = assemble(mode, grid_n)
    eps = eps_rel * count_scale(mode)
    if robin_kernel_residual(mode, grid_n) <= DIRICHLET_KERNEL_TOL:
        eps = max(eps, discretization_band(mode, grid_n))
    return _inertia(form, eps)


def dirichlet_inertia(mode, grid_n, eps_rel=EPS_COUNT):
    form = assemble(mode, grid_n).interior()
    eps = eps_rel * count_scale(mode)
    if dirichlet_kernel_residual(mode, grid_n) <= DIRICHLET_KERNEL_TOL:
        eps = max(eps, discretization_band(mode, grid_n))
    return _inertia(form, eps)


def count_negative_robin(mode, grid_n=256, eps_rel=EPS_COUNT, strict=False):
    """Number of negative Robin eigenvalues of ``mode``.

    Eigenvalues inside the zero band are not counted. With ``strict=True`` their
    presence raises :class:`NearKernel` (carrying the count) instead.
    """
    inertia = robin_inertia(mode, grid_n, eps_rel)
    if strict and inertia.zero:
        raise NearKernel(f"mode {mode.mode_id}: {inertia.zero} eigenvalue(s) near 0",
                         inertia.negative)
    return inertia.negative


def count_dirichlet_nonpositive(mode, grid_n=256, eps_rel=EPS_COUNT, strict=False):
    """Number of Dirichlet eigenvalues ``<= 0``; zero-band eigenvalues are counted."""
    inertia = dirichlet_inertia(mode, grid_n, eps_rel)
    if strict and inertia.zero:
        raise NearKernel(f"mode {mode.mode_id}: Dirichlet eigenvalue near 0",
                         inertia.negative + inertia.zero)
    return inertia.negative + inertia.zero


def propagate(potential, half_length, y0, dy0, steps, source=None, source_cols=None):
    """Integrate ``y'' = V(t) y + s(t) * source_cols`` from ``-T`` to ``T`` with RK4.

    ``y0`` and ``dy0`` hold one initial condition per column. Returns the nodes
    and the arrays of values and derivatives, each ``(steps + 1, columns)``.
    """
    y = np.array(y0, dtype=float, ndmin=1)
    dy = np.array(dy0, dtype=float, ndmin=1)
    t = np.linspace(-half_length, half_length, steps + 1)
    h = t[1] - t[0]
    v_node = potential(t)
    v_mid = potential(t[:-1] + 0.5 * h)
    if source is not None:
        cols = np.asarray(source_cols, dtype=float)
        s_node = np.asarray(source(t), dtype=float) * np.ones_like(t)
        s_mid = np.asarray(source(t[:-1] + 0.5 * h), dtype=float) * np.ones_like(v_mid)
    else:
        cols = np.zeros_like(y)
        s_node = np.zeros_like(t)
        s_mid = np.zeros_like(v_mid)
    ys = np.empty((steps + 1, y.size))
    dys = np.empty_like(ys)
    ys[0], dys[0] = y, dy
    for i in range(steps):
        va, vm, vb = v_node[i], v_mid[i], v_node[i + 1]
        sa, sm, sb = s_node[i] * cols, s_mid[i] * cols, s_node[i + 1] * cols
        k1y, k1d = dy, va * y + sa
        y2, d2 = y + 0.5 * h * k1y, dy + 0.5 * h * k1d
        k2y, k2d = d2, vm * y2 + sm
        y3, d3 = y + 0.5 * h * k2y, dy + 0.5 * h * k2d
        k3y, k3d = d3, vm * y3 + sm
        y4, d4 = y + h * k3y, dy + h * k3d
        k4y, k4d = d4, vb * y4 + sb
        y = y + h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y)
        dy = dy + h / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d)
        ys[i + 1], dys[i + 1] = y, dy
    return t, ys, dys


def dtn_matrix(mode, grid_n=256, shift=0.0):
    """Dirichlet-to-Neumann matrix of ``f'' = (V + shift) f`` on ``[-T, T]``.

    Maps boundary values ``(f(-T), f(T))`` to outward derivatives
    ``(-f'(-T), f'(T))``. Raises :class:`DirichletKernel` when the Dirichlet
    problem is (numerically) singular; a nonzero ``shift`` is a deliberate
    perturbation off such a kernel and skips the check.
    """
    _check_grid(grid_n)
    _, ys, dys = _fundamental(mode, 2 * grid_n, shift)
    y1, y2 = ys[-1]
    d1, d2 = dys[-1]
    if shift == 0.0 and abs(y2) <= DIRICHLET_KERNEL_TOL * np.max(np.abs(ys[:, 1])):
        raise DirichletKernel(f"mode {mode.mode_id}: Dirichlet problem has a kernel")
    P = np.array([[1.0, 0.0], [y1, y2]])
    D = np.array([[0.0, -1.0], [d1, d2]])
    return D @ np.linalg.inv(P)


@dataclass(frozen=True)
class _Shifted:
    base: object
    shift: float

    def __call__(self, t):
        return self.base(t) + self.shift


def _steklov_count_raw(mode, grid_n, shift=0.0):
    lam = dtn_matrix(mode, grid_n, shift)
    lam = 0.5 * (lam + lam.T)
    mu = np.linalg.eigvalsh(lam) / mode.robin_coeff
    below = int(np.count_nonzero(mu < 1.0 - STEKLOV_BAND))
    near = int(np.count_nonzero(np.abs(mu - 1.0) <= STEKLOV_BAND))
    return below, near, mu


def steklov_values(mode, grid_n=256):
    """Jacobi-Steklov eigenvalues ``mu`` of the mode (two of them)."""
    return _steklov_count_raw(mode, grid_n)[2]


def count_steklov_below_one(mode, grid_n=256, strict=False, resolve=None):
    """Number of Jacobi-Steklov eigenvalues ``mu < 1`` (``f'(+-T)(+-1) = mu qhat f``).

    If the mode's Dirichlet problem is singular, the count is taken on both
    sides of a small perturbation ``V -> V +- 1e-7``. Agreeing counts are
    returned; otherwise :class:`DirichletKernel` is raised, unless
    ``resolve="nonpositive"``, which returns the count for ``V - 1e-7``. That
    side moves the Dirichlet kernel to a strictly negative eigenvalue, so it
    pairs with a Dirichlet count that includes the kernel.
    """
    if mode.robin_coeff <= 0.0:
        raise ValueError("the Steklov problem needs qhat > 0")
    try:
        below, near, _ = _steklov_count_raw(mode, grid_n)
    except DirichletKernel:
        lo = _steklov_count_raw(mode, grid_n, -KERNEL_PERTURBATION)[0]
        hi = _steklov_count_raw(mode, grid_n, KERNEL_PERTURBATION)[0]
        if lo == hi or resolve == "nonpositive":
            return lo
        raise DirichletKernel(
            f"mode {mode.mode_id}: Steklov count indeterminate ({lo} vs {hi})") from None
    if strict and near:
        raise NearKernel(f"mode {mode.mode_id}: Steklov eigenvalue near 1", below)
    return below


def discrete_dtn(mode, grid_n=256):
    """Schur complement of the interior block of the discrete form without the
    Robin term: the finite-difference DtN map. Used as an oracle for
    :func:`dtn_matrix`."""
    form = assemble(mode, grid_n)
    K = form.dense()
    K[0, 0] += mode.robin_coeff
    K[-1, -1] += mode.robin_coeff
    b = [0, len(K) - 1]
    i = np.arange(1, len(K) - 1)
    Kbb = K[np.ix_(b, b)]
    Kbi = K[np.ix_(b, i)]
    Kii = K[np.ix_(i, i)]
    return Kbb - Kbi @ np.linalg.solve(Kii, Kbi.T)


def dense_oracle(mode, grid_n=256, boundary="robin"):
    """All eigenvalues of the assembled pencil, from a dense symmetric solver."""
    form = assemble(mode, grid_n)
    if boundary == "dirichlet":
        form = form.interior()
    elif boundary != "robin":
        raise ValueError(f"unknown boundary condition {boundary!r}")
    return scipy.linalg.eigh(form.dense(), np.diag(form.mass), eigvals_only=True)


@dataclass(frozen=True)
class SpectralCount:
    """Counts for one mode, checked at two grid resolutions.

    ``steklov_below_one`` is ``None`` when it cannot be defined (``qhat = 0``).
    ``dirichlet_kernel`` marks modes whose Steklov count was taken on the
    nonpositive side of the Dirichlet kernel.
    """

    negative_robin: int
    nonpositive_dirichlet: int
    steklov_below_one: int | None
    grid_sizes: tuple
    kernel_flag: bool
    robin_zero: int = 0
    dirichlet_kernel: bool = False
    stable: bool = True


def spectral_count(mode, grid_n=256, eps_rel=EPS_COUNT):
    counts = []
    kernel = False
    dkernel = False
    robin_zero = 0
    for g in (grid_n, 2 * grid_n):
        rob = robin_inertia(mode, grid_n=g, eps_rel=eps_rel)
        dirc = dirichlet_inertia(mode, grid_n=g, eps_rel=eps_rel)
        below = None
        near = 0
        if mode.robin_coeff > 0.0:
            try:
                below, near, _ = _steklov_count_raw(mode, g)
            except DirichletKernel:
                below = count_steklov_below_one(mode, g, resolve="nonpositive")
                dkernel = True
        kernel = kernel or bool(rob.zero or dirc.zero or near) or dkernel
        robin_zero = max(robin_zero, rob.zero)
        counts.append((rob.negative, dirc.negative + dirc.zero, below))
    return SpectralCount(
        negative_robin=counts[0][0],
        nonpositive_dirichlet=counts[0][1],
        steklov_below_one=counts[0][2],
        grid_sizes=(grid_n, 2 * grid_n),
        kernel_flag=kernel,
        robin_zero=robin_zero,
        dirichlet_kernel=dkernel,
        stable=counts[0] == counts[1],
    )


def robin_ground_level(qhat, half_length):
    """Lowest Robin eigenvalue of ``-f''`` on ``[-T, T]`` with ``f' = qhat f``
    outward: ``-(y/T)^2`` where ``y tanh y = qhat T``."""
    target = qhat * half_length
    if abs(target - 1.0) < 1e-14:
        y = coth_fixed_point()
    else:
        hi = max(2.0, 2.0 * target)
        y = newton_bracketed(
            lambda x: (x * math.tanh(x) - target,
                       math.tanh(x) + x / math.cosh(x) ** 2), 0.0, hi)
    return -(y / half_length) ** 2


def mode_truncation_bound(surface):
    """Smallest ``k`` such that every mode ``>= k`` has a positive Robin form.

    Uses ``lambda_min(V) >= min V + lambda_min(0)`` (Rayleigh quotient), so a mode
    is certified positive once ``min V`` exceeds ``-robin_ground_level``.
    """
    kind = surface.kind
    if kind not in (SurfaceKind.CYLINDER, SurfaceKind.CATENOID):
        raise UnsupportedSurface(f"no mode truncation for {kind.value}")
    margin = -robin_ground_level(1.0 / surface.T, surface.T)
    k = 0
    while True:
        mode = reduce_to_modes(surface, k)[k]
        if mode.potential.minimum(mode.half_length) > margin:
            return k
        k += 1


@dataclass(frozen=True)
class ModeCount:
    mode_id: int
    multiplicity: int
    counts: SpectralCount


@dataclass(frozen=True)
class MorseIndexResult:
    """Unconstrained Morse index with the per-mode table behind it."""

    mi_q: int
    modes: list = field(default_factory=list)
    k_max: int | None = None
    grid_sizes: tuple | None = None
    nullity: int = 0
    stable: bool = True

    @property
    def dirichlet_total(self):
        return sum(m.multiplicity * m.counts.nonpositive_dirichlet for m in self.modes)

    @property
    def steklov_total(self):
        if any(m.counts.steklov_below_one is None for m in self.modes):
            return None
        return sum(m.multiplicity * m.counts.steklov_below_one for m in self.modes)


def morse_index_total(surface, grid_n=256, k_max=None, eps_rel=EPS_COUNT):
    """``MI(Q)`` as the multiplicity-weighted sum of per-mode negative counts.

    Modes ``0..k_max`` are examined; ``k_max`` defaults to
    :func:`mode_truncation_bound`. The torus uses the flat-lattice spectrum.
    """
    if surface.kind == SurfaceKind.TORUS:
        p = float(surface.p(0.0))
        return MorseIndexResult(
            mi_q=torus_spectrum_counts(surface.a, p),
            nullity=torus_kernel_count(surface.a, p),
        )
    if surface.kind == SurfaceKind.DISK:
        raise UnsupportedSurface("the disk is only a zero-curvature reference surface")
    if k_max is None:
        k_max = mode_truncation_bound(surface)
    rows = []
    for mode in reduce_to_modes(surface, k_max):
        rows.append(ModeCount(mode.mode_id, mode.multiplicity,
                              spectral_count(mode, grid_n, eps_rel)))
    return MorseIndexResult(
        mi_q=sum(r.multiplicity * r.counts.negative_robin for r in rows),
        modes=rows,
        k_max=k_max,
        grid_sizes=(grid_n, 2 * grid_n),
        nullity=sum(r.multiplicity * r.counts.robin_zero for r in rows),
        stable=all(r.counts.stable for r in rows),
    )


def cylinder_beta_spectrum(r, x_max):
    """Values ``x = sqrt(beta) T`` of the flat Robin problem ``f'' + beta f = 0``,
    ``f/f' = +-T`` at ``+-T``, with ``x < x_max``.

    Returns ``(negative, positive)``: the single negative level
    ``beta = -(T0/T)^2`` as ``[T0]`` and the sorted positive roots of
    ``tan x = x`` and ``cot x = -x``. ``beta = 0`` (``f = t``) is always present
    and is not listed.
    """
    positive = []
    if x_max > 0:
        positive = sorted(enumerate_roots(RootSpec(Equation.TAN, x_max))
                          + enumerate_roots(RootSpec(Equation.COT, x_max)))
    return [coth_fixed_point()], [x for x in positive if x < x_max]


def cylinder_index_analytic(n, r, per_mode=False):
    """Closed-form ``MI(Q)`` of the cylinder from the explicit beta-spectrum.

    Mode ``k`` has eigenvalues ``lambda = beta + (k-1)(k+n-1)/r^2``.
    """
    if not 0.0 < r < 1.0 or n < 2:
        raise ValueError("need 0 < r < 1 and n >= 2")
    T = math.sqrt(1.0 - r * r)
    T0 = coth_fixed_point()
    _, pos = cylinder_beta_spectrum(r, T * math.sqrt(n - 1) / r)
    rows = {}
    rows[0] = 2 + len(pos)  # beta < 0, beta = 0, and beta < (n-1)/r^2
    rows[1] = 1
    k = 2
    while (k - 1) * (k + n - 1) / r**2 < (T0 / T) ** 2:
        rows[k] = 1
        k += 1
    total = sum(harmonic_multiplicity(n, k) * c for k, c in rows.items())
    return (total, rows) if per_mode else total


def cylinder_window(n):
    """Radii ``(r_lo, r_hi)`` between which the cylinder has ``MI(Q) = n + 2``."""
    T0 = coth_fixed_point()
    T1 = enumerate_roots(RootSpec(Equation.COT, 4.0))[0]
    lo = 1.0 / (1.0 + T1**2 / (n - 1))
    hi = 1.0 / (1.0 + T0**2 / (n + 1))
    return math.sqrt(lo), math.sqrt(hi)
