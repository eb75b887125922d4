"""The Upsilon matrix of a capillary hypersurface in the unit ball.

    Upsilon_ij = int n |Å|^2 < (n - H w) X + (n cos(theta) + H (|X|^2 + 1)/2) nu, e_i > X_j

with ``w = <X, nu>``. The number ``ell`` of its nonnegative eigenvalues bounds
the type I+II index from below (``ell - 1`` when ``|Å|^2 X`` lies on an affine
hyperplane; no bound when the surface is umbilical).

Integrals use product rules on the parameter domain:

* cylinder ``X = (t, r z)``: Gauss-Legendre in ``t`` times the cross-polytope
  rule on ``S^{n-1}`` (points ``+-e_k``, equal weights), which is exact for the
  polynomials of degree <= 3 in ``z`` that occur here;
* catenoid and disk: Gauss-Legendre in ``t`` (or ``rho``) times the trapezoidal
  rule in the angle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotMinimal, QuadTooCoarse, UnsupportedSurface
from .geometry import SurfaceKind, sphere_area

QUAD_MIN = 32
QUAD_RTOL = 1e-8
ELL_EPS = 1e-9
HYPERPLANE_TOL = 1e-8


@dataclass(frozen=True)
class SurfaceSample:
    """Quadrature nodes on a surface with the pointwise data Upsilon needs.

    ``weights`` already include the area element. ``xt`` is the tangential
    part of ``X`` and ``ax_sq`` is ``|Å(X^T)|^2``.
    """

    n: int
    H: float
    cos_theta: float
    weights: np.ndarray
    X: np.ndarray
    nu: np.ndarray
    traceless_sq: np.ndarray
    second_ff_sq: np.ndarray
    xt: np.ndarray
    ax_sq: np.ndarray
    boundary_X: np.ndarray
    boundary_nu: np.ndarray


def _cylinder_sample(s, quad_n):
    n, r, T = s.n, s.r, s.T
    tg, wg = np.polynomial.legendre.leggauss(quad_n)
    t, wt = T * tg, T * wg
    dirs = np.vstack([np.eye(n), -np.eye(n)])
    wz = np.full(2 * n, sphere_area(n) / (2 * n))
    tt = np.repeat(t, 2 * n)
    zz = np.tile(dirs, (quad_n, 1))
    weights = np.repeat(wt, 2 * n) * np.tile(wz, quad_n) * r ** (n - 1)
    X = np.column_stack([tt, r * zz])
    nu = np.column_stack([np.zeros_like(tt), zz])
    xt = np.column_stack([tt, np.zeros_like(zz)])
    # Å(e_t) = -(n-1)/(n r) e_t
    ax_sq = (tt * (n - 1) / (n * r)) ** 2
    k2 = float(s.traceless_sq(0.0))
    a2 = float(s.second_ff_sq(0.0))
    bt = np.concatenate([np.full(2 * n, -T), np.full(2 * n, T)])
    bz = np.vstack([dirs, dirs])
    return SurfaceSample(
        n, s.H, s.cos_theta, weights, X, nu, np.full_like(tt, k2), np.full_like(tt, a2),
        xt, ax_sq, np.column_stack([bt, r * bz]),
        np.column_stack([np.zeros_like(bt), bz]),
    )


def _catenoid_sample(s, quad_n):
    T, c = s.T, s.c
    tg, wg = np.polynomial.legendre.leggauss(quad_n)
    t1, wt = T * tg, T * wg
    m = 2 * quad_n
    tau1 = 2.0 * math.pi * np.arange(m) / m
    t, tau = np.meshgrid(t1, tau1, indexing="ij")
    t, tau = t.ravel(), tau.ravel()
    ch, sh = np.cosh(t), np.sinh(t)
    weights = np.repeat(wt, m) * (2.0 * math.pi / m) * c * c * ch**2
    X = c * np.column_stack([ch * np.cos(tau), ch * np.sin(tau), t])
    nu = np.column_stack([np.cos(tau), np.sin(tau), -sh]) / ch[:, None]
    e_t = np.column_stack([sh * np.cos(tau), sh * np.sin(tau), np.ones_like(t)]) / ch[:, None]
    e_tau = np.column_stack([-np.sin(tau), np.cos(tau), np.zeros_like(t)])
    w = np.sum(X * nu, axis=1)
    xt = X - w[:, None] * nu
    kappa = 1.0 / (c * ch**2)
    # shape operator kappa (-e_t e_t^T + e_tau e_tau^T); traceless since H = 0
    xt_t = np.sum(xt * e_t, axis=1)
    xt_tau = np.sum(xt * e_tau, axis=1)
    ax_sq = kappa**2 * (xt_t**2 + xt_tau**2)
    a2 = 2.0 * kappa**2
    bt = np.concatenate([np.full(m, -T), np.full(m, T)])
    btau = np.concatenate([tau1, tau1])
    bch, bsh = np.cosh(bt), np.sinh(bt)
    bX = c * np.column_stack([bch * np.cos(btau), bch * np.sin(btau), bt])
    bnu = np.column_stack([np.cos(btau), np.sin(btau), -bsh]) / bch[:, None]
    return SurfaceSample(2, 0.0, 0.0, weights, X, nu, a2, a2, xt, ax_sq, bX, bnu)


def _disk_sample(quad_n):
    rg, wg = np.polynomial.legendre.leggauss(quad_n)
    rho1, wr = 0.5 * (rg + 1.0), 0.5 * wg
    m = 2 * quad_n
    tau1 = 2.0 * math.pi * np.arange(m) / m
    rho, tau = np.meshgrid(rho1, tau1, indexing="ij")
    rho, tau = rho.ravel(), tau.ravel()
    weights = np.repeat(wr, m) * (2.0 * math.pi / m) * rho
    X = np.column_stack([rho * np.cos(tau), rho * np.sin(tau), np.zeros_like(rho)])
    nu = np.tile([0.0, 0.0, 1.0], (rho.size, 1))
    zero = np.zeros_like(rho)
    bX = np.column_stack([np.cos(tau1), np.sin(tau1), np.zeros(m)])
    return SurfaceSample(2, 0.0, 0.0, weights, X, nu, zero, zero, X.copy(), zero, bX,
                         np.tile([0.0, 0.0, 1.0], (m, 1)))


def sample_surface(surface, quad_n):
    if quad_n < QUAD_MIN:
        raise QuadTooCoarse(f"quad_n must be >= {QUAD_MIN}, got {quad_n}")
    if surface.kind == SurfaceKind.CYLINDER:
        return _cylinder_sample(surface, quad_n)
    if surface.kind == SurfaceKind.CATENOID:
        return _catenoid_sample(surface, quad_n)
    if surface.kind == SurfaceKind.DISK:
        return _disk_sample(quad_n)
    raise UnsupportedSurface(f"Upsilon needs a surface in the ball, got {surface.kind.value}")


def _upsilon_entries(sample, frame):
    n, H = sample.n, sample.H
    X, nu = sample.X, sample.nu
    w = np.sum(X * nu, axis=1)
    x2 = np.sum(X * X, axis=1)
    V = (n - H * w)[:, None] * X + (n * sample.cos_theta + 0.5 * H * (x2 + 1.0))[:, None] * nu
    if frame is not None:
        V, X = V @ frame, X @ frame
    dens = sample.weights * n * sample.traceless_sq
    return (V * dens[:, None]).T @ X


@dataclass(frozen=True)
class UpsilonMatrix:
    entries: np.ndarray
    symmetrized: np.ndarray
    asymmetry_residual: float
    eigenvalues: np.ndarray
    ell: int
    band_hits: int
    quad_n: int
    lower_bound: int | None = None
    case: str | None = None

    @property
    def off_diagonal_residual(self):
        off = self.entries - np.diag(np.diag(self.entries))
        return float(np.max(np.abs(off)) / (1.0 + np.max(np.abs(self.entries))))


def compute_upsilon(surface, quad_n=128, frame=None, check=True, eps=ELL_EPS):
    """Upsilon by quadrature, checked against ``2 * quad_n``.

    ``frame`` is an orthogonal matrix whose columns are the basis ``e_i``.
    Eigenvalues down to ``-eps * ||Upsilon||`` count as nonnegative.
    ``surface`` may also be a :class:`SurfaceSample`, in which case no
    refinement check is possible.
    """
    sample = surface if isinstance(surface, SurfaceSample) else sample_surface(surface, quad_n)
    entries = _upsilon_entries(sample, frame)
    if check and not isinstance(surface, SurfaceSample):
        fine = _upsilon_entries(sample_surface(surface, 2 * quad_n), frame)
        scale = 1.0 + np.max(np.abs(fine))
        moved = np.max(np.abs(fine - entries)) / scale
        if moved > QUAD_RTOL:
            raise QuadTooCoarse(f"entries move by {moved:.2e} under refinement")
    sym = 0.5 * (entries + entries.T)
    asym = float(np.max(np.abs(entries - entries.T)) / (1.0 + np.max(np.abs(entries))))
    ev = np.linalg.eigvalsh(sym)
    eps = eps * np.linalg.norm(sym, 2)
    ell = int(np.count_nonzero(ev >= -eps))
    hits = int(np.count_nonzero(np.abs(ev) <= eps))
    bound, case = _bound_from_ell(sample, ell)
    return UpsilonMatrix(entries, sym, asym, ev, ell, hits, quad_n, bound, case)


def _bound_from_ell(sample, ell):
    if is_umbilical(sample):
        return 0, "umbilical"
    if is_hyperplanar(sample):
        return max(ell - 1, 0), "hyperplanar"
    return ell, "generic"


def is_umbilical(sample, tol=1e-14):
    return bool(np.max(np.abs(sample.traceless_sq)) <= tol)


def is_hyperplanar(sample, affine=True, tol=HYPERPLANE_TOL):
    """Whether ``|Å|^2 X`` lies on a hyperplane (through the origin when
    ``affine=False``), by the smallest singular value of the sampled matrix."""
    cols = sample.traceless_sq[:, None] * sample.X
    if affine:
        cols = np.column_stack([cols, np.ones(len(cols))])
    cols = cols * np.sqrt(sample.weights)[:, None]
    s = np.linalg.svd(cols, compute_uv=False)
    return bool(s[0] == 0.0 or s[-1] <= tol * s[0])


def index_lower_bound(surface, upsilon, quad_n=None):
    """``(bound, label)`` with label ``umbilical``, ``hyperplanar`` or ``generic``.

    The umbilical case carries no bound from Upsilon; it reports 0.
    """
    sample = surface if isinstance(surface, SurfaceSample) else \
        sample_surface(surface, quad_n or upsilon.quad_n)
    return _bound_from_ell(sample, upsilon.ell)


@dataclass(frozen=True)
class TraceIdentity:
    trace: float
    rhs: float
    residual: float
    boundary_phi: float


def _trace_parts(sample):
    n = sample.n
    xt2 = np.sum(sample.xt**2, axis=1)
    rhs = np.sum(sample.weights * n * n * (sample.traceless_sq * xt2 + sample.ax_sq))
    bX, bnu = sample.boundary_X, sample.boundary_nu
    phi = 0.5 * (np.sum(bX * bX, axis=1) + 1.0)
    w = np.sum(bX * bnu, axis=1)
    Phi = sample.H * phi - n * w - n * sample.cos_theta - sample.H
    return float(rhs), float(np.max(np.abs(Phi)) if Phi.size else 0.0)


def trace_identity(surface, quad_n=128):
    """Both sides of ``tr Upsilon = int n^2 (|Å|^2 |X^T|^2 + |Å(X^T)|^2)`` and
    the largest ``|Phi|`` on the boundary."""
    ups = compute_upsilon(surface, quad_n)
    tr = float(np.trace(ups.entries))
    rhs, phi = _trace_parts(sample_surface(surface, quad_n))
    rhs_fine, _ = _trace_parts(sample_surface(surface, 2 * quad_n))
    if abs(rhs_fine - rhs) > QUAD_RTOL * (1.0 + abs(rhs_fine)):
        raise QuadTooCoarse("trace right-hand side not converged")
    scale = max(abs(tr), abs(rhs))
    res = abs(tr - rhs) / scale if scale > 0 else 0.0
    return TraceIdentity(tr, rhs, res, phi)


def trace_identity_residual(surface, quad_n=128):
    return trace_identity(surface, quad_n).residual


@dataclass(frozen=True)
class MinimalCheck:
    holds: bool
    lhs: float
    rhs: float
    lambdas: np.ndarray


def minimal_inequality_check(surface, v, quad_n=128):
    """``int |A|^2 <X, v>^2 >= int |A|^2 cos^2(theta)`` for a minimal surface,
    with ``lambda_i = int n |A|^2 (n X_i^2 + n cos(theta) X_i nu_i)``."""
    if abs(surface.H) > 0.0:
        raise NotMinimal(f"H = {surface.H} != 0")
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    sample = sample_surface(surface, quad_n)
    a2w = sample.second_ff_sq * sample.weights
    lhs = float(np.sum(a2w * (sample.X @ v) ** 2))
    rhs = float(np.sum(a2w) * sample.cos_theta**2)
    n = sample.n
    lam = np.sum(n * a2w[:, None] * (n * sample.X**2 + n * sample.cos_theta * sample.X * sample.nu),
                 axis=0)
    return MinimalCheck(lhs >= rhs, lhs, rhs, lam)


def cylinder_upsilon_closed_form(n, r):
    """Diagonal of Upsilon for the cylinder:
    ``Upsilon_00 = (n-1)/r^2 * r^{n-1} |S^{n-1}| * 2T^3/3`` and
    ``Upsilon_jj = (n-1)^2/(2 r^2) * r^{n-1} |S^{n-1}|/n * 8T^3/3``."""
    T = math.sqrt(1.0 - r * r)
    vol = sphere_area(n) * r ** (n - 1)
    d0 = (n - 1) / r**2 * vol * 2.0 * T**3 / 3.0
    dj = (n - 1) ** 2 / (2.0 * r**2) * vol / n * 8.0 * T**3 / 3.0
    return np.array([d0] + [dj] * n)


def catenoid_upsilon_closed_form(T, c, quad_n=256):
    """``diag(16 pi c^2 T, 16 pi c^2 T, 16 pi c^2 int t^2 sech^2 t dt)``."""
    tg, wg = np.polynomial.legendre.leggauss(quad_n)
    m2 = float(np.sum(T * wg * (T * tg) ** 2 / np.cosh(T * tg) ** 2))
    k = 16.0 * math.pi * c * c
    return np.array([k * T, k * T, k * m2])
