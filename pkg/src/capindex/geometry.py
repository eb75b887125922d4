"""Model surfaces and their reduction to one-dimensional mode problems.

Four model geometries are supported:

* ``CYLINDER``: the flat cylinder ``{|x| = r} x [-T, T]`` in the unit ball
  of R^{n+1}, with ``T = sqrt(1 - r^2)``.
* ``CATENOID``: the critical catenoid in the unit 3-ball,
  ``X(t, tau) = c (cosh t cos tau, cosh t sin tau, t)``, ``t`` in ``[-T, T]``.
* ``TORUS``: the CMC torus ``S^1(a) x S^1(b)`` in S^3, ``a^2 + b^2 = 1``.
* ``DISK``: the flat equatorial disk in the unit 3-ball (the umbilical
  reference surface).

On the cylinder and the catenoid the Jacobi operator separates in the angular
variables. Each angular mode gives a Sturm-Liouville problem on ``[-T, T]``

    Q_k(f) = int (f'^2 + V_k f^2) dt - qhat (f(T)^2 + f(-T)^2)

whose negative eigenvalues, counted with the mode multiplicity, add up to the
unconstrained Morse index.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import NoBoundary, ParamOutOfRange
from .roots import Equation, RootSpec, first_root


class SurfaceKind(str, enum.Enum):
    CYLINDER = "cylinder"
    CATENOID = "catenoid"
    TORUS = "torus"
    DISK = "disk"


def sphere_area(n):
    """Volume of the unit sphere S^{n-1} in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


@dataclass(frozen=True)
class Coefficient:
    """``t -> const + sech2 / cosh(t)^2 + cosh2 * cosh(t)^2``.

    Every potential, weight and area density on the model surfaces has this
    shape, which keeps mode problems hashable and printable.
    """

    const: float = 0.0
    sech2: float = 0.0
    cosh2: float = 0.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full_like(t, self.const)
        if self.sech2:
            out = out + self.sech2 / np.cosh(t) ** 2
        if self.cosh2:
            out = out + self.cosh2 * np.cosh(t) ** 2
        return out

    def is_constant(self):
        return self.sech2 == 0.0 and self.cosh2 == 0.0

    def minimum(self, half_length):
        """Minimum over ``[-T, T]`` (the profile is even and convex/concave in cosh^2)."""
        ends = float(self(half_length))
        mid = float(self(0.0))
        if self.sech2 == 0.0 or self.cosh2 == 0.0:
            return min(ends, mid)
        ts = np.linspace(0.0, half_length, 2001)
        return float(np.min(self(ts)))

    def maximum(self, half_length):
        ts = np.linspace(0.0, half_length, 2001)
        return float(np.max(self(ts)))


ONE = Coefficient(1.0)


@dataclass(frozen=True)
class ModeProblem:
    """One angular mode of the Jacobi-Robin problem on ``[-T, T]``.

    ``potential``, ``weight`` and ``robin_coeff`` define the quadratic form used
    for eigenvalue counting; ``weight`` is the L^2 weight of the eigenproblem.

    The remaining fields carry the geometry needed to pose inhomogeneous
    problems ``J u = f``, ``d_eta u - q u = g`` and to integrate over the
    surface: ``source_factor`` multiplies interior data (the conformal factor
    of the Jacobi operator), ``boundary_factor`` multiplies boundary data,
    ``area_density`` and ``boundary_density`` are the densities of the area
    and boundary measures per unit ``dt`` and per unit angular measure, and
    ``angular_measure`` is the total angular measure of the mode's
    cross-section.
    """

    half_length: float
    potential: Coefficient
    robin_coeff: float
    multiplicity: int
    mode_id: int
    weight: Coefficient = ONE
    source_factor: Coefficient = ONE
    boundary_factor: float = 1.0
    area_density: Coefficient = ONE
    boundary_density: float = 1.0
    angular_measure: float = 1.0

    def with_weight(self, weight):
        return ModeProblem(**{**self.__dict__, "weight": weight})

    def with_potential(self, potential):
        return ModeProblem(**{**self.__dict__, "potential": potential})


@dataclass(frozen=True)
class SurfaceModel:
    """Tagged description of one model surface and its curvature data.

    Curvature quantities that vary along the catenoid are exposed as
    ``Coefficient`` profiles in ``t``; on the other surfaces they are constant.
    """

    kind: SurfaceKind
    n: int
    r: float | None = None
    a: float | None = None
    b: float | None = None
    T: float | None = None
    c: float | None = None
    theta: float | None = None
    sin_theta: float | None = None
    cos_theta: float | None = None
    q: float | None = None
    H: float = 0.0
    second_ff_sq: Coefficient = field(default_factory=Coefficient)
    traceless_sq: Coefficient = field(default_factory=Coefficient)
    p: Coefficient = field(default_factory=Coefficient)

    @property
    def has_boundary(self):
        return self.kind != SurfaceKind.TORUS

    @property
    def area(self):
        if self.kind == SurfaceKind.CYLINDER:
            return sphere_area(self.n) * self.r ** (self.n - 1) * 2.0 * self.T
        if self.kind == SurfaceKind.CATENOID:
            # int c^2 cosh^2 t dt dtau = pi c^2 (2T + sinh 2T)
            return math.pi * self.c**2 * (2.0 * self.T + math.sinh(2.0 * self.T))
        if self.kind == SurfaceKind.TORUS:
            return 4.0 * math.pi**2 * self.a * self.b
        return math.pi

    @property
    def boundary_length(self):
        if self.kind == SurfaceKind.CYLINDER:
            return 2.0 * sphere_area(self.n) * self.r ** (self.n - 1)
        if self.kind == SurfaceKind.CATENOID:
            return 2.0 * 2.0 * math.pi * self.c * math.cosh(self.T)
        if self.kind == SurfaceKind.DISK:
            return 2.0 * math.pi
        return 0.0

    def describe(self):
        out = {"kind": self.kind.value, "n": self.n}
        for key in ("r", "a", "T", "c", "q", "H"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        return out


def catenoid_parameters():
    """``(T, c)`` for the critical catenoid: cosh T = T sinh T, c = 1/(T cosh T)."""
    T = first_root(RootSpec(Equation.CATENOID_BDRY, 5.0))
    return T, 1.0 / (T * math.cosh(T))


def make_surface(kind, **params):
    """Build a ``SurfaceModel``.

    ``cylinder`` takes ``n`` (>= 2) and ``r`` in (0, 1); ``torus`` takes ``a``
    in (0, 1); ``catenoid`` and ``disk`` take no parameters.
    """
    kind = SurfaceKind(kind)
    if kind == SurfaceKind.CYLINDER:
        n = int(params.get("n", 2))
        r = float(params["r"])
        if n < 2:
            raise ParamOutOfRange(f"cylinder needs n >= 2, got {n}")
        if not 0.0 < r < 1.0:
            raise ParamOutOfRange(f"cylinder radius must lie in (0, 1), got {r}")
        T = math.sqrt(1.0 - r * r)
        H = (n - 1) / r
        a2 = (n - 1) / r**2
        return SurfaceModel(
            kind=kind, n=n, r=r, T=T,
            theta=math.atan2(T, -r), sin_theta=T, cos_theta=-r,
            q=1.0 / T, H=H,
            second_ff_sq=Coefficient(a2),
            traceless_sq=Coefficient(a2 - H * H / n),
            p=Coefficient(a2),
        )
    if kind == SurfaceKind.CATENOID:
        T, c = catenoid_parameters()
        a2 = _Sech4(2.0 / c**2)  # |A|^2 = 2 / (c^2 cosh^4 t)
        return SurfaceModel(
            kind=kind, n=2, T=T, c=c,
            theta=math.pi / 2, sin_theta=1.0, cos_theta=0.0, q=1.0, H=0.0,
            second_ff_sq=a2, traceless_sq=a2, p=a2,
        )
    if kind == SurfaceKind.TORUS:
        a = float(params["a"])
        if not 0.0 < a < 1.0:
            raise ParamOutOfRange(f"torus radius must lie in (0, 1), got {a}")
        b = math.sqrt(1.0 - a * a)
        a2 = (b / a) ** 2 + (a / b) ** 2
        H = b / a - a / b
        return SurfaceModel(
            kind=kind, n=2, a=a, b=b, H=H,
            second_ff_sq=Coefficient(a2),
            traceless_sq=Coefficient(a2 - H * H / 2),
            p=Coefficient(2.0 + a2),
        )
    return SurfaceModel(
        kind=kind, n=2, T=1.0, theta=math.pi / 2, sin_theta=1.0, cos_theta=0.0,
        q=1.0, H=0.0,
    )


@dataclass(frozen=True)
class _Sech4(Coefficient):
    """``t -> const * sech(t)^4``; only used for the catenoid's |A|^2."""

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.const / np.cosh(t) ** 4

    def is_constant(self):
        return False


def harmonic_multiplicity(n, k):
    """Dimension of the degree-``k`` spherical harmonics on S^{n-1}."""
    if k < 0:
        return 0
    if k == 0:
        return 1
    if k == 1:
        return n
    return math.comb(n + k - 1, k) - math.comb(n + k - 3, k - 2)


def reduce_to_modes(surface, k_max):
    """Mode problems ``0..k_max`` for the cylinder or the catenoid."""
    if surface.kind in (SurfaceKind.TORUS, SurfaceKind.DISK):
        raise NoBoundary(f"{surface.kind.value} does not reduce to interval modes")
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    T = surface.T
    qhat = 1.0 / T
    modes = []
    if surface.kind == SurfaceKind.CYLINDER:
        n, r = surface.n, surface.r
        dens = r ** (n - 1)
        for k in range(k_max + 1):
            alpha = k * (k + n - 2)
            modes.append(ModeProblem(
                half_length=T,
                potential=Coefficient((alpha - (n - 1)) / r**2),
                robin_coeff=qhat,
                multiplicity=harmonic_multiplicity(n, k),
                mode_id=k,
                area_density=Coefficient(dens),
                boundary_density=dens,
                angular_measure=sphere_area(n),
            ))
        return modes
    c = surface.c
    for m in range(k_max + 1):
        modes.append(ModeProblem(
            half_length=T,
            potential=Coefficient(float(m * m), sech2=-2.0),
            robin_coeff=qhat,
            multiplicity=1 if m == 0 else 2,
            mode_id=m,
            source_factor=Coefficient(cosh2=c * c),
            # d_eta = T d_t on the boundary circles, q = 1
            boundary_factor=1.0 / T,
            area_density=Coefficient(cosh2=c * c),
            boundary_density=c * math.cosh(T),
            angular_measure=2.0 * math.pi,
        ))
    return modes


def radial_mode(surface):
    """The rotation-invariant mode, which carries all symmetric data."""
    return reduce_to_modes(surface, 0)[0]


def _torus_check(a):
    if not 0.0 < a < 1.0:
        raise ParamOutOfRange(f"torus radius must lie in (0, 1), got {a}")
    return math.sqrt(1.0 - a * a)


def _torus_eigenvalues(a, threshold):
    b = _torus_check(a)
    if threshold <= 0:
        return np.empty(0)
    jmax = int(math.ceil(a * math.sqrt(threshold))) + 1
    kmax = int(math.ceil(b * math.sqrt(threshold))) + 1
    j = np.arange(-jmax, jmax + 1)
    k = np.arange(-kmax, kmax + 1)
    jj, kk = np.meshgrid(j, k, indexing="ij")
    return ((jj / a) ** 2 + (kk / b) ** 2).ravel()


def torus_spectrum_counts(a, threshold, rel_tol=1e-10):
    """Number of flat-torus Laplace eigenvalues ``(j/a)^2 + (k/b)^2`` strictly
    below ``threshold``, with multiplicity.

    Eigenvalues within ``rel_tol * threshold`` of the threshold are not
    counted; :func:`torus_kernel_count` reports them.
    """
    ev = _torus_eigenvalues(a, threshold)
    band = rel_tol * max(abs(threshold), 1.0)
    return int(np.count_nonzero(ev < threshold - band))


def torus_kernel_count(a, threshold, rel_tol=1e-10):
    ev = _torus_eigenvalues(a, threshold * (1 + 4 * rel_tol) + 4 * rel_tol)
    band = rel_tol * max(abs(threshold), 1.0)
    return int(np.count_nonzero(np.abs(ev - threshold) <= band))


def lattice_count_bruteforce(a, threshold, radius):
    """Oracle for :func:`torus_spectrum_counts`: scan ``|j|, |k| <= radius``."""
    b = _torus_check(a)
    count = 0
    for j, k in product(range(-radius, radius + 1), repeat=2):
        if (j / a) ** 2 + (k / b) ** 2 < threshold:
            count += 1
    return count
