"""Morse indices under volume / wetting-area constraints.

Each constrained index differs from the unconstrained one by an offset
``c`` in {0, -1}. The offset is -1 exactly when an inhomogeneous Jacobi problem
has a solution ``u`` whose constraint functional is non-positive:

==============  =====  =================  ===============
constraint      J u    boundary           functional
==============  =====  =================  ===============
typeI           -1     d_eta u - q u = 0  int_Sigma u
typeII          0      d_eta u - q u = 1  int_{dSigma} u
closedWeak      -1     (none)             int_Sigma u
fixedBoundary   -1     u = 0              int_Sigma u
==============  =====  =================  ===============

The data are invariant under the symmetries of the model surfaces, so only the
rotation-invariant mode is solved. Solutions are computed by shooting: a
particular solution plus two fundamental solutions, all integrated with RK4,
then a 2x2 boundary system. A (near) singular boundary system signals a
kernel, and the Fredholm compatibility pairing decides solvability.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .errors import (
    ConstraintNotApplicable,
    DecompositionMismatch,
    FredholmObstruction,
    IllConditioned,
)
from .geometry import SurfaceKind, radial_mode, reduce_to_modes
from .roots import Equation, RootSpec, enumerate_roots
from .spectrum import (
    EPS_COUNT,
    dirichlet_inertia,
    mode_truncation_bound,
    morse_index_total,
    propagate,
)
from .upsilon import ELL_EPS, compute_upsilon, index_lower_bound

SINGULAR_TOL = 1e-8
COMPAT_TOL = 1e-8
EPS_INT = 1e-8
SINGULAR_SET_TOL = 1e-10
STEP_FACTOR = 16


class Constraint(str, enum.Enum):
    TYPE_I = "typeI"
    TYPE_II = "typeII"
    TYPE_I_II = "typeI+II"
    CLOSED_WEAK = "closedWeak"
    FIXED_BOUNDARY = "fixedBoundary"


def parse_constraints(text):
    """``"typeI,typeII"`` -> ``[Constraint.TYPE_I, Constraint.TYPE_II]``."""
    items = [s.strip() for s in text.split(",")] if isinstance(text, str) else list(text)
    return [Constraint(s) for s in items if s]


@dataclass(frozen=True)
class InhomogeneousSolution:
    """Radial solution of ``J u = f`` with Robin (or Dirichlet) data ``g``."""

    t: np.ndarray
    u: np.ndarray
    du: np.ndarray
    residual: float
    interior_integral: float
    boundary_integral: float
    singular_ratio: float
    min_norm: bool = False
    compatibility: tuple = ()

    @property
    def boundary_values(self):
        return float(self.u[0]), float(self.u[-1])


def _as_function(data):
    if callable(data):
        return data
    value = float(data)
    return lambda t: np.full_like(np.asarray(t, dtype=float), value)


def _as_pair(g):
    if np.ndim(g) == 0:
        return float(g), float(g)
    left, right = g
    return float(left), float(right)


def _boundary_system(mode, ys, dys, g, boundary):
    """Rows of the 2x2 system for the coefficients of the fundamental solutions
    ``y1`` (value 1 at -T) and ``y2`` (slope 1 at -T)."""
    q = mode.robin_coeff
    bf = mode.boundary_factor
    gl, gr = _as_pair(g)
    up, y1, y2 = ys[-1]
    dup, d1, d2 = dys[-1]
    if boundary == "robin":
        # left: -u'(-T) - q u(-T) = bf g;  right: u'(T) - q u(T) = bf g
        M = np.array([[-q, -1.0], [d1 - q * y1, d2 - q * y2]])
        rhs = np.array([bf * gl, bf * gr - (dup - q * up)])
    else:
        M = np.array([[1.0, 0.0], [y1, y2]])
        rhs = np.array([gl, gr - up])
    return M, rhs


def _shoot(mode, f, steps):
    source_factor = mode.source_factor

    def source(t):
        return source_factor(t) * f(t)

    return propagate(mode.potential, mode.half_length, [0.0, 1.0, 0.0], [0.0, 0.0, 1.0],
                     steps, source=source, source_cols=[1.0, 0.0, 0.0])


def _singular_ratio(M):
    s = np.linalg.svd(M, compute_uv=False)
    return s[-1] / s[0] if s[0] > 0 else 0.0


def _integrals(mode, t, u):
    interior = mode.angular_measure * simpson(u * mode.area_density(t), x=t)
    boundary = mode.angular_measure * mode.boundary_density * (u[0] + u[-1])
    return float(interior), float(boundary)


def _compatibility(mode, t, v, dv, f, g, boundary):
    """``(f, v)_Sigma - (g, v)_dSigma`` (Robin) or ``(f, v)_Sigma + (g, d_eta v)``
    (Dirichlet) with the surface measures."""
    gl, gr = _as_pair(g)
    interior = simpson(f(t) * v * mode.area_density(t), x=t)
    if boundary == "robin":
        bdry = -mode.boundary_density * (gl * v[0] + gr * v[-1])
    else:
        scale = mode.boundary_density / mode.boundary_factor
        bdry = scale * (gl * (-dv[0]) + gr * dv[-1])
    magnitude = simpson(np.abs(f(t) * v) * mode.area_density(t), x=t) \
        + mode.boundary_density * (abs(gl * v[0]) + abs(gr * v[-1]))
    return mode.angular_measure * float(interior + bdry), mode.angular_measure * float(magnitude)


def _residual(mode, f, t, u, du, g, boundary, steps):
    """Re-integrate from the computed Cauchy data at -T with twice the steps and
    measure the boundary-condition and trajectory defects."""
    src = mode.source_factor
    _, ys, dys = propagate(mode.potential, mode.half_length, [u[0]], [du[0]], 2 * steps,
                           source=lambda s: src(s) * f(s), source_cols=[1.0])
    uf, duf = ys[:, 0], dys[:, 0]
    q = mode.robin_coeff
    gl, gr = _as_pair(g)
    if boundary == "robin":
        bf = mode.boundary_factor
        defects = [-duf[0] - q * uf[0] - bf * gl, duf[-1] - q * uf[-1] - bf * gr]
    else:
        defects = [uf[0] - gl, uf[-1] - gr]
    drift = np.max(np.abs(uf[::2] - u))
    scale = 1.0 + np.max(np.abs(u)) + abs(gl) + abs(gr)
    return float(max(max(abs(d) for d in defects), drift) / scale)


def _solve_once(mode, f, g, steps, boundary):
    t, ys, dys = _shoot(mode, f, steps)
    M, rhs = _boundary_system(mode, ys, dys, g, boundary)
    ratio = _singular_ratio(M)
    return t, ys, dys, M, rhs, ratio


def solve_inhomogeneous(mode, f=0.0, g=0.0, grid_n=256, boundary="robin",
                        singular_tol=SINGULAR_TOL, compat_tol=COMPAT_TOL):
    """Solve ``J u = f`` on the mode with ``d_eta u - q u = g`` (``boundary="robin"``)
    or ``u = g`` (``boundary="dirichlet"``).

    ``f`` is a constant or a function of ``t``; ``g`` is a constant or a pair
    ``(g(-T), g(T))``. Raises :class:`FredholmObstruction` when the boundary
    system is singular and the data are not orthogonal to the kernel; returns
    the minimum-norm solution when they are.
    """
    if boundary not in ("robin", "dirichlet"):
        raise ValueError(f"unknown boundary condition {boundary!r}")
    f = _as_function(f)
    steps = STEP_FACTOR * grid_n
    t, ys, dys, M, rhs, ratio = _solve_once(mode, f, g, steps, boundary)
    singular = ratio <= singular_tol
    if singular_tol / 100.0 < ratio < singular_tol * 100.0:
        t, ys, dys, M, rhs, ratio = _solve_once(mode, f, g, 2 * steps, boundary)
        steps *= 2
        if (ratio <= singular_tol) != singular:
            raise IllConditioned(
                f"boundary system near singular (ratio {ratio:.3e}); decision not stable")

    compat = ()
    min_norm = False
    if singular:
        _, _, vt = np.linalg.svd(M)
        coef = vt[-1]
        v = coef[0] * ys[:, 1] + coef[1] * ys[:, 2]
        dv = coef[0] * dys[:, 1] + coef[1] * dys[:, 2]
        norm = np.max(np.abs(v))
        v, dv = v / norm, dv / norm
        pairing, magnitude = _compatibility(mode, t, v, dv, f, g, boundary)
        compat = (pairing,)
        if abs(pairing) > compat_tol * max(magnitude, 1e-300) or magnitude == 0.0 and pairing:
            raise FredholmObstruction(
                f"mode {mode.mode_id}: data not orthogonal to the kernel "
                f"(pairing {pairing:.6e})",
                kernel=[(t, v)], compatibility=compat, singular_ratio=ratio)
        coeffs = np.linalg.lstsq(M, rhs, rcond=singular_tol)[0]
        min_norm = True
    else:
        coeffs = np.linalg.solve(M, rhs)

    u = ys[:, 0] + coeffs[0] * ys[:, 1] + coeffs[1] * ys[:, 2]
    du = dys[:, 0] + coeffs[0] * dys[:, 1] + coeffs[1] * dys[:, 2]
    if min_norm:
        # remove the kernel component in L^2(area)
        w = mode.area_density(t)
        proj = simpson(u * v * w, x=t) / simpson(v * v * w, x=t)
        u, du = u - proj * v, du - proj * dv
    residual = _residual(mode, f, t, u, du, g, boundary, steps)
    interior, bdry = _integrals(mode, t, u)
    return InhomogeneousSolution(t, u, du, residual, interior, bdry, float(ratio),
                                 min_norm, compat)


@dataclass(frozen=True)
class Certificate:
    """Evidence behind one offset decision."""

    functional: str
    value: float
    threshold: float
    interior_integral: float | None = None
    boundary_integral: float | None = None
    boundary_values: tuple | None = None
    residual: float | None = None
    singular_ratio: float | None = None
    compatibility: tuple = ()
    solvable: bool = True
    min_norm: bool = False
    method: str = "shooting"

    def to_dict(self):
        return {
            "functional": self.functional,
            "value": self.value,
            "threshold": self.threshold,
            "interior_integral": self.interior_integral,
            "boundary_integral": self.boundary_integral,
            "boundary_values": list(self.boundary_values) if self.boundary_values else None,
            "residual": self.residual,
            "singular_ratio": self.singular_ratio,
            "compatibility": list(self.compatibility),
            "solvable": self.solvable,
            "min_norm": self.min_norm,
            "method": self.method,
        }


@dataclass(frozen=True)
class Offset:
    c: int
    certificate: Certificate

    @property
    def obstructed(self):
        return not self.certificate.solvable


_PROBLEMS = {
    Constraint.TYPE_I: (-1.0, 0.0, "robin", "interior"),
    Constraint.TYPE_II: (0.0, 1.0, "robin", "boundary"),
    Constraint.FIXED_BOUNDARY: (-1.0, 0.0, "dirichlet", "interior"),
}


def _check_applicable(surface, constraint):
    if constraint == Constraint.TYPE_I_II:
        raise ConstraintNotApplicable(
            "typeI+II has no offset rule; it is reported as an interval")
    if constraint == Constraint.CLOSED_WEAK:
        if surface.has_boundary:
            raise ConstraintNotApplicable("closedWeak needs a closed surface")
        return
    if not surface.has_boundary:
        raise ConstraintNotApplicable(f"{constraint.value} needs a boundary")
    if constraint == Constraint.TYPE_II and abs(surface.H) > 0.0:
        raise ConstraintNotApplicable("type II stationary surfaces are minimal (H = 0)")


def _disk_offset(constraint, eps_rel):
    # closed forms on the unit disk: J = Laplacian, q = 1
    area, length = math.pi, 2.0 * math.pi
    if constraint == Constraint.TYPE_I:
        # u = -(rho^2 + 1)/4: int u = -3 pi / 8
        val = -3.0 * math.pi / 8.0
        cert = Certificate("interior", val, eps_rel * area, val, -math.pi, (-0.5, -0.5),
                           0.0, method="closed form")
    elif constraint == Constraint.TYPE_II:
        # u = -1
        cert = Certificate("boundary", -length, eps_rel * length, -area, -length,
                           (-1.0, -1.0), 0.0, method="closed form")
    else:
        # u = (1 - rho^2)/4: int u = pi / 8 > 0
        val = math.pi / 8.0
        cert = Certificate("interior", val, eps_rel * area, val, 0.0, (0.0, 0.0), 0.0,
                           method="closed form")
    return Offset(-1 if cert.value <= cert.threshold else 0, cert)


def criticality_offset(surface, constraint, grid_n=256, eps_int=EPS_INT,
                       typeII_functional="boundary"):
    """Offset ``c`` in {0, -1} for ``constraint`` with its certificate.

    For type II the deciding functional is the boundary integral of ``u``
    (the constraint functional itself); ``typeII_functional="interior"``
    switches to the area integral. Both integrals are always recorded.
    """
    constraint = Constraint(constraint)
    _check_applicable(surface, constraint)
    if constraint == Constraint.CLOSED_WEAK:
        p = float(surface.p(0.0))
        if not surface.p.is_constant() or p == 0.0:
            raise ConstraintNotApplicable("closedWeak is implemented for constant p != 0")
        # u = -1/p solves (Delta + p) u = -1; kernel functions are orthogonal to 1
        val = -surface.area / p
        cert = Certificate("interior", val, eps_int * surface.area, val, None,
                           None, 0.0, method="constant p")
        return Offset(-1 if val <= cert.threshold else 0, cert)
    if surface.kind == SurfaceKind.DISK:
        return _disk_offset(constraint, eps_int)

    f, g, boundary, functional = _PROBLEMS[constraint]
    if constraint == Constraint.TYPE_II:
        functional = typeII_functional
    measure = surface.area if functional == "interior" else surface.boundary_length
    threshold = eps_int * measure
    mode = radial_mode(surface)
    try:
        sol = solve_inhomogeneous(mode, f, g, grid_n, boundary)
    except FredholmObstruction as exc:
        cert = Certificate(functional, math.nan, threshold, singular_ratio=exc.singular_ratio,
                           compatibility=tuple(exc.compatibility), solvable=False)
        return Offset(0, cert)
    value = sol.interior_integral if functional == "interior" else sol.boundary_integral
    cert = Certificate(functional, value, threshold, sol.interior_integral,
                       sol.boundary_integral, sol.boundary_values, sol.residual,
                       sol.singular_ratio, sol.compatibility, True, sol.min_norm)
    return Offset(-1 if value <= threshold else 0, cert)


def base_index(surface, constraint, grid_n=256, eps_rel=EPS_COUNT):
    """Index the offset applies to: ``MI(Q)``, or the Dirichlet index for the
    fixed-boundary problem."""
    if Constraint(constraint) == Constraint.FIXED_BOUNDARY:
        if surface.kind == SurfaceKind.DISK:
            return 0  # the Dirichlet Laplacian is positive
        k_max = mode_truncation_bound(surface)
        return sum(m.multiplicity * dirichlet_inertia(m, grid_n, eps_rel).negative
                   for m in reduce_to_modes(surface, k_max))
    return mi_q(surface, grid_n, eps_rel)


def mi_q(surface, grid_n=256, eps_rel=EPS_COUNT):
    if surface.kind == SurfaceKind.DISK:
        return DISK_MI
    return morse_index_total(surface, grid_n, eps_rel=eps_rel).mi_q


def constrained_index(surface, constraint, grid_n=256):
    """``base index + c`` for typeI, typeII, closedWeak or fixedBoundary."""
    offset = criticality_offset(surface, constraint, grid_n)
    return base_index(surface, constraint, grid_n) + offset.c


# unit disk: Robin spectrum of the Laplacian with d_rho u = u has one negative
# eigenvalue (constants); Dirichlet spectrum is positive; Steklov {0, 1, 1, 2, ...}
DISK_MI = 1
DISK_AB = (0, 1)


@dataclass(frozen=True)
class TypeIClassification:
    """Closed-form type-I verdict for the cylinder."""

    label: str
    x: float
    fredholm: bool
    margin: float | None

    @property
    def offset(self):
        return -1 if self.label == "Reduced" else 0


def cylinder_typeI_closed_form(n, r):
    """``Unchanged`` if ``cos x + x sin x = 0`` or ``x < sin x / (x sin x + cos x)``,
    ``Reduced`` otherwise, with ``x = T sqrt(n - 1) / r``."""
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie in (0, 1)")
    x = math.sqrt(1.0 - r * r) * math.sqrt(n - 1) / r
    denom = x * math.sin(x) + math.cos(x)
    if abs(denom) <= SINGULAR_SET_TOL * (1.0 + x):
        return TypeIClassification("Unchanged", x, True, None)
    margin = x - math.sin(x) / denom
    return TypeIClassification("Unchanged" if margin < 0 else "Reduced", x, False, margin)


def cylinder_typeI_solution(n, r, t):
    """``u = C cos(t sqrt(n-1)/r) - r^2/(n-1)`` with ``C (x sin x + cos x) = r^2/(n-1)``."""
    x = math.sqrt(1.0 - r * r) * math.sqrt(n - 1) / r
    k = r * r / (n - 1)
    C = k / (x * math.sin(x) + math.cos(x))
    return C * np.cos(np.asarray(t) * math.sqrt(n - 1) / r) - k


def fredholm_radii(n, r_min=0.05, r_max=0.999999):
    """Cylinder radii in ``[r_min, r_max]`` where the radial type-I problem is
    obstructed: ``r = sqrt((n-1)/(x^2 + n-1))`` for roots ``x`` of
    ``cos x + x sin x = 0``."""
    x_max = math.sqrt(n - 1) * math.sqrt(1.0 - r_min**2) / r_min
    radii = [math.sqrt((n - 1) / (x * x + n - 1))
             for x in enumerate_roots(RootSpec(Equation.FREDHOLM_CYL, x_max))]
    return sorted(r for r in radii if r_min <= r <= r_max)


def catenoid_typeI_solution(t, T, c):
    """``u = -a cosh^2 t + b (1 - t tanh t)`` with ``a = c^2/4``.

    The Robin condition ``T u'(T) = u(T)`` together with ``T tanh T = 1`` gives
    ``b = -a cosh^2 T / T^2 = -a sinh^2 T``. The boundary value
    ``u(+-T) = -a cosh^2 T`` does not depend on ``b``.
    """
    a = c * c / 4.0
    b = -a * math.sinh(T) ** 2
    t = np.asarray(t, dtype=float)
    return -a * np.cosh(t) ** 2 + b * (1.0 - t * np.tanh(t))


def catenoid_typeII_coefficient(T):
    """``a`` in ``u = a (1 - t tanh t)``: ``a = -1/(T tanh T + T^2 sech^2 T)``,
    which equals ``-tanh^2 T`` on the critical catenoid."""
    return -1.0 / (T * math.tanh(T) + T * T / math.cosh(T) ** 2)


def catenoid_typeII_solution(t, T):
    t = np.asarray(t, dtype=float)
    return catenoid_typeII_coefficient(T) * (1.0 - t * np.tanh(t))


@dataclass(frozen=True)
class Decomposition:
    a: int
    b: int
    c: int
    mi_q: int

    @property
    def total(self):
        return self.a + self.b + self.c


def decomposition_abc(surface, constraint, grid_n=256, eps_rel=EPS_COUNT, mi=None):
    """``(a, b, c)`` with ``a`` the nonpositive Dirichlet count, ``b`` the
    Jacobi-Steklov count below one, and ``c`` the constraint offset."""
    if not surface.has_boundary:
        raise ConstraintNotApplicable("the decomposition needs a boundary")
    if surface.kind == SurfaceKind.DISK:
        a, b = DISK_AB
        total = DISK_MI
    else:
        res = mi if mi is not None else morse_index_total(surface, grid_n, eps_rel=eps_rel)
        a, b, total = res.dirichlet_total, res.steklov_total, res.mi_q
        if b is None or a + b != total:
            refined = morse_index_total(surface, 2 * grid_n, eps_rel=eps_rel)
            a, b, total = refined.dirichlet_total, refined.steklov_total, refined.mi_q
            if b is None or a + b != total:
                raise DecompositionMismatch(f"a + b = {a} + {b} != MI(Q) = {total}")
    c = criticality_offset(surface, constraint, grid_n).c
    return Decomposition(a, b, c, total)


@dataclass
class IndexReport:
    """Unconstrained index, constraint offsets and everything behind them."""

    surface: dict
    mi_q: int
    offsets: dict = field(default_factory=dict)
    constrained: dict = field(default_factory=dict)
    certificates: dict = field(default_factory=dict)
    fredholm_obstructed: dict = field(default_factory=dict)
    decomposition: dict = field(default_factory=dict)
    intervals: dict = field(default_factory=dict)
    classification: str | None = None
    modes: list = field(default_factory=list)
    k_max: int | None = None
    grid_sizes: tuple | None = None
    nullity: int = 0
    kernel_flag: bool = False
    indeterminate: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "surface": self.surface,
            "mi_q": self.mi_q,
            "offsets": dict(self.offsets),
            "constrained": dict(self.constrained),
            "intervals": {k: list(v) for k, v in self.intervals.items()},
            "decomposition": {k: list(v) for k, v in self.decomposition.items()},
            "fredholm_obstructed": dict(self.fredholm_obstructed),
            "classification": self.classification,
            "certificates": {k: v.to_dict() for k, v in self.certificates.items()},
            "modes": list(self.modes),
            "k_max": self.k_max,
            "grid_sizes": list(self.grid_sizes) if self.grid_sizes else None,
            "nullity": self.nullity,
            "kernel_flag": self.kernel_flag,
            "indeterminate": list(self.indeterminate),
            "notes": list(self.notes),
        }


def _mode_rows(result):
    rows = []
    for m in result.modes:
        c = m.counts
        rows.append({
            "mode": m.mode_id,
            "multiplicity": m.multiplicity,
            "negative_robin": c.negative_robin,
            "nonpositive_dirichlet": c.nonpositive_dirichlet,
            "steklov_below_one": c.steklov_below_one,
            "kernel_flag": c.kernel_flag,
            "dirichlet_kernel": c.dirichlet_kernel,
            "stable": c.stable,
        })
    return rows


def index_report(surface, constraints=(Constraint.TYPE_I,), grid_n=256, quad_n=128,
                 k_max=None, eps_rel=EPS_COUNT, eps_int=EPS_INT, eps_upsilon=ELL_EPS):
    """Assemble an :class:`IndexReport` for the requested constraints.

    Problems the numerics cannot settle are listed in ``indeterminate``
    instead of raising.
    """
    constraints = [Constraint(c) for c in constraints]
    report = IndexReport(surface=surface.describe(), mi_q=0)
    if surface.kind == SurfaceKind.DISK:
        report.mi_q = DISK_MI
    else:
        res = morse_index_total(surface, grid_n, k_max=k_max, eps_rel=eps_rel)
        report.mi_q = res.mi_q
        report.modes = _mode_rows(res)
        report.k_max = res.k_max
        report.grid_sizes = res.grid_sizes
        report.nullity = res.nullity
        report.kernel_flag = res.nullity > 0 or any(r["kernel_flag"] for r in report.modes)
        if not res.stable:
            report.indeterminate.append("mode counts differ between grid sizes")
        if surface.kind == SurfaceKind.TORUS and res.nullity:
            report.notes.append(f"{res.nullity} lattice eigenvalue(s) equal p")
        for row in report.modes:
            if row["dirichlet_kernel"]:
                report.notes.append(
                    f"mode {row['mode']}: Dirichlet kernel; Steklov count taken at V - 1e-7")
    if surface.kind == SurfaceKind.CYLINDER:
        report.classification = cylinder_typeI_closed_form(surface.n, surface.r).label

    for con in constraints:
        if con == Constraint.TYPE_I_II:
            continue
        key = con.value
        try:
            off = criticality_offset(surface, con, grid_n, eps_int)
        except ConstraintNotApplicable as exc:
            report.notes.append(f"{key}: {exc}")
            continue
        except IllConditioned as exc:
            report.indeterminate.append(f"{key}: {exc}")
            continue
        base = report.mi_q if con != Constraint.FIXED_BOUNDARY else \
            base_index(surface, con, grid_n, eps_rel)
        report.offsets[key] = off.c
        report.constrained[key] = base + off.c
        report.certificates[key] = off.certificate
        report.fredholm_obstructed[key] = off.obstructed
        _note_certificate(report, key, off.certificate)
        if surface.has_boundary and con in (Constraint.TYPE_I, Constraint.TYPE_II):
            try:
                if surface.kind == SurfaceKind.DISK:
                    a, b = DISK_AB
                else:
                    a, b = res.dirichlet_total, res.steklov_total
                    if b is None or a + b != res.mi_q:
                        raise DecompositionMismatch(f"a + b = {a} + {b} != {res.mi_q}")
                report.decomposition[key] = (a, b, off.c)
            except DecompositionMismatch as exc:
                report.indeterminate.append(f"{key} decomposition: {exc}")

    if Constraint.TYPE_I_II in constraints:
        _type_i_ii(surface, report, grid_n, quad_n, eps_int, eps_upsilon)
    if report.certificates:
        report.notes.append("certificates are discrete solutions; smoothness of u is not attested")
    return report


def _note_certificate(report, key, cert):
    if cert.solvable and abs(cert.value) <= cert.threshold:
        report.notes.append(
            f"{key}: constraint functional {cert.value:.3e} is within eps_int of 0; "
            "treated as <= 0")


def _type_i_ii(surface, report, grid_n, quad_n, eps_int, eps_upsilon):
    if surface.kind == SurfaceKind.TORUS:
        report.notes.append("typeI+II: needs a boundary")
        return
    upper = []
    for con in (Constraint.TYPE_I, Constraint.TYPE_II):
        if con.value not in report.constrained:
            try:
                off = criticality_offset(surface, con, grid_n, eps_int)
            except ConstraintNotApplicable:
                continue
            except IllConditioned as exc:
                report.indeterminate.append(f"typeI+II upper bound: {exc}")
                return
            report.constrained[con.value] = report.mi_q + off.c
            report.offsets[con.value] = off.c
            report.certificates[con.value] = off.certificate
            report.fredholm_obstructed[con.value] = off.obstructed
            _note_certificate(report, con.value, off.certificate)
        upper.append(report.constrained[con.value])
    ups = compute_upsilon(surface, quad_n, eps=eps_upsilon)
    lower, label = index_lower_bound(surface, ups)
    hi = min(upper)
    report.intervals[Constraint.TYPE_I_II.value] = (lower, hi)
    if lower == hi:
        report.constrained[Constraint.TYPE_I_II.value] = lower
    elif lower > hi:
        report.indeterminate.append(f"typeI+II: empty interval [{lower}, {hi}]")
    report.notes.append(f"typeI+II lower bound case: {label}")
