import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad, simpson

from capindex.errors import NotMinimal, QuadTooCoarse, UnsupportedSurface
from capindex.geometry import make_surface
from capindex.upsilon import (
    catenoid_upsilon_closed_form,
    compute_upsilon,
    cylinder_upsilon_closed_form,
    index_lower_bound,
    is_hyperplanar,
    is_umbilical,
    minimal_inequality_check,
    sample_surface,
    trace_identity,
)


def brute_force_cylinder_upsilon(r, nt=801, ntau=400):
    """[DERIVED] oracle for n = 2: Simpson in t, trapezoid in the angle, straight
    from the definition with X = (t, r cos tau, r sin tau) and nu = (0, cos tau, sin tau)."""
    n = 2
    T = math.sqrt(1 - r * r)
    H = 1.0 / r
    aring = 1.0 / (2 * r * r)  # |A|^2 - H^2/n
    t = np.linspace(-T, T, nt)
    tau = 2 * math.pi * np.arange(ntau) / ntau
    tt, aa = np.meshgrid(t, tau, indexing="ij")
    X = np.stack([tt, r * np.cos(aa), r * np.sin(aa)], axis=-1)
    nu = np.stack([np.zeros_like(tt), np.cos(aa), np.sin(aa)], axis=-1)
    w = np.sum(X * nu, axis=-1)
    x2 = np.sum(X * X, axis=-1)
    V = (n - H * w)[..., None] * X + (n * (-r) + 0.5 * H * (x2 + 1))[..., None] * nu
    out = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            dens = n * aring * V[..., i] * X[..., j] * r
            out[i, j] = simpson(np.sum(dens, axis=1) * (2 * math.pi / ntau), x=t)
    return out


def test_cylinder_against_brute_force():
    r = 0.6
    ups = compute_upsilon(make_surface("cylinder", n=2, r=r), 64)
    ref = brute_force_cylinder_upsilon(r)
    assert np.allclose(ups.entries, ref, atol=1e-8 * np.max(np.abs(ref)))


@pytest.mark.parametrize("n,r", [(2, 0.3), (2, 0.6), (3, 0.5), (4, 0.7)])
def test_cylinder_diagonal_and_bound(n, r):
    s = make_surface("cylinder", n=n, r=r)
    ups = compute_upsilon(s, 64)
    diag = np.diag(ups.entries)
    closed = cylinder_upsilon_closed_form(n, r)
    assert np.all(diag > 0)
    assert np.max(np.abs(diag - closed) / closed) <= 1e-8
    assert ups.off_diagonal_residual <= 1e-8
    assert ups.ell == n + 1
    assert index_lower_bound(s, ups) == (n + 1, "generic")


def test_catenoid_upsilon():
    s = make_surface("catenoid")
    ups = compute_upsilon(s, 64)
    assert np.allclose(np.diag(ups.entries), catenoid_upsilon_closed_form(s.T, s.c), rtol=1e-10)
    # [DERIVED] third diagonal entry against adaptive quadrature
    m2 = quad(lambda t: t * t / math.cosh(t) ** 2, -s.T, s.T, epsabs=1e-14)[0]
    assert ups.entries[2, 2] == pytest.approx(16 * math.pi * s.c**2 * m2, rel=1e-10)
    assert ups.off_diagonal_residual <= 1e-12
    assert index_lower_bound(s, ups) == (3, "generic")


def test_disk_is_umbilical():
    d = make_surface("disk")
    ups = compute_upsilon(d, 32)
    assert np.all(ups.entries == 0.0)
    assert index_lower_bound(d, ups) == (0, "umbilical")
    assert is_umbilical(sample_surface(d, 32))


def test_hyperplanar_detection():
    d = sample_surface(make_surface("disk"), 32)
    # |Å|^2 X with |Å|^2 = 1 stays in the plane z = 0
    flat = replace(d, traceless_sq=np.ones_like(d.traceless_sq))
    assert is_hyperplanar(flat, affine=False)
    assert is_hyperplanar(flat)
    assert not is_hyperplanar(sample_surface(make_surface("cylinder", n=2, r=0.5), 32))


def test_frame_rotation():
    s = make_surface("cylinder", n=3, r=0.55)
    base = compute_upsilon(s, 64)
    rng = np.random.default_rng(3)
    for _ in range(3):
        q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
        rot = compute_upsilon(s, 64, frame=q)
        assert np.allclose(rot.entries, q.T @ base.entries @ q, atol=1e-10)
        assert rot.ell == base.ell


def test_ell_tolerance_is_configurable():
    s = make_surface("cylinder", n=2, r=0.5)
    assert compute_upsilon(s, 64, eps=-2.0).ell == 0
    assert compute_upsilon(s, 64, eps=1e-9).ell == 3


@pytest.mark.parametrize("surface", [make_surface("cylinder", n=2, r=0.4),
                                     make_surface("cylinder", n=3, r=0.7),
                                     make_surface("catenoid")])
def test_trace_identity(surface):
    tr = trace_identity(surface, 64)
    assert tr.residual <= 1e-8
    # the capillary boundary condition makes Phi vanish on the boundary
    assert tr.boundary_phi <= 1e-12


def test_quadrature_guards():
    with pytest.raises(QuadTooCoarse):
        compute_upsilon(make_surface("catenoid"), 16)
    with pytest.raises(UnsupportedSurface):
        compute_upsilon(make_surface("torus", a=0.5), 64)


def test_sample_input_skips_refinement():
    s = make_surface("catenoid")
    sample = sample_surface(s, 64)
    assert np.allclose(compute_upsilon(sample).entries, compute_upsilon(s, 64).entries)


def test_minimal_inequality_needs_minimal_surface():
    with pytest.raises(NotMinimal):
        minimal_inequality_check(make_surface("cylinder", n=2, r=0.5), [1, 0, 0])


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=3, max_size=3).filter(
    lambda v: np.linalg.norm(v) > 1e-3))
def test_minimal_inequality_on_catenoid(v):
    check = minimal_inequality_check(make_surface("catenoid"), v, 64)
    assert check.holds and check.rhs == 0.0
    assert np.all(check.lambdas > 0)


def test_matrix_carries_its_bound():
    s = make_surface("cylinder", n=3, r=0.5)
    ups = compute_upsilon(s, 64)
    assert (ups.lower_bound, ups.case) == index_lower_bound(s, ups) == (4, "generic")
    d = compute_upsilon(make_surface("disk"), 32)
    assert (d.ell, d.lower_bound, d.case) == (3, 0, "umbilical")


def test_umbilical_trace_identity():
    tr = trace_identity(make_surface("disk"), 32)
    assert tr.trace == 0.0 and tr.rhs == 0.0 and tr.residual == 0.0


@pytest.mark.parametrize("v", [[0, 0, 1], [1, 0, 0]])
def test_minimal_inequality_axes(v):
    check = minimal_inequality_check(make_surface("catenoid"), v, 64)
    assert check.holds and check.rhs == 0.0 and check.lhs > 0
