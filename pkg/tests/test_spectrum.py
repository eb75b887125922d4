import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from capindex.errors import DirichletKernel, GridTooCoarse, NearKernel, UnsupportedSurface
from capindex.geometry import Coefficient, ModeProblem, make_surface, radial_mode, reduce_to_modes
from capindex.roots import coth_fixed_point
from capindex.spectrum import (
    assemble,
    count_below,
    count_dirichlet_nonpositive,
    count_negative_robin,
    count_steklov_below_one,
    cylinder_index_analytic,
    cylinder_window,
    dense_oracle,
    dirichlet_kernel_residual,
    discrete_dtn,
    dtn_matrix,
    mode_truncation_bound,
    morse_index_total,
    robin_ground_level,
    robin_kernel_residual,
    spectral_count,
    steklov_values,
    sturm_count,
)


def flat_mode(T=1.0, v=0.0, q=None, weight=1.0):
    return ModeProblem(half_length=T, potential=Coefficient(v),
                       robin_coeff=1.0 / T if q is None else q,
                       multiplicity=1, mode_id=0, weight=Coefficient(weight))


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=1, max_value=40), st.integers(min_value=0, max_value=10**6))
def test_sturm_count_matches_eigvalsh(size, seed):
    rng = np.random.default_rng(seed)
    diag = rng.normal(size=size)
    off = rng.normal(size=size - 1)
    dense = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    ev = np.linalg.eigvalsh(dense)
    assert sturm_count(diag, off) == int(np.count_nonzero(ev < 0))


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 2.0), st.floats(-30.0, 30.0), st.floats(-3.0, 3.0))
def test_pencil_count_matches_dense(T, v, q):
    mode = flat_mode(T, v, q)
    form = assemble(mode, 64)
    ev = dense_oracle(mode, 64)
    gap = np.min(np.abs(ev))
    if gap < 1e-8:
        return
    assert count_below(form, 0.0) == int(np.count_nonzero(ev < 0))


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 2.0), st.floats(-30.0, 30.0), st.floats(0.1, 10.0))
def test_count_invariant_under_weight(T, v, w):
    mode = flat_mode(T, v)
    assert count_negative_robin(mode.with_weight(Coefficient(w)), 64) == \
        count_negative_robin(mode, 64)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 2.0), st.floats(-30.0, 30.0), st.floats(0.0, 20.0))
def test_count_monotone_in_potential(T, v, dv):
    assert count_negative_robin(flat_mode(T, v + dv), 64) <= count_negative_robin(flat_mode(T, v), 64)


def test_dense_oracle_weight_scaling():
    mode = flat_mode(0.7, -5.0)
    ev1 = dense_oracle(mode, 64)
    ev2 = dense_oracle(mode.with_weight(Coefficient(2.0)), 64)
    assert np.allclose(ev1, 2.0 * ev2)


def test_dense_oracle_rejects_unknown_boundary():
    with pytest.raises(ValueError):
        dense_oracle(flat_mode(), 64, "neumann")


def test_grid_too_coarse():
    with pytest.raises(GridTooCoarse):
        assemble(flat_mode(), 32)
    with pytest.raises(GridTooCoarse):
        dtn_matrix(flat_mode(), 16)


def test_robin_ground_level_matches_fd():
    # qhat T = 1: y tanh y = 1, i.e. y = T0
    T = 0.8
    assert robin_ground_level(1.0 / T, T) == pytest.approx(-(coth_fixed_point() / T) ** 2)
    ev = dense_oracle(flat_mode(T), 512)
    assert ev[0] == pytest.approx(robin_ground_level(1.0 / T, T), rel=1e-4)
    assert robin_ground_level(0.5, T) < 0


def test_free_steklov_values_are_zero_and_one():
    # V = 0: J-harmonic functions are affine, DtN = (1/2T) [[1, -1], [-1, 1]], qhat = 1/T
    mode = flat_mode(0.6)
    mu = np.sort(steklov_values(mode, 128))
    assert np.allclose(mu, [0.0, 1.0], atol=1e-10)
    assert count_steklov_below_one(mode, 128) == 1
    with pytest.raises(NearKernel) as info:
        count_steklov_below_one(mode, 128, strict=True)
    assert info.value.count == 1


def test_steklov_needs_positive_qhat():
    with pytest.raises(ValueError):
        count_steklov_below_one(flat_mode(q=0.0), 128)


def test_single_dirichlet_eigenvalue_below_zero():
    T = 0.9
    mode = flat_mode(T, -(math.pi / (2 * T)) ** 2 - 0.01)
    assert count_dirichlet_nonpositive(mode, 256) == 1
    mode = flat_mode(T, -(math.pi / (2 * T)) ** 2 + 0.01)
    assert count_dirichlet_nonpositive(mode, 256) == 0


def test_dtn_converges_to_schur_complement():
    mode = reduce_to_modes(make_surface("cylinder", n=2, r=0.3), 2)[2]
    exact = dtn_matrix(mode, 256)
    errs = [np.max(np.abs(exact - discrete_dtn(mode, g))) for g in (128, 256, 512)]
    assert errs[-1] / np.max(np.abs(exact)) < 1e-3
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_dtn_is_symmetric():
    mode = reduce_to_modes(make_surface("catenoid"), 2)[2]
    lam = dtn_matrix(mode, 256)
    assert np.max(np.abs(lam - lam.T)) < 1e-10 * np.max(np.abs(lam))


def test_cylinder_k1_robin_kernel():
    # f = t solves f'' = 0 with f' = f / T at t = T
    mode = reduce_to_modes(make_surface("cylinder", n=2, r=0.5), 1)[1]
    assert robin_kernel_residual(mode) < 1e-12
    # V = 0 keeps the negative Robin ground state -(T0/T)^2
    assert count_negative_robin(mode, 256) == 1
    with pytest.raises(NearKernel) as info:
        count_negative_robin(mode, 256, strict=True)
    assert info.value.count == 1
    ev = dense_oracle(mode, 256)
    assert np.min(np.abs(ev)) < 1e-10


def test_catenoid_m0_dirichlet_kernel():
    # 1 - t tanh t vanishes at t = +-T because T tanh T = 1
    mode = reduce_to_modes(make_surface("catenoid"), 0)[0]
    assert dirichlet_kernel_residual(mode) < 1e-10
    with pytest.raises(DirichletKernel):
        dtn_matrix(mode, 256)
    assert count_steklov_below_one(mode, 256, resolve="nonpositive") == 1
    sc = spectral_count(mode, 128)
    assert sc.dirichlet_kernel and sc.kernel_flag
    # [DERIVED] 2 = 1 + 1 with the kernel counted on the Dirichlet side
    assert (sc.negative_robin, sc.nonpositive_dirichlet, sc.steklov_below_one) == (2, 1, 1)


def test_catenoid_index_and_decomposition():
    res = morse_index_total(make_surface("catenoid"), 128)
    assert res.mi_q == 4 and res.stable
    assert (res.dirichlet_total, res.steklov_total) == (1, 3)
    # [DERIVED] m = 0 carries 2, each m = 1 copy carries 1 plus a Robin kernel
    assert [m.counts.negative_robin for m in res.modes] == [2, 1, 0]
    assert res.nullity == 2
    assert res.k_max == 2


def test_mode_truncation_bounds():
    assert mode_truncation_bound(make_surface("catenoid")) == 2
    with pytest.raises(UnsupportedSurface):
        mode_truncation_bound(make_surface("torus", a=0.5))
    with pytest.raises(UnsupportedSurface):
        morse_index_total(make_surface("disk"))


def test_truncated_modes_are_positive():
    # every mode past the bound has no negative eigenvalue
    for s in (make_surface("catenoid"), make_surface("cylinder", n=3, r=0.3)):
        k = mode_truncation_bound(s)
        for mode in reduce_to_modes(s, k + 3)[k:]:
            assert dense_oracle(mode, 128)[0] > 0


def test_cylinder_window_endpoints():
    lo, hi = cylinder_window(2)
    assert lo == pytest.approx(0.33651, abs=1e-5)
    assert hi == pytest.approx(0.82207, abs=1e-5)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("r", np.round(np.linspace(0.1, 0.9, 9), 3))
def test_analytic_and_fd_agree(n, r):
    s = make_surface("cylinder", n=n, r=float(r))
    assert morse_index_total(s, 128).mi_q == cylinder_index_analytic(n, float(r))


def test_window_midpoint_index():
    lo, hi = cylinder_window(2)
    mid = 0.5 * (lo + hi)
    total, rows = cylinder_index_analytic(2, mid, per_mode=True)
    assert total == 4 and rows == {0: 2, 1: 1}
    res = morse_index_total(make_surface("cylinder", n=2, r=mid), 256)
    assert res.mi_q == 4 and (res.dirichlet_total, res.steklov_total) == (0, 4)


def test_index_grows_towards_the_ends():
    # [DERIVED] frozen from the FD counts at grid 256, cross-checked analytically
    assert cylinder_index_analytic(2, 0.05) == 15
    assert cylinder_index_analytic(2, 0.95) == 8
    assert morse_index_total(make_surface("cylinder", n=2, r=0.95), 256).mi_q == 8


def test_torus_index_at_clifford_radius():
    res = morse_index_total(make_surface("torus", a=1 / math.sqrt(2)))
    # p = 4 and lambda = 2 (j^2 + k^2): 1 + 4 below, the 4 with j^2 + k^2 = 2 at p
    assert res.mi_q == 5 and res.nullity == 4


def test_spectral_count_decomposition_on_generic_mode():
    mode = reduce_to_modes(make_surface("cylinder", n=2, r=0.3), 2)[2]
    sc = spectral_count(mode, 128)
    assert not sc.kernel_flag and sc.stable
    assert sc.negative_robin == sc.nonpositive_dirichlet + sc.steklov_below_one


def test_generalized_problem_against_scipy():
    mode = reduce_to_modes(make_surface("catenoid"), 1)[1]
    form = assemble(mode, 64)
    ev = scipy.linalg.eigvalsh(form.dense(), np.diag(form.mass))
    assert np.allclose(ev, dense_oracle(mode, 64))


@pytest.mark.parametrize("n", [2, 3])
def test_twenty_point_sweep(n):
    for r in np.linspace(0.06, 0.94, 20):
        s = make_surface("cylinder", n=n, r=float(r))
        assert morse_index_total(s, 128).mi_q == cylinder_index_analytic(n, float(r))


@pytest.mark.parametrize("n", [2, 3])
def test_window_is_the_minimum(n):
    lo, hi = cylinder_window(n)
    for r in np.linspace(0.05, 0.95, 37):
        mi = cylinder_index_analytic(n, float(r))
        if lo < r < hi:
            assert mi == n + 2
        else:
            assert mi > n + 2
    assert cylinder_index_analytic(n, lo - 1e-3) > n + 2
    assert cylinder_index_analytic(n, hi + 1e-3) > n + 2


def test_dense_oracle_flat_spectra():
    T = 0.75
    ev = dense_oracle(flat_mode(T), 1024, "dirichlet")
    j = np.arange(1, 6)
    assert np.allclose(ev[:5], (j * math.pi / (2 * T)) ** 2, rtol=1e-4)
    n, r = 2, 0.6
    mode = radial_mode(make_surface("cylinder", n=n, r=r))
    low = dense_oracle(mode, 1024)[0]
    assert low == pytest.approx(-(coth_fixed_point() / mode.half_length) ** 2 - (n - 1) / r**2,
                                rel=1e-5)


def test_positive_forms_have_no_negative_count():
    assert count_negative_robin(flat_mode(1.0, 1e6, 0.0), 128) == 0
    assert count_dirichlet_nonpositive(flat_mode(0.5), 128) == 0
    for mode in reduce_to_modes(make_surface("catenoid"), 6)[3:]:
        assert count_negative_robin(mode, 128) == 0


def test_steklov_without_resolution_is_indeterminate():
    mode = reduce_to_modes(make_surface("catenoid"), 0)[0]
    with pytest.raises(DirichletKernel):
        count_steklov_below_one(mode, 256)


def test_catenoid_m1_steklov_matches_discrete():
    # [DERIVED] oracle: eigenvalues of the FD Schur complement converge to the RK4 DtN
    mode = reduce_to_modes(make_surface("catenoid"), 1)[1]
    mu = np.sort(steklov_values(mode, 256))
    lam = discrete_dtn(mode, 1024)
    mu_fd = np.sort(np.linalg.eigvalsh(0.5 * (lam + lam.T))) / mode.robin_coeff
    assert np.allclose(mu, mu_fd, atol=1e-4)
    assert count_steklov_below_one(mode, 256) == int(np.count_nonzero(mu_fd < 1 - 1e-4))
