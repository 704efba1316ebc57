import numpy as np
import pytest

from lbmfd import catalog
from lbmfd.reduce import reduce_single
from lbmfd.scheme import build
from lbmfd.spectral import (
    NonlinearEquilibrium,
    amplification_from_fd,
    batched_roots,
    chebyshev_points,
    closed_loop_charpoly,
    closed_loop_matrix,
    companion,
    equilibrium_eps,
    equivalent_diffusion,
    closed_form_conditions,
    region_scan,
    sample,
    sample_and_test,
    sample_matrix,
    sampled_coefficients,
    symbolic_eps,
    xi_grid,
)

from conftest import poly

SINGLE = ["d1q2", "d1q3", "d1q3_srt", "d1q3_mrt", "d2q4", "link1", "link2"]


def advection(p=1):
    return build(catalog.d1q3().substitute(p=p))


def probe_bindings(s, D):
    return {"lambda": 1.0, "C": 0.5, "s": s, "D": D}


def test_d1q2_amplification_matches_fd_polynomial():
    b = build(catalog.d1q2())
    eps = symbolic_eps(b)
    fd = reduce_single(b)
    assert amplification_from_fd(fd, eps) == closed_loop_charpoly(b, eps)


@pytest.mark.parametrize("name", SINGLE)
def test_sampled_polynomial_matches_numeric_charpoly(name, rng):
    b = build(catalog.get(name))
    env = catalog.DEFAULT_BINDINGS[name]
    thetas = rng.uniform(-np.pi, np.pi, size=(16, b.dim))
    coeffs = sampled_coefficients(closed_loop_charpoly(b), thetas, env)
    mats = sample_matrix(closed_loop_matrix(b), thetas, env)
    for k in range(len(thetas)):
        assert np.allclose(coeffs[k][::-1], np.poly(mats[k]), atol=1e-12, rtol=0)
        roots = np.sort_complex(np.roots(coeffs[k][::-1]))
        assert np.allclose(np.max(np.abs(roots)), np.max(np.abs(np.linalg.eigvals(mats[k]))), atol=1e-9)


def test_d1q2_two_by_two_oracle():
    # det(X I - M) = X^2 - tr M X + det M for the sampled 2x2 matrix
    b = build(catalog.d1q2())
    env = catalog.DEFAULT_BINDINGS["d1q2"]
    thetas = np.linspace(-np.pi, np.pi, 9)[:, None]
    M = sample_matrix(closed_loop_matrix(b), thetas, env)
    want = np.stack([np.linalg.det(M), -np.trace(M, axis1=1, axis2=2), np.ones(len(M))], axis=1)
    assert np.allclose(sampled_coefficients(closed_loop_charpoly(b), thetas, env), want, atol=1e-14)


@pytest.mark.parametrize("name", SINGLE)
def test_zero_wavenumber_has_unit_root(name):
    b = build(catalog.get(name))
    P = closed_loop_charpoly(b)
    s = sample(P, np.zeros(b.dim), catalog.DEFAULT_BINDINGS[name])
    assert min(abs(r - 1) for r in s.roots) < 1e-12


@pytest.mark.parametrize("name", SINGLE)
def test_default_bindings_are_stable(name):
    b = build(catalog.get(name))
    points = 65 if b.dim == 2 else 257
    assert sample_and_test(closed_loop_charpoly(b), catalog.DEFAULT_BINDINGS[name], points=points).stable


def test_probe_verdicts():
    P = closed_loop_charpoly(advection())
    for s in (0.5, 1.0, 1.5, 1.9):
        assert sample_and_test(P, probe_bindings(s, 0.4)).stable
    assert sample_and_test(P, probe_bindings(1.15, -0.625)).stable
    rep = sample_and_test(P, probe_bindings(1.2, -0.625))
    assert not rep.stable and rep.worst_modulus > 1 + 1e-4 and rep.offending_xi is not None


def test_double_unit_root_is_unstable():
    P = poly(1, "1", "-2", "1")
    # the eigen-solver splits the double root by about 1.5e-8, here outwards
    assert not sample_and_test(P, {}).stable
    rep = sample_and_test(P, {}, tol_sep=1e-6)
    assert not rep.stable and rep.multiple_root
    assert sample_and_test(poly(1, "-1", "0", "1"), {}).stable


def test_grid_refinement_keeps_verdict():
    P = closed_loop_charpoly(advection())
    for points in (129, 257, 513):
        assert sample_and_test(P, probe_bindings(1.5, 0.4), points=points).stable
        assert not sample_and_test(P, probe_bindings(1.2, -0.625), points=points).stable


def test_xi_grid_and_sample_shapes():
    assert xi_grid(2, 5).shape == (25, 2)
    g = xi_grid(1, 5, dx=0.5)
    assert g[0, 0] == pytest.approx(-2 * np.pi) and g[-1, 0] == pytest.approx(2 * np.pi)
    with pytest.raises(ValueError):
        companion(np.array([[1.0, 2.0]]))
    roots, failed = batched_roots(np.array([[2.0, -3.0, 1.0]]))
    assert np.allclose(np.sort(roots[0].real), [1, 2]) and not failed.any()


def test_nonlinear_equilibrium_is_rejected():
    with pytest.raises(NonlinearEquilibrium):
        equilibrium_eps(build(catalog.burgers_d1q3()))
    with pytest.raises(NonlinearEquilibrium):
        amplification_from_fd(reduce_single(build(catalog.d1q2())), None)


def test_closed_form_conditions():
    assert closed_form_conditions(0.5, 0.4, 1.0).stable
    assert closed_form_conditions(0.5, -0.625, 1.0).rectangle
    rect, _ = closed_form_conditions(0.5, -0.7, 1.0)
    assert not rect
    assert not closed_form_conditions(0.5, 0.6, 1.0).rectangle
    assert not closed_form_conditions(0.5, -0.625, 1.2).maximum_ok
    g = chebyshev_points(5)
    assert g[0] == -1 and g[-1] == 1 and np.allclose(g[2], 0, atol=1e-15)
    with pytest.raises(ValueError):
        closed_form_conditions(0.5, 0.0, 1.0, gammas=np.array([2.0]))


def test_equivalent_diffusion():
    assert equivalent_diffusion(0.5, 0.4, 1.0) == pytest.approx(0.3416666666666667, abs=1e-15)
    assert equivalent_diffusion(0.5, 0.4, 2.0) == 0
    with pytest.raises(ZeroDivisionError):
        equivalent_diffusion(0.5, 0.4, 0.0)


def test_one_cell_scan_matches_direct_test():
    b = advection()
    scan = region_scan(b, [1.2], [-0.625], {"lambda": 1.0, "C": 0.5})
    rep = sample_and_test(closed_loop_charpoly(b), probe_bindings(1.2, -0.625))
    assert scan.stable[0, 0] == rep.stable and scan.worst_modulus[0, 0] == rep.worst_modulus
    lines = scan.to_csv().splitlines()
    assert lines[0] == "s,D,stable,worst_modulus" and lines[1].startswith("1.2,-0.625,0,")
