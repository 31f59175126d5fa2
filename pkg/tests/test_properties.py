import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from ballres import ball_resonances, radial_polynomial, scale_resonances, sh_dim
from ballres.geometry import (ellipsoid_invariants, sphere_invariants,
                              union_of_spheres_invariants)
from ballres.polyroot import find_roots
from ballres.radial import DIRICHLET, mode_roots
from ballres.rigidity import TOL_EXACT, TOL_PIPELINE, identify
from ballres.wave import smoothed_wave_trace
from ballres.scattering import (CanonicalProductParams, det_S_product, log_derivative_det,
                                mode_eigenvalue, weierstrass_E)

odd_d = st.sampled_from([3, 5, 7])
modes = st.integers(min_value=0, max_value=40)


def _mirror_close(z, tol):
    a = np.sort_complex(z)
    b = np.sort_complex(-np.conj(z))
    return np.max(np.abs(a - b), initial=0.0) <= tol


@settings(max_examples=40, deadline=None)
@given(odd_d, modes)
def test_roots_mirror_symmetric_and_lower(d, l):
    z = mode_roots(d, l)
    assert len(z) == radial_polynomial(d, l).degree
    assert _mirror_close(z, 1e-12 * max(1, np.max(np.abs(z))))
    assert np.all(z.imag < -1e-12)


@settings(max_examples=40, deadline=None)
@given(odd_d, modes)
def test_roots_small_residual(d, l):
    p = radial_polynomial(d, l)
    z = mode_roots(d, l)
    # residual in exact-coefficient arithmetic, relative to the coefficient scale
    from flint import acb, acb_poly, ctx
    old = ctx.prec
    ctx.prec = 2000
    try:
        poly = acb_poly([acb(re.numerator) / re.denominator
                         + acb(0, im.numerator) / im.denominator for re, im in p.coefficients])
        cmax = max(abs(complex(float(re), float(im))) for re, im in p.coefficients)
        for x in z:
            v = abs(complex(poly(acb(x.real, x.imag)).mid()))
            assert v <= 1e-10 * cmax * (1 + abs(x)) ** p.degree
    finally:
        ctx.prec = old


@settings(max_examples=30, deadline=None)
@given(odd_d, st.integers(min_value=0, max_value=30))
def test_degree_difference(d, l):
    assert (radial_polynomial(d, l).degree - radial_polynomial(d, l, DIRICHLET).degree) == 1


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=0.1, max_value=10), st.integers(min_value=0, max_value=6))
def test_scaling_covariance(rho, l_max):
    a = scale_resonances(ball_resonances(3, 1.0, l_max), rho)
    b = ball_resonances(3, rho, l_max)
    assert np.allclose(a.values, b.values, rtol=1e-14, atol=0)
    assert a.radius == b.radius or abs(a.radius - b.radius) < 1e-15 * rho


@settings(max_examples=20, deadline=None)
@given(odd_d, st.integers(min_value=0, max_value=8))
def test_mode_multiplicity_accounting(d, l_max):
    r = ball_resonances(d, 1.0, l_max)
    for l in range(l_max + 1):
        total = sum(e.multiplicity for e in r.mode_entries(l))
        assert total == radial_polynomial(d, l).degree * sh_dim(d, l)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
                min_size=2, max_size=25))
def test_reconstruction(roots):
    r = np.array(roots)
    sep = np.min([abs(a - b) for i, a in enumerate(r) for b in r[i + 1:]])
    assume(sep > 1e-3)
    assume(np.all((r == 0) | (np.abs(r) >= 1e-3)))
    coeffs = np.poly(r)[::-1]
    rep = find_roots(coeffs, 1e-12)
    assert sum(rep.multiplicities) == len(r)
    rebuilt = np.poly(rep.expanded())[::-1]
    assert np.max(np.abs(rebuilt - coeffs)) <= 1e-8 * np.max(np.abs(coeffs))


@settings(max_examples=30, deadline=None)
@given(odd_d, st.integers(min_value=0, max_value=25), st.floats(min_value=0.01, max_value=8),
       st.floats(min_value=0.2, max_value=4))
def test_mode_unitarity(d, l, lam, rho):
    s = mode_eigenvalue(d, rho, l, lam)
    assert abs(abs(s) - 1) <= 1e-12
    assert abs(s * mode_eigenvalue(d, rho, l, -lam) - 1) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.complex_numbers(max_magnitude=0.49, allow_nan=False), st.integers(1, 9))
def test_weierstrass_small_branch_matches_closed_form(z, genus):
    closed = (1 - z) * np.exp(sum(z ** j / j for j in range(1, genus + 1)))
    assert abs(weierstrass_E(z, genus) - closed) <= 1e-14


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=-3, max_value=3), st.floats(min_value=-2, max_value=2))
def test_product_functional_equation(lam, c):
    rs = ball_resonances(3, 1.0, 12)
    p = CanonicalProductParams(3, c, rs)
    assert abs(det_S_product(p, lam) * det_S_product(p, -lam) - 1) < 1e-12
    ld = log_derivative_det(p, lam)
    assert abs(ld.real) <= 1e-9 * max(abs(ld), 1e-300)


@settings(max_examples=40, deadline=None)
@given(odd_d, st.sampled_from([0.5, 1.0, 3.0]), st.sampled_from([1, 2, 5]))
def test_identify_round_trip(d, rho, m):
    r = identify(sphere_invariants(d, rho, m), TOL_EXACT)
    assert r.is_union_of_equal_balls and r.m == m
    assert abs(r.rho - rho) <= 1e-12 * rho


@settings(max_examples=200, deadline=None)
@given(odd_d, st.sampled_from([0.5, 1.0, 3.0]), st.sampled_from([1, 2, 5]),
       st.sampled_from([TOL_PIPELINE, 1e-3, TOL_EXACT]),
       st.tuples(*[st.floats(min_value=-0.25, max_value=0.25)] * 3))
def test_identify_robust_to_small_perturbations(d, rho, m, tol, eps):
    g = sphere_invariants(d, rho, m)
    f = [1 + tol * e for e in eps]
    pert = type(g)(g.A1 * f[0], g.A2 * f[1], g.A3 * f[2], d)
    r = identify(pert, tol)
    assert r.is_union_of_equal_balls and r.m == m


@settings(max_examples=15, deadline=None)
@given(st.floats(min_value=0.3, max_value=3), st.floats(min_value=0.3, max_value=3),
       st.floats(min_value=0.3, max_value=3))
def test_cs_inequality_on_ellipsoids(a, b, c):
    g = ellipsoid_invariants(a, b, c)
    assert g.cs_gap() >= -1e-9 * g.A1 * g.A3


@settings(max_examples=30, deadline=None)
@given(odd_d, st.lists(st.floats(min_value=0.1, max_value=2), min_size=1, max_size=4))
def test_union_additivity(d, radii):
    centers = [np.eye(d)[0] * 10 * k for k in range(len(radii))]
    total = union_of_spheres_invariants(list(zip(centers, radii)))
    ref = sphere_invariants(d, radii[0])
    for r in radii[1:]:
        ref = ref + sphere_invariants(d, r)
    assert np.allclose(total.as_tuple(), ref.as_tuple(), rtol=1e-13)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.floats(min_value=0.1, max_value=20),
                          st.floats(min_value=0.01, max_value=5),
                          st.integers(min_value=1, max_value=9)), min_size=1, max_size=10),
       st.floats(min_value=-5, max_value=5), st.floats(min_value=0.05, max_value=1),
       st.sampled_from(["decaying", "literal"]))
def test_mirror_symmetric_sets_give_real_traces(pairs, t, eps, convention):
    res = []
    for x, y, m in pairs:
        res += [(complex(x, -y), m), (complex(-x, -y), m)]
    u = smoothed_wave_trace(res, t, eps, convention)
    scale = sum(m * np.exp(-0.5 * eps ** 2 * (x * x + y * y) + y * abs(t)) for x, y, m in pairs)
    assert abs(u.imag) <= 1e-12 * max(scale, 1.0)
    assert smoothed_wave_trace(res, -t, eps, convention) == u
