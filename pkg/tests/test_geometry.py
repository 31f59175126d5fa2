from math import pi

import numpy as np
import pytest

from ballres.errors import DegenerateProfile
from ballres.geometry import (Ellipsoid, GeometricInvariants, Revolution, UnionOfSpheres,
                              cs_constant, ellipsoid_invariants, profile_from_functions,
                              read_profile, revolution_invariants, sphere_invariants,
                              surface_invariants, union_of_spheres_invariants)


def _sphere_profile(scale=1.0, n=64):
    return profile_from_functions(lambda u: scale * np.sin(u), lambda u: -scale * np.cos(u), n)


def test_unit_sphere():
    g = sphere_invariants(3, 1, 1)
    assert g.as_tuple() == pytest.approx((4 * pi, 8 * pi, 224 * pi), rel=1e-15)
    assert sphere_invariants(3, 1, 2).as_tuple() == pytest.approx((8 * pi, 16 * pi, 448 * pi))
    assert sphere_invariants(3, 7.3, 1).A3 == pytest.approx(224 * pi)


def test_sphere_higher_dimension():
    g = sphere_invariants(5, 2.0, 1)
    s4 = 8 * pi ** 2 / 3
    assert g.A1 == pytest.approx(s4 * 16)
    assert g.A2 == pytest.approx(s4 * 4 * 8)
    assert g.A3 == pytest.approx(s4 * (13 * 16 + 8) * 4)


def test_union_additivity():
    u = union_of_spheres_invariants([((0, 0, 0), 1.0), ((5, 0, 0), 2.0)])
    s = sphere_invariants(3, 1.0) + sphere_invariants(3, 2.0)
    assert u.as_tuple() == pytest.approx(s.as_tuple())
    assert u.volume == pytest.approx(4 * pi / 3 * 9)
    with pytest.raises(ValueError):
        union_of_spheres_invariants([((0, 0, 0), 1.0), ((1.5, 0, 0), 1.0)])
    with pytest.raises(ValueError):
        sphere_invariants(3, 1.0) + sphere_invariants(5, 1.0)


def test_revolution_sphere():
    g = revolution_invariants(_sphere_profile())
    assert g.as_tuple() == pytest.approx(sphere_invariants(3, 1).as_tuple(), rel=1e-8)
    assert g.volume == pytest.approx(4 * pi / 3, rel=1e-8)


def test_revolution_scaling():
    g1 = revolution_invariants(_sphere_profile())
    g2 = revolution_invariants(_sphere_profile().scaled(2.0))
    assert g2.A1 / g1.A1 == pytest.approx(4)
    assert g2.A2 / g1.A2 == pytest.approx(2)
    assert g2.A3 / g1.A3 == pytest.approx(1)


def test_torus():
    tor = profile_from_functions(lambda u: 2 + 0.5 * np.cos(u), lambda u: 0.5 * np.sin(u),
                                 64, closed=True)
    g = revolution_invariants(tor)
    assert g.A1 == pytest.approx(4 * pi ** 2, rel=1e-10)
    assert g.A2 == pytest.approx(8 * pi ** 2, rel=1e-10)
    assert g.cs_gap() > 0


def test_revolution_orientation_and_degeneracy():
    with pytest.raises(DegenerateProfile):
        profile_from_functions(lambda u: np.sin(u), lambda u: np.cos(u), 32)
    with pytest.raises(DegenerateProfile):
        # pinched: touches the axis at the middle
        revolution_invariants(profile_from_functions(lambda u: np.sin(2 * u) ** 2 * np.sin(u) + 0 * u,
                                                     lambda u: -np.cos(u), 64))


def test_read_profile(tmp_path):
    u = np.pi * np.arange(65) / 64
    r, z = np.sin(u), -np.cos(u)
    r[0] = r[-1] = 0
    path = tmp_path / "sphere.txt"
    np.savetxt(path, np.column_stack([r, z]), header="kind: axis\nr z")
    g = revolution_invariants(read_profile(path))
    assert g.A1 == pytest.approx(4 * pi, rel=1e-8)


def test_ellipsoid_sphere_case():
    g = ellipsoid_invariants(1, 1, 1)
    assert g.as_tuple() == pytest.approx(sphere_invariants(3, 1).as_tuple(), rel=1e-8)


def test_ellipsoid_matches_revolution():
    e = ellipsoid_invariants(1, 1, 2)
    r = revolution_invariants(profile_from_functions(np.sin, lambda u: -2 * np.cos(u), 64))
    assert e.as_tuple() == pytest.approx(r.as_tuple(), rel=1e-9)
    assert e.A3 * e.A1 > 14 * e.A2 ** 2


def test_ellipsoid_gap_second_order():
    gaps = []
    for eps in (1e-2, 5e-3, 2.5e-3):
        e = ellipsoid_invariants(1, 1, 1 + eps)
        gaps.append(e.cs_gap() / (e.A1 * e.A3))
    assert all(g > 0 for g in gaps)
    ratios = [gaps[i] / gaps[i + 1] for i in range(2)]
    assert all(abs(r - 4) < 0.1 for r in ratios)


def test_triaxial_order_doubling_converged():
    a = ellipsoid_invariants(1, 1.5, 2.5)
    b = ellipsoid_invariants(1, 1.5, 2.5, order=128)
    assert a.as_tuple() == pytest.approx(b.as_tuple(), rel=1e-8)


def test_cs_bound_everywhere():
    surfaces = [
        UnionOfSpheres((((0, 0, 0), 1.0), ((4, 0, 0), 1.5))),
        Revolution(_sphere_profile()),
        Ellipsoid(1, 2, 3), Ellipsoid(0.3, 1, 1), Ellipsoid(1, 1, 5),
    ]
    for s in surfaces:
        g = surface_invariants(s)
        assert g.A3 * g.A1 - cs_constant(3) * g.A2 ** 2 >= -1e-9 * g.A3 * g.A1
    with pytest.raises(TypeError):
        surface_invariants("cube")


def test_invariants_record():
    g = GeometricInvariants(1.0, 2.0, 3.0, 3)
    assert "outward" in g.convention
