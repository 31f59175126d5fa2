"""Boundary invariants of spheres, ball unions, surfaces of revolution and
ellipsoids.

Invariants are ``A1 = |∂O|``, ``A2 = ∫ H`` and ``A3 = ∫ (13 H² + 2 Σ κ_j²)``
with ``H = Σ κ_j`` and the normal pointing out of the obstacle, so that the
unit sphere in R^3 has ``κ = 1``.
"""

from dataclasses import dataclass, field
from math import gamma, pi

import numpy as np

from .errors import DegenerateProfile

H_CONVENTION = "H = sum of principal curvatures, outward normal"


def sphere_area(d):
    """Area of the unit sphere S^{d-1}."""
    return 2 * pi ** (d / 2) / gamma(d / 2)


def cs_constant(d):
    """Constant in A3*A1 >= k*A2**2 (equality for sphere unions)."""
    return 13 + 2 / (d - 1)


@dataclass(frozen=True)
class GeometricInvariants:
    A1: float
    A2: float
    A3: float
    d: int
    volume: float = None
    convention: str = field(default=H_CONVENTION, compare=False)

    def __add__(self, other):
        if self.d != other.d:
            raise ValueError("cannot add invariants of different dimensions")
        vol = None
        if self.volume is not None and other.volume is not None:
            vol = self.volume + other.volume
        return GeometricInvariants(self.A1 + other.A1, self.A2 + other.A2,
                                   self.A3 + other.A3, self.d, vol)

    def as_tuple(self):
        return (self.A1, self.A2, self.A3)

    def cs_gap(self):
        """A3*A1 - (13 + 2/(d-1)) A2**2, nonnegative by Cauchy-Schwarz."""
        return self.A3 * self.A1 - cs_constant(self.d) * self.A2 ** 2


def sphere_invariants(d, rho, m=1):
    """Invariants of ``m`` disjoint balls of radius ``rho`` in R^d."""
    if m < 1 or int(m) != m:
        raise ValueError("m must be a positive integer")
    if rho <= 0:
        raise ValueError("radius must be positive")
    s = sphere_area(d)
    k = d - 1
    return GeometricInvariants(
        A1=m * s * rho ** (d - 1),
        A2=m * s * k * rho ** (d - 2),
        A3=m * s * (13 * k ** 2 + 2 * k) * rho ** (d - 3),
        d=d,
        volume=m * s * rho ** d / d,
    )


def union_of_spheres_invariants(spheres):
    """Sum over pairwise disjoint balls given as ``(center, radius)``."""
    spheres = [(np.atleast_1d(np.asarray(c, dtype=float)), float(r)) for c, r in spheres]
    if not spheres:
        raise ValueError("need at least one sphere")
    d = len(spheres[0][0])
    for i, (ci, ri) in enumerate(spheres):
        if len(ci) != d:
            raise ValueError("centers must share one dimension")
        for cj, rj in spheres[i + 1:]:
            if np.linalg.norm(ci - cj) <= ri + rj:
                raise ValueError("balls must be pairwise disjoint")
    total = sphere_invariants(d, spheres[0][1])
    for _, r in spheres[1:]:
        total = total + sphere_invariants(d, r)
    return total


# -- surfaces of revolution ---------------------------------------------------

class Profile:
    """Meridian curve ``(r(u), z(u))`` of a surface of revolution in R^3.

    ``closed`` curves are sampled at ``u = 2 pi k / N``; open curves run from
    the axis to the axis at ``u = pi k / (N-1)`` and are extended to a
    periodic curve by reflection (r odd, z even), which is smooth when the
    curve meets the axis orthogonally.  Derivatives come from trigonometric
    interpolation.
    """

    def __init__(self, r, z, closed):
        r = np.asarray(r, dtype=float)
        z = np.asarray(z, dtype=float)
        if r.shape != z.shape or r.ndim != 1 or len(r) < 8:
            raise ValueError("need two equal-length sample arrays (>= 8 points)")
        self.closed = bool(closed)
        if self.closed:
            R, Z = r, z
            self.span = 2 * pi
        else:
            if abs(r[0]) > 1e-12 * np.max(np.abs(r)) or abs(r[-1]) > 1e-12 * np.max(np.abs(r)):
                raise DegenerateProfile("open profile must start and end on the axis")
            R = np.concatenate([r, -r[-2:0:-1]])
            Z = np.concatenate([z, z[-2:0:-1]])
            self.span = pi
        self._n = len(R)
        self._cr = np.fft.fft(R) / self._n
        self._cz = np.fft.fft(Z) / self._n
        k = np.fft.fftfreq(self._n, 1.0 / self._n)
        if self._n % 2 == 0:
            k[self._n // 2] = 0  # drop the unresolved Nyquist derivative
        self._k = k
        if self._signed_area() < 0:
            raise DegenerateProfile("profile must be oriented counterclockwise in (r, z)")

    def evaluate(self, u, order=0):
        """Value (order 0) or derivative of (r, z) at parameters ``u``."""
        u = np.asarray(u, dtype=float)
        phase = np.exp(1j * np.outer(u, self._k))
        fac = (1j * self._k) ** order
        r = (phase @ (self._cr * fac)).real
        z = (phase @ (self._cz * fac)).real
        return r, z

    def _signed_area(self):
        x, w = np.polynomial.legendre.leggauss(128)
        u = 0.5 * self.span * (x + 1)
        r, z = self.evaluate(u)
        dr, dz = self.evaluate(u, 1)
        return 0.25 * self.span * np.sum(w * (r * dz - z * dr))

    def scaled(self, factor):
        u = self.sample_parameters()
        r, z = self.evaluate(u)
        return Profile(factor * r, factor * z, self.closed)

    def sample_parameters(self):
        if self.closed:
            return 2 * pi * np.arange(self._n) / self._n
        m = self._n // 2 + 1
        return pi * np.arange(m) / (m - 1)


def profile_from_functions(r_fn, z_fn, n=128, closed=False):
    """Sample a parametrized meridian into a :class:`Profile`."""
    if closed:
        u = 2 * pi * np.arange(n) / n
    else:
        u = pi * np.arange(n) / (n - 1)
    r = np.asarray(r_fn(u), dtype=float)
    if not closed:
        r[0] = r[-1] = 0.0
    return Profile(r, z_fn(u), closed)


def read_profile(path):
    """Read a meridian from a two-column text file.

    Columns are ``r z``; lines starting with ``#`` are comments.  A header
    line ``# kind: closed`` marks a closed curve, ``# kind: axis`` one running
    from the axis to the axis.  Without the marker, curves whose end samples
    lie on the axis are treated as open.  Samples must be equally spaced in
    the curve parameter; open curves include both axis points, closed curves
    do not repeat the first point.
    """
    kind = None
    with open(path) as fh:
        for line in fh:
            s = line.strip()
            if s.startswith("#") and "kind:" in s:
                kind = s.split("kind:", 1)[1].strip().lower()
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise ValueError("profile file must have two columns")
    r, z = data[:, 0], data[:, 1]
    if kind is None:
        kind = "axis" if abs(r[0]) < 1e-12 and abs(r[-1]) < 1e-12 else "closed"
    if kind not in ("axis", "closed"):
        raise ValueError(f"unknown profile kind {kind!r}")
    return Profile(r, z, kind == "closed")


def _revolution_at_order(profile, n):
    x, w = np.polynomial.legendre.leggauss(n)
    u = 0.5 * profile.span * (x + 1)
    w = 0.5 * profile.span * w
    r, z = profile.evaluate(u)
    dr, dz = profile.evaluate(u, 1)
    ddr, ddz = profile.evaluate(u, 2)
    v = np.hypot(dr, dz)
    scale = np.max(np.abs(r))
    if np.min(r) <= 1e-9 * scale:
        raise DegenerateProfile("profile touches the axis away from its endpoints")
    k_mer = (dr * ddz - dz * ddr) / v ** 3
    k_par = dz / (r * v)
    dA = 2 * pi * r * v * w
    H = k_mer + k_par
    A1 = dA.sum()
    A2 = (H * dA).sum()
    A3 = ((13 * H ** 2 + 2 * (k_mer ** 2 + k_par ** 2)) * dA).sum()
    vol = (pi * r ** 2 * dz * w).sum()
    return np.array([A1, A2, A3, vol])


def revolution_invariants(profile, order=64, rtol=1e-10, max_order=4096):
    """Invariants of the surface swept by ``profile`` about the z-axis.

    The Gauss-Legendre order is doubled until successive results agree to
    ``rtol``.
    """
    prev = _revolution_at_order(profile, order)
    while True:
        order *= 2
        cur = _revolution_at_order(profile, order)
        if np.all(np.abs(cur - prev) <= rtol * np.abs(cur).max()):
            break
        if order >= max_order:
            raise DegenerateProfile("quadrature did not settle; profile not smooth enough")
        prev = cur
    return GeometricInvariants(*map(float, cur[:3]), 3, float(cur[3]))


# -- ellipsoids -----------------------------------------------------------------

def _ellipsoid_at_order(a, b, c, n):
    x, w = np.polynomial.legendre.leggauss(n)
    th = 0.5 * pi * (x + 1)
    wt = 0.5 * pi * w
    m = 2 * n
    ph = 2 * pi * np.arange(m) / m
    wp = 2 * pi / m
    T, P = np.meshgrid(th, ph, indexing="ij")
    st, ct, sp, cp = np.sin(T), np.cos(T), np.sin(P), np.cos(P)
    Xt = np.stack([a * ct * cp, b * ct * sp, -c * st])
    Xp = np.stack([-a * st * sp, b * st * cp, np.zeros_like(T)])
    Xtt = np.stack([-a * st * cp, -b * st * sp, -c * ct])
    Xtp = np.stack([-a * ct * sp, b * ct * cp, np.zeros_like(T)])
    Xpp = np.stack([-a * st * cp, -b * st * sp, np.zeros_like(T)])
    nrm = np.cross(Xt, Xp, axis=0)
    J = np.linalg.norm(nrm, axis=0)
    nrm = nrm / J
    E = (Xt * Xt).sum(0)
    F = (Xt * Xp).sum(0)
    G = (Xp * Xp).sum(0)
    L = (Xtt * nrm).sum(0)
    M = (Xtp * nrm).sum(0)
    N = (Xpp * nrm).sum(0)
    det = E * G - F ** 2
    H = -(E * N - 2 * F * M + G * L) / det
    K = (L * N - M ** 2) / det
    dA = J * wt[:, None] * wp
    sum_k2 = H ** 2 - 2 * K
    return np.array([dA.sum(), (H * dA).sum(), ((13 * H ** 2 + 2 * sum_k2) * dA).sum()])


def ellipsoid_invariants(a, b, c, order=32, rtol=1e-11, max_order=2048):
    """Invariants of the ellipsoid with semi-axes ``a, b, c`` in R^3."""
    if min(a, b, c) <= 0:
        raise ValueError("semi-axes must be positive")
    prev = _ellipsoid_at_order(a, b, c, order)
    while True:
        order *= 2
        cur = _ellipsoid_at_order(a, b, c, order)
        if np.all(np.abs(cur - prev) <= rtol * np.abs(cur).max()) or order >= max_order:
            break
        prev = cur
    return GeometricInvariants(*map(float, cur), 3, 4 * pi * a * b * c / 3)


# -- dispatch -----------------------------------------------------------------

@dataclass(frozen=True)
class UnionOfSpheres:
    spheres: tuple  # of (center, radius)


@dataclass(frozen=True)
class Revolution:
    profile: Profile


@dataclass(frozen=True)
class Ellipsoid:
    a: float
    b: float
    c: float


def surface_invariants(surface):
    if isinstance(surface, UnionOfSpheres):
        return union_of_spheres_invariants(surface.spheres)
    if isinstance(surface, Revolution):
        return revolution_invariants(surface.profile)
    if isinstance(surface, Ellipsoid):
        return ellipsoid_invariants(surface.a, surface.b, surface.c)
    raise TypeError(f"unknown surface {type(surface).__name__}")
