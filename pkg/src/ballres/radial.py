"""Exact radial data for the exterior of a ball in odd dimension.

For angular mode ``l`` the outgoing radial solution is
``r**(-(d-2)/2) * H1_{l+(d-2)/2}(lam*r)``.  Its half-integer order makes it
``exp(i z) z**(-a) T(z)`` with ``T`` a polynomial, so the boundary condition at
``r = rho`` reduces to a polynomial equation in ``z = lam*rho``.

Coefficients are kept as exact Gaussian rationals, stored as pairs of
:class:`fractions.Fraction` ``(real, imag)``.
"""

import enum
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from math import comb, factorial, lcm

import flint
import numpy as np

from . import polyroot
from .errors import NonConvergence


class BoundaryCondition(enum.Enum):
    NEUMANN = "neumann"
    DIRICHLET = "dirichlet"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


NEUMANN = BoundaryCondition.NEUMANN
DIRICHLET = BoundaryCondition.DIRICHLET


def check_dimension(d):
    if int(d) != d or d < 3 or d % 2 == 0:
        raise ValueError(f"dimension must be an odd integer >= 3, got {d}")
    return int(d)


def _gmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _ipow(k):
    return [(Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)),
            (Fraction(-1), Fraction(0)), (Fraction(0), Fraction(-1))][k % 4]


@dataclass(frozen=True)
class RadialPolynomial:
    """Polynomial whose roots (divided by rho) are the mode-l resonances."""

    dimension: int
    mode: int
    bc: BoundaryCondition
    coefficients: tuple  # ascending degree, entries (Fraction re, Fraction im)

    @property
    def degree(self):
        return len(self.coefficients) - 1

    def to_complex(self, scale=1):
        """Float coefficients of ``p(scale*u) / scale**degree`` in ``u``."""
        n = self.degree
        s = Fraction(scale)
        out = np.empty(n + 1, dtype=complex)
        for k, (re, im) in enumerate(self.coefficients):
            f = s ** (k - n)
            out[k] = complex(float(re * f), float(im * f))
        return out

    def conjugate(self):
        return RadialPolynomial(self.dimension, self.mode, self.bc,
                                tuple((re, -im) for re, im in self.coefficients))

    def real_form(self):
        """Integer coefficients of the real polynomial ``R(w) ∝ p(i w)``.

        Every coefficient of ``p`` is a rational multiple of a power of ``i``
        arranged so that ``p(i w)`` is a unit times a real polynomial; roots of
        ``p`` are ``i`` times roots of ``R``.  ``R`` is normalized to a
        positive leading coefficient.
        """
        n = self.degree
        vals = []
        for k, c in enumerate(self.coefficients):
            vals.append(_gmul(c, _ipow(k)))
        unit = vals[-1]
        # divide by the (real or imaginary) leading value
        out = []
        for re, im in vals:
            if unit[1] == 0:
                q = (re / unit[0], im / unit[0])
            else:
                q = (im / unit[1], -re / unit[1])
            if q[1] != 0:
                raise ArithmeticError("coefficients lack the reflection symmetry")
            out.append(q[0])
        den = lcm(*(x.denominator for x in out))
        return [int(x * den) for x in out[: n + 1]]


@lru_cache(maxsize=None)
def _hankel_polynomial(m):
    """T with h_m(z) ∝ exp(iz) z^(-m-1) T(z); ascending degree."""
    coeffs = [None] * (m + 1)
    for k in range(m + 1):
        mag = Fraction(factorial(m + k), factorial(k) * factorial(m - k) * 2 ** k)
        ik = _ipow(k)
        coeffs[m - k] = (ik[0] * mag, ik[1] * mag)
    return tuple(coeffs)


@lru_cache(maxsize=None)
def radial_polynomial(d, l, bc=NEUMANN):
    """Exact resonance polynomial for mode ``l`` of the unit ball.

    Dirichlet gives ``T`` (leading coefficient 1); Neumann gives
    ``N(z) = i z T + z T' - a T`` with ``a = (d-1)/2 + m`` (leading ``i``).
    """
    d = check_dimension(d)
    if l < 0 or int(l) != l:
        raise ValueError("mode must be a nonnegative integer")
    bc = BoundaryCondition.parse(bc)
    m = l + (d - 3) // 2
    T = _hankel_polynomial(m)
    if bc is DIRICHLET:
        return RadialPolynomial(d, l, bc, T)
    a = Fraction((d - 1) // 2 + m)
    zero = (Fraction(0), Fraction(0))
    N = [zero] * (m + 2)
    for deg, (re, im) in enumerate(T):
        # i z T
        r0, i0 = N[deg + 1]
        N[deg + 1] = (r0 - im, i0 + re)
        # z T' - a T
        r0, i0 = N[deg]
        N[deg] = (r0 + (deg - a) * re, i0 + (deg - a) * im)
    return RadialPolynomial(d, l, bc, tuple(N))


def sh_dim(d, l):
    """Dimension of degree-l spherical harmonics on the (d-1)-sphere."""
    if l == 0:
        return 1
    return (2 * l + d - 2) * comb(l + d - 3, l) // (d - 2)


class FlintEvaluator:
    """Evaluate an integer polynomial in ball arithmetic at adaptive precision.

    Precision is raised until the Newton ratio is known to ~1e-17 relative;
    the root-finding iteration itself stays in double precision.
    """

    max_prec = 1 << 14

    def __init__(self, int_coefficients):
        self.poly = flint.fmpz_poly(list(int_coefficients))
        self.deriv = self.poly.derivative()
        self.abs_poly = flint.fmpz_poly([abs(int(c)) for c in int_coefficients])
        self.degree = self.poly.degree()
        self._at = {}

    def _polys(self, prec):
        if prec not in self._at:
            old = flint.ctx.prec
            flint.ctx.prec = prec
            self._at[prec] = (flint.acb_poly(self.poly), flint.acb_poly(self.deriv))
            flint.ctx.prec = old
        return self._at[prec]

    @staticmethod
    def _start_prec(x):
        bits = 64 + 3 * abs(x.real) + 3 * abs(x.imag)
        return int(64 * np.ceil(bits / 64))

    def _eval(self, x, want_ratio):
        prec = self._start_prec(x)
        old = flint.ctx.prec
        try:
            while True:
                P, D = self._polys(prec)
                flint.ctx.prec = prec
                w = flint.acb(x.real, x.imag)
                v = P(w)
                if want_ratio:
                    if v.contains(0):
                        if prec >= self.max_prec:
                            return complex("inf")
                    else:
                        q = D(w) / v
                        mid = complex(q.mid())
                        if q.rad() <= 1e-17 * abs(mid):
                            return mid
                else:
                    if not v.contains(0):
                        a = abs(v)
                        u = v / a
                        if u.rad() < 1e-15:
                            return complex(u.mid())
                    if prec >= self.max_prec:
                        return 0j
                prec *= 2
        finally:
            flint.ctx.prec = old

    def ratio(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return np.array([self._eval(x, True) for x in z], dtype=complex)

    def direction(self, z):
        """p(z)/|p(z)| (enough for argument-principle counting)."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return np.array([self._eval(x, False) for x in z], dtype=complex)

    value = direction

    def backward_error(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.empty(len(z))
        old = flint.ctx.prec
        try:
            for k, x in enumerate(z):
                prec = 2 * self._start_prec(x)
                flint.ctx.prec = prec
                P, _ = self._polys(prec)
                flint.ctx.prec = prec
                w = flint.acb(x.real, x.imag)
                num = abs(P(w))
                den = flint.acb_poly(self.abs_poly)(flint.acb(abs(x)))
                out[k] = float((num / den.real).mid())
        finally:
            flint.ctx.prec = old
        return out


def _seed_from(prev, n):
    """Starting iterates for degree ``n`` from the roots of degree ``n-1``."""
    z = prev * (n + 0.5) / (n - 0.5)
    k = np.argmin(z.real)
    extra = z[k] - 0.3 * abs(z[k]) / n + 1e-3j
    return np.append(z, extra)


_unit_roots = {}
_unit_lock = threading.Lock()


def mode_roots(d, l, bc=NEUMANN):
    """Roots of the mode-l polynomial (unit radius), as a complex array.

    Modes are solved in increasing order, each seeded from the previous one,
    and memoized per process.
    """
    d = check_dimension(d)
    bc = BoundaryCondition.parse(bc)
    key = (d, bc)
    with _unit_lock:
        known = _unit_roots.setdefault(key, [])
        while len(known) <= l:
            known.append(_solve_mode(d, len(known), bc, known[-1] if known else None))
        return known[l]


def _solve_mode(d, l, bc, prev):
    poly = radial_polynomial(d, l, bc)
    n = poly.degree
    if n == 0:
        return np.empty(0, dtype=complex)
    ints = poly.real_form()
    ev = FlintEvaluator(ints)
    if prev is None or len(prev) == 0 or len(prev) != n - 1:
        coeffs, initial = np.array(ints, dtype=float), None
    else:
        coeffs, initial = None, _seed_from(-1j * prev, n)
    try:
        report = polyroot.find_roots(coeffs, 1e-14,
                                     evaluator=ev, initial=initial,
                                     cluster_tol=1e-9)
    except NonConvergence as exc:
        raise NonConvergence(f"mode {l} (d={d}, {bc.value}): {exc}",
                             best=exc.best, iterations=exc.iterations) from exc
    if not report.verified or len(report.roots) != n:
        raise NonConvergence(f"mode {l} (d={d}, {bc.value}): roots not verified")
    w = report.values
    w = w[np.lexsort((w.imag, w.real))]
    return 1j * w


@dataclass(frozen=True)
class Resonance:
    value: complex
    multiplicity: int
    mode: int = -1


@dataclass(frozen=True)
class ResonanceSet:
    dimension: int
    radius: float
    bc: BoundaryCondition
    l_max: int
    entries: tuple

    @cached_property
    def values(self):
        return np.array([e.value for e in self.entries], dtype=complex)

    @cached_property
    def multiplicities(self):
        return np.array([e.multiplicity for e in self.entries], dtype=np.int64)

    @cached_property
    def modes(self):
        return np.array([e.mode for e in self.entries], dtype=np.int64)

    @property
    def total_multiplicity(self):
        return int(self.multiplicities.sum())

    def __len__(self):
        return len(self.entries)

    def mode_entries(self, l):
        return [e for e in self.entries if e.mode == l]

    def truncated(self, radius):
        """Entries with |value| <= radius."""
        keep = tuple(e for e in self.entries if abs(e.value) <= radius)
        return ResonanceSet(self.dimension, self.radius, self.bc, self.l_max, keep)

    def up_to_mode(self, l_max):
        keep = tuple(e for e in self.entries if e.mode <= l_max)
        return ResonanceSet(self.dimension, self.radius, self.bc, l_max, keep)


def ball_resonances(d, rho=1.0, l_max=60, bc=NEUMANN):
    """Resonances of the ball of radius ``rho`` for modes ``0..l_max``."""
    d = check_dimension(d)
    if rho <= 0:
        raise ValueError("radius must be positive")
    if l_max < 0:
        raise ValueError("l_max must be nonnegative")
    bc = BoundaryCondition.parse(bc)
    entries = []
    for l in range(l_max + 1):
        mult = sh_dim(d, l)
        for z in mode_roots(d, l, bc):
            entries.append(Resonance(complex(z / rho), mult, l))
    return ResonanceSet(d, float(rho), bc, int(l_max), tuple(entries))


def scale_resonances(rset, factor):
    """Resonances of the ball scaled by ``factor`` (values divided by it)."""
    if factor <= 0:
        raise ValueError("scale factor must be positive")
    entries = tuple(Resonance(e.value / factor, e.multiplicity, e.mode)
                    for e in rset.entries)
    return ResonanceSet(rset.dimension, rset.radius * factor, rset.bc,
                        rset.l_max, entries)
