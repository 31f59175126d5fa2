"""Scattering determinant of the ball: per-mode closed forms and the
canonical product over resonances.

Per mode, with ``R`` the real integer polynomial whose roots ``w`` give the
resonances ``z = i w`` (see :meth:`RadialPolynomial.real_form`),

    s_l(z) = exp(-2 i z) R(i z) / R(-i z),      z = lam * rho,

which is unimodular on the real axis and equals 1 at ``z = 0``.
"""

from dataclasses import dataclass
from functools import lru_cache

import flint
import numpy as np

from .errors import FactorPole, PhaseUnwrapFailure, PoleAtResonance, TruncationNotReached
from .radial import NEUMANN, BoundaryCondition, check_dimension, radial_polynomial, sh_dim

_STOP_TOL = 1e-14
_STOP_RUN = 3


# -- Weierstrass factor ------------------------------------------------------

def _series_terms(z, genus):
    """Number of terms so that the tail of sum z^j/j, j > genus, is < 1e-17."""
    r = float(np.max(np.abs(z), initial=0.0))
    if r == 0:
        return genus + 1
    return genus + 1 + int(np.ceil(np.log(1e-17) / np.log(max(r, 1e-300))))


def log_weierstrass_E(z, genus):
    """log E(z) on the principal branch of log(1-z)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    small = np.abs(z) < 0.5
    zs = z[small]
    if zs.size:
        J = _series_terms(zs, genus)
        acc = np.zeros(zs.shape, dtype=complex)
        for j in range(J, genus, -1):
            acc = acc * zs + 1.0 / j
        out[small] = -acc * zs ** (genus + 1)
    zb = z[~small]
    if zb.size:
        acc = np.zeros(zb.shape, dtype=complex)
        for j in range(genus, 0, -1):
            acc = acc * zb + 1.0 / j
        with np.errstate(divide="ignore"):
            out[~small] = np.log(1 - zb) + acc * zb
    return out


def weierstrass_E(z, genus):
    """Canonical factor ``(1-z) exp(sum_{j<=genus} z^j/j)``."""
    z = np.asarray(z, dtype=complex)
    out = np.exp(log_weierstrass_E(z, genus))
    out = np.where(z == 1, 0, out)
    return out if out.ndim else complex(out)


def _log_factor_ratio(z, genus):
    """log E(-z) - log E(z), up to multiples of 2 pi i (odd in z)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    small = np.abs(z) < 0.5
    zs = z[small]
    if zs.size:
        J = _series_terms(zs, genus)
        first = genus + 1 if genus % 2 == 0 else genus + 2
        z2 = zs * zs
        acc = np.zeros(zs.shape, dtype=complex)
        for j in range(J | 1, first - 2, -2):
            acc = acc * z2 + 1.0 / j
        out[small] = 2 * acc * zs ** first
    zb = z[~small]
    if zb.size:
        poly = np.zeros(zb.shape, dtype=complex)
        for j in range(1, genus + 1, 2):
            poly += zb ** j / j
        with np.errstate(divide="ignore"):
            out[~small] = np.log(1 + zb) - np.log(1 - zb) - 2 * poly
    return out


# -- per-mode closed forms ----------------------------------------------------

@lru_cache(maxsize=None)
def _mode_poly(d, l, bc):
    ints = radial_polynomial(d, l, bc).real_form()
    p = flint.fmpz_poly(ints)
    return p, p.derivative(), flint.fmpz_poly([abs(c) for c in ints])


def _hp_eval(polys, x, want_derivative, max_prec=4096):
    """(R(x), R'(x)) or R(x) as doubles, evaluated in ball arithmetic."""
    p, dp, _ = polys
    prec = 64 + 2 * max(p.degree(), 0)
    old = flint.ctx.prec
    try:
        while True:
            flint.ctx.prec = prec
            a = flint.acb(x.real, x.imag)
            v = flint.acb_poly(p)(a)
            ok = not v.contains(0) and v.rad() < 1e-17 * abs(v.mid())
            if want_derivative:
                dv = flint.acb_poly(dp)(a)
                ok = ok and (dv.rad() < 1e-17 * abs(dv.mid()) or dv.contains(0))
            if ok or prec >= max_prec:
                vv = complex(v.mid())
                return (vv, complex(dv.mid())) if want_derivative else vv
            prec *= 2
    finally:
        flint.ctx.prec = old


def _check_pole(polys, x, value):
    absx = abs(x)
    scale = sum(float(c) * absx ** k for k, c in enumerate(polys[2].coeffs()))
    if abs(value) <= 1e-13 * scale:
        raise PoleAtResonance(f"spectral parameter {x * 1j:.6g} is at a resonance")


def mode_eigenvalue(d, rho, l, lam, bc=NEUMANN):
    """Scattering eigenvalue of angular mode ``l`` for the ball of radius rho.

    Raises
    ------
    PoleAtResonance
        If ``lam`` (numerically) coincides with a mode-l resonance.
    """
    d = check_dimension(d)
    bc = BoundaryCondition.parse(bc)
    polys = _mode_poly(d, l, bc)
    z = complex(lam) * rho
    num = _hp_eval(polys, 1j * z, False)
    den = _hp_eval(polys, -1j * z, False)
    _check_pole(polys, -1j * z, den)
    return np.exp(-2j * z) * num / den


def mode_log_derivative(d, rho, l, lam, bc=NEUMANN):
    """d/dlam log s_l at complex ``lam`` from the exact polynomial."""
    d = check_dimension(d)
    bc = BoundaryCondition.parse(bc)
    polys = _mode_poly(d, l, bc)
    z = complex(lam) * rho
    p1, dp1 = _hp_eval(polys, 1j * z, True)
    p2, dp2 = _hp_eval(polys, -1j * z, True)
    _check_pole(polys, -1j * z, p2)
    return rho * (-2j + 1j * dp1 / p1 + 1j * dp2 / p2)


def mode_log_derivatives_real(d, rho, lam, l_max, bc=NEUMANN):
    """d/dlam log s_l for real ``lam`` and all modes ``0..l_max``.

    Uses the forward recurrence for ratios of outgoing spherical Hankel
    functions, which is stable on the real axis; independent of the
    resonance polynomials.  Returns an array of shape ``(len(lam), l_max+1)``.
    """
    d = check_dimension(d)
    bc = BoundaryCondition.parse(bc)
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    z = lam * rho
    if np.any(z == 0):
        raise ValueError("recurrence needs nonzero lam; the value at 0 is 0")
    shift = (d - 3) // 2
    m_max = l_max + shift
    out = np.empty((len(z), l_max + 1), dtype=complex)
    q = np.full(z.shape, -1j, dtype=complex)
    for m in range(m_max + 1):
        if m > 0:
            q = (2 * m - 1) / z - 1 / q
        l = m - shift
        if l < 0:
            continue
        r = 1 / q - (m + 1) / z - shift / z
        if bc is NEUMANN:
            L = l * (l + d - 2)
            out[:, l] = 2j * (1 - L / z ** 2) * (1 / r).imag
        else:
            out[:, l] = -2j * r.imag
    return rho * out


def det_S_direct(d, rho, lam, l_max=60, bc=NEUMANN, full_output=False):
    """Truncated product of mode eigenvalues raised to their multiplicities.

    Stops once ``|s_l - 1| < 1e-14`` for three consecutive modes.

    Raises
    ------
    TruncationNotReached
        If ``l_max`` is reached first.
    """
    log_total = 0j
    run = 0
    for l in range(l_max + 1):
        s = mode_eigenvalue(d, rho, l, lam, bc)
        log_total += sh_dim(d, l) * np.log(s)
        run = run + 1 if abs(s - 1) < _STOP_TOL else 0
        if run >= _STOP_RUN:
            value = complex(np.exp(log_total))
            return (value, l) if full_output else value
    raise TruncationNotReached(
        f"modes up to {l_max} not enough at lam={lam}; raise l_max")


# -- canonical product --------------------------------------------------------

@dataclass(frozen=True)
class CanonicalProductParams:
    genus: int
    c: float
    resonances: object  # ResonanceSet
    truncation_radius: float = np.inf

    def kept(self, radius=None):
        """Distinct nonzero resonance values and multiplicities within radius."""
        radius = self.truncation_radius if radius is None else radius
        vals = self.resonances.values
        mult = self.resonances.multiplicities
        keep = (vals != 0) & (np.abs(vals) <= radius)
        return vals[keep], mult[keep]


def _log_product(params, lam, radius=None, chunk=256):
    vals, mult = params.kept(radius)
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    out = np.empty(lam.shape, dtype=complex)
    for i in range(0, len(lam), chunk):
        x = lam[i:i + chunk, None] / vals[None, :]
        if np.any(np.abs(1 - x) < 1e-14):
            raise FactorPole("spectral parameter coincides with a resonance")
        out[i:i + chunk] = (_log_factor_ratio(x, params.genus) * mult).sum(axis=1)
    return out


def det_S_product(params, lam, error_estimate=False):
    """``exp(i c lam^d) * prod E(-lam/lam_j)/E(lam/lam_j)`` over kept resonances.

    With ``error_estimate`` also return ``|value(Lambda) - value(Lambda/2)|``
    as a truncation indicator (needs a finite truncation radius).
    """
    lam_arr = np.asarray(lam, dtype=complex)
    log_p = _log_product(params, lam_arr) + 1j * params.c * lam_arr.ravel() ** params.genus
    value = np.exp(log_p).reshape(lam_arr.shape)
    value = value if value.ndim else complex(value)
    if not error_estimate:
        return value
    if not np.isfinite(params.truncation_radius):
        raise ValueError("error estimate needs a finite truncation radius")
    half = _log_product(params, lam_arr, params.truncation_radius / 2)
    half = np.exp(half + 1j * params.c * lam_arr.ravel() ** params.genus)
    err = np.abs(np.atleast_1d(value).ravel() - half).reshape(lam_arr.shape)
    return value, (err if err.ndim else float(err))


def log_derivative_det(params, lam, chunk=256):
    """d/dlam log of the canonical product at real ``lam``."""
    d = params.genus
    vals, mult = params.kept()
    lam = np.asarray(lam, dtype=float)
    flat = np.atleast_1d(lam).ravel()
    out = 1j * params.c * d * flat.astype(complex) ** (d - 1)
    w = mult / vals ** d
    v2 = vals * vals
    for i in range(0, len(flat), chunk):
        x = flat[i:i + chunk, None]
        den = v2[None, :] - x * x
        if np.any(den == 0):
            raise FactorPole("spectral parameter coincides with a resonance")
        out[i:i + chunk] += 2 * x[:, 0] ** (d + 1) * (w[None, :] / den).sum(axis=1)
    out = out.reshape(lam.shape)
    return out if out.ndim else complex(out)


def fit_constant_c(resonances, direct, grid, *, genus=None, return_residual=False,
                   max_depth=8):
    """Fit the real constant of the exponential factor.

    The phase of ``direct(lam) / product_without_phase(lam)`` is followed
    continuously from ``lam = 0`` (where it vanishes) across the grid,
    bisecting any step whose observed or slope-predicted phase change exceeds
    pi/2 or whose length more than doubles the previous accepted one, and
    then matched to
    ``c * lam**d`` by scalar least squares.

    Raises
    ------
    PhaseUnwrapFailure
        If bisection cannot bring a jump below pi.
    """
    d = resonances.dimension if genus is None else genus
    params = CanonicalProductParams(d, 0.0, resonances)
    grid = np.sort(np.asarray(grid, dtype=float))
    if np.any(grid <= 0):
        raise ValueError("grid must be positive")

    def wrapped(x):
        return float(np.angle(direct(x) / det_S_product(params, x)))

    phase = []
    prev_x, prev_p, slope = 0.0, 0.0, 0.0
    last_dx = 0.1 / resonances.radius
    for x in grid:
        stack = [(x, 0)]
        while stack:
            xt, depth = stack[-1]
            p = wrapped(xt)
            # the wrapped step aliases once the true one exceeds pi, so also
            # bisect when the last slope predicts a large increment
            guess = slope * (xt - prev_x)
            step = (p - prev_p - guess + np.pi) % (2 * np.pi) - np.pi + guess
            risky = (max(abs(step), abs(guess)) > np.pi / 2
                     or xt - prev_x > 2 * last_dx)
            if risky and depth < max_depth:
                stack.append((0.5 * (prev_x + xt), depth + 1))
                continue
            if abs(step) >= np.pi:
                raise PhaseUnwrapFailure(f"phase jump {step:.3g} near lam={xt:.6g}")
            if xt > prev_x:
                slope = step / (xt - prev_x)
                last_dx = xt - prev_x
            prev_x, prev_p = xt, prev_p + step
            stack.pop()
        phase.append(prev_p)
    phase = np.array(phase)
    basis = grid ** d
    c = float(basis @ phase / (basis @ basis))
    if return_residual:
        return c, float(np.sqrt(np.mean((phase - c * basis) ** 2)))
    return c
