"""Simultaneous root finding (Aberth-Ehrlich) with argument-principle checks.

Polynomials are given by coefficient sequences in ascending degree.  The
iteration only needs the Newton ratio ``p'/p`` at the current iterates, so an
alternative evaluator (for instance one working in extended precision from
exact coefficients) can be plugged in through the ``evaluator`` argument.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ContourTooClose, NonConvergence

# fixed irrational rotation for the starting circle; avoids symmetric deadlocks
_START_ANGLE = 0.5 * (np.sqrt(5.0) - 1.0)
_EPS = np.finfo(float).eps


class DoubleEvaluator:
    """Horner evaluation in double precision.

    Points outside the unit disc are handled through the reversed polynomial,
    which keeps intermediate values bounded.
    """

    def __init__(self, coefficients):
        c = np.asarray(coefficients, dtype=complex)
        if c.ndim != 1 or len(c) < 2:
            raise ValueError("need at least a linear polynomial")
        if c[-1] == 0:
            raise ValueError("leading coefficient must be nonzero")
        self.coefficients = c
        self.degree = len(c) - 1

    @staticmethod
    def _horner(c, x):
        p = np.full(x.shape, c[-1], dtype=complex)
        dp = np.zeros(x.shape, dtype=complex)
        for a in c[-2::-1]:
            dp = dp * x + p
            p = p * x + a
        return p, dp

    def value(self, z):
        z = np.asarray(z, dtype=complex)
        p, _ = self._horner(self.coefficients, z)
        return p

    def ratio(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.empty_like(z)
        inner = np.abs(z) <= 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            p, dp = self._horner(self.coefficients, z[inner])
            out[inner] = dp / p
            y = 1.0 / z[~inner]
            q, dq = self._horner(self.coefficients[::-1], y)
            out[~inner] = self.degree * y - y * y * dq / q
        return out

    def backward_error(self, z):
        """|p(z)| relative to sum |c_k||z|^k."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        p = self.value(z)
        scale = np.polyval(np.abs(self.coefficients[::-1]), np.abs(z))
        return np.abs(p) / scale


@dataclass
class RootReport:
    roots: list = field(default_factory=list)  # (value, multiplicity, residual)
    verified: bool = False
    iterations: int = 0

    @property
    def values(self):
        return np.array([r[0] for r in self.roots], dtype=complex)

    @property
    def multiplicities(self):
        return np.array([r[1] for r in self.roots], dtype=int)

    def expanded(self):
        """Roots repeated according to multiplicity."""
        return np.repeat(self.values, self.multiplicities)


@dataclass(frozen=True)
class Contour:
    center: complex
    radius: float
    samples: int = 256

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("contour radius must be positive")
        if self.samples < 64 or self.samples % 2:
            raise ValueError("samples must be even and at least 64")

    def points(self, samples=None):
        n = samples or self.samples
        theta = 2 * np.pi * np.arange(n) / n
        return self.center + self.radius * np.exp(1j * theta)


def _starting_points(coefficients, n):
    c = np.asarray(coefficients, dtype=complex)
    lead = c[-1]
    # Fujiwara bound on root moduli
    bound = 2 * max(abs(c[n - k] / lead) ** (1.0 / k) for k in range(1, n + 1))
    theta = 2 * np.pi * (np.arange(n) + _START_ANGLE) / n
    return 0.5 * bound * np.exp(1j * theta)


def aberth(evaluator, z0, tolerance=1e-14, max_iter=200):
    """Run Aberth iterations from ``z0``.

    Each root is frozen once its correction falls below ``tolerance`` relative
    to ``1 + |z|``.  Returns ``(roots, iterations, converged)``.
    """
    z = np.array(z0, dtype=complex)
    active = np.ones(len(z), dtype=bool)
    for it in range(1, max_iter + 1):
        idx = np.nonzero(active)[0]
        r = evaluator.ratio(z[idx])
        diff = z[idx, None] - z[None, :]
        diff[np.arange(len(idx)), idx] = np.inf
        with np.errstate(divide="ignore", invalid="ignore"):
            w = 1.0 / (r - (1.0 / diff).sum(axis=1))
        w[~np.isfinite(r)] = 0.0  # iterate landed exactly on a root
        w[~np.isfinite(w)] = 0.0
        z[idx] -= w
        done = np.abs(w) <= tolerance * (1 + np.abs(z[idx]))
        active[idx[done]] = False
        if not active.any():
            return z, it, True
    return z, max_iter, False


def _cluster(z, cluster_tol):
    """Group iterates by single linkage; returns list of index arrays."""
    n = len(z)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(z[i] - z[j]) <= cluster_tol * (1 + abs(z[i])):
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [np.array(g) for g in groups.values()]


def find_roots(coefficients, tolerance=1e-12, *, evaluator=None, initial=None,
               max_iter=200, cluster_tol=5e-5, polish_steps=2):
    """All roots of a polynomial, with multiplicities.

    Parameters
    ----------
    coefficients : sequence of complex or None
        Ascending-degree coefficients; leading one nonzero.  May be None when
        both ``evaluator`` (with a ``degree`` attribute) and ``initial`` are
        given.
    tolerance : float
        Backward-error bound each root must meet after polishing.
    evaluator : object, optional
        Provides ``ratio(z)`` (``p'/p``) and ``backward_error(z)``; defaults
        to double-precision Horner.
    initial : array_like, optional
        Starting iterates (length = degree).

    Raises
    ------
    NonConvergence
        If the iteration stalls above the noise floor.
    """
    if coefficients is None:
        # coefficients too large for doubles: evaluator and iterates supply all
        if evaluator is None or initial is None:
            raise ValueError("coefficients required without evaluator and initial")
        n = evaluator.degree
        ev = evaluator
        z0 = np.asarray(initial, complex)
    else:
        c = np.asarray(coefficients, dtype=complex)
        if len(c) < 2:
            raise ValueError("degree must be at least 1")
        if c[-1] == 0:
            raise ValueError("leading coefficient must be nonzero")
        zeros = int(np.argmax(c != 0))
        if zeros and evaluator is None and initial is None:
            # exact roots at the origin are deflated
            rest = find_roots(c[zeros:], tolerance, max_iter=max_iter,
                              cluster_tol=cluster_tol, polish_steps=polish_steps) \
                if len(c) - zeros > 1 else RootReport(verified=True)
            roots = sorted(rest.roots + [(0j, zeros, 0.0)],
                           key=lambda r: (r[0].real, r[0].imag))
            return RootReport(roots=roots, verified=rest.verified,
                              iterations=rest.iterations)
        n = len(c) - 1
        ev = evaluator if evaluator is not None else DoubleEvaluator(c)
        z0 = _starting_points(c, n) if initial is None else np.asarray(initial, complex)
    if len(z0) != n:
        raise ValueError(f"need {n} starting points, got {len(z0)}")

    step_tol = min(tolerance, 4 * _EPS) if evaluator is not None else 4 * _EPS
    z, iterations, converged = aberth(ev, z0, step_tol, max_iter)

    # Newton polish; multiple roots make this a no-op rather than harmful
    for _ in range(polish_steps):
        r = ev.ratio(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(np.isfinite(r) & (r != 0), 1.0 / r, 0.0)
        z = z - step

    residual = ev.backward_error(z)
    # the double-precision iteration stalls at the rounding floor for clustered
    # roots, so only treat the cap as failure when residuals are large
    if not converged and np.max(residual) > max(tolerance, 1e3 * _EPS):
        raise NonConvergence(
            f"Aberth iteration did not converge in {max_iter} steps",
            best=z, iterations=iterations)

    roots = []
    for g in _cluster(z, cluster_tol):
        center = z[g].mean()
        res = float(ev.backward_error(np.array([center]))[0]) if len(g) > 1 \
            else float(residual[g[0]])
        roots.append((complex(center), len(g), res))
    roots.sort(key=lambda r: (r[0].real, r[0].imag))
    verified = all(r[2] <= max(tolerance, 1e3 * _EPS) or r[1] > 1 for r in roots)
    return RootReport(roots=roots, verified=verified, iterations=iterations)


def _winding_on(values):
    steps = np.angle(np.roll(values, -1) / values)
    return steps


def winding_count(coefficients, contour, *, evaluator=None, min_distance=1e-8,
                  max_samples=1 << 16):
    """Number of roots inside ``contour`` via the argument principle.

    Sampling is refined until every phase increment stays below pi/4.

    Raises
    ------
    ContourTooClose
        If a root lies within ``min_distance`` of the contour, judged from the
        Newton distance estimate |p/p'| at the samples.
    """
    ev = evaluator if evaluator is not None else DoubleEvaluator(coefficients)
    samples = contour.samples
    while True:
        z = contour.points(samples)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = ev.ratio(z)
            dist = np.where(np.isfinite(r), 1.0 / np.abs(r), 0.0)
        if np.min(dist) < min_distance:
            raise ContourTooClose(
                f"root within {np.min(dist):.2e} of the contour")
        v = ev.value(z)
        steps = _winding_on(v)
        if np.max(np.abs(steps)) < np.pi / 4:
            break
        if samples >= max_samples:
            raise ContourTooClose("phase not resolved at maximum sampling")
        samples *= 2
    return int(np.rint(steps.sum() / (2 * np.pi)))


def verify_report(coefficients, report, enclosing_radius, *, evaluator=None):
    """Check a report against winding counts.

    The enclosing circle (centered at 0) must contain exactly the reported
    total multiplicity, and a small circle about each reported root must
    contain exactly its multiplicity.
    """
    vals = report.values
    mults = report.multiplicities
    try:
        total = winding_count(coefficients, Contour(0j, enclosing_radius),
                              evaluator=evaluator)
        if total != mults.sum():
            return False
        for k, (v, m) in enumerate(zip(vals, mults)):
            others = np.delete(vals, k)
            sep = np.min(np.abs(others - v)) if len(others) else 1.0
            rad = 0.4 * sep
            if abs(v) + rad > enclosing_radius:
                return False
            if winding_count(coefficients, Contour(v, rad),
                             evaluator=evaluator, min_distance=1e-3 * rad) != m:
                return False
    except ContourTooClose:
        return False
    return True
