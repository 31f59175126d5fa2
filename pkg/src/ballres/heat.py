"""Relative heat trace from scattering data, its small-t fit, and the
dimension constants tying heat coefficients to boundary invariants.

The trace is

    H(t) = (1/2 pi i) ∫_R exp(-t lam²) d/dlam log s(lam) dlam
           + 1/2 Σ_{real lam_j} exp(-t lam_j²),

evaluated by composite Gauss-Legendre quadrature on [-L, L] with
``L = ceil(8/sqrt(t))`` and panels of width ``min(1, 1/sqrt(t))``.  The
integrand is even in ``lam``, so only [0, L] is sampled.
"""

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import IllConditioned, QuadratureStall, TruncationNotReached
from .geometry import sphere_invariants
from .radial import NEUMANN, BoundaryCondition, ball_resonances, check_dimension, sh_dim
from .scattering import CanonicalProductParams, log_derivative_det, mode_log_derivatives_real

QUAD_RTOL = 1e-9
REAL_RTOL = 1e-8


def default_t_grid(t_min=1e-3, t_max=1e-1, n=24):
    return np.logspace(np.log10(t_min), np.log10(t_max), n)


def required_l_max(rho, t_min=1e-3):
    """Modes needed for the trace to be complete down to ``t_min``.

    Mode l only starts to contribute for ``lam*rho`` beyond about ``l``, and
    the Gaussian kills ``lam > sqrt(20/t)``.
    """
    return int(np.ceil(rho * np.sqrt(20.0 / t_min))) + 10


# -- quadrature ---------------------------------------------------------------

def _panel_layout(t):
    w = min(1.0, 1.0 / np.sqrt(t))
    L = np.ceil(8.0 / np.sqrt(t))
    return w, int(np.ceil(L / w - 1e-12))


def _integrate(f, ts, order):
    """2 ∫_0^L exp(-t x²) f(x) dx for each t; f may return (n,) or (n, k)."""
    x0, w0 = np.polynomial.legendre.leggauss(order)
    layouts = [_panel_layout(t) for t in ts]
    out = [None] * len(ts)
    for width in sorted({w for w, _ in layouts}):
        idx = [i for i, (w, _) in enumerate(layouts) if w == width]
        n_pan = max(layouts[i][1] for i in idx)
        left = width * np.arange(n_pan)
        x = (left[:, None] + 0.5 * width * (x0 + 1)[None, :]).ravel()
        wq = np.tile(0.5 * width * w0, n_pan)
        fx = np.asarray(f(x))
        for i in idx:
            m = layouts[i][1] * order
            g = np.exp(-ts[i] * x[:m] ** 2) * wq[:m]
            out[i] = 2 * np.tensordot(g, fx[:m], axes=(0, 0))
    return np.array(out)


def _trace_integral(f, ts, order=10, max_order=160):
    """(1/2 pi i) ∫_R exp(-t lam²) f(lam) dlam, refined by order doubling.

    Raises
    ------
    QuadratureStall
        If successive orders do not agree to ``QUAD_RTOL``.
    """
    prev = _integrate(f, ts, order)
    while True:
        order *= 2
        cur = _integrate(f, ts, order)
        tot = cur.sum(axis=-1) if cur.ndim > 1 else cur
        ptot = prev.sum(axis=-1) if prev.ndim > 1 else prev
        if np.all(np.abs(tot - ptot) <= QUAD_RTOL * np.abs(tot)):
            return cur / (2j * np.pi)
        if order >= max_order:
            raise QuadratureStall(
                f"panel refinement stalled at order {order} "
                f"(rel change {np.max(np.abs(tot - ptot) / np.abs(tot)):.2e})")
        prev = cur


def _realize(values):
    bad = np.abs(values.imag) > REAL_RTOL * np.abs(values.real) + 1e-300
    if np.any(bad):
        raise ArithmeticError(
            f"trace has imaginary part {np.max(np.abs(values.imag)):.3e}")
    return values.real


# -- samples and traces -------------------------------------------------------

@dataclass(frozen=True)
class HeatSamples:
    t: np.ndarray
    values: np.ndarray
    method: str  # "resonance_integral" or "mode_sum"

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("t and values must be matching 1-d arrays")
        if np.any(t <= 0) or np.any(np.diff(t) <= 0):
            raise ValueError("t must be positive and increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("trace values must be finite")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)


def heat_trace_resonance_many(params, ts):
    """Heat trace from the canonical product at every time in ``ts``."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if np.any(ts <= 0):
        raise ValueError("t must be positive")
    vals, _ = params.kept()
    rows = max(1, int(2e6 // max(len(vals), 1)))

    def f(x):
        return log_derivative_det(params, x, chunk=rows)

    out = _realize(_trace_integral(f, ts))
    vals, mult = params.kept()
    real = np.abs(vals.imag) <= 1e-12 * np.maximum(1.0, np.abs(vals))
    if np.any(real):
        out = out + 0.5 * (mult[real] * np.exp(-np.outer(ts, vals[real].real ** 2))).sum(1)
    return out


def heat_trace_resonance(params, t):
    return float(heat_trace_resonance_many(params, [t])[0])


def heat_samples_resonance(params, t_grid):
    t_grid = np.asarray(t_grid, dtype=float)
    return HeatSamples(t_grid, heat_trace_resonance_many(params, t_grid),
                       "resonance_integral")


def heat_trace_modes_many(d, rho, ts, l_max=None, bc=NEUMANN, full_output=False):
    """Heat trace from the per-mode scattering phases.

    With ``l_max`` given exactly the modes ``0..l_max`` are summed (matched
    truncation).  Otherwise modes are added until the last three each
    contribute below ``1e-12`` of the total at every time.
    """
    d = check_dimension(d)
    bc = BoundaryCondition.parse(bc)
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if np.any(ts <= 0):
        raise ValueError("t must be positive")
    auto = l_max is None
    cap = required_l_max(rho, ts.min()) + 20 if auto else int(l_max)
    while True:
        mult = np.array([sh_dim(d, l) for l in range(cap + 1)], dtype=float)

        def f(x):
            return mode_log_derivatives_real(d, rho, x, cap, bc) * mult

        per_mode = _realize(_trace_integral(f, ts))
        total = per_mode.sum(axis=1)
        if not auto:
            break
        tail = np.abs(per_mode[:, -3:]).max(axis=1)
        if np.all(tail < 1e-12 * np.abs(total)):
            break
        if cap > 4000:
            raise TruncationNotReached("mode sum not converged by l = 4000")
        cap = int(cap * 1.5)
    return (total, per_mode) if full_output else total


def heat_trace_modes(d, rho, t, l_max=None, bc=NEUMANN):
    return float(heat_trace_modes_many(d, rho, [t], l_max, bc)[0])


def heat_samples_modes(d, rho, t_grid, l_max=None, bc=NEUMANN):
    t_grid = np.asarray(t_grid, dtype=float)
    return HeatSamples(t_grid, heat_trace_modes_many(d, rho, t_grid, l_max, bc), "mode_sum")


# -- fit -----------------------------------------------------------------------

@dataclass(frozen=True)
class HeatCoefficients:
    """Coefficients of ``H(t) ~ t^(-d/2) Σ a_n t^(n/2)``.

    ``a[0]`` also carries the exponential-factor constant of the scattering
    determinant and is listed in ``c_entangled``.
    """

    a: tuple
    covariance: np.ndarray
    d: int
    residual: float
    c_entangled: tuple = (0,)

    @property
    def n_max(self):
        return len(self.a) - 1


def fit_heat_coefficients(samples, d, n_max=3, cond_max=1e10):
    """Weighted least squares in the basis ``t^((n-d)/2)``, weights ``t^(d/2)``.

    Raises
    ------
    IllConditioned
        If the column-scaled Gram matrix has condition number above
        ``cond_max``.
    """
    t, y = samples.t, samples.values
    if len(t) < 2 * (n_max + 1):
        raise ValueError(f"need at least {2 * (n_max + 1)} samples for n_max={n_max}")
    if np.log10(t[-1] / t[0]) < 1.5:
        raise ValueError("sample times must span at least 1.5 decades")
    A = t[:, None] ** (np.arange(n_max + 1)[None, :] / 2)
    b = t ** (d / 2) * y
    s = np.linalg.norm(A, axis=0)
    An = A / s
    gram = An.T @ An
    cond = np.linalg.cond(gram)
    if cond > cond_max:
        raise IllConditioned(f"Gram condition {cond:.2e} exceeds {cond_max:.0e}; "
                             "narrow the t-range or lower n_max")
    x, *_ = np.linalg.lstsq(An, b, rcond=None)
    coef = x / s
    res = b - A @ coef
    dof = max(len(t) - (n_max + 1), 1)
    sigma2 = res @ res / dof
    cov = sigma2 * np.linalg.inv(gram) / np.outer(s, s)
    return HeatCoefficients(tuple(float(a) for a in coef), cov, d,
                            float(np.linalg.norm(res) / np.linalg.norm(b)))


# -- calibration --------------------------------------------------------------

@dataclass(frozen=True)
class CalibrationConstants:
    alpha: tuple  # (alpha_1, alpha_2, alpha_3)
    d: int
    rho: float = 1.0
    t_grid: tuple = field(default=(), compare=False)
    l_max: int = 0
    n_max: int = 6

    def __post_init__(self):
        if len(self.alpha) != 3 or any(a == 0 for a in self.alpha):
            raise ValueError("need three nonzero constants")

    def to_dict(self):
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, data):
        return cls(alpha=tuple(data["alpha"]), d=int(data["d"]), rho=float(data["rho"]),
                   t_grid=tuple(data.get("t_grid", ())), l_max=int(data.get("l_max", 0)),
                   n_max=int(data.get("n_max", 6)))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def fit_from_resonances(resonances, t_grid=None, n_max=6, c=0.0):
    """Sample the trace of a resonance set and fit its coefficients."""
    t_grid = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    params = CanonicalProductParams(resonances.dimension, c, resonances)
    return fit_heat_coefficients(heat_samples_resonance(params, t_grid),
                                 resonances.dimension, n_max)


def calibrate_alphas(d=3, rho=1.0, t_grid=None, n_max=6, l_max=None, resonances=None):
    """Calibrate the dimension constants on a single ball of radius ``rho``.

    Fitted ``a_1..a_3`` are divided by the closed-form sphere invariants.
    Only the Neumann problem is calibrated.
    """
    d = check_dimension(d)
    t_grid = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    if resonances is None:
        l_max = required_l_max(rho, t_grid.min()) if l_max is None else l_max
        resonances = ball_resonances(d, rho, l_max, NEUMANN)
    elif resonances.bc is not NEUMANN:
        raise ValueError("calibration is defined for the Neumann problem only")
    coeffs = fit_from_resonances(resonances, t_grid, n_max)
    geo = sphere_invariants(d, resonances.radius, 1)
    alpha = (coeffs.a[1] / geo.A1, coeffs.a[2] / geo.A2, coeffs.a[3] / geo.A3)
    return CalibrationConstants(tuple(float(a) for a in alpha), d, resonances.radius,
                                tuple(float(t) for t in t_grid), resonances.l_max, n_max)


def load_literature_constants(path):
    """Read ``d alpha_1 alpha_2 alpha_3`` rows (comma or space separated)."""
    table = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].replace(",", " ").replace("=", " ").strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ValueError(f"bad literature row: {line!r}")
            table[int(parts[0])] = tuple(float(p) for p in parts[1:])
    return table


def compare_with_literature(cal, table):
    """Relative deviations of calibrated constants from a literature row."""
    if cal.d not in table:
        return None
    return tuple(abs(a / b - 1) for a, b in zip(cal.alpha, table[cal.d]))
