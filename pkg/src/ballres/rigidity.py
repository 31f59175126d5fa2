"""Decide from three boundary invariants whether an obstacle is a disjoint
union of equal balls, and recover the count and radius."""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveInvariant
from .geometry import GeometricInvariants, cs_constant, sphere_area
from .heat import fit_from_resonances

TOL_PIPELINE = 0.05
TOL_EXACT = 1e-9
# relative distance from a half-integer m-hat that counts as a tie
_TIE_TOL = 1e-9


class ConvexityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class IdentifyResult:
    is_union_of_equal_balls: bool
    m: int
    rho: float
    cs_defect: float
    af_defect: float
    tolerance: float
    m_hat: float = None
    rho_hat: float = None

    def summary(self):
        if self.is_union_of_equal_balls:
            return (f"union_of_equal_balls: true, m={self.m}, "
                    f"rho={self.rho:.2f}±{self.tolerance:g}")
        return (f"union_of_equal_balls: false, cs_defect={self.cs_defect:.4g}, "
                f"m_hat={self.m_hat:.4g}, rho_hat={self.rho_hat:.4g}")


def _gates(tol, d):
    """Acceptance gates for the defect and for m-hat.

    Each gate is the larger of ``tol`` and the worst-case change produced by
    perturbing every invariant by a factor within ``1 ± tol/4``, so that such
    perturbations of exact sphere data never change the verdict.
    """
    e = tol / 4
    cs = max(tol, ((1 + e) / (1 - e)) ** 2 - 1)
    m = max(tol, (1 + e) ** (d - 1) / (1 - e) ** (d - 2) - 1)
    return cs, m


def identify(inv, tol=TOL_PIPELINE):
    """Run the decision procedure on ``inv``.

    Raises
    ------
    NonPositiveInvariant
        If any of A1, A2, A3 is not positive.
    """
    A1, A2, A3, d = inv.A1, inv.A2, inv.A3, inv.d
    if min(A1, A2, A3) <= 0:
        raise NonPositiveInvariant(f"invariants must be positive, got {(A1, A2, A3)}")
    sigma = sphere_area(d)
    rho_hat = (d - 1) * A1 / A2
    m_hat = A1 / (sigma * rho_hat ** (d - 1))
    cs_defect = A3 * A1 / (cs_constant(d) * A2 ** 2) - 1
    cs_gate, m_gate = _gates(tol, d)

    m_round = int(np.rint(m_hat))
    tie = abs(abs(m_hat - np.floor(m_hat)) - 0.5) <= _TIE_TOL * max(m_hat, 1.0)
    ok = (abs(cs_defect) <= cs_gate and m_round >= 1 and not tie
          and abs(m_hat - m_round) <= m_gate * m_round)
    af = _af(A1, A2, d) if m_round == 1 else None
    return IdentifyResult(
        is_union_of_equal_balls=bool(ok),
        m=m_round if ok else None,
        rho=float(rho_hat) if ok else None,
        cs_defect=float(cs_defect),
        af_defect=af,
        tolerance=tol,
        m_hat=float(m_hat),
        rho_hat=float(rho_hat),
    )


def _af(A1, A2, d):
    s = sphere_area(d)
    return float((A2 / ((d - 1) * s)) ** (1 / (d - 2)) / (A1 / s) ** (1 / (d - 1)) - 1)


def alexandrov_fenchel_defect(inv, assume_convex=False):
    """Scale-invariant defect between the mean-curvature and area radii.

    Nonnegative for convex bodies and zero only for balls.  Convexity cannot
    be read off the invariants; without ``assume_convex`` a
    :class:`ConvexityWarning` is issued and the value is only indicative.
    """
    if not assume_convex:
        warnings.warn("convexity not verified; defect is indicative only",
                      ConvexityWarning, stacklevel=2)
    return _af(inv.A1, inv.A2, inv.d)


def invariants_from_resonances(resonances, cal, t_grid=None, n_max=None, return_fit=False):
    """Boundary invariants read off the heat coefficients of a resonance set."""
    if cal.d != resonances.dimension:
        raise ValueError(f"calibration is for d={cal.d}, resonances for d={resonances.dimension}")
    if t_grid is None:
        t_grid = cal.t_grid or None
    n_max = cal.n_max if n_max is None else n_max
    fit = fit_from_resonances(resonances, t_grid, n_max, c=0.0)
    inv = GeometricInvariants(*(float(fit.a[k + 1] / cal.alpha[k]) for k in range(3)),
                              resonances.dimension)
    return (inv, fit) if return_fit else inv
