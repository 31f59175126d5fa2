"""Smoothed resonance sums for the wave trace and a growth-exponent scan."""

import csv
from dataclasses import dataclass

import numpy as np

CONVENTIONS = ("decaying", "literal")


def _values(resonances):
    if hasattr(resonances, "values"):
        return (np.asarray(resonances.values, dtype=complex),
                np.asarray(resonances.multiplicities, dtype=float))
    pairs = list(resonances)
    if not pairs:
        return np.empty(0, complex), np.empty(0)
    v, m = zip(*pairs)
    return np.asarray(v, dtype=complex), np.asarray(m, dtype=float)


def smoothed_wave_trace(resonances, t, eps, convention="decaying"):
    """``Σ m_j exp(∓ i lam_j |t|) exp(-eps² |lam_j|² / 2)``.

    ``convention="literal"`` uses ``exp(+i lam_j |t|)``, which grows for
    resonances in the lower half-plane; ``"decaying"`` uses
    ``exp(-i lam_j |t|)`` so that every term decays in ``|t|``.
    ``resonances`` is a ResonanceSet or an iterable of ``(value, multiplicity)``.
    """
    vals, mult = _values(resonances)
    return complex(_trace_grid(vals, mult, np.atleast_1d(abs(t)), np.atleast_1d(eps),
                               convention)[0, 0])


def _trace_grid(vals, mult, ts, eps, convention):
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}")
    sign = 1j if convention == "literal" else -1j
    ts = np.abs(np.asarray(ts, dtype=float))
    eps = np.asarray(eps, dtype=float)
    out = np.zeros((len(ts), len(eps)), dtype=complex)
    if vals.size == 0:
        return out
    weights = mult[None, :] * np.exp(-0.5 * np.outer(eps ** 2, np.abs(vals) ** 2))
    for i, t in enumerate(ts):
        out[i] = weights @ np.exp(sign * vals * t)
    return out


@dataclass(frozen=True)
class SmoothedTraceTable:
    t: np.ndarray
    eps: np.ndarray
    values: np.ndarray  # shape (len(t), len(eps))
    exponents: np.ndarray  # shape (len(t),)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "eps", "re", "im", "abs", "exponent"])
            for i, t in enumerate(self.t):
                for j, e in enumerate(self.eps):
                    u = self.values[i, j]
                    w.writerow(["%.17g" % x for x in
                                (t, e, u.real, u.imag, abs(u), self.exponents[i])])


def singular_support_scan(resonances, t_grid, eps_list, convention="decaying"):
    """Growth exponent of ``|u_eps(t)|`` in ``1/eps`` at each time.

    The exponent is the least-squares slope of ``log|u_eps(t)|`` against
    ``log(1/eps)``; it stays bounded where the trace is smooth.
    """
    eps = np.asarray(eps_list, dtype=float)
    if len(eps) < 2 or np.any(np.diff(eps) >= 0) or np.any(eps <= 0):
        raise ValueError("eps list must be positive and strictly decreasing")
    t = np.asarray(t_grid, dtype=float)
    vals, mult = _values(resonances)
    u = _trace_grid(vals, mult, t, eps, convention)
    x = np.log(1 / eps)
    y = np.log(np.maximum(np.abs(u), 1e-300))
    if vals.size == 0:
        y = np.zeros_like(y)
    xc = x - x.mean()
    slopes = (y - y.mean(axis=1, keepdims=True)) @ xc / (xc @ xc)
    return SmoothedTraceTable(t, eps, u, slopes)
