from math import gamma, pi

import numpy as np
import pytest

from ballres.errors import IllConditioned, QuadratureStall
from ballres.heat import (CalibrationConstants, HeatSamples, _trace_integral, calibrate_alphas,
                          compare_with_literature, default_t_grid, fit_from_resonances,
                          fit_heat_coefficients, heat_samples_modes, heat_trace_modes,
                          heat_trace_modes_many, heat_trace_resonance,
                          heat_trace_resonance_many, load_literature_constants)
from ballres.radial import NEUMANN, ResonanceSet
from ballres.scattering import CanonicalProductParams


def test_empty_set_gives_zero():
    p = CanonicalProductParams(3, 0.0, ResonanceSet(3, 1.0, NEUMANN, 0, ()))
    assert np.all(heat_trace_resonance_many(p, [1e-3, 0.1, 2.0]) == 0)


@pytest.mark.parametrize("d", [3, 5])
def test_constant_term_alone(d):
    c = 0.37
    p = CanonicalProductParams(d, c, ResonanceSet(d, 1.0, NEUMANN, 0, ()))
    for t in (1e-3, 0.03, 1.0, 4.0):
        want = c * d / (2 * pi) * gamma(d / 2) * t ** (-d / 2)
        assert heat_trace_resonance(p, t) == pytest.approx(want, rel=1e-10)


# scipy spherical Bessel phases integrated with adaptive quadrature, l <= 150
FROZEN_TRACE = {0.01: -141.55604095419855, 0.05: -8.258953297248574}


@pytest.mark.parametrize("t", sorted(FROZEN_TRACE))
def test_mode_trace_frozen(t):
    assert heat_trace_modes(3, 1.0, t) == pytest.approx(FROZEN_TRACE[t], rel=1e-9)


def test_cross_oracle_matched_truncation(unit_ball_60):
    t = default_t_grid(n=8)
    p = CanonicalProductParams(3, 1 / 3, unit_ball_60)
    a = heat_trace_resonance_many(p, t)
    b = heat_trace_modes_many(3, 1.0, t, l_max=60)
    assert np.max(np.abs(a / b - 1)) < 5e-3


def test_large_time_is_small():
    assert abs(heat_trace_modes(3, 1.0, 10.0)) < 1e-2


def test_mode_contributions_decay():
    total, per_mode = heat_trace_modes_many(3, 1.0, [0.05], full_output=True)
    tail = np.abs(per_mode[0, 20:60])
    assert np.all(np.diff(tail) < 0)
    assert abs(per_mode[0].sum() - total[0]) < 1e-12 * abs(total[0])


def test_mode_samples_method_tag():
    s = heat_samples_modes(3, 1.0, [0.02, 0.05])
    assert s.method == "mode_sum"


def test_fit_synthetic_roundtrip():
    t = default_t_grid()
    a = np.array([-0.2, 0.5, -0.37, 0.29])
    vals = t ** (-1.5) * sum(a[n] * t ** (n / 2) for n in range(4))
    f = fit_heat_coefficients(HeatSamples(t, vals, "mode_sum"), 3, 3)
    assert np.allclose(f.a, a, rtol=1e-8, atol=0)
    assert f.c_entangled == (0,)
    assert f.covariance.shape == (4, 4)


def test_fit_guards():
    t = default_t_grid()
    s = HeatSamples(t, t ** -1.5, "mode_sum")
    with pytest.raises(IllConditioned):
        fit_heat_coefficients(s, 3, 7)
    with pytest.raises(ValueError):
        fit_heat_coefficients(HeatSamples(t[:6], t[:6] ** -1.5, "mode_sum"), 3, 3)
    short = np.logspace(-3, -2, 12)
    with pytest.raises(ValueError):
        fit_heat_coefficients(HeatSamples(short, short ** -1.5, "mode_sum"), 3, 3)


def test_samples_validation():
    with pytest.raises(ValueError):
        HeatSamples([0.1, 0.05], [1.0, 2.0], "mode_sum")
    with pytest.raises(ValueError):
        HeatSamples([0.1, 0.2], [1.0, np.nan], "mode_sum")


def test_constant_only_moves_a0(unit_ball_60):
    t = default_t_grid()
    f0 = fit_from_resonances(unit_ball_60, t, 3, c=0.0)
    f1 = fit_from_resonances(unit_ball_60, t, 3, c=1.0)
    assert abs(f1.a[0] - f0.a[0]) > 0.1
    for n in (1, 2, 3):
        assert abs(f1.a[n] / f0.a[n] - 1) < 1e-6


def test_boundary_term_sign(unit_ball_fit):
    _, fit = unit_ball_fit
    assert fit.a[1] > 0


def test_quadrature_stall():
    with pytest.raises(QuadratureStall):
        _trace_integral(lambda x: 1j * np.cos(3e3 * x), np.array([0.5]), max_order=40)


def test_calibration_radius_independent(unit_ball_fit, calibration_rho2):
    rs, _ = unit_ball_fit
    cal1 = calibrate_alphas(3, resonances=rs)
    assert cal1.alpha[0] > 0
    for a1, a2 in zip(cal1.alpha, calibration_rho2.alpha):
        assert abs(a1 / a2 - 1) < 0.02


def test_calibration_roundtrip(tmp_path, calibration_rho2):
    p = tmp_path / "cal.json"
    calibration_rho2.save(p)
    back = CalibrationConstants.load(p)
    assert back == calibration_rho2
    with pytest.raises(ValueError):
        CalibrationConstants((1.0, 0.0, 2.0), 3)


def test_literature_hook(tmp_path, calibration_rho2):
    p = tmp_path / "lit.txt"
    a = calibration_rho2.alpha
    p.write_text(f"# d alpha1 alpha2 alpha3\n3, {a[0]}, {a[1] * 1.01}, {a[2]}\n5 1 2 3\n")
    table = load_literature_constants(p)
    assert set(table) == {3, 5}
    dev = compare_with_literature(calibration_rho2, table)
    assert dev[0] < 1e-12 and abs(dev[1] - 0.01 / 1.01) < 1e-9
    assert compare_with_literature(CalibrationConstants((1, 1, 1), 7), table) is None
