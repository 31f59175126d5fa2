import csv

import numpy as np
import pytest

from ballres.wave import singular_support_scan, smoothed_wave_trace


def test_single_resonance_literal_grows():
    assert smoothed_wave_trace([(-1j, 1)], 1.0, 0.0, "literal") == pytest.approx(np.e)
    assert smoothed_wave_trace([(-1j, 1)], 1.0, 0.0) == pytest.approx(np.exp(-1))


def test_mirror_pair():
    pair = [(1 - 1j, 1), (-1 - 1j, 1)]
    for t in (0.3, 1.0, 2.5):
        assert smoothed_wave_trace(pair, t, 0.0) == pytest.approx(2 * np.exp(-t) * np.cos(t))
        assert smoothed_wave_trace(pair, -t, 0.0) == smoothed_wave_trace(pair, t, 0.0)


def test_weights_vanish():
    assert abs(smoothed_wave_trace([(1 - 1j, 3)], 1.0, 60.0)) == 0
    with pytest.raises(ValueError):
        smoothed_wave_trace([(1 - 1j, 3)], 1.0, 0.1, "other")


def test_empty_scan():
    tab = singular_support_scan([], [0.5, 1.0], [0.2, 0.1])
    assert np.all(tab.values == 0) and np.all(tab.exponents == 0)


def test_scan_requires_decreasing_eps(unit_ball_60):
    with pytest.raises(ValueError):
        singular_support_scan(unit_ball_60, [1.0], [0.1, 0.2])


def test_symmetric_set_gives_real_values(unit_ball_60):
    tab = singular_support_scan(unit_ball_60, [0.5, 1.0, 2.0], [0.2, 0.1, 0.05])
    assert np.all(np.abs(tab.values.imag) <= 1e-10 * np.abs(tab.values))


def test_refinement_stability(unit_ball_fit):
    rs, _ = unit_ball_fit
    tab = singular_support_scan(rs, [1.0, 2.0, 3.0, 4.0], [0.2, 0.1, 0.05])
    a = np.abs(tab.values)
    change = np.abs(np.diff(a, axis=1)) / np.maximum(a[:, :-1], a[:, 1:])
    assert np.all(change < 0.10)


def test_scan_csv(tmp_path, unit_ball_60):
    tab = singular_support_scan(unit_ball_60, [0.01, 1.0], [0.2, 0.1, 0.05])
    p = tmp_path / "scan.csv"
    tab.to_csv(p)
    rows = list(csv.reader(open(p)))
    assert rows[0] == ["t", "eps", "re", "im", "abs", "exponent"]
    assert len(rows) == 1 + 2 * 3
    assert tab.exponents[0] > tab.exponents[1]
