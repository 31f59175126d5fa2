import os

import pytest

_ACCEPTANCE_LINES = []


def pytest_configure(config):
    os.environ.setdefault("BALLRES_CACHE_DIR", str(config.rootpath / ".pytest_cache" / "ballres"))


@pytest.fixture(scope="session")
def acceptance_log():
    def log(name, ok, detail=""):
        line = f"{name}: {'PASS' if ok else 'FAIL'}" + (f"  ({detail})" if detail else "")
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return log


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def unit_ball_60():
    from ballres import ball_resonances
    return ball_resonances(3, 1.0, 60)


@pytest.fixture(scope="session")
def calibration_rho2():
    from ballres.cache import ResonanceCache
    from ballres.heat import calibrate_alphas, required_l_max
    rs = ResonanceCache().get(3, 2.0, required_l_max(2.0))
    return calibrate_alphas(3, resonances=rs)


@pytest.fixture(scope="session")
def unit_ball_fit():
    from ballres.cache import ResonanceCache
    from ballres.heat import fit_from_resonances, required_l_max
    rs = ResonanceCache().get(3, 1.0, required_l_max(1.0))
    return rs, fit_from_resonances(rs)
