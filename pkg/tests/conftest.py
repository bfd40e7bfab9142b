import numpy as np
import pytest

from windbias.grid import GridGeometry


def haversine_oracle(lat1, lon1, lat2, lon2, radius=6371.0):
    lat1, lon1, lat2, lon2 = map(np.radians, (lat1, lon1, lat2, lon2))
    a = np.sin((lat2 - lat1) / 2) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin((lon2 - lon1) / 2) ** 2
    return 2 * radius * np.arcsin(np.sqrt(a))


def random_geometry(rng, nmin=4, nmax=9):
    return GridGeometry(
        lat0=float(rng.uniform(-40, 30)), lon0=float(rng.uniform(-80, 60)),
        dlat=float(rng.choice([0.25, 0.5, 0.625])), dlon=float(rng.choice([0.5, 0.625, 1.0])),
        nlat=int(rng.integers(nmin, nmax)), nlon=int(rng.integers(nmin, nmax)),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
