import numpy as np
import pytest

from riemfourier.geometry import zoo

ZOO = [
    ("euclidean", {"n": 2}),
    ("flat_torus", {"periods": (1.0, 1.0)}),
    ("sphere2", {"radius": 1.0}),
    ("poincare_disk", {}),
    ("surface_of_revolution", {"profile": "catenoid"}),
]


@pytest.fixture(params=ZOO, ids=[name for name, _ in ZOO])
def chart(request):
    name, params = request.param
    return zoo(name, **params)


@pytest.fixture
def sphere():
    return zoo("sphere2", radius=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


_VERDICTS = {}


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line per acceptance criterion; returns the flag."""
    def record(number, title, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2} {title}: {detail}"
        _VERDICTS[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_VERDICTS):
            terminalreporter.write_line(_VERDICTS[number])
