import numpy as np
import pytest

from onebit_music.array_model import ArrayGeometry, SourceScenario

TWO_SOURCE_DOAS = (-10.0, 3.5)


@pytest.fixture
def ula10():
    return ArrayGeometry.ula(10, 0.5)


@pytest.fixture
def ula3():
    return ArrayGeometry((0.0, 0.5, 1.0))


@pytest.fixture
def two_source_scenario():
    """Two equal-power sources at -10 and 3.5 degrees, 0 dB."""
    return SourceScenario.equal_power(TWO_SOURCE_DOAS, 0.0)


def random_hermitian(rng, M):
    Z = rng.standard_normal((M, M)) + 1j * rng.standard_normal((M, M))
    return 0.5 * (Z + Z.conj().T)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_ACCEPTANCE = []


@pytest.fixture
def report():
    """Record one pass/fail line for an acceptance criterion, then assert it."""

    def _report(number, name, ok, detail=""):
        _ACCEPTANCE.append((number, name, bool(ok), detail))
        assert ok, f"criterion {number} ({name}) failed: {detail}"

    return _report


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, ok, detail in sorted(_ACCEPTANCE):
        terminalreporter.write_line(
            f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {name}: {detail}")
