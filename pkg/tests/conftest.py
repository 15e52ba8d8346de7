import numpy as np
import pytest

from feberi.analytic import TlsAmplitudes
from feberi.coupling import KernelContext
from feberi.physical import derive_kinematics, table1_beam, table1_tls


@pytest.fixture(scope="session")
def kin():
    return derive_kinematics(table1_beam())


@pytest.fixture(scope="session")
def tls():
    return table1_tls()


@pytest.fixture(scope="session")
def ctx(kin, tls):
    return KernelContext.build(kin, tls)


@pytest.fixture
def sup3b():
    """(|1> + 2i|2>)/sqrt(5)."""
    return TlsAmplitudes.superposition(1.0, 2.0j)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Record one pass/fail line per acceptance criterion (echoed in the summary)."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def log(criterion, ok, detail):
        line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return ok

    return log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
