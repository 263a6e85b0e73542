import zlib

import numpy as np
import pytest

ACCEPTANCE_RESULTS = {}


def cgauss(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_hermitian(rng, n):
    X = cgauss(rng, (n, n))
    return (X + X.conj().T) / 2


def random_unitary(rng, n):
    Q, R = np.linalg.qr(cgauss(rng, (n, n)))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


@pytest.fixture
def rng(request):
    # a distinct, reproducible stream per test
    return np.random.default_rng(zlib.crc32(request.node.nodeid.encode()))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        ok, line = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {line}")
