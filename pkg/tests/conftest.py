import numpy as np
import pytest

from slowlind.model import builtin_models, spectral_frame

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)

GRID = np.linspace(0.0, 1.0, 201)


@pytest.fixture(scope="session")
def qubit_sx():
    return builtin_models("qubit-sx")


@pytest.fixture(scope="session")
def qubit_sx_frame(qubit_sx):
    return spectral_frame(qubit_sx.hamiltonian, GRID)


@pytest.fixture(scope="session")
def random_d3():
    return builtin_models("random-d3")


@pytest.fixture(scope="session")
def random_d3_frame(random_d3):
    return spectral_frame(random_d3.hamiltonian, GRID)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def gen_valid(seed, d=3):
    """random_model(d, seed) with its frame if Gen and Split hold on the path, else None."""
    from slowlind.model import LabelingError, check_hypotheses, random_model

    m = random_model(d, seed)
    try:
        frame = spectral_frame(m.hamiltonian, np.linspace(0.0, 1.0, 101))
        if not frame.singleton:
            return None
        rep = check_hypotheses(m, np.linspace(0.0, 1.0, 101))
    except LabelingError:
        return None
    return (m, frame) if rep.gen and rep.split else None


def gen_valid_models(n, d=3, start=0):
    out, seed = [], start
    while len(out) < n:
        hit = gen_valid(seed, d)
        if hit is not None:
            out.append((seed,) + hit)
        seed += 1
    return out


ACCEPTANCE_LINES: list = []


def record_criterion(k: int, ok: bool, detail: str) -> str:
    line = f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
