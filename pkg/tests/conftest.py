import numpy as np
import pytest

from framealias.core import Filterbank


def complex_normal(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_fb(rng, M, LK, d, L=None, real=False):
    k = rng.standard_normal((M, LK)) if real else complex_normal(rng, M, LK)
    return Filterbank.create(k / np.sqrt(2 * M * LK), d, L)


def random_isometry(rng, rows, cols):
    q, _ = np.linalg.qr(complex_normal(rng, rows, cols))
    return q


def paraunitary_kernels(rng, M, d, degree=0):
    """Kernels ``w_j[d m + i] = H_m[j, i]`` of a lossless polyphase matrix.

    ``H(z) = U prod_k (I - P_k + z^-1 P_k)`` with an ``M x d`` isometry ``U``
    and rank-one projectors ``P_k``; kernel size ``d (degree + 1)``.
    """
    H = [random_isometry(rng, M, d)]
    for _ in range(degree):
        v = complex_normal(rng, d)
        v /= np.linalg.norm(v)
        P = np.outer(v, v.conj())
        nxt = [np.zeros((M, d), dtype=complex) for _ in range(len(H) + 1)]
        for m, Hm in enumerate(H):
            nxt[m] += Hm @ (np.eye(d) - P)
            nxt[m + 1] += Hm @ P
        H = nxt
    return np.transpose(np.array(H), (1, 0, 2)).reshape(M, -1)


def parseval_fb(rng, M, d, L=None, degree=0):
    """Random Parseval filterbank (needs ``M >= d``), minimal length by default."""
    return Filterbank.create(paraunitary_kernels(rng, M, d, degree), d, L)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance(request):
    """``acceptance(number, ok, detail)`` prints and records one summary line per criterion."""
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def record(number, ok, detail):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
