import itertools

import numpy as np
import pytest

from rmdecode.rm_core import codebook, make_code

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def brute_force_ml(llrs, code):
    """Maximum-correlation decoding against the full codebook."""
    words = codebook(code)
    bipolar = 1.0 - 2.0 * words
    return words[np.argmax(np.atleast_2d(llrs) @ bipolar.T, axis=1)]


def first_order_words(m):
    """All 2^(m+1) first-order codewords, enumerated directly from affine functions."""
    n = 1 << m
    out = []
    for coeffs in itertools.product((0, 1), repeat=m + 1):
        word = [(coeffs[0] + sum(coeffs[1 + i] * ((z >> i) & 1) for i in range(m))) % 2 for z in range(n)]
        out.append(word)
    return np.array(out, dtype=np.uint8)


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


@pytest.fixture(params=[(2, 1), (3, 1), (3, 2), (4, 2), (4, 1), (5, 2)])
def small_code(request):
    return make_code(*request.param)


def boxplus_reference(a: float, b: float) -> float:
    """2 atanh(tanh(a/2) tanh(b/2)) at 50 digits, immune to cancellation near |t| -> 1."""
    import mpmath

    with mpmath.workdps(50):
        t = mpmath.tanh(mpmath.mpf(a) / 2) * mpmath.tanh(mpmath.mpf(b) / 2)
        return float(2 * mpmath.atanh(t))
