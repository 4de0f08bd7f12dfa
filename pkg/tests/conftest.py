import sys

import numpy as np
import pytest
from hypothesis import strategies as st
from hypothesis.extra import numpy as npst

from stroboscopic.channels import KrausFamilySpec, Model

I2 = np.eye(2, dtype=complex)
S1 = np.array([[0, 1], [1, 0]], dtype=complex)
S2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
S3 = np.array([[1, 0], [0, -1]], dtype=complex)

BUILTIN_SPECS = [
    KrausFamilySpec(Model.DEPHASING, 1.0),
    KrausFamilySpec(Model.DEPOLARIZING, 1.0),
    KrausFamilySpec(Model.ONE_PARAMETRIC, 1.0, 0.5),
]


def bloch_state(x, y, z):
    return 0.5 * (I2 + x * S1 + y * S2 + z * S3)


RHO_DEMO = bloch_state(0.3, 0.4, 0.5)


def random_hermitian(n, rng):
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return x + x.conj().T


def random_complex(n, rng, m=None):
    return rng.normal(size=(n, m or n)) + 1j * rng.normal(size=(n, m or n))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# tiny magnitudes underflow when squared; flush them to zero
_floats = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False).map(
    lambda x: 0.0 if abs(x) < 1e-100 else x
)


def complex_matrices(n):
    return st.builds(
        lambda re, im: re + 1j * im,
        npst.arrays(np.float64, (n, n), elements=_floats),
        npst.arrays(np.float64, (n, n), elements=_floats),
    )


def hermitian_matrices(n):
    return complex_matrices(n).map(lambda x: x + x.conj().T)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
