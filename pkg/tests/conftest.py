import math
from pathlib import Path

import pytest

from projdyn import GeneratorSet, Matrix

DATA = Path(__file__).resolve().parent.parent / "src" / "projdyn" / "data"

# closed forms used as oracles throughout
LAMBDA_A = (3 + math.sqrt(5)) / 2
LAMBDA_B = 2 + math.sqrt(3)
LOG_LAMBDA_A = math.log(LAMBDA_A)
LOG_LAMBDA_B = math.log(LAMBDA_B)
SLOPE_A = (math.sqrt(5) - 1) / 2
SLOPE_B = (math.sqrt(3) - 1) / 2
# largest singular value of b: sqrt((15 + sqrt(221)) / 2)
NORM_B = math.sqrt((15 + math.sqrt(221)) / 2)

A = Matrix([[2, 1], [1, 1]])
B = Matrix([[3, 2], [1, 1]])
ROT = Matrix([[0, -1], [1, 0]])


@pytest.fixture
def S():
    return GeneratorSet([A, B], "ab")


@pytest.fixture
def S_a():
    return GeneratorSet([A], "a")


@pytest.fixture
def S_rot():
    return GeneratorSet([ROT], "r")


@pytest.fixture
def gens_file():
    return DATA / "two_matrices.gens"


@pytest.fixture
def rotation_file():
    return DATA / "rotation.gens"


# criterion number -> (title, passed, detail), filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line("criterion %2d %s  %s: %s" % (n, "PASS" if ok else "FAIL",
                                                                 title, detail))
