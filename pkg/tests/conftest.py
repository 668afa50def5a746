import json
import pathlib

import pytest

from csppke.f2core import SparseRowMatrix

FIXTURES = pathlib.Path(__file__).parent / "fixtures"

# Four constraints of the five-constraint running example: supports
# {1,3}, {3,4}, {1,2}, {1,4} in 1-based terms, over 4 variables with 2
# variables per constraint.
WORKED_ROWS = [[0, 2], [2, 3], [0, 1], [0, 3]]
WORKED_SECRET = (4, 2, 5, 7)


@pytest.fixture(scope="session")
def worked_matrix() -> SparseRowMatrix:
    return SparseRowMatrix(4, 4, 2, WORKED_ROWS)


@pytest.fixture(scope="session")
def desk_fixture() -> dict:
    path = FIXTURES / "desk_calibration.json"
    if not path.exists():
        pytest.fail(
            "missing tests/fixtures/desk_calibration.json; "
            "run scripts/calibrate_desk_params.py to regenerate it"
        )
    return json.loads(path.read_text())
