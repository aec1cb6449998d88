import json
from pathlib import Path

import pytest

FROZEN = Path(__file__).parent / "oracles" / "frozen.json"


@pytest.fixture(scope="session")
def frozen():
    return json.loads(FROZEN.read_text())


def cplx(v):
    return complex(v[0], v[1])
