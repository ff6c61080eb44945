import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import all_dags  # noqa: E402


@pytest.fixture(scope="session")
def dags4():
    return all_dags(4)


@pytest.fixture(scope="session")
def dags5():
    return all_dags(5)


@pytest.fixture(scope="session")
def data_dir():
    import gbn

    return Path(gbn.__file__).parent / "data"
