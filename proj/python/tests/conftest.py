import os
import pathlib

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]
DATA = pathlib.Path(os.environ.get("JCEDKIT_DATA_DIR", ROOT / "data"))


@pytest.fixture(scope="session")
def six_bus_path():
    return DATA / "cases" / "six_bus.json"


@pytest.fixture(scope="session")
def cli():
    exe = os.environ.get("JCEDKIT_CLI")
    if not exe:
        exe = str(ROOT / "build" / "tools" / "jcedkit")
    if not pathlib.Path(exe).exists():
        pytest.skip("jcedkit CLI not built")
    return exe
