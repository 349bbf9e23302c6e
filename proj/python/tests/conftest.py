import os
from pathlib import Path

import pytest


def pytest_addoption(parser):
    parser.addoption("--fixtures-dir", default=str(Path(__file__).resolve().parents[2] / "tests" / "fixtures"))


@pytest.fixture
def fixtures_dir(request):
    return Path(request.config.getoption("--fixtures-dir"))


@pytest.fixture
def sgak_cli():
    path = os.environ.get("SGAK_CLI")
    if not path or not Path(path).exists():
        pytest.skip("SGAK_CLI not set; parity check needs the command-line tool")
    return path
