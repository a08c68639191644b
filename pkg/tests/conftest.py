import os
import sys
import tempfile
from pathlib import Path

import pytest

APP_DIR = Path(__file__).resolve().parents[1] / "app"
if str(APP_DIR) not in sys.path:
    sys.path.insert(0, str(APP_DIR))

# keep test runs from writing logs/ into the working tree
os.environ.setdefault("SIF_LOG_DIR", tempfile.mkdtemp(prefix="sif-test-logs-"))
os.environ.setdefault("SIF_LOG_LEVEL", "WARNING")


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="Run the full-size reproductions.")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-size reproduction, minutes of runtime")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)
