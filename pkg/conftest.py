# conftest.py
import os
import shutil
from datetime import datetime

import pytest

from src.config import load_config


def pytest_addoption(parser):
    """
    Registers custom command-line options for pytest.
    """
    parser.addoption(
        "--zak-resolution",
        action="store",
        type=int,
        default=128,
        help="Nodes per axis for Zak-transform tests"
    )
    parser.addoption(
        "--column-radius",
        action="store",
        type=int,
        default=64,
        help="Largest truncation radius used by the column-sum tests"
    )
    parser.addoption(
        "--skip-slow",
        action="store_true",
        default=False,
        help="Skip tests marked slow"
    )


def pytest_collection_modifyitems(config, items):
    if not config.getoption("--skip-slow"):
        return
    skip_slow = pytest.mark.skip(reason="--skip-slow given")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session", autouse=True)
def session_cleanup(request):
    """
    Empties --basetemp once per run; xdist workers leave it alone.
    """
    basetemp = request.config.getoption("basetemp", None)
    if basetemp and not hasattr(request.config, "workerinput"):
        print(f"\nINFO: Resetting basetemp directory: {basetemp}")
        shutil.rmtree(basetemp, ignore_errors=True)
        os.makedirs(basetemp, exist_ok=True)
    yield


@pytest.fixture(scope="session", autouse=True)
def allure_environment(request, session_cleanup):
    """
    Writes environment.properties for the allure report.
    """
    allure_results_dir = request.config.getoption("--alluredir", None) or "allure-results"
    os.makedirs(allure_results_dir, exist_ok=True)

    env_file = os.path.join(allure_results_dir, "environment.properties")
    run_timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
    with open(env_file, "w") as f:
        f.write(f"Test.Run.Timestamp={run_timestamp}\n")
        f.write("Test.Type=Gabor systems at critical density\n")
        f.write(f"Zak.Resolution={request.config.getoption('--zak-resolution')}\n")
        f.write(f"Column.Radius={request.config.getoption('--column-radius')}\n")

    yield


@pytest.fixture(scope="session")
def run_config(request):
    """Package configuration with the test-size overrides from the command line."""
    return load_config({
        "zak_resolution": request.config.getoption("--zak-resolution"),
        "column_radius": request.config.getoption("--column-radius"),
    })


@pytest.fixture(scope="session")
def partner_cfg(run_config):
    from src.partner import PartnerConfig
    return PartnerConfig.from_config(run_config)


@pytest.fixture
def zak_resolution(request):
    return request.config.getoption("--zak-resolution")


@pytest.fixture
def column_radius(request):
    return request.config.getoption("--column-radius")
