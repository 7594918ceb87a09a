import pathlib

import pytest

from mlnrca.model import parse_model

FIXTURES = pathlib.Path(__file__).resolve().parents[1] / "src" / "mlnrca" / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> pathlib.Path:
    return FIXTURES


@pytest.fixture(scope="session")
def printer_model():
    return parse_model((FIXTURES / "printer.model").read_text())


@pytest.fixture(scope="session")
def svn_model():
    return parse_model((FIXTURES / "svn.model").read_text())


@pytest.fixture(scope="session")
def cluster_model():
    return parse_model((FIXTURES / "cluster.model").read_text())
