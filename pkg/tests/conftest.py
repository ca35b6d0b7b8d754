import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dynet_causes import RUNNING_EXAMPLE_HAZARD, running_example_text  # noqa: E402
from dynet_causes.language import load_spec  # noqa: E402
from dynet_causes.lts import build_lts  # noqa: E402


@pytest.fixture(scope="session")
def vc_text():
    return running_example_text()


@pytest.fixture(scope="session")
def vc_spec(vc_text):
    return load_spec(vc_text)


@pytest.fixture(scope="session")
def vc_lts(vc_spec):
    return build_lts(vc_spec)


@pytest.fixture(scope="session")
def vc_hazard():
    return RUNNING_EXAMPLE_HAZARD


@pytest.fixture
def vc_file(tmp_path, vc_text):
    path = tmp_path / "vc.dnk"
    path.write_text(vc_text)
    return path


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
