import os

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def write(tmp_path):
    """Write text to a file under tmp_path and return its path."""

    def _write(name, text):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return p

    return _write


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory):
    from partisan_exposure.synth import make_fixture

    return make_fixture(tmp_path_factory.mktemp("fixture"), seed=7)


@pytest.fixture(scope="session")
def fixture_run(fixture_dir, tmp_path_factory):
    from partisan_exposure.config import load_config
    from partisan_exposure.pipeline import run_pipeline

    out = tmp_path_factory.mktemp("run")
    run_pipeline(load_config(fixture_dir / "config.ini"), out)
    return out


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
