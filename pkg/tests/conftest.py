import shlex
import shutil
import subprocess
from pathlib import Path

import pytest

from lolac import analyze, load_spec
from lolac.corpus import ALL, source
from lolac.harness import toolchain_template

HAVE_TOOLCHAIN = shutil.which(shlex.split(toolchain_template())[0]) is not None
needs_toolchain = pytest.mark.skipif(not HAVE_TOOLCHAIN, reason="target toolchain not installed")


@pytest.fixture(scope="session")
def corpus_specs():
    """name -> (TypedSpec, AnalysisReport) for every bundled spec."""
    out = {}
    for name in ALL:
        spec = load_spec(source(name))
        out[name] = (spec, analyze(spec))
    return out


@pytest.fixture
def compile_and_run(tmp_path):
    """Build generated source and run it on CSV text; returns CompletedProcess."""
    from lolac.harness import build_monitor

    counter = iter(range(1000))

    def run(source_text, stdin_text, *args):
        binary = build_monitor(source_text, tmp_path, f"m{next(counter)}")
        return subprocess.run([str(binary), *args], input=stdin_text, capture_output=True, text=True)

    return run


GOLDEN = Path(__file__).parent / "golden"


ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance verdict: criterion(number, passed, detail)."""

    def record(number: int, passed: bool, detail: str) -> bool:
        request.config.stash[ACCEPTANCE].append((number, passed, detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = sorted(config.stash.get(ACCEPTANCE, []), key=lambda r: r[0])
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in results:
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
