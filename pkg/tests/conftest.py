import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

# every Born law produced anywhere in the run, for the no-signalling criterion
BORN_LAWS = []
ACCEPTANCE_LINES = []


def pytest_configure(config):
    import bellstrength
    import bellstrength.cli
    import bellstrength.quantum
    import bellstrength.strength

    original = bellstrength.quantum.born_law

    def recording_born_law(*args, **kwargs):
        law = original(*args, **kwargs)
        BORN_LAWS.append(law)
        return law

    recording_born_law.__wrapped__ = original
    for module in (bellstrength, bellstrength.quantum, bellstrength.strength, bellstrength.cli):
        module.born_law = recording_born_law
    config.addinivalue_line("markers", "run_last: run after every other test")


def pytest_collection_modifyitems(items):
    last = [it for it in items if it.get_closest_marker("run_last")]
    items[:] = [it for it in items if not it.get_closest_marker("run_last")] + last


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def record():
    """Print and keep one pass/fail line per acceptance criterion."""

    def _record(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        return passed

    return _record
