import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from crosslearn.presets import preset, run_batch  # noqa: E402

# criterion number -> (PASS/FAIL, detail), filled in by the acceptance tests
VERDICTS = {}


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(VERDICTS):
        status, detail = VERDICTS[number]
        terminalreporter.write_line(f"criterion {number}: {status}  {detail}")


class PresetRuns:
    """Preset results keyed by (name, seed), each run at most once per session."""

    def __init__(self):
        self.results = {}
        self.seconds = {}

    def get(self, name, seed=0):
        key = (name, seed)
        if key not in self.results:
            start = time.perf_counter()
            specs = preset(name, seed=seed)
            runs = run_batch(specs, record_decisions=True)
            self.results[key] = {s.label: r for s, r in zip(specs, runs)}
            self.seconds[key] = time.perf_counter() - start
        return self.results[key]

    def elapsed(self, name, seeds=(0,)):
        return sum(self.seconds[(name, s)] for s in seeds)


@pytest.fixture(scope="session")
def preset_runs():
    return PresetRuns()
