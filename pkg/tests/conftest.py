import sys

import numpy as np
import pytest

from swarmlab.rng import RngStream


class ScriptedStream(RngStream):
    """Stream that replays fixed values, then 0.5 forever."""

    def __init__(self, values):
        super().__init__(0)
        self.values = list(values)
        self.consumed = 0

    def uniform(self, k):
        out = np.full(k, 0.5)
        take = self.values[:k]
        out[: len(take)] = take
        self.values = self.values[k:]
        self.consumed += k
        return out


@pytest.fixture
def scripted():
    return ScriptedStream


def pytest_terminal_summary(terminalreporter):
    # pytest may import the module under either name; collect from whichever is loaded
    RESULTS = [line for name, mod in list(sys.modules.items())
               if name.rsplit(".", 1)[-1] == "test_acceptance"
               for line in getattr(mod, "RESULTS", [])]
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
