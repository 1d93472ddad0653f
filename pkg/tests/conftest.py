import random
from pathlib import Path

import pytest

from bimodal.machines import parse_machine

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
GOLDEN = Path(__file__).resolve().parent / "golden"


def load_corpus():
    return {p.stem: parse_machine(p.read_text(), p.stem) for p in sorted(CORPUS.glob("*.cm"))}


@pytest.fixture(scope="session")
def corpus():
    return load_corpus()


@pytest.fixture
def rng():
    return random.Random(0)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
