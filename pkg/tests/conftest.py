from functools import lru_cache

import pytest

from miopbd.families import FAMILY_IDS, FINITE, SEMI_INFINITE, preset
from miopbd.miop import IndexSet, MultiIndexedSystem

INDEX_SETS = ["", "1", "2", "1,2", "1,3"]
DEFORMED = ["1", "2", "1,2", "1,3"]
BD_FAMILIES = [f for f in FAMILY_IDS if f != "qM"]


@lru_cache(maxsize=None)
def system(fid: str, D: str = "") -> MultiIndexedSystem:
    d = IndexSet.parse(D)
    return MultiIndexedSystem(preset(fid, d.dmax), d)


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def report_criterion(tag: str, ok: bool, detail: str) -> None:
    line = f"{tag} {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[0][2:])):
            terminalreporter.write_line(line)


@pytest.fixture
def hahn2():
    return system("H", "2")


__all__ = ["system", "report_criterion", "INDEX_SETS", "DEFORMED", "BD_FAMILIES", "FAMILY_IDS", "FINITE", "SEMI_INFINITE"]
