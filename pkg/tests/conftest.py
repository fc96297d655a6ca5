import sys
from pathlib import Path

import pytest

HERE = Path(__file__).parent
sys.path.insert(0, str(HERE))

CORPUS = HERE / "corpus"


def corpus_files() -> list[Path]:
    return sorted(CORPUS.glob("*.loc"))


def headers(path: Path) -> dict[str, str]:
    out = {}
    for line in path.read_text().splitlines():
        if line.startswith("; ") and ":" in line:
            key, _, value = line[2:].partition(":")
            out[key.strip()] = value.strip()
    return out


@pytest.fixture(params=corpus_files(), ids=lambda p: p.stem)
def corpus_file(request) -> Path:
    return request.param


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "REPORT", None):
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.REPORT):
        terminalreporter.write_line(mod.REPORT[n])
