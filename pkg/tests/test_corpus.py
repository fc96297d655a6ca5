"""Every corpus file against the expectations in its header comments."""
import pytest

from conftest import headers
from locex.cli import main


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out.strip()


def test_solve(corpus_file, capsys):
    want = headers(corpus_file)["expect-solve"]
    code, out = _run(capsys, "solve", str(corpus_file))
    if want.startswith("exit "):
        assert code == int(want.split()[1]) and out == ""
    else:
        assert code == 0 and out == want


def test_certify(corpus_file, capsys):
    want = headers(corpus_file)["expect-certify"]
    code, out = _run(capsys, "certify", str(corpus_file))
    if want.startswith("rejected"):
        assert code == 3 and out.startswith(want + " ")
    else:
        assert code == 0 and out == want


def test_oracle(corpus_file, capsys):
    h = headers(corpus_file)
    if "expect-oracle" not in h:
        pytest.skip("outside the oracle's scope")
    grid = [f"--grid={h['grid']}"] if "grid" in h else []
    code, out = _run(capsys, "oracle", *grid, str(corpus_file))
    assert code == 0 and out == h["expect-oracle"]
