import functools
import io
from contextlib import redirect_stdout

import numpy as np
import pytest

from mslevy.cli import main


def run_cli(*argv):
    """(exit code, stdout text) of one in-process invocation."""
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main([str(a) for a in argv])
    return code, buf.getvalue()


def parse_csv(text):
    """(manifest dict, column names, float array) of a CLI CSV."""
    meta, rows, names = {}, [], None
    for line in text.splitlines():
        if line.startswith("#"):
            k, _, v = line[1:].strip().partition("=")
            meta[k] = v
        elif names is None:
            names = line.split(",")
        else:
            rows.append([float(v) for v in line.split(",")])
    return meta, names, np.array(rows)


@functools.lru_cache(maxsize=None)
def _figure(name):
    code, text = run_cli("kernel", "--figure", name)
    assert code == 0
    return text


@pytest.fixture(scope="session")
def figure_csv():
    return _figure


ACCEPTANCE_LINES = {}


def record_acceptance(number, ok, detail):
    """Store the one-line verdict of an acceptance criterion for the run summary."""
    line = f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
