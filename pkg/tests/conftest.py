import contextlib
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

_ACCEPTANCE: dict[int, tuple[str, str, str]] = {}


class _Record:
    def __init__(self):
        self.detail = ""
        self.warning = ""


@pytest.fixture
def criterion():
    """Context manager recording PASS/FAIL (plus detail) for one acceptance criterion."""

    @contextlib.contextmanager
    def record(number: int, title: str):
        rec = _Record()
        try:
            yield rec
        except BaseException as exc:
            msg = str(exc).strip().splitlines()[0] if str(exc).strip() else type(exc).__name__
            _ACCEPTANCE[number] = (title, "FAIL", msg)
            raise
        status = "PASS (warning)" if rec.warning else "PASS"
        _ACCEPTANCE[number] = (title, status, "; ".join(x for x in (rec.detail, rec.warning) if x))

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number} [{title}]: {status}: {detail}")
