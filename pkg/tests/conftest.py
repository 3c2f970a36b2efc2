import time
from contextlib import contextmanager

import pytest

# acceptance outcomes, printed once at the end of the run
_ACCEPTANCE: dict[int, str] = {}


class _Criterion:
    def __init__(self, number: int, title: str, budget: float):
        self.number, self.title, self.budget = number, title, budget
        self.details: list[str] = []

    def note(self, text: str) -> None:
        self.details.append(text)

    def line(self, ok: bool, elapsed: float, why: str = "") -> str:
        parts = [f"criterion {self.number:2d} {'PASS' if ok else 'FAIL'}", self.title,
                 f"{elapsed:.2f}s/{self.budget:g}s", *self.details]
        if why:
            parts.append(why)
        return " | ".join(parts)


@pytest.fixture
def criterion():
    """Context manager that times a criterion body and records a PASS/FAIL line."""

    @contextmanager
    def run(number: int, title: str, budget: float):
        c = _Criterion(number, title, budget)
        t0 = time.perf_counter()
        try:
            yield c
        except BaseException as exc:
            _ACCEPTANCE[number] = c.line(False, time.perf_counter() - t0, f"{type(exc).__name__}: {exc}".splitlines()[0])
            print(_ACCEPTANCE[number])
            raise
        elapsed = time.perf_counter() - t0
        ok = elapsed < budget
        _ACCEPTANCE[number] = c.line(ok, elapsed, "" if ok else "over runtime budget")
        print(_ACCEPTANCE[number])
        assert ok, f"criterion {number} took {elapsed:.2f}s, budget {budget}s"

    return run


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[k])
