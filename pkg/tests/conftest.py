import os
from contextlib import contextmanager

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", parent=settings.get_profile("default"), max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# criterion number -> (title, [(row label, passed, detail)])
CRITERIA: dict[int, tuple[str, list]] = {}


@contextmanager
def criterion_row(number: int, title: str, label: str):
    """Record one checked row of an acceptance criterion and print its outcome."""
    rows = CRITERIA.setdefault(number, (title, []))[1]
    try:
        yield
    except BaseException as exc:
        detail = f"{type(exc).__name__}: {exc}".splitlines()[0][:160]
        rows.append((label, False, detail))
        print(f"criterion {number} [{label}]: FAIL - {detail}")
        raise
    rows.append((label, True, ""))
    print(f"criterion {number} [{label}]: PASS")


@pytest.fixture
def criterion():
    return criterion_row


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(CRITERIA):
        title, rows = CRITERIA[number]
        failed = [r for r in rows if not r[1]]
        verdict = "PASS" if not failed else "FAIL"
        line = f"criterion {number:>2} {verdict}  {title} ({len(rows) - len(failed)}/{len(rows)} rows)"
        if failed:
            line += "; failing: " + "; ".join(f"{label}: {detail}" for label, _, detail in failed)
        tr.write_line(line)
