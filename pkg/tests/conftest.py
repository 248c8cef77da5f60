import pytest

# criterion number -> (passed, summary); filled by the acceptance suite
ACCEPTANCE = {}


@pytest.fixture
def criterion():
    def record(k, title, checks):
        """``checks`` maps a sub-check label to ``(ok, detail)``."""
        ok = all(c[0] for c in checks.values())
        detail = "; ".join(f"{name}: {'ok' if c[0] else 'FAILED'} ({c[1]})" for name, c in checks.items())
        ACCEPTANCE[k] = (ok, f"{title} | {detail}")
        failed = [name for name, c in checks.items() if not c[0]]
        assert not failed, f"criterion {k} failed sub-checks: {failed}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[k]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {k}: {text}")
