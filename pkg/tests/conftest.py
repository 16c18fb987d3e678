import pytest

_RESULTS: dict = {}


@pytest.fixture
def record():
    """Record one part of an acceptance criterion and return whether it holds."""

    def _record(criterion: int, part: str, ok: bool, detail: str = "") -> bool:
        ok = bool(ok)
        _RESULTS.setdefault(criterion, []).append((part, ok, detail))
        print(f"criterion {criterion} [{part}]: {'PASS' if ok else 'FAIL'} {detail}")
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(_RESULTS):
        parts = _RESULTS[c]
        failed = [f"{p} ({d})" if d else p for p, ok, d in parts if not ok]
        line = f"criterion {c}: {'FAIL' if failed else 'PASS'} ({len(parts) - len(failed)}/{len(parts)} parts)"
        terminalreporter.write_line(line)
        for f in failed:
            terminalreporter.write_line(f"    failed: {f}")
