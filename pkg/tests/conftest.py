import os
import sys

sys.path.insert(0, os.path.dirname(__file__))


def pytest_terminal_summary(terminalreporter):
    import acceptance_lib

    if not acceptance_lib.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(acceptance_lib.RESULTS):
        ok, elapsed, summary = acceptance_lib.RESULTS[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'} ({elapsed:.2f}s) {summary}")
