from __future__ import annotations

# criterion id -> list of (check name, passed, detail), filled by test_acceptance
ACCEPTANCE: dict[int, list] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[cid]
        ok = all(p for _, p, _ in checks)
        tr.write_line(f"criterion {cid}: {'PASS' if ok else 'FAIL'}")
        for name, p, detail in checks:
            tr.write_line(f"    {'pass' if p else 'FAIL'}  {name}: {detail}")
