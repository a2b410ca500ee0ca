def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per acceptance criterion, after the normal report."""
    rows = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            props = dict(rep.user_properties)
            if rep.when == "call" and "criterion" in props:
                rows.append((props["criterion"], rep.passed, props.get("detail", "")))
    if rows:
        terminalreporter.section("acceptance criteria")
        for name, ok, detail in sorted(rows):
            terminalreporter.write_line(f"{name}: {'PASS' if ok else 'FAIL'}  {detail}")
