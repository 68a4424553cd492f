"""Print one PASS/FAIL line per acceptance criterion at the end of the run."""

_criteria = {}


def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    num, title = crit
    ok = _criteria.get(num, (title, True, ""))[1]
    if report.when == "call" or report.failed:
        ok = ok and report.passed
    detail = dict(report.user_properties).get("measured", "")
    _criteria[num] = (title, ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        title, ok, detail = _criteria[num]
        line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
