from hypothesis import settings

from report import RESULTS

settings.register_profile("default", deadline=None)
settings.load_profile("default")


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS, key=lambda k: int(k.split()[-1])):
        ok, detail = RESULTS[key]
        terminalreporter.write_line(f"{key}: {'PASS' if ok else 'FAIL'} | {detail}")
