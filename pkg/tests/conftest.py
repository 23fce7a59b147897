import os

from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], max_examples=40
)
settings.register_profile("ci", parent=settings.get_profile("default"), max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# criterion number -> passed?; filled by tests/test_acceptance.py
ACCEPTANCE: dict[int, bool] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    for mark in report.keywords:
        if mark.startswith("criterion_"):
            n = int(mark.split("_")[1])
            ok = report.passed
            ACCEPTANCE[n] = ACCEPTANCE.get(n, True) and ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ACCEPTANCE[n] else 'FAIL'}")


def pytest_configure(config):
    for n in range(1, 11):
        config.addinivalue_line("markers", f"criterion_{n}: acceptance criterion {n}")
