import os

from hypothesis import HealthCheck, settings

settings.register_profile("dtjoyce", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("stress", deadline=None, max_examples=1000,
                          suppress_health_check=list(HealthCheck))
settings.load_profile(os.environ.get("DTJOYCE_HYPOTHESIS", "dtjoyce"))

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
