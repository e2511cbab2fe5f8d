import pytest

_acceptance = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if item.module.__name__.endswith("test_acceptance") and (rep.when == "call" or rep.failed):
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        _acceptance.append((item.name, "PASS" if rep.passed else "FAIL", doc))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    seen = {}
    for name, status, doc in _acceptance:
        if seen.get(name) != "FAIL":
            seen[name] = status
    for name, status, doc in _acceptance:
        if name in seen:
            terminalreporter.write_line(f"{seen.pop(name)}  {doc}")
