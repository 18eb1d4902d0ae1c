import numpy as np
import pytest
from hypothesis import settings


from sotrack.geometry import BoundingBox, Frame

# wall-clock deadlines flake on loaded machines; examples are bounded by size instead
settings.register_profile("default", deadline=None)
settings.load_profile("default")

_CRITERIA: dict[int, tuple[str, list[str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call"):
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(number, (title, []))
    if report.when == "call" or report.outcome != "passed":
        entry[1].append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, outcomes = _CRITERIA[number]
        verdict = "PASS" if outcomes and all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2}: {verdict}  {title}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def noise_frame(rng, width=96, height=80, index=0) -> Frame:
    return Frame(index, rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8))


def flat_frame(value=128, width=64, height=48, index=0) -> Frame:
    return Frame(index, np.full((height, width, 3), value, dtype=np.uint8))


def box(cx, cy, w, h) -> BoundingBox:
    return BoundingBox(cx, cy, w, h)
