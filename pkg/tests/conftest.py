import numpy as np
import pytest

from lrwpan_sdr.frame import build_mpdu
from lrwpan_sdr.phy import PhyConfig, PulseShape


def random_psdu(rng: np.random.Generator, length: int) -> bytes:
    """Random PSDU of ``length`` octets; from two octets up it ends in a valid FCS."""
    if length < 2:
        return rng.integers(0, 256, length, dtype=np.uint8).tobytes()
    return build_mpdu(rng.integers(0, 256, length - 2, dtype=np.uint8).tobytes())


CONFIG_MATRIX = [
    PhyConfig(chips_per_symbol=sf, pulse=pulse, rolloff=0.5)
    for sf in (8, 16, 32, 64)
    for pulse in (PulseShape.HALF_SINE, PulseShape.RECT, PulseShape.RAISED_COSINE)
]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance reporting ------------------------------------------------------

_CRITERIA: dict[int, tuple[str, str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or not (report.when == "call" or report.failed):
        return
    number, title = marker.args
    detail = "; ".join(str(v) for k, v in report.user_properties if k == "measured")
    status = "PASS" if report.passed else "FAIL"
    if number not in _CRITERIA or status == "FAIL":
        _CRITERIA[number] = (status, title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        status, title, detail = _CRITERIA[number]
        line = f"ACCEPTANCE C{number:02d} {status}  {title}"
        terminalreporter.write_line(f"{line}  [{detail}]" if detail else line)
