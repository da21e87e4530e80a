import numpy as np
import pytest
from hypothesis import strategies as st

from votewelfare import ObservedDataset, Population, SummaryStatistics
from votewelfare.model import FAMILY_PARAMS, FamilySpec

unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
open_unit = st.floats(min_value=1e-6, max_value=1.0 - 1e-6, allow_nan=False)
weights = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)


@st.composite
def summaries(draw):
    """SummaryStatistics built from (p, cond means) so the total-expectation identity holds to rounding."""
    p = draw(st.one_of(unit, st.sampled_from([0.0, 1.0, 0.5])))
    cb = draw(unit)
    ca = draw(unit)
    mean = cb * p + ca * (1.0 - p)
    return SummaryStatistics(min(1.0, mean), p, cb, ca)


@st.composite
def populations(draw, max_size=30):
    n = draw(st.integers(1, max_size))
    pairs = draw(
        st.lists(st.tuples(unit, unit, weights), min_size=n, max_size=n).filter(
            lambda rows: all(a != b for a, b, _ in rows)
        )
    )
    a, b, w = zip(*pairs)
    return Population(a, b, w)


@st.composite
def observed_datasets(draw, max_size=30):
    n = draw(st.integers(1, max_size))
    rows = draw(st.lists(st.tuples(open_unit, st.booleans(), weights), min_size=n, max_size=n))
    a, v, w = zip(*rows)
    return ObservedDataset(a, v, w)


def random_family(rng: np.random.Generator, size: int) -> FamilySpec:
    kind = list(FAMILY_PARAMS)[rng.integers(len(FAMILY_PARAMS))]
    params = {name: float(rng.random()) for name in FAMILY_PARAMS[kind]}
    if kind == "two-block":
        while params["a1"] == params["b1"] or params["a2"] == params["b2"]:
            params = {name: float(rng.random()) for name in FAMILY_PARAMS[kind]}
    return FamilySpec(kind, params, size)


def random_summary(rng: np.random.Generator) -> SummaryStatistics:
    p = float(rng.choice([rng.random(), 0.0, 1.0], p=[0.9, 0.05, 0.05]))
    cb, ca = float(rng.random()), float(rng.random())
    return SummaryStatistics(min(1.0, cb * p + ca * (1.0 - p)), p, cb, ca)


def tied_summary(rng: np.random.Generator) -> SummaryStatistics:
    """Summary with vote share exactly equal to E[u(A)]."""
    while True:
        p = float(rng.uniform(0.01, 0.99))
        cb = float(rng.random())
        ca = p * (1.0 - cb) / (1.0 - p)
        if ca <= 1.0:
            return SummaryStatistics(p, p, cb, ca)


@pytest.fixture
def rng():
    return np.random.default_rng(20241216)


# Acceptance reporting: tests marked ``criterion(n, text)`` get one summary line each.

_CRITERIA: dict[int, tuple[str, str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, text = marker.args
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        detail = getattr(item, "acceptance_detail", "")
        _CRITERIA[number] = ("PASS" if rep.passed else "FAIL", text, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        status, text, detail = _CRITERIA[number]
        line = f"[{status}] criterion {number:>2}: {text}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
