import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from comass_lab import Covector, OptimizerConfig
from comass_lab.exterior import multi_indices

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

_LINES = pytest.StashKey[list]()


@pytest.fixture
def fast_cfg():
    return OptimizerConfig(restarts=16, max_iter=300, seed=3)


@pytest.fixture
def record_criterion(request):
    """Print and collect one PASS/FAIL line per acceptance criterion."""
    lines = request.config.stash.setdefault(_LINES, [])

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        lines.append(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)


@st.composite
def covectors(draw, n=None, p=None, min_n=1, max_n=6, integer=False):
    n = draw(st.integers(min_n, max_n)) if n is None else n
    p = draw(st.integers(0, n)) if p is None else p
    keys = multi_indices(n, p)
    chosen = draw(st.lists(st.sampled_from(keys), unique=True, max_size=min(len(keys), 6)))
    coef = st.integers(-4, 4) if integer else st.floats(-3, 3, allow_nan=False)
    return Covector(n, p, {k: draw(coef) for k in chosen})
