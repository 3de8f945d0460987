import random

import pytest
from hypothesis import strategies as st

from vecgp.evaluation import make_grid, square_grid
from vecgp.expr import Constant, Function, Variable, pagie_primitives
from vecgp.generate import gen_full, gen_grow


@pytest.fixture(scope="session")
def ps():
    return pagie_primitives()


@pytest.fixture(scope="session")
def grid64():
    return square_grid(64)


@pytest.fixture(scope="session")
def grid3():
    return make_grid([(-1.0, 1.0, 3), (-1.0, 1.0, 3)])


def random_trees(n, seed=0, max_depth=10):
    """Mixed full/grow trees with depths spread over 0..max_depth."""
    ps = pagie_primitives()
    rng = random.Random(seed)
    out = []
    for i in range(n):
        d = rng.randint(0, max_depth)
        out.append(gen_full(d, ps, rng) if i % 2 else gen_grow(d, ps, rng))
    return out


# Hypothesis strategy independent of the library's own generators.  It also
# produces awkward constants (0.0, -0.0, huge and tiny magnitudes).
_constants = st.one_of(
    st.sampled_from([0.0, -0.0, 1.0, -1.0, 1e-300, 1e300, -1e300, 700.0, 1e-5]),
    st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False),
).map(Constant)

_terminals = st.one_of(st.integers(0, 1).map(Variable), _constants)


def _extend(children):
    unary = st.tuples(st.sampled_from(["sin", "cos", "exp", "plog"]), st.lists(children, min_size=1, max_size=1))
    binary = st.tuples(st.sampled_from(["add", "sub", "mul", "pdiv"]), st.lists(children, min_size=2, max_size=2))
    return st.one_of(unary, binary).map(lambda t: Function(t[0], tuple(t[1])))


exprs = st.recursive(_terminals, _extend, max_leaves=40)


# --- acceptance summary -------------------------------------------------

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call" and not report.failed:
        return
    n = marker.args[0]
    detail = dict(item.user_properties).get("detail", "")
    status = "PASS" if report.passed else "FAIL"
    if report.failed or n not in _criteria:
        _criteria[n] = (status, detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        status, detail = _criteria[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {detail}")
