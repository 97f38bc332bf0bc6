import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_raw_model(rng, sizes, scale=1.0):
    from hdmr_adp.hdmr import GridDomain, HdmrModel

    dom = GridDomain(sizes)
    first = tuple(scale * rng.standard_normal(s) for s in sizes)
    second = {(m, n): scale * rng.standard_normal((sizes[m], sizes[n])) for m, n in dom.pairs()}
    return HdmrModel(dom, float(rng.standard_normal()), first, second)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
