from functools import lru_cache

import numpy as np
import pytest
from hypothesis import settings

from ssolab.dynamics.assemble import assemble
from ssolab.netmodel.initialize import initialize_states
from ssolab.netmodel.powerflow import run_power_flow
from ssolab.netmodel.system import load_case
from ssolab.smallsignal.sweep import build_linear

settings.register_profile("ssolab", deadline=None, max_examples=200)
settings.load_profile("ssolab")


@lru_cache(maxsize=None)
def case(n, framework="SPC", tau=None):
    spec = load_case(n, framework)
    return spec if tau is None else spec.with_tau(tau)


@lru_cache(maxsize=None)
def power_flow(n):
    return run_power_flow(case(n))


@lru_cache(maxsize=None)
def built(n, framework="SPC", tau=None, with_delay=True):
    """(model bound to its operating point, operating point) for a bundled case."""
    spec = case(n, framework, tau)
    pf = power_flow(n)
    model = assemble(spec, pf, with_delay=with_delay)
    op = initialize_states(spec, pf, model=model)
    return model.bind(op), op


@lru_cache(maxsize=None)
def linear(n, framework="SPC", tau=0.002, pade_order=2):
    return build_linear(case(n, framework), tau, pade_order, power_flow(n))[0]


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = [] if mod is None else [mod.RESULTS[k] for k in sorted(mod.RESULTS, key=str)]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
