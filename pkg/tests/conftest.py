import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from hetcop import bicop  # noqa: E402


def random_copula(family, rng):
    if family == "gaussian":
        return bicop.Gaussian(rng.uniform(-0.9, 0.9))
    if family == "t":
        return bicop.StudentT(rng.uniform(0.05, 0.9), rng.uniform(2.5, 35))
    if family == "gumbel":
        return bicop.Gumbel(rng.uniform(0.05, 0.8))
    if family == "convex_gumbel":
        return bicop.ConvexGumbel(rng.uniform(0.05, 0.8), rng.uniform(0.05, 0.95))
    if family == "mixture_t":
        return bicop.mixture_t(rng.uniform(0.1, 0.9), rng.uniform(0.05, 0.9), rng.uniform(2.5, 35),
                               rng.uniform(0.05, 0.9), rng.uniform(2.5, 35))
    if family == "mixture_cg":
        return bicop.mixture_cg(rng.uniform(0.1, 0.9), rng.uniform(0.05, 0.8), rng.uniform(0.05, 0.95),
                                rng.uniform(0.05, 0.8), rng.uniform(0.05, 0.95))
    raise KeyError(family)


FAMILIES = ["gaussian", "t", "gumbel", "convex_gumbel", "mixture_t", "mixture_cg"]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one verdict line per acceptance criterion, echoed in the terminal summary
VERDICTS = []


@pytest.fixture
def verdict():
    def record(number, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} criterion {number:>2}: {detail}"
        VERDICTS.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(VERDICTS, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
