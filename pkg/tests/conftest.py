from fractions import Fraction as Fr

import numpy as np
import pytest

from acimselect import catalog


def fp_oracle(m, f, ys):
    """Transfer operator by direct preimage summation in floats, independent of ``fp_apply``."""
    out = np.zeros(len(ys))
    for j, y in enumerate(ys):
        for br in m.branches:
            lo, hi = (float(v) for v in br.image)
            if lo <= y <= hi:
                s = float(br.form.slope)
                x = (y - float(br.form.intercept)) / s
                out[j] += float(f(x)) / abs(s)
    return out


@pytest.fixture
def ex21():
    return catalog.get("ex2.1/tau1"), catalog.get("ex2.1/tau2")


@pytest.fixture
def generic_ys():
    # irrational offsets keep sample points away from rational knots
    return (np.arange(200) + np.sqrt(2) - 1) / 200


HALF = Fr(1, 2)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.LINES:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.LINES:
            terminalreporter.write_line(line)
