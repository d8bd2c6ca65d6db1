from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from acimselect import catalog
from acimselect.errors import ValidationError
from acimselect.measures import PiecewiseConstantDensity, cdf_from_density, identity_cdf
from acimselect.randmaps import ProbabilityWeighting, RandomMap
from acimselect.transfer import (
    InvarianceReport,
    cdf_pushforward,
    check_invariance,
    fp_apply,
    fp_apply_random,
    pushforward_values,
)

from conftest import fp_oracle


def test_remark_map_preserves_lebesgue_exactly():
    u = PiecewiseConstantDensity.uniform()
    assert fp_apply(catalog.get("ex2.1/remark"), u).equals(u)


def test_fp_apply_matches_direct_sum(generic_ys):
    f = catalog.get("ex2.1/f2")
    for mid in ("ex2.1/tau1", "ex2.1/tau2", "sec6/tau1"):
        m = catalog.get(mid)
        Pf = fp_apply(m, f)
        assert np.max(np.abs(np.asarray(Pf(generic_ys), dtype=float) - fp_oracle(m, f, generic_ys))) < 1e-13


def test_fp_apply_conserves_mass():
    f = catalog.get("ex2.1/f1")
    for mid in ("ex2.1/tau2", "sec6/tau1", "sec6/tau2", "tent"):
        assert fp_apply(catalog.get(mid), f).integral() == 1


def test_lebesgue_is_not_invariant_for_lower_map():
    Pu = fp_apply(catalog.get("ex2.1/tau1"), PiecewiseConstantDensity.uniform())
    # y in (0,1/2) is reached only by the two slope-4/3 branches: 3/4 + 3/4
    assert Pu(Fr(1, 4)) == Fr(3, 2)
    # y in (1/2,1) also picks up the two slope-4 branches
    assert Pu(Fr(3, 4)) == Fr(1, 2)


def test_check_invariance_exact_and_grid():
    rep = check_invariance(catalog.get("ex2.1/tau1"), cdf_from_density(catalog.get("ex2.1/f1")))
    assert rep.exact and rep.sup_error == 0
    rep = check_invariance(catalog.get("sec4/tau1"), catalog.get("sec4/phi1"), grid=4097)
    assert not rep.exact and rep.sup_error < 1e-10
    rep = check_invariance(catalog.get("ex2.1/tau1"), identity_cdf())
    assert rep.sup_error > 0.1


def test_pushforward_of_identity_under_tent():
    xs = np.linspace(0, 1, 101)
    assert np.max(np.abs(pushforward_values(catalog.get("tent"), identity_cdf(), xs) - xs)) < 1e-15
    phi2 = catalog.get("sec4/phi2")
    assert np.max(np.abs(pushforward_values(catalog.get("sec4/tau2"), phi2, xs) - phi2(xs))) < 1e-10
    # the tabulated form interpolates linearly, so it is only grid-accurate between nodes
    G = cdf_pushforward(catalog.get("sec4/tau2"), phi2, grid=2049)
    assert np.max(np.abs(G(xs) - phi2(xs))) < 1e-6


def test_report_validation():
    with pytest.raises(ValidationError):
        InvarianceReport(-1.0, 0.0, 3, False)
    with pytest.raises(ValidationError):
        InvarianceReport(0.5, 0.0, 3, True)


def test_random_transfer_with_single_map_reduces_to_fp_apply():
    m = catalog.get("ex2.1/tau2")
    rm = RandomMap((m,), ProbabilityWeighting.constant([1]))
    f = catalog.get("ex2.1/f1")
    assert fp_apply_random(rm, f).equals(fp_apply(m, f))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.fractions(min_value=Fr(1, 10), max_value=3), min_size=2, max_size=5))
def test_transfer_is_positive_and_mass_preserving(vals):
    n = len(vals)
    total = sum(vals) / n
    f = PiecewiseConstantDensity([Fr(k, n) for k in range(n + 1)], [v / total for v in vals])
    for mid in ("ex2.1/tau1", "ex2.1/remark"):
        Pf = fp_apply(catalog.get(mid), f)
        assert Pf.integral() == 1
        assert all(v >= 0 for v in Pf.values)
