from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from acimselect import catalog
from acimselect.errors import ParameterError, ValidationError
from acimselect.interval_maps import validate_envelope
from acimselect.measures import PiecewiseConstantDensity, StepFunction, cdf_from_density, identity_cdf, ks_distance
from acimselect.randmaps import (
    ProbabilityWeighting,
    RandomMap,
    bgr_probabilities,
    brute_force_cex,
    evaluate_constant_weight_claim,
    random_weightings,
    simulate_orbit,
    tau21,
    two_valued_selection_search,
    verify_cex_infeasibility,
)
from acimselect.transfer import fp_apply, fp_apply_random

U = PiecewiseConstantDensity.uniform


def _ex21_bgr():
    f1, f2 = catalog.get("ex2.1/f1"), catalog.get("ex2.1/f2")
    return bgr_probabilities([f1, f2], [Fr(2, 5), Fr(3, 5)])


def test_bgr_uniform_pair():
    w = bgr_probabilities([U(), U()], [Fr(1, 2), Fr(1, 2)])
    assert w.values_on_cells() == [(Fr(1, 2), Fr(1, 2))]


def test_bgr_ex21_values_and_fixed_point():
    w = _ex21_bgr()
    # (2/5)(3/2) / 1 and (2/5)(1/2) / 1
    assert [v[0] for v in w.values_on_cells()] == [Fr(3, 5), Fr(1, 5)]
    rm = RandomMap((catalog.get("ex2.1/tau1"), catalog.get("ex2.1/tau2")), w)
    assert fp_apply_random(rm, U()).equals(U())


def test_bgr_zero_outside_support():
    w = bgr_probabilities([catalog.get("sec5/f1"), U()], [Fr(1, 2), Fr(1, 2)])
    p1 = w.functions[0]
    assert p1(Fr(1, 8)) == 0 and p1(Fr(7, 8)) == 0
    assert p1(Fr(1, 2)) == Fr(2, 3)


def test_bgr_rejects_nonpositive_constants():
    with pytest.raises(ParameterError):
        bgr_probabilities([U(), U()], [Fr(-1, 2), Fr(3, 2)])


def test_bgr_all_zero_cells_use_constant_ratio():
    f = catalog.get("sec5/f1")
    w = bgr_probabilities([f, f], [Fr(1, 4), Fr(3, 4)])
    assert w.functions[0](Fr(1, 8)) == Fr(1, 4)


@settings(max_examples=30, deadline=None)
@given(st.fractions(min_value=Fr(1, 100), max_value=Fr(99, 100)))
def test_bgr_identity_property(a1):
    """The weighted random map fixes sum a_k f_k exactly for any constants."""
    for pair in (("ex2.1/tau1", "ex2.1/tau2"), ("sec6/tau1", "sec6/tau2"), ("tent", "ex2.1/remark")):
        maps = [catalog.get(p) for p in pair]
        from acimselect.measures import markov_invariant_density

        fs = [markov_invariant_density(m) for m in maps]
        a = [a1, 1 - a1]
        w = bgr_probabilities(fs, a)
        assert all(sum(v) == 1 for v in w.values_on_cells())
        target = (a[0] * fs[0] + a[1] * fs[1]).as_density()
        assert fp_apply_random(RandomMap(maps, w), target).equals(target)


def test_weighting_validation():
    with pytest.raises(ValidationError):
        ProbabilityWeighting.constant([Fr(1, 2), Fr(1, 3)]).validate()
    with pytest.raises(ValidationError):
        RandomMap((catalog.get("tent"),), ProbabilityWeighting.constant([Fr(1, 2), Fr(1, 2)]))


def test_single_map_orbit_is_deterministic_orbit():
    m = catalog.get("ex2.1/tau2")
    xs = simulate_orbit(RandomMap((m,), ProbabilityWeighting.constant([1])), 0.123, 30, seed=3)
    x = 0.123
    for t in range(30):
        assert xs[t] == pytest.approx(x, abs=1e-12)
        x = float(m(x))


def test_orbit_reproducible():
    rm = RandomMap((catalog.get("ex2.1/tau1"), catalog.get("ex2.1/tau2")), _ex21_bgr())
    a = simulate_orbit(rm, 0.3, 1000, seed=11, noise=1e-12)
    b = simulate_orbit(rm, 0.3, 1000, seed=11, noise=1e-12)
    assert np.array_equal(a, b)
    c = simulate_orbit(rm, 0.3, 1000, seed=12, noise=1e-12)
    assert not np.array_equal(a, c)


def test_lower_only_weights_sample_f1():
    rm = RandomMap(
        (catalog.get("ex2.1/tau1"), catalog.get("ex2.1/tau2")), ProbabilityWeighting.constant([1, 0])
    )
    xs = simulate_orbit(rm, 1 / 3, 200000, seed=5, noise=1e-12)
    assert ks_distance(cdf_from_density(catalog.get("ex2.1/f1")), xs) < 0.02


def test_orbit_rejects_bad_start():
    rm = RandomMap((catalog.get("tent"),), ProbabilityWeighting.constant([1]))
    with pytest.raises(ValidationError):
        simulate_orbit(rm, 1.5, 10, seed=0)


def test_tau21_closed_form():
    m = tau21()
    assert m(0) == 0
    assert m.branches[0].slope == Fr(1, 12)
    assert m.branches[0].domain.hi == Fr(3, 20)
    for x in (Fr(1, 10), Fr(3, 20), Fr(7, 40), Fr(3, 16), Fr(39, 200), Fr(1, 5)):
        if x <= Fr(3, 20):
            want = x / 12
        elif x <= Fr(15, 80):
            want = x - Fr(11, 80)
        else:
            want = 12 * x - Fr(11, 5)
        assert m(x) == want
    lo, hi = min(m(Fr(12, 80)), m(Fr(15, 80))), max(m(Fr(12, 80)), m(Fr(15, 80)))
    assert (lo, hi) == (Fr(1, 80), Fr(4, 80))


def test_cex_constant_from_slopes():
    rep = verify_cex_infeasibility()
    assert rep.feasible is False
    c = Fr(rep.witness["constant"])
    assert c == 16 * Fr(1, 5) - 1 == Fr(11, 5)
    assert c > 1


def test_cex_control_with_equal_maps_is_degenerate():
    m = catalog.get("sec6/tau")
    rep = verify_cex_infeasibility(m, m)
    assert rep.feasible is None
    assert Fr(rep.witness["constant"]) == 0


def _lp_lower_bound(nc=400, ny=3000):
    """Smallest sup deviation from Lebesgue invariance over weightings constant on a uniform grid."""
    t1, t2 = catalog.get("sec6/tau1"), catalog.get("sec6/tau2")
    ys = (np.arange(ny) + 0.5) / ny
    A = np.zeros((ny, nc))
    b = np.zeros(ny)
    for j, y in enumerate(ys):
        for m, sign in ((t1, 1.0), (t2, -1.0)):
            for br in m.branches:
                lo, hi = (float(v) for v in br.image)
                if lo <= y <= hi:
                    s = float(br.form.slope)
                    x = (y - float(br.form.intercept)) / s
                    A[j, min(int(x * nc), nc - 1)] += sign / abs(s)
                    if sign < 0:
                        b[j] += 1 / abs(s)
    c = np.zeros(nc + 1)
    c[-1] = 1
    ones = np.ones((ny, 1))
    res = linprog(
        c,
        A_ub=np.block([[A, -ones], [-A, -ones]]),
        b_ub=np.concatenate([1 - b, b - 1]),
        bounds=[(0, 1)] * nc + [(0, None)],
        method="highs",
    )
    assert res.status == 0
    return res.fun


def test_cex_brute_force_against_lp_oracle():
    devs = brute_force_cex(100, seed=20240601)
    assert len(devs) == 100
    bound = _lp_lower_bound()
    assert bound > 0.1
    # no candidate can beat the optimum over a richer class by more than grid effects
    assert min(float(d) for d in devs) >= bound - 0.02
    assert all(d > Fr(1, 10) for d in devs)


def test_random_weightings_are_valid():
    for w in random_weightings(10, seed=1):
        w.validate()
        assert w.exact


def test_two_valued_ex21_uniform_infeasible():
    rep = two_valued_selection_search(catalog.get("ex2.1"), U())
    assert rep.feasible is False
    y = Fr(rep.witness["point"])
    contribs = [Fr(v) for v in rep.witness["available"]]
    # brute force over every subset of the available contributions
    sums = {sum(c for c, keep in zip(contribs, mask) if keep) for mask in np.ndindex(*(2,) * len(contribs))}
    assert Fr(rep.witness["target"]) not in sums
    assert 0 < y < 1


def test_two_valued_ex21_f1_feasible_with_lower_map():
    f1 = catalog.get("ex2.1/f1")
    rep = two_valued_selection_search(catalog.get("ex2.1"), f1)
    assert rep.feasible is True
    xs = [Fr(k, 97) for k in range(98)]
    assert all(rep.selection(x) == catalog.get("ex2.1/tau1")(x) for x in xs)
    assert fp_apply(rep.selection, f1).equals(f1)


def test_two_valued_tent_feasible():
    env = validate_envelope(catalog.get("tent"), catalog.get("tent"))
    rep = two_valued_selection_search(env, U())
    assert rep.feasible is True
    assert fp_apply(rep.selection, U()).equals(U())


def test_claim_audit_values():
    audit = evaluate_constant_weight_claim()
    assert audit.density.values[0] == Fr(3, 4) * Fr(3, 2) + Fr(1, 4) * Fr(2, 3) == Fr(31, 24)
    assert audit.density.integral() == 1
    assert audit.exact_sup_error == Fr(7, 24)
    assert audit.verdict.startswith("not confirmed")


def test_claim_audit_with_bgr_weights():
    # constant weights cannot carry BGR's position dependence, but (3/5, 1/5) piecewise can
    rm = RandomMap((catalog.get("ex2.1/tau1"), catalog.get("ex2.1/tau2")), _ex21_bgr())
    assert fp_apply_random(rm, U()).equals(U())


def test_weighting_round_trip():
    w = _ex21_bgr()
    d = w.to_dict()
    back = ProbabilityWeighting(tuple(StepFunction([Fr(b) for b in d["breakpoints"]], [Fr(v) for v in vals]) for vals in d["values"]))
    assert back.values_on_cells() == w.values_on_cells()
