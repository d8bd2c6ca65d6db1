from fractions import Fraction as Fr

import numpy as np
import pytest

from acimselect import catalog
from acimselect.errors import UnknownExampleError, UnsupportedError
from acimselect.interval_maps import Affine, PiecewiseMonotoneMap
from acimselect.measures import markov_invariant_density


def test_every_id_builds():
    for name in catalog.ids():
        assert catalog.get(name) is not None


def test_unknown_and_absent():
    with pytest.raises(UnknownExampleError):
        catalog.get("nope")
    with pytest.raises(UnsupportedError):
        catalog.get("sec5/markov_example")


def test_phi1_at_half():
    assert catalog.get("sec4/phi1")(Fr(1, 2)) == Fr(1, 2)


def test_remark_map_middle_branch():
    m = catalog.get("ex2.1/remark")
    br = m.branches[m.branch_index(Fr(3, 5))]
    assert br.domain.lo == Fr(1, 2) and br.domain.hi == Fr(2, 3)
    assert (br.form.slope, br.form.intercept) == (-3, Fr(5, 2))


def test_remark_map_continuity_at_four_sixths():
    assert -3 * Fr(4, 6) + Fr(5, 2) == Fr(1, 2)
    assert Fr(-3, 2) * Fr(4, 6) + Fr(3, 2) == Fr(1, 2)
    m = catalog.get("ex2.1/remark")
    assert m(Fr(2, 3)) == Fr(1, 2)


def test_five_x_mod_one():
    m = catalog.get("sec6/tau")
    assert len(m.branches) == 5
    assert all(br.form.slope == 5 for br in m.branches)


def test_exact_continuity_of_registered_maps():
    for name in catalog.ids():
        m = catalog.get(name)
        if not isinstance(m, PiecewiseMonotoneMap) or name.startswith("sec6"):
            continue  # the 5x mod 1 parts jump by design
        for left, right in zip(m.branches, m.branches[1:]):
            a, b = left.end_values[1], right.end_values[0]
            tol = 0 if isinstance(left.form, Affine) and isinstance(right.form, Affine) else 1e-14
            assert abs(a - b) <= tol, name


def test_cex_maps_are_continuous_on_first_fifth():
    for name in ("sec6/tau1", "sec6/tau2"):
        m = catalog.get(name)
        assert m.branches[0].end_values[1] == m.branches[1].end_values[0]
        assert m.branches[1].end_values[1] == 1


def test_tau21_equals_composition():
    t21 = catalog.get("sec6/tau21")
    t1, t2 = catalog.get("sec6/tau1"), catalog.get("sec6/tau2")
    for x in [Fr(k, 400) for k in range(81)]:
        y = t1(x)
        # tau2 restricted to [0,1/5] is injective, so tau21(x) is the preimage of y there
        assert t2(t21(x)) == y
        assert t21(x) <= Fr(1, 5)


def test_registered_densities_match_exact_markov():
    assert markov_invariant_density(catalog.get("ex2.1/tau1")).simplify().equals(catalog.get("ex2.1/f1"))
    assert markov_invariant_density(catalog.get("ex2.1/tau2")).simplify().equals(catalog.get("ex2.1/f2"))


def test_markov_maps_list():
    names = catalog.markov_maps()
    assert {"tent", "ex2.1/tau1", "ex2.1/tau2", "ex2.1/remark", "sec6/tau1", "sec6/tau2", "sec6/tau"} <= set(names)
    assert "sec5/tau1" not in names


def test_sec5_f1_support():
    f = catalog.get("sec5/f1")
    assert f(Fr(1, 8)) == 0 and f(Fr(1, 2)) == 2
    assert np.isclose(float(f.integral()), 1)
