from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from acimselect import catalog
from acimselect.errors import AmbiguityError, DomainError, StructuralError, ValidationError
from acimselect.interval_maps import Affine, PiecewiseMonotoneMap, Quadratic
from acimselect.measures import (
    ConvexMix,
    PiecewiseCDF,
    PiecewiseConstantDensity,
    cdf_from_density,
    check_markov,
    identity_cdf,
    invert_cdf,
    ks_distance,
    markov_invariant_density,
    markov_structure,
    ulam_approximation,
)

from conftest import fp_oracle


def test_ex21_densities_exact():
    f1 = markov_invariant_density(catalog.get("ex2.1/tau1"))
    f2 = markov_invariant_density(catalog.get("ex2.1/tau2"))
    assert f1.simplify().equals(PiecewiseConstantDensity([0, Fr(1, 2), 1], [Fr(3, 2), Fr(1, 2)]))
    assert f2.simplify().equals(PiecewiseConstantDensity([0, Fr(1, 2), 1], [Fr(2, 3), Fr(4, 3)]))


def test_ex21_densities_fixed_by_direct_preimage_sums(generic_ys):
    for mid, fid in (("ex2.1/tau1", "ex2.1/f1"), ("ex2.1/tau2", "ex2.1/f2")):
        m, f = catalog.get(mid), catalog.get(fid)
        assert np.max(np.abs(fp_oracle(m, f, generic_ys) - f(generic_ys))) < 1e-14


def test_tent_and_five_x_are_lebesgue():
    for mid in ("tent", "sec6/tau", "ex2.1/remark"):
        f = markov_invariant_density(catalog.get(mid)).simplify()
        assert list(f.values) == [1]


def test_cex_densities_fixed_by_direct_preimage_sums():
    # neither semi-Markov edge map preserves Lebesgue measure; only 5x mod 1 does
    ys = (np.arange(500) + 0.377) / 500
    for mid in ("sec6/tau1", "sec6/tau2"):
        m = catalog.get(mid)
        f = markov_invariant_density(m)
        assert list(f.simplify().values) != [1]
        assert np.max(np.abs(fp_oracle(m, f, ys) - f(ys))) < 1e-13
        assert np.max(np.abs(fp_oracle(m, PiecewiseConstantDensity.uniform(), ys) - 1)) > 0.1


def test_non_markov_map_detected():
    # the orbit of the critical value 3/4 never closes up
    m = PiecewiseMonotoneMap.from_forms([0, Fr(1, 2), 1], [Affine(Fr(3, 2), 0), Affine(Fr(-3, 2), Fr(3, 2))])
    with pytest.raises(StructuralError):
        markov_invariant_density(m)
    with pytest.raises(StructuralError):
        check_markov(catalog.get("tent"), [0, Fr(1, 3), 1])
    assert markov_structure(catalog.get("ex2.1/tau1")).n_cells >= 2


def test_two_ergodic_components_are_ambiguous():
    m = PiecewiseMonotoneMap.from_forms(
        [0, Fr(1, 4), Fr(1, 2), Fr(3, 4), 1],
        [Affine(2, 0), Affine(2, Fr(-1, 2)), Affine(2, Fr(-1, 2)), Affine(2, -1)],
    )
    with pytest.raises(AmbiguityError):
        markov_invariant_density(m)


def test_ulam_converges_to_exact():
    m = catalog.get("ex2.1/tau2")
    exact = markov_invariant_density(m)
    errs = [float(ulam_approximation(m, n).l1_distance(exact)) for n in (64, 256, 1024)]
    assert errs[-1] < 1e-2
    assert all(b <= a + 1e-12 for a, b in zip(errs, errs[1:]))


def test_ulam_on_non_markov_quadratic_map():
    m = catalog.get("sec5/tau1")
    f = ulam_approximation(m, 512)
    assert abs(float(f.integral()) - 1) < 1e-12
    # the map is not onto: the density must vanish near 0 and 1 where no mass arrives after the first step
    assert float(f(0.01)) >= 0


def test_density_validation():
    with pytest.raises(ValidationError):
        PiecewiseConstantDensity([0, 1], [2])
    with pytest.raises(ValidationError):
        PiecewiseConstantDensity([0, Fr(1, 2), 1], [-1, 3])


def test_cdf_from_density_and_inverse():
    F = cdf_from_density(catalog.get("ex2.1/f1"))
    assert F(Fr(1, 2)) == Fr(3, 4)
    assert invert_cdf(F, Fr(3, 4)) == Fr(1, 2)
    assert F.density().equals(catalog.get("ex2.1/f1"))
    with pytest.raises(DomainError):
        invert_cdf(F, Fr(2))


def test_phi_values():
    assert catalog.get("sec4/phi1")(Fr(1, 2)) == Fr(1, 2)
    assert catalog.get("sec4/phi2")(Fr(1, 2)) == Fr(1, 2)
    assert catalog.get("sec4/phi2")(Fr(0)) == 0
    assert catalog.get("sec4/phi2")(Fr(1)) == 1


def test_phi2_first_piece_inverse_round_trip():
    phi2 = catalog.get("sec4/phi2")
    us = np.linspace(0, 0.5, 1001)
    assert np.max(np.abs(phi2(phi2.inverse(us)) - us)) < 1e-14
    # exact where the square root is rational: 1 + 16x = 9/4 at x = 5/64
    assert phi2(Fr(5, 64)) == Fr(1, 8)
    assert phi2.inverse(Fr(1, 8)) == Fr(5, 64)


def test_convex_mix_and_flat_detection():
    F = ConvexMix(catalog.get("sec4/phi1"), catalog.get("sec4/phi2"), Fr(3, 4))
    assert F(Fr(1, 2)) == Fr(1, 2)
    us = np.linspace(0, 1, 257)
    assert np.max(np.abs(F(F.inverse(us)) - us)) < 1e-12
    G = cdf_from_density(catalog.get("sec5/f1"))
    assert not G.strictly_increasing
    assert identity_cdf().strictly_increasing


def test_ks_distance_of_exact_quantiles():
    F = identity_cdf()
    n = 1000
    xs = (np.arange(n) + 0.5) / n
    assert abs(ks_distance(F, xs) - 0.5 / n) < 1e-12


def test_piecewise_cdf_quadratic_segments():
    F = PiecewiseCDF([0, 1], [Quadratic(1, 0, 0)])
    assert F(Fr(1, 3)) == Fr(1, 9)
    assert F.inverse(Fr(1, 9)) == Fr(1, 3)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.fractions(min_value=Fr(1, 20), max_value=5), min_size=1, max_size=6))
def test_density_normalisation_property(vals):
    n = len(vals)
    total = sum(vals) / n
    f = PiecewiseConstantDensity([Fr(k, n) for k in range(n + 1)], [v / total for v in vals])
    F = cdf_from_density(f)
    assert F(Fr(1)) == 1
    for k in range(n + 1):
        x = Fr(k, n)
        assert F.inverse(F(x)) == x
