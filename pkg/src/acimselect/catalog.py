"""Built-in maps, densities and distribution functions addressable by string id.

Ids follow the layout ``"<example>/<object>"``: ``ex2.1`` is the two-valued
counterexample with its remark map, ``sec4`` the pair of tent conjugates by
``phi1``/``phi2``, ``sec5`` the quadratic-edged map below the tent map and
``sec6`` the semi-Markov random-map counterexample.
"""

from __future__ import annotations

import math
from fractions import Fraction as Fr
from typing import Callable

import numpy as np

from .errors import UnknownExampleError, UnsupportedError
from .interval_maps import (
    Affine,
    MonotoneClosure,
    PiecewiseMonotoneMap,
    Quadratic,
    conjugate,
    validate_envelope,
)
from .measures import ConvexMix, PiecewiseCDF, PiecewiseConstantDensity, cdf_from_density, identity_cdf
from .rationals import exact_sqrt, is_exact

ABSENT = {
    "sec5/markov_example": "the Markov example figure comes without formulas for its maps, so it is not reproduced",
}


def tent() -> PiecewiseMonotoneMap:
    return PiecewiseMonotoneMap.from_forms([0, Fr(1, 2), 1], [Affine(2, 0), Affine(-2, 2)], "tent")


# ---------------------------------------------------------------------------
# two-valued counterexample


def ex21_tau1() -> PiecewiseMonotoneMap:
    return PiecewiseMonotoneMap.from_forms(
        [0, Fr(3, 8), Fr(1, 2), Fr(5, 8), 1],
        [Affine(Fr(4, 3), 0), Affine(4, -1), Affine(-4, 3), Affine(Fr(-4, 3), Fr(4, 3))],
        "ex2.1/tau1",
    )


def ex21_tau2() -> PiecewiseMonotoneMap:
    return PiecewiseMonotoneMap.from_forms(
        [0, Fr(1, 6), Fr(1, 2), Fr(5, 6), 1],
        [Affine(3, 0), Affine(Fr(3, 2), Fr(1, 4)), Affine(Fr(-3, 2), Fr(7, 4)), Affine(-3, 3)],
        "ex2.1/tau2",
    )


def ex21_remark() -> PiecewiseMonotoneMap:
    """Upper map on [0,1/2), then ``-3x + 5/2`` and ``-3x/2 + 3/2``."""
    return PiecewiseMonotoneMap.from_forms(
        [0, Fr(1, 6), Fr(1, 2), Fr(4, 6), 1],
        [Affine(3, 0), Affine(Fr(3, 2), Fr(1, 4)), Affine(-3, Fr(5, 2)), Affine(Fr(-3, 2), Fr(3, 2))],
        "ex2.1/remark",
    )


def ex21_f1() -> PiecewiseConstantDensity:
    return PiecewiseConstantDensity([0, Fr(1, 2), 1], [Fr(3, 2), Fr(1, 2)])


def ex21_f2() -> PiecewiseConstantDensity:
    return PiecewiseConstantDensity([0, Fr(1, 2), 1], [Fr(2, 3), Fr(4, 3)])


# ---------------------------------------------------------------------------
# conjugates of the tent map


def _sqrt_piece() -> MonotoneClosure:
    """``-1/4 + sqrt(1 + 16x)/4`` with inverse ``y^2 + y/2``."""

    def forward(x):
        if isinstance(x, np.ndarray):
            return -0.25 + 0.25 * np.sqrt(1.0 + 16.0 * x)
        if is_exact(x):
            root = exact_sqrt(Fr(1 + 16 * x))
            if root is not None:
                return Fr(-1, 4) + root / 4
        return -0.25 + 0.25 * math.sqrt(1.0 + 16.0 * float(x))

    def inverse(y):
        if not isinstance(y, np.ndarray) and not is_exact(y):
            y = float(y)
        return y * y + y / 2

    return MonotoneClosure(forward, inverse, label="-1/4+sqrt(1+16x)/4")


def phi1() -> PiecewiseCDF:
    """``2x^2`` on [0,1/2], ``1 - 2(1-x)^2`` on [1/2,1]."""
    return PiecewiseCDF([0, Fr(1, 2), 1], [Quadratic(2, 0, 0), Quadratic(-2, 4, -1)], name="phi1")


def phi2() -> PiecewiseCDF:
    """``-1/4 + sqrt(1+16x)/4`` on [0,1/2], ``(x^2 + (x+1)/2)/2`` on [1/2,1]."""
    return PiecewiseCDF([0, Fr(1, 2), 1], [_sqrt_piece(), Quadratic(Fr(1, 2), Fr(1, 4), Fr(1, 4))], name="phi2")


def sec4_tau1() -> PiecewiseMonotoneMap:
    m = conjugate(tent(), phi1())
    return PiecewiseMonotoneMap(m.breakpoints, m.branches, "sec4/tau1")


def sec4_tau2() -> PiecewiseMonotoneMap:
    m = conjugate(tent(), phi2())
    return PiecewiseMonotoneMap(m.breakpoints, m.branches, "sec4/tau2")


def sec4_F() -> ConvexMix:
    return ConvexMix(phi1(), phi2(), Fr(3, 4))


# ---------------------------------------------------------------------------
# non-onto lower map below the tent map


def sec5_tau1() -> PiecewiseMonotoneMap:
    return PiecewiseMonotoneMap.from_forms(
        [0, Fr(1, 4), Fr(1, 2), Fr(3, 4), 1],
        [Quadratic(4, 0, 0), Affine(2, Fr(-1, 4)), Affine(-2, Fr(7, 4)), Quadratic(4, -8, 4)],
        "sec5/tau1",
    )


def sec5_tau2() -> PiecewiseMonotoneMap:
    m = tent()
    return PiecewiseMonotoneMap(m.breakpoints, m.branches, "sec5/tau2")


def sec5_f1() -> PiecewiseConstantDensity:
    return PiecewiseConstantDensity([0, Fr(1, 4), Fr(3, 4), 1], [0, 2, 0])


# ---------------------------------------------------------------------------
# semi-Markov random-map counterexample


def _five_x_mod_one_from(k0: int) -> tuple[list, list]:
    bps = [Fr(k, 5) for k in range(k0, 6)]
    forms = [Affine(5, -k) for k in range(k0, 5)]
    return bps, forms


def sec6_tau1() -> PiecewiseMonotoneMap:
    bps, forms = _five_x_mod_one_from(1)
    return PiecewiseMonotoneMap.from_forms(
        [0, Fr(3, 20)] + bps, [Affine(Fr(4, 3), 0), Affine(16, Fr(-11, 5))] + forms, "sec6/tau1"
    )


def sec6_tau2() -> PiecewiseMonotoneMap:
    bps, forms = _five_x_mod_one_from(1)
    return PiecewiseMonotoneMap.from_forms(
        [0, Fr(1, 20)] + bps, [Affine(16, 0), Affine(Fr(4, 3), Fr(11, 15))] + forms, "sec6/tau2"
    )


def sec6_tau() -> PiecewiseMonotoneMap:
    bps, forms = _five_x_mod_one_from(0)
    return PiecewiseMonotoneMap.from_forms(bps, forms, "sec6/tau")


def sec6_tau21() -> PiecewiseMonotoneMap:
    from .randmaps import tau21

    return tau21()


# ---------------------------------------------------------------------------
# registry

_REGISTRY: dict[str, Callable] = {
    "tent": tent,
    "uniform": PiecewiseConstantDensity.uniform,
    "identity": identity_cdf,
    "ex2.1/tau1": ex21_tau1,
    "ex2.1/tau2": ex21_tau2,
    "ex2.1/remark": ex21_remark,
    "ex2.1/f1": ex21_f1,
    "ex2.1/f2": ex21_f2,
    "ex2.1/F1": lambda: cdf_from_density(ex21_f1()),
    "ex2.1/F2": lambda: cdf_from_density(ex21_f2()),
    "ex2.1/envelope": lambda: validate_envelope(ex21_tau1(), ex21_tau2()),
    "sec4/phi1": phi1,
    "sec4/phi2": phi2,
    "sec4/tau1": sec4_tau1,
    "sec4/tau2": sec4_tau2,
    "sec4/F": sec4_F,
    # the two conjugates cross near x = 1, so this pair is not ordered everywhere
    "sec4/envelope": lambda: validate_envelope(sec4_tau1(), sec4_tau2(), require_order=False),
    "sec5/tau1": sec5_tau1,
    "sec5/tau2": sec5_tau2,
    "sec5/f1": sec5_f1,
    "sec5/envelope": lambda: validate_envelope(sec5_tau1(), sec5_tau2()),
    "sec6/tau1": sec6_tau1,
    "sec6/tau2": sec6_tau2,
    "sec6/tau": sec6_tau,
    "sec6/tau21": sec6_tau21,
    "sec6/envelope": lambda: validate_envelope(sec6_tau1(), sec6_tau2()),
}

# the envelope shorthand accepted wherever an envelope id is expected
ENVELOPE_ALIASES = {"ex2.1": "ex2.1/envelope", "sec4": "sec4/envelope", "sec5": "sec5/envelope"}

# invariant distribution functions of the envelope maps, for the selection commands
ENVELOPE_CDFS = {
    "ex2.1/envelope": ("ex2.1/F1", "ex2.1/F2"),
    "sec4/envelope": ("sec4/phi1", "sec4/phi2"),
}


def ids() -> list[str]:
    return sorted(_REGISTRY)


def get(name: str):
    """Freshly constructed object registered under ``name``."""
    name = ENVELOPE_ALIASES.get(name, name)
    if name in ABSENT:
        raise UnsupportedError(f"{name}: {ABSENT[name]}")
    try:
        ctor = _REGISTRY[name]
    except KeyError:
        raise UnknownExampleError(f"unknown example id {name!r}; known ids: {', '.join(ids())}") from None
    return ctor()


def markov_maps() -> list[str]:
    """Registered maps on [0,1] with affine branches (exact Markov densities apply)."""
    out = []
    for name in ids():
        obj = _REGISTRY[name]()
        if isinstance(obj, PiecewiseMonotoneMap) and obj.is_affine and obj.domain.lo == 0 and obj.domain.hi == 1:
            out.append(name)
    return out
