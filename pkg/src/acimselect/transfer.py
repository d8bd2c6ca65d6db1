"""Frobenius-Perron operators in density form and in distribution-function form."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .errors import UnsupportedError, ValidationError
from .interval_maps import DEFAULT_GRID, PiecewiseMonotoneMap
from .measures import (
    ConvexMix,
    DistributionFunction,
    PiecewiseCDF,
    PiecewiseConstantDensity,
    StepFunction,
    TabulatedCDF,
    cdf_from_density,
)


@dataclass(frozen=True)
class InvarianceReport:
    sup_error: float
    worst_point: float
    grid_size: int
    exact: bool

    def __post_init__(self):
        if self.sup_error < 0:
            raise ValidationError("negative sup error")
        if self.exact and self.sup_error != 0:
            raise ValidationError("an exact report must have zero error")

    def to_dict(self):
        return asdict(self)


def _require_unit_domain(m: PiecewiseMonotoneMap):
    if m.domain.lo != 0 or m.domain.hi != 1:
        raise ValidationError("transfer operators need maps of [0,1]")


def fp_apply(m: PiecewiseMonotoneMap, f: StepFunction) -> StepFunction:
    """``(Pf)(x) = sum over inverse branches phi of f(phi(x)) |phi'(x)|`` for affine maps.

    Exact in rationals.  Returns a :class:`PiecewiseConstantDensity` when ``f``
    is one (mass is conserved), otherwise a plain :class:`StepFunction`.
    """
    if not m.is_affine:
        raise UnsupportedError("density transfer needs affine branches; use the Ulam or CDF route")
    _require_unit_domain(m)
    knots = {Fraction(0), Fraction(1)} if m.exact and f.exact else {0.0, 1.0}
    for br in m.branches:
        lo, hi = br.domain
        cuts = [lo, hi] + [k for k in f.breakpoints if lo < k < hi]
        knots.update(br(c) for c in cuts)
    knots = sorted(knots)
    values = []
    for c, d in zip(knots, knots[1:]):
        mid = (c + d) / 2
        total = 0
        for br in m.branches:
            hmin, hmax = br.image
            if hmin < mid < hmax:
                total += f(br.inverse(mid)) / abs(br.slope)
        values.append(total)
    out = StepFunction(knots, values).simplify()
    if isinstance(f, PiecewiseConstantDensity):
        return out.as_density()
    return out


def pushforward_values(m: PiecewiseMonotoneMap, F: DistributionFunction, xs: np.ndarray) -> np.ndarray:
    """``G(x) = sum_j F-mass of {t in I_j : m(t) <= x}`` via extended inverses."""
    _require_unit_domain(m)
    xs = np.asarray(xs, dtype=float)
    total = np.zeros_like(xs)
    for br in m.branches:
        a, b = float(br.domain.lo), float(br.domain.hi)
        e = np.asarray(br.extended_inverse(xs), dtype=float)
        if br.increasing:
            total += np.asarray(F(e), dtype=float) - float(F(a))
        else:
            total += float(F(b)) - np.asarray(F(e), dtype=float)
    return total


def _grid(m: PiecewiseMonotoneMap, F: DistributionFunction, grid: int) -> np.ndarray:
    pts = [np.linspace(0.0, 1.0, grid)]
    pts.append(np.array([float(k) for k in F.knots()]))
    pts.append(np.array([float(v) for br in m.branches for v in br.image]))
    xs = np.unique(np.concatenate(pts))
    return xs[(xs >= 0) & (xs <= 1)]


def cdf_pushforward(m: PiecewiseMonotoneMap, F: DistributionFunction, grid: int = DEFAULT_GRID) -> TabulatedCDF:
    xs = _grid(m, F, grid)
    G = pushforward_values(m, F, xs)
    G[0], G[-1] = max(G[0], 0.0), min(G[-1], 1.0)
    return TabulatedCDF(xs, np.clip(G, 0.0, 1.0))


def _exact_piecewise(F: DistributionFunction) -> PiecewiseCDF | None:
    if isinstance(F, ConvexMix):
        F = F.to_piecewise()
    if isinstance(F, PiecewiseCDF) and F.piecewise_linear and F.exact:
        return F
    return None


def check_invariance(m: PiecewiseMonotoneMap, F: DistributionFunction, grid: int = DEFAULT_GRID) -> InvarianceReport:
    """Sup distance between ``F`` and its pushforward under ``m``.

    For exact affine maps and piecewise linear ``F`` the comparison is done in
    rationals through :func:`fp_apply`; otherwise on a grid plus all knots.
    """
    pw = _exact_piecewise(F)
    if pw is not None and m.is_affine and m.exact:
        f = pw.density()
        Pf = fp_apply(m, f)
        if Pf.equals(f):
            return InvarianceReport(0.0, 0.0, len(Pf.breakpoints), True)
        G = cdf_from_density(Pf)
        knots = sorted(set(G.breakpoints) | set(pw.breakpoints))
        diffs = [abs(G(k) - pw(k)) for k in knots]
        k = max(range(len(knots)), key=lambda i: diffs[i])
        return InvarianceReport(float(diffs[k]), float(knots[k]), len(knots), False)
    xs = _grid(m, F, grid)
    err = np.abs(pushforward_values(m, F, xs) - np.asarray(F(xs), dtype=float))
    k = int(np.argmax(err))
    return InvarianceReport(float(err[k]), float(xs[k]), int(xs.size), False)


def fp_apply_random(rm, f: StepFunction) -> StepFunction:
    """Transfer operator of a position-dependent random map: ``sum_k P_{tau_k}(p_k f)``."""
    rm.weights.validate()
    total = None
    for tau, p in zip(rm.maps, rm.weights.functions):
        term = fp_apply(tau, p * f)
        total = term if total is None else total + term
    total = total.simplify()
    if isinstance(f, PiecewiseConstantDensity):
        return total.as_density()
    return total
