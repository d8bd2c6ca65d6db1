"""Selections of a multivalued map that preserve a mixture of invariant distributions.

Three constructions are provided:

* the extended-inverse construction, which works piece by piece on any envelope
  whose lower and upper maps share their monotonicity pattern;
* the tent-like construction for unimodal envelopes, which builds the
  decreasing branch from the increasing one through the relating function ``s``;
* the conjugacy construction for a piecewise linear Markov map and a
  partition-preserving homeomorphism.

The symmetric slope solver handles the fixed example of a non-onto lower map
below the tent map.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import (
    ConstructionError,
    InconsistentInputsError,
    ParameterError,
    ValidationError,
)
from .interval_maps import (
    BISECTION_TOL,
    DEFAULT_GRID,
    IMAGE_TOL,
    Affine,
    Branch,
    Envelope,
    Interval,
    Monotonicity,
    MonotoneClosure,
    PiecewiseMonotoneMap,
    bisect_monotone,
    conjugate,
)
from .measures import (
    ComposedCDF,
    ConvexMix,
    DistributionFunction,
    PiecewiseCDF,
    PiecewiseConstantDensity,
    StepFunction,
    CellwiseRescaled,
    cdf_from_density,
    identity_cdf,
    markov_invariant_density,
    markov_structure,
)
from .rationals import exactify, is_exact

BETWEEN_TOL = 1e-9


class Construction(enum.Enum):
    MAIN_THEOREM = "main"
    TENT_LIKE = "tentlike"
    CONJUGACY = "conjugacy"
    SYMMETRIC_SLOPES = "symmetric"


@dataclass(frozen=True, eq=False)
class SelectionResult:
    eta: PiecewiseMonotoneMap
    target_cdf: DistributionFunction
    construction: Construction
    lam: Fraction | float
    envelope: Envelope | None = None
    exact: bool = False
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 < self.lam < 1:
            raise ParameterError(f"mixing weight {self.lam} not in (0,1)")


@dataclass(frozen=True, eq=False)
class TentLikeAuxiliary:
    """The relating function ``s`` and the inverse of the increasing branch."""

    s: Callable
    eta1_inverse: Callable
    peak: Fraction | float

    def __post_init__(self):
        p = float(self.peak)
        s0, sp = float(self.s(0.0)), float(self.s(p))
        if abs(s0 - 1) > 1e-9 or abs(sp - p) > 1e-9:
            raise ConstructionError(f"relating function has s(0)={s0}, s(peak)={sp}")


@dataclass(frozen=True)
class BetweennessReport:
    lower_violation: float
    upper_violation: float
    worst_lower_point: float
    worst_upper_point: float
    grid_size: int
    hull_violation: float = 0.0  # distance outside [min(tau1, tau2), max(tau1, tau2)]
    edge_crossing: float = 0.0  # largest tau1 - tau2 on the grid; positive when the edges cross

    def ok(self, tol: float = BETWEEN_TOL) -> bool:
        return self.lower_violation <= tol and self.upper_violation <= tol

    def within_hull(self, tol: float = BETWEEN_TOL) -> bool:
        return self.hull_violation <= tol

    def to_dict(self):
        return {
            "lower_violation": self.lower_violation,
            "upper_violation": self.upper_violation,
            "worst_lower_point": self.worst_lower_point,
            "worst_upper_point": self.worst_upper_point,
            "grid_size": self.grid_size,
            "hull_violation": self.hull_violation,
            "edge_crossing": self.edge_crossing,
        }


# ---------------------------------------------------------------------------
# helpers


def _check_lambda(lam):
    lam = exactify(lam)
    if not 0 < lam < 1:
        raise ParameterError(f"mixing weight {lam} not in (0,1)")
    return lam


def _target(F1, F2, lam) -> ConvexMix:
    F = ConvexMix(F1, F2, lam)
    if not F.strictly_increasing:
        lo, hi = F.flat_intervals()[0]
        raise ConstructionError(f"target distribution function is flat on [{lo}, {hi}] and cannot be inverted")
    return F


def _as_float_array(x):
    return np.atleast_1d(np.asarray(x, dtype=float))


def _vectorised(func):
    """Make an array function accept scalars (including Fractions)."""

    def wrapped(x):
        if isinstance(x, np.ndarray):
            return func(x.astype(float))
        return float(func(_as_float_array(x))[0])

    return wrapped


def _branch_from_generator(V, F: DistributionFunction, a, b, increasing: bool, label: str) -> Branch:
    """Branch on ``[a, b]`` whose inverse is ``F^{-1}(V(y))``.

    ``V`` maps [0,1] monotonically onto ``[F(a), F(b)]`` (increasing for an
    increasing branch).  Stretches where ``V`` sits at ``F(a)`` or ``F(b)``
    are the vertical parts of the inverse graph and are dropped: the branch
    runs from the last point of the lower plateau to the first point of the
    upper one.
    """
    Fa, Fb = float(F(a)), float(F(b))
    fa, fb = float(a), float(b)
    # target F(a) is the plateau bottom; strictness picks the plateau end that borders the graph
    y_at_a = float(bisect_monotone(V, np.array([Fa]), 0.0, 1.0, strict=not increasing)[0])
    y_at_b = float(bisect_monotone(V, np.array([Fb]), 0.0, 1.0, strict=increasing)[0])
    ylo, yhi = min(y_at_a, y_at_b), max(y_at_a, y_at_b)

    def forward(t):
        t = np.clip(t, fa, fb)
        y = bisect_monotone(V, np.asarray(F(t), dtype=float), ylo, yhi)
        y = np.where(t <= fa, y_at_a, np.where(t >= fb, y_at_b, y))
        return y

    def inverse(y):
        x = np.asarray(F.inverse(np.clip(np.asarray(V(y), dtype=float), Fa, Fb)), dtype=float)
        return np.clip(x, fa, fb)

    form = MonotoneClosure(_vectorised(forward), _vectorised(inverse), tol=BISECTION_TOL, label=label)
    mono = Monotonicity.INC if increasing else Monotonicity.DEC
    return Branch(Interval(a, b), form, mono)


def _mixed_generator(b1: Branch, b2: Branch, F1, F2, lam) -> Callable:
    lf = float(lam)

    def V(x):
        x = np.asarray(x, dtype=float)
        e1 = np.asarray(b1.extended_inverse(x), dtype=float)
        e2 = np.asarray(b2.extended_inverse(x), dtype=float)
        return lf * np.asarray(F1(e1), dtype=float) + (1 - lf) * np.asarray(F2(e2), dtype=float)

    return V


def _exact_pl(F) -> PiecewiseCDF | None:
    if isinstance(F, ConvexMix):
        F = F.to_piecewise()
    if isinstance(F, PiecewiseCDF) and F.piecewise_linear and F.exact:
        return F
    return None


def _exact_piece(b1: Branch, b2: Branch, F1: PiecewiseCDF, F2: PiecewiseCDF, F: PiecewiseCDF, lam):
    """Exact piecewise linear branch data for one envelope piece.

    Returns a list of ``(lo, hi, Affine)`` triples tiling the piece.
    """
    a, b = b1.domain
    inc = b1.increasing

    def G(x):
        return lam * F1(b1.extended_inverse(x)) + (1 - lam) * F2(b2.extended_inverse(x))

    knots = {Fraction(0), Fraction(1)}
    knots.update(b1.image)
    knots.update(b2.image)
    knots.update(b1(k) for k in F1.breakpoints if a < k < b)
    knots.update(b2(k) for k in F2.breakpoints if a < k < b)
    knots = sorted(knots)
    levels = [F(k) for k in F.breakpoints if a < k < b]
    extra = set()
    for x0, x1 in zip(knots, knots[1:]):
        g0, g1 = G(x0), G(x1)
        if g0 == g1:
            continue
        for v in levels:
            if min(g0, g1) < v < max(g0, g1):
                extra.add(x0 + (v - g0) * (x1 - x0) / (g1 - g0))
    xs = sorted(set(knots) | extra)
    us = [F.inverse(G(x)) for x in xs]
    if not inc:
        xs, us = xs[::-1], us[::-1]
    # drop the vertical parts: keep the last point at u=a and the first at u=b
    pts = []
    for x, u in zip(xs, us):
        if u == a:
            pts = [(u, x)]
        elif not pts or u > pts[-1][0]:
            pts.append((u, x))
            if u == b:
                break
        elif u < pts[-1][0]:
            raise ConstructionError("generator is not monotone on a piece")
        else:
            raise ConstructionError(f"inverse branch is flat at {u} inside the piece; the selection would jump")
    if pts[0][0] != a or pts[-1][0] != b:
        raise ConstructionError("inverse branch does not span its piece")
    out = []
    for (u0, x0), (u1, x1) in zip(pts, pts[1:]):
        slope = (x1 - x0) / (u1 - u0)
        out.append((u0, u1, Affine(slope, x0 - slope * u0)))
    return out


def _assemble(pieces, name) -> PiecewiseMonotoneMap:
    bps = [pieces[0].domain.lo] + [br.domain.hi for br in pieces]
    return PiecewiseMonotoneMap(tuple(bps), tuple(pieces), name)


def _sample_grid(maps, n):
    pts = [np.linspace(0.0, 1.0, n)]
    for m in maps:
        pts.append(np.array([float(b) for b in m.breakpoints]))
    xs = np.unique(np.concatenate(pts))
    return xs[(xs >= 0) & (xs <= 1)]


def betweenness_check(eta: PiecewiseMonotoneMap, env: Envelope, grid: int = 10**4) -> BetweennessReport:
    """Largest amounts by which ``eta`` dips below the lower map or rises above the upper map."""
    xs = _sample_grid([eta, env.tau1, env.tau2], grid)
    y = np.asarray(eta(xs), dtype=float)
    t1 = np.asarray(env.tau1(xs), dtype=float)
    t2 = np.asarray(env.tau2(xs), dtype=float)
    low, up = t1 - y, y - t2
    hull = np.maximum(np.minimum(t1, t2) - y, y - np.maximum(t1, t2))
    i, j = int(np.argmax(low)), int(np.argmax(up))
    return BetweennessReport(
        max(float(low[i]), 0.0),
        max(float(up[j]), 0.0),
        float(xs[i]),
        float(xs[j]),
        int(xs.size),
        max(float(hull.max()), 0.0),
        float((t1 - t2).max()),
    )


def _assert_between(eta, env, grid):
    # for edges that cross, the best possible statement is that eta stays between them pointwise
    rep = betweenness_check(eta, env, grid)
    if not rep.within_hull():
        raise ConstructionError(
            f"selection leaves the envelope (below by {rep.lower_violation:.3g}, above by {rep.upper_violation:.3g}); "
            "the invariant distribution functions probably do not belong to the maps"
        )
    return rep


# ---------------------------------------------------------------------------
# extended-inverse construction


def construct_selection(
    env: Envelope,
    F1: DistributionFunction,
    F2: DistributionFunction,
    lam,
    resolution: int = DEFAULT_GRID,
    exact: bool | None = None,
) -> SelectionResult:
    """Selection ``eta`` with ``tau1 <= eta <= tau2`` preserving ``lam F1 + (1 - lam) F2``.

    On each piece the inverse branch of ``eta`` is
    ``F^{-1}(lam F1(ext tau1_j^{-1}(x)) + (1 - lam) F2(ext tau2_j^{-1}(x)))``.
    When every ingredient is piecewise linear with rational data the branches
    are assembled exactly; otherwise each branch is a closure whose inverse is
    the formula above and whose forward value is found by bisection.
    ``resolution`` is the grid used for the internal betweenness assertion.
    """
    lam = _check_lambda(lam)
    if resolution < 16:
        raise ParameterError("resolution must be at least 16")
    F = _target(F1, F2, lam)
    pl = (_exact_pl(F1), _exact_pl(F2), _exact_pl(F))
    can_exact = env.is_affine and env.tau1.exact and env.tau2.exact and all(p is not None for p in pl) and is_exact(lam)
    if exact and not can_exact:
        raise ConstructionError("exact construction needs affine rational maps and piecewise linear rational CDFs")
    use_exact = can_exact if exact is None else exact
    if use_exact:
        P1, P2, PF = pl
        branches = []
        for b1, b2 in env.pieces:
            for lo, hi, form in _exact_piece(b1, b2, P1, P2, PF, lam):
                branches.append(Branch(Interval(lo, hi), form, b1.monotonicity))
        eta = _assemble(branches, "eta").simplify()
        target: DistributionFunction = PF
    else:
        branches = []
        for j, (b1, b2) in enumerate(env.pieces):
            V = _mixed_generator(b1, b2, F1, F2, lam)
            a, b = b1.domain
            branches.append(_branch_from_generator(V, F, a, b, b1.increasing, f"eta_{j + 1}"))
        eta = _assemble(branches, "eta")
        target = F
    rep = _assert_between(eta, env, resolution)
    return SelectionResult(
        eta, target, Construction.MAIN_THEOREM, lam, env, use_exact, {"betweenness": rep.to_dict()}
    )


# ---------------------------------------------------------------------------
# tent-like construction


def _runs(m: PiecewiseMonotoneMap):
    """Maximal runs of consecutive branches with equal monotonicity."""
    runs = []
    for br in m.branches:
        if runs and runs[-1][0] is br.monotonicity:
            runs[-1][1].append(br)
        else:
            runs.append((br.monotonicity, [br]))
    return runs


def _run_branch(branches) -> Branch:
    """Glue a continuous monotone run of branches into a single branch."""
    lo, hi = branches[0].domain.lo, branches[-1].domain.hi
    for left, right in zip(branches, branches[1:]):
        if abs(float(left.end_values[1]) - float(right.end_values[0])) > IMAGE_TOL:
            raise ValidationError(f"map is discontinuous at {left.domain.hi}")
    idx_bps = np.array([float(br.domain.lo) for br in branches[1:]])

    def forward(x):
        x = np.asarray(x, dtype=float)
        k = np.searchsorted(idx_bps, x, side="left")
        out = np.empty_like(x)
        for j, br in enumerate(branches):
            mask = k == j
            if np.any(mask):
                out[mask] = br(x[mask])
        return out

    def inverse(y):
        # a run's extended inverse is its left end plus the progress made in every branch
        y = np.asarray(y, dtype=float)
        total = np.full_like(y, float(lo))
        for br in branches:
            total += np.asarray(br.extended_inverse(y), dtype=float) - float(br.domain.lo)
        return total

    if len(branches) == 1:
        return branches[0]
    form = MonotoneClosure(_vectorised(forward), _vectorised(inverse), label="run")
    return Branch(Interval(lo, hi), form, branches[0].monotonicity)


def _unimodal(m: PiecewiseMonotoneMap, which: str):
    runs = _runs(m)
    if len(runs) != 2 or runs[0][0] is not Monotonicity.INC:
        raise ValidationError(f"{which} map is not increasing then decreasing")
    left, right = _run_branch(runs[0][1]), _run_branch(runs[1][1])
    peak = left.domain.hi
    for x, want in ((m.breakpoints[0], 0), (peak, 1), (m.breakpoints[-1], 0)):
        if abs(float(m(x)) - want) > IMAGE_TOL:
            raise ValidationError(f"{which} map takes value {m(x)} at {x}, expected {want}")
    return left, right, peak


def construct_tentlike(
    env: Envelope,
    F1: DistributionFunction,
    F2: DistributionFunction,
    lam,
    resolution: int = DEFAULT_GRID,
) -> tuple[SelectionResult, TentLikeAuxiliary]:
    """Unimodal selection built from its increasing branch.

    ``eta_1^{-1}(x) = F^{-1}((1 - lam) F2(tau_{2,1}^{-1}(x)) + lam F1(tau_{1,1}^{-1}(x)))``,
    ``s(z) = F^{-1}(1 + F(z) - F(eta_1(z)))`` and ``eta_2 = eta_1 o s^{-1}``.
    The inverse of ``eta_2`` is therefore ``F^{-1}(1 + F(eta_1^{-1}(y)) - F(y))``.
    """
    lam = _check_lambda(lam)
    F = _target(F1, F2, lam)
    l1, _, p1 = _unimodal(env.tau1, "lower")
    l2, _, p2 = _unimodal(env.tau2, "upper")
    if p1 != p2:
        raise ValidationError(f"lower and upper maps peak at different points ({p1}, {p2})")
    peak = p1
    G1 = _mixed_generator(l1, l2, F1, F2, lam)
    eta1 = _branch_from_generator(G1, F, Fraction(0) if is_exact(peak) else 0.0, peak, True, "eta_1")

    def V2(y):
        y = np.asarray(y, dtype=float)
        return 1.0 + G1(y) - np.asarray(F(y), dtype=float)

    eta2 = _branch_from_generator(V2, F, peak, env.tau1.breakpoints[-1], False, "eta_2")
    eta = _assemble([eta1, eta2], "eta")

    def s(z):
        z = np.asarray(z, dtype=float)
        v = 1.0 + np.asarray(F(z), dtype=float) - np.asarray(F(np.asarray(eta1(z), dtype=float)), dtype=float)
        return np.asarray(F.inverse(np.clip(v, 0.0, 1.0)), dtype=float)

    def eta1_inverse(x):
        return eta1.extended_inverse(x)

    aux = TentLikeAuxiliary(_vectorised(s), eta1_inverse, peak)
    rep = _assert_between(eta, env, resolution)
    result = SelectionResult(eta, F, Construction.TENT_LIKE, lam, env, False, {"betweenness": rep.to_dict()})
    return result, aux


# ---------------------------------------------------------------------------
# conjugacy construction


def conjugating_homeomorphism(f2, c, partition) -> DistributionFunction:
    """``h(x) = int_0^x f2(t) sum_i (1/c_i) chi_{I_i}(t) dt`` for plateau values ``c_i`` of ``f1``.

    ``f2`` is a step density or a distribution function.  The result must be a
    homeomorphism of [0,1] fixing every partition point.
    """
    partition = tuple(exactify(p) for p in partition)
    c = tuple(exactify(v) for v in c)
    if len(c) != len(partition) - 1:
        raise ValidationError("need one plateau value per partition cell")
    if partition[0] != 0 or partition[-1] != 1:
        raise ValidationError("partition must run from 0 to 1")
    for i, v in enumerate(c):
        if v == 0:
            raise ParameterError(f"plateau value on cell {i} is zero; cannot divide by it")
        if v < 0:
            raise ParameterError(f"plateau value on cell {i} is negative")
    if isinstance(f2, StepFunction):
        weighted = f2 * StepFunction(partition, [1 / v for v in c])
        cum = [Fraction(0) if weighted.exact else 0.0]
        for (a, b), v in zip(weighted.cells, weighted.values):
            cum.append(cum[-1] + v * (b - a))
        total = cum[-1]
        at = dict(zip(weighted.breakpoints, cum))
        values_at = [at[p] for p in partition]
        exact = weighted.exact
    elif isinstance(f2, DistributionFunction):
        h = CellwiseRescaled(f2, partition, c)
        total = h.offsets[-1]
        values_at = list(h.offsets)
        exact = h.exact
    else:
        raise ValidationError("f2 must be a step density or a distribution function")
    tol = 0 if exact else 1e-12
    if abs(total - 1) > tol:
        raise InconsistentInputsError(f"h(1) = {total}, not 1: the densities are not related by a partition-preserving conjugacy")
    for p, v in zip(partition, values_at):
        if abs(v - p) > tol:
            raise InconsistentInputsError(f"h({p}) = {v}: h does not fix the partition point {p}")
    if isinstance(f2, StepFunction):
        return cdf_from_density(weighted.as_density())
    return h


def construct_conjugacy_selection(
    tau1: PiecewiseMonotoneMap,
    h: DistributionFunction,
    alpha,
    F1: DistributionFunction | None = None,
    tol: float = 1e-12,
) -> SelectionResult:
    """``tau = g^{-1} o tau1 o g`` with ``g = alpha x + (1 - alpha) h``.

    ``tau1`` is a piecewise linear Markov map and ``h`` an increasing
    homeomorphism fixing its Markov partition; ``tau2 = h^{-1} o tau1 o h``
    is the upper map.  The returned target is
    ``alpha F1 + (1 - alpha) F1 o h`` where ``F1`` is the invariant
    distribution function of ``tau1``.
    """
    alpha = _check_lambda(alpha)
    if not tau1.is_affine:
        raise ValidationError("conjugacy construction needs a piecewise linear map")
    structure = markov_structure(tau1)
    for p in structure.partition:
        hp = h(p)
        if abs(hp - p) > (0 if (is_exact(hp) and is_exact(p)) else tol):
            raise ValidationError(f"h({p}) = {hp}: h does not preserve the Markov partition")
    if F1 is None:
        F1 = cdf_from_density(markov_invariant_density(tau1, structure))
    g = ConvexMix(identity_cdf(), h, alpha)
    tau = conjugate(tau1, g)
    tau = PiecewiseMonotoneMap(tau.breakpoints, tau.branches, "tau")
    upper = conjugate(tau1, h)
    target = ConvexMix(F1, ComposedCDF(F1, h), alpha)
    env = Envelope(tau1, upper)
    return SelectionResult(tau, target, Construction.CONJUGACY, alpha, env, False, {"g": g})


# ---------------------------------------------------------------------------
# symmetric slopes below the tent map


@dataclass(frozen=True, eq=False)
class SymmetricSlopeSolution:
    profile: tuple  # ((Interval, |slope|), ...) over [0,1]
    density: PiecewiseConstantDensity
    result: SelectionResult

    @property
    def half_slopes(self) -> tuple:
        """Slope magnitudes on the increasing half, left to right."""
        return tuple(s for _, s in self.profile[: len(self.profile) // 2])

    @property
    def tau(self) -> PiecewiseMonotoneMap:
        return self.result.eta


def symmetric_slope_solver(lam, env: Envelope | None = None) -> SymmetricSlopeSolution:
    """Symmetric piecewise linear ``tau`` between the quadratic-edged map and the tent map.

    The target density is ``(1 - lam)`` on ``[0,1/4] u [3/4,1]`` and
    ``(1 + lam)`` on ``[1/4,3/4]``.  Matching the two preimage contributions
    cell by cell forces slope 2 where the preimage and image carry equal
    density, ``2(1 - lam)/(1 + lam)`` where an outer preimage feeds the middle
    and ``2(1 + lam)/(1 - lam)`` where a middle preimage feeds ``[3/4,1]``.
    """
    lam = _check_lambda(lam)
    if not is_exact(lam):
        lam = Fraction(lam)
    quarter = Fraction(1, 4)
    s_eq = Fraction(2)
    s_out = 2 * (1 - lam) / (1 + lam)
    s_mid = 2 * (1 + lam) / (1 - lam)
    # slope 2 until the value 1/4, then s_out until x = 1/4
    x1 = quarter / s_eq
    y1 = quarter + (quarter - x1) * s_out
    # slope 2 from (1/4, y1) until the value 3/4, then s_mid up to the peak
    x2 = quarter + (Fraction(3, 4) - y1) / s_eq
    half = [(Fraction(0), x1, s_eq), (x1, quarter, s_out), (quarter, x2, s_eq), (x2, Fraction(1, 2), s_mid)]
    if not (0 < x1 < quarter < x2 < Fraction(1, 2)):
        raise ConstructionError(f"slope profile infeasible for lambda={lam}")
    forms, y = [], Fraction(0)
    for lo, hi, s in half:
        forms.append(Affine(s, y - s * lo))
        y = y + s * (hi - lo)
    if y != 1:
        raise ConstructionError(f"slope profile reaches {y} instead of 1 at the peak")
    mirrored = [Affine(-f.slope, f.slope + f.intercept) for f in reversed(forms)]
    bps = [lo for lo, _, _ in half] + [Fraction(1, 2)] + [1 - lo for lo, _, _ in reversed(half)]
    tau = PiecewiseMonotoneMap.from_forms(bps, forms + mirrored, "tau")
    profile = tuple((br.domain, abs(br.slope)) for br in tau.branches)
    f = PiecewiseConstantDensity([0, quarter, Fraction(3, 4), 1], [1 - lam, 1 + lam, 1 - lam])

    from .transfer import fp_apply

    if not fp_apply(tau, f).equals(f):
        raise ConstructionError("assembled map does not preserve the target density")
    if env is None:
        from .catalog import get

        env = get("sec5/envelope")
    rep = _assert_between(tau, env, 10**4)
    result = SelectionResult(
        tau, cdf_from_density(f), Construction.SYMMETRIC_SLOPES, lam, env, True, {"betweenness": rep.to_dict()}
    )
    return SymmetricSlopeSolution(profile, f, result)


def eta_description(eta: PiecewiseMonotoneMap, samples: int = 257) -> dict:
    """JSON-ready description of ``eta``; closure branches are replaced by samples of their graph."""
    out = {"name": eta.name, "breakpoints": [], "branches": []}
    d = eta.to_dict()
    out["breakpoints"] = d["breakpoints"]
    for br, bd in zip(eta.branches, d["branches"]):
        if bd["kind"] == "closure":
            xs = np.linspace(float(br.domain.lo), float(br.domain.hi), samples)
            ys = np.asarray(br(xs), dtype=float)
            bd = {"kind": "tabulated", "points": [[float(x), float(y)] for x, y in zip(xs, ys)], "monotone": bd["monotone"]}
        out["branches"].append(bd)
    return out


__all__ = [
    "BetweennessReport",
    "Construction",
    "SelectionResult",
    "SymmetricSlopeSolution",
    "TentLikeAuxiliary",
    "betweenness_check",
    "conjugating_homeomorphism",
    "construct_conjugacy_selection",
    "construct_selection",
    "construct_tentlike",
    "eta_description",
    "symmetric_slope_solver",
]
