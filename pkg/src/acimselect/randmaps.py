"""Position-dependent random maps and the two impossibility results.

A random map applies ``tau_k`` with probability ``p_k(x)`` at the current
point ``x``.  Weightings are piecewise constant.  Besides the BGR weighting and
orbit simulation this module machine-checks two negative results: the
semi-Markov pair for which no weighting preserves Lebesgue measure, and the
two-valued envelope that admits no measure-preserving selection made of
pieces of its edges.
"""

from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ParameterError, UnsupportedError, ValidationError
from .interval_maps import (
    Branch,
    Envelope,
    PiecewiseMonotoneMap,
    compose_affine,
    inverse_map,
)
from .measures import PiecewiseConstantDensity, StepFunction
from .rationals import exactify, to_str
from .transfer import InvarianceReport, fp_apply, fp_apply_random

WEIGHT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ProbabilityWeighting:
    """Piecewise constant ``p_1, ..., p_K`` on a common set of breakpoints."""

    functions: tuple

    def __post_init__(self):
        fs = [f if isinstance(f, StepFunction) else StepFunction(*f) for f in self.functions]
        if not fs:
            raise ValidationError("weighting needs at least one function")
        knots = set()
        for f in fs:
            knots |= set(f.breakpoints)
        fs = tuple(StepFunction.refine(f, knots) for f in fs)
        object.__setattr__(self, "functions", fs)

    @classmethod
    def constant(cls, values: Sequence) -> "ProbabilityWeighting":
        return cls(tuple(StepFunction([0, 1], [exactify(v)]) for v in values))

    @property
    def breakpoints(self):
        return self.functions[0].breakpoints

    @property
    def exact(self) -> bool:
        return all(f.exact for f in self.functions)

    def values_on_cells(self) -> list[tuple]:
        return [tuple(f.values[i] for f in self.functions) for i in range(len(self.breakpoints) - 1)]

    def validate(self) -> "ProbabilityWeighting":
        tol = 0 if self.exact else WEIGHT_TOL
        for i, vals in enumerate(self.values_on_cells()):
            if any(v < -tol or v > 1 + tol for v in vals):
                raise ValidationError(f"probability outside [0,1] on cell {i}")
            if abs(sum(vals) - 1) > tol:
                raise ValidationError(f"probabilities sum to {sum(vals)} on cell {i}")
        return self

    def __call__(self, x):
        return tuple(f(x) for f in self.functions)

    def to_dict(self):
        return {
            "breakpoints": [to_str(b) for b in self.breakpoints],
            "values": [[to_str(v) for v in f.values] for f in self.functions],
        }


@dataclass(frozen=True, eq=False)
class RandomMap:
    maps: tuple
    weights: ProbabilityWeighting

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(self.maps))
        if len(self.maps) != len(self.weights.functions):
            raise ValidationError("one weighting function per map is required")
        for m in self.maps:
            if m.domain.lo != 0 or m.domain.hi != 1:
                raise ValidationError("random maps act on [0,1]")


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool | None  # None: inconclusive
    witness: dict
    selection: PiecewiseMonotoneMap | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.feasible is False and not self.witness:
            raise ValidationError("an infeasible verdict must carry a witness")

    @property
    def verdict(self) -> str:
        return {True: "feasible", False: "infeasible", None: "inconclusive"}[self.feasible]

    def to_dict(self):
        out = {"verdict": self.verdict, "witness": self.witness}
        if self.selection is not None:
            out["selection"] = self.selection.to_dict()
        return out


# ---------------------------------------------------------------------------
# weightings and simulation


def bgr_probabilities(densities: Sequence[StepFunction], a: Sequence) -> ProbabilityWeighting:
    """``p_k = a_k f_k / sum_j a_j f_j`` on the common refinement of the densities.

    Where every density vanishes the ratio is 0/0; those cells get
    ``a_k / sum_j a_j`` so that the weights still sum to one.
    """
    a = [exactify(v) for v in a]
    if len(a) != len(densities):
        raise ParameterError("one weight per density is required")
    if any(v <= 0 for v in a):
        raise ParameterError("BGR weights must be positive")
    knots = set()
    for f in densities:
        knots |= set(f.breakpoints)
    fs = [StepFunction.refine(f, knots) for f in densities]
    bps = fs[0].breakpoints
    total_a = sum(a)
    cols = [[] for _ in fs]
    for i in range(len(bps) - 1):
        terms = [ak * f.values[i] for ak, f in zip(a, fs)]
        denom = sum(terms)
        for k, t in enumerate(terms):
            cols[k].append(t / denom if denom != 0 else a[k] / total_a)
    return ProbabilityWeighting(tuple(StepFunction(bps, c).simplify() for c in cols)).validate()


def _float_tables(m: PiecewiseMonotoneMap):
    if not m.is_affine:
        raise UnsupportedError("orbit simulation supports affine branches only")
    right = [float(b) for b in m.breakpoints[1:-1]]
    slopes = [float(br.form.slope) for br in m.branches]
    inter = [float(br.form.intercept) for br in m.branches]
    return right, slopes, inter


def simulate_orbit(rm: RandomMap, x0, n: int, seed: int, noise: float = 0.0) -> np.ndarray:
    """Orbit ``x_0, ..., x_n`` of the random map, driven by numpy's PCG64 generator.

    ``noise > 0`` adds a uniform perturbation of that half-width after each
    step (clipped to [0,1]).  Pure slope-2 maps lose all their bits in double
    precision after about 50 steps; a noise of order 1e-15 keeps such orbits
    generic without visibly changing their statistics.
    """
    if not 0 <= x0 <= 1:
        raise ValidationError(f"starting point {x0} outside [0,1]")
    if n < 0:
        raise ParameterError("orbit length must be nonnegative")
    rm.weights.validate()
    rng = np.random.Generator(np.random.PCG64(seed))
    u = rng.random(n)
    eps = (rng.random(n) - 0.5) * 2 * noise if noise > 0 else None
    tables = [_float_tables(m) for m in rm.maps]
    wb = [float(b) for b in rm.weights.breakpoints[1:-1]]
    cum = [np.cumsum([float(v) for v in vals]).tolist() for vals in rm.weights.values_on_cells()]
    K = len(rm.maps)
    out = np.empty(n + 1)
    x = float(x0)
    out[0] = x
    for t in range(n):
        c = cum[bisect.bisect_left(wb, x)]
        k = bisect.bisect_right(c, u[t]) if K > 1 else 0
        k = min(k, K - 1)
        right, slopes, inter = tables[k]
        j = bisect.bisect_left(right, x)
        x = slopes[j] * x + inter[j]
        if eps is not None:
            x += eps[t]
        x = 0.0 if x < 0.0 else (1.0 if x > 1.0 else x)
        out[t + 1] = x
    return out


# ---------------------------------------------------------------------------
# the semi-Markov counterexample


def tau21() -> PiecewiseMonotoneMap:
    """``tau2^{-1} o tau1`` on [0,1/5], built by composing branch inverses.

    Checked exactly against ``x/12``, ``x - 11/80``, ``12x - 11/5`` on
    ``[0,3/20]``, ``[3/20,15/80]``, ``[15/80,1/5]``.
    """
    from .catalog import sec6_tau1, sec6_tau2
    from .interval_maps import Affine

    fifth = Fraction(1, 5)
    t1 = sec6_tau1().restrict(0, fifth)
    t2 = sec6_tau2().restrict(0, fifth)
    m = compose_affine(inverse_map(t2), t1, "sec6/tau21")
    expected = PiecewiseMonotoneMap.from_forms(
        [0, Fraction(3, 20), Fraction(15, 80), fifth],
        [Affine(Fraction(1, 12), 0), Affine(1, Fraction(-11, 80)), Affine(12, Fraction(-11, 5))],
    )
    same = m.breakpoints == expected.breakpoints and all(
        a.form == b.form for a, b in zip(m.branches, expected.branches)
    )
    if not same:
        raise AssertionError(f"composition gave {m.to_dict()}, not the closed form")
    return m


@dataclass(frozen=True)
class _Term:
    """Contribution ``coef * p(preimage)`` (``sign=+1``) or ``coef * (1 - p(preimage))`` (``sign=-1``)."""

    branch: Branch
    coef: Fraction
    sign: int


def _window_terms(tau1, tau2, region, lo, hi, f):
    """Constant part and unknown terms of the invariance equation on ``(lo, hi)``."""
    mid = (lo + hi) / 2
    known = 0
    unknown = []
    for m, sign in ((tau1, 1), (tau2, -1)):
        for br in m.branches:
            hmin, hmax = br.image
            if not (hmin <= lo and hi <= hmax):
                continue
            x = br.inverse(mid)
            w = f(x) / abs(br.slope)
            inside = region[0] <= br.domain.lo and br.domain.hi <= region[1]
            if inside:
                unknown.append(_Term(br, w, sign))
            elif sign == 1:
                # outside the region both maps agree, so p and 1 - p add up to one full term
                known += w
    return known, unknown


def verify_cex_infeasibility(
    tau1: PiecewiseMonotoneMap | None = None,
    tau2: PiecewiseMonotoneMap | None = None,
    region=(0, Fraction(1, 5)),
    target: StepFunction | None = None,
) -> FeasibilityReport:
    """Derive ``p1(y) = c + p1(tau21(y))`` from Lebesgue invariance and test ``|c| <= 1``.

    ``p1`` is the unknown weighting of ``tau1`` on ``region``; outside it the
    two maps coincide and the weighting drops out.  On every window of image
    space where each map has exactly one preimage in ``region`` with the same
    slope ``s``, invariance of the target ``f`` reads
    ``f = known + (p1(phi) + 1 - p1(psi)) f / s``; with ``y = phi(x)`` and
    ``psi(x) = tau21(y)`` this is ``p1(y) = c + p1(tau21(y))`` with
    ``c = s (f - known) / f - 1``.  Since ``p1`` takes values in [0,1],
    ``|c| > 1`` is a contradiction.
    """
    if tau1 is None or tau2 is None:
        from .catalog import sec6_tau1, sec6_tau2

        tau1, tau2 = sec6_tau1(), sec6_tau2()
    if not (tau1.is_affine and tau2.is_affine):
        raise UnsupportedError("the derivation needs affine maps")
    f = target if target is not None else PiecewiseConstantDensity.uniform()
    region = (exactify(region[0]), exactify(region[1]))
    t1 = tau1.refine(region)
    t2 = tau2.refine(region)
    cuts = {Fraction(0), Fraction(1)}
    for m in (t1, t2):
        for br in m.branches:
            cuts.update(br.image)
    cuts.update(k for k in f.breakpoints)
    cuts = sorted(cuts)
    windows = []
    for lo, hi in zip(cuts, cuts[1:]):
        known, unknown = _window_terms(t1, t2, region, lo, hi, f)
        plus = [t for t in unknown if t.sign == 1]
        minus = [t for t in unknown if t.sign == -1]
        if len(plus) != 1 or len(minus) != 1:
            continue
        (tp,), (tm,) = plus, minus
        if abs(tp.branch.slope) != abs(tm.branch.slope):
            continue
        s = abs(tp.branch.slope)
        fx = f((lo + hi) / 2)
        if f(tp.branch.inverse((lo + hi) / 2)) != fx or f(tm.branch.inverse((lo + hi) / 2)) != fx:
            continue
        c = s * (fx - known) / fx - 1
        ys = sorted((tp.branch.inverse(lo), tp.branch.inverse(hi)))
        zs = sorted((tm.branch.inverse(lo), tm.branch.inverse(hi)))
        windows.append({"window": (lo, hi), "c": c, "slope": s, "known": known, "y": ys, "tau21_y": zs})
    if not windows:
        return FeasibilityReport(None, {"reason": "no window with one preimage of each map in the region"})
    best = max(windows, key=lambda w: abs(w["c"]))
    c = best["c"]
    witness = {
        "constant": to_str(c),
        "equation": f"p1(y) = {to_str(c)} + p1(tau21(y))",
        "window": [to_str(v) for v in best["window"]],
        "slope": to_str(best["slope"]),
        "y_interval": [to_str(v) for v in best["y"]],
        "tau21_image": [to_str(v) for v in best["tau21_y"]],
        "region": [to_str(v) for v in region],
    }
    if abs(c) > 1:
        bound = "p1(y) >= c > 1" if c > 0 else "p1(y) <= 1 + c < 0"
        witness["reason"] = f"{bound} on the y interval contradicts 0 <= p1 <= 1"
        return FeasibilityReport(False, witness)
    witness["reason"] = "|c| <= 1: the functional equation alone does not rule out a weighting"
    return FeasibilityReport(None, witness)


def random_weightings(count: int, seed: int, region=(0, Fraction(1, 5)), max_cells: int = 16, denom: int = 1000):
    """Random exact piecewise constant ``p1`` on ``region`` (``1/2`` elsewhere)."""
    rng = np.random.Generator(np.random.PCG64(seed))
    lo, hi = exactify(region[0]), exactify(region[1])
    out = []
    for _ in range(count):
        k = int(rng.integers(1, max_cells + 1))
        inner = sorted({lo + (hi - lo) * Fraction(int(v), denom) for v in rng.integers(1, denom, size=k - 1)})
        bps = [lo] + inner + [hi]
        vals = [Fraction(int(v), denom) for v in rng.integers(0, denom + 1, size=len(bps) - 1)]
        pts = ([Fraction(0)] if lo > 0 else []) + bps + ([Fraction(1)] if hi < 1 else [])
        vals = ([Fraction(1, 2)] if lo > 0 else []) + vals + ([Fraction(1, 2)] if hi < 1 else [])
        p1 = StepFunction(pts, vals)
        out.append(ProbabilityWeighting((p1, StepFunction(pts, [1 - v for v in vals]))))
    return out


def brute_force_cex(count: int = 100, seed: int = 20240601, tau1=None, tau2=None) -> list[Fraction]:
    """Exact sup deviation ``sup |P f - 1|`` of the uniform density for random weightings."""
    if tau1 is None or tau2 is None:
        from .catalog import sec6_tau1, sec6_tau2

        tau1, tau2 = sec6_tau1(), sec6_tau2()
    u = PiecewiseConstantDensity.uniform()
    devs = []
    for w in random_weightings(count, seed):
        Pf = fp_apply_random(RandomMap((tau1, tau2), w), u)
        devs.append(Pf.sup_distance(u))
    return devs


# ---------------------------------------------------------------------------
# two-valued selections


def _reachable(mandatory, optional, goal) -> bool:
    sums = {sum(mandatory)}
    for w in optional:
        sums |= {s + w for s in sums if s + w <= goal}
    return goal in sums


def two_valued_selection_search(
    env: Envelope, target: StepFunction, grid: int = 2**10, max_pattern_pieces: int = 16
) -> FeasibilityReport:
    """Look for ``eta`` with ``eta(x) in {tau1(x), tau2(x)}`` preserving ``target``.

    Necessary condition: at almost every ``y`` the target must equal a sum of
    ``target(x)/|slope|`` over a choice of preimages, one contribution per
    preimage point, where a point ``x`` contributes through ``tau1`` or
    ``tau2`` but not both.  The contributions are constant on the cells of
    image space cut at branch image endpoints, images of target knots and a
    uniform grid of ``grid`` cells, so checking one point per cell is exact.
    A cell with no admissible subset is a witness of infeasibility.
    Otherwise piece-level choices are enumerated and verified exactly with the
    transfer operator.
    """
    if not env.is_affine:
        raise UnsupportedError("two-valued search needs affine envelopes")
    pieces = env.pieces
    same = [b1.form == b2.form for b1, b2 in pieces]
    cuts = {Fraction(0), Fraction(1)} | {Fraction(k, grid) for k in range(1, grid)}
    for (b1, b2) in pieces:
        for br in (b1, b2):
            cuts.update(br.image)
            cuts.update(br(k) for k in target.breakpoints if br.domain.lo < k < br.domain.hi)
    cuts = sorted(cuts)
    for lo, hi in zip(cuts, cuts[1:]):
        y = (lo + hi) / 2
        mandatory, optional = [], []
        for (b1, b2), fixed in zip(pieces, same):
            for br in ((b1,) if fixed else (b1, b2)):
                hmin, hmax = br.image
                if hmin < y < hmax:
                    w = target(br.inverse(y)) / abs(br.slope)
                    (mandatory if fixed else optional).append(w)
        if not _reachable(mandatory, optional, target(y)):
            return FeasibilityReport(
                False,
                {
                    "point": to_str(y),
                    "cell": [to_str(lo), to_str(hi)],
                    "target": to_str(target(y)),
                    "forced": [to_str(w) for w in mandatory],
                    "available": [to_str(w) for w in optional],
                    "reason": "no choice of preimage contributions sums to the target density",
                },
            )
    free = [j for j, fixed in enumerate(same) if not fixed]
    if len(free) > max_pattern_pieces:
        return FeasibilityReport(None, {"reason": f"{len(free)} free pieces exceed the enumeration limit"})
    for pattern in itertools.product((0, 1), repeat=len(free)):
        choice = dict(zip(free, pattern))
        branches = tuple(pieces[j][choice.get(j, 0)] for j in range(len(pieces)))
        eta = PiecewiseMonotoneMap(env.breakpoints, branches, "eta").simplify()
        if fp_apply(eta, target).equals(target):
            labels = ["tau1" if choice.get(j, 0) == 0 else "tau2" for j in range(len(pieces))]
            return FeasibilityReport(True, {"pieces": labels}, eta)
    return FeasibilityReport(
        None, {"reason": "pointwise condition holds but no piece-level choice preserves the target"}
    )


# ---------------------------------------------------------------------------
# constant weights on the two-valued pair


@dataclass(frozen=True, eq=False)
class ClaimAudit:
    report: InvarianceReport
    density: PiecewiseConstantDensity
    exact_sup_error: Fraction
    claim: str
    verdict: str

    def to_dict(self):
        return {
            "claim": self.claim,
            "verdict": self.verdict,
            "density": self.density.to_dict(),
            "exact_sup_error": to_str(self.exact_sup_error),
            "report": self.report.to_dict(),
        }


def evaluate_constant_weight_claim(weights=(Fraction(3, 4), Fraction(1, 4))) -> ClaimAudit:
    """Exact transfer of the uniform density by the two-valued pair with constant weights."""
    from .catalog import ex21_tau1, ex21_tau2

    u = PiecewiseConstantDensity.uniform()
    rm = RandomMap((ex21_tau1(), ex21_tau2()), ProbabilityWeighting.constant(weights))
    Pf = fp_apply_random(rm, u)
    diff = Pf - u
    k = max(range(len(diff.values)), key=lambda i: abs(diff.values[i]))
    err = abs(diff.values[k])
    worst = diff.breakpoints[k] + (diff.breakpoints[k + 1] - diff.breakpoints[k]) / 2
    report = InvarianceReport(float(err), float(worst), len(Pf.breakpoints), err == 0)
    claim = f"the pair with constant weights ({', '.join(to_str(w) for w in weights)}) preserves Lebesgue measure"
    verdict = (
        "confirmed by exact position-dependent Frobenius-Perron computation"
        if err == 0
        else "not confirmed by position-dependent Frobenius-Perron computation"
    )
    return ClaimAudit(report, Pf, err, claim, verdict)


__all__ = [
    "ClaimAudit",
    "FeasibilityReport",
    "ProbabilityWeighting",
    "RandomMap",
    "bgr_probabilities",
    "brute_force_cex",
    "evaluate_constant_weight_claim",
    "random_weightings",
    "simulate_orbit",
    "tau21",
    "two_valued_selection_search",
    "verify_cex_infeasibility",
]
