"""Densities, distribution functions, exact Markov densities and the Ulam oracle."""

from __future__ import annotations

import bisect
import csv
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import sparse

from .errors import (
    AmbiguityError,
    ConvergenceError,
    DomainError,
    NonInvertibleError,
    ParameterError,
    StructuralError,
    UnsupportedError,
    ValidationError,
)
from .interval_maps import (
    Affine,
    PiecewiseMonotoneMap,
    _is_array,
    bisect_monotone,
    form_from_dict,
)
from .rationals import as_rational, exactify, is_exact, to_str

CDF_TOL = 1e-12
INVERSE_TOL = 1e-14


# ---------------------------------------------------------------------------
# step functions


class StepFunction:
    """Piecewise constant function on ``[b_0, b_n]``; cell ``i`` is ``(b_i, b_{i+1}]``."""

    def __init__(self, breakpoints: Sequence, values: Sequence):
        bps = tuple(exactify(b) for b in breakpoints)
        vals = tuple(exactify(v) for v in values)
        if len(bps) != len(vals) + 1 or len(vals) == 0:
            raise ValidationError("need n+1 breakpoints for n values")
        if any(not a < b for a, b in zip(bps, bps[1:])):
            raise ValidationError("breakpoints must be strictly increasing")
        self.breakpoints = bps
        self.values = vals
        self._bp = np.array([float(b) for b in bps])
        self._val = np.array([float(v) for v in vals])

    @property
    def exact(self) -> bool:
        return all(is_exact(b) for b in self.breakpoints) and all(is_exact(v) for v in self.values)

    @property
    def cells(self):
        return list(zip(self.breakpoints, self.breakpoints[1:]))

    def _index(self, x):
        if _is_array(x):
            return np.clip(np.searchsorted(self._bp, x, side="left") - 1, 0, len(self.values) - 1)
        return min(max(bisect.bisect_left(self.breakpoints, x) - 1, 0), len(self.values) - 1)

    def __call__(self, x):
        if _is_array(x):
            return self._val[self._index(x)]
        if not self.breakpoints[0] <= x <= self.breakpoints[-1]:
            raise DomainError(f"{x} outside [{self.breakpoints[0]}, {self.breakpoints[-1]}]")
        return self.values[self._index(x)]

    def integral(self):
        return sum((b - a) * v for (a, b), v in zip(self.cells, self.values))

    def refine(self, points) -> "StepFunction":
        lo, hi = self.breakpoints[0], self.breakpoints[-1]
        new = sorted(set(self.breakpoints) | {p for p in points if lo < p < hi})
        vals = [self.values[self._index((a + b) / 2)] for a, b in zip(new, new[1:])]
        return type(self)._raw(new, vals)

    @classmethod
    def _raw(cls, breakpoints, values):
        obj = StepFunction.__new__(cls)
        StepFunction.__init__(obj, breakpoints, values)
        return obj

    def simplify(self) -> "StepFunction":
        bps, vals = [self.breakpoints[0]], []
        for (a, b), v in zip(self.cells, self.values):
            if vals and vals[-1] == v:
                bps[-1] = b
            else:
                vals.append(v)
                bps.append(b)
        return type(self)._raw(bps, vals)

    def _aligned(self, other: "StepFunction"):
        if (self.breakpoints[0], self.breakpoints[-1]) != (other.breakpoints[0], other.breakpoints[-1]):
            raise ValidationError("step functions live on different intervals")
        pts = set(self.breakpoints) | set(other.breakpoints)
        return StepFunction.refine(self, pts), StepFunction.refine(other, pts)

    def combine(self, other: "StepFunction", op) -> "StepFunction":
        a, b = self._aligned(other)
        return StepFunction(a.breakpoints, [op(u, v) for u, v in zip(a.values, b.values)])

    def __add__(self, other):
        return self.combine(other, lambda u, v: u + v)

    def __sub__(self, other):
        return self.combine(other, lambda u, v: u - v)

    def __mul__(self, other):
        if isinstance(other, StepFunction):
            return self.combine(other, lambda u, v: u * v)
        return StepFunction(self.breakpoints, [other * v for v in self.values])

    __rmul__ = __mul__

    def equals(self, other: "StepFunction") -> bool:
        """Exact equality as functions (ignoring redundant knots)."""
        a, b = self._aligned(other)
        return all(u == v for u, v in zip(a.values, b.values))

    def l1_distance(self, other: "StepFunction"):
        a, b = self._aligned(other)
        return sum(abs(u - v) * (y - x) for (x, y), u, v in zip(a.cells, a.values, b.values))

    def sup_distance(self, other: "StepFunction"):
        a, b = self._aligned(other)
        return max(abs(u - v) for u, v in zip(a.values, b.values))

    def as_density(self) -> "PiecewiseConstantDensity":
        return PiecewiseConstantDensity(self.breakpoints, self.values)

    def to_dict(self) -> dict:
        return {"breakpoints": [to_str(b) for b in self.breakpoints], "values": [to_str(v) for v in self.values]}

    def __repr__(self):
        pairs = ", ".join(f"[{a},{b}]:{v}" for (a, b), v in zip(self.cells, self.values))
        return f"{type(self).__name__}({pairs})"


class PiecewiseConstantDensity(StepFunction):
    """Nonnegative step function on [0,1] integrating to one."""

    def __init__(self, breakpoints, values):
        super().__init__(breakpoints, values)
        if any(v < 0 for v in self.values):
            raise ValidationError("density values must be nonnegative")
        total = self.integral()
        if self.exact:
            if total != 1:
                raise ValidationError(f"density integrates to {total}, not 1")
        elif abs(float(total) - 1) > CDF_TOL:
            raise ValidationError(f"density integrates to {float(total)!r}, not 1")

    @classmethod
    def _raw(cls, breakpoints, values):
        return cls(breakpoints, values)

    @classmethod
    def uniform(cls) -> "PiecewiseConstantDensity":
        return cls((Fraction(0), Fraction(1)), (Fraction(1),))

    @classmethod
    def from_dict(cls, d):
        return cls([as_rational(b) for b in d["breakpoints"]], [as_rational(v) for v in d["values"]])


# ---------------------------------------------------------------------------
# distribution functions


class DistributionFunction:
    """Nondecreasing map of [0,1] onto [0,1]; doubles as a homeomorphism when strictly increasing."""

    exact = False

    def __call__(self, x):
        raise NotImplementedError

    def inverse(self, u):
        raise NotImplementedError

    def flat_intervals(self) -> list:
        return []

    def knots(self) -> list:
        return [Fraction(0), Fraction(1)]

    @property
    def strictly_increasing(self) -> bool:
        return not self.flat_intervals()

    def _require_invertible(self):
        if not self.strictly_increasing:
            lo, hi = self.flat_intervals()[0]
            raise NonInvertibleError(f"distribution function is flat on [{lo}, {hi}]")

    def to_dict(self) -> dict:
        return {"kind": type(self).__name__}


@dataclass(frozen=True)
class Flat:
    """Constant segment of a distribution function."""

    value: Fraction | float
    exact = True

    def __post_init__(self):
        object.__setattr__(self, "value", exactify(self.value))

    def __call__(self, x):
        if _is_array(x):
            return np.full(np.shape(x), float(self.value))
        return self.value

    def to_dict(self):
        return {"kind": "flat", "value": to_str(self.value)}


class PiecewiseCDF(DistributionFunction):
    """Continuous CDF made of increasing closed-form segments and flat segments.

    Segments are any increasing :class:`BranchForm` (affine, quadratic, or a
    closure carrying an exact inverse) or :class:`Flat`.
    """

    def __init__(self, breakpoints: Sequence, segments: Sequence, name: str = ""):
        self.breakpoints = tuple(exactify(b) for b in breakpoints)
        self.segments = tuple(segments)
        self.name = name
        if len(self.breakpoints) != len(self.segments) + 1:
            raise ValidationError("need n+1 breakpoints for n segments")
        if self.breakpoints[0] != 0 or self.breakpoints[-1] != 1:
            raise ValidationError("distribution function must be defined on [0,1]")
        if any(not a < b for a, b in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValidationError("breakpoints must be strictly increasing")
        self._bp = np.array([float(b) for b in self.breakpoints])
        left = [seg(a) for seg, a in zip(self.segments, self.breakpoints)]
        right = [seg(b) for seg, b in zip(self.segments, self.breakpoints[1:])]
        for j, (lv, rv) in enumerate(zip(left, right)):
            if rv < lv:
                raise ValidationError(f"segment {j} is decreasing")
        for j in range(1, len(self.segments)):
            if abs(right[j - 1] - left[j]) > CDF_TOL:
                raise ValidationError(f"distribution function jumps at {self.breakpoints[j]}")
        if abs(left[0]) > CDF_TOL or abs(right[-1] - 1) > CDF_TOL:
            raise ValidationError("distribution function must satisfy F(0)=0 and F(1)=1")
        self._knot_values = [left[0]] + right
        self._kv = np.array([float(v) for v in self._knot_values])

    @property
    def exact(self):
        return all(getattr(s, "exact", False) for s in self.segments) and all(is_exact(b) for b in self.breakpoints)

    @property
    def piecewise_linear(self) -> bool:
        return all(isinstance(s, (Affine, Flat)) for s in self.segments)

    def knots(self):
        return list(self.breakpoints)

    def knot_values(self):
        return list(self._knot_values)

    def flat_intervals(self):
        return [(a, b) for a, b, s in zip(self.breakpoints, self.breakpoints[1:], self.segments) if isinstance(s, Flat)]

    def _segment_index(self, x):
        if _is_array(x):
            return np.clip(np.searchsorted(self._bp, x, side="left") - 1, 0, len(self.segments) - 1)
        return min(max(bisect.bisect_left(self.breakpoints, x) - 1, 0), len(self.segments) - 1)

    def __call__(self, x):
        if _is_array(x):
            idx = self._segment_index(x)
            out = np.empty(np.shape(x), dtype=float)
            for j, seg in enumerate(self.segments):
                mask = idx == j
                if np.any(mask):
                    out[mask] = seg(x[mask])
            return out
        if not 0 <= x <= 1:
            raise DomainError(f"{x} outside [0,1]")
        return self.segments[self._segment_index(x)](x)

    def inverse(self, u):
        self._require_invertible()
        if _is_array(u):
            idx = np.clip(np.searchsorted(self._kv, u, side="left") - 1, 0, len(self.segments) - 1)
            out = np.empty(np.shape(u), dtype=float)
            for j, seg in enumerate(self.segments):
                mask = idx == j
                if np.any(mask):
                    out[mask] = seg.inverse(u[mask], self.breakpoints[j], self.breakpoints[j + 1])
            return np.clip(out, 0.0, 1.0)
        if not 0 <= u <= 1:
            raise DomainError(f"{u} outside [0,1]")
        j = min(max(bisect.bisect_left(self._knot_values, u) - 1, 0), len(self.segments) - 1)
        x = self.segments[j].inverse(u, self.breakpoints[j], self.breakpoints[j + 1])
        if is_exact(x):
            return x
        return min(max(float(x), 0.0), 1.0)

    def density(self) -> PiecewiseConstantDensity:
        """Derivative of a piecewise linear CDF as a step density."""
        if not self.piecewise_linear:
            raise UnsupportedError("density() needs a piecewise linear distribution function")
        vals = [s.slope if isinstance(s, Affine) else 0 for s in self.segments]
        return PiecewiseConstantDensity(self.breakpoints, vals)

    def to_dict(self):
        segs = []
        for s in self.segments:
            segs.append(s.to_dict())
        return {
            "kind": "piecewise",
            "name": self.name,
            "breakpoints": [to_str(b) for b in self.breakpoints],
            "segments": segs,
        }

    @classmethod
    def from_dict(cls, d):
        segs = []
        for s in d["segments"]:
            segs.append(Flat(as_rational(s["value"])) if s["kind"] == "flat" else form_from_dict(s))
        return cls([as_rational(b) for b in d["breakpoints"]], segs, d.get("name", ""))

    def __repr__(self):
        return f"PiecewiseCDF({self.name or len(self.segments)})"


def identity_cdf() -> PiecewiseCDF:
    return PiecewiseCDF((Fraction(0), Fraction(1)), (Affine(Fraction(1), Fraction(0)),), name="identity")


class TabulatedCDF(DistributionFunction):
    """Linear interpolation through monotone samples ``(x_k, F(x_k))``."""

    def __init__(self, xs, values):
        xs = np.asarray(xs, dtype=float)
        values = np.asarray(values, dtype=float)
        if xs.shape != values.shape or xs.ndim != 1 or len(xs) < 2:
            raise ValidationError("tabulated CDF needs matching 1-d sample arrays")
        if xs[0] != 0 or xs[-1] != 1 or np.any(np.diff(xs) <= 0):
            raise ValidationError("sample abscissae must increase from 0 to 1")
        if np.any(np.diff(values) < -CDF_TOL):
            raise ValidationError("tabulated values must be nondecreasing")
        if abs(values[0]) > CDF_TOL or abs(values[-1] - 1) > CDF_TOL:
            raise ValidationError("tabulated CDF must start at 0 and end at 1")
        self.xs = xs
        self.values = np.maximum.accumulate(values)

    def __call__(self, x):
        out = np.interp(x, self.xs, self.values)
        return out if _is_array(x) else float(out)

    def flat_intervals(self):
        flat = np.flatnonzero(np.diff(self.values) <= 0)
        return [(float(self.xs[i]), float(self.xs[i + 1])) for i in flat]

    def knots(self):
        return list(self.xs)

    def inverse(self, u):
        self._require_invertible()
        out = np.interp(u, self.values, self.xs)
        return out if _is_array(u) else float(out)

    def to_dict(self):
        return {"kind": "tabulated", "x": self.xs.tolist(), "F": self.values.tolist()}


def _intersect_intervals(a: list, b: list) -> list:
    out = []
    for lo1, hi1 in a:
        for lo2, hi2 in b:
            lo, hi = max(lo1, lo2), min(hi1, hi2)
            if lo < hi:
                out.append((lo, hi))
    return out


class ConvexMix(DistributionFunction):
    """``lam * F1 + (1 - lam) * F2``."""

    def __init__(self, F1: DistributionFunction, F2: DistributionFunction, lam):
        if not 0 < lam < 1:
            raise ParameterError(f"mixing weight {lam} not in (0,1)")
        self.F1, self.F2, self.lam = F1, F2, lam
        self._lf = float(lam)

    @property
    def exact(self):
        return self.F1.exact and self.F2.exact and is_exact(self.lam)

    def __call__(self, x):
        if _is_array(x) or not self.exact or not is_exact(x):
            return self._lf * self.F1(x) + (1 - self._lf) * self.F2(x)
        return self.lam * self.F1(x) + (1 - self.lam) * self.F2(x)

    def flat_intervals(self):
        return _intersect_intervals(self.F1.flat_intervals(), self.F2.flat_intervals())

    def knots(self):
        return sorted(set(self.F1.knots()) | set(self.F2.knots()))

    def inverse(self, u):
        self._require_invertible()
        scalar = not _is_array(u)
        if scalar and self.exact and is_exact(u):
            pw = self.to_piecewise()
            if pw is not None:
                return pw.inverse(u)
        arr = np.atleast_1d(np.asarray(u, dtype=float))
        out = bisect_monotone(self, arr, 0.0, 1.0, tol=INVERSE_TOL)
        out = np.where(arr <= 0, 0.0, np.where(arr >= 1, 1.0, out))
        return float(out[0]) if scalar else out

    def to_piecewise(self) -> PiecewiseCDF | None:
        """Exact piecewise linear form when both parts are piecewise linear."""
        if not (
            isinstance(self.F1, PiecewiseCDF)
            and isinstance(self.F2, PiecewiseCDF)
            and self.F1.piecewise_linear
            and self.F2.piecewise_linear
        ):
            return None
        knots = sorted(set(self.F1.breakpoints) | set(self.F2.breakpoints))
        segs = []
        for a, b in zip(knots, knots[1:]):
            slope = (self(b) - self(a)) / (b - a)
            segs.append(Flat(self(a)) if slope == 0 else Affine(slope, self(a) - slope * a))
        return PiecewiseCDF(knots, segs, name="mix")

    def to_dict(self):
        return {"kind": "mix", "lambda": to_str(self.lam), "F1": self.F1.to_dict(), "F2": self.F2.to_dict()}


class InverseFunction(DistributionFunction):
    """The inverse homeomorphism ``g^{-1}`` of a strictly increasing ``g``."""

    def __init__(self, g: DistributionFunction):
        g._require_invertible()
        self.g = g

    @property
    def exact(self):
        return self.g.exact

    def __call__(self, x):
        return self.g.inverse(x)

    def inverse(self, u):
        return self.g(u)

    def knots(self):
        return [self.g(k) for k in self.g.knots()]

    def to_dict(self):
        return {"kind": "inverse", "of": self.g.to_dict()}


class ComposedCDF(DistributionFunction):
    """``outer(inner(x))`` for distribution functions/homeomorphisms."""

    def __init__(self, outer: DistributionFunction, inner: DistributionFunction):
        self.outer, self.inner = outer, inner

    @property
    def exact(self):
        return self.outer.exact and self.inner.exact

    def __call__(self, x):
        return self.outer(self.inner(x))

    def inverse(self, u):
        return self.inner.inverse(self.outer.inverse(u))

    def flat_intervals(self):
        out = list(self.inner.flat_intervals())
        for lo, hi in self.outer.flat_intervals():
            out.append((self.inner.inverse(lo), self.inner.inverse(hi)) if self.inner.strictly_increasing else (lo, hi))
        return out

    def knots(self):
        ks = set(self.inner.knots())
        if self.inner.strictly_increasing:
            ks |= {self.inner.inverse(k) for k in self.outer.knots()}
        return sorted(ks)

    def to_dict(self):
        return {"kind": "compose", "outer": self.outer.to_dict(), "inner": self.inner.to_dict()}


class CellwiseRescaled(DistributionFunction):
    """``h(x) = h(a_i) + (G(x) - G(a_i)) / c_i`` on cell ``[a_i, a_{i+1}]``."""

    def __init__(self, base: DistributionFunction, partition: Sequence, coefficients: Sequence):
        self.base = base
        self.partition = tuple(partition)
        self.coefficients = tuple(coefficients)
        offsets = [self.partition[0]]
        for (a, b), c in zip(zip(self.partition, self.partition[1:]), self.coefficients):
            offsets.append(offsets[-1] + (base(b) - base(a)) / c)
        self.offsets = offsets
        self._bp = np.array([float(p) for p in self.partition])
        self._off = np.array([float(o) for o in offsets])

    @property
    def exact(self):
        return self.base.exact and all(is_exact(c) for c in self.coefficients)

    def _cell(self, x, knots):
        if _is_array(x):
            return np.clip(np.searchsorted(knots, x, side="left") - 1, 0, len(self.coefficients) - 1)
        return min(max(bisect.bisect_left(knots, x) - 1, 0), len(self.coefficients) - 1)

    def __call__(self, x):
        if _is_array(x):
            i = self._cell(x, self._bp)
            a = self._bp[i]
            c = np.array([float(c) for c in self.coefficients])[i]
            return self._off[i] + (self.base(x) - self.base(a)) / c
        i = self._cell(x, list(self.partition))
        a = self.partition[i]
        return self.offsets[i] + (self.base(x) - self.base(a)) / self.coefficients[i]

    def inverse(self, u):
        if _is_array(u):
            i = self._cell(u, self._off)
            a = self._bp[i]
            c = np.array([float(c) for c in self.coefficients])[i]
            return self.base.inverse(self.base(a) + (u - self._off[i]) * c)
        i = self._cell(u, list(self.offsets))
        a = self.partition[i]
        return self.base.inverse(self.base(a) + (u - self.offsets[i]) * self.coefficients[i])

    def flat_intervals(self):
        return self.base.flat_intervals()

    def knots(self):
        return sorted(set(self.partition) | set(self.base.knots()))

    def to_dict(self):
        return {
            "kind": "cellwise",
            "partition": [to_str(p) for p in self.partition],
            "coefficients": [to_str(c) for c in self.coefficients],
            "base": self.base.to_dict(),
        }


def cdf_from_dict(d: dict) -> DistributionFunction:
    kind = d["kind"]
    if kind == "piecewise":
        return PiecewiseCDF.from_dict(d)
    if kind == "tabulated":
        return TabulatedCDF(d["x"], d["F"])
    if kind == "mix":
        return ConvexMix(cdf_from_dict(d["F1"]), cdf_from_dict(d["F2"]), as_rational(d["lambda"]))
    if kind == "density":
        return cdf_from_density(PiecewiseConstantDensity.from_dict(d))
    raise ValidationError(f"cannot rebuild distribution function of kind {kind!r}")


# ---------------------------------------------------------------------------
# operations


def cdf_from_density(f: StepFunction) -> PiecewiseCDF:
    segs = []
    acc = 0
    for (a, b), v in zip(f.cells, f.values):
        segs.append(Flat(acc) if v == 0 else Affine(v, acc - v * a))
        acc = acc + v * (b - a)
    return PiecewiseCDF(f.breakpoints, segs, name="cdf")


def invert_cdf(F: DistributionFunction, u):
    if _is_array(u):
        if np.any(u < 0) or np.any(u > 1):
            raise DomainError("quantile level outside [0,1]")
    elif not 0 <= u <= 1:
        raise DomainError(f"quantile level {u} outside [0,1]")
    return F.inverse(u)


def convex_combination(F1: DistributionFunction, F2: DistributionFunction, lam) -> ConvexMix:
    return ConvexMix(F1, F2, lam)


@dataclass(frozen=True)
class MarkovStructure:
    """Partition cells and, for each cell, the owning branch and the covered cell range."""

    partition: tuple
    branch_of_cell: tuple
    incidence: tuple  # (first, last) cell indices covered by the image of each cell

    @property
    def n_cells(self):
        return len(self.partition) - 1


def markov_structure(m: PiecewiseMonotoneMap, max_points: int = 20000) -> MarkovStructure:
    """Smallest refinement of the branch partition that is Markov for ``m``.

    Images of partition points are added until the set is closed; fails for
    maps whose breakpoint orbits are infinite.
    """
    if m.domain != type(m.domain)(0, 1):
        raise StructuralError("Markov structure needs a map of [0,1]")
    # breakpoints where the formula does not change carry no structure
    m = m.simplify()
    points = set(m.breakpoints)
    frontier = set(points)
    while frontier:
        new = set()
        for p in frontier:
            for br in m.branches:
                if br.domain.lo <= p <= br.domain.hi:
                    q = br(p)
                    if q not in points:
                        new.add(q)
        points |= new
        frontier = new
        if len(points) > max_points:
            raise StructuralError("breakpoint orbits do not close up; the map is not Markov")
    return _structure_on(m, sorted(points))


def _structure_on(m: PiecewiseMonotoneMap, partition) -> MarkovStructure:
    branch_of, incidence = [], []
    index = {p: i for i, p in enumerate(partition)}
    for a, b in zip(partition, partition[1:]):
        j = m.branch_index((a + b) / 2)
        br = m.branches[j]
        if not (br.domain.lo <= a and b <= br.domain.hi):
            raise StructuralError(f"cell [{a}, {b}] straddles a branch breakpoint")
        ya, yb = br(a), br(b)
        lo, hi = min(ya, yb), max(ya, yb)
        if lo not in index or hi not in index:
            raise StructuralError(f"image of cell [{a}, {b}] is not a union of partition cells")
        branch_of.append(j)
        incidence.append((index[lo], index[hi] - 1))
    return MarkovStructure(tuple(partition), tuple(branch_of), tuple(incidence))


def check_markov(m: PiecewiseMonotoneMap, partition) -> MarkovStructure:
    return _structure_on(m, sorted(partition))


def _fraction_nullspace(A: list[list[Fraction]]) -> list[list[Fraction]]:
    """Basis of the right null space of ``A`` by exact Gauss-Jordan elimination."""
    rows = [list(r) for r in A]
    n_rows, n_cols = len(rows), len(rows[0])
    pivots = []
    r = 0
    for c in range(n_cols):
        p = next((i for i in range(r, n_rows) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        pv = rows[r][c]
        rows[r] = [v / pv for v in rows[r]]
        for i in range(n_rows):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [vi - f * vr for vi, vr in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == n_rows:
            break
    free = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * n_cols
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -rows[i][fc]
        basis.append(v)
    return basis


def transfer_matrix(m: PiecewiseMonotoneMap, structure: MarkovStructure):
    """Entry ``[j][i]`` is ``1/|slope|`` of the branch over cell ``i`` when its image covers cell ``j``."""
    n = structure.n_cells
    A = [[Fraction(0)] * n for _ in range(n)] if m.exact else np.zeros((n, n))
    part = structure.partition
    for i, (first, last) in enumerate(structure.incidence):
        # look the branch up by position so that refined or simplified copies of m also work
        w = 1 / abs(m.branches[m.branch_index((part[i] + part[i + 1]) / 2)].slope)
        if not m.exact:
            w = float(w)
        for j in range(first, last + 1):
            A[j][i] = w
    return A


def markov_invariant_density(m: PiecewiseMonotoneMap, structure: MarkovStructure | None = None) -> PiecewiseConstantDensity:
    """Exact invariant step density of a piecewise linear Markov map."""
    if not m.is_affine:
        raise UnsupportedError("exact Markov density needs affine branches")
    structure = structure or markov_structure(m)
    part = structure.partition
    lengths = [b - a for a, b in zip(part, part[1:])]
    A = transfer_matrix(m, structure)
    if m.exact:
        n = structure.n_cells
        M = [[A[j][i] - (1 if i == j else 0) for i in range(n)] for j in range(n)]
        basis = _fraction_nullspace(M)
        if not basis:
            raise StructuralError("transfer operator has no fixed density")
        if len(basis) > 1:
            dens = [StepFunction(part, v).simplify() for v in basis]
            raise AmbiguityError(f"fixed-point space has dimension {len(basis)}", dens)
        v = basis[0]
        mass = sum(c * l for c, l in zip(v, lengths))
        values = [c / mass for c in v]
    else:
        values = _power_iteration_density(np.asarray(A, dtype=float), np.array([float(l) for l in lengths]))
    if any(c < 0 for c in values):
        raise StructuralError("fixed vector has mixed signs")
    return PiecewiseConstantDensity(part, values).simplify()


def _power_iteration_density(A: np.ndarray, lengths: np.ndarray, tol=1e-14, maxiter=100000):
    # iterate on cell masses; A acts on density values
    c = np.ones(len(lengths))
    for _ in range(maxiter):
        nxt = 0.5 * (c + A @ c)
        nxt /= nxt @ lengths
        if np.max(np.abs(nxt - c)) < tol:
            return nxt
        c = nxt
    raise ConvergenceError("power iteration for the Markov density did not converge")


def ulam_matrix(m: PiecewiseMonotoneMap, n_bins: int) -> sparse.csr_matrix:
    """Row-stochastic Ulam matrix ``P[i, j] = m(B_i ∩ T^{-1} B_j) / m(B_i)`` on uniform bins.

    Preimages of bin edges come from branch inverses, so entries are exact up
    to rounding.
    """
    if m.domain.lo != 0 or m.domain.hi != 1:
        raise ValidationError("Ulam matrix needs a map of [0,1]")
    n = n_bins
    edges = np.linspace(0.0, 1.0, n + 1)
    rows, cols, vals = [], [], []
    for br in m.branches:
        X = np.asarray(br.extended_inverse(edges), dtype=float)
        if br.increasing:
            u, v = X[:-1], X[1:]
        else:
            u, v = X[1:], X[:-1]
        j = np.flatnonzero(v > u)
        u, v = u[j], v[j]
        i_lo = np.clip(np.floor(u * n).astype(int), 0, n - 1)
        i_hi = np.clip(np.ceil(v * n).astype(int) - 1, 0, n - 1)
        i_hi = np.maximum(i_hi, i_lo)
        counts = i_hi - i_lo + 1
        rep_j = np.repeat(j, counts)
        rep_u = np.repeat(u, counts)
        rep_v = np.repeat(v, counts)
        offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
        i = np.repeat(i_lo, counts) + offs
        overlap = np.minimum(rep_v, (i + 1) / n) - np.maximum(rep_u, i / n)
        keep = overlap > 0
        rows.append(i[keep])
        cols.append(rep_j[keep])
        vals.append(overlap[keep] * n)
    P = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()
    return P


def ulam_approximation(m: PiecewiseMonotoneMap, n_bins: int, tol: float = 1e-12, maxiter: int = 100000) -> PiecewiseConstantDensity:
    """Stationary density of the Ulam matrix, by lazy power iteration."""
    if n_bins < 2:
        raise ParameterError("need at least two bins")
    P = ulam_matrix(m, n_bins)
    PT = P.T.tocsr()
    pi = np.full(n_bins, 1.0 / n_bins)
    for _ in range(maxiter):
        nxt = 0.5 * (pi + PT @ pi)
        nxt /= nxt.sum()
        if np.abs(nxt - pi).sum() < tol:
            pi = nxt
            break
        pi = nxt
    else:
        raise ConvergenceError(f"Ulam power iteration did not reach {tol} in {maxiter} steps")
    edges = [k / n_bins for k in range(n_bins + 1)]
    values = pi * n_bins
    values = values / (values.sum() / n_bins)
    return PiecewiseConstantDensity(edges, [float(v) for v in values])


def ks_distance(F: DistributionFunction, samples) -> float:
    x = np.sort(np.asarray(samples, dtype=float))
    if x.size == 0:
        raise ValidationError("no samples")
    if x[0] < 0 or x[-1] > 1:
        raise DomainError("samples must lie in [0,1]")
    n = x.size
    Fx = np.asarray(F(x), dtype=float)
    upper = np.arange(1, n + 1) / n - Fx
    lower = Fx - np.arange(0, n) / n
    return float(max(upper.max(), lower.max(), 0.0))


def export_csv(path, func, resolution: int = 1025, header=("x", "value")) -> None:
    """Sample ``func`` on a uniform grid of [0,1] and write ``x,value`` rows."""
    xs = np.linspace(0.0, 1.0, resolution)
    ys = np.asarray(func(xs), dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for x, y in zip(xs, ys):
            w.writerow([f"{x:.15g}", f"{y:.15g}"])


def export_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
