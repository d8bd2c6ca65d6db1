"""Piecewise monotone self-maps of the unit interval.

A map is a finite list of strictly monotone branches over a partition
``a_0 < a_1 < ... < a_m`` of its domain.  Branch formulas are kept in exact
rational arithmetic whenever the inputs are rational; float arrays are
supported everywhere for grid work.

At an interior breakpoint the left branch owns the point.
"""

from __future__ import annotations

import bisect
import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, RangeError, StructuralError, ValidationError
from .rationals import as_rational, exact_sqrt, exactify, is_exact, to_str

BISECTION_TOL = 1e-12
BISECTION_MAXITER = 200
IMAGE_TOL = 1e-12
DEFAULT_GRID = 2**14 + 1


class Monotonicity(enum.Enum):
    INC = "inc"
    DEC = "dec"

    @property
    def sign(self) -> int:
        return 1 if self is Monotonicity.INC else -1


def _is_array(x) -> bool:
    return isinstance(x, np.ndarray)


def _exact_scalar(x) -> bool:
    return not _is_array(x) and is_exact(x)


@dataclass(frozen=True)
class Interval:
    lo: Fraction | float
    hi: Fraction | float

    def __post_init__(self):
        object.__setattr__(self, "lo", exactify(self.lo))
        object.__setattr__(self, "hi", exactify(self.hi))
        if not (0 <= self.lo <= self.hi <= 1):
            raise ValidationError(f"interval [{self.lo}, {self.hi}] is not a subinterval of [0,1]")

    @property
    def length(self):
        return self.hi - self.lo

    @property
    def midpoint(self):
        return (self.lo + self.hi) / 2

    def contains(self, x, tol=0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol

    def __iter__(self):
        yield self.lo
        yield self.hi


# ---------------------------------------------------------------------------
# branch formulas


class BranchForm:
    """A strictly monotone formula; the enclosing Branch fixes the domain."""

    exact = False

    def __call__(self, x):
        raise NotImplementedError

    def inverse(self, y, lo, hi):
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Affine(BranchForm):
    slope: Fraction | float
    intercept: Fraction | float

    def __post_init__(self):
        object.__setattr__(self, "slope", exactify(self.slope))
        object.__setattr__(self, "intercept", exactify(self.intercept))
        if self.slope == 0:
            raise ValidationError("affine branch with zero slope")
        object.__setattr__(self, "_fs", float(self.slope))
        object.__setattr__(self, "_fi", float(self.intercept))

    @property
    def exact(self):
        return is_exact(self.slope) and is_exact(self.intercept)

    def __call__(self, x):
        if _exact_scalar(x) and self.exact:
            return self.slope * x + self.intercept
        return self._fs * x + self._fi

    def inverse(self, y, lo=None, hi=None):
        if _exact_scalar(y) and self.exact:
            return (y - self.intercept) / self.slope
        return (y - self._fi) / self._fs

    def to_dict(self):
        return {"kind": "affine", "slope": to_str(self.slope), "intercept": to_str(self.intercept)}


@dataclass(frozen=True)
class Quadratic(BranchForm):
    """``a x^2 + b x + c`` on a domain that avoids the vertex interior."""

    a: Fraction | float
    b: Fraction | float
    c: Fraction | float

    def __post_init__(self):
        for k in ("a", "b", "c"):
            object.__setattr__(self, k, exactify(getattr(self, k)))
        if self.a == 0:
            raise ValidationError("quadratic branch with a == 0; use Affine")
        exact = is_exact(self.a) and is_exact(self.b) and is_exact(self.c)
        if exact:
            vertex = -Fraction(self.b) / (2 * self.a)
            vertex_value = self.c - Fraction(self.b) ** 2 / (4 * self.a)
        else:
            vertex = -float(self.b) / (2 * float(self.a))
            vertex_value = float(self.c) - float(self.b) ** 2 / (4 * float(self.a))
        object.__setattr__(self, "vertex", vertex)
        object.__setattr__(self, "vertex_value", vertex_value)
        object.__setattr__(self, "_f", (float(self.a), float(self.b), float(self.c)))
        object.__setattr__(self, "_fv", (float(vertex), float(vertex_value)))

    @property
    def exact(self):
        return all(is_exact(v) for v in (self.a, self.b, self.c))

    def __call__(self, x):
        if _exact_scalar(x) and self.exact:
            return (self.a * x + self.b) * x + self.c
        a, b, c = self._f
        return (a * x + b) * x + c

    def inverse(self, y, lo, hi):
        right = lo >= self.vertex
        if _exact_scalar(y) and self.exact:
            disc = 4 * self.a * (y - self.vertex_value)
            if disc < 0:
                raise RangeError(f"{y} not attained by quadratic branch")
            root = exact_sqrt(disc)
            if root is not None:
                step = root / (2 * abs(self.a))
                return self.vertex + step if right else self.vertex - step
            y = float(y)
        v, yv = self._fv
        a = self._f[0]
        disc = np.maximum(4 * a * (y - yv), 0.0)
        step = np.sqrt(disc) / (2 * abs(a))
        out = v + step if right else v - step
        return out if _is_array(out) else float(out)

    def to_dict(self):
        return {"kind": "quadratic", "a": to_str(self.a), "b": to_str(self.b), "c": to_str(self.c)}


def bisect_monotone(func, target, lo, hi, tol=BISECTION_TOL, maxiter=BISECTION_MAXITER, strict=True):
    """Vectorised bisection for ``func(x) = target`` with ``func`` monotone on [lo, hi].

    ``strict=True`` returns the boundary of ``{x : f(x) < target}`` for an
    increasing ``f`` (``> target`` for decreasing); ``strict=False`` uses
    ``<=``/``>=`` instead.  The two differ only where ``f`` is flat at ``target``.
    """
    target = np.asarray(target, dtype=float)
    lo_arr = np.full(target.shape, float(lo))
    hi_arr = np.full(target.shape, float(hi))
    increasing = float(func(np.array([float(hi)]))[0]) >= float(func(np.array([float(lo)]))[0])
    for _ in range(maxiter):
        if np.all(hi_arr - lo_arr <= tol):
            break
        mid = 0.5 * (lo_arr + hi_arr)
        val = np.asarray(func(mid), dtype=float)
        if increasing:
            left = val < target if strict else val <= target
        else:
            left = val > target if strict else val >= target
        lo_arr = np.where(left, mid, lo_arr)
        hi_arr = np.where(left, hi_arr, mid)
    return 0.5 * (lo_arr + hi_arr)


@dataclass(frozen=True, eq=False)
class MonotoneClosure(BranchForm):
    """Monotone formula given by callables.

    ``forward`` is required; ``inverse`` may be omitted, in which case it is
    computed by bisection on the branch domain to ``tol``.
    """

    forward: Callable
    inverse_fn: Callable | None = None
    tol: float = BISECTION_TOL
    label: str = "closure"

    def __call__(self, x):
        return self.forward(x)

    def inverse(self, y, lo, hi):
        if self.inverse_fn is not None:
            return self.inverse_fn(y)
        scalar = not _is_array(y)
        out = bisect_monotone(self.forward, np.atleast_1d(np.asarray(y, dtype=float)), lo, hi, tol=self.tol)
        return float(out[0]) if scalar else out

    def to_dict(self):
        return {"kind": "closure", "label": self.label}


@dataclass(frozen=True)
class Composite(BranchForm):
    """``outer(inner(x))``."""

    outer: BranchForm
    inner: BranchForm

    @property
    def exact(self):
        return self.outer.exact and self.inner.exact

    def __call__(self, x):
        return self.outer(self.inner(x))

    def inverse(self, y, lo, hi):
        a, b = self.inner(lo), self.inner(hi)
        ilo, ihi = (a, b) if a <= b else (b, a)
        return self.inner.inverse(self.outer.inverse(y, ilo, ihi), lo, hi)

    def to_dict(self):
        return {"kind": "composite", "outer": self.outer.to_dict(), "inner": self.inner.to_dict()}


def form_from_dict(d: dict) -> BranchForm:
    kind = d["kind"]
    if kind == "affine":
        return Affine(as_rational(d["slope"]), as_rational(d["intercept"]))
    if kind == "quadratic":
        return Quadratic(as_rational(d["a"]), as_rational(d["b"]), as_rational(d["c"]))
    if kind == "composite":
        return Composite(form_from_dict(d["outer"]), form_from_dict(d["inner"]))
    if kind == "tabulated":
        xs = np.asarray([float(p[0]) for p in d["points"]])
        ys = np.asarray([float(p[1]) for p in d["points"]])
        return tabulated_form(xs, ys)
    raise ValidationError(f"cannot rebuild branch kind {kind!r} from a description")


def tabulated_form(xs, ys) -> MonotoneClosure:
    """Monotone linear interpolant through sample points, with exact inverse of the interpolant."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if ys[-1] < ys[0]:
        ys_inc, xs_inc = ys[::-1], xs[::-1]
    else:
        ys_inc, xs_inc = ys, xs

    def forward(x):
        out = np.interp(x, xs, ys)
        return out if _is_array(x) else float(out)

    def inverse(y):
        out = np.interp(y, ys_inc, xs_inc)
        return out if _is_array(y) else float(out)

    return MonotoneClosure(forward, inverse, label="tabulated")


# ---------------------------------------------------------------------------
# branches and maps


@dataclass(frozen=True)
class Branch:
    domain: Interval
    form: BranchForm
    monotonicity: Monotonicity

    def __post_init__(self):
        lo, hi = self.domain
        if not lo < hi:
            raise ValidationError(f"degenerate branch domain [{lo}, {hi}]")
        if isinstance(self.form, Quadratic) and lo < self.form.vertex < hi:
            raise ValidationError("quadratic branch is not monotone on its domain")
        ylo, yhi = self.form(lo), self.form(hi)
        if self.monotonicity is Monotonicity.INC and not ylo < yhi:
            raise ValidationError(f"branch on [{lo}, {hi}] declared increasing but f(lo)={ylo}, f(hi)={yhi}")
        if self.monotonicity is Monotonicity.DEC and not ylo > yhi:
            raise ValidationError(f"branch on [{lo}, {hi}] declared decreasing but f(lo)={ylo}, f(hi)={yhi}")
        if not self.form.exact:
            xs = np.linspace(float(lo), float(hi), 65)
            d = np.diff(np.asarray(self.form(xs), dtype=float)) * self.monotonicity.sign
            if np.any(d < -1e-12):
                raise ValidationError(f"branch on [{lo}, {hi}] is not monotone")
        image = (ylo, yhi) if ylo < yhi else (yhi, ylo)
        tol = 0 if (is_exact(image[0]) and is_exact(image[1])) else IMAGE_TOL
        if image[0] < -tol or image[1] > 1 + tol:
            raise ValidationError(f"branch on [{lo}, {hi}] has image {image} outside [0,1]")
        object.__setattr__(self, "_image", image)
        object.__setattr__(self, "_end_values", (ylo, yhi))

    @property
    def image(self):
        """``(h_min, h_max)`` of the branch over its closed domain."""
        return self._image

    @property
    def end_values(self):
        return self._end_values

    @property
    def increasing(self) -> bool:
        return self.monotonicity is Monotonicity.INC

    @property
    def is_affine(self) -> bool:
        return isinstance(self.form, Affine)

    @property
    def slope(self):
        if not self.is_affine:
            raise ValidationError("slope requested for a non-affine branch")
        return self.form.slope

    def __call__(self, x):
        return self.form(x)

    def inverse(self, y):
        hmin, hmax = self._image
        exact = _exact_scalar(y) and self.form.exact
        if _is_array(y):
            tol = IMAGE_TOL
            if np.any(y < float(hmin) - tol) or np.any(y > float(hmax) + tol):
                raise RangeError("values outside branch image")
            y = np.clip(y, float(hmin), float(hmax))
        else:
            tol = 0 if exact else IMAGE_TOL
            if not (hmin - tol <= y <= hmax + tol):
                raise RangeError(f"{y} outside branch image [{hmin}, {hmax}]")
            if not exact:
                y = min(max(float(y), float(hmin)), float(hmax))
        lo, hi = self.domain
        x = self.form.inverse(y, lo, hi)
        if exact and is_exact(x):
            return x
        if _is_array(x):
            return np.clip(x, float(lo), float(hi))
        return min(max(float(x), float(lo)), float(hi))

    def extended_inverse(self, x):
        """Inverse clamped to the domain endpoints outside the image."""
        hmin, hmax = self._image
        lo, hi = self.domain
        below, above = (lo, hi) if self.increasing else (hi, lo)
        if _is_array(x):
            out = np.asarray(self.inverse(np.clip(x, float(hmin), float(hmax))), dtype=float)
            out = np.where(x <= float(hmin), float(below), out)
            return np.where(x >= float(hmax), float(above), out)
        if x <= hmin:
            return below
        if x >= hmax:
            return above
        return self.inverse(x)

    def with_domain(self, lo, hi) -> "Branch":
        return Branch(Interval(lo, hi), self.form, self.monotonicity)

    def to_dict(self) -> dict:
        d = self.form.to_dict()
        d["monotone"] = self.monotonicity.value
        return d


def infer_monotonicity(form: BranchForm, lo, hi) -> Monotonicity:
    return Monotonicity.INC if form(hi) > form(lo) else Monotonicity.DEC


@dataclass(frozen=True, eq=False)
class PiecewiseMonotoneMap:
    breakpoints: tuple
    branches: tuple
    name: str = ""

    def __post_init__(self):
        bps = tuple(exactify(b) for b in self.breakpoints)
        brs = tuple(self.branches)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "branches", brs)
        if len(bps) < 2 or len(brs) != len(bps) - 1:
            raise ValidationError("need m+1 breakpoints for m branches")
        if any(not a < b for a, b in zip(bps, bps[1:])):
            raise ValidationError("breakpoints must be strictly increasing")
        if bps[0] < 0 or bps[-1] > 1:
            raise ValidationError("breakpoints must lie in [0,1]")
        for j, br in enumerate(brs):
            if br.domain.lo != bps[j] or br.domain.hi != bps[j + 1]:
                raise ValidationError(f"branch {j} domain does not match breakpoints")
        object.__setattr__(self, "_bp_float", np.array([float(b) for b in bps]))

    @classmethod
    def from_forms(cls, breakpoints: Sequence, forms: Sequence[BranchForm], name: str = "") -> "PiecewiseMonotoneMap":
        bps = tuple(exactify(b) for b in breakpoints)
        branches = []
        for lo, hi, form in zip(bps, bps[1:], forms):
            branches.append(Branch(Interval(lo, hi), form, infer_monotonicity(form, lo, hi)))
        return cls(bps, tuple(branches), name)

    @property
    def domain(self) -> Interval:
        return Interval(self.breakpoints[0], self.breakpoints[-1])

    @property
    def is_affine(self) -> bool:
        return all(br.is_affine for br in self.branches)

    @property
    def exact(self) -> bool:
        return all(br.form.exact for br in self.branches) and all(is_exact(b) for b in self.breakpoints)

    @property
    def monotonicity_pattern(self) -> tuple:
        return tuple(br.monotonicity for br in self.branches)

    def branch_index(self, x):
        if _is_array(x):
            idx = np.searchsorted(self._bp_float, x, side="left") - 1
            return np.clip(idx, 0, len(self.branches) - 1)
        # first j with x <= a_{j+1}: the left branch owns interior breakpoints
        return min(max(bisect.bisect_left(self.breakpoints, x) - 1, 0), len(self.branches) - 1)

    def _check_domain(self, x):
        lo, hi = self.breakpoints[0], self.breakpoints[-1]
        if _is_array(x):
            if np.any(x < float(lo)) or np.any(x > float(hi)) or np.any(np.isnan(x)):
                raise DomainError(f"points outside the map domain [{lo}, {hi}]")
        elif not (lo <= x <= hi):
            raise DomainError(f"{x} outside the map domain [{lo}, {hi}]")

    def __call__(self, x):
        if not _is_array(x) and isinstance(x, (list, tuple)):
            x = np.asarray(x, dtype=float)
        self._check_domain(x)
        if not _is_array(x):
            return self.branches[self.branch_index(x)](x)
        x = np.asarray(x, dtype=float)
        idx = self.branch_index(x)
        out = np.empty_like(x)
        for j, br in enumerate(self.branches):
            mask = idx == j
            if np.any(mask):
                out[mask] = br(x[mask])
        return out

    def refine(self, points) -> "PiecewiseMonotoneMap":
        """Split branches at additional points; values are unchanged."""
        new = sorted(set(self.breakpoints) | {p for p in points if self.breakpoints[0] < p < self.breakpoints[-1]})
        branches = []
        for lo, hi in zip(new, new[1:]):
            j = self.branch_index((lo + hi) / 2)
            owner = self.branches[j]
            if not (owner.domain.lo <= lo and hi <= owner.domain.hi):
                raise StructuralError("refinement interval straddles a breakpoint")
            branches.append(owner.with_domain(lo, hi))
        return PiecewiseMonotoneMap(tuple(new), tuple(branches), self.name)

    def restrict(self, lo, hi) -> "PiecewiseMonotoneMap":
        ref = self.refine([lo, hi])
        keep = [br for br in ref.branches if lo <= br.domain.lo and br.domain.hi <= hi]
        bps = [keep[0].domain.lo] + [br.domain.hi for br in keep]
        return PiecewiseMonotoneMap(tuple(bps), tuple(keep), self.name)

    def simplify(self) -> "PiecewiseMonotoneMap":
        """Merge neighbouring affine branches carrying the same formula."""
        bps = [self.breakpoints[0]]
        merged: list[Branch] = []
        for br in self.branches:
            prev = merged[-1] if merged else None
            if (
                prev is not None
                and prev.is_affine
                and br.is_affine
                and prev.form.slope == br.form.slope
                and prev.form.intercept == br.form.intercept
            ):
                merged[-1] = prev.with_domain(prev.domain.lo, br.domain.hi)
                bps[-1] = br.domain.hi
                continue
            merged.append(br)
            bps.append(br.domain.hi)
        return PiecewiseMonotoneMap(tuple(bps), tuple(merged), self.name)

    def sample(self, n: int = DEFAULT_GRID) -> tuple[np.ndarray, np.ndarray]:
        xs = np.linspace(float(self.breakpoints[0]), float(self.breakpoints[-1]), n)
        return xs, self(xs)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "breakpoints": [to_str(b) for b in self.breakpoints],
            "branches": [br.to_dict() for br in self.branches],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PiecewiseMonotoneMap":
        bps = [as_rational(b) for b in d["breakpoints"]]
        branches = []
        for lo, hi, bd in zip(bps, bps[1:], d["branches"]):
            form = form_from_dict(bd)
            mono = Monotonicity(bd["monotone"]) if "monotone" in bd else infer_monotonicity(form, lo, hi)
            branches.append(Branch(Interval(lo, hi), form, mono))
        return cls(tuple(bps), tuple(branches), d.get("name", ""))

    def __repr__(self):
        label = self.name or "map"
        return f"PiecewiseMonotoneMap({label}, {len(self.branches)} branches)"


@dataclass(frozen=True, eq=False)
class Envelope:
    """Lower and upper boundary maps on a common breakpoint sequence."""

    tau1: PiecewiseMonotoneMap
    tau2: PiecewiseMonotoneMap
    ordered: bool = True

    @property
    def breakpoints(self):
        return self.tau1.breakpoints

    @property
    def pieces(self):
        return list(zip(self.tau1.branches, self.tau2.branches))

    @property
    def monotonicity_pattern(self):
        return self.tau1.monotonicity_pattern

    @property
    def is_affine(self) -> bool:
        return self.tau1.is_affine and self.tau2.is_affine


# ---------------------------------------------------------------------------
# operations


def evaluate(m: PiecewiseMonotoneMap, x):
    return m(x)


def branch_inverse(branch: Branch, y):
    return branch.inverse(y)


def extended_inverse(branch: Branch, x):
    if _is_array(x):
        if np.any(x < 0) or np.any(x > 1):
            raise DomainError("extended inverse argument outside [0,1]")
    elif not 0 <= x <= 1:
        raise DomainError(f"{x} outside [0,1]")
    return branch.extended_inverse(x)


def common_refinement(m1: PiecewiseMonotoneMap, m2: PiecewiseMonotoneMap):
    if m1.domain != m2.domain:
        raise ValidationError("maps have different domains")
    points = set(m1.breakpoints) | set(m2.breakpoints)
    return m1.refine(points), m2.refine(points)


def _grid_with(points, lo, hi, n):
    grid = np.linspace(float(lo), float(hi), n)
    extra = np.array([float(p) for p in points], dtype=float)
    return np.unique(np.concatenate([grid, extra]))


def validate_envelope(
    tau1, tau2, grid: int = DEFAULT_GRID, tol: float = IMAGE_TOL, require_order: bool = True
) -> Envelope:
    """Bring ``tau1`` and ``tau2`` to a common partition and check ``tau1 <= tau2``.

    With ``require_order=False`` only the monotonicity pattern is checked and
    the returned envelope records whether the maps are ordered on the grid.
    """
    r1, r2 = common_refinement(tau1, tau2)
    for j, (b1, b2) in enumerate(zip(r1.branches, r2.branches)):
        where = f"piece {j} [{b1.domain.lo}, {b1.domain.hi}]"
        if b1.monotonicity is not b2.monotonicity:
            raise ValidationError(f"monotonicity mismatch on {where}")
    if not require_order:
        xs = _grid_with(r1.breakpoints, r1.domain.lo, r1.domain.hi, grid)
        return Envelope(r1, r2, bool(np.max(r1(xs) - r2(xs)) <= tol))
    for j, (b1, b2) in enumerate(zip(r1.branches, r2.branches)):
        where = f"piece {j} [{b1.domain.lo}, {b1.domain.hi}]"
        for e1, e2 in zip(b1.end_values, b2.end_values):
            exact = is_exact(e1) and is_exact(e2)
            if e1 > e2 + (0 if exact else tol):
                raise ValidationError(f"lower map exceeds upper map at an endpoint of {where}")
        xs = np.linspace(float(b1.domain.lo), float(b1.domain.hi), max(3, grid // len(r1.branches)))
        gap = np.asarray(b1(xs), dtype=float) - np.asarray(b2(xs), dtype=float)
        if np.max(gap) > tol:
            raise ValidationError(f"lower map exceeds upper map by {np.max(gap):.3g} on {where}")
    xs = _grid_with(r1.breakpoints, r1.domain.lo, r1.domain.hi, grid)
    gap = r1(xs) - r2(xs)
    if np.max(gap) > tol:
        k = int(np.argmax(gap))
        j = r1.branch_index(xs[k])
        raise ValidationError(f"lower map exceeds upper map at x={xs[k]:.6g} (piece {j})")
    return Envelope(r1, r2)


def homeomorphism_form(g, inverted: bool = False) -> MonotoneClosure:
    """Wrap an increasing homeomorphism (anything with ``__call__``/``inverse``) as a branch form."""
    if inverted:
        return MonotoneClosure(g.inverse, g, label="g^-1")
    return MonotoneClosure(g, g.inverse, label="g")


def conjugate(m: PiecewiseMonotoneMap, g) -> PiecewiseMonotoneMap:
    """Return ``g^{-1} o m o g`` for an increasing homeomorphism ``g`` of [0,1]."""
    g0, g1 = g(Fraction(0)), g(Fraction(1))
    if abs(g0) > IMAGE_TOL or abs(g1 - 1) > IMAGE_TOL:
        raise ValidationError(f"conjugating map is not onto [0,1]: g(0)={g0}, g(1)={g1}")
    outer = homeomorphism_form(g, inverted=True)
    inner = homeomorphism_form(g)
    bps = [g.inverse(b) for b in m.breakpoints]
    bps[0], bps[-1] = m.breakpoints[0], m.breakpoints[-1]
    branches = []
    for lo, hi, br in zip(bps, bps[1:], m.branches):
        form = Composite(outer, Composite(br.form, inner))
        branches.append(Branch(Interval(lo, hi), form, br.monotonicity))
    name = f"conj({m.name})" if m.name else "conjugate"
    return PiecewiseMonotoneMap(tuple(bps), tuple(branches), name)


def inverse_map(m: PiecewiseMonotoneMap) -> PiecewiseMonotoneMap:
    """Inverse of an injective piecewise affine map whose branch images tile an interval."""
    if not m.is_affine:
        raise ValidationError("inverse_map needs affine branches")
    pieces = sorted(((br.image, br) for br in m.branches), key=lambda t: t[0][0])
    for (im1, _), (im2, _) in zip(pieces, pieces[1:]):
        if im1[1] != im2[0]:
            raise ValidationError("branch images do not tile an interval")
    bps = [pieces[0][0][0]] + [im[1] for im, _ in pieces]
    forms = [Affine(1 / br.form.slope, -br.form.intercept / br.form.slope) for _, br in pieces]
    return PiecewiseMonotoneMap.from_forms(bps, forms)


def compose_affine(outer: PiecewiseMonotoneMap, inner: PiecewiseMonotoneMap, name: str = "") -> PiecewiseMonotoneMap:
    """Exact ``outer o inner`` for piecewise affine maps with ``inner`` landing in ``outer``'s domain."""
    if not (outer.is_affine and inner.is_affine):
        raise ValidationError("compose_affine needs affine maps")
    cuts = set(inner.breakpoints)
    for br in inner.branches:
        lo, hi = br.image
        for p in outer.breakpoints[1:-1]:
            if lo < p < hi:
                cuts.add(br.inverse(p))
    ref = inner.refine(cuts)
    forms = []
    for br in ref.branches:
        o = outer.branches[outer.branch_index(br(br.domain.midpoint))]
        s, c = o.form.slope, o.form.intercept
        forms.append(Affine(s * br.form.slope, s * br.form.intercept + c))
    return PiecewiseMonotoneMap.from_forms(ref.breakpoints, forms, name).simplify()
