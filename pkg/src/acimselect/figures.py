"""Data behind each figure, sampled on a grid and written as CSV plus a JSON description."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import catalog
from .errors import UnknownExampleError, UnsupportedError
from .rationals import to_str
from .selection import construct_selection, eta_description, symmetric_slope_solver

FIGURES = {
    "fig1": "two-valued map: lower, upper and the Lebesgue-preserving remark map",
    "fig2": "invariant distribution functions phi1, phi2 and F = (3/4) phi1 + (1/4) phi2",
    "fig3": "conjugates of the tent map and the selection eta for alpha = 3/4",
    "fig4": "piecewise linear Markov map and its conjugate",
    "fig5": "quadratic-edged lower map and the tent map",
    "fig6": "symmetric selection for lambda = 1/2",
    "fig7": "symmetric selection for lambda = 1/10",
    "fig8": "semi-Markov maps of the random-map counterexample and 5x mod 1",
    "fig9": "the semi-Markov maps on [0,1/5]",
    "fig10": "tau21 = tau2^{-1} o tau1 on [0,1/5]",
}
ABSENT = {"fig4": catalog.ABSENT["sec5/markov_example"]}


@dataclass
class FigureData:
    name: str
    columns: list
    rows: np.ndarray
    description: dict = field(default_factory=dict)

    def series(self, column: str) -> np.ndarray:
        return self.rows[:, self.columns.index(column)]

    def write(self, outdir) -> list[Path]:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        csv_path = outdir / f"{self.name}.csv"
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns)
            for row in self.rows:
                w.writerow([f"{v:.15g}" for v in row])
        json_path = outdir / f"{self.name}.json"
        with open(json_path, "w") as fh:
            json.dump({"figure": self.name, "caption": FIGURES[self.name], **self.description}, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return [csv_path, json_path]


def _table(xs, named):
    cols = ["x"] + [k for k, _ in named]
    rows = np.column_stack([xs] + [np.asarray(v, dtype=float) for _, v in named])
    return cols, rows


def _maps_figure(name, ids, resolution, lo=0.0, hi=1.0, labels=None, extra=None):
    xs = np.linspace(lo, hi, resolution)
    maps = [catalog.get(i) for i in ids]
    if lo != 0.0 or hi != 1.0:
        maps = [m.restrict(Fraction(lo).limit_denominator(), Fraction(hi).limit_denominator()) for m in maps]
    labels = labels or [i.split("/")[-1] for i in ids]
    named = [(lab, m(xs)) for lab, m in zip(labels, maps)]
    if extra:
        named += extra(xs)
    cols, rows = _table(xs, named)
    desc = {"maps": {lab: m.to_dict() for lab, m in zip(labels, maps)}}
    return FigureData(name, cols, rows, desc)


def _fig2(resolution):
    xs = np.linspace(0.0, 1.0, resolution)
    p1, p2, F = catalog.get("sec4/phi1"), catalog.get("sec4/phi2"), catalog.get("sec4/F")
    cols, rows = _table(xs, [("F1", p1(xs)), ("F2", p2(xs)), ("F", F(xs))])
    return FigureData("fig2", cols, rows, {"cdfs": {"F1": p1.to_dict(), "F2": p2.to_dict(), "F": F.to_dict()}})


def _fig3(resolution):
    env = catalog.get("sec4")
    res = construct_selection(env, catalog.get("sec4/phi1"), catalog.get("sec4/phi2"), Fraction(3, 4))
    xs = np.linspace(0.0, 1.0, resolution)
    cols, rows = _table(xs, [("tau1", env.tau1(xs)), ("tau2", env.tau2(xs)), ("eta", res.eta(xs)), ("diagonal", xs)])
    desc = {"alpha": "3/4", "eta": eta_description(res.eta), "betweenness": res.details["betweenness"]}
    return FigureData("fig3", cols, rows, desc)


def _symmetric(name, lam, resolution):
    sol = symmetric_slope_solver(lam)
    env = sol.result.envelope
    xs = np.linspace(0.0, 1.0, resolution)
    cols, rows = _table(xs, [("tau1", env.tau1(xs)), ("tau2", env.tau2(xs)), ("tau", sol.tau(xs))])
    desc = {
        "lambda": to_str(lam),
        "tau": sol.tau.to_dict(),
        "slopes": [{"interval": [to_str(iv.lo), to_str(iv.hi)], "abs_slope": to_str(s)} for iv, s in sol.profile],
        "density": sol.density.to_dict(),
    }
    return FigureData(name, cols, rows, desc)


def reproduce_figure(name: str, resolution: int = 1025) -> FigureData:
    if name in ABSENT:
        raise UnsupportedError(f"{name}: {ABSENT[name]}")
    if name not in FIGURES:
        raise UnknownExampleError(f"unknown figure {name!r}; known: {', '.join(FIGURES)}")
    if resolution < 16:
        raise ValueError("resolution must be at least 16")
    if name == "fig1":
        return _maps_figure(name, ["ex2.1/tau1", "ex2.1/tau2", "ex2.1/remark"], resolution)
    if name == "fig2":
        return _fig2(resolution)
    if name == "fig3":
        return _fig3(resolution)
    if name == "fig5":
        return _maps_figure(name, ["sec5/tau1", "sec5/tau2"], resolution)
    if name == "fig6":
        return _symmetric(name, Fraction(1, 2), resolution)
    if name == "fig7":
        return _symmetric(name, Fraction(1, 10), resolution)
    if name == "fig8":
        return _maps_figure(name, ["sec6/tau1", "sec6/tau2", "sec6/tau"], resolution)
    if name == "fig9":
        return _maps_figure(name, ["sec6/tau1", "sec6/tau2"], resolution, 0.0, 0.2)
    return _maps_figure(name, ["sec6/tau21"], resolution, 0.0, 0.2)


def available() -> list[str]:
    return [n for n in FIGURES if n not in ABSENT]
