"""Command-line front end.

Every run writes its artifacts plus ``manifest-<command>.json`` into the output
directory (``--out``, else ``$ACIMSELECT_OUT``, else ``./out``).  Exit codes:
0 success, 1 configuration error, 2 numerical assertion failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import scipy

from . import __version__, catalog, figures
from .errors import (
    AcimError,
    ConstructionError,
    ConvergenceError,
    NonInvertibleError,
)
from .interval_maps import Envelope, PiecewiseMonotoneMap, validate_envelope
from .measures import (
    DistributionFunction,
    PiecewiseConstantDensity,
    StepFunction,
    cdf_from_density,
    cdf_from_dict,
    ks_distance,
    markov_invariant_density,
    ulam_approximation,
)
from .randmaps import (
    ProbabilityWeighting,
    RandomMap,
    bgr_probabilities,
    brute_force_cex,
    evaluate_constant_weight_claim,
    simulate_orbit,
    two_valued_selection_search,
    verify_cex_infeasibility,
)
from .rationals import parse_rational, to_str
from .selection import (
    betweenness_check,
    construct_conjugacy_selection,
    construct_selection,
    construct_tentlike,
    eta_description,
)
from .transfer import check_invariance, fp_apply, fp_apply_random

OUT_ENV = "ACIMSELECT_OUT"
INVARIANCE_TOL = 1e-8
CEX_MARGIN = 0.1

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


class ConfigError(Exception):
    pass


class NumericalFailure(Exception):
    def __init__(self, message, report_path=None):
        super().__init__(message)
        self.report_path = report_path


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


# ---------------------------------------------------------------------------
# inputs


def _rational(text: str, what: str) -> tuple[Fraction, bool]:
    try:
        return parse_rational(text)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{what}: {exc}") from None


def _rationals(text: str, what: str) -> list[Fraction]:
    return [_rational(t, what)[0] for t in text.split(",") if t.strip()]


def _read_json(ref: str):
    path = Path(ref)
    if not path.is_file():
        return None
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{ref}: not valid JSON ({exc})") from None


def load_map(ref: str) -> PiecewiseMonotoneMap:
    d = _read_json(ref)
    obj = PiecewiseMonotoneMap.from_dict(d) if d is not None else catalog.get(ref)
    if not isinstance(obj, PiecewiseMonotoneMap):
        raise ConfigError(f"{ref} is not an interval map")
    return obj


def load_density(ref: str) -> PiecewiseConstantDensity:
    d = _read_json(ref)
    obj = PiecewiseConstantDensity.from_dict(d) if d is not None else catalog.get(ref)
    if isinstance(obj, PiecewiseMonotoneMap):
        obj = markov_invariant_density(obj)
    if not isinstance(obj, StepFunction):
        raise ConfigError(f"{ref} is not a step density")
    return obj.as_density() if not isinstance(obj, PiecewiseConstantDensity) else obj


def load_cdf(ref: str) -> DistributionFunction:
    """Distribution function from an id or file; densities and Markov maps are integrated."""
    d = _read_json(ref)
    if d is not None:
        if "kind" not in d and "values" in d:
            return cdf_from_density(PiecewiseConstantDensity.from_dict(d))
        return cdf_from_dict(d)
    obj = catalog.get(ref)
    if isinstance(obj, PiecewiseMonotoneMap):
        obj = markov_invariant_density(obj)
    if isinstance(obj, StepFunction):
        return cdf_from_density(obj)
    if isinstance(obj, DistributionFunction):
        return obj
    raise ConfigError(f"{ref} is not a distribution function")


def load_envelope(ref: str, F1_ref=None, F2_ref=None):
    """Envelope plus the invariant distribution functions of its two maps."""
    d = _read_json(ref)
    if d is not None:
        env = validate_envelope(PiecewiseMonotoneMap.from_dict(d["tau1"]), PiecewiseMonotoneMap.from_dict(d["tau2"]))
        F1_ref = F1_ref or d.get("F1")
        F2_ref = F2_ref or d.get("F2")
        key = None
    else:
        key = catalog.ENVELOPE_ALIASES.get(ref, ref)
        env = catalog.get(key)
        if not isinstance(env, Envelope):
            raise ConfigError(f"{ref} is not an envelope")
    known = catalog.ENVELOPE_CDFS.get(key, (None, None))
    cdfs = []
    for given, default, m in ((F1_ref, known[0], env.tau1), (F2_ref, known[1], env.tau2)):
        if isinstance(given, dict):
            cdfs.append(cdf_from_dict(given))
        elif given or default:
            cdfs.append(load_cdf(given or default))
        else:
            cdfs.append(cdf_from_density(markov_invariant_density(m)))
    return env, cdfs[0], cdfs[1]


# ---------------------------------------------------------------------------
# outputs


class Run:
    def __init__(self, args, out: Path):
        self.out = out
        self.out.mkdir(parents=True, exist_ok=True)
        self.manifest = {
            "command": args.command,
            "args": {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out")},
            "versions": {
                "acimselect": __version__,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "python": platform.python_version(),
            },
            "seeds": {},
            "tolerances": {},
            "exactness": {},
            "artifacts": [],
        }

    def path(self, name: str) -> Path:
        self.manifest["artifacts"].append(name)
        return self.out / name

    def write_json(self, name: str, obj) -> Path:
        p = self.path(name)
        with open(p, "w") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")
        return p

    def write_csv(self, name: str, columns, rows) -> Path:
        p = self.path(name)
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for row in rows:
                w.writerow([f"{float(v):.15g}" for v in row])
        return p

    def finish(self):
        with open(self.out / f"manifest-{self.manifest['command']}.json", "w") as fh:
            json.dump(self.manifest, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")


def _say(*parts):
    print(*parts)


# ---------------------------------------------------------------------------
# commands


def cmd_list(args, run: Run):
    listing = {"ids": catalog.ids(), "envelopes": sorted(catalog.ENVELOPE_ALIASES), "figures": figures.available()}
    listing["absent"] = {**catalog.ABSENT, **figures.ABSENT}
    for name in listing["ids"]:
        _say(name)
    for name, note in sorted(listing["absent"].items()):
        _say(f"{name} (absent: {note})")
    run.write_json("list.json", listing)


def cmd_density(args, run: Run):
    m = load_map(args.map)
    if args.method == "exact":
        f = markov_invariant_density(m)
    else:
        if args.bins < 2:
            raise ConfigError("--bins must be at least 2")
        f = ulam_approximation(m, args.bins)
        run.manifest["tolerances"]["power_iteration"] = 1e-12
    _say("knots:", "[" + ", ".join(to_str(b) for b in f.breakpoints) + "]")
    _say("values:", "[" + ", ".join(to_str(v) for v in f.values) + "]")
    run.write_json("density.json", f.to_dict())
    xs = np.linspace(0.0, 1.0, args.resolution)
    run.write_csv("density.csv", ["x", "density"], np.column_stack([xs, np.asarray(f(xs), dtype=float)]))


def _invariance_of(eta, F, grid):
    return check_invariance(eta, F, grid)


def cmd_select(args, run: Run):
    lam, lam_exact = _rational(args.lam, "--lambda")
    run.manifest["exactness"]["lambda"] = lam_exact
    run.manifest["tolerances"].update(invariance=INVARIANCE_TOL, betweenness=1e-9)
    if args.resolution < 16:
        raise ConfigError("--resolution must be at least 16")
    if args.method == "conjugacy":
        if args.env is not None and (args.tau1 is None or args.h is None):
            raise ConfigError("conjugacy takes --tau1 and --h instead of an envelope")
        tau1 = load_map(args.tau1 or "tent")
        h = load_cdf(args.h or "sec4/phi2")
        res = construct_conjugacy_selection(tau1, h, lam)
    else:
        if args.env is None:
            raise ConfigError(f"method {args.method} needs an envelope")
        env, F1, F2 = load_envelope(args.env, args.F1, args.F2)
        if args.method == "main":
            res = construct_selection(env, F1, F2, lam, resolution=args.resolution)
        else:
            res, aux = construct_tentlike(env, F1, F2, lam, resolution=args.resolution)
            run.manifest["tentlike_peak"] = to_str(aux.peak)
    eta, env = res.eta, res.envelope
    inv = _invariance_of(eta, res.target_cdf, args.grid)
    btw = betweenness_check(eta, env, args.betweenness_grid)
    xs = np.linspace(0.0, 1.0, args.resolution)
    cols = [xs, env.tau1(xs), env.tau2(xs), eta(xs)]
    run.write_json("eta.json", eta_description(eta))
    run.write_csv("eta.csv", ["x", "tau1", "tau2", "eta"], np.column_stack(cols))
    report = {
        "construction": res.construction.value,
        "lambda": to_str(lam),
        "exact": res.exact,
        "invariance": inv.to_dict(),
        "betweenness": btw.to_dict(),
        "envelope_ordered": bool(getattr(env, "ordered", True)),
    }
    rpath = run.write_json("report.json", report)
    _say(f"invariance sup_error={inv.sup_error:.3e} worst_point={inv.worst_point:.6g} exact={inv.exact}")
    _say(
        f"betweenness lower={btw.lower_violation:.3e} upper={btw.upper_violation:.3e} "
        f"hull={btw.hull_violation:.3e}"
    )
    if inv.sup_error > INVARIANCE_TOL:
        raise NumericalFailure(f"invariance error {inv.sup_error:.3e} exceeds {INVARIANCE_TOL}", rpath)
    if not btw.within_hull():
        raise NumericalFailure("selection leaves the envelope", rpath)


def cmd_verify(args, run: Run):
    m = load_map(args.map)
    F = load_cdf(args.cdf)
    rep = check_invariance(m, F, args.grid)
    run.manifest["tolerances"]["invariance"] = args.tol
    rpath = run.write_json("invariance.json", rep.to_dict())
    _say(f"sup_error={rep.sup_error:.3e} worst_point={rep.worst_point:.6g} exact={rep.exact}")
    if rep.sup_error > args.tol:
        raise NumericalFailure(f"invariance error {rep.sup_error:.3e} exceeds {args.tol}", rpath)


def cmd_random(args, run: Run):
    maps = [load_map(r) for r in args.maps.split(",")]
    if (args.bgr is None) == (args.weights is None):
        raise ConfigError("give exactly one of --bgr and --weights")
    invariant = None
    if args.bgr is not None:
        a = _rationals(args.bgr, "--bgr")
        refs = args.densities.split(",") if args.densities else args.maps.split(",")
        fs = [load_density(r) for r in refs]
        weights = bgr_probabilities(fs, a)
        total = sum(a)
        invariant = fs[0] * (a[0] / total)
        for ak, f in zip(a[1:], fs[1:]):
            invariant = invariant + f * (ak / total)
        invariant = invariant.simplify().as_density()
    else:
        d = _read_json(args.weights)
        if d is not None:
            weights = ProbabilityWeighting(
                tuple(StepFunction(d["breakpoints"], vals) for vals in d["values"])
            )
        else:
            weights = ProbabilityWeighting.constant(_rationals(args.weights, "--weights"))
    rm = RandomMap(maps, weights.validate())
    run.write_json("weights.json", weights.to_dict())
    summary = {"weights": weights.to_dict()}
    if invariant is not None:
        Pf = fp_apply_random(rm, invariant)
        summary["invariant_density"] = invariant.to_dict()
        summary["fixed_exactly"] = bool(Pf.equals(invariant))
        _say(f"transfer fixes sum a_k f_k exactly: {summary['fixed_exactly']}")
    if args.simulate:
        x0, _ = _rational(args.x0, "--x0")
        run.manifest["seeds"]["orbit"] = args.seed
        run.manifest["tolerances"]["noise"] = args.noise
        xs = simulate_orbit(rm, x0, args.n, args.seed, args.noise)
        if args.histogram:
            counts, edges = np.histogram(xs, bins=args.histogram, range=(0.0, 1.0))
            dens = counts / (xs.size * np.diff(edges))
            run.write_csv("histogram.csv", ["lo", "hi", "density"], np.column_stack([edges[:-1], edges[1:], dens]))
        else:
            run.write_csv("orbit.csv", ["t", "x"], np.column_stack([np.arange(xs.size), xs]))
        if invariant is not None:
            ks = ks_distance(cdf_from_density(invariant), xs)
            summary["ks_distance"] = ks
            _say(f"ks_distance={ks:.5f}")
    run.write_json("random.json", summary)


def cmd_check_cex(args, run: Run):
    rep = verify_cex_infeasibility()
    run.manifest["seeds"]["candidates"] = args.seed
    run.manifest["tolerances"]["margin"] = CEX_MARGIN
    devs = brute_force_cex(args.candidates, args.seed) if args.candidates > 0 else []
    out = rep.to_dict()
    out["brute_force"] = {
        "candidates": len(devs),
        "min_sup_deviation": to_str(min(devs)) if devs else None,
        "all_above_margin": all(d > CEX_MARGIN for d in devs),
    }
    rpath = run.write_json("cex.json", out)
    print(json.dumps(out, indent=2, sort_keys=True, default=str))
    if rep.feasible is not False or not out["brute_force"]["all_above_margin"]:
        raise NumericalFailure("counterexample verification did not confirm infeasibility", rpath)


def cmd_two_valued(args, run: Run):
    env, _, _ = load_envelope(args.env)
    target = load_density(args.target)
    rep = two_valued_selection_search(env, target, args.grid)
    out = rep.to_dict()
    if rep.selection is not None:
        out["selection_preserves_target"] = bool(fp_apply(rep.selection, target).equals(target))
    run.write_json("two_valued.json", out)
    _say(f"verdict: {rep.verdict}")
    print(json.dumps(rep.witness, indent=2, sort_keys=True, default=str))


def cmd_claim_audit(args, run: Run):
    w = _rationals(args.weights, "--weights")
    audit = evaluate_constant_weight_claim(tuple(w))
    run.write_json("claim_audit.json", audit.to_dict())
    _say(f"claim: {audit.claim}")
    _say(f"verdict: {audit.verdict}")
    _say("density values:", ", ".join(to_str(v) for v in audit.density.values))
    _say(f"sup deviation from uniform: {to_str(audit.exact_sup_error)}")


def cmd_reproduce(args, run: Run):
    names = figures.available() if args.figure == "all" else [args.figure]
    if args.resolution < 16:
        raise ConfigError("--resolution must be at least 16")
    for name in names:
        data = figures.reproduce_figure(name, args.resolution)
        for p in data.write(run.out):
            run.manifest["artifacts"].append(p.name)
        _say(f"{name}: {', '.join(data.columns[1:])}")


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="acimselect", description=__doc__.splitlines()[0])
    p.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or ./out)")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("list", help="registered example ids and figures")
    s.set_defaults(func=cmd_list)

    s = sub.add_parser("density", help="invariant density of a map")
    s.add_argument("map")
    s.add_argument("--method", choices=["exact", "ulam"], default="exact")
    s.add_argument("--bins", type=int, default=4096)
    s.add_argument("--resolution", type=int, default=1025)
    s.set_defaults(func=cmd_density)

    s = sub.add_parser("select", help="construct a measure-preserving selection")
    s.add_argument("env", nargs="?")
    s.add_argument("--lambda", dest="lam", required=True)
    s.add_argument("--method", choices=["main", "tentlike", "conjugacy"], default="main")
    s.add_argument("--F1")
    s.add_argument("--F2")
    s.add_argument("--tau1")
    s.add_argument("--h")
    s.add_argument("--resolution", type=int, default=2**14)
    s.add_argument("--grid", type=int, default=2**14)
    s.add_argument("--betweenness-grid", type=int, default=10**4)
    s.set_defaults(func=cmd_select)

    s = sub.add_parser("verify", help="check that a map preserves a distribution function")
    s.add_argument("map")
    s.add_argument("cdf")
    s.add_argument("--grid", type=int, default=2**14)
    s.add_argument("--tol", type=float, default=INVARIANCE_TOL)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("random", help="random maps with position-dependent weights")
    s.add_argument("--maps", default="ex2.1/tau1,ex2.1/tau2")
    s.add_argument("--bgr", help="BGR constants a1,a2,...")
    s.add_argument("--densities", help="densities for --bgr (default: exact densities of the maps)")
    s.add_argument("--weights", help="constant weights w1,w2,... or a weighting JSON file")
    s.add_argument("--simulate", action="store_true")
    s.add_argument("--n", type=int, default=10**5)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--x0", default="1/3")
    s.add_argument("--noise", type=float, default=1e-12)
    s.add_argument("--histogram", type=int, default=0, help="write a histogram with this many bins instead of the orbit")
    s.set_defaults(func=cmd_random)

    s = sub.add_parser("check-cex", help="infeasibility of the semi-Markov counterexample")
    s.add_argument("--candidates", type=int, default=100)
    s.add_argument("--seed", type=int, default=20240601)
    s.set_defaults(func=cmd_check_cex)

    s = sub.add_parser("two-valued-search", help="search two-valued selections preserving a density")
    s.add_argument("env")
    s.add_argument("--target", default="uniform")
    s.add_argument("--grid", type=int, default=2**10)
    s.set_defaults(func=cmd_two_valued)

    s = sub.add_parser("claim-audit", help="exact transfer of Lebesgue measure under constant weights")
    s.add_argument("--weights", default="3/4,1/4")
    s.set_defaults(func=cmd_claim_audit)

    s = sub.add_parser("reproduce", help="figure datasets")
    s.add_argument("figure", help=f"one of {', '.join(figures.FIGURES)} or 'all'")
    s.add_argument("--resolution", type=int, default=1025)
    s.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out or os.environ.get(OUT_ENV) or "out")
    try:
        run = Run(args, out)
    except OSError as exc:
        print(f"error: cannot use output directory {out}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        args.func(args, run)
    except NumericalFailure as exc:
        run.manifest["failure"] = str(exc)
        run.finish()
        print(f"numerical check failed: {exc}; report: {exc.report_path}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConstructionError, ConvergenceError, NonInvertibleError) as exc:
        run.manifest["failure"] = str(exc)
        run.finish()
        print(f"numerical check failed: {exc}; manifest: {out / ('manifest-' + args.command + '.json')}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, AcimError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    run.finish()
    return EXIT_OK


__all__ = ["build_parser", "load_cdf", "load_density", "load_envelope", "load_map", "main"]
