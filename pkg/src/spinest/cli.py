"""Command-line front end: ``sweep``, ``figure``, ``validate-povm`` and ``estimate``.

Exit codes: 0 success, 2 usage error, 3 validation failure, 4 I/O error.
Failures print one JSON line on stderr.
"""

from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import math
import operator
import sys

import numpy as np

from . import analytic, estimators, povm
from .bloch import directions_for_angle
from .montecarlo import TrialPlan, run_trials

EXIT_USAGE, EXIT_VALIDATION, EXIT_IO = 2, 3, 4
CSV_COLUMNS = ["strategy", "N", "eta", "analytic_error", "mc_error", "mc_stderr", "trials", "seed"]

FIGURES = {
    1: ["sep-unbiased", "joint-unbiased"],
    2: ["sep-biased", "joint-biased"],
    3: ["bayes-joint", "joint-biased"],
}
FIGURE_N = (1, 30)
FIGURE_ETA = "0:pi/2:pi/60"

METHOD_STRATEGY = {
    "mean": "sep-unbiased",
    "shrinkage": "sep-biased",
    "joint-rescaled": "joint-unbiased",
    "joint-biased": "joint-biased",
    "cross-weighted": "cross-weighted",
    "bayes-single": "bayes-single",
    "bayes-joint": "bayes-joint",
}


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE, kind: str = "usage"):
        super().__init__(message)
        self.code = code
        self.kind = kind


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


# -- argument parsing helpers -------------------------------------------------

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def parse_real(text: str) -> float:
    """Parse a real number; ``pi`` and + - * / are allowed (``pi/60``, ``2*pi/3``)."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        raise ValueError

    try:
        return ev(ast.parse(str(text).strip(), mode="eval"))
    except (ValueError, SyntaxError, ZeroDivisionError):
        raise CliError(f"cannot parse number {text!r}") from None


def parse_grid(text, lo: float, hi: float, name: str) -> list[float]:
    """``start:stop:step`` (stop inclusive) or a single value."""
    if isinstance(text, (int, float)):
        parts = [float(text)]
    elif isinstance(text, (list, tuple)):
        parts = [parse_real(p) for p in text]
    else:
        parts = [parse_real(p) for p in str(text).split(":")]
    if len(parts) == 1:
        values = parts
    elif len(parts) == 3:
        start, stop, step = parts
        if step <= 0:
            raise CliError(f"{name} grid step must be > 0")
        if stop < start:
            raise CliError(f"{name} grid stop must be >= start")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        values = [start + k * step for k in range(count)]
    else:
        raise CliError(f"{name} grid must be start:stop:step or a single value")
    # float steps can overshoot an endpoint by an ulp
    values = [min(max(v, lo), hi) if abs(v - min(max(v, lo), hi)) < 1e-12 else v for v in values]
    for v in values:
        if not lo <= v <= hi:
            raise CliError(f"{name} value {v!r} outside [{lo}, {hi}]")
    return values


def parse_n_range(text) -> list[int]:
    if isinstance(text, int):
        lo = hi = text
    elif isinstance(text, (list, tuple)) and len(text) == 2:
        lo, hi = int(text[0]), int(text[1])
    else:
        s = str(text).strip()
        try:
            lo, hi = (int(p) for p in s.split("..")) if ".." in s else (int(s), int(s))
        except ValueError:
            raise CliError(f"cannot parse N range {text!r}; expected lo..hi") from None
    if lo < 1 or hi < lo:
        raise CliError(f"invalid N range {lo}..{hi}")
    return list(range(lo, hi + 1))


def parse_counts(text: str) -> estimators.OutcomeCounts:
    try:
        up, down = (int(p) for p in text.split(","))
    except ValueError:
        raise CliError(f"counts must be 'up,down' integers, got {text!r}") from None
    if up < 0 or down < 0 or up + down == 0:
        raise CliError(f"counts must be non-negative with at least one shot, got {text!r}")
    return estimators.OutcomeCounts((up,), (up + down,))


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


# -- sweep --------------------------------------------------------------------


def _sweep_settings(args) -> dict:
    cfg = {}
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise CliError(f"cannot read config: {exc}", EXIT_IO, "io") from None
        except json.JSONDecodeError as exc:
            raise CliError(f"config is not valid JSON: {exc}") from None
    keys = ("strategies", "n", "eta", "adotb", "n1", "trials", "seed", "out", "workers")
    merged = {k: getattr(args, k) if getattr(args, k) is not None else cfg.get(k) for k in keys}
    strategies = merged["strategies"]
    if isinstance(strategies, str):
        strategies = [s.strip() for s in strategies.split(",") if s.strip()]
    if not strategies:
        raise CliError("at least one strategy is required")
    for s in strategies:
        if s not in analytic.STRATEGIES:
            raise CliError(f"unknown strategy {s!r}; choose from {', '.join(analytic.STRATEGIES)}")
    if merged["n"] is None:
        raise CliError("--n is required")
    if merged["out"] is None:
        raise CliError("--out is required")
    if merged["eta"] is not None and merged["adotb"] is not None:
        raise CliError("give either an eta grid or an a.b grid, not both")
    trials = int(merged["trials"] or 0)
    if trials < 0:
        raise CliError("trials must be >= 0")
    return {
        "strategies": strategies,
        "ns": parse_n_range(merged["n"]),
        "eta": merged["eta"],
        "adotb": merged["adotb"],
        "n1": None if merged["n1"] is None else int(merged["n1"]),
        "trials": trials,
        "seed": int(merged["seed"] or 0),
        "out": merged["out"],
        "workers": int(merged["workers"] or 1),
    }


def sweep_rows(settings: dict):
    """Yield CSV rows (dicts) for every (strategy, N, angle) in the settings."""
    if settings["adotb"] is not None:
        angles = [math.acos(c) for c in parse_grid(settings["adotb"], -1.0, 1.0, "a.b")]
    elif settings["eta"] is not None:
        angles = parse_grid(settings["eta"], 0.0, math.pi, "eta")
    elif any(s in analytic.TWO_OBSERVABLE for s in settings["strategies"]):
        raise CliError("two-observable strategies need --eta or --adotb")
    else:
        angles = []
    trials, seed = settings["trials"], settings["seed"]
    for strategy in settings["strategies"]:
        three = strategy in analytic.THREE_OBSERVABLE
        n1 = settings["n1"] if strategy in ("sep-unbiased-split", "sep-biased") else None
        if strategy == "sep-unbiased-split" and n1 is None:
            raise CliError("sep-unbiased-split needs --n1")
        for n in settings["ns"]:
            if n1 is not None and not 1 <= n1 <= 2 * n - 1:
                raise CliError(f"--n1={n1} invalid for N={n}; need 1 <= N1 <= 2N-1")
            for eta in [None] if three else angles:
                if three:
                    an = analytic.three_observable_error(strategy, n)
                else:
                    q = analytic.ErrorQuery(strategy, n, eta=eta, adotb=math.cos(eta), n1=n1)
                    an = analytic.two_observable_error(q)
                mc = se = None
                if trials > 0:
                    plan = TrialPlan(strategy, n, trials, seed, eta=eta, n1=n1, workers=settings["workers"])
                    rep = run_trials(plan)
                    mc, se = rep.empirical_error, rep.standard_error
                yield {
                    "strategy": strategy,
                    "N": str(n),
                    "eta": _fmt(eta),
                    "analytic_error": _fmt(an),
                    "mc_error": _fmt(mc),
                    "mc_stderr": _fmt(se),
                    "trials": str(trials),
                    "seed": str(seed),
                }


def write_csv(rows, out: str) -> None:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    try:
        if out == "-":
            sys.stdout.write(buf.getvalue())
        else:
            with open(out, "w", newline="") as fh:
                fh.write(buf.getvalue())
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc}", EXIT_IO, "io") from None


def cmd_sweep(args) -> int:
    settings = _sweep_settings(args)
    write_csv(list(sweep_rows(settings)), settings["out"])
    return 0


def cmd_figure(args) -> int:
    settings = {
        "strategies": FIGURES[args.id],
        "ns": list(range(FIGURE_N[0], FIGURE_N[1] + 1)),
        "eta": FIGURE_ETA,
        "adotb": None,
        "n1": None,
        "trials": args.trials,
        "seed": args.seed,
        "out": args.out,
        "workers": 1,
    }
    write_csv(list(sweep_rows(settings)), args.out)
    return 0


# -- validate-povm ------------------------------------------------------------


def validate_report(eta: float | None = None, three: bool = False, alpha=None, beta=None) -> dict:
    if three:
        m = povm.joint_povm_three()
        rep = povm.validate_povm(m)
        axes = np.eye(3)
        rep.sharpnesses = [povm.extract_marginal_sharpness(m, k, axes[k]) for k in range(3)]
        steer = povm.steering_bound_check(povm.SharpnessTriple(*rep.sharpnesses))
        passed = rep.passed and steer["admissible"]
        return {"preset": "three", "passed": passed, "validity": rep.to_dict(), "steering": steer}

    if eta is None or not 0.0 <= eta <= math.pi:
        raise CliError(f"eta must lie in [0, pi], got {eta!r}")
    opt = povm.optimal_sharpness_pair(eta)
    alpha = opt.alpha if alpha is None else alpha
    beta = opt.beta if beta is None else beta
    a, b = directions_for_angle(eta)
    residual = povm.saturation_residual(a, b, alpha, beta)
    out = {
        "preset": "eta",
        "eta": eta,
        "alpha": alpha,
        "beta": beta,
        "saturation_residual": residual,
        "validity": None,
        "construction_error": None,
        "steering": None,
    }
    try:
        m = povm.joint_povm_two(a, b, alpha, beta)
    except ValueError as exc:
        out["construction_error"] = str(exc)
        out["passed"] = False
        return out
    rep = povm.validate_povm(m)
    rep.sharpnesses = [povm.extract_marginal_sharpness(m, 0, a), povm.extract_marginal_sharpness(m, 1, b)]
    out["validity"] = rep.to_dict()
    out["passed"] = rep.passed
    return out


def cmd_validate(args) -> int:
    if args.three and (args.alpha is not None or args.beta is not None):
        raise CliError("--alpha/--beta apply only with --eta")
    eta = None if args.eta is None else parse_real(args.eta)
    report = validate_report(eta=eta, three=args.three, alpha=args.alpha, beta=args.beta)
    print(json.dumps(report))
    return 0 if report["passed"] else EXIT_VALIDATION


# -- estimate -----------------------------------------------------------------


def estimate_report(counts_a, counts_b=None, adotb=None, method="mean", alpha=None, eta=None, node_count=None) -> dict:
    if method not in estimators.KINDS:
        raise CliError(f"unknown method {method!r}; choose from {', '.join(estimators.KINDS)}")
    if adotb is not None and not -1.0 <= adotb <= 1.0:
        raise CliError(f"a.b must lie in [-1, 1], got {adotb!r}")
    if method in ("joint-rescaled", "joint-biased") and alpha is None:
        if eta is None and adotb is not None:
            eta = math.acos(adotb)
        if eta is None:
            raise CliError(f"{method} needs --alpha, --eta or --adotb")
        alpha = povm.optimal_sharpness_pair(eta).alpha
    na = counts_a.shots[0]
    nb = counts_b.shots[0] if counts_b is not None else None
    if method in ("cross-weighted", "bayes-joint"):
        if counts_b is None:
            raise CliError(f"{method} needs --counts-b")
        if na != nb:
            raise CliError(f"{method} needs equal shots on both observables, got {na} and {nb}")
    try:
        spec = estimators.EstimatorSpec(method, alpha=alpha, adotb=adotb, node_count=node_count)
        est_a, est_b = estimators.estimate(spec, counts_a, counts_b)
    except ValueError as exc:
        raise CliError(str(exc)) from None

    expected, scope = _expected_error(method, na, nb, alpha, adotb)
    return {
        "method": method,
        "est_a": est_a,
        "est_b": est_b,
        "shots_a": na,
        "shots_b": nb,
        "alpha": alpha,
        "adotb": adotb,
        "expected_error": expected,
        "expected_error_scope": scope,
    }


def _expected_error(method, na, nb, alpha, adotb):
    """Analytic averaged error for the method at these shot counts."""
    if method in ("joint-rescaled", "joint-biased"):
        if na % 2 or (nb is not None and nb != na):
            return None, None
        n = na // 2
        f = analytic.joint_unbiased if method == "joint-rescaled" else analytic.joint_biased
        return f(n, alpha), "total"
    if nb is None:
        # one observable on its own: half of the two-observable total at N = na
        per = {"mean": analytic.separate_unbiased, "shrinkage": analytic.separate_biased,
               "bayes-single": analytic.separate_biased}[method](na) / 2.0
        return per, "per-observable"
    if na != nb:
        if method == "mean":
            return analytic.separate_unbiased_split((na + nb) // 2, na) if (na + nb) % 2 == 0 else None, "total"
        if method in ("shrinkage", "bayes-single"):
            return (2.0 / (3 * (na + 2)) + 2.0 / (3 * (nb + 2))), "total"
        return None, None
    strategy = METHOD_STRATEGY[method]
    q = analytic.ErrorQuery(strategy, na, adotb=0.0 if adotb is None else adotb)
    return analytic.two_observable_error(q), "total"


def cmd_estimate(args) -> int:
    ca = parse_counts(args.counts_a)
    cb = parse_counts(args.counts_b) if args.counts_b else None
    eta = None if args.eta is None else parse_real(args.eta)
    report = estimate_report(ca, cb, args.adotb, args.method, args.alpha, eta, args.node_count)
    print(json.dumps(report))
    return 0


# -- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="spinest", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="analytic (and optionally Monte Carlo) errors over a grid, as CSV")
    sw.add_argument("--strategies", help="comma-separated strategy ids")
    sw.add_argument("--n", help="N range lo..hi (inclusive)")
    sw.add_argument("--eta", help="angle grid start:stop:step in radians; 'pi' allowed")
    sw.add_argument("--adotb", help="a.b grid start:stop:step")
    sw.add_argument("--n1", type=int, help="copies spent on A for split strategies")
    sw.add_argument("--trials", type=int, help="Monte Carlo trials per row (0 = analytic only)")
    sw.add_argument("--seed", type=int)
    sw.add_argument("--workers", type=int)
    sw.add_argument("--out", help="output CSV path ('-' for stdout)")
    sw.add_argument("--config", help="JSON file with the same keys; flags override it")
    sw.set_defaults(func=cmd_sweep)

    fg = sub.add_parser("figure", help="preset grids behind the three published figures")
    fg.add_argument("--id", type=int, choices=sorted(FIGURES), required=True)
    fg.add_argument("--out", required=True)
    fg.add_argument("--trials", type=int, default=0)
    fg.add_argument("--seed", type=int, default=0)
    fg.set_defaults(func=cmd_figure)

    vp = sub.add_parser("validate-povm", help="check a joint POM and print a JSON report")
    g = vp.add_mutually_exclusive_group(required=True)
    g.add_argument("--eta", help="angle between the two spin axes, radians")
    g.add_argument("--three", action="store_true", help="joint x/y/z measurement")
    vp.add_argument("--alpha", type=float)
    vp.add_argument("--beta", type=float)
    vp.set_defaults(func=cmd_validate)

    es = sub.add_parser("estimate", help="estimate expectation values from observed counts")
    es.add_argument("--counts-a", required=True, help="up,down")
    es.add_argument("--counts-b", help="up,down")
    es.add_argument("--adotb", type=float)
    es.add_argument("--method", required=True, choices=estimators.KINDS)
    es.add_argument("--alpha", type=float, help="sharpness for joint methods")
    es.add_argument("--eta", help="axis angle for joint methods (sets the optimal alpha)")
    es.add_argument("--node-count", type=int)
    es.set_defaults(func=cmd_estimate)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except CliError as exc:
        _fail(exc.kind, str(exc), exc.code)
        return exc.code
    except OSError as exc:
        _fail("io", str(exc), EXIT_IO)
        return EXIT_IO


def _fail(kind: str, message: str, code: int) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code}) + "\n")


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
