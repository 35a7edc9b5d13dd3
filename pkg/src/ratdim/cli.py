"""Command line entry point.

Every subcommand produces a CommandReport: a JSON object with the command
name, an overall status, a list of named checks and a timing field.  Numbers
inside reports are exact rational strings.  Exit status is 0 when no check
failed, 1 when one did, and 2 for usage or input errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from fractions import Fraction
from importlib import resources
from typing import Callable, Optional, Sequence

import jsonschema

from . import kms
from .interpolation import NotSemiBoundedError, converse_witness, interpolate_semibounded
from .laurent import (
    ClosedSetR,
    Interval,
    LaurentPoly,
    Point,
    RayAbove,
    RayBelow,
    closed_set_from_json,
    closed_set_to_json,
    cone_member,
    laurent_from_json,
    laurent_to_json,
)
from .lattice import subgroup_membership
from .ordered import (
    PreconditionError,
    compare_orders,
    coordinatewise_lattice,
    coprime_rip_counterexample,
    dimension_drop_k0,
    integers,
    integers_with_threshold,
    is_unperforated,
    matrix_dimension_range_level,
    ordered_group_from_json,
    riesz_interpolate_fg,
    same_group,
    tensor_localize,
)
from .supernatural import SupernaturalNumber, format_rational, parse_rational

__all__ = ["run_command", "main", "CommandReport", "InputError", "report_schema", "validate_report"]

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class InputError(ValueError):
    """Malformed input file or arguments."""


class _UsageExit(Exception):
    def __init__(self, code: int):
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _UsageExit(EXIT_USAGE)

    def exit(self, status=0, message=None):
        if message:
            print(message, file=sys.stderr, end="")
        raise _UsageExit(status)


# -- reports ---------------------------------------------------------------------------

def _fmt(v) -> str:
    return format_rational(v)


def _vec_str(v) -> str:
    return "(" + ", ".join(_fmt(x) for x in v) + ")"


class CommandReport:
    """Accumulates checks; status follows from their verdicts."""

    def __init__(self, command: str):
        self.command = command
        self.checks: list[dict] = []
        self.data: dict = {}
        self._t0 = time.perf_counter()
        self.seconds: Optional[float] = None

    def check(self, name: str, verdict, detail: str = "") -> None:
        if verdict is True:
            verdict = "passed"
        elif verdict is False:
            verdict = "failed"
        elif verdict is None:
            verdict = "unknown"
        self.checks.append({"name": name, "verdict": verdict, "detail": detail})

    @property
    def status(self) -> str:
        verdicts = {c["verdict"] for c in self.checks}
        if "failed" in verdicts:
            return "failed"
        if "unknown" in verdicts:
            return "unknown"
        return "ok"

    def to_json(self) -> dict:
        secs = self.seconds if self.seconds is not None else time.perf_counter() - self._t0
        out = {
            "command": self.command,
            "status": self.status,
            "checks": self.checks,
            "timing": {"seconds": f"{secs:.3f}"},
        }
        if self.data:
            out["data"] = self.data
        return out


def report_schema() -> dict:
    return json.loads(resources.files("ratdim").joinpath("report_schema.json").read_text())


def validate_report(obj: dict) -> None:
    jsonschema.validate(obj, report_schema(), cls=jsonschema.Draft202012Validator)


# -- input helpers ---------------------------------------------------------------------

def _load(path: Optional[str]) -> dict:
    if path is None:
        raise InputError("--input is required for this command")
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}") from None
    if not isinstance(obj, dict):
        raise InputError(f"{path}: expected a JSON object")
    return obj


def _vector(obj) -> tuple[Fraction, ...]:
    if not isinstance(obj, list):
        raise InputError("vectors are lists of rational strings")
    return tuple(parse_rational(x) for x in obj)


def _group(obj: dict):
    return ordered_group_from_json(obj["group"] if "group" in obj else obj)


# -- subcommands -----------------------------------------------------------------------

def _cmd_interpolate(args, rep: CommandReport) -> None:
    obj = _load(args.input)
    F = closed_set_from_json(obj["F"])
    ps = [laurent_from_json(obj[k]) for k in ("p0", "p1")]
    qs = [laurent_from_json(obj[k]) for k in ("q0", "q1")]
    try:
        a = interpolate_semibounded(F, ps[0], ps[1], qs[0], qs[1])
    except (PreconditionError, NotSemiBoundedError) as exc:
        rep.check("precondition", False, str(exc))
        return
    rep.data["a"] = laurent_to_json(a)
    rep.data["F"] = closed_set_to_json(F)
    for i, p in enumerate(ps):
        rep.check(f"p{i} <= a", cone_member(a - p, F), str(a - p))
    for j, q in enumerate(qs):
        rep.check(f"a <= q{j}", cone_member(q - a, F), str(q - a))


def _cmd_check_rip(args, rep: CommandReport) -> None:
    obj = _load(args.input)
    G = _group(obj)
    window = args.window or int(obj.get("window", 10))
    pts = [_vector(obj[k]) for k in ("p0", "p1", "q0", "q1")]
    try:
        a = riesz_interpolate_fg(G, *pts, window=window)
    except PreconditionError as exc:
        rep.check("precondition", False, str(exc))
        return
    rep.data["window"] = window
    rep.data["a"] = None if a is None else [_fmt(x) for x in a]
    rep.check("interpolant found", True if a is not None else None,
              _vec_str(a) if a is not None else f"none among window {window} elements")


def _cmd_check_unperforated(args, rep: CommandReport) -> None:
    obj = _load(args.input)
    G = _group(obj)
    window = args.window or int(obj.get("window", 10))
    v = is_unperforated(G, window)
    rep.data["verdict"] = v.kind
    if v.kind == "false_with_witness":
        g, n = v.witness
        rep.data["witness"] = {"g": [_fmt(x) for x in g], "n": n}
        rep.check("unperforated", False, f"{n} * {_vec_str(g)} >= 0 but {_vec_str(g)} is not")
    elif v.kind == "true":
        rep.check("unperforated", True, "polyhedral cone on a torsion free group")
    else:
        rep.check("unperforated", True, f"no witness among window {window} elements")


def _cmd_dimension_drop(args, rep: CommandReport) -> None:
    obj = _load(args.input)
    G = _group(obj)
    r = dimension_drop_k0(G, args.window or int(obj.get("window", 4)))
    for name, ok, detail in r.checks:
        rep.check(name, ok, detail)
    if r.intersection is not None:
        rep.data["intersection_generators"] = [[_fmt(x) for x in g] for g in r.intersection.generators]


def _cmd_matrix_range(args, rep: CommandReport) -> None:
    obj = _load(args.input)
    G = _group(obj)
    u = _vector(obj["u"])
    n = int(obj.get("n", 3))
    window = args.window or int(obj.get("window", 6))
    levels = []
    for level in range(1, n + 1):
        try:
            levels.append(matrix_dimension_range_level(G, u, level, window))
        except PreconditionError as exc:
            rep.check("u is positive", False, str(exc))
            return
    rep.data["levels"] = [[_vec_str(g) for g in lv] for lv in levels]
    for i in range(len(levels) - 1):
        rep.check(f"level {i + 1} inside level {i + 2}", set(levels[i]) <= set(levels[i + 1]),
                  f"{len(levels[i])} and {len(levels[i + 1])} elements")
    rep.check("u in level 1", u in set(levels[0]) if levels else False, _vec_str(u))


def _bundle_and_family(obj: dict):
    B = kms.bundle_from_json(obj)
    family = None
    if "family" in obj:
        family = [kms.element_from_json(e) for e in obj["family"]]
    return B, family


def _cmd_kms_verify_kernel(args, rep: CommandReport) -> None:
    obj = _load(args.input)
    B, family = _bundle_and_family(obj)
    window = args.window or int(obj.get("window", 4))
    r = kms.verify_kernel_image(family, B, window)
    rep.data.update({"window": window, "members": r.members, "kernel_members": r.kernel_members,
                     "candidates": r.candidates, "unresolved": r.unresolved,
                     "max_preimage_coefficient": max((c for _, c in r.resolved), default=0)})
    rep.check("image inside kernel (exact, Z-span)", r.subset_ok,
              ", ".join(r.subset_failures) or f"{r.members} members")
    rep.check("kernel inside image (truncation)", not r.failures and not r.unresolved,
              f"{len(r.resolved)} of {r.kernel_members} resolved"
              + (f"; unresolved {', '.join(r.unresolved)}" if r.unresolved else "")
              + (f"; failed {', '.join(r.failures)}" if r.failures else ""))


def _cmd_kms_k0(args, rep: CommandReport) -> None:
    obj = _load(args.input)
    B, family = _bundle_and_family(obj)
    window = args.window or int(obj.get("window", 4))
    free, tors, cls, runs = kms.k0_crossed_product(family, B, window)
    rep.data["runs"] = [{"window": r.window, "free_rank": r.free_rank, "torsion": r.torsion,
                         "class_of_u": r.class_of_u, "module_rank": r.module_rank} for r in runs]
    rep.check("cokernel is Z with [u] = 1", (free, tors, cls) == (1, [], 1),
              f"free rank {free}, torsion {tors}, class of u {cls}")
    rep.check("stable under window + 1", runs[0].answer == runs[1].answer,
              f"windows {runs[0].window} and {runs[1].window}")


def _cmd_kms_states(args, rep: CommandReport) -> None:
    obj = _load(args.input)
    B = kms.bundle_from_json(obj)
    e = kms.element_from_json(obj["element"])
    betas = [parse_rational(b) for b in obj.get("betas", ["0"])]
    se = kms.apply_sigma(e)
    rows = []
    for b in betas:
        v = kms.evaluate_state(e, b, B)
        lo, hi = v.enclose()
        rows.append((b, lo, hi))
        w = kms.evaluate_state(se, b, B)
        rep.check(f"covariance at beta = {_fmt(b)}", w == v.times_exp(-1), str(w))
        if b == 0:
            rep.check("state at 0 equals Sigma_0", v.exact() == kms.sigma0(e), _fmt(v.exact()))
    verdict = kms.element_positive(e, B, args.depth or 40)
    rep.data["positivity"] = verdict.kind
    if verdict.positive:
        for b, lo, _ in rows:
            rep.check(f"positive state at beta = {_fmt(b)}", lo > 0, _fmt(lo))
    rep.data["rows"] = [[_fmt(b), _fmt(lo), _fmt(hi)] for b, lo, hi in rows]
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["beta", "lower", "upper"])
            for b, lo, hi in rows:
                w.writerow([_fmt(b), _fmt(lo), _fmt(hi)])


def _cmd_converse(args, rep: CommandReport) -> None:
    for N in args.n or [2, 5, 10]:
        r = converse_witness(N)
        rep.check(f"N = {N}: no constant fits", r.infeasible,
                  f"p1 forces c >= {_fmt(r.lower_bound)} at t = {_fmt(r.argmax_t)}, q0 forces c <= {_fmt(r.upper_bound)}")
        for name, ok in r.checks.items():
            rep.check(f"N = {N}: {name}", bool(ok))
        rep.data[f"N={N}"] = {"lower_bound": _fmt(r.lower_bound), "argmax_t": _fmt(r.argmax_t),
                              "upper_bound": _fmt(r.upper_bound), "p1": laurent_to_json(r.p1)}


def _remark_checks(p: int, q: int, window: int, rep: CommandReport) -> None:
    G, pts = coprime_rip_counterexample(p)
    args4 = (pts["a0"], pts["a1"], pts["b0"], pts["b1"])
    Gq = tensor_localize(G, SupernaturalNumber.infinite_power(q))
    Gu = tensor_localize(G, SupernaturalNumber.universal_number())
    aq = riesz_interpolate_fg(Gq, *args4, window=window)
    au = riesz_interpolate_fg(Gu, *args4, window=window)
    # in (Q^2, coordinatewise) the interpolants form the box [max(a0, a1), min(b0, b1)]
    lo = tuple(max(a, b) for a, b in zip(pts["a0"], pts["a1"]))
    hi = tuple(min(a, b) for a, b in zip(pts["b0"], pts["b1"]))
    target = lo
    rep.check("the only rational interpolant is (1/p, 0)", lo == hi == (Fraction(1, p), Fraction(0)),
              f"box {_vec_str(lo)} to {_vec_str(hi)}")
    rep.check(f"no interpolant in G (x) D_{q}^inf within window {window}", aq is None,
              "a0, a1, b0, b1 = " + ", ".join(_vec_str(v) for v in args4) if aq is None else _vec_str(aq))
    rep.check("interpolant in G (x) Q", au == target, "none" if au is None else _vec_str(au))
    outside = not subgroup_membership(target, Gq.carrier)
    rep.check(f"{_vec_str(target)} outside the D_{q}^inf-span of a1, b1", outside, "")
    rep.data["remark"] = {"p": p, "q": q, "a0": [_fmt(x) for x in pts["a0"]], "a1": [_fmt(x) for x in pts["a1"]],
                          "b0": [_fmt(x) for x in pts["b0"]], "b1": [_fmt(x) for x in pts["b1"]],
                          "rational_interpolant": None if au is None else [_fmt(x) for x in au]}


def _cmd_remark33(args, rep: CommandReport) -> None:
    if args.p < 2 or args.q < 2:
        raise InputError("--p and --q must be at least 2")
    if args.p % args.q == 0 or args.q % args.p == 0:
        raise InputError("--p and --q must be coprime")
    _remark_checks(args.p, args.q, args.window or 20, rep)


def _suite_cases() -> list[tuple[str, Callable[[CommandReport], None]]]:
    """The worked examples, each as a function filling checks into a report."""
    cases: list[tuple[str, Callable[[CommandReport], None]]] = []

    def remark(rep):
        _remark_checks(2, 3, 20, rep)
    cases.append(("remark", remark))

    def converse(rep):
        ns = argparse.Namespace(n=[2, 5, 10])
        _cmd_converse(ns, rep)
    cases.append(("converse", converse))

    def thresholds(rep):
        for n in (2, 3, 5):
            v = is_unperforated(integers_with_threshold(n))
            rep.check(f"(Z, S_{n}) is perforated at (1, {n})",
                      v.kind == "false_with_witness" and v.witness == ((Fraction(1),), n), repr(v.witness))
        two = SupernaturalNumber.infinite_power(2)
        ok, bad = compare_orders(tensor_localize(integers_with_threshold(2), two), integers(two), 10)
        rep.check("(Z, S_2) (x) D_2^inf = (D_2^inf, D_2^inf+)", ok, "" if ok else _vec_str(bad))
    cases.append(("thresholds", thresholds))

    def dimension_drop(rep):
        G3, _ = coprime_rip_counterexample(2)
        for name, G in (("Z", integers()), ("Z^2", coordinatewise_lattice(2)), ("remark group", G3)):
            r = dimension_drop_k0(G)
            rep.check(f"{name}: order isomorphic to the intersection", r.ok,
                      "; ".join(n for n, ok, _ in r.checks if not ok))
            rep.check(f"{name}: same generators", r.intersection is not None and same_group(r.intersection, G.carrier))
    cases.append(("dimension_drop", dimension_drop))

    def interpolation(rep):
        F = ClosedSetR.of(RayAbove(0))
        zero, one, t = LaurentPoly(), LaurentPoly.const(1), LaurentPoly.monomial(1)
        examples = [
            ("0, 0 <= 1, e^x", F, zero, zero, one, t),
            ("-1, e^x - 2 <= e^x, e^x + 1", F, -one, t - 2, t, t + 1),
            ("on (-inf, 3]", ClosedSetR.of(RayBelow(3)), zero, -one, one, t),
            ("on [-2,-1] u {0} u [1,2]", ClosedSetR.of(Interval(-2, -1), Point(0), Interval(1, 2)),
             t - 3, -one, t + 1, one * 5),
        ]
        for name, F_, p0, p1, q0, q1 in examples:
            a = interpolate_semibounded(F_, p0, p1, q0, q1)
            ok = all(cone_member(a - p, F_) for p in (p0, p1)) and all(cone_member(q - a, F_) for q in (q0, q1))
            rep.check(f"interpolant for {name}", ok, str(a))
    cases.append(("interpolation", interpolation))

    def kernel(rep):
        B = kms.BundleSpec(ClosedSetR.of(RayAbove(0)))
        r = kms.verify_kernel_image(None, B, 4)
        rep.check("[0, inf) window 4: image inside kernel", r.subset_ok)
        rep.check("[0, inf) window 4: kernel inside image", r.ok and not r.unresolved,
                  f"{len(r.resolved)} of {r.kernel_members} resolved")
    cases.append(("kms_kernel", kernel))

    def k0(rep):
        for name, F in (("[0, inf)", ClosedSetR.of(RayAbove(0))),
                        ("(-inf, 0] u [1, 2]", ClosedSetR.of(RayBelow(0), Interval(1, 2)))):
            free, tors, cls, runs = kms.k0_crossed_product(None, kms.BundleSpec(F), 4)
            rep.check(f"{name}: K0 = Z with [u] = 1", (free, tors, cls) == (1, [], 1),
                      f"{free}, {tors}, {cls}")
            rep.check(f"{name}: windows 4 and 5 agree", runs[0].answer == runs[1].answer)
    cases.append(("kms_k0", k0))

    def states(rep):
        B = kms.BundleSpec(ClosedSetR.of(RayAbove(0)))
        e = kms.make_gz_element(B, LaurentPoly(), {1: 2, -1: 1}, LaurentPoly.from_dict({1: 2, 0: 1}), 1)
        se = kms.apply_sigma(e)
        for b in (Fraction(0), Fraction(1, 3), Fraction(2)):
            v = kms.evaluate_state(e, b, B)
            rep.check(f"covariance at beta = {_fmt(b)}", kms.evaluate_state(se, b, B) == v.times_exp(-1), str(v))
        rep.check("state at 0 equals Sigma_0", kms.evaluate_state(e, 0, B).exact() == kms.sigma0(e))
        u = kms.order_unit()
        rep.check("u is sigma-simple", kms.sigma_simplicity_probe(u, B) == (0, 2))
    cases.append(("kms_states", states))
    return cases


def _cmd_suite(args, rep: CommandReport) -> None:
    for prefix, fn in _suite_cases():
        sub = CommandReport(prefix)
        try:
            fn(sub)
        except Exception as exc:  # a crash inside one example is a failed check, not a crash
            sub.check("completed", False, f"{type(exc).__name__}: {exc}")
        for c in sub.checks:
            rep.check(f"{prefix}: {c['name']}", c["verdict"], c["detail"])


# -- parser and dispatch -----------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--input", metavar="FILE.json", help="input specification")
    common.add_argument("--output", metavar="FILE.json", help="write the report here instead of stdout")
    common.add_argument("--window", type=int, help="search or truncation window")
    common.add_argument("--depth", type=int, help="bisection depth for mixed positivity")
    common.add_argument("--csv", metavar="FILE", help="CSV output (kms states)")

    ap = _Parser(prog="ratdim", description="Exact checks for rational dimension groups and KMS bundle truncations.")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    sub.add_parser("interpolate", parents=[common], help="Riesz interpolation of Laurent polynomials over F")
    sub.add_parser("check-rip", parents=[common], help="windowed Riesz interpolation in an ordered group")
    sub.add_parser("check-unperforated", parents=[common], help="search for a perforation witness")
    sub.add_parser("dimension-drop-k0", parents=[common], help="K0 of the dimension drop construction")
    sub.add_parser("matrix-dimension-range", parents=[common], help="levels {0 <= g <= n u}")
    k = sub.add_parser("kms", help="KMS bundle truncations")
    ks = k.add_subparsers(dest="kms_command", metavar="KMS_COMMAND", parser_class=_Parser)
    ks.required = True
    ks.add_parser("verify-kernel", parents=[common], help="(id - sigma)(G) = ker(Sigma_0) on a truncation")
    ks.add_parser("k0", parents=[common], help="cokernel of id - sigma")
    ks.add_parser("states", parents=[common], help="state evaluations, with --csv")
    c = sub.add_parser("verify-lemma21-converse", parents=[common], help="the bounded-set counterexample family")
    c.add_argument("--n", type=int, action="append", help="N (repeatable; default 2, 5, 10)")
    r = sub.add_parser("verify-remark33", parents=[common], help="RIP failure after tensoring with D_q^inf")
    r.add_argument("--p", type=int, default=2)
    r.add_argument("--q", type=int, default=3)
    sub.add_parser("suite", parents=[common], help="run every shipped example")
    return ap


_DISPATCH = {
    "interpolate": _cmd_interpolate,
    "check-rip": _cmd_check_rip,
    "check-unperforated": _cmd_check_unperforated,
    "dimension-drop-k0": _cmd_dimension_drop,
    "matrix-dimension-range": _cmd_matrix_range,
    "kms verify-kernel": _cmd_kms_verify_kernel,
    "kms k0": _cmd_kms_k0,
    "kms states": _cmd_kms_states,
    "verify-lemma21-converse": _cmd_converse,
    "verify-remark33": _cmd_remark33,
    "suite": _cmd_suite,
}


def run_command(argv: Sequence[str]) -> int:
    """Parse argv, run the subcommand, emit the report; returns 0, 1 or 2."""
    try:
        args = _build_parser().parse_args(list(argv))
    except _UsageExit as exc:
        return exc.code
    name = args.command if args.command != "kms" else f"kms {args.kms_command}"
    rep = CommandReport(name)
    try:
        _DISPATCH[name](args, rep)
    except (InputError, KeyError, TypeError, ValueError) as exc:
        msg = str(exc) if not isinstance(exc, KeyError) else f"missing field {exc}"
        print(f"ratdim {name}: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # keep exit codes exhaustive
        print(f"ratdim {name}: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED
    out = rep.to_json()
    validate_report(out)
    text = json.dumps(out, indent=2) + "\n"
    if args.output:
        try:
            with open(args.output, "w") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"ratdim {name}: cannot write {args.output}: {exc.strerror}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(text)
    return EXIT_FAILED if rep.status == "failed" else EXIT_OK


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))
