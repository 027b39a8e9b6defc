"""Command-line front end.

Every command prints JSON (or CSV for ``sweep``) on stdout.  Exit status is
0 on success, 2 when a solver hit its iteration cap (the best point found is
still printed) and 1 on malformed input, with a diagnostic on stderr.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import classical, quantum, strength
from .errors import BellError, IterationCapExceeded, NoConvergence
from .scenario import ProbabilityLaw, Scenario, add_noise

NAMED = ("chsh", "ghz", "cglmp", "ladder", "ch")
SWEEP_KINDS = ("ladder", "efficiency", "noise", "dimension")
SWEEP_COLUMNS = {
    "ladder": ("rungs", "policy", "divergence_bits"),
    "efficiency": ("eta", "divergence_bits"),
    "noise": ("noise_weight", "divergence_bits"),
    "dimension": ("d", "divergence_maxent_bits", "divergence_bits", "schmidt"),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Malformed command lines exit with status 1 like any other bad input."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.10g}"
    return str(x)


def _dump(obj, out=None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _parse_discount(text: str) -> tuple[float, float]:
    fields = {}
    for part in text.split(","):
        key, sep, value = part.partition("=")
        if not sep:
            raise UsageError(f"--discount expects key=value pairs, got {part!r}")
        fields[key.strip()] = float(value)
    unknown = set(fields) - {"pairs", "acceptance"}
    if unknown:
        raise UsageError(f"unknown --discount keys: {', '.join(sorted(unknown))}")
    return fields.get("pairs", 1.0), fields.get("acceptance", 1.0)


def _schmidt_state(args, d: int, report: dict):
    choice = args.schmidt or "maxent"
    if choice == "maxent":
        return quantum.maximally_entangled(d)
    if choice == "optimize":
        try:
            state, _ = strength.optimize_schmidt(d, args.epsilon, seed=args.seed)
        except NoConvergence as exc:
            state, _ = exc.result
            report["schmidt_converged"] = False
        report["schmidt"] = list(state.coefficients)
        return state
    data = _read_json(choice)
    values = data.get("schmidt", data) if isinstance(data, dict) else data
    return quantum.SchmidtState.normalized(values)


def named_law(args, report: dict) -> ProbabilityLaw:
    """The target law of a named experiment with its default setting distribution."""
    name = args.named
    if name == "chsh":
        return quantum.born_law(quantum.cglmp_model(2))
    if name == "ghz":
        return quantum.born_law(quantum.ghz_model(), quantum.ghz_pi())
    if name == "cglmp":
        if args.d < 2:
            raise UsageError("--d must be at least 2")
        return quantum.born_law(quantum.cglmp_model(args.d, _schmidt_state(args, args.d, report)))
    if name == "ladder":
        a, b, _ = strength.optimize_ladder_angles(args.rungs, "surviving", args.epsilon)
        report["alice_angles"] = a.tolist()
        report["bob_angles"] = b.tolist()
        return strength.ladder_law(args.rungs, a, b, args.policy)
    if name == "ch":
        if args.eta is None:
            raise UsageError("--named ch needs --eta")
        return quantum.with_detection_efficiency(quantum.born_law(quantum.cglmp_model(2)), args.eta)
    raise UsageError(f"unknown named experiment {name!r}")


def _target_law(args, report: dict) -> ProbabilityLaw:
    given = [x for x in (args.named, args.model, args.law) if x]
    if len(given) != 1:
        raise UsageError("give exactly one of --named, --model, --law")
    if args.named:
        return named_law(args, report)
    if args.model:
        m, pi = quantum.model_from_dict(_read_json(args.model))
        return quantum.born_law(m, pi)
    return ProbabilityLaw.from_dict(_read_json(args.law))


def cmd_strength(args) -> int:
    report: dict = {}
    q = _target_law(args, report)
    if args.law_out:
        _dump(q.to_dict(), args.law_out)
    status = 0
    try:
        res = strength.inf_divergence(q, args.epsilon, args.max_iter)
    except IterationCapExceeded as exc:
        res, status = exc.result, 2
        print(f"warning: {exc}", file=sys.stderr)
    if report.get("schmidt_converged") is False:
        status = 2
    report.update(res.to_dict())
    if args.face:
        report["face"] = strength.extract_face(q, res, args.reference).to_dict()
    if args.discount:
        pairs, acceptance = _parse_discount(args.discount)
        report["discounted_bits"] = strength.discounted_strength(res.divergence, pairs, acceptance)
    _dump(report)
    return status


def cmd_check(args) -> int:
    law = ProbabilityLaw.from_dict(_read_json(args.law))
    ineq = classical.BellInequality.from_dict(_read_json(args.inequality))
    if law.scenario != ineq.scenario:
        raise UsageError("law and inequality belong to different scenarios")
    value = classical.evaluate(ineq, law)
    bound, vertex = classical.classical_max(ineq, law.pi)
    _dump({"value": value, "classical_bound": bound, "stated_bound": ineq.bound,
           "maximizing_vertex": vertex.index, "violated": bool(value > bound + args.tol)})
    return 0


def _named_inequality(args) -> classical.BellInequality:
    if args.named == "cglmp":
        return classical.cglmp_inequality(args.d)
    if args.named == "chsh":
        return classical.chsh_inequality()
    if args.named == "ladder":
        return classical.ladder_inequality(args.rungs)
    raise UsageError(f"no named inequality {args.named!r}")


def cmd_canonicalize(args) -> int:
    if bool(args.named) == bool(args.inequality):
        raise UsageError("give an inequality file or --named")
    ineq = _named_inequality(args) if args.named else classical.BellInequality.from_dict(_read_json(args.inequality))
    out = ineq if args.raw else classical.canonicalize(ineq, args.reference)
    _dump(out.to_dict(), args.out)
    return 0


def cmd_vertices(args) -> int:
    sc = Scenario(args.parties, args.settings, args.outcomes)
    classical.check_vertex_cap(sc)
    report: dict = {"scenario": sc.to_dict(), "count": sc.n_vertices}
    if args.list:
        if sc.n_vertices > args.list_cap:
            raise UsageError(f"refusing to list {sc.n_vertices} vertices (cap {args.list_cap})")
        report["vertices"] = [{"index": v.index, "assignment": [list(row) for row in v.assignment]}
                              for v in classical.enumerate_vertices(sc)]
    _dump(report)
    return 0


def _grid(args, lo: float, hi: float) -> np.ndarray:
    start = lo if args.start is None else args.start
    stop = hi if args.stop is None else args.stop
    if not lo <= start <= stop <= hi:
        raise UsageError(f"range must satisfy {lo} <= start <= stop <= {hi}")
    if args.steps < 1:
        raise UsageError("--steps must be positive")
    return np.linspace(start, stop, args.steps) if args.steps > 1 else np.array([start])


def _int_range(args, lo: int, hi: int) -> range:
    start = lo if args.start is None else int(args.start)
    stop = hi if args.stop is None else int(args.stop)
    if not lo <= start <= stop <= hi:
        raise UsageError(f"range must satisfy {lo} <= start <= stop <= {hi}")
    return range(start, stop + 1)


def sweep_rows(args) -> list[tuple]:
    kind = args.kind
    if kind == "ladder":
        rows = []
        for k in _int_range(args, 1, strength.LADDER_MAX_RUNGS):
            a, b, res = strength.optimize_ladder_angles(k, "surviving", args.epsilon)
            rows.append((k, "surviving", res.divergence))
            rows.append((k, "all", strength.inf_divergence(strength.ladder_law(k, a, b, "all"),
                                                           args.epsilon).divergence))
        return rows
    if kind == "dimension":
        rows = []
        for d in _int_range(args, 2, 8):
            state, res = strength.optimize_schmidt(d, args.epsilon, seed=args.seed)
            rows.append((d, strength.maxent_divergence(d, args.epsilon), res.divergence,
                         ";".join(_fmt(c) for c in state.coefficients)))
        return rows
    base = quantum.born_law(quantum.cglmp_model(2))
    if kind == "efficiency":
        return [(eta, strength.inf_divergence(quantum.with_detection_efficiency(base, eta),
                                              args.epsilon).divergence) for eta in _grid(args, 0.0, 1.0)]
    if kind == "noise":
        return [(w, strength.inf_divergence(add_noise(base, w), args.epsilon).divergence)
                for w in _grid(args, 0.0, 1.0)]
    raise UsageError(f"unknown sweep kind {kind!r}")


def cmd_sweep(args) -> int:
    rows = sweep_rows(args)
    lines = [",".join(SWEEP_COLUMNS[args.kind])] + [",".join(_fmt(x) for x in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bellstrength", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--epsilon", type=float, default=strength.EPSILON, help="KKT slack tolerance")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized starts")

    p = sub.add_parser("strength", help="divergence from a law to the classical polytope")
    p.add_argument("--named", choices=NAMED)
    p.add_argument("--model", help="model JSON file")
    p.add_argument("--law", help="law JSON file")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--schmidt", help="maxent, optimize, or a JSON file of coefficients")
    p.add_argument("--rungs", type=int, default=1)
    p.add_argument("--policy", choices=("surviving", "all"), default="surviving")
    p.add_argument("--eta", type=float)
    p.add_argument("--face", action="store_true", help="also report the closest face")
    p.add_argument("--reference", type=int, default=0, help="reference outcome of the canonical face")
    p.add_argument("--discount", help="pairs=N,acceptance=A")
    p.add_argument("--max-iter", type=int, default=strength.MAX_INNER_ITER)
    p.add_argument("--law-out", help="also write the target law to this file")
    common(p)
    p.set_defaults(func=cmd_strength)

    p = sub.add_parser("check", help="evaluate an inequality on a law")
    p.add_argument("law")
    p.add_argument("inequality")
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("sweep", help="CSV table over a parameter range")
    p.add_argument("kind", choices=SWEEP_KINDS)
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--steps", type=int, default=11)
    p.add_argument("--out")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("vertices", help="count or list deterministic vertices")
    p.add_argument("--parties", type=int, default=2)
    p.add_argument("--settings", type=int, default=2)
    p.add_argument("--outcomes", type=int, default=2)
    p.add_argument("--list", action="store_true")
    p.add_argument("--list-cap", type=int, default=1 << 16)
    p.set_defaults(func=cmd_vertices)

    p = sub.add_parser("canonicalize", help="rewrite an inequality in canonical form")
    p.add_argument("inequality", nargs="?")
    p.add_argument("--named", choices=("cglmp", "chsh", "ladder"))
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--rungs", type=int, default=1)
    p.add_argument("--reference", type=int, default=0)
    p.add_argument("--raw", action="store_true", help="write the inequality without rewriting it")
    p.add_argument("--out")
    p.set_defaults(func=cmd_canonicalize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, BellError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
