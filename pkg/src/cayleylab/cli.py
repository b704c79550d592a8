"""Command-line front end.

Group specs use a small grammar: ``F<k>``, ``Z^<d>``, ``Z/<m>``, infix ``*``
(free product) binding tighter than infix ``x`` (direct product), and
parentheses. Exit codes: 1 bad arguments, 2 size cap, 3 internal invariant.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from fractions import Fraction
from typing import Optional

import sympy

from . import isoperimetry, spectral
from .bounds import BoundReport, Endpoint
from .cayley import DEFAULT_MAX_VERTICES, ball_sizes, build_ball, edge_list_lines, growth_estimate, sphere_sizes
from .errors import InvariantError, ParseError, SizeLimitError, ValidationError
from .gensets import GenSet, lift_generating_set, power_set, standard_genset
from .groups import Cyclic, DirectProduct, FreeAbelian, FreeGroup, FreeProduct, GroupSpec

# percolation (numba) and criteria are imported inside the commands that use
# them, so quick commands such as ``ball`` do not pay their start-up cost.

EXIT_USAGE = 1
EXIT_SIZE = 2
EXIT_INVARIANT = 3

_TOKEN = re.compile(r"\s*(?:(?P<free>F(?P<k>\d+))|(?P<ab>Z\^(?P<d>\d+))|(?P<cyc>Z/(?P<m>\d+))"
                    r"|(?P<op>[x*()]))")


def _offset(text: str, i: int) -> int:
    return len(text[:i].encode("utf-8"))


def _tokenize(text: str) -> list:
    tokens = []
    i = 0
    while i < len(text):
        if text[i].isspace():
            i += 1
            continue
        m = _TOKEN.match(text, i)
        if m is None:
            rest = text[i:]
            if rest.startswith("Z"):
                raise ParseError("bare Z is not supported; write Z^1 or Z/<m>", _offset(text, i), text)
            word = re.match(r"[A-Za-z_]\w*", rest)
            if word:
                raise ParseError(f"unsupported group construct {word.group(0)!r}", _offset(text, i), text)
            raise ParseError(f"unexpected character {rest[0]!r}", _offset(text, i), text)
        start = m.start(m.lastgroup) if m.lastgroup else i
        if m.group("free"):
            tokens.append(("atom", FreeGroup, int(m.group("k")), start))
        elif m.group("ab"):
            tokens.append(("atom", FreeAbelian, int(m.group("d")), start))
        elif m.group("cyc"):
            tokens.append(("atom", Cyclic, int(m.group("m")), start))
        else:
            tokens.append((m.group("op"), None, None, start))
        i = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def where(self) -> int:
        tok = self.peek()
        return _offset(self.text, tok[3] if tok else len(self.text))

    def fail(self, message: str):
        raise ParseError(message, self.where(), self.text)

    def direct(self) -> GroupSpec:
        factors = [self.free()]
        while self.peek() and self.peek()[0] == "x":
            self.pos += 1
            factors.append(self.free())
        return factors[0] if len(factors) == 1 else self.build(DirectProduct, factors)

    def free(self) -> GroupSpec:
        factors = [self.atom()]
        while self.peek() and self.peek()[0] == "*":
            self.pos += 1
            factors.append(self.atom())
        return factors[0] if len(factors) == 1 else self.build(FreeProduct, factors)

    def atom(self) -> GroupSpec:
        tok = self.peek()
        if tok is None:
            self.fail("unexpected end of group spec")
        if tok[0] == "(":
            self.pos += 1
            inner = self.direct()
            if not self.peek() or self.peek()[0] != ")":
                self.fail("expected ')'")
            self.pos += 1
            return inner
        if tok[0] != "atom":
            self.fail(f"expected a group, got {tok[0]!r}")
        self.pos += 1
        try:
            return tok[1](tok[2])
        except ValidationError as exc:
            raise ParseError(str(exc), _offset(self.text, tok[3]), self.text) from None

    def build(self, kind, factors) -> GroupSpec:
        try:
            return kind(tuple(factors))
        except ValidationError as exc:
            raise ParseError(str(exc), 0, self.text) from None


def parse_group_spec(text: str) -> GroupSpec:
    parser = _Parser(text)
    spec = parser.direct()
    if parser.peek() is not None:
        parser.fail(f"unexpected {parser.peek()[0]!r}")
    return spec


def resolve_gens(spec: GroupSpec, gens: str) -> GenSet:
    base_kind, _, arg = gens.partition(":")
    if base_kind == "standard" and not arg:
        return standard_genset(spec)
    if base_kind in ("pow", "lift"):
        try:
            n = int(arg)
        except ValueError:
            raise ValidationError(f"--gens {base_kind}:<n> needs an integer, got {arg!r}") from None
        if base_kind == "pow":
            return power_set(spec, standard_genset(spec), n)
        if not isinstance(spec, DirectProduct) or len(spec.factors) != 2:
            raise ValidationError("--gens lift:<n> needs a direct product Q x N")
        return lift_generating_set(spec, standard_genset(spec.factors[0]), n)
    raise ValidationError(f"--gens must be standard, pow:<k> or lift:<n>, got {gens!r}")


def _plain(x):
    if isinstance(x, Endpoint):
        return x.as_dict()
    if isinstance(x, BoundReport):
        return x.as_dict()
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, sympy.Basic):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if hasattr(x, "item"):
        return x.item()
    return x


def _json(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=False) + "\n"


def _csv(header: dict, columns: list, rows: list) -> str:
    buf = io.StringIO()
    for key, value in header.items():
        buf.write(f"# {key}={value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(["" if v is None else _plain(v) for v in row])
    return buf.getvalue()


def _endpoint_text(ep: Optional[Endpoint]) -> str:
    if ep is None:
        return "none"
    return f"{ep.value!r} ({ep.provenance})"


def _report_header(rep: BoundReport) -> dict:
    return {f"{rep.quantity}_lower": _endpoint_text(rep.lower),
            f"{rep.quantity}_upper": _endpoint_text(rep.upper),
            f"{rep.quantity}_estimate": _endpoint_text(rep.estimate)}


def _base_header(args, S: GenSet) -> dict:
    return {"group": args.group, "gens": args.gens, "size_S": len(S)}


def cmd_ball(args, spec, S) -> str:
    ball = build_ball(spec, S, args.r, args.max_vertices, boundary=False)
    spheres, balls = sphere_sizes(ball), ball_sizes(ball)
    if args.format == "json":
        return _json({**_base_header(args, S), "r": args.r, "sphere_sizes": spheres,
                      "ball_sizes": balls, "total": balls[-1]})
    text = _csv({**_base_header(args, S), "r": args.r}, ["j", "sphere", "ball"],
                [[j, s, b] for j, (s, b) in enumerate(zip(spheres, balls))])
    return text + f"total,{balls[-1]}\n"


def cmd_growth(args, spec, S) -> str:
    rep = growth_estimate(spec, S, args.kmax, args.max_vertices)
    sizes = rep.details["ball_sizes"]
    roots = rep.details["root_bounds"]
    rows = [[k, sizes[k], roots.get(k)] for k in range(len(sizes))]
    if args.format == "json":
        return _json({**_base_header(args, S), "report": rep, "ball_sizes": sizes,
                      "root_bounds": roots, "last_ratio": rep.details["last_ratio"]})
    return _csv({**_base_header(args, S), "kmax": args.kmax, **_report_header(rep)},
                ["k", "ball_size", "root_bound"], rows)


def cmd_rho(args, spec, S) -> str:
    series = spectral.walk_series(spec, S, args.horizon, args.max_vertices)
    low = spectral.rho_lower(series)
    exact = spectral.rho_exact_catalog(spec, S)
    rep = spectral.rho_report(spec, S) if exact is not None else low
    rep = BoundReport("rho", low.lower, rep.upper,
                      Endpoint(spectral.rho_ratio_estimate(series), "heuristic", "ratio estimate"),
                      low.details)
    rows = spectral.series_csv_rows(series)
    if args.format == "json":
        return _json({**_base_header(args, S), "horizon": args.horizon, "report": rep,
                      "witness_m": low.details["witness_m"],
                      "series": [dict(zip(("m", "num", "den", "P", "root", "ratio"), r)) for r in rows]})
    return _csv({**_base_header(args, S), "horizon": args.horizon, **_report_header(rep)},
                ["m", "P_2m_num", "P_2m_den", "P_2m", "root_estimate", "ratio_estimate"], rows)


def cmd_conductance(args, spec, S) -> str:
    ball = build_ball(spec, S, args.r, args.max_vertices)
    table = isoperimetry.ball_boundary_table(spec, S, range(1, args.r + 1), args.max_vertices)
    rho = spectral.rho_report(spec, S)
    h_lo = None
    if rho.certified_upper is not None and len(S) >= 2:
        h_lo = isoperimetry.mohar_propagate(BoundReport("rho", None, rho.certified_upper), len(S)).lower
    rows = []
    for row in table:
        F = isoperimetry.finite_set(spec, ball.vertices[:row["setsize"]])
        rows.append([row["k"], row["setsize"], row["edge_boundary"], float(row["phi_upper"]),
                     float(row["phi_upper"] / len(S)), None if h_lo is None else h_lo.value,
                     float(isoperimetry.folner_deficiency(spec, S, F)),
                     float(isoperimetry.average_folner_deficiency(spec, S, F))])
    columns = ["k", "setsize", "edge_boundary", "phi_upper", "h_upper", "h_lower_mohar",
               "folner_max", "folner_avg"]
    if args.format == "json":
        return _json({**_base_header(args, S), "r": args.r, "rows": [dict(zip(columns, r)) for r in rows]})
    return _csv({**_base_header(args, S), "r": args.r}, columns, rows)


def _p_values(text: str) -> list:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise ValidationError(f"--p must be a comma-separated list of probabilities, got {text!r}") from None


def cmd_percolate(args, spec, S) -> str:
    from . import percolation

    ball = build_ball(spec, S, args.r, args.max_vertices)
    rows = []
    for p in _p_values(args.p):
        est = percolation.theta_r(percolation.PercConfig(ball, p, args.trials, args.seed))
        rows.append([p, args.r, args.trials, est.estimate, est.ci[0], est.ci[1], args.seed])
    columns = ["p", "r", "trials", "theta_hat", "ci_lo", "ci_hi", "seed"]
    if args.format == "json":
        return _json({**_base_header(args, S), "seed": args.seed, "rows": [dict(zip(columns, r)) for r in rows]})
    return _csv({**_base_header(args, S), "seed": args.seed}, columns, rows)


def cmd_pc(args, spec, S) -> str:
    from . import percolation

    rep = percolation.pc_estimate(spec, S, args.r, args.trials, args.seed, args.tau,
                                  max_vertices=args.max_vertices)
    columns = ["p", "r", "trials", "theta_hat", "ci_lo", "ci_hi", "seed"]
    curve = rep.details["curve"]
    if args.format == "json":
        return _json({**_base_header(args, S), "seed": args.seed, "tau_cross": args.tau, "report": rep,
                      "estimate_ci": rep.details["ci"], "curve": curve})
    header = {**_base_header(args, S), "seed": args.seed, "r": args.r, "tau_cross": args.tau,
              **_report_header(rep), "p_c_estimate_ci": "{!r}..{!r}".format(*rep.details["ci"])}
    return _csv(header, columns, [[row[c] for c in columns] for row in curve])


def condition_reports(spec: GroupSpec, S: GenSet, horizon: int, kmax: int,
                      max_vertices: int = DEFAULT_MAX_VERTICES) -> list:
    from . import criteria, percolation

    rho = spectral.rho_report(spec, S, horizon, max_vertices)
    gr = growth_estimate(spec, S, kmax, max_vertices)
    lower, upper = percolation.pc_bounds(S, rho)
    pc = BoundReport("p_c", lower, upper)
    return [criteria.check_bs3(rho, pc, len(S)),
            criteria.check_growth4(rho, len(S), gr),
            criteria.check_radius_half(rho)]


def cmd_conditions(args, spec, S) -> str:
    reports = condition_reports(spec, S, args.horizon, args.kmax, args.max_vertices)
    if args.format == "json":
        return _json([r.as_dict() for r in reports])
    rows = [[r.condition, r.verdict, *r.interval] for r in reports]
    return _csv(_base_header(args, S), ["condition", "verdict", "lower", "upper"], rows)


def cmd_scan_sk(args, spec, S) -> str:
    from . import criteria

    scan = criteria.uniform_conductance_scan(spec, S, args.kmax)
    columns = ["k", "product_size", "T_size", "rho_upper_product", "rho_upper", "rho_upper_certified",
               "h_lower", "h_lower_certified", "h_upper", "h_upper_radius", "rho_lower_walk", "walk_horizon"]
    if args.format == "json":
        return _json({**_base_header(args, S), "kmax": args.kmax, **scan})
    header = {**_base_header(args, S), "kmax": args.kmax}
    if scan["truncated"]:
        header["truncated_at_k"] = scan["truncated_at"]
    return _csv(header, columns, [[row[c] for c in columns] for row in scan["rows"]])


def cmd_scan_lift(args, spec, S) -> str:
    from . import criteria

    if not isinstance(spec, DirectProduct) or len(spec.factors) != 2:
        raise ValidationError("scan-lift needs a direct product Q x N")
    Sq = standard_genset(spec.factors[0])
    rows = criteria.lift_rho_scan(spec, Sq, args.nmax, args.horizon, budget=args.max_vertices)
    if args.format == "json":
        return _json({"group": args.group, "quotient_gens": "standard", "nmax": args.nmax,
                      "horizon": args.horizon, "rows": rows})
    columns = ["n", "lift_size", "genset_size", "horizon", "rho_lower", "ratio_estimate", "identity_ok"]
    table = [[r["n"], r["lift_size"], r["genset_size"], r["horizon"], r["rho_lower"], r["ratio_estimate"],
              all(c["equal"] for c in r["identity_checks"])] for r in rows]
    return _csv({"group": args.group, "quotient_gens": "standard", "horizon": args.horizon}, columns, table)


def cmd_export_graph(args, spec, S) -> str:
    ball = build_ball(spec, S, args.r, args.max_vertices)
    return "\n".join(edge_list_lines(ball, args.group)) + "\n"


COMMANDS = {
    "ball": cmd_ball,
    "growth": cmd_growth,
    "rho": cmd_rho,
    "conductance": cmd_conductance,
    "percolate": cmd_percolate,
    "pc": cmd_pc,
    "conditions": cmd_conditions,
    "scan-sk": cmd_scan_sk,
    "scan-lift": cmd_scan_lift,
    "export-graph": cmd_export_graph,
}


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="cayleylab", description="Non-amenability numerics on Cayley graphs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("group", help="group spec, e.g. F2, Z^2, Z/2*Z/3, F2xZ^1")
        p.add_argument("--gens", default="standard", help="standard | pow:<k> | lift:<n>")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--max-vertices", type=int, default=DEFAULT_MAX_VERTICES)
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--r", type=int, default=6, help="ball radius")
        p.add_argument("--p", default="0.5", help="bond probability (comma-separated list allowed)")
        p.add_argument("--trials", type=int, default=10_000)
        p.add_argument("--horizon", type=int, default=12)
        p.add_argument("--kmax", type=int, default=4)
        p.add_argument("--nmax", type=int, default=2)
        p.add_argument("--tau", type=float, default=0.05, help="crossing threshold for pc")
    return parser


def run(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.max_vertices < 1:
            raise ValidationError("--max-vertices must be positive")
        spec = parse_group_spec(args.group)
        S = resolve_gens(spec, args.gens)
        text = COMMANDS[args.command](args, spec, S)
    except SizeLimitError as exc:
        print(f"cayleylab: size cap: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except InvariantError as exc:
        print(f"cayleylab: internal invariant violated (bug): {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValidationError as exc:
        print(f"cayleylab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
