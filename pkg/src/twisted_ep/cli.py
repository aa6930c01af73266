"""Command-line front end.  Every command prints a JSON report.

Exit codes: 0 success, 1 mathematical failure verdict, 2 malformed input,
3 divergence or an undetermined verdict under ``--require-certain``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import ep as ep_mod
from .cohn import DEFAULT_CAP, CohnAlgebra
from .ep import EPTuple, Verdict
from .errors import (ConstructionError, DivergenceError, EncodingError, MembershipError,
                     SchemaError, TwistedEPError, UnsupportedTupleError)
from .katsura import KatsuraTriple, build_tuple, hausdorff_condition, is_kspi, kreg_conditions
from .ktheory import UnitsModel, bf_modules, conjugate, kh_groups, standard_U, standard_V, search_Y, stabilize
from .scalars import Field

EXIT_OK, EXIT_FAIL, EXIT_SCHEMA, EXIT_UNCERTAIN = 0, 1, 2, 3


class _Exit(Exception):
    def __init__(self, code, report):
        self.code = code
        self.report = report


def load_json(arg: str):
    """Read JSON from a file path, or parse the argument itself as JSON."""
    if arg is None:
        raise SchemaError("missing input")
    if os.path.exists(arg):
        with open(arg, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = arg
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"cannot read {arg!r} as a JSON file or JSON text: {exc}") from exc


def _field(args, default="Q") -> Field:
    try:
        return Field.parse_name(args.field or default)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def _load_tuple(args) -> EPTuple:
    if getattr(args, "tuple", None):
        data = load_json(args.tuple)
        field = Field.parse_name(args.field) if args.field else None
        return EPTuple.from_json(data, field)
    if getattr(args, "triple", None):
        field = _field(args)
        k = KatsuraTriple.from_json(load_json(args.triple), field)
        return build_tuple(k, field)
    raise SchemaError("give --tuple or --triple")


def _load_triple(args) -> KatsuraTriple:
    field = _field(args) if args.field else None
    return KatsuraTriple.from_json(load_json(args.triple), field)


def _algebra(args) -> CohnAlgebra:
    t = _load_tuple(args)
    section = None
    if getattr(args, "section", None):
        section = load_json(args.section)
        if not isinstance(section, dict):
            raise SchemaError("a section is a JSON object mapping vertices to edges")
    return CohnAlgebra(t, section)


def _elements(args, alg):
    if not args.element:
        raise SchemaError("give at least one --element")
    return [alg.from_json(load_json(e)) for e in args.element]


# commands

def cmd_validate(args):
    t = _load_tuple(args)
    rep = ep_mod.validate(t, samples=args.samples, seed=args.seed)
    out = rep.to_json()
    out["status"] = "valid" if rep.ok else "invalid"
    if rep.ok:
        out["stratification"] = ep_mod.stratify_regular(t, bound=args.bound).to_json()
    return (EXIT_OK if rep.ok else EXIT_FAIL), out


def cmd_mul(args):
    alg = _algebra(args)
    xs = _elements(args, alg)
    prod = xs[0]
    for x in xs[1:]:
        prod = prod * x
    out = {"product": prod.to_json()}
    if args.quotient:
        out["normal_form"] = alg.nf(prod, cap=args.cap_steps).to_json()
    return EXIT_OK, out


def cmd_nf(args):
    alg = _algebra(args)
    (x,) = _elements(args, alg)[:1]
    y = alg.nf(x, strategy=args.strategy, cap=args.cap_steps, seed=args.seed)
    return EXIT_OK, {"normal_form": y.to_json(), "section": alg.section}


def cmd_kbasis(args):
    alg = _algebra(args)
    (x,) = _elements(args, alg)[:1]
    coeffs = alg.to_kernel_basis(x, cap=args.cap_steps)
    fmt = alg.tuple.group.format
    terms = [{"alpha": a.to_list(), "v": v, "g": fmt(g), "beta": b.to_list(),
              "coeff": alg.field.format(c)}
             for (a, v, g, b), c in sorted(coeffs.items(),
                                           key=lambda kv: (alg.term_key(_key_triple(kv[0]))))]
    return EXIT_OK, {"kernel_basis": terms}


def _key_triple(key):
    from .semigroup import STriple
    a, _, g, b = key
    return STriple(a, g, b)


def cmd_katsura_build(args):
    field = _field(args)
    k = KatsuraTriple.from_json(load_json(args.triple), field)
    t = build_tuple(k, field)
    return EXIT_OK, {"tuple": t.to_json()}


def cmd_kspi(args):
    rep = is_kspi(_load_triple(args))
    return (EXIT_OK if rep.holds else EXIT_FAIL), rep.to_json()


def _hausdorff_report(k, args):
    l_cap = args.l_cap if args.l_cap else None
    rep = hausdorff_condition(k, path_len_cap=args.cap_paths, l_cap=l_cap)
    return rep, rep.to_json()


def cmd_hausdorff(args):
    rep, out = _hausdorff_report(_load_triple(args), args)
    if rep.verdict is Verdict.FALSE:
        return EXIT_FAIL, out
    if rep.verdict is Verdict.UNDETERMINED and args.require_certain:
        return EXIT_UNCERTAIN, out
    return EXIT_OK, out


def cmd_kreg(args):
    return EXIT_OK, kreg_conditions(_load_triple(args))


def _units(args, field):
    primes = [int(p) for p in args.primes.split(",") if p.strip()] if args.primes else []
    return UnitsModel.for_field(field, primes, cap=args.prime_cap)


def cmd_ktheory(args):
    field = _field(args)
    k = KatsuraTriple.from_json(load_json(args.triple), field)
    units = _units(args, field)
    res = kh_groups(k, units, field)
    out = res.to_json()
    bf, bf_checked = bf_modules(k, units, field)
    out["BF"] = str(bf)
    out["BF_checked"] = str(bf_checked)
    return EXIT_OK, out


def cmd_stabilize(args):
    data = load_json(args.matrices)
    if not isinstance(data, dict):
        raise SchemaError("stabilize input is a JSON object with M, N, P")
    extra = set(data) - {"M", "N", "P", "U", "V", "Y"}
    if extra:
        raise SchemaError(f"unknown keys {sorted(extra)}")
    try:
        M, N = data["M"], data["N"]
        n = len(M)
        P = data.get("P", [[0] * n for _ in range(n)])
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed matrices: {exc!r}") from exc
    for name, X in (("M", M), ("N", N), ("P", P)):
        if len(X) != n or any(len(r) != n for r in X):
            raise SchemaError(f"{name} must be {n}x{n}")
    E = stabilize(M, N, P)
    out = {"E": E.to_json()}
    U = data.get("U")
    V = data.get("V")
    if U is None and V is None and "Y" in data:
        U, V = standard_U(n), standard_V(n, data["Y"])
    if U is not None or V is not None:
        size = 4 * n
        ident = [[int(i == j) for j in range(size)] for i in range(size)]
        res = conjugate(E, U or ident, V or ident)
        out["conjugate"] = res.to_json()
    if args.search_y:
        out["search"] = search_Y(M, N, P, bound=args.y_bound)
        if not out["search"]["found"]:
            return EXIT_FAIL, out
    return EXIT_OK, out


def cmd_katsura(args):
    if args.action == "build":
        return cmd_katsura_build(args)
    k = _load_triple(args)
    kspi = is_kspi(k)
    haus, hout = _hausdorff_report(k, args)
    out = {"kspi": kspi.to_json(), "hausdorff": hout, "kreg": kreg_conditions(k)}
    if args.field:
        field = _field(args)
        t = build_tuple(k, field)
        out["stratification"] = ep_mod.stratify_regular(t).to_json()
    if not kspi.holds or haus.verdict is Verdict.FALSE:
        return EXIT_FAIL, out
    if haus.verdict is Verdict.UNDETERMINED and args.require_certain:
        return EXIT_UNCERTAIN, out
    return EXIT_OK, out


# parser

def _common(p, tuple_input=True, triple_input=False):
    if tuple_input:
        p.add_argument("--tuple", help="EP-tuple JSON file (or inline JSON)")
    if triple_input or tuple_input:
        p.add_argument("--triple", help="Katsura triple JSON file (or inline JSON)")
    p.add_argument("--field", help="coefficient field: Q (default) or Fp such as F7")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--json", action="store_true", help="compact single-line JSON output")


def _algebra_opts(p):
    p.add_argument("--element", action="append", help="element JSON: a list of terms (repeatable)")
    p.add_argument("--section", help="JSON object vertex -> section edge (default: automatic)")
    p.add_argument("--cap-steps", type=int, default=DEFAULT_CAP, help="rewrite step cap (default 10^6)")


def _hausdorff_opts(p):
    p.add_argument("--cap-paths", type=int, default=12, help="path length cap (default 12)")
    p.add_argument("--l-cap", type=int, default=0, help="largest l checked (default: lcm of A entries)")
    p.add_argument("--require-certain", action="store_true",
                   help="exit 3 instead of 0 on an undetermined verdict")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twisted-ep", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check the action, cocycle, EP and twist laws")
    _common(p)
    p.add_argument("--samples", type=int, default=200, help="random pairs for Z (default 200)")
    p.add_argument("--bound", type=int, default=64, help="window for the nabla image (default 64)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("mul", help="multiply elements of the Cohn algebra")
    _common(p)
    _algebra_opts(p)
    p.add_argument("--quotient", action="store_true", help="also print the normal form of the product")
    p.set_defaults(func=cmd_mul)

    p = sub.add_parser("nf", help="normal form in the quotient algebra")
    _common(p)
    _algebra_opts(p)
    p.add_argument("--strategy", choices=["innermost", "shuffled"], default="innermost")
    p.set_defaults(func=cmd_nf)

    p = sub.add_parser("kbasis", help="coordinates of an element of K in its basis")
    _common(p)
    _algebra_opts(p)
    p.set_defaults(func=cmd_kbasis)

    p = sub.add_parser("katsura-build", help="build the EP-tuple of a Katsura triple")
    _common(p, tuple_input=False, triple_input=True)
    p.set_defaults(func=cmd_katsura_build)

    p = sub.add_parser("kspi", help="KSPI predicate with diagnostics")
    _common(p, tuple_input=False, triple_input=True)
    p.set_defaults(func=cmd_kspi)

    p = sub.add_parser("hausdorff", help="bounded check of the finiteness side condition")
    _common(p, tuple_input=False, triple_input=True)
    _hausdorff_opts(p)
    p.set_defaults(func=cmd_hausdorff)

    p = sub.add_parser("kreg", help="K-regularity sufficient conditions")
    _common(p, tuple_input=False, triple_input=True)
    p.set_defaults(func=cmd_kreg)

    p = sub.add_parser("ktheory", help="KH_0, KH_1 and the BF modules")
    _common(p, tuple_input=False, triple_input=True)
    p.add_argument("--primes", help="comma-separated primes generating units over Q")
    p.add_argument("--prime-cap", type=int, default=10 ** 6, help="largest p for discrete logs")
    p.set_defaults(func=cmd_ktheory)

    p = sub.add_parser("stabilize", help="stabilized block matrix and optional conjugation")
    p.add_argument("--matrices", required=True, help="JSON with M, N, P and optional U, V or Y")
    p.add_argument("--search-y", action="store_true", help="search small Y for a KSPI triple")
    p.add_argument("--y-bound", type=int, default=3, help="entry bound for the Y search (default 3)")
    p.add_argument("--json", action="store_true", help="compact single-line JSON output")
    p.set_defaults(func=cmd_stabilize)

    p = sub.add_parser("katsura", help="katsura build | katsura check")
    p.add_argument("action", choices=["build", "check"])
    _common(p, tuple_input=False, triple_input=True)
    _hausdorff_opts(p)
    p.set_defaults(func=cmd_katsura)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code, report = args.func(args)
    except (SchemaError, ConstructionError, EncodingError) as exc:
        code, report = EXIT_SCHEMA, {"error": type(exc).__name__, "message": str(exc)}
    except DivergenceError as exc:
        code, report = EXIT_UNCERTAIN, {"error": type(exc).__name__, "message": str(exc)}
    except (MembershipError, UnsupportedTupleError, TwistedEPError) as exc:
        code, report = EXIT_FAIL, {"error": type(exc).__name__, "message": str(exc)}
    if args.json:
        print(json.dumps(report, ensure_ascii=False, default=str))
    else:
        print(json.dumps(report, ensure_ascii=False, indent=2, default=str))
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
