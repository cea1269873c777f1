"""Command-line front end.

Subcommands: analyze, entail, sample, enumerate, check, census, builtin.
Exit codes: 0 success, 1 domain error (unsatisfiable system, failed
assumption), 2 usage or parse error, 3 budget exceeded.

Randomized subcommands (sample, census) require an explicit --seed; there
is no wall-clock default, so identical invocations are bit-reproducible.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import census as census_mod
from . import checkers, factory, library, params as params_mod
from .analysis import (canonical_transversal, classify_minimal, minimal_terms,
                       orbit_partition)
from .closure import (DEFAULT_MAX_VARS, compute_closure, entails_auto,
                      is_satisfiable, validate_assumptions)
from .errors import BudgetError, DomainError, ParseError
from .terms import (Identity, parse_system, render_system, render_term,
                    variable_names)

SCHEMA_VERSION = 1


def _load_system(path: str):
    p = Path(path)
    if not p.is_file():
        raise ParseError(f"no such system file: {path}")
    return parse_system(p.read_text(), name=p.stem)


def _parse_seed(value: str) -> int:
    try:
        seed = int(value, 0)
    except ValueError:
        raise ParseError(f"seed must be an integer, got {value!r}") from None
    if not 0 <= seed < 2 ** 64:
        raise ParseError("seed must fit in an unsigned 64-bit integer")
    return seed


def _require_seed(args) -> int:
    if args.seed is None:
        raise ParseError("--seed is required; randomized commands have no "
                         "wall-clock default")
    return _parse_seed(args.seed)


def _out_stream(args):
    """Context manager for -o; stdout is not closed."""
    import contextlib
    if getattr(args, "output", None):
        return open(args.output, "w")
    return contextlib.nullcontext(sys.stdout)


def _render(spec, term):
    m = max(term.args) if term.args else 1
    names = variable_names(spec.signature, max(m, len(term.args)))
    return render_term(term, spec.signature, names)


# ---------------------------------------------------------------------------
# analyze


def _analysis_payload(spec, max_vars: int) -> dict:
    closure = compute_closure(spec, max_vars=max_vars)
    report = validate_assumptions(spec, max_vars=max_vars)
    payload = {
        "schema": SCHEMA_VERSION,
        "system": spec.name or "system",
        "idempotent": report.idempotent,
        "satisfiable": report.satisfiable,
    }
    if not report.idempotent:
        payload["detail"] = report.detail
        return payload
    if not report.satisfiable:
        # two distinct variables merged; report the witness pair
        names = variable_names(spec.signature, closure.universe.m)
        merged = []
        for v in range(2, closure.universe.m + 1):
            if closure.find(v - 1) == closure.find(0):
                merged = [names[0], names[v - 1]]
                break
        payload["witness"] = merged
        return payload
    trans = canonical_transversal(closure)
    pars = params_mod.parameters(trans)
    infos = orbit_partition(closure)
    entries = []
    for e in trans.entries:
        entries.append({
            "rep": _render(spec, e.rep),
            "d": e.d,
            "group_order": len(e.group),
            "q": e.q,
        })
    minimal = []
    for t in minimal_terms(closure):
        rep = classify_minimal(closure, t)
        minimal.append({"term": _render(spec, t), "kind": rep.kind})
    table = params_mod.asymptotic_table(pars)
    verdict = params_mod.idemprimality_verdict(pars)
    payload.update({
        "num_classes": len(infos),
        "num_orbits": len({i.orbit_id for i in infos}),
        "transversal": entries,
        "d_M": pars.d_M,
        "p": {str(k): params_mod.p_of_k(pars, k)
              for k in range(pars.d_M, pars.d_M + 4)},
        "minimal_terms": minimal,
        "subalgebra_table": [
            {"size": label, "value": cell.render(), "float": cell.as_float()}
            for label, cell in table.rows()],
        "verdict": {
            "almost_surely_idemprimal": verdict.almost_surely,
            "limit_probability": verdict.limit_probability,
            "limit_label": verdict.limit_label,
            "justification": list(verdict.justification),
        },
    })
    return payload


def cmd_analyze(args) -> int:
    spec = _load_system(args.system)
    payload = _analysis_payload(spec, args.max_vars)
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        _print_analysis_text(payload)
    if not payload["idempotent"]:
        print("error: system is not idempotent", file=sys.stderr)
        return 1
    if not payload["satisfiable"]:
        w = payload.get("witness") or ["x", "y"]
        print(f"error: system is unsatisfiable: {w[0]} = {w[1]} is entailed",
              file=sys.stderr)
        return 1
    return 0


def _print_analysis_text(p: dict):
    print(f"system: {p['system']}")
    print(f"idempotent: {p['idempotent']}  satisfiable: {p['satisfiable']}")
    if not (p["idempotent"] and p["satisfiable"]):
        return
    print(f"classes: {p['num_classes']}  orbits: {p['num_orbits']}")
    print("transversal:")
    for e in p["transversal"]:
        print(f"  {e['rep']}  d={e['d']}  |G|={e['group_order']}  q={e['q']}")
    print(f"d_M = {p['d_M']}")
    print("p(k): " + "  ".join(f"p({k})={v}" for k, v in p["p"].items()))
    print("minimal terms:")
    for t in p["minimal_terms"]:
        print(f"  {t['term']}  [{t['kind']}]")
    print("limiting probability of a proper subalgebra, by size:")
    for row in p["subalgebra_table"]:
        print(f"  size {row['size']}: {row['value']}")
    v = p["verdict"]
    print(f"idemprimal almost surely: {v['almost_surely_idemprimal']} "
          f"(limit {v['limit_label']})")
    for j in v["justification"]:
        print(f"  - {j}")


# ---------------------------------------------------------------------------
# entail


def cmd_entail(args) -> int:
    spec = _load_system(args.system)
    # parse the query through a one-identity document over the same signature
    sig_line = "signature " + ", ".join(
        f"{nm}/{ar}" for nm, ar in spec.signature.symbols)
    query = parse_system(f"{sig_line}\nidentity {args.identity}\n")
    ident: Identity = query.identities[0]
    report = validate_assumptions(spec, max_vars=args.max_vars)
    if not report.satisfiable:
        print("UNSATISFIABLE (every identity is semantically entailed)")
        return 1
    holds = entails_auto(spec, ident.lhs, ident.rhs, max_vars=args.max_vars)
    print("ENTAILED" if holds else "NOT ENTAILED")
    return 0


# ---------------------------------------------------------------------------
# sample / enumerate / check


def cmd_sample(args) -> int:
    seed = _require_seed(args)
    spec = _load_system(args.system)
    report = validate_assumptions(spec, max_vars=args.max_vars)
    if not report.ok:
        raise DomainError(f"system assumptions fail: {report.detail}")
    closure = compute_closure(spec, max_vars=args.max_vars)
    trans = canonical_transversal(closure)
    dispatch = factory.build_dispatch(closure, trans, spec.signature)
    with _out_stream(args) as fh:
        for i in range(args.count):
            fam = factory.sample_mfamily(trans, args.n, factory.mix(seed, i))
            alg = factory.realize(dispatch, fam)
            fh.write(factory.algebra_to_json(alg) + "\n")
    return 0


def cmd_enumerate(args) -> int:
    spec = _load_system(args.system)
    with _out_stream(args) as fh:
        count = 0
        for alg in factory.enumerate_models(spec, args.n, backend=args.backend):
            fh.write(factory.algebra_to_json(alg) + "\n")
            count += 1
    print(f"{count} models", file=sys.stderr)
    return 0


def _check_one(alg, spec, prop: str):
    if prop == "subalg2":
        for a in range(alg.n):
            for b in range(a + 1, alg.n):
                if checkers.is_subuniverse(alg, (a, b)).holds:
                    return True, [a, b]
        return False, None
    if prop == "subalg3":
        from itertools import combinations
        for B in combinations(range(alg.n), 3):
            if checkers.is_subuniverse(alg, B).holds:
                return True, list(B)
        return False, None
    if prop == "subalgGT1":
        r = checkers.has_proper_subalgebra_size_gt1(alg)
        return r.holds, r.witness
    if prop == "automorphism":
        r = checkers.has_nontrivial_automorphism(alg)
        return r.holds, list(r.witness) if r.holds else None
    if prop == "cross":
        a = checkers._any_cross_np(checkers._tabs(alg), alg.n)
        return a is not None, a
    if prop == "idemprimal":
        r = checkers.is_idemprimal(alg)
        return r.holds, r.witness
    if prop.startswith("minority2"):
        sym = census_mod._designated_ternary(spec, prop) if spec is not None \
            else _first_ternary(alg)
        r = checkers.has_minority_two_subalgebra(alg, sym)
        return r.holds, list(r.witness) if r.holds else None
    if prop.startswith("fixedB="):
        B = census_mod.parse_fixed_b(prop)
        r = checkers.is_subuniverse(alg, B)
        return r.holds, None if r.holds else list(map(int, r.witness[1]))
    raise ParseError(f"unknown property {prop!r}")


def _first_ternary(alg):
    for i, (_, ar) in enumerate(alg.signature.symbols):
        if ar == 3:
            return i
    raise DomainError("no ternary symbol for minority2")


def cmd_check(args) -> int:
    text = Path(args.algebra).read_text()
    alg = factory.algebra_from_json(text)
    spec = _load_system(args.system) if args.system else None
    if spec is not None:
        ok, witness = factory.validate_model(spec, alg)
        if not ok:
            raise DomainError(f"algebra does not satisfy the system: "
                              f"identity {witness[0]} fails at {witness[1]}")
    for prop in args.property.split(","):
        prop = prop.strip()
        holds, witness = _check_one(alg, spec, prop)
        obj = {"property": prop, "holds": holds}
        if witness is not None:
            obj["witness"] = witness
        print(json.dumps(obj))
    return 0


# ---------------------------------------------------------------------------
# census / builtin


def cmd_census(args) -> int:
    seed = _require_seed(args)
    spec = _load_system(args.system)
    props = tuple(p.strip() for p in args.property.split(","))
    engine = census_mod.CensusEngine(spec, max_vars=args.max_vars)
    exp = census_mod.Experiment(system=spec, n=args.n, num_samples=args.samples,
                                master_seed=seed, properties=props,
                                threads=args.threads)
    report = census_mod.run_census(exp, engine=engine)
    if args.output:
        with open(args.output, "w", newline="") as fh:
            census_mod.write_csv([report], fh)
    else:
        sys.stdout.write(census_mod.csv_text([report]))
    return 0


def cmd_builtin(args) -> int:
    fam = library.FAMILIES.get(args.name)
    if fam is None:
        raise ParseError(f"unknown builtin {args.name!r}; known: "
                         + ", ".join(sorted(library.FAMILIES)))
    params = []
    for pname in fam.params:
        val = getattr(args, pname)
        if val is None:
            raise ParseError(f"builtin {args.name!r} requires --{pname}")
        params.append(val)
    sys.stdout.write(library.builtin_mlt(args.name, *params))
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="maltkit",
        description="analyze, sample, and census random finite models of "
                    "idempotent linear identity systems")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, system=True):
        if system:
            p.add_argument("system", help="path to a .mlt system file")
        p.add_argument("--max-vars", type=int, default=DEFAULT_MAX_VARS,
                       help="variable budget for the term universe")

    p = sub.add_parser("analyze", help="closure, transversal, parameters, verdict")
    common(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("entail", help="decide entailment of a linear identity")
    common(p)
    p.add_argument("identity", help="query identity, e.g. 'f(y,y,x) = x'")
    p.set_defaults(func=cmd_entail)

    p = sub.add_parser("sample", help="sample uniform random models")
    common(p)
    p.add_argument("-n", type=int, required=True, help="carrier size")
    p.add_argument("--seed", help="master seed (unsigned 64-bit)")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("enumerate", help="enumerate all models at tiny n")
    common(p)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--backend", choices=("family", "brute"), default="family")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("check", help="check properties of a concrete algebra")
    p.add_argument("algebra", help="path to an algebra JSON file")
    p.add_argument("--system", help="optional .mlt file to validate against")
    p.add_argument("--property", required=True,
                   help="comma-separated property list")
    p.add_argument("--max-vars", type=int, default=DEFAULT_MAX_VARS)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("census", help="seeded Monte Carlo property census")
    common(p)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", help="master seed (unsigned 64-bit)")
    p.add_argument("--property", required=True)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("builtin", help="print a builtin system as .mlt")
    p.add_argument("name")
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.set_defaults(func=cmd_builtin)

    return top


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
