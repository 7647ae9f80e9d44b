"""Command-line front end.

Problems are single JSON documents; exact rationals are written as
strings ("a/b") so no floating contamination enters the coefficient data.
Reports are deterministic JSON trees: on identical input and tool version
everything outside the ``timings`` block is byte-identical across runs.

Exit status: 0 success, 1 engine error, 2 problem-file or usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from gmpy2 import mpq

from . import __version__
from .coeff import Field, to_mpq
from .brunovf import BrunoField, PointTransform, deglex_key, dot
from .commuting import (
    CommutingFamily,
    check_AL,
    check_commute,
    omega_sharp,
    simultaneous_normalize,
)
from .conditions import (
    Bound,
    Decomposition,
    check_AS,
    check_hull,
    nilpotency_check,
    step_estimate_check,
)
from .errors import NfkitError, ProblemSpecError
from .integrability import integrability_report
from .normalize import MODES, normalize
from .resonance import lattice, omega_sequence, siegel_pliss_certificate


# ---------------------------------------------------------------------------
# Problem files


def _fail(msg, loc):
    raise ProblemSpecError(msg, location=loc)


def parse_field(node, loc="field"):
    if node == "Q":
        return Field.rationals()
    if node == "Q(i)":
        return Field.gaussian()
    if isinstance(node, dict):
        if "minpoly" not in node or "root" not in node:
            _fail("number field needs 'minpoly' and 'root'", loc)
        root = node["root"]
        if not (isinstance(root, (list, tuple)) and len(root) == 2):
            _fail("'root' must be [re, im]", f"{loc}.root")
        try:
            return Field.number_field(node["minpoly"], (float(root[0]), float(root[1])),
                                      conj_pow=node.get("conj_pow"))
        except NfkitError as e:
            _fail(str(e), loc)
    _fail(f"unrecognized field descriptor {node!r}", loc)


def _parse_scalar(field, node, loc):
    try:
        return field.scalar(node)
    except (NfkitError, ValueError) as e:
        _fail(str(e), loc)


def _parse_terms(field, n, N, lam, terms, loc):
    monomials = []
    degree_terms = {}
    for idx, t in enumerate(terms):
        here = f"{loc}[{idx}]"
        if isinstance(t, dict) and "degree" in t:
            Q = tuple(int(x) for x in t["degree"])
            coeff = t.get("coeff")
            if not isinstance(coeff, list) or len(coeff) != n:
                _fail("degree-form term needs a length-n 'coeff' list", here)
            vec = tuple(_parse_scalar(field, c, f"{here}.coeff[{i}]") for i, c in enumerate(coeff))
            degree_terms[Q] = vec
        elif isinstance(t, dict):
            if not {"coeff", "monomial", "coordinate"} <= set(t):
                _fail("term needs 'coeff', 'monomial', 'coordinate'", here)
            monomials.append((_parse_scalar(field, t["coeff"], f"{here}.coeff"),
                              tuple(int(x) for x in t["monomial"]),
                              int(t["coordinate"]) - 1))
        elif isinstance(t, (list, tuple)) and len(t) == 3:
            monomials.append((_parse_scalar(field, t[0], f"{here}[0]"),
                              tuple(int(x) for x in t[1]), int(t[2]) - 1))
        else:
            _fail("term must be [coeff, monomial, coordinate] or an object", here)
    from .brunovf import from_monomials, tm_add
    try:
        F = from_monomials(field, n, N, lam, monomials)
        if degree_terms:
            F = F.with_terms(tm_add(F.terms, degree_terms))
    except NfkitError as e:
        _fail(str(e), loc)
    return F


class Problem:
    """Parsed problem file: one field or a family, plus analysis options."""

    def __init__(self, doc, path="<problem>"):
        if not isinstance(doc, dict):
            _fail("problem document must be a JSON object", path)
        self.field = parse_field(doc.get("field", "Q"))
        try:
            self.n = int(doc["n"])
            self.N = int(doc.get("order", doc.get("N", 6)))
        except (KeyError, ValueError):
            _fail("'n' (dimension) and integer 'order' are required", path)
        self.options = doc.get("options", {})
        self.doc = doc
        self.main = None
        self.family = None
        if "family" in doc:
            members = []
            for k, node in enumerate(doc["family"]):
                members.append(self._parse_member(node, f"family[{k}]"))
            try:
                self.family = CommutingFamily(members)
            except NfkitError as e:
                _fail(str(e), "family")
        if "lambda" in doc:
            self.main = self._parse_member(doc, "")
        if self.main is None and self.family is None:
            _fail("problem carries neither 'lambda' nor 'family'", path)
        self.decomposition = None
        if "decomposition" in doc:
            node = doc["decomposition"]
            lam = (self.main or self.family.fields[0]).lam
            try:
                vectors = [tuple(self.field.scalar(x) for x in v) for v in node["vectors"]]
                gammas = [self.field.scalar(g) for g in node["gammas"]]
                self.decomposition = Decomposition(lam, vectors, gammas)
            except (KeyError, NfkitError) as e:
                _fail(str(e), "decomposition")

    def _parse_member(self, node, loc):
        lam_node = node.get("lambda")
        if not isinstance(lam_node, list) or len(lam_node) != self.n:
            _fail("'lambda' must list n scalar literals", f"{loc}.lambda" if loc else "lambda")
        lam = [_parse_scalar(self.field, x, f"{loc}.lambda[{i}]") for i, x in enumerate(lam_node)]
        return _parse_terms(self.field, self.n, self.N, lam,
                            node.get("terms", []), f"{loc}.terms" if loc else "terms")

    def require_main(self):
        if self.main is None:
            _fail("this command needs a single 'lambda' field", "<problem>")
        return self.main

    def require_family(self):
        if self.family is None:
            _fail("this command needs a 'family' block", "<problem>")
        return self.family

    def require_decomposition(self):
        if self.decomposition is None:
            lam = (self.main or self.family.fields[0]).lam
            return Decomposition.trivial(lam)
        return self.decomposition


def load_problem(path) -> Problem:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as e:
        raise ProblemSpecError(str(e), location=path)
    except json.JSONDecodeError as e:
        raise ProblemSpecError(f"not valid JSON: {e}", location=path)
    return Problem(doc, path=path)


# ---------------------------------------------------------------------------
# Serialization


def ser_scalar(s):
    return s.literal()


def ser_vec(vec):
    return [ser_scalar(c) for c in vec]


def ser_terms(tm):
    return [{"degree": list(Q), "coeff": ser_vec(vec)}
            for Q, vec in sorted(tm.items(), key=lambda kv: deglex_key(kv[0]))]


def ser_field_obj(F: BrunoField):
    return {"lambda": ser_vec(F.lam), "order": F.trunc_order, "terms": ser_terms(F.terms)}


def ser_transform(H: PointTransform):
    return {"order": H.trunc_order, "terms": ser_terms(H.h)}


def _f17(x) -> str:
    return format(float(x), ".17g")


def ser_bound(b: Bound):
    return {"upper": _f17(b.hi), "lower": _f17(b.lo), "is_upper_bound": True}


def ser_mpq(q):
    return str(mpq(q))


def ser_hull(h):
    out = {"status": h.kind}
    if h.c is not None:
        out["c"] = ser_mpq(h.c)
    if h.witness is not None:
        out["witness"] = list(h.witness)
    if h.witness_j is not None:
        out["direction"] = h.witness_j
    if h.bound is not None:
        out["scan_bound"] = h.bound
    if h.note:
        out["note"] = h.note
    return out


def echo_input(problem: Problem):
    out = {"field": problem.field.describe(), "n": problem.n, "order": problem.N}
    if problem.main is not None:
        out["lambda"] = ser_vec(problem.main.lam)
        out["terms"] = ser_terms(problem.main.terms)
    if problem.family is not None:
        out["family"] = [ser_field_obj(F) for F in problem.family]
    if problem.decomposition is not None:
        D = problem.decomposition
        out["decomposition"] = {"vectors": [ser_vec(v) for v in D.vectors],
                                "gammas": ser_vec(D.gammas)}
    return out


# ---------------------------------------------------------------------------
# Commands


def cmd_normalize(problem: Problem, args) -> dict:
    F = problem.require_main()
    mode = args.mode or problem.options.get("mode", "blockwise")
    if mode not in MODES:
        _fail(f"unknown mode {mode!r}", "--mode")
    order = args.order or problem.N
    t0 = time.perf_counter()
    res = normalize(F, N=order, mode=mode)
    dt = time.perf_counter() - t0
    steps = [{"degree": list(r.degree), "delta": ser_scalar(r.delta), "action": r.action,
              **({"block": r.block} if r.block is not None else {})}
             for r in res.log]
    return {
        "mode": mode,
        "order": order,
        "normal_form": ser_field_obj(res.normal_form),
        "transform": ser_transform(res.transform),
        "verified": res.verification.ok,
        "resonant_support": [list(Q) for Q in res.resonant_support()],
        "steps": steps,
        "_timing": dt,
    }


def cmd_check(problem: Problem, args) -> dict:
    results = {}
    # file-level analysis options serve as defaults; flags win
    opts = problem.options
    if args.omega is None and "k_max" in opts:
        args.omega = int(opts["k_max"])
    if args.hull is None and "hull_c" in opts:
        args.hull = opts["hull_c"]
    if "hull_B" in opts and args.scan_bound == 32:
        args.scan_bound = int(opts["hull_B"])
    lam = (problem.main or problem.family.fields[0]).lam
    if args.omega is not None:
        t0 = time.perf_counter()
        om = omega_sequence(lam, args.omega)
        results["omega"] = {
            "entries": [{"k": e.k, "lower": _f17(e.lower), "upper": _f17(e.upper),
                         "argmin": list(e.argmin), "exact": e.exact}
                        for e in om.entries],
            "partial_sum_upper": _f17(om.partial_sum_upper),
            "note": om.note,
            "_timing": time.perf_counter() - t0,
        }
    if args.siegel:
        t0 = time.perf_counter()
        cert = siegel_pliss_certificate(lam, scan_bound=args.scan_bound)
        results["siegel_pliss"] = {
            "C": ser_mpq(cert.C), "C_float": _f17(cert.C), "nu": cert.nu,
            "Cstar": _f17(cert.Cstar), "denominator_clearing": cert.denominator_clearing,
            "scan_bound": cert.scan_bound, "scan_checked": cert.scan_checked,
            "_timing": time.perf_counter() - t0,
        }
    if args.hull is not None:
        D = problem.require_decomposition()
        t0 = time.perf_counter()
        hull = check_hull(lam, D, c=to_mpq(args.hull), B=args.scan_bound)
        results["hull"] = {**ser_hull(hull), "_timing": time.perf_counter() - t0}
    if args.check_as:
        F = problem.require_main()
        D = problem.require_decomposition()
        t0 = time.perf_counter()
        G = normalize(F, mode="blockwise").normal_form if F.terms and any(
            not dot(Q, lam).is_zero() for Q in F.terms) else F
        rep = check_AS(G, D, hull_c=to_mpq(args.hull) if args.hull else None,
                       hull_B=args.scan_bound)
        nil = nilpotency_check(G.terms, G.trunc_order, field=problem.field, n=problem.n)
        results["shape_condition"] = {
            "span_holds": rep.span_holds,
            "offending": (list(rep.offending[0]) if rep.offending else None),
            "isoresonant": rep.isoresonance.holds,
            "isoresonance_witness": (list(rep.isoresonance.witness[0])
                                     if rep.isoresonance.witness else None),
            "hull": ser_hull(rep.hull) if rep.hull else None,
            "conjugate_pair_pattern": rep.a2_pattern,
            "condition_holds": rep.condition_holds,
            "transport_nilpotent": nil.nilpotent,
            "series": [{f"direction_{j}": ser_terms_scalar(s)}
                       for j, s in enumerate(rep.s_series)],
            "_timing": time.perf_counter() - t0,
        }
    if args.check_al:
        fam = problem.require_family()
        t0 = time.perf_counter()
        res = simultaneous_normalize(fam)
        rep = check_AL(res.family)
        results["family_shape_condition"] = {
            "holds": rep.holds,
            "witness": (list(rep.witness[1]) if rep.witness else None),
            "member": (rep.witness[0] if rep.witness else None),
            "_timing": time.perf_counter() - t0,
        }
    if args.estimate is not None:
        F = problem.require_main()
        D = problem.require_decomposition()
        t0 = time.perf_counter()
        rep = step_estimate_check(F, D, to_mpq(args.estimate), args.estimate_k,
                                  hull_c=to_mpq(args.hull) if args.hull else None,
                                  hull_B=args.scan_bound)
        results["step_estimate"] = {
            "rho": ser_mpq(rep.rho), "m": rep.m,
            "hypothesis_met": rep.hypothesis_met,
            "norms": {k: ser_bound(v) for k, v in rep.norms.items()},
            "c1": _f17(rep.c1) if rep.c1 is not None else None,
            "c2": _f17(rep.c2) if rep.c2 is not None else None,
            "per_delta": [{"delta": d, "h_norm_upper": _f17(l), "bound_lower": _f17(r),
                           "holds": ok} for d, l, r, ok in rep.per_delta],
            "aggregate": ({"h_norm_upper": _f17(rep.aggregate[0]),
                           "bound_lower": _f17(rep.aggregate[1]),
                           "holds": rep.aggregate[2]} if rep.aggregate else None),
            "note": rep.note,
            "_timing": time.perf_counter() - t0,
        }
    if not results:
        _fail("no check selected; pass --omega/--siegel/--hull/--as/--al/--estimate", "check")
    return results


def ser_terms_scalar(series):
    return [{"degree": list(P), "coeff": ser_scalar(c)}
            for P, c in sorted(series.items(), key=lambda kv: deglex_key(kv[0]))]


def cmd_integrals(problem: Problem, args) -> dict:
    F = problem.require_main()
    lam = F.lam
    t0 = time.perf_counter()
    if F.terms and any(not dot(Q, lam).is_zero() for Q in F.terms):
        F = normalize(F, mode="blockwise").normal_form
    rep = integrability_report(F, N=args.order or problem.N)
    return {
        "order": rep.order,
        "lattice_basis": [list(Q) for Q in rep.lattice_basis],
        "rank": rep.rank,
        "integrals": [{"monomial": list(Q), "is_integral": ok} for Q, ok in rep.integral_flags],
        "corank_one_case": rep.simplified_A_case,
        "coefficients_collinear": rep.collinear,
        "collinear_witness": (list(rep.collinear_witness[0]) if rep.collinear_witness else None),
        "corank_two_conjugate_case": rep.A2_case,
        "conjugate_independent": rep.conjugate_independent,
        "root_of_unity_spectrum": {
            "detected": rep.cyclotomic.detected,
            "shape_condition": rep.cyclotomic.shape_holds,
            "product_monomial_integral": rep.cyclotomic.product_integral,
            "equivalent": rep.cyclotomic.agree,
        },
        "claims": rep.claims,
        "_timing": time.perf_counter() - t0,
    }


def cmd_commuting(problem: Problem, args) -> dict:
    fam = problem.require_family()
    t0 = time.perf_counter()
    com = check_commute(fam)
    if not com.ok:
        return {"commutes": False, "witness": {"pair": list(com.pair),
                                               "degree": list(com.exponent)},
                "_timing": time.perf_counter() - t0}
    res = simultaneous_normalize(fam)
    rep = check_AL(res.family)
    oms = omega_sharp(fam.lams, args.omega or 3)
    return {
        "commutes": True,
        "members": [ser_field_obj(F) for F in res.family],
        "transform": ser_transform(res.transform),
        "verified": all(r.ok for r in res.verifications),
        "family_shape_condition": rep.holds,
        "omega_sharp": {
            "entries": [{"p": e.p, "lower": _f17(e.lower), "upper": _f17(e.upper),
                         "member": e.member} for e in oms.entries],
            "partial_sum_upper": _f17(oms.partial_sum_upper),
        },
        "steps": [{"degree": list(r.degree), "delta": ser_scalar(r.delta),
                   "block": r.block} for r in res.log],
        "_timing": time.perf_counter() - t0,
    }


# ---------------------------------------------------------------------------
# Driver


def _collect_timings(node, path, sink):
    if isinstance(node, dict):
        t = node.pop("_timing", None)
        if t is not None:
            sink[path or "total"] = round(t, 6)
        for k, v in node.items():
            _collect_timings(v, f"{path}.{k}" if path else k, sink)
    elif isinstance(node, list):
        for i, v in enumerate(node):
            _collect_timings(v, f"{path}[{i}]", sink)


def build_report(problem: Problem, command: str, results: dict) -> dict:
    timings = {}
    _collect_timings(results, "", timings)
    return {
        "tool": {"name": "nfkit", "version": __version__},
        "command": command,
        "input": echo_input(problem),
        "results": results,
        "timings": timings,
    }


def make_parser():
    p = argparse.ArgumentParser(prog="nfkit",
                                description="Exact normal forms of formal vector fields")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("problem", help="problem file (JSON)")
        sp.add_argument("--json", action="store_true", help="compact machine output")
        sp.add_argument("--order", type=int, default=None)

    sp = sub.add_parser("normalize", help="compute a normal form and transformation")
    common(sp)
    sp.add_argument("--mode", choices=MODES, default=None)

    sp = sub.add_parser("check", help="resonance / convergence-condition diagnostics")
    common(sp)
    sp.add_argument("--omega", type=int, default=None, metavar="K_MAX")
    sp.add_argument("--siegel", action="store_true")
    sp.add_argument("--hull", default=None, metavar="C")
    sp.add_argument("--as", dest="check_as", action="store_true")
    sp.add_argument("--al", dest="check_al", action="store_true")
    sp.add_argument("--estimate", default=None, metavar="RHO")
    sp.add_argument("--estimate-k", type=int, default=1)
    sp.add_argument("--scan-bound", type=int, default=32)

    sp = sub.add_parser("integrals", help="first-integral and integrability report")
    common(sp)

    sp = sub.add_parser("commuting", help="simultaneous normalization of a family")
    common(sp)
    sp.add_argument("--omega", type=int, default=None, metavar="P_MAX")
    return p


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        problem = load_problem(args.problem)
        if args.command == "normalize":
            results = cmd_normalize(problem, args)
        elif args.command == "check":
            results = cmd_check(problem, args)
        elif args.command == "integrals":
            results = cmd_integrals(problem, args)
        else:
            results = cmd_commuting(problem, args)
    except ProblemSpecError as e:
        print(f"nfkit: problem error: {e}", file=sys.stderr)
        return 2
    except NfkitError as e:
        print(f"nfkit: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    report = build_report(problem, args.command, results)
    if args.json:
        print(json.dumps(report, separators=(",", ":")))
    else:
        print(json.dumps(report, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
