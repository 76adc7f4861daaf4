"""Command-line front end: reads group/curve/sample files, runs one operation, writes a JSON report.

Exit codes: 0 success, 1 usage or input error, 2 certification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from math import lcm

from .exactarith import PrecisionError, format_cyc
from .gl2 import (
    GL2, CertificationError, OpenSubgroup, certify_level, commutator_open,
    format_group, read_group_file,
)

SCHEMA_VERSION = 1
SAFE_INT = 2 ** 53
ENUMERATION_CAP = 2_000_000   # elements of G meet SL2 the coset tables may enumerate

COMMANDS = ["analyze", "commutator", "closure", "maximal", "cusps", "genus",
            "mfbasis", "model", "jmap", "image", "ap", "locate"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="artifact", description="Open subgroups of GL2, modular curves and Galois images.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--group", help="group file (line 1: GL2|SL2 N, then a b c d per line)")
    p.add_argument("--normal", help="group file for the normal subgroup (image)")
    p.add_argument("--curve", help="a1,a2,a3,a4,a6 as rationals")
    p.add_argument("--j", dest="jvalue", help="j-invariant as a rational (locate)")
    p.add_argument("--k", type=int, help="weight")
    p.add_argument("--prec", type=int, help="number of q-expansion terms")
    p.add_argument("--bound", type=int, default=500, help="prime bound for a_p (default 500)")
    p.add_argument("--modulus", type=int, help="modulus the character factors through (image)")
    p.add_argument("--trace-modulus", type=int, help="modulus for the trace/det filter (image)")
    p.add_argument("--catalog", help="directory of NAME.grp and NAME.jmap files")
    p.add_argument("--samples", help="file of 'p a_p' or 'p label' lines")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="include wall-clock timing in the report")
    p.add_argument("--json", dest="json_out", help="write the report here instead of stdout")
    return p


# ------------------------------------------------------------------ input

def parse_curve(text: str):
    from .galoisimage import EllCurveQ
    parts = [x.strip() for x in text.split(",")]
    if len(parts) != 5:
        raise UsageError("--curve needs five comma-separated rationals")
    try:
        return EllCurveQ(*(Fraction(x) for x in parts))
    except (ValueError, ZeroDivisionError) as e:
        raise UsageError(f"bad curve: {e}") from e


def read_samples(path: str) -> tuple[list, list]:
    """Sample lines and optional quotient generator lines.

    'p a_p' gives a trace; 'p v1,v2,...' gives a quotient label (one coordinate
    is written 'v,').  'rep a b c d n' fixes the quotient generators and their
    orders, in label order.
    """
    out, reps = [], []
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#")[0].strip()
            if not line:
                continue
            fields = line.split()
            try:
                if fields[0] == "rep":
                    if len(fields) != 6:
                        raise ValueError("expected 'rep a b c d order'")
                    reps.append((tuple(int(x) for x in fields[1:5]), int(fields[5])))
                    continue
                if len(fields) != 2:
                    raise ValueError("expected 'p value'")
                p = int(fields[0])
                if "," in fields[1]:
                    out.append((p, [int(x) for x in fields[1].split(",") if x]))
                else:
                    out.append((p, int(fields[1])))
            except ValueError as e:
                raise UsageError(f"{path}:{n}: {e}") from e
    return out, reps


def read_catalog(path: str) -> list:
    """Catalog entries from NAME.grp files with a matching NAME.jmap.

    A j-map file has lines 'numerator = <poly in t>' and 'denominator = <poly in t>'.
    """
    import sympy
    from .galoisimage import CatalogEntry
    if not os.path.isdir(path):
        raise UsageError(f"{path} is not a directory")
    t = sympy.Symbol("t")
    entries = []
    for name in sorted(os.listdir(path)):
        if not name.endswith(".grp"):
            continue
        stem = name[:-4]
        jpath = os.path.join(path, stem + ".jmap")
        if not os.path.exists(jpath):
            continue
        G = certify_level(_read_group(os.path.join(path, name)))
        fields = {}
        with open(jpath) as fh:
            for line in fh:
                if "=" in line:
                    k, v = line.split("=", 1)
                    fields[k.strip()] = sympy.sympify(v.strip(), locals={"t": t})
        if "numerator" not in fields:
            raise UsageError(f"{jpath}: missing numerator")
        entries.append(CatalogEntry(G, fields["numerator"], fields.get("denominator", 1), stem))
    return entries


def _read_group(path: str) -> OpenSubgroup:
    try:
        return read_group_file(path)
    except OSError as e:
        raise UsageError(str(e)) from e
    except ValueError as e:
        raise UsageError(f"{path}: {e}") from e


def _need(args, name: str):
    v = getattr(args, name)
    if v is None:
        raise UsageError(f"{args.command} needs --{name.replace('_', '-')}")
    return v


def _group(args) -> OpenSubgroup:
    return certify_level(_read_group(_need(args, "group")))


def _det_full_gl2(G: OpenSubgroup):
    if G.ambient != GL2 or not G.det_full():
        raise UsageError("this command needs a GL2 group with full determinant")
    img = G.image if G.level >= 2 else G.at(2)
    if _sl2_order(img) > ENUMERATION_CAP:
        raise UsageError(f"G meet SL2 has more than {ENUMERATION_CAP} elements; too large to enumerate cosets")
    return img


def _sl2_order(img) -> int:
    return img.order() // len(img.det_image())


# ------------------------------------------------------------ reporting

def _jsonable(x):
    if isinstance(x, (bool, str, float)) or x is None:
        return x
    if isinstance(x, int):
        return x if abs(x) < SAFE_INT else str(x)
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 or abs(x.numerator) >= SAFE_INT else x.numerator
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return str(x)


def dump_report(report: dict) -> str:
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


def _group_record(G: OpenSubgroup) -> dict:
    return {"ambient": G.ambient, "level": G.level, "index": G.index(),
            "level_certified": G.minimal, "file": format_group(G)}


# ------------------------------------------------------------- commands

def cmd_analyze(args) -> tuple[dict, dict]:
    from .agreeable import is_agreeable
    from .congruence import CongruenceData
    from .gl2 import contains_scalars
    G = _group(args)
    res = _group_record(G)
    res["det_full"] = G.det_full() if G.ambient == GL2 else None
    C = commutator_open(G)
    res["commutator"] = {"level": C.level, "index": C.index()}
    flags = {"level": True, "commutator_level": True}
    if G.ambient == GL2:
        res["contains_scalars"] = contains_scalars(G)
        res["agreeable"] = is_agreeable(G)
        img = G.image if G.level >= 2 else G.at(2)
        if res["det_full"] and _sl2_order(img) > ENUMERATION_CAP:
            res["genus"] = None
            res["genus_skipped"] = "G meet SL2 too large to enumerate"
        elif res["det_full"]:
            data = CongruenceData(img)
            gd = data.gamma_data()
            res["genus"] = gd.genus
            res["cusp_count"] = gd.cusps
            res["contains_minus_identity"] = data.has_minus_identity
    return res, flags


def cmd_commutator(args):
    G = _group(args)
    C = commutator_open(G)
    res = {"input": _group_record(G), "commutator": _group_record(C)}
    return res, {"level": True}


def cmd_closure(args):
    from .agreeable import agreeable_closure, is_agreeable
    G = _group(args)
    if G.ambient != GL2:
        raise UsageError("closure needs a GL2 group")
    A = agreeable_closure(G)
    res = {"input": _group_record(G), "closure": _group_record(A),
           "input_agreeable": is_agreeable(G)}
    return res, {"level": True}


def cmd_maximal(args):
    from .agreeable import maximal_agreeable
    G = _group(args)
    if G.ambient != GL2:
        raise UsageError("maximal needs a GL2 group")
    subs = maximal_agreeable(G)
    recs = sorted((_group_record(H) for H in subs), key=lambda r: (r["level"], r["index"], r["file"]))
    return {"input": _group_record(G), "count": len(recs), "subgroups": recs}, {"level": True, "complete": True}


def cmd_cusps(args):
    from .congruence import CongruenceData
    G = _group(args)
    data = CongruenceData(_det_full_gl2(G))
    return {"group": _group_record(G), **data.to_record()}, {"exact": True}


def cmd_genus(args):
    from .congruence import CongruenceData
    G = _group(args)
    gd = CongruenceData(_det_full_gl2(G)).gamma_data()
    res = {"genus": gd.genus, "index": gd.index, "cusps": gd.cusps, "v2": gd.v2, "v3": gd.v3,
           "irregular_cusps": gd.irregular}
    return res, {"exact": True}


def _series_record(s) -> list:
    return [[e, format_cyc(c)] for e, c in s.terms()]


def cmd_mfbasis(args):
    from .modforms import FormSpace, _decode, mk_basis, nice_basis
    G = _group(args)
    k = _need(args, "k")
    space = FormSpace(_det_full_gl2(G), k)
    basis = nice_basis(mk_basis(space, k), lll=True) if space.dim else []
    prec = args.prec if args.prec is not None else space.sturm.b
    forms = []
    for f in basis:
        exps = f.expansions(prec)
        forms.append({
            "weight": k,
            "cusps": [{"width": c.width, "series": _series_record(s)} for c, s in zip(space.cusps, exps)],
            "monomials": [{"coefficient": c, "alphas": [list(_decode(e, space.N)) for e in tup], "zeta_power": j}
                          for c, tup, j in f.terms],
        })
    res = {"group": _group_record(G), "N": space.N, "k": k, "dimension": space.dim,
           "sturm_terms": space.sturm.b, "precision": prec, "forms": forms}
    return res, {"sturm": prec >= space.sturm.b}


def _model_record(model) -> dict:
    from .curvemodels import poly_str
    return {
        "weights": [model.k] * (model.d + 1),
        "dimension": model.d,
        "genus": model.genus,
        "canonical": model.canonical,
        "hyperelliptic": model.hyperelliptic,
        "divisor": model.divisor,
        "ideal": {str(n): [poly_str(F) for F in model.ideal[n]] for n in sorted(model.ideal)},
        "ideal_coefficients": {str(n): [[[list(e), c] for e, c in sorted(F.items(), reverse=True)]
                                        for F in model.ideal[n]] for n in sorted(model.ideal)},
        "cusp_images": [[format_cyc(c) for c in pt] for pt in model.cusp_images],
    }


def _model_for(args):
    from .curvemodels import curve_model
    G = _group(args)
    return G, curve_model(_det_full_gl2(G))


def cmd_model(args):
    G, model = _model_for(args)
    return {"group": _group_record(G), **_model_record(model)}, {"sturm": True}


def cmd_jmap(args):
    from .curvemodels import jmap, poly_str
    G, model = _model_for(args)
    J = jmap(model)
    res = {"group": _group_record(G), "model": _model_record(model), "degree": J.degree,
           "route": J.route, "F1": poly_str(J.F1), "F2": poly_str(J.F2)}
    if J.hauptmodul is not None:
        import sympy
        num, den = sympy.fraction(sympy.cancel(J.rational_function("t")))
        res["numerator"] = str(sympy.expand(num))
        res["denominator"] = str(sympy.expand(den))
    return res, {"sturm": True, "degree_equals_index": J.degree == model.data.gamma_data().index}


def _ap_pair(item):
    from .galoisimage import ap_count
    E, p = item
    return p, ap_count(E, p)


def _ap_table(E, primes, threads: int) -> list[tuple[int, int]]:
    items = [(E, p) for p in primes]
    if threads > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            out = list(ex.map(_ap_pair, items, chunksize=16))
    else:
        out = [_ap_pair(x) for x in items]
    return sorted(out)


def cmd_ap(args):
    from .galoisimage import good_primes
    E = parse_curve(_need(args, "curve"))
    table = _ap_table(E, good_primes(E, args.bound), args.threads)
    res = {"curve": str(E), "j": E.j, "discriminant": E.disc, "bound": args.bound,
           "ap": [[p, a] for p, a in table]}
    return res, {"exact": True}


def cmd_image(args):
    from .agreeable import quotient_presentation
    from .galoisimage import (
        FrobeniusSample, assemble_image, gamma_candidates, good_primes, serre_curve_data,
        trace_det_filter,
    )
    E = parse_curve(args.curve) if args.curve else None
    if args.group is None:
        if E is None:
            raise UsageError("image needs --curve, or --group with --normal and --samples")
        sd = serre_curve_data(E)
        res = {"curve": str(E), "serre_d": sd.d, "group": _group_record(sd.group)}
        flags = {"level": True}
        if args.bound:
            ps = good_primes(E, args.bound, exclude=sd.group.level)
            samples = [FrobeniusSample(p, a) for p, a in _ap_table(E, ps, args.threads)]
            f = trace_det_filter(sd.group.image if sd.group.level >= 2 else sd.group.at(2), samples)
            res["frobenius_compatible"] = f.compatible
            res["excluded_by"] = f.excluded_by
        return res, flags
    G = _group(args)
    normal = certify_level(_read_group(_need(args, "normal")))
    raw, reps = read_samples(_need(args, "samples"))
    if reps:
        P = quotient_presentation(G, normal, reps=[r for r, _ in reps], orders=[o for _, o in reps])
    else:
        P = quotient_presentation(G, normal)
    Q = P.quotient
    labelled = [(p, tuple(v)) for p, v in raw if isinstance(v, list)]
    if not labelled:
        raise UsageError("image needs quotient-labelled samples ('p v1,v2,...')")
    M = _need(args, "modulus")
    cands = gamma_candidates(Q, labelled, M, Q.exponent)
    results = []
    for gam in cands:
        img = assemble_image(P, gam.minimal())
        rec = {"conductor": gam.conductor(), "image": _group_record(img.group),
               "transpose": _group_record(img.transpose), "det_full": img.group.det_full()}
        if E is not None and args.trace_modulus:
            m = args.trace_modulus
            ps = good_primes(E, args.bound, exclude=lcm(m, img.level))
            samples = [FrobeniusSample(p, a) for p, a in _ap_table(E, ps, args.threads)]
            f = trace_det_filter(img.group.at(m), samples)
            rec["frobenius_compatible"] = f.compatible
            rec["excluded_by"] = f.excluded_by
        results.append(rec)
    results.sort(key=lambda r: (r["conductor"], r["image"]["file"]))
    res = {"ambient": _group_record(G), "normal": _group_record(normal),
           "quotient_orders": Q.orders, "quotient_reps": [list(r) for r in Q.reps],
           "candidates": results}
    alive = [r for r in results if r.get("frobenius_compatible", True)]
    res["surviving_conductors"] = [r["conductor"] for r in alive]
    return res, {"level": True, "unique": len(alive) == 1}


def cmd_locate(args):
    from .galoisimage import catalog_locate
    entries = read_catalog(_need(args, "catalog"))
    if args.jvalue is not None:
        try:
            j = Fraction(args.jvalue)
        except (ValueError, ZeroDivisionError) as e:
            raise UsageError(f"bad j: {e}") from e
    else:
        j = parse_curve(_need(args, "curve")).j
    r = catalog_locate(j, entries)
    res = {"j": j, "entry": r.entry.name if r.entry else None, "parameter": r.parameter,
           "group": _group_record(r.group), "hits": [e.name for e in r.candidates]}
    return res, {"exact": True}


HANDLERS = {name: globals()["cmd_" + name] for name in COMMANDS}


def run(argv: list[str]) -> tuple[int, dict]:
    """Execute one command; returns (exit code, report)."""
    t0 = time.perf_counter()
    report: dict = {"schema_version": SCHEMA_VERSION}
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        report.update(command=None, error=str(e), status="usage_error")
        return 1, report
    report["command"] = args.command
    report["inputs"] = {k: v for k, v in sorted(vars(args).items())
                        if v is not None and k not in ("command", "json_out", "timing")}
    try:
        results, flags = HANDLERS[args.command](args)
        code, status = 0, "ok"
        report.update(results=results, certification=flags)
    except UsageError as e:
        code, status = 1, "usage_error"
        report["error"] = str(e)
    except (CertificationError, PrecisionError, ArithmeticError) as e:
        code, status = 2, "certification_failure"
        report["error"] = f"{type(e).__name__}: {e}"
    except ValueError as e:
        code, status = 1, "input_error"
        report["error"] = str(e)
    except RuntimeError as e:
        code, status = 2, "certification_failure"
        report["error"] = f"{type(e).__name__}: {e}"
    report["status"] = status
    if args.timing:
        report["timing_seconds"] = round(time.perf_counter() - t0, 3)
    report["_json_out"] = args.json_out
    return code, report


def main(argv: list[str] | None = None) -> int:
    code, report = run(sys.argv[1:] if argv is None else argv)
    out = report.pop("_json_out", None)
    text = dump_report(report)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
        print(f"{report.get('command')}: {report['status']} (report written to {out})")
    else:
        sys.stdout.write(text)
    if code == 1 and "error" in report:
        print(f"error: {report['error']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
