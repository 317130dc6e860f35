"""Command line front end.

    torsionunits check --table S6
    torsionunits check --table s7 --orders 6 --format structured --out s7.json
    torsionunits eigenvalues --table S6 --order 2 --tuple=-1,1,1
    torsionunits validate mytable.json other.json

check        run the full pipeline: per-order survivor reports and, when
             every possible unit order was analyzed, the group verdicts
eigenvalues  print the eigenvalue diagonal of every character at one
             surviving partial-augmentation vector
validate     load table files and report what is wrong with them

--table takes a JSON file path or the name of a bundled table.  Identical
configuration gives byte-identical output, regardless of --jobs.

Exit status: 0 the run finished (verdicts may still say "open"), 2 bad
input or configuration, 3 a node cap stopped some enumeration, 4 an
internal consistency check failed, meaning corrupt data or a bug.
"""

import argparse
import json
import os
import sys

from .chartab import (TableError, bundled_names, bundled_table, load_fusion,
                      load_table)
from .helpcore import (HelpError, HelpOptions, PAVector, _divisors,
                       candidate_classes)
from .intsolve import DEFAULT_NODE_CAP
from .verdicts import (GroupAnalysis, IncompleteReport, InvariantError,
                       dump_document, eigenvalue_profile,
                       parse_report_document, render_diagonal,
                       report_document)

FORMAT_VERSION = 1


def _load_table_arg(value):
    if os.path.isfile(value):
        with open(value) as fh:
            return load_table(fh.read())
    try:
        return bundled_table(value)
    except TableError:
        raise TableError("%r is neither a table file nor a bundled name "
                         "(bundled: %s)" % (value, ", ".join(bundled_names())))


def _bundled_by_group_name(gname):
    for name in bundled_names():
        t = bundled_table(name)
        if t.group_name == gname:
            return t
    return None


def _parse_brauer(value, table):
    if value in ("all", "none"):
        return value
    try:
        p = int(value)
    except ValueError:
        raise HelpError("--brauer takes 'all', 'none', or a prime, got %r"
                        % (value,))
    if p not in table.brauer:
        have = ", ".join(str(q) for q in sorted(table.brauer)) or "none"
        raise HelpError("table %s carries no mod-%d character data "
                        "(available blocks: %s)" % (table.group_name, p, have))
    return p


def _build_options(args, table):
    """Turn the parsed flags into HelpOptions + optional quotient report."""
    fusion = None
    if args.fusion:
        with open(args.fusion) as fh:
            try:
                fdoc = json.load(fh)
            except json.JSONDecodeError as e:
                raise TableError("fusion file %s is not valid JSON: %s"
                                 % (args.fusion, e))
        if not isinstance(fdoc, dict) or "target" not in fdoc:
            raise TableError("fusion file %s lacks a target field"
                             % args.fusion)
        target = _bundled_by_group_name(fdoc["target"])
        if target is None:
            raise TableError("fusion target %r is not a bundled table"
                             % (fdoc["target"],))
        fusion = load_fusion(table, target, fdoc)
    if args.p_part is not None:
        if fusion is None:
            raise HelpError("--p-part needs --fusion")
        if fusion.kernel_is_p_group != args.p_part:
            raise HelpError("--p-part %d does not match the fusion kernel "
                            "(declared: %s)" % (args.p_part,
                                                fusion.kernel_is_p_group))
    qdoc = None
    if getattr(args, "quotient_report", None):
        if fusion is None:
            raise HelpError("--quotient-report needs --fusion")
        with open(args.quotient_report) as fh:
            qdoc = parse_report_document(fh.read())
    options = HelpOptions(congruences=not args.no_congruences,
                          brauer=_parse_brauer(args.brauer, table),
                          fusion=fusion,
                          p_part=args.p_part is not None)
    return options, qdoc


def _parse_orders(spec, table):
    try:
        orders = sorted({int(x) for x in spec.split(",")})
    except ValueError:
        raise HelpError("--orders takes comma separated integers, got %r"
                        % (spec,))
    for n in orders:
        if n < 2 or table.exponent % n:
            raise HelpError("order %d is not a divisor > 1 of the exponent "
                            "%d" % (n, table.exponent))
    return orders


def _config_echo(args, table, options):
    cfg = {
        "congruences": options.congruences,
        "brauer": options.brauer,
        "cap": args.cap,
    }
    if options.fusion is not None:
        cfg["fusion_target"] = options.fusion.target.group_name
        if options.fusion.kernel_is_p_group:
            cfg["fusion_kernel_p"] = options.fusion.kernel_is_p_group
    if args.p_part is not None:
        cfg["p_part"] = args.p_part
    if getattr(args, "quotient_report", None):
        cfg["quotient_report"] = True
    return cfg


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fmt_tuple(t):
    return "(%s)" % ", ".join(str(v) for v in t)


def _fmt_levels(levels, n):
    parts = []
    for e in sorted(levels, key=int):
        vec = " ".join("%s:%d" % (lab, levels[e][lab])
                       for lab in sorted(levels[e]))
        parts.append("u^%d = [%s]" % (n // int(e), vec))
    return "; ".join(parts) if parts else "no proper powers"


def _render_check_text(doc):
    out = ["group %s  order %d  exponent %d" % (doc["group"],
                                                doc["group_order"],
                                                doc["exponent"])]
    cfg = doc.get("config", {})
    out.append("config: " + ", ".join("%s=%s" % (k, cfg[k])
                                      for k in sorted(cfg)))
    for entry in doc["orders"]:
        n = entry["order"]
        out.append("")
        out.append("unit order %d: %d chains, %d carrying survivors, %s"
                   % (n, entry["chains_examined"], len(entry["survivors"]),
                      "complete" if entry["complete"] else "HIT NODE CAP"))
        out.append("  classes: %s" % " ".join(entry["var_labels"]))
        for k, surv in enumerate(entry["survivors"], 1):
            out.append("  chain %d (%s): %d solutions, %s, %d nodes"
                       % (k, _fmt_levels(surv["levels"], n),
                          len(surv["solutions"]),
                          "complete" if surv["complete"] else "capped",
                          surv["nodes"]))
            for t in surv["solutions"]:
                out.append("    u = %s" % _fmt_tuple(t))
        if not entry["survivors"]:
            out.append("  no surviving vectors")
        elif entry["trivial_only"]:
            out.append("  all survivors are class indicators")
    skipped = doc.get("skipped_orders", {})
    if skipped:
        out.append("")
        for n in sorted(skipped, key=int):
            out.append("unit order %s: skipped (%s)" % (n, skipped[n]))
    v = doc.get("verdict")
    if v is not None:
        out.append("")
        out.append("verdicts:")
        for key, label, fld in (("zc1_by_help", "zc1 (by this method)",
                                 "open_orders"),
                                ("sipc", "sipc", "open_orders"),
                                ("pq", "pq", "open_pairs")):
            stat = v[key]["status"]
            if stat == "proved":
                out.append("  %s: proved" % label)
            else:
                items = v[key][fld]
                shown = ", ".join("*".join(str(x) for x in it)
                                  if isinstance(it, list) else str(it)
                                  for it in items)
                out.append("  %s: open (%s)" % (label, shown))
        flags = [(f["prime"], f["character"])
                 for f in v["kernel_findings"] if f["flagged"]]
        if flags:
            out.append("  kernel flags: "
                       + ", ".join("%s at r=%d" % (name, r)
                                   for r, name in flags))
        else:
            out.append("  kernel flags: none")
    return "\n".join(out) + "\n"


def _check_one_table(args, tname):
    table = _load_table_arg(tname)
    options, qdoc = _build_options(args, table)
    orders = _parse_orders(args.orders, table) if args.orders else None
    ga = GroupAnalysis(table, options, cap=args.cap, jobs=args.jobs,
                       quotient_document=qdoc)
    targets = orders if orders is not None else ga.unit_orders()
    reports = {}
    skipped = {}
    for n in targets:
        try:
            reports[n] = ga.order_report(n)
        except IncompleteReport as e:
            skipped[n] = str(e)
    verdict = None
    if set(targets) >= set(ga.unit_orders()):
        # sound even after skips: the verdict marks those orders open
        verdict = ga.verdict()
    doc = report_document(table, reports, verdict)
    doc["config"] = _config_echo(args, table, options)
    if orders is not None:
        doc["orders_analyzed"] = sorted(reports)
    if skipped:
        doc["skipped_orders"] = {str(n): skipped[n] for n in sorted(skipped)}
    code = 3 if (skipped or ga.capped_orders()) else 0
    return doc, code


def cmd_check(args):
    docs = []
    code = 0
    for tname in args.table:
        doc, c = _check_one_table(args, tname)
        docs.append(doc)
        code = max(code, c)
    if args.format == "structured":
        payload = docs[0] if len(docs) == 1 else \
            {"format_version": FORMAT_VERSION, "documents": docs}
        text = dump_document(payload)
    else:
        text = "\n".join(_render_check_text(d) for d in docs)
    _emit(text, args.out)
    return code


def _selected_charsets(table, n, sel):
    """(block prime or None, characters) in the order build_system uses."""
    out = [(None, table.characters)]
    if sel not in (None, "none"):
        for p in sorted(table.brauer):
            if n % p == 0:
                continue
            if sel == "all" or sel == p:
                out.append((p, table.brauer[p].characters))
    return out


def _diagonal_rows(table, chain, n, sel):
    rows = []
    for p, chars in _selected_charsets(table, n, sel):
        for chi in chars:
            row = {"character": chi.name, "degree": chi.degree}
            if p is not None:
                row["block"] = p
            try:
                prof = eigenvalue_profile(
                    table, chain, chi,
                    block=None if p is None else table.brauer[p])
                row["multiplicities"] = [m for _, m in prof]
                row["display"] = render_diagonal(prof, n)
            except HelpError as e:
                row["error"] = str(e)
            rows.append(row)
    return rows


def _render_eigen_text(doc):
    out = ["group %s  unit order %d  classes: %s"
           % (doc["group"], doc["order"], " ".join(doc["var_labels"]))]
    out.append("u = %s%s" % (_fmt_tuple(doc["tuple"]),
                             "" if doc["surviving"]
                             else "   [NOT a verified survivor]"))
    for k, ch in enumerate(doc["chains"], 1):
        out.append("")
        out.append("chain %d (%s):" % (k, _fmt_levels(ch["levels"],
                                                      doc["order"])))
        for row in ch["diagonals"]:
            name = row["character"]
            if "block" in row:
                name = "mod-%d %s" % (row["block"], name)
            if "error" in row:
                out.append("  %-14s deg %-3d  %s" % (name, row["degree"],
                                                     row["error"]))
            else:
                out.append("  %-14s deg %-3d  %s" % (name, row["degree"],
                                                     row["display"]))
    return "\n".join(out) + "\n"


def cmd_eigenvalues(args):
    table = _load_table_arg(args.table)
    options, qdoc = _build_options(args, table)
    n = args.order
    if n < 2 or table.exponent % n:
        raise HelpError("order %d is not a divisor > 1 of the exponent %d"
                        % (n, table.exponent))
    try:
        point = tuple(int(x) for x in args.tuple.split(","))
    except ValueError:
        raise HelpError("--tuple takes comma separated integers, got %r"
                        % (args.tuple,))
    cand = candidate_classes(table, n)
    labels = [table.classes[i].name for i in cand]
    if len(point) != len(cand):
        raise HelpError("tuple has %d entries, order %d needs one per "
                        "candidate class: %s" % (len(point), n,
                                                 " ".join(labels)))
    ga = GroupAnalysis(table, options, cap=args.cap, jobs=args.jobs,
                       quotient_document=qdoc)
    rep = ga.order_report(n)
    hits = [chain.with_top(PAVector.make(n, {cand[i]: v
                                             for i, v in enumerate(point)
                                             if v}))
            for chain, sols in rep.survivors if point in sols.solutions]
    surviving = bool(hits)
    if not hits:
        if not args.force:
            if not rep.complete:
                raise IncompleteReport(
                    "enumeration was capped before %s could be verified "
                    "(--force prints formal diagonals)" % _fmt_tuple(point))
            raise HelpError("%s does not survive at order %d "
                            "(--force prints formal diagonals)"
                            % (_fmt_tuple(point), n))
        print("warning: %s is not a verified survivor; diagonals are "
              "formal" % _fmt_tuple(point), file=sys.stderr)
        top = PAVector.make(n, {cand[i]: v for i, v in enumerate(point)
                                if v})
        hits = [ch.with_top(top) for ch in ga.order_chains(n)]
    chains_out = []
    for chain in hits:
        levels = {}
        for e in _divisors(n):
            if 1 < e < n:
                levels[str(e)] = {table.classes[i].name: v
                                  for i, v in chain.level(e).entries}
        chains_out.append({"levels": levels,
                           "diagonals": _diagonal_rows(table, chain, n,
                                                       options.brauer)})
    doc = {
        "format_version": FORMAT_VERSION,
        "group": table.group_name,
        "order": n,
        "tuple": list(point),
        "var_labels": labels,
        "surviving": surviving,
        "chains": chains_out,
    }
    text = dump_document(doc) if args.format == "structured" \
        else _render_eigen_text(doc)
    _emit(text, args.out)
    return 0


def cmd_validate(args):
    bad = 0
    lines = []
    for path in args.paths:
        try:
            with open(path) as fh:
                t = load_table(fh.read())
            nb = len(t.brauer)
            lines.append("%s: ok  %s, %d classes, %d characters%s"
                         % (path, t.group_name, len(t.classes),
                            len(t.characters),
                            ", %d Brauer blocks" % nb if nb else ""))
        except (TableError, OSError) as e:
            bad += 1
            lines.append("%s: INVALID  %s" % (path, e))
    _emit("\n".join(lines) + "\n", args.out)
    return 2 if bad else 0


def _add_common(sp, multi_table=False):
    if multi_table:
        sp.add_argument("--table", action="append", required=True,
                        metavar="TABLE",
                        help="table file or bundled name (repeatable)")
    else:
        sp.add_argument("--table", required=True, metavar="TABLE",
                        help="table file or bundled name")
    sp.add_argument("--no-congruences", action="store_true",
                    help="drop the power-chain congruence constraints")
    sp.add_argument("--brauer", default="all", metavar="all|none|P",
                    help="which Brauer blocks to use (default all)")
    sp.add_argument("--fusion", metavar="FILE",
                    help="class fusion document for a quotient map")
    sp.add_argument("--quotient-report", dest="quotient_report",
                    metavar="FILE",
                    help="report document of the fusion target; its "
                         "survivors bound the images of a unit")
    sp.add_argument("--p-part", dest="p_part", type=int, metavar="P",
                    help="assume the image order drops; needs a fusion "
                         "whose kernel is a P-group")
    sp.add_argument("--cap", type=int, default=DEFAULT_NODE_CAP, metavar="N",
                    help="give up after N search nodes per solve")
    sp.add_argument("--jobs", type=int, default=1, metavar="N",
                    help="solve chains in N threads (same output)")
    sp.add_argument("--format", choices=("text", "structured"),
                    default="text")
    sp.add_argument("--out", metavar="FILE", help="write here, not stdout")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="torsionunits",
        description="HeLP constraints on torsion units of integral "
                    "group rings, in exact arithmetic.")
    sub = ap.add_subparsers(dest="command", required=True)

    chk = sub.add_parser("check", help="enumerate survivors, derive "
                                       "verdicts")
    _add_common(chk, multi_table=True)
    chk.add_argument("--orders", metavar="N,M,...",
                     help="analyze only these unit orders")
    chk.set_defaults(func=cmd_check)

    eig = sub.add_parser("eigenvalues", help="character diagonals at one "
                                             "surviving vector")
    _add_common(eig)
    eig.add_argument("--order", type=int, required=True, metavar="N")
    eig.add_argument("--tuple", required=True, metavar="V,V,...",
                     help="partial augmentations over the candidate "
                          "classes of order N")
    eig.add_argument("--force", action="store_true",
                     help="print even for a non-surviving tuple")
    eig.set_defaults(func=cmd_eigenvalues)

    val = sub.add_parser("validate", help="check table files")
    val.add_argument("paths", nargs="+", metavar="FILE")
    val.add_argument("--out", metavar="FILE")
    val.set_defaults(func=cmd_validate)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "cap", 1) < 1:
        print("error: --cap must be at least 1", file=sys.stderr)
        return 2
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except IncompleteReport as e:
        print("gave up: %s" % e, file=sys.stderr)
        return 3
    except InvariantError as e:
        print("internal invariant failure: %s" % e, file=sys.stderr)
        return 4
    except (HelpError, TableError) as e:
        print("error: %s" % e, file=sys.stderr)
        return 2
    except OSError as e:
        print("error: %s" % e, file=sys.stderr)
        return 2
    except json.JSONDecodeError as e:
        print("error: invalid JSON: %s" % e, file=sys.stderr)
        return 2
    except AssertionError as e:
        print("internal invariant failure: %s" % e, file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
