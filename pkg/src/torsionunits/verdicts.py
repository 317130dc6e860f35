"""Order-by-order orchestration and the verdicts built on top of it.

enumerate_chains assembles every compatible way of fixing the proper-power
partial augmentations from lower-order survivors, solves each resulting
constraint system, and aggregates the surviving top-level vectors into an
OrderReport.  GroupAnalysis memoizes reports per order and derives the
group-level verdicts: whether the constraints force every torsion unit
onto a group element (zc1_by_help), whether cyclic subgroup orders beyond
the element orders are excluded (sipc), the same for products of two
primes (pq), and whether any surviving unit can sit inside the kernel of
an irreducible character.
"""

from __future__ import annotations

import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from .chartab import CharacterTable, _prime_factors
from .cyclotomic import from_rational
from .helpcore import (HelpError, HelpOptions, PAVector, PowerChain,
                       _divisors, build_system, candidate_classes,
                       multiplicity_form)
from .intsolve import DEFAULT_NODE_CAP, SolutionSet, enumerate_solutions

FORMAT_VERSION = 1


class IncompleteReport(HelpError):
    """A computation needed a lower-order report that was capped."""


class InvariantError(HelpError):
    """A mathematical invariant failed; indicates corrupt data or a bug,
    never an open problem."""


@dataclass(frozen=True)
class OrderReport:
    """Everything the solver learned about hypothetical units of one order.

    survivors pairs each examined chain having at least one solution with
    its full solution set; var_labels names the coordinates of every
    solution tuple.  trivial_only means each surviving vector is the
    indicator of a class whose elements have exactly this order, which is
    the rational-conjugacy criterion for being a group element.
    """

    order: int
    chains_examined: int
    survivors: tuple     # ((PowerChain, SolutionSet), ...)
    trivial_only: bool
    complete: bool
    var_labels: tuple

    def surviving_vectors(self):
        out = set()
        for _chain, sols in self.survivors:
            out.update(sols.solutions)
        return sorted(out)


@dataclass(frozen=True)
class KernelFindings:
    """kernel_check outcome for one character at one prime order."""

    order: int
    character: str
    shortcut: bool   # one constant non-degree value on all relevant classes
    checked: int
    flagged: tuple   # surviving tuples with chi(v) = chi(1)


@dataclass(frozen=True)
class WitnessReport:
    """torsion_free_witness outcome: the two-step construction applies
    when no surviving unit of prime order can lie in the kernel."""

    character: str
    p: int
    succeeded: bool
    primes: tuple    # (r, flagged count, report complete)


@dataclass(frozen=True)
class GroupVerdict:
    zc1_by_help: tuple   # ("proved", ()) or ("open", (orders...))
    sipc: tuple          # ("proved", ()) or ("open", (orders...))
    pq: tuple            # ("proved", ()) or ("open", ((p, q)...))
    kernel_findings: tuple   # ((prime, character name, flagged?), ...)

    def __post_init__(self):
        # the three questions weaken left to right, so a proof must cascade
        if self.zc1_by_help[0] == "proved" and self.sipc[0] != "proved":
            raise InvariantError("verdict inconsistency: zc1 without sipc")
        if self.sipc[0] == "proved" and self.pq[0] != "proved":
            raise InvariantError("verdict inconsistency: sipc without pq")


def _is_prime(n):
    return n > 1 and _prime_factors(n) == [n]


def _indicator_tuple(table, labels, vec, n):
    """vec is the indicator of a class of element order exactly n."""
    hits = [lab for lab, v in zip(labels, vec) if v]
    if len(hits) != 1 or vec[labels.index(hits[0])] != 1:
        return False
    return table.classes[table.class_index(hits[0])].element_order == n


def _full_level_map(chain, top_vec):
    out = {e: chain.level(e) for e in _divisors(chain.order)
           if 1 < e < chain.order}
    out[chain.order] = top_vec
    return out


def _chain_candidates(table, n, lower):
    """Every consistent assignment of proper-power vectors for order n.

    One choice of survivor per maximal proper divisor pins every level;
    choices disagreeing on a shared divisor, or failing the power-map
    compatibility congruences, are skipped.
    """
    pools = []
    for m in sorted({n // p for p in _prime_factors(n)}):
        if m == 1:
            continue
        rep = lower[m]
        cand = candidate_classes(table, m)
        pool = []
        for chain, sols in rep.survivors:
            for t in sols.solutions:
                vec = PAVector.make(m, {cand[i]: v
                                        for i, v in enumerate(t) if v})
                pool.append(_full_level_map(chain, vec))
        pools.append(pool)

    merged = {}
    for combo in itertools.product(*pools):
        levels = {}
        ok = True
        for full in combo:
            for e, v in full.items():
                if levels.setdefault(e, v) != v:
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            continue
        key = tuple(sorted((e, v.entries) for e, v in levels.items()))
        if key in merged:
            continue
        try:
            merged[key] = PowerChain.of(n, levels, table)
        except HelpError:
            continue
    return [merged[k] for k in sorted(merged)]


def _solve_chain(table, n, chain, options, cap, quotient_choices):
    if not quotient_choices:
        return enumerate_solutions(build_system(table, n, chain, options),
                                   cap=cap)
    # a unit consistent with ANY admissible image survives, so the sets
    # obtained for the individual quotient vectors are unioned
    sols = set()
    nodes = 0
    complete = True
    for qv in quotient_choices:
        if options.p_part and qv.unit_order >= n:
            # the p-part hypothesis conditions on the image order dropping
            continue
        r = enumerate_solutions(
            build_system(table, n, chain,
                         replace(options, quotient_vector=qv)),
            cap=cap)
        sols.update(r.solutions)
        nodes += r.node_count
        complete = complete and r.complete
    return SolutionSet(tuple(sorted(sols)), complete, nodes)


def enumerate_chains(table, n, options=None, lower=None,
                     cap=DEFAULT_NODE_CAP, jobs=1,
                     quotient_choices=None) -> OrderReport:
    """Solve order n over every chain assembled from lower-order reports.

    lower maps each proper divisor (> 1) of n to its OrderReport; when
    omitted the reports are computed recursively.  quotient_choices (each
    an admissible image vector in the fusion target) constrain only the
    top-level solve, as a union over the choices; lower reports stay
    unconstrained, which can only widen the chain pool and never loses a
    survivor.  Indicator chains of actual group elements are asserted to
    pass their own system: a failure there means corrupt table data, not
    mathematics, and raises.
    """
    options = options if options is not None else HelpOptions()
    if n < 2 or table.exponent % n:
        raise HelpError("unit order %d does not divide the exponent %d"
                        % (n, table.exponent))
    proper = [d for d in _divisors(n) if 1 < d < n]
    if lower is None:
        # image-order assumptions (quotient vector, p-part drop) state
        # facts about the order-n unit only; its powers get unconstrained
        # reports, a sound superset of their true survivors
        low_opts = replace(options, quotient_vector=None, p_part=False)
        lower = {}
        for d in proper:
            lower[d] = enumerate_chains(table, d, low_opts,
                                        lower={e: lower[e] for e in
                                               _divisors(d) if 1 < e < d},
                                        cap=cap, jobs=jobs)
    for d in proper:
        if d not in lower:
            raise HelpError("missing report for order %d" % d)
        if not lower[d].complete:
            raise IncompleteReport("incomplete report for order %d" % d)

    chains = _chain_candidates(table, n, lower)
    if jobs > 1 and len(chains) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            futures = [ex.submit(_solve_chain, table, n, ch, options,
                                 cap, quotient_choices) for ch in chains]
            results = [f.result() for f in futures]
    else:
        results = [_solve_chain(table, n, ch, options, cap,
                                quotient_choices) for ch in chains]

    labels = tuple(table.classes[i].name
                   for i in candidate_classes(table, n))
    survivors = []
    complete = True
    trivial_only = True
    for chain, sols in zip(chains, results):
        complete = complete and sols.complete
        if sols.solutions:
            survivors.append((chain, sols))
            for t in sols.solutions:
                if not _indicator_tuple(table, labels, t, n):
                    trivial_only = False

    # sanity anchor: group elements are units, so their chains must pass;
    # checked without the conditional hypotheses, which an actual element
    # is free to violate
    anchor_opts = replace(options, quotient_vector=None, p_part=False)
    for i, cl in enumerate(table.classes):
        if cl.element_order != n:
            continue
        tsys = build_system(table, n, PowerChain.trivial(table, i),
                            anchor_opts)
        ind = tuple(1 if lab == cl.name else 0 for lab in labels)
        if not tsys.check_point(ind):
            raise InvariantError("internal invariant violated: the chain of "
                            "group element class %s fails its own system"
                            % cl.name)

    return OrderReport(order=n, chains_examined=len(chains),
                       survivors=tuple(survivors),
                       trivial_only=trivial_only, complete=complete,
                       var_labels=labels)


class GroupAnalysis:
    """Memoized per-order pipeline plus the group-level verdicts.

    quotient_document, when given, must be a report document for the
    fusion target; its surviving vectors bound the possible images of a
    unit, at every order.  The p-part and quotient-vector hypotheses in
    options describe the unit of the order under study only, so the
    pyramid of lower-order reports is always built without them.
    """

    def __init__(self, table: CharacterTable, options=None,
                 cap=DEFAULT_NODE_CAP, jobs=1, quotient_document=None):
        self.table = table
        self.options = options if options is not None else HelpOptions()
        self.cap = cap
        self.jobs = jobs
        self.quotient_document = quotient_document
        if quotient_document is not None:
            if self.options.fusion is None:
                raise HelpError("a quotient report needs the class fusion "
                                "data tying it to this group")
            name = quotient_document.get("group")
            want = self.options.fusion.target.group_name
            if name != want:
                raise HelpError("quotient report describes %r, the fusion "
                                "target is %r" % (name, want))
        self._base = replace(self.options, quotient_vector=None,
                             p_part=False)
        self._lower = {}
        self._reports = self._lower if self._base == self.options else {}

    def _choices(self, n):
        if self.quotient_document is None:
            return None
        return quotient_choices_from_document(
            self.quotient_document, self.options.fusion.target, n)

    def _lower_report(self, d) -> OrderReport:
        # quotient image bounds transfer to powers (the image of u^e is
        # the e-th power of the image), so they do sharpen this pyramid
        if d not in self._lower:
            low = {e: self._lower_report(e)
                   for e in _divisors(d) if 1 < e < d}
            self._lower[d] = enumerate_chains(
                self.table, d, self._base, lower=low,
                cap=self.cap, jobs=self.jobs,
                quotient_choices=self._choices(d))
        return self._lower[d]

    def order_report(self, n) -> OrderReport:
        if n not in self._reports:
            lower = {d: self._lower_report(d)
                     for d in _divisors(n) if 1 < d < n}
            self._reports[n] = enumerate_chains(
                self.table, n, self.options, lower=lower,
                cap=self.cap, jobs=self.jobs,
                quotient_choices=self._choices(n))
        return self._reports[n]

    def order_chains(self, n):
        """Every assembled power chain for order n, solved or not."""
        lower = {d: self._lower_report(d)
                 for d in _divisors(n) if 1 < d < n}
        return _chain_candidates(self.table, n, lower)

    def capped_orders(self):
        """Orders whose enumeration has hit the node cap so far."""
        bad = set()
        for memo in (self._lower, self._reports):
            for m, rep in memo.items():
                if not rep.complete:
                    bad.add(m)
        return tuple(sorted(bad))

    def unit_orders(self):
        """Orders a torsion unit can a priori have: divisors (> 1) of the
        exponent."""
        return [d for d in _divisors(self.table.exponent) if d > 1]

    def element_orders(self):
        return set(c.element_order for c in self.table.classes)

    def zc1(self):
        open_orders = []
        for n in self.unit_orders():
            try:
                rep = self.order_report(n)
            except IncompleteReport:
                open_orders.append(n)
                continue
            if not (rep.complete and rep.trivial_only):
                open_orders.append(n)
        return ("proved", ()) if not open_orders \
            else ("open", tuple(open_orders))

    def sipc(self):
        elem = self.element_orders()
        open_orders = []
        for n in self.unit_orders():
            if n in elem:
                continue
            try:
                rep = self.order_report(n)
            except IncompleteReport:
                open_orders.append(n)
                continue
            if rep.survivors or not rep.complete:
                open_orders.append(n)
        return ("proved", ()) if not open_orders \
            else ("open", tuple(open_orders))

    def prime_graph_edges(self):
        """(group edges, possible unit edges): pairs of primes admitting
        an element / a surviving unit of order p*q."""
        primes = _prime_factors(self.table.exponent)
        elem = self.element_orders()
        group_edges = []
        unit_edges = []
        for p, q in itertools.combinations(primes, 2):
            if p * q in elem:
                group_edges.append((p, q))
                unit_edges.append((p, q))
                continue
            try:
                rep = self.order_report(p * q)
            except IncompleteReport:
                unit_edges.append((p, q))
                continue
            if rep.survivors or not rep.complete:
                unit_edges.append((p, q))
        return tuple(group_edges), tuple(unit_edges)

    def pq(self):
        group_edges, unit_edges = self.prime_graph_edges()
        open_pairs = tuple(e for e in unit_edges if e not in group_edges)
        return ("proved", ()) if not open_pairs else ("open", open_pairs)

    def kernel_findings(self):
        out = []
        for r in _prime_factors(self.table.exponent):
            rep = self.order_report(r)
            if not rep.complete:
                # a capped survivor list can miss kernel members, so no
                # claim is recorded for this prime
                continue
            for chi in self.table.characters:
                f = kernel_check(self.table, rep, chi)
                out.append((r, chi.name, bool(f.flagged)))
        return tuple(out)

    def verdict(self) -> GroupVerdict:
        return GroupVerdict(zc1_by_help=self.zc1(), sipc=self.sipc(),
                            pq=self.pq(),
                            kernel_findings=self.kernel_findings())


def zc1_report(table, options=None, cap=DEFAULT_NODE_CAP, jobs=1):
    return GroupAnalysis(table, options, cap=cap, jobs=jobs).zc1()


def sipc_report(table, options=None, cap=DEFAULT_NODE_CAP, jobs=1):
    return GroupAnalysis(table, options, cap=cap, jobs=jobs).sipc()


def pq_report(table, options=None, cap=DEFAULT_NODE_CAP, jobs=1):
    return GroupAnalysis(table, options, cap=cap, jobs=jobs).pq()


def kernel_check(table, report: OrderReport, chi) -> KernelFindings:
    """Which surviving vectors of prime order r could lie in ker(chi)?

    A vector v lies in the kernel precisely when chi(v) = chi(1), i.e.
    all eigenvalue multiplicity concentrates at 1.  When chi takes a
    single value t != chi(1) on every class of order r, no v can be
    flagged at all, since chi(v) = t * (sum of partial augmentations) = t.
    """
    r = report.order
    if not _is_prime(r):
        raise HelpError("kernel check requires a prime order, got %d" % r)
    cand = candidate_classes(table, r)
    deg = from_rational(chi.degree)
    vals = [chi.values[i] for i in cand]
    shortcut = bool(vals) and all(v == vals[0] for v in vals) \
        and vals[0] != deg
    flagged = []
    checked = 0
    for t in report.surviving_vectors():
        checked += 1
        total = from_rational(0)
        for i, v in zip(cand, t):
            if v:
                total = total + chi.values[i] * v
        if total == deg:
            flagged.append(t)
    if shortcut and flagged:
        raise InvariantError("internal invariant violated: constant-value "
                        "shortcut contradicts a kernel flag for %s"
                        % chi.name)
    return KernelFindings(order=r, character=chi.name, shortcut=shortcut,
                          checked=checked, flagged=tuple(flagged))


def character_is_rational(chi) -> bool:
    return all(v.is_rational for v in chi.values)


def character_is_faithful(table, chi) -> bool:
    deg = from_rational(chi.degree)
    return all(chi.values[i] != deg for i in range(1, len(table.classes)))


def torsion_free_witness(table, chi, p, analysis=None,
                         cap=DEFAULT_NODE_CAP) -> WitnessReport:
    """Certify the torsion-free finite-index normal subgroup construction.

    Needs a faithful rational character and p an odd prime, p = 4, or
    p = 2 with |G| odd; reduction of the representation mod p then has a
    torsion-free congruence kernel, and intersecting with the kernel
    workaround only works if no unit of prime order hides in ker(chi).
    This runs the kernel sweep over all primes dividing the group order
    and reports the conjunction; it does not build the subgroup.
    """
    valid_p = (p == 4) or (_is_prime(p) and (p % 2 == 1 or
                                             table.order % 2 == 1))
    if not valid_p:
        raise HelpError("p must be an odd prime, 4, or 2 with |G| odd; "
                        "got p = %s" % (p,))
    if not character_is_rational(chi):
        raise HelpError("character %s is not rational" % chi.name)
    if not character_is_faithful(table, chi):
        raise HelpError("character %s is not faithful" % chi.name)
    if analysis is None:
        analysis = GroupAnalysis(table, cap=cap)
    rows = []
    ok = True
    for r in _prime_factors(table.order):
        rep = analysis.order_report(r)
        f = kernel_check(table, rep, chi)
        rows.append((r, len(f.flagged), rep.complete))
        ok = ok and not f.flagged and rep.complete
    return WitnessReport(character=chi.name, p=p, succeeded=ok,
                         primes=tuple(rows))


def eigenvalue_profile(table, chain: PowerChain, chi, block=None):
    """Multiplicity of each n-th root of unity among the eigenvalues of
    the unit under chi, as ((exponent, multiplicity), ...).

    Only solved chains have a profile; a fractional or negative
    multiplicity proves the top vector was not actually a survivor.
    """
    n = chain.order
    if not chain.has_level(n):
        raise HelpError("chain has no solved top level")
    point = chain.level(n).as_tuple(candidate_classes(table, n))
    out = []
    for l in range(n):
        val = multiplicity_form(table, chi, n, l, chain,
                                block=block).evaluate(point)
        if val.denominator != 1 or val < 0:
            raise HelpError("multiplicity of zeta^%d under %s is %s: "
                            "not a surviving chain" % (l, chi.name, val))
        out.append((l, int(val)))
    deg = chi.degree
    if sum(m for _, m in out) != deg:
        raise HelpError("multiplicities under %s sum to %d, expected %d"
                        % (chi.name, sum(m for _, m in out), deg))
    return tuple(out)


def root_label(l, n) -> str:
    """Display form of zeta_n^l: z powers, with the sign pulled out when
    n is even (zeta^(n/2) = -1)."""
    l %= max(n, 1)
    sign = ""
    if n % 2 == 0 and l >= n // 2:
        l -= n // 2
        sign = "-"
    if l == 0:
        return sign + "1"
    if l == 1:
        return sign + "z"
    return "%sz^%d" % (sign, l)


def render_diagonal(profile, n) -> str:
    parts = []
    for l, mult in profile:
        parts.extend([root_label(l, n)] * mult)
    return "diag(%s)" % ", ".join(parts)


def _vector_object(labels, t):
    return {lab: v for lab, v in zip(labels, t) if v}


def report_document(table, reports, verdict=None) -> dict:
    """JSON-able document: all order reports plus the verdict."""
    orders = []
    for n in sorted(reports):
        rep = reports[n]
        survivors = []
        for chain, sols in rep.survivors:
            levels = {}
            for e in _divisors(n):
                if 1 < e < n:
                    vec = chain.level(e)
                    levels[str(e)] = {table.classes[i].name: v
                                      for i, v in vec.entries}
            survivors.append({
                "levels": levels,
                "solutions": [list(t) for t in sols.solutions],
                "complete": sols.complete,
                "nodes": sols.node_count,
            })
        orders.append({
            "order": n,
            "chains_examined": rep.chains_examined,
            "complete": rep.complete,
            "trivial_only": rep.trivial_only,
            "var_labels": list(rep.var_labels),
            "survivors": survivors,
        })
    doc = {
        "format_version": FORMAT_VERSION,
        "group": table.group_name,
        "group_order": table.order,
        "exponent": table.exponent,
        "orders": orders,
    }
    if verdict is not None:
        doc["verdict"] = {
            "zc1_by_help": {"status": verdict.zc1_by_help[0],
                            "open_orders": list(verdict.zc1_by_help[1])},
            "sipc": {"status": verdict.sipc[0],
                     "open_orders": list(verdict.sipc[1])},
            "pq": {"status": verdict.pq[0],
                   "open_pairs": [list(e) for e in verdict.pq[1]]},
            "kernel_findings": [
                {"prime": r, "character": name, "flagged": fl}
                for r, name, fl in verdict.kernel_findings],
        }
    return doc


def dump_document(doc) -> str:
    """Deterministic serialization: same document, same bytes."""
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def parse_report_document(text) -> dict:
    doc = json.loads(text)
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise HelpError("not a report document: missing format_version")
    if doc["format_version"] != FORMAT_VERSION:
        raise HelpError("unsupported report format_version %r"
                        % (doc["format_version"],))
    return doc


def quotient_choices_from_document(doc, target: CharacterTable, n):
    """Admissible image vectors for a unit of order n, read from a report
    document of the quotient group: every surviving vector at every order
    dividing n, plus the identity image.

    The caller supplies the document; nothing is fabricated here.
    """
    choices = [PAVector.make(1, {0: 1})]
    by_order = {entry["order"]: entry for entry in doc.get("orders", ())}
    for m in _divisors(n):
        if m == 1 or target.exponent % m:
            continue
        entry = by_order.get(m)
        if entry is None:
            raise HelpError("quotient report lacks order %d" % m)
        if not entry.get("complete", False):
            raise IncompleteReport("quotient report incomplete at order %d" % m)
        labels = entry["var_labels"]
        idx = [target.class_index(lab) for lab in labels]
        seen = set()
        for surv in entry["survivors"]:
            for t in surv["solutions"]:
                key = tuple(t)
                if key not in seen:
                    seen.add(key)
                    choices.append(PAVector.make(
                        m, {i: v for i, v in zip(idx, t) if v}))
    return choices
