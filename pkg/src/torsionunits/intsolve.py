"""Complete integer enumeration for the constraint systems.

Two stages: interval propagation squeezes every variable into a finite box
(the multiplicity constraints always admit one), then a depth-first
branch-and-prune walk emits every integer point satisfying all equalities,
inequalities and congruences.  A dumb full-box scan doubles as an
independent oracle for testing.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor, gcd

from .helpcore import LinearSystem

DEFAULT_NODE_CAP = 10 ** 8
DEFAULT_FALLBACK_BOUND = 128
DEFAULT_PROPAGATION_ROUNDS = 200

# search nodes whose remaining sub-box is larger than this get a fresh
# round of interval tightening before descending
_PROBE_VOLUME = 2048
_PROBE_ROUNDS = 4


class Infeasible:
    """Marker value: propagation proved the system has no solutions."""

    def __repr__(self):
        return "Infeasible"


INFEASIBLE = Infeasible()


@dataclass(frozen=True)
class Box:
    """Inclusive per-variable integer bounds."""

    lower: tuple
    upper: tuple
    capped: bool = False

    def is_empty(self) -> bool:
        return any(l > u for l, u in zip(self.lower, self.upper))

    def width(self, i) -> int:
        return self.upper[i] - self.lower[i]

    def volume(self) -> int:
        v = 1
        for l, u in zip(self.lower, self.upper):
            v *= max(0, u - l + 1)
        return v

    def contains(self, point) -> bool:
        return all(l <= x <= u
                   for l, x, u in zip(self.lower, point, self.upper))


@dataclass(frozen=True)
class SolutionSet:
    """Lexicographically sorted solutions plus search bookkeeping.

    complete is False when either the bound fallback or the node budget
    truncated the search, so absence of a vector proves nothing.
    """

    solutions: tuple
    complete: bool
    node_count: int

    def __contains__(self, point):
        return tuple(point) in set(self.solutions)

    def __len__(self):
        return len(self.solutions)


def _sum_max(form, skip, lo, hi):
    """Largest value of the form's variable part over the box, ignoring
    variable `skip`; None when unbounded above."""
    total = Fraction(0)
    for j, c in form.coeffs.items():
        if j == skip:
            continue
        b = hi[j] if c > 0 else lo[j]
        if b is None:
            return None
        total += c * b
    return total


def bounds(system: LinearSystem,
           fallback=DEFAULT_FALLBACK_BOUND,
           max_rounds=DEFAULT_PROPAGATION_ROUNDS):
    """Interval propagation to a fixpoint (or a round cap); unbounded
    variables fall back to +-fallback and mark the box as capped."""
    n = system.num_vars
    rows = list(system.ge)
    for f in system.eq:
        rows.append(f)
        rows.append(f * -1)
    for f in rows:
        if not f.coeffs and f.constant < 0:
            return INFEASIBLE

    lo = [None] * n
    hi = [None] * n
    for _ in range(max_rounds):
        changed = False
        for f in rows:
            for i, c in f.coeffs.items():
                s = _sum_max(f, i, lo, hi)
                if s is None:
                    continue
                # c*x_i >= -constant - s
                q = (-f.constant - s) / c
                if c > 0:
                    b = ceil(q)
                    if lo[i] is None or b > lo[i]:
                        lo[i] = b
                        changed = True
                else:
                    b = floor(q)
                    if hi[i] is None or b < hi[i]:
                        hi[i] = b
                        changed = True
                if lo[i] is not None and hi[i] is not None \
                        and lo[i] > hi[i]:
                    return INFEASIBLE
        if not changed:
            break

    capped = False
    for i in range(n):
        if lo[i] is None:
            lo[i] = -fallback if hi[i] is None else min(-fallback, hi[i])
            capped = True
        if hi[i] is None:
            hi[i] = max(fallback, lo[i])
            capped = True
    if any(l > u for l, u in zip(lo, hi)):
        return INFEASIBLE
    return Box(tuple(lo), tuple(hi), capped)


def _scaled_row(form):
    """Integer (constant, coeffs) scaled by the lcm of all denominators."""
    mult = form.constant.denominator
    for c in form.coeffs.values():
        d = c.denominator
        mult = mult // gcd(mult, d) * d
    return int(form.constant * mult), \
        {j: int(c * mult) for j, c in form.coeffs.items()}


def _xgcd(a, b):
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def _cong_echelon(int_rows, n, order):
    """Triangularize the congruence rows against the branching order.

    Works modulo M = lcm of the moduli.  Row operations only ever take
    integer combinations, so every output row is a consequence of the
    inputs; eliminating from the deepest branching depth upward leaves at
    most one row per depth whose support lies entirely at that depth and
    above it in the assignment order.  The walk turns row (g, terms, b)
    at depth d into the progression g*x = -(b + terms) mod M for the
    variable branched at d, which prunes long before any single input row
    is fully assigned.  Returns (M, {depth: (g, ((var, coeff), ...), b)}),
    or None when the rows alone are already contradictory.
    """
    M = 1
    for _const, _tl, m in int_rows:
        M = M // gcd(M, m) * m
    pool = []
    for const, tl, m in int_rows:
        s = M // m
        a = [0] * n
        for d, _j, c in tl:
            a[d] = c * s % M
        b = const * s % M
        if any(a):
            pool.append((a, b))
        elif b:
            return None
    ech = {}
    for d in range(n - 1, -1, -1):
        keep, have = [], []
        for r in pool:
            (have if r[0][d] else keep).append(r)
        pool = keep
        if not have:
            continue
        piv = have[0]
        for r in have[1:]:
            g, s, t = _xgcd(piv[0][d], r[0][d])
            newa = [(s * x + t * y) % M for x, y in zip(piv[0], r[0])]
            newb = (s * piv[1] + t * r[1]) % M
            for old in (piv, r):
                q = old[0][d] // g
                reda = [(x - q * y) % M for x, y in zip(old[0], newa)]
                redb = (old[1] - q * newb) % M
                if any(reda):
                    pool.append((reda, redb))
                elif redb:
                    return None
            piv = (newa, newb)
        c = piv[0][d]
        g = gcd(c, M)
        if c != g:
            # scale by a unit to make the leading entry divide M
            v = next(v for v in range(1, M)
                     if gcd(v, M) == 1 and (c * v - g) % M == 0)
            piv = ([x * v % M for x in piv[0]], piv[1] * v % M)
        anna = [x * (M // g) % M for x in piv[0]]
        annb = piv[1] * (M // g) % M
        if any(anna):
            pool.append((anna, annb))
        elif annb:
            return None
        ech[d] = (g,
                  tuple((order[d2], piv[0][d2])
                        for d2 in range(d) if piv[0][d2]),
                  piv[1])
    for _a, b in pool:
        if b:
            return None
    return M, ech


def enumerate_solutions(system: LinearSystem,
                        cap=DEFAULT_NODE_CAP,
                        fallback=DEFAULT_FALLBACK_BOUND,
                        box=None) -> SolutionSet:
    """All integer solutions, found by depth-first branch-and-prune over
    the propagated box in a deterministic variable order.

    Equality rows whose last variable is the one being branched force its
    value outright, congruence rows restrict it to an arithmetic
    progression, and large sub-boxes get re-tightened before descending;
    none of that changes the answer, only the node count.
    """
    if cap <= 0:
        raise ValueError("node budget must be positive")
    if box is None:
        box = bounds(system, fallback=fallback)
    if box is INFEASIBLE or box.is_empty():
        return SolutionSet((), True, 0)

    n = system.num_vars
    orders = getattr(system, "var_orders", None) or (0,) * n
    order = sorted(range(n),
                   key=lambda i: (box.width(i), orders[i],
                                  system.var_labels[i]))
    pos_of = {v: d for d, v in enumerate(order)}

    # Linear rows, eq and ge together, in parallel arrays indexed by row id.
    # During the walk each node carries a shrinking "active" list of
    # (row, partial value) pairs; a ge row whose worst case over the
    # remaining root-box suffix is already nonnegative can never fail below
    # that node and drops out of the subtree entirely.
    R_kind = []    # 0 = eq, 1 = ge
    R_coef = []    # dense coefficient per branching depth
    R_last = []    # deepest branching depth with a nonzero coefficient
    R_smin = []    # suffix minima of the variable part over the root box
    R_smax = []
    R_tail = []    # per depth, the ((var, coeff), ...) not yet assigned
    R_ntail = []   # the same negated, for the reverse side of eq rows
    act0 = []      # (row, constant): the root active list

    # Normalize every linear row by the gcd of its coefficients (rounding
    # the ge constant down, which integer points cannot distinguish) and
    # deduplicate: equal-coefficient ge rows keep only the tightest
    # constant.  Constraint systems built from rational character values
    # repeat the same row many times over, so this shrinks the hot loops.
    dedup = {}
    for kind, f in [(0, g) for g in system.eq] + [(1, g) for g in system.ge]:
        const, coeffs = _scaled_row(f)
        if not coeffs:
            if const != 0 if kind == 0 else const < 0:
                return SolutionSet((), True, 0)
            continue
        g = 0
        for c in coeffs.values():
            g = gcd(g, c)
        if kind == 0:
            if const % g:
                return SolutionSet((), True, 0)
            q = const // g
            items = sorted((j, c // g) for j, c in coeffs.items())
            if items[0][1] < 0:    # sign-canonical: a row equals its negation
                items = [(j, -c) for j, c in items]
                q = -q
            key = tuple(items)
            if (0, key) in dedup and dedup[(0, key)] != q:
                return SolutionSet((), True, 0)
            dedup[(0, key)] = q
        else:
            q = const // g    # floor: sound for integer points
            key = tuple(sorted((j, c // g) for j, c in coeffs.items()))
            prev = dedup.get((1, key))
            if prev is None or q < prev:
                dedup[(1, key)] = q

    for (kind, key), const in sorted(dedup.items()):
        tl = sorted((pos_of[j], j, c) for j, c in key)
        smin = [0] * (n + 1)
        smax = [0] * (n + 1)
        t = len(tl) - 1
        for d in range(n - 1, -1, -1):
            smin[d] = smin[d + 1]
            smax[d] = smax[d + 1]
            while t >= 0 and tl[t][0] == d:
                _, j, c = tl[t]
                a, b = c * box.lower[j], c * box.upper[j]
                smin[d] += min(a, b)
                smax[d] += max(a, b)
                t -= 1
        if const + smax[0] < 0 or (kind == 0 and const + smin[0] > 0):
            return SolutionSet((), True, 0)
        if kind == 1 and const + smin[0] >= 0:
            continue    # satisfied everywhere in the box, not worth a row
        dense = [0] * n
        for d, j, c in tl:
            dense[d] = c
        k = len(R_kind)
        R_kind.append(kind)
        R_coef.append(dense)
        R_last.append(tl[-1][0])
        R_smin.append(smin)
        R_smax.append(smax)
        R_tail.append(tuple(tuple((j, c) for d, j, c in tl if d >= d0)
                            for d0 in range(n + 1)))
        R_ntail.append(tuple(tuple((j, -c) for d, j, c in tl if d >= d0)
                             for d0 in range(n + 1)) if kind == 0 else None)
        act0.append((k, const))

    # Congruence rows keep no running partials; each is evaluated once, at
    # the node where its last variable is branched.  Rows are reduced mod m
    # and gcd-normalized first, then deduplicated; the echelon form of the
    # survivors additionally yields one stepping row per branching depth.
    seen = set()
    cong_rows = []
    for f, m in system.cong:
        if f.constant.denominator != 1:
            return SolutionSet((), True, 0)
        g = m
        coeffs = {}
        for j, c in f.coeffs.items():
            c = int(c) % m
            if c:
                coeffs[j] = c
                g = gcd(g, c)
        const = int(f.constant) % m
        if not coeffs:
            if const:
                return SolutionSet((), True, 0)
            continue
        if const % g:
            return SolutionSet((), True, 0)
        m //= g
        if m == 1:
            continue
        key = (m, const // g,
               tuple(sorted((j, c // g) for j, c in coeffs.items())))
        if key not in seen:
            seen.add(key)
            cong_rows.append(key)

    cong_at = [[] for _ in range(n)]   # (const, terms before last, c, m)
    int_rows = []
    for m, const, items in sorted(cong_rows):
        tl = sorted((pos_of[j], j, c) for j, c in items)
        d, _, c = tl[-1]
        cong_at[d].append((const, tuple((j, c2) for _, j, c2 in tl[:-1]),
                           c, m))
        int_rows.append((const, tl, m))

    ech_at = [None] * n
    ech_mod = 1
    if int_rows:
        reduced = _cong_echelon(int_rows, n, order)
        if reduced is None:
            return SolutionSet((), True, 0)
        ech_mod, ech = reduced
        for d, row in ech.items():
            ech_at[d] = row

    point = [0] * n
    found = []
    state = {"nodes": 0, "aborted": False}

    def propagate(entries, d0, lo, hi):
        """Interval tightening over the still-active rows, in place.

        Each entry's running value already covers every assigned variable,
        so only the tail terms from depth d0 onward contribute; eq rows
        tighten both directions.  False when some interval empties.
        """
        for _ in range(_PROBE_ROUNDS):
            changed = False
            for k, p in entries:
                if R_kind[k] == 0:
                    sides = ((p, R_tail[k][d0]), (-p, R_ntail[k][d0]))
                else:
                    sides = ((p, R_tail[k][d0]),)
                for total, terms in sides:
                    for j, c in terms:
                        total += c * (hi[j] if c > 0 else lo[j])
                    if total < 0:
                        return False
                    for j, c in terms:
                        if c > 0:
                            rest = total - c * hi[j]
                            b = -(rest // c)
                            if b > lo[j]:
                                if b > hi[j]:
                                    return False
                                lo[j] = b
                                changed = True
                        else:
                            rest = total - c * lo[j]
                            b = (-rest) // c
                            if b < hi[j]:
                                if b < lo[j]:
                                    return False
                                hi[j] = b
                                changed = True
            if not changed:
                break
        return True

    def descend(depth, lo, hi, act):
        if depth == n:
            found.append(tuple(point))
            return
        v = order[depth]
        lov, hiv = lo[v], hi[v]
        if lov > hiv:
            return

        # node-local view of the active rows: partial value, coefficient
        # at this depth, whether the row ends here, and its suffix range
        nxt = depth + 1
        node = []
        forced = None
        for k, p in act:
            c = R_coef[k][depth]
            fin = R_last[k] == depth
            if fin and R_kind[k] == 0:
                q, r = divmod(-p, c)
                if r or not lov <= q <= hiv:
                    return
                if forced is None:
                    forced = q
                elif forced != q:
                    return
            node.append((k, p, c, fin, R_kind[k],
                         R_smin[k][nxt], R_smax[k][nxt]))

        checks = []
        if cong_at[depth]:
            for const, pre, c, m in cong_at[depth]:
                pp = const
                for j, c2 in pre:
                    pp += c2 * point[j]
                checks.append((pp, c, m))

        er = ech_at[depth]
        if er is not None:
            g, terms, b = er
            rest = b
            for j, c in terms:
                rest += c * point[j]
            rest %= ech_mod
            if rest % g:
                return

        if forced is not None:
            if er is not None and (g * forced + rest) % ech_mod:
                return
            values = (forced,)
        else:
            # intersect the congruence progressions for this variable
            start, step = lov, 1
            if er is not None:
                m0 = ech_mod // g
                if m0 > 1:
                    x0 = -(rest // g) % m0
                    start = lov + (x0 - lov) % m0
                    step = m0
            for pp, c, m in checks:
                g = gcd(c, m)
                if pp % g:
                    return
                mm = m // g
                if mm == 1:
                    continue
                x0 = (-((pp % m) // g) * pow((c // g) % mm, -1, mm)) % mm
                g2 = gcd(step, mm)
                if (x0 - start) % g2:
                    return
                mm2 = mm // g2
                if mm2 > 1:
                    t = (((x0 - start) // g2)
                         * pow((step // g2) % mm2, -1, mm2)) % mm2
                    start += step * t
                    step *= mm2
                    start = lov + ((start - lov) % step)
            values = range(start, hiv + 1, step)

        deep = nxt < n
        vol = 1
        if deep:
            for d2 in range(nxt, n):
                w = order[d2]
                vol *= hi[w] - lo[w] + 1
                if vol > _PROBE_VOLUME:
                    break
        for x in values:
            state["nodes"] += 1
            if state["nodes"] > cap:
                state["aborted"] = True
                return
            point[v] = x
            ok = True
            child = []
            for k, p, c, fin, kind, a, b in node:
                if c:
                    p += c * x
                if fin:
                    if kind == 1 and p < 0:
                        ok = False
                        break
                    continue    # finished eq rows were folded into `forced`
                if p + b < 0 or (kind == 0 and p + a > 0):
                    ok = False
                    break
                if kind == 1 and p + a >= 0:
                    continue    # entailed: drop from the subtree
                child.append((k, p))
            if ok:
                for pp, c, m in checks:
                    if (pp + c * x) % m:
                        ok = False
                        break
            if ok:
                if not deep:
                    descend(nxt, lo, hi, child)
                elif vol > _PROBE_VOLUME:
                    clo, chi = list(lo), list(hi)
                    if propagate(child, nxt, clo, chi):
                        descend(nxt, clo, chi, child)
                else:
                    descend(nxt, lo, hi, child)
            if state["aborted"]:
                return

    descend(0, list(box.lower), list(box.upper), act0)
    solutions = tuple(sorted(found))
    for s in solutions:
        if not system.check_point(s):
            raise AssertionError("enumerated point fails re-verification: %r"
                                 % (s,))
    complete = not state["aborted"] and not box.capped
    return SolutionSet(solutions, complete, state["nodes"])


def oracle_enumerate(system: LinearSystem, box,
                     max_points=10 ** 6) -> SolutionSet:
    """Exhaustive scan of the box, no pruning; the testing oracle."""
    if box is INFEASIBLE or box.is_empty():
        return SolutionSet((), True, 0)
    if box.volume() > max_points:
        raise ValueError("box volume %d exceeds the scan budget %d"
                         % (box.volume(), max_points))
    hits = []
    count = 0
    for point in itertools.product(*(range(l, u + 1)
                                     for l, u in zip(box.lower, box.upper))):
        count += 1
        if system.check_point(point):
            hits.append(point)
    return SolutionSet(tuple(sorted(hits)), True, count)
