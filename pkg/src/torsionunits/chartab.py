"""Character table data model: ingestion, validation, power-class arithmetic.

Tables arrive as JSON documents (see the package README for the exact
shape) and are validated before anything downstream may use them:
class-size bookkeeping, exact row orthogonality (column orthogonality
and the degree sum follow, but both are asserted as well), power-map
totality and order arithmetic, p-regularity of Brauer class lists, and
Galois consistency of values on power-reachable classes.  A table that
loads is safe to trust in exact arithmetic; nothing downstream rechecks.

Tables are immutable after load and safe to share across threads.
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Optional

from .cyclotomic import Cyclotomic, from_rational, galois, parse_cyclotomic

try:
    from importlib import resources as _resources
except ImportError:  # pragma: no cover
    _resources = None


class TableError(ValueError):
    """Raised for malformed or inconsistent table / fusion documents."""


def _prime_factors(m):
    out = []
    d = 2
    while d * d <= m:
        if m % d == 0:
            out.append(d)
            while m % d == 0:
                m //= d
        d += 1
    if m > 1:
        out.append(m)
    return out


@dataclass(frozen=True)
class ConjugacyClass:
    name: str
    element_order: int
    size: int
    power_map: dict  # prime -> class index


@dataclass(frozen=True)
class Character:
    name: str
    degree: int
    values: tuple  # Cyclotomic, one per class


@dataclass(frozen=True)
class BrauerBlock:
    prime: int
    class_indices: tuple  # indices into the ordinary class list
    characters: tuple  # Character, values aligned with class_indices


@dataclass(frozen=True)
class CharacterTable:
    group_name: str
    order: int
    exponent: int
    classes: tuple
    characters: tuple
    brauer: dict = field(default_factory=dict)  # prime -> BrauerBlock

    def class_index(self, name):
        for i, c in enumerate(self.classes):
            if c.name == name:
                return i
        raise TableError(f"{self.group_name}: no class named {name!r}")

    def classes_of_order(self, n):
        return [i for i, c in enumerate(self.classes) if c.element_order == n]

    def element_orders(self):
        return sorted({c.element_order for c in self.classes})


def load_table(document) -> CharacterTable:
    """Parse and fully validate a table document (dict or JSON text)."""
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise TableError(f"table document is not valid JSON: {e}") from e
    try:
        name = document["group_name"]
        order = document["order"]
        exponent = document["exponent"]
        raw_classes = document["classes"]
        raw_chars = document["characters"]
    except (KeyError, TypeError) as e:
        raise TableError(f"table document missing field: {e}") from e

    if not (isinstance(order, int) and order > 0):
        raise TableError(f"{name}: order must be a positive integer")
    if not (isinstance(exponent, int) and exponent > 0 and order % exponent == 0):
        raise TableError(f"{name}: exponent must divide the group order")

    index_by_name = {}
    for i, rc in enumerate(raw_classes):
        cname = rc["name"]
        if cname in index_by_name:
            raise TableError(f"{name}: duplicate class name {cname!r}")
        index_by_name[cname] = i

    exp_primes = _prime_factors(exponent)
    classes = []
    for i, rc in enumerate(raw_classes):
        try:
            cname, corder, csize = rc["name"], rc["order"], rc["size"]
            raw_pm = rc["power_map"]
        except KeyError as e:
            raise TableError(f"{name}: class {i} missing field {e}") from e
        if exponent % corder != 0:
            raise TableError(f"{name}: class {cname}: order {corder} "
                             f"does not divide exponent {exponent}")
        if csize <= 0 or order % csize != 0:
            raise TableError(f"{name}: class {cname}: size {csize} "
                             f"does not divide group order")
        pm = {}
        for ps, target in raw_pm.items():
            p = int(ps)
            if target not in index_by_name:
                raise TableError(f"{name}: class {cname}: power map names "
                                 f"unknown class {target!r}")
            pm[p] = index_by_name[target]
        if set(pm) != set(exp_primes):
            raise TableError(f"{name}: class {cname}: power map must cover "
                             f"exactly the primes dividing the exponent "
                             f"{exp_primes}, got {sorted(pm)}")
        classes.append(ConjugacyClass(cname, corder, csize, pm))

    if not classes or classes[0].element_order != 1 or classes[0].size != 1:
        raise TableError(f"{name}: first class must be the identity "
                         f"(order 1, size 1)")
    if sum(c.size for c in classes) != order:
        raise TableError(f"{name}: class sizes sum to "
                         f"{sum(c.size for c in classes)}, not {order}")

    # order arithmetic of power maps
    for c in classes:
        for p, ti in c.power_map.items():
            t = classes[ti]
            want = c.element_order // p if c.element_order % p == 0 \
                else c.element_order
            if t.element_order != want:
                raise TableError(
                    f"{name}: power map p={p} at class {c.name} lands on "
                    f"{t.name} of order {t.element_order}, expected {want}")

    k = len(classes)
    characters = _parse_characters(name, raw_chars, k)
    if len(characters) != k:
        raise TableError(f"{name}: {len(characters)} characters for {k} "
                         f"classes; the table must be square")
    for ch in characters:
        if ch.values[0] != from_rational(ch.degree):
            raise TableError(f"{name}: degree mismatch: character {ch.name} "
                             f"has value {ch.values[0]!r} at the identity, "
                             f"declared degree {ch.degree}")
    if sum(ch.degree ** 2 for ch in characters) != order:
        raise TableError(f"{name}: degrees squared sum to "
                         f"{sum(c.degree ** 2 for c in characters)}, "
                         f"not the group order")

    _check_row_orthogonality(name, order, classes, characters)
    _check_column_orthogonality(name, order, classes, characters)

    brauer = {}
    for ps, blk in (document.get("brauer") or {}).items():
        p = int(ps)
        regular = tuple(i for i, c in enumerate(classes)
                        if c.element_order % p != 0)
        listed = tuple(blk["classes"])
        want = tuple(classes[i].name for i in regular)
        if listed != want:
            raise TableError(f"{name}: brauer p={p}: classes must be exactly "
                             f"the p-regular ones in table order")
        bchars = _parse_characters(name, blk["characters"], len(regular))
        for ch in bchars:
            if ch.values[0] != from_rational(ch.degree):
                raise TableError(f"{name}: brauer p={p}: degree mismatch "
                                 f"for {ch.name}")
        brauer[p] = BrauerBlock(p, regular, bchars)

    table = CharacterTable(name, order, exponent, tuple(classes),
                           tuple(characters), brauer)
    _check_galois_consistency(table)
    return table


def _parse_characters(name, raw_chars, width):
    out = []
    for rc in raw_chars:
        try:
            cname, degree, raw_vals = rc["name"], rc["degree"], rc["values"]
        except KeyError as e:
            raise TableError(f"{name}: character missing field {e}") from e
        if not (isinstance(degree, int) and degree > 0):
            raise TableError(f"{name}: character {cname}: bad degree")
        if len(raw_vals) != width:
            raise TableError(f"{name}: character {cname}: {len(raw_vals)} "
                             f"values for {width} classes")
        try:
            vals = tuple(parse_cyclotomic(v) for v in raw_vals)
        except Exception as e:
            raise TableError(f"{name}: character {cname}: "
                             f"unparseable value: {e}") from e
        out.append(Character(cname, degree, vals))
    return out


def _check_row_orthogonality(name, order, classes, characters):
    k = len(classes)
    for a in range(k):
        for b in range(a, k):
            s = from_rational(0)
            for c in range(k):
                s = s + (from_rational(classes[c].size)
                         * characters[a].values[c]
                         * characters[b].values[c].conjugate())
            want = from_rational(order if a == b else 0)
            if s != want:
                raise TableError(
                    f"{name}: row orthogonality fails for characters "
                    f"{characters[a].name}, {characters[b].name}")


def _check_column_orthogonality(name, order, classes, characters):
    k = len(classes)
    for a in range(k):
        for b in range(a, k):
            s = from_rational(0)
            for ch in characters:
                s = s + ch.values[a] * ch.values[b].conjugate()
            want = from_rational(order // classes[a].size if a == b else 0)
            if s != want:
                raise TableError(
                    f"{name}: column orthogonality fails for classes "
                    f"{classes[a].name}, {classes[b].name}")


def _check_galois_consistency(table):
    """chi(x^k) must be the k-th Galois twist of chi(x), for every k coprime
    to the element order that is reachable by composing stored prime maps.
    Unreachable residues are skipped (there is nothing to compare against).
    """
    for i, c in enumerate(table.classes):
        m = c.element_order
        if m <= 2:
            continue
        reachable = _reachable_unit_powers(table, i)
        for k, j in reachable.items():
            if k == 1:
                continue
            for ch in table.characters:
                if ch.values[j] != galois(ch.values[i], k):
                    raise TableError(
                        f"{table.group_name}: Galois inconsistency: "
                        f"{ch.name} at {table.classes[j].name} is not the "
                        f"{k}-twist of its value at {c.name}")


def _reachable_unit_powers(table, i):
    """Map k (unit mod element order) -> class index of x^k, for every k
    reachable by composing the stored prime power maps."""
    m = table.classes[i].element_order
    out = {1: i}
    frontier = [(1, i)]
    while frontier:
        nxt = []
        for k, j in frontier:
            for p, t in table.classes[j].power_map.items():
                if m % p == 0:
                    continue
                nk = (k * p) % m
                if nk not in out:
                    out[nk] = t
                    nxt.append((nk, t))
        frontier = nxt
    return out


def power_class(table: CharacterTable, class_index: int, m: int) -> int:
    """Index of the class containing x^m for x in the given class.

    Composes the stored prime power maps over the factorization of
    m mod element_order.  A prime factor outside the stored maps cannot
    change character-value Galois orbits arbitrarily: the true class is
    the unique one whose column is the matching Galois twist, and that
    class is what gets returned.
    """
    if m < 0:
        raise ValueError("power exponent must be nonnegative")
    cur = class_index
    r = m % table.classes[class_index].element_order
    if r == 0:
        return 0
    while r > 1:
        o = table.classes[cur].element_order
        pm = table.classes[cur].power_map
        p = min(_prime_factors(r))
        if p in pm:
            cur = pm[p]
        else:
            cur = _galois_twist_class(table, cur, p % o)
        r //= p
    return cur


def _galois_twist_class(table, i, k):
    m = table.classes[i].element_order
    if k % m == 1 or m == 1:
        return i
    hits = []
    for j, c in enumerate(table.classes):
        if c.element_order != m:
            continue
        if all(ch.values[j] == galois(ch.values[i], k)
               for ch in table.characters):
            hits.append(j)
    if len(hits) != 1:
        raise TableError(f"{table.group_name}: Galois twist by {k} at "
                         f"{table.classes[i].name} is not unique")
    return hits[0]


@dataclass(frozen=True)
class ClassFusion:
    source: CharacterTable
    target: CharacterTable
    class_map: tuple  # source class index -> target class index
    kernel_is_p_group: Optional[int] = None

    @property
    def kernel_order(self):
        return self.source.order // self.target.order


def load_fusion(source: CharacterTable, target: CharacterTable,
                mapping) -> ClassFusion:
    """Validate a class fusion for a quotient map source -> target.

    mapping: dict source-class-name -> target-class-name, or a document
    dict with fields source, target, map, optional kernel_is_p_group.
    """
    kernel_p = None
    if isinstance(mapping, dict) and "map" in mapping:
        doc = mapping
        if doc.get("source") != source.group_name:
            raise TableError(f"fusion document names source "
                             f"{doc.get('source')!r}, table is "
                             f"{source.group_name!r}")
        if doc.get("target") != target.group_name:
            raise TableError(f"fusion document names target "
                             f"{doc.get('target')!r}, table is "
                             f"{target.group_name!r}")
        kernel_p = doc.get("kernel_is_p_group")
        mapping = doc["map"]

    if source.order % target.order != 0:
        raise TableError("fusion: target order does not divide source order")
    n_kernel = source.order // target.order
    if kernel_p is not None:
        q = n_kernel
        while q % kernel_p == 0:
            q //= kernel_p
        if q != 1:
            raise TableError(f"fusion: kernel order {n_kernel} is not a "
                             f"power of {kernel_p}")

    cmap = []
    for c in source.classes:
        if c.name not in mapping:
            raise TableError(f"fusion: source class {c.name} has no image")
        cmap.append(target.class_index(mapping[c.name]))
    if cmap[0] != 0:
        raise TableError("fusion: identity must map to identity")
    for i, c in enumerate(source.classes):
        timg = target.classes[cmap[i]]
        if c.element_order % timg.element_order != 0:
            raise TableError(
                f"fusion: image order {timg.element_order} of class "
                f"{c.name} does not divide its order {c.element_order}")
    for j, t in enumerate(target.classes):
        s = sum(c.size for i, c in enumerate(source.classes) if cmap[i] == j)
        if s != n_kernel * t.size:
            raise TableError(f"fusion: sizes over classes mapping to "
                             f"{t.name} sum to {s}, expected "
                             f"{n_kernel * t.size}")
    return ClassFusion(source, target, tuple(cmap), kernel_p)


_BUNDLED = {
    "C2": "c2", "C3": "c3", "C6": "c6", "S3": "s3", "D8": "d8", "Q8": "q8",
    "A4": "a4", "SL(2,3)": "sl_2_3", "S4": "s4", "A5": "a5", "S5": "s5",
    "PSL(2,7)": "psl_2_7", "S6": "s6", "S7": "s7", "PSL(2,16)": "psl_2_16",
    "PSL(3,3)": "psl_3_3",
}


def bundled_names():
    return sorted(_BUNDLED)


def _bundled_text(fname):
    if _resources is not None:
        return (_resources.files("torsionunits") / "tables"
                / f"{fname}.json").read_text()
    import os
    here = os.path.dirname(__file__)
    with open(os.path.join(here, "tables", f"{fname}.json")) as fh:
        return fh.read()


def bundled_table(name) -> CharacterTable:
    """Load one of the shipped tables by group name (see bundled_names)."""
    key = name if name in _BUNDLED else name.upper()
    if key not in _BUNDLED:
        for gname, fname in _BUNDLED.items():
            if fname == name.lower():
                key = gname
                break
        else:
            raise TableError(f"no bundled table named {name!r}")
    return load_table(_bundled_text(_BUNDLED[key]))


def bundled_fusion_document(fname="fusion_sl_2_3_to_a4"):
    return json.loads(_bundled_text(fname))
