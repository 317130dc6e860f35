"""HeLP constraint systems over partial augmentations.

For a hypothetical normalized torsion unit u of order n in ZG, the unknowns
are the partial augmentations eps_x(u) on conjugacy classes x whose element
order divides n.  Once the partial augmentations of every proper power u^d
are fixed (a PowerChain), each character chi pins the eigenvalue
multiplicities of u under the corresponding representation:

    mu_l(u, chi) = (1/n) * sum over d | n of
                   Tr from Q(zeta_{n/d}) to Q of  chi(u^d) * zeta_n^(-d*l)

Every mu_l must be a nonnegative integer, and with mu_l affine-rational in
the unknowns this becomes an integer feasibility problem (a LinearSystem).
Optional congruences mod p between the chain levels, and constraints pulled
back through a quotient map, sharpen the system further.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

from .chartab import CharacterTable, ClassFusion, power_class
from .cyclotomic import Cyclotomic, from_rational, root_of_unity, trace_over


class HelpError(ValueError):
    """Raised for ill-posed constraint-system requests."""


def _divisors(n):
    return [d for d in range(1, n + 1) if n % d == 0]


def _p_part(k, p):
    q = 1
    while k % p == 0:
        k //= p
        q *= p
    return q


# -- partial augmentations ---------------------------------------------------


@dataclass(frozen=True)
class PAVector:
    """Partial augmentations of one unit of the given order.

    entries holds (class index, value) pairs, sorted, zeros omitted.
    """

    unit_order: int
    entries: tuple

    @staticmethod
    def make(unit_order, entries) -> "PAVector":
        items = tuple(sorted((int(i), int(v))
                             for i, v in dict(entries).items() if v))
        return PAVector(unit_order, items)

    @staticmethod
    def indicator(table, class_index) -> "PAVector":
        return PAVector(table.classes[class_index].element_order,
                        ((class_index, 1),))

    def entry(self, i) -> int:
        for j, v in self.entries:
            if j == i:
                return v
        return 0

    def support(self):
        return tuple(j for j, _ in self.entries)

    def augmentation(self) -> int:
        return sum(v for _, v in self.entries)

    def as_tuple(self, class_indices):
        return tuple(self.entry(i) for i in class_indices)

    def validate(self, table) -> "PAVector":
        n = self.unit_order
        if n < 1:
            raise HelpError("unit order must be positive")
        if self.augmentation() != 1:
            raise HelpError("partial augmentations sum to %d, not 1"
                            % self.augmentation())
        for j, v in self.entries:
            o = table.classes[j].element_order
            if n % o:
                raise HelpError(
                    "class %s of order %d cannot support a unit of order %d"
                    % (table.classes[j].name, o, n))
            if j == 0 and n > 1:
                raise HelpError("identity class entry must vanish for a "
                                "nontrivial unit")
        return self


_IDENTITY_PA = PAVector(1, ((0, 1),))


@dataclass(frozen=True)
class PowerChain:
    """Partial augmentations of u^(n/e) for each divisor level e of n.

    Level e is the vector of the power of u having order e.  Levels for
    1 < e < n must all be present before a constraint system can be built;
    the top level e = n is the unknown vector (or, once solved, a solution).
    """

    order: int
    levels: tuple  # ((e, PAVector), ...) sorted by e

    @staticmethod
    def of(order, levels, table=None) -> "PowerChain":
        mapping = dict(levels)
        for e, vec in mapping.items():
            if e <= 1 or order % e:
                raise HelpError("level %d is not a proper divisor level of "
                                "order %d" % (e, order))
            if vec.unit_order != e:
                raise HelpError("level %d holds a vector of unit order %d"
                                % (e, vec.unit_order))
            if table is not None:
                vec.validate(table)
        chain = PowerChain(order,
                           tuple(sorted(mapping.items())))
        if table is not None:
            chain._check_compatibility(table)
        return chain

    @staticmethod
    def trivial(table, class_index) -> "PowerChain":
        """The chain of an actual group element: every level an indicator."""
        n = table.classes[class_index].element_order
        levels = {}
        for e in _divisors(n):
            if e > 1:
                c = power_class(table, class_index, n // e)
                levels[e] = PAVector.indicator(table, c)
        return PowerChain.of(n, levels, table)

    def level(self, e) -> PAVector:
        if e == 1:
            return _IDENTITY_PA
        for d, vec in self.levels:
            if d == e:
                return vec
        raise HelpError("chain missing level %d" % e)

    def has_level(self, e) -> bool:
        return e == 1 or any(d == e for d, _ in self.levels)

    def complete_below(self) -> bool:
        return all(self.has_level(e) for e in _divisors(self.order)
                   if e < self.order)

    def with_top(self, vec: PAVector) -> "PowerChain":
        if vec.unit_order != self.order:
            raise HelpError("top level must have the chain's order")
        mapping = dict(self.levels)
        mapping[self.order] = vec
        return PowerChain(self.order, tuple(sorted(mapping.items())))

    def _check_compatibility(self, table):
        # raising a level through the power maps must agree with the level
        # below it mod p; this is the only relation the prime-power map
        # theorem provides, so nothing stronger is enforced here
        for e, vec in self.levels:
            for p in {q for q, _ in _factor_pairs(e)}:
                q = _p_part(e, p)
                m = e // q
                if m == 1 or not self.has_level(m):
                    continue
                low = self.level(m)
                pushed = {}
                for x, v in vec.entries:
                    s = power_class(table, x, q)
                    pushed[s] = pushed.get(s, 0) + v
                for s in set(pushed) | set(low.support()):
                    if (pushed.get(s, 0) - low.entry(s)) % p:
                        raise HelpError(
                            "level %d raised %d-th powers disagree with "
                            "level %d at class %s (mod %d)"
                            % (e, q, m, table.classes[s].name, p))


# -- affine forms -------------------------------------------------------------


class AffineForm:
    """constant + sum of coeff * eps_i, all exact rationals."""

    __slots__ = ("constant", "coeffs")

    def __init__(self, constant=0, coeffs=None):
        self.constant = Fraction(constant)
        self.coeffs = {}
        for i, c in (coeffs or {}).items():
            c = Fraction(c)
            if c:
                self.coeffs[int(i)] = c

    def __add__(self, other):
        if not isinstance(other, AffineForm):
            return AffineForm(self.constant + Fraction(other),
                              self.coeffs)
        merged = dict(self.coeffs)
        for i, c in other.coeffs.items():
            merged[i] = merged.get(i, Fraction(0)) + c
        return AffineForm(self.constant + other.constant, merged)

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        if not isinstance(other, AffineForm):
            other = AffineForm(other)
        return self + (other * -1)

    def __rsub__(self, other):
        return (self * -1) + other

    def __mul__(self, k):
        k = Fraction(k)
        return AffineForm(self.constant * k,
                          {i: c * k for i, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        return (isinstance(other, AffineForm)
                and self.constant == other.constant
                and self.coeffs == other.coeffs)

    __hash__ = None

    def is_zero(self) -> bool:
        return not self.coeffs and not self.constant

    def coefficient(self, i) -> Fraction:
        return self.coeffs.get(i, Fraction(0))

    def max_var(self) -> int:
        return max(self.coeffs, default=-1)

    def evaluate(self, point) -> Fraction:
        total = self.constant
        for i, c in self.coeffs.items():
            total += c * point[i]
        return total

    def is_integral(self) -> bool:
        return (self.constant.denominator == 1
                and all(c.denominator == 1 for c in self.coeffs.values()))

    def render(self, labels=None) -> str:
        parts = []
        if self.constant or not self.coeffs:
            parts.append(str(self.constant))
        for i in sorted(self.coeffs):
            c = self.coeffs[i]
            name = "eps(%s)" % labels[i] if labels else "x%d" % i
            if c == 1:
                parts.append("+ " + name)
            elif c == -1:
                parts.append("- " + name)
            elif c > 0:
                parts.append("+ %s*%s" % (c, name))
            else:
                parts.append("- %s*%s" % (-c, name))
        text = " ".join(parts)
        if text.startswith("+ "):
            text = text[2:]
        return text

    def __repr__(self):
        return "AffineForm(%s)" % self.render()


class CycForm:
    """Affine form whose coefficients are cyclotomic numbers.

    Carries chi(u) symbolically until a rational trace collapses it; the
    trace acts on the constant and on each coefficient separately.
    """

    __slots__ = ("constant", "coeffs")

    def __init__(self, constant=None, coeffs=None):
        self.constant = constant if constant is not None else from_rational(0)
        self.coeffs = {}
        for i, v in (coeffs or {}).items():
            if not v.is_zero:
                self.coeffs[int(i)] = v

    def scaled(self, z: Cyclotomic) -> "CycForm":
        return CycForm(self.constant * z,
                       {i: v * z for i, v in self.coeffs.items()})

    def trace_form(self, n) -> AffineForm:
        return AffineForm(trace_over(self.constant, n),
                          {i: trace_over(v, n)
                           for i, v in self.coeffs.items()})

    def evaluate(self, point) -> Cyclotomic:
        total = self.constant
        for i, v in self.coeffs.items():
            total = total + v * int(point[i])
        return total


# -- linear systems -----------------------------------------------------------


class LinearSystem:
    """Integer feasibility problem: equalities, inequalities (form >= 0)
    and congruences (form = 0 mod m) over integer variables."""

    def __init__(self, var_labels):
        self.var_labels = tuple(var_labels)
        self.num_vars = len(self.var_labels)
        self.var_orders = (0,) * self.num_vars
        self.eq = []
        self.ge = []
        self.cong = []

    def _admit(self, form):
        if form.max_var() >= self.num_vars:
            raise HelpError("form references variable %d but the system has "
                            "%d" % (form.max_var(), self.num_vars))
        return form

    def add_eq(self, form):
        self.eq.append(self._admit(form))

    def add_ge(self, form):
        self.ge.append(self._admit(form))

    def add_cong(self, form, modulus):
        if modulus < 1:
            raise HelpError("congruence modulus must be positive")
        if not form.is_integral():
            raise HelpError("congruence coefficients must be integers: %s"
                            % form.render(self.var_labels))
        self.cong.append((self._admit(form), int(modulus)))

    def check_point(self, point) -> bool:
        if len(point) != self.num_vars:
            return False
        for f in self.eq:
            if f.evaluate(point) != 0:
                return False
        for f in self.ge:
            if f.evaluate(point) < 0:
                return False
        for f, m in self.cong:
            v = f.evaluate(point)
            if v.denominator != 1 or int(v) % m:
                return False
        return True

    def dump(self) -> str:
        lines = ["vars: " + " ".join(self.var_labels)]
        for f in self.eq:
            lines.append("eq: %s = 0" % f.render(self.var_labels))
        for f in self.ge:
            lines.append("ge: %s >= 0" % f.render(self.var_labels))
        for f, m in self.cong:
            lines.append("cong: %s = 0  (mod %d)"
                         % (f.render(self.var_labels), m))
        return "\n".join(lines) + "\n"


# -- the HeLP construction ----------------------------------------------------


def candidate_classes(table: CharacterTable, n: int):
    """Classes that can carry partial augmentation of a unit of order n:
    element order divides n, identity excluded once n > 1."""
    if n < 1:
        raise HelpError("unit order must be positive")
    return [i for i, c in enumerate(table.classes)
            if n % c.element_order == 0 and (n == 1 or i != 0)]


def _class_values(table, chi, block):
    if block is None:
        return dict(enumerate(chi.values))
    return dict(zip(block.class_indices, chi.values))


def chi_of_power(table, chain, chi, d, block=None):
    """chi(u^d) for u the chain's unit: an exact cyclotomic number when the
    chain fixes u^d (d > 1), a CycForm over the unknowns when d = 1."""
    n = chain.order
    if d < 1 or n % d:
        raise HelpError("power %d does not divide the unit order %d" % (d, n))
    vals = _class_values(table, chi, block)
    if d == 1:
        coeffs = {}
        for j, x in enumerate(candidate_classes(table, n)):
            if x not in vals:
                raise HelpError("character %s has no value on class %s"
                                % (chi.name, table.classes[x].name))
            coeffs[j] = vals[x]
        return CycForm(from_rational(0), coeffs)
    e = n // d
    if e == 1:
        return from_rational(chi.degree)
    vec = chain.level(e)
    total = from_rational(0)
    for x, v in vec.entries:
        if x not in vals:
            raise HelpError("character %s has no value on class %s"
                            % (chi.name, table.classes[x].name))
        total = total + vals[x] * v
    return total


def multiplicity_form(table, chi, n, l, chain, block=None) -> AffineForm:
    """The multiplicity of zeta_n^l as an eigenvalue of u under chi, as an
    affine-rational form in the top-level unknowns."""
    if not 0 <= l < n:
        raise HelpError("eigenvalue index %d out of range for order %d"
                        % (l, n))
    if block is not None and n % block.prime == 0:
        raise HelpError("p = %d Brauer characters require p coprime to the "
                        "unit order %d" % (block.prime, n))
    if chain.order != n:
        raise HelpError("chain order %d does not match %d" % (chain.order, n))
    total = AffineForm(0)
    for d in _divisors(n):
        z = root_of_unity(n, (-d * l) % n)
        val = chi_of_power(table, chain, chi, d, block=block)
        if isinstance(val, CycForm):
            total = total + val.scaled(z).trace_form(n // d)
        else:
            total = total + AffineForm(trace_over(val * z, n // d))
    return total * Fraction(1, n)


@dataclass
class HelpOptions:
    """Toggles for the optional constraint families.

    brauer: "all" uses every bundled Brauer block whose prime is coprime
    to the unit order, a prime restricts to that block, "none"/None skips.
    quotient_vector: partial augmentations of the image of u in the fusion
    target, enabling the per-class pullback equalities.
    p_part: assert that the image of u under the fusion has strictly
    smaller order, forcing eps = 0 on classes with deficient p-part.
    """

    congruences: bool = True
    brauer: object = "all"
    fusion: ClassFusion | None = None
    quotient_vector: PAVector | None = None
    p_part: bool = False


def build_system(table, n, chain, options=None) -> LinearSystem:
    """Assemble the full constraint system for a unit of order n whose
    proper powers are fixed by the chain."""
    options = options if options is not None else HelpOptions()
    if chain.order != n:
        raise HelpError("chain order %d does not match %d" % (chain.order, n))
    for e in _divisors(n):
        if 1 < e < n and not chain.has_level(e):
            raise HelpError("incomplete chain: missing level %d" % e)

    cand = candidate_classes(table, n)
    sys_ = LinearSystem([table.classes[i].name for i in cand])
    sys_.var_orders = tuple(table.classes[i].element_order for i in cand)

    # augmentation
    sys_.add_eq(AffineForm(-1, {j: 1 for j in range(len(cand))}))

    # box bounds: |eps_x| <= sqrt(class size), from expressing eps_x through
    # column orthogonality and bounding every |chi(u)| by chi(1); valid here
    # because the multiplicity constraints below force |chi(u)| <= chi(1)
    for j, i in enumerate(cand):
        b = isqrt(table.classes[i].size)
        sys_.add_ge(AffineForm(b, {j: -1}))
        sys_.add_ge(AffineForm(b, {j: 1}))

    # eigenvalue multiplicities: ordinary characters, then Brauer blocks
    # for primes coprime to n
    charsets = [(table.characters, None)]
    sel = options.brauer
    if sel not in (None, "none"):
        for p in sorted(table.brauer):
            if n % p == 0:
                continue
            if sel == "all" or sel == p:
                charsets.append((table.brauer[p].characters, table.brauer[p]))
    for chars, block in charsets:
        for chi in chars:
            for l in range(n):
                mu = multiplicity_form(table, chi, n, l, chain, block=block)
                sys_.add_ge(mu)
                sys_.add_ge(AffineForm(chi.degree) - mu)
                if n > 1:
                    sys_.add_cong(mu * n, n)

    # congruences between chain levels, one prime part at a time
    if options.congruences:
        for p in sorted({q for q, _ in _factor_pairs(n)}):
            q = _p_part(n, p)
            m = n // q
            if m == 1:
                continue
            low = chain.level(m)
            for s, scls in enumerate(table.classes):
                if m % scls.element_order:
                    continue
                coeffs = {}
                for j, x in enumerate(cand):
                    if power_class(table, x, q) == s:
                        coeffs[j] = coeffs.get(j, 0) + 1
                form = AffineForm(-low.entry(s), coeffs)
                if not form.is_zero():
                    sys_.add_cong(form, p)

    # pullback through a quotient map: class sums must hit the image's
    # partial augmentations
    if options.quotient_vector is not None and options.fusion is None:
        raise HelpError("quotient constraints need the class fusion data")
    if options.fusion is not None and options.quotient_vector is not None:
        fus = options.fusion
        if fus.source.group_name != table.group_name or \
                len(fus.source.classes) != len(table.classes):
            raise HelpError("fusion source does not match the table")
        qv = options.quotient_vector
        if qv.unit_order < 1 or n % qv.unit_order:
            raise HelpError("quotient image order %d must divide %d"
                            % (qv.unit_order, n))
        qv.validate(fus.target)
        for tj in range(len(fus.target.classes)):
            coeffs = {j: 1 for j, x in enumerate(cand)
                      if fus.class_map[x] == tj}
            form = AffineForm(-qv.entry(tj), coeffs)
            if not form.is_zero():
                sys_.add_eq(form)

    # order drop under the quotient: kernel a p-group kills every class
    # whose element order has too small a p-part
    if options.p_part:
        if options.fusion is None or not options.fusion.kernel_is_p_group:
            raise HelpError("p-part constraints need a fusion whose kernel "
                            "is a p-group")
        p = options.fusion.kernel_is_p_group
        if options.quotient_vector is not None and \
                options.quotient_vector.unit_order >= n:
            raise HelpError("p-part constraints assume the image has "
                            "strictly smaller order")
        want = _p_part(n, p)
        for j, i in enumerate(cand):
            if _p_part(table.classes[i].element_order, p) < want:
                sys_.add_eq(AffineForm(0, {j: 1}))

    return sys_


def _factor_pairs(n):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1
    if n > 1:
        out.append((n, 1))
    return out
