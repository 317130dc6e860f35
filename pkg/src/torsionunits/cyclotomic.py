"""Exact arithmetic in cyclotomic fields Q(zeta_n).

Elements are stored as rational linear combinations of roots of unity
E(n)^j = exp(2*pi*i*j/n) over the Zumbroich basis of Q(zeta_n), with the
conductor reduced eagerly, so equal field elements always have identical
representations.  Coefficients are exact ``fractions.Fraction`` values and
no floating point is used anywhere.

The Zumbroich basis of Q(zeta_n), n not congruent to 2 mod 4, consists of
the E(n)^j whose exponent j satisfies, for every prime power p^k || n
(writing j_p = j * inv(n/p^k) mod p^k and decomposing j_p in base p from
the most significant digit down):

* p odd:  the leading digit (at scale p^(k-1)) is nonzero once the lower
  digits are balanced into {-(p-1)/2, ..., (p-1)/2};
* p = 2:  j_p < 2^(k-1), i.e. the leading bit is zero.

Out-of-basis exponents are rewritten with the relations
1 + zeta_p + ... + zeta_p^(p-1) = 0 (one application per prime fixes the
leading digit and touches no other prime's component).

The text grammar (used by character table files) is

    expr  := ['+'|'-'] term (('+'|'-') term)*
    term  := coeff '*' atom | atom | coeff
    atom  := 'E(' uint ')' ['^' uint]
    coeff := int | int '/' uint

with insignificant whitespace, e.g. ``-E(9)^4-E(9)^7`` or ``1/2-1/2*E(5)``.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd

Rational = Fraction

__all__ = [
    "Rational",
    "Cyclotomic",
    "CyclotomicParseError",
    "parse_cyclotomic",
    "render_cyclotomic",
    "root_of_unity",
    "from_rational",
    "galois",
    "conductor",
    "trace_to_rational",
    "trace_over",
    "euler_phi",
]


@lru_cache(maxsize=None)
def _factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization of n >= 1 as ((p, k), ...) with p ascending."""
    out = []
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            k = 0
            while m % p == 0:
                m //= p
                k += 1
            out.append((p, k))
        p += 1 if p == 2 else 2
    if m > 1:
        out.append((m, 1))
    return tuple(out)


@lru_cache(maxsize=None)
def euler_phi(n: int) -> int:
    out = 1
    for p, k in _factorize(n):
        out *= (p - 1) * p ** (k - 1)
    return out


@lru_cache(maxsize=None)
def _moebius(n: int) -> int:
    f = _factorize(n)
    if any(k > 1 for _, k in f):
        return 0
    return -1 if len(f) % 2 else 1


def _canonicalize(n: int, coeffs: dict[int, Fraction]) -> tuple[int, dict[int, Fraction]]:
    """Bring (n, {exponent: coefficient}) to reduced Zumbroich form."""
    if n <= 0:
        raise ValueError("conductor must be positive, got %d" % n)
    cur: dict[int, Fraction] = {}
    for j, c in coeffs.items():
        if c:
            jj = j % n
            cur[jj] = cur.get(jj, Fraction(0)) + c
    cur = {j: c for j, c in cur.items() if c}
    if not cur:
        return 1, {}

    # factor out the gcd of the exponents (cheap pre-reduction)
    g = n
    for j in cur:
        g = gcd(g, j)
        if g == 1:
            break
    if g > 1:
        n //= g
        cur = {j // g: c for j, c in cur.items()}

    # conductors congruent to 2 mod 4 are identified with their odd part
    if n % 4 == 2:
        half = n // 2
        nxt: dict[int, Fraction] = {}
        for j, c in cur.items():
            if j % 2:
                j2, c2 = ((j + half) % n) // 2, -c
            else:
                j2, c2 = j // 2, c
            nxt[j2] = nxt.get(j2, Fraction(0)) + c2
        n = half
        cur = {j: c for j, c in nxt.items() if c}
        if not cur:
            return 1, {}

    if n == 1:
        return 1, cur

    # rewrite onto the Zumbroich basis, one prime component at a time
    for p, k in _factorize(n):
        pk = p ** k
        cof = n // pk
        inv = pow(cof, -1, pk)
        m = p ** (k - 1)
        h = (m - 1) // 2
        nxt = {}
        for j, c in cur.items():
            jp = (j * inv) % pk
            if p == 2:
                ok = jp < m
            else:
                ok = ((jp + h) // m) % p != 0
            if ok:
                nxt[j] = nxt.get(j, Fraction(0)) + c
            elif p == 2:
                j2 = (j + n // 2) % n
                nxt[j2] = nxt.get(j2, Fraction(0)) - c
            else:
                for i in range(1, p):
                    j2 = (j + i * (n // p)) % n
                    nxt[j2] = nxt.get(j2, Fraction(0)) - c
        cur = {j: c for j, c in nxt.items() if c}
        if not cur:
            return 1, {}

    # eager conductor reduction: drop primes whose level is not needed
    reduced = True
    while reduced and n > 1:
        reduced = False
        for p, k in _factorize(n):
            if p == 2 and k == 2:
                if all(j % 4 == 0 for j in cur):
                    n //= 4
                    cur = {j // 4: c for j, c in cur.items()}
                    reduced = True
                    break
            elif k >= 2:
                if all(j % p == 0 for j in cur):
                    n //= p
                    cur = {j // p: c for j, c in cur.items()}
                    reduced = True
                    break
            elif p != 2:
                # k == 1, p odd: the element lies in Q(zeta_{n/p}) iff within
                # every residue class mod n/p all p-1 basis coefficients agree
                nn = n // p
                groups: dict[int, list] = {}
                for j, c in cur.items():
                    groups.setdefault(j % nn, []).append(c)
                if all(len(v) == p - 1 and len(set(v)) == 1 for v in groups.values()):
                    u = pow(p, -1, nn) if nn > 1 else 0
                    cur = {(u * r) % nn if nn > 1 else 0: -v[0] for r, v in groups.items()}
                    n = nn
                    reduced = True
                    break
    return n, cur


class Cyclotomic:
    """An element of some Q(zeta_n), always in reduced canonical form."""

    __slots__ = ("n", "_c")

    def __init__(self, n: int, coeffs: dict[int, Fraction], _raw: bool = False):
        if _raw:
            self.n, self._c = n, coeffs
        else:
            self.n, self._c = _canonicalize(
                n, {j: Fraction(c) for j, c in coeffs.items()}
            )

    # -- basic structure ---------------------------------------------------

    @property
    def conductor(self) -> int:
        return self.n

    def coefficients(self) -> dict[int, Fraction]:
        """Basis-exponent -> coefficient map (a copy)."""
        return dict(self._c)

    @property
    def is_rational(self) -> bool:
        return self.n == 1

    def rational_value(self) -> Fraction:
        if self.n != 1:
            raise ValueError("value with conductor %d is not rational" % self.n)
        return self._c.get(0, Fraction(0))

    @property
    def is_zero(self) -> bool:
        return not self._c

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = from_rational(other)
        if not isinstance(other, Cyclotomic):
            return NotImplemented
        return self.n == other.n and self._c == other._c

    def __hash__(self):
        return hash((self.n, frozenset(self._c.items())))

    # -- ring operations ---------------------------------------------------

    @staticmethod
    def _coerce(x) -> "Cyclotomic":
        if isinstance(x, Cyclotomic):
            return x
        if isinstance(x, (int, Fraction)):
            return from_rational(x)
        raise TypeError("cannot coerce %r to Cyclotomic" % (x,))

    def _lifted(self, lcm_n: int) -> dict[int, Fraction]:
        s = lcm_n // self.n
        return {j * s: c for j, c in self._c.items()}

    def __add__(self, other):
        try:
            other = Cyclotomic._coerce(other)
        except TypeError:
            return NotImplemented
        L = self.n * other.n // gcd(self.n, other.n)
        acc = self._lifted(L)
        for j, c in other._lifted(L).items():
            acc[j] = acc.get(j, Fraction(0)) + c
        return Cyclotomic(L, acc)

    __radd__ = __add__

    def __neg__(self):
        return Cyclotomic(self.n, {j: -c for j, c in self._c.items()}, _raw=True)

    def __sub__(self, other):
        try:
            other = Cyclotomic._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return Cyclotomic._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return _ZERO
            q = Fraction(other)
            return Cyclotomic(self.n, {j: c * q for j, c in self._c.items()}, _raw=True)
        if not isinstance(other, Cyclotomic):
            return NotImplemented
        if other.n == 1:
            return self * other._c.get(0, Fraction(0))
        if self.n == 1:
            return other * self._c.get(0, Fraction(0))
        L = self.n * other.n // gcd(self.n, other.n)
        a, b = self._lifted(L), other._lifted(L)
        acc: dict[int, Fraction] = {}
        for j1, c1 in a.items():
            for j2, c2 in b.items():
                j = (j1 + j2) % L
                acc[j] = acc.get(j, Fraction(0)) + c1 * c2
        return Cyclotomic(L, acc)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            raise ValueError("only nonnegative integer powers are supported")
        out = _ONE
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base if e > 1 else base
            e >>= 1
        return out

    def conjugate(self) -> "Cyclotomic":
        """Complex conjugation, i.e. the Galois map zeta -> zeta^-1."""
        if self.n == 1:
            return self
        return galois(self, self.n - 1)

    def __repr__(self):
        return render_cyclotomic(self)

    __str__ = __repr__


def from_rational(r) -> Cyclotomic:
    r = Fraction(r)
    if r == 0:
        return _ZERO
    return Cyclotomic(1, {0: r}, _raw=True)


_ZERO = Cyclotomic(1, {}, _raw=True)
_ONE = Cyclotomic(1, {0: Fraction(1)}, _raw=True)


def root_of_unity(n: int, k: int = 1) -> Cyclotomic:
    """E(n)^k, reduced to its true conductor (root_of_unity(12, 4) = E(3))."""
    if n <= 0:
        raise ValueError("root of unity order must be positive, got %d" % n)
    return Cyclotomic(n, {k % n: Fraction(1)})


def conductor(a: Cyclotomic) -> int:
    return Cyclotomic._coerce(a).n


def galois(a: Cyclotomic, k: int) -> Cyclotomic:
    """Apply the Galois automorphism zeta_n -> zeta_n^k; k must be coprime to n."""
    a = Cyclotomic._coerce(a)
    if a.n == 1:
        return a
    k %= a.n
    if gcd(k, a.n) != 1:
        raise ValueError("galois exponent %d is not coprime to conductor %d" % (k, a.n))
    return Cyclotomic(a.n, {(k * j) % a.n: c for j, c in a._c.items()})


def trace_to_rational(a: Cyclotomic) -> Fraction:
    """Trace of a from Q(zeta_conductor(a)) down to Q.

    Equals the sum of galois(a, k) over all k coprime to the conductor.
    Computed termwise: a root of unity of exact order m has trace
    moebius(m) * phi(n)/phi(m) in Q(zeta_n).
    """
    a = Cyclotomic._coerce(a)
    n = a.n
    if n == 1:
        return a._c.get(0, Fraction(0))
    total = Fraction(0)
    pn = euler_phi(n)
    for j, c in a._c.items():
        m = n // gcd(n, j)
        total += c * _moebius(m) * (pn // euler_phi(m))
    return total


def trace_over(a: Cyclotomic, n: int) -> Fraction:
    """Trace of a from Q(zeta_n) down to Q; conductor(a) must divide n."""
    a = Cyclotomic._coerce(a)
    if n <= 0 or n % a.n != 0:
        raise ValueError(
            "element of conductor %d does not lie in Q(zeta_%d)" % (a.n, n)
        )
    return trace_to_rational(a) * (euler_phi(n) // euler_phi(a.n))


# -- text format -----------------------------------------------------------


class CyclotomicParseError(ValueError):
    """Raised for malformed cyclotomic expressions; carries the position."""

    def __init__(self, message: str, pos: int):
        super().__init__("%s (at position %d)" % (message, pos))
        self.pos = pos


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.i = 0

    def _skip_ws(self):
        while self.i < len(self.text) and self.text[self.i].isspace():
            self.i += 1

    def _peek(self):
        self._skip_ws()
        return self.text[self.i] if self.i < len(self.text) else ""

    def _expect(self, ch: str):
        if self._peek() != ch:
            raise CyclotomicParseError("expected %r" % ch, self.i)
        self.i += 1

    def _uint(self) -> int:
        self._skip_ws()
        start = self.i
        while self.i < len(self.text) and self.text[self.i].isdigit():
            self.i += 1
        if self.i == start:
            raise CyclotomicParseError("expected an integer", start)
        return int(self.text[start : self.i])

    def _atom(self) -> Cyclotomic:
        self._expect("E")
        self._expect("(")
        n = self._uint()
        if n == 0:
            raise CyclotomicParseError("root of unity order must be positive", self.i)
        self._expect(")")
        k = 1
        if self._peek() == "^":
            self.i += 1
            k = self._uint()
        return root_of_unity(n, k)

    def _term(self) -> Cyclotomic:
        if self._peek() == "E":
            return self._atom()
        num = self._uint()
        den = 1
        if self._peek() == "/":
            self.i += 1
            den = self._uint()
            if den == 0:
                raise CyclotomicParseError("zero denominator", self.i)
        coeff = Fraction(num, den)
        if self._peek() == "*":
            self.i += 1
            return self._atom() * coeff
        return from_rational(coeff)

    def parse(self) -> Cyclotomic:
        total = _ZERO
        sign = 1
        ch = self._peek()
        if ch in "+-":
            sign = -1 if ch == "-" else 1
            self.i += 1
        elif ch == "":
            raise CyclotomicParseError("empty expression", self.i)
        total = total + self._term() * sign
        while True:
            ch = self._peek()
            if ch == "":
                return total
            if ch not in "+-":
                raise CyclotomicParseError("expected '+' or '-'", self.i)
            self.i += 1
            sign = -1 if ch == "-" else 1
            total = total + self._term() * sign


def parse_cyclotomic(text: str) -> Cyclotomic:
    """Parse an E(n)-expression string into a canonical Cyclotomic."""
    return _Parser(text).parse()


def render_cyclotomic(a: Cyclotomic) -> str:
    """Canonical text form: basis terms with ascending exponents.

    parse_cyclotomic(render_cyclotomic(a)) == a for every a.
    """
    a = Cyclotomic._coerce(a)
    if not a._c:
        return "0"
    if a.n == 1:
        return str(a._c[0])
    parts = []
    for j in sorted(a._c):
        c = a._c[j]
        neg = c < 0
        mag = -c if neg else c
        if j == 0:
            body = str(mag)
        else:
            atom = "E(%d)" % a.n if j == 1 else "E(%d)^%d" % (a.n, j)
            body = atom if mag == 1 else "%s*%s" % (mag, atom)
        if not parts:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append(("-" if neg else "+") + body)
    return "".join(parts)
