"""Exact arithmetic foundation: sparse polynomials in (q, qt, theta) over the
rationals, and the q-deformed integers / factorials / binomials built on them.

All coefficients are ``fractions.Fraction``; nothing in this module ever
touches floating point except the explicit ``evaluate`` helpers.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

# exponent triple: (power of q, power of qt, power of theta)
Exponent = tuple[int, int, int]

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"exact coefficient expected (int or Fraction), got {type(value).__name__}")


class MultiPoly:
    """Multivariate polynomial in the formal variables q, qt and theta.

    Terms are stored sparsely as a map from exponent triples to nonzero
    Fraction coefficients.  Instances are immutable after construction:
    every operation returns a new polynomial, so values can be shared
    freely (including across threads).
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Exponent, Fraction] | None = None):
        clean: dict[Exponent, Fraction] = {}
        if terms:
            for exp, coeff in terms.items():
                qp, qtp, tp = exp
                if qp < 0 or qtp < 0 or tp < 0:
                    raise ValueError(f"negative exponent in term {exp}")
                c = _as_fraction(coeff)
                if c != 0:
                    clean[(int(qp), int(qtp), int(tp))] = c
        self._terms = clean

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls) -> "MultiPoly":
        return cls()

    @classmethod
    def one(cls) -> "MultiPoly":
        return cls({(0, 0, 0): _ONE})

    @classmethod
    def constant(cls, value) -> "MultiPoly":
        return cls({(0, 0, 0): _as_fraction(value)})

    @classmethod
    def monomial(cls, q_pow=0, qt_pow=0, theta_pow=0, coeff=1) -> "MultiPoly":
        return cls({(q_pow, qt_pow, theta_pow): _as_fraction(coeff)})

    @classmethod
    def q(cls) -> "MultiPoly":
        return cls.monomial(q_pow=1)

    @classmethod
    def qt(cls) -> "MultiPoly":
        return cls.monomial(qt_pow=1)

    @classmethod
    def theta(cls) -> "MultiPoly":
        return cls.monomial(theta_pow=1)

    # -- inspection ---------------------------------------------------

    @property
    def terms(self) -> dict[Exponent, Fraction]:
        """Copy of the term map (canonical content, not canonical order)."""
        return dict(self._terms)

    def items(self) -> Iterable[tuple[Exponent, Fraction]]:
        return sorted(self._terms.items())

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(exp == (0, 0, 0) for exp in self._terms)

    def constant_value(self) -> Fraction:
        """The coefficient of the constant term (polynomial need not be constant)."""
        return self._terms.get((0, 0, 0), _ZERO)

    def coefficient(self, q_pow=0, qt_pow=0, theta_pow=0) -> Fraction:
        return self._terms.get((q_pow, qt_pow, theta_pow), _ZERO)

    def degree(self, variable: str) -> int:
        """Largest exponent of ``variable`` ('q', 'qt' or 'theta'); -1 if zero poly."""
        idx = {"q": 0, "qt": 1, "theta": 2}[variable]
        if not self._terms:
            return -1
        return max(exp[idx] for exp in self._terms)

    # -- ring operations ----------------------------------------------

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            return other
        return MultiPoly.constant(other)

    def __add__(self, other) -> "MultiPoly":
        other = self._coerce(other)
        out = dict(self._terms)
        for exp, coeff in other._terms.items():
            new = out.get(exp, _ZERO) + coeff
            if new == 0:
                out.pop(exp, None)
            else:
                out[exp] = new
        result = MultiPoly.__new__(MultiPoly)
        result._terms = out
        return result

    __radd__ = __add__

    def __neg__(self) -> "MultiPoly":
        result = MultiPoly.__new__(MultiPoly)
        result._terms = {exp: -c for exp, c in self._terms.items()}
        return result

    def __sub__(self, other) -> "MultiPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "MultiPoly":
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> "MultiPoly":
        other = self._coerce(other)
        out: dict[Exponent, Fraction] = {}
        for (a1, b1, c1), x in self._terms.items():
            for (a2, b2, c2), y in other._terms.items():
                exp = (a1 + a2, b1 + b2, c1 + c2)
                new = out.get(exp, _ZERO) + x * y
                if new == 0:
                    out.pop(exp, None)
                else:
                    out[exp] = new
        result = MultiPoly.__new__(MultiPoly)
        result._terms = out
        return result

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "MultiPoly":
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial powers must be nonnegative integers")
        result = MultiPoly.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.constant(other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    # -- specialization and evaluation ----------------------------------

    def substitute(self, q=None, qt=None, theta=None) -> "MultiPoly":
        """Exactly substitute rational values for any subset of the variables."""
        out: dict[Exponent, Fraction] = {}
        for (a, b, c), coeff in self._terms.items():
            factor = coeff
            if q is not None:
                factor *= _as_fraction(q) ** a
                a = 0
            if qt is not None:
                factor *= _as_fraction(qt) ** b
                b = 0
            if theta is not None:
                factor *= _as_fraction(theta) ** c
                c = 0
            if factor == 0:
                continue
            exp = (a, b, c)
            new = out.get(exp, _ZERO) + factor
            if new == 0:
                out.pop(exp, None)
            else:
                out[exp] = new
        result = MultiPoly.__new__(MultiPoly)
        result._terms = out
        return result

    def evaluate(self, q=0.0, qt=0.0, theta=0.0) -> float:
        """Numeric evaluation (floats); use substitute() for the exact path."""
        return float(sum(float(c) * q**a * qt**b * theta**c2
                         for (a, b, c2), c in self._terms.items()))

    def evaluate_exact(self, q, qt, theta) -> Fraction:
        q, qt, theta = _as_fraction(q), _as_fraction(qt), _as_fraction(theta)
        return sum((c * q**a * qt**b * theta**c2
                    for (a, b, c2), c in self._terms.items()), _ZERO)

    # -- serialization --------------------------------------------------

    def to_json_obj(self) -> list[dict]:
        """Canonical JSON form: term records sorted by exponent triple."""
        return [
            {"q": a, "qt": b, "theta": c, "num": str(v.numerator), "den": str(v.denominator)}
            for (a, b, c), v in self.items()
        ]

    @classmethod
    def from_json_obj(cls, records: list[dict]) -> "MultiPoly":
        terms = {}
        for rec in records:
            exp = (int(rec["q"]), int(rec["qt"]), int(rec["theta"]))
            terms[exp] = Fraction(int(rec["num"]), int(rec["den"]))
        return cls(terms)

    def __repr__(self):
        return f"MultiPoly({self!s})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for (a, b, c), coeff in self.items():
            factors = []
            if coeff != 1 or (a, b, c) == (0, 0, 0):
                factors.append(str(coeff))
            for sym, p in (("q", a), ("qt", b), ("theta", c)):
                if p == 1:
                    factors.append(sym)
                elif p > 1:
                    factors.append(f"{sym}^{p}")
            parts.append("*".join(factors))
        return " + ".join(parts)


class HermiteExpansion:
    """A finite expansion in the monic q-Hermite basis H_0, H_1, ...

    coeffs[d] is the MultiPoly coefficient of H_d; trailing zero
    coefficients are trimmed on construction.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[MultiPoly]):
        coeffs = list(coeffs)
        while coeffs and coeffs[-1].is_zero():
            coeffs.pop()
        self.coeffs = coeffs

    @classmethod
    def basis(cls, degree: int, coeff: MultiPoly | None = None) -> "HermiteExpansion":
        coeffs = [MultiPoly.zero()] * degree + [coeff if coeff is not None else MultiPoly.one()]
        return cls(coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coefficient(self, d: int) -> MultiPoly:
        if 0 <= d < len(self.coeffs):
            return self.coeffs[d]
        return MultiPoly.zero()

    def __add__(self, other: "HermiteExpansion") -> "HermiteExpansion":
        n = max(len(self.coeffs), len(other.coeffs))
        return HermiteExpansion([self.coefficient(d) + other.coefficient(d) for d in range(n)])

    def scale(self, factor: MultiPoly) -> "HermiteExpansion":
        return HermiteExpansion([c * factor for c in self.coeffs])

    def __eq__(self, other) -> bool:
        if not isinstance(other, HermiteExpansion):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __repr__(self):
        body = " + ".join(f"({c})*H{d}" for d, c in enumerate(self.coeffs) if not c.is_zero())
        return f"HermiteExpansion[{body or '0'}]"


# ---------------------------------------------------------------------------
# q-deformed integers, factorials, binomials
# ---------------------------------------------------------------------------

def q_integer(n: int) -> MultiPoly:
    """[n]_q = 1 + q + ... + q^(n-1); the empty sum for n = 0."""
    if n < 0:
        raise ValueError("q_integer requires n >= 0")
    return MultiPoly({(k, 0, 0): _ONE for k in range(n)})


def q_factorial(n: int) -> MultiPoly:
    """[n]_q! = [1]_q [2]_q ... [n]_q, with [0]_q! = 1."""
    if n < 0:
        raise ValueError("q_factorial requires n >= 0")
    out = MultiPoly.one()
    for k in range(1, n + 1):
        out = out * q_integer(k)
    return out


def q_binomial(n: int, k: int) -> MultiPoly:
    """Gaussian binomial [n choose k]_q via the q-Pascal recurrence.

    Addition-only: C(n,k) = C(n-1,k-1) + q^k * C(n-1,k).
    """
    if k < 0 or n < 0 or k > n:
        raise ValueError(f"q_binomial requires 0 <= k <= n, got n={n} k={k}")
    # row-by-row Pascal triangle, keeping a single row in memory
    row = [MultiPoly.one()]
    for m in range(1, n + 1):
        new = [MultiPoly.one()]
        for j in range(1, m):
            new.append(row[j - 1] + MultiPoly.monomial(q_pow=j) * row[j])
        new.append(MultiPoly.one())
        row = new
    return row[k]


def q_binomial_by_division(n: int, k: int) -> MultiPoly:
    """[n choose k]_q = [n]_q! / ([k]_q! [n-k]_q!), via exact expansion.

    Cross-check route for q_binomial; computes the product
    prod_{j=1..k} [n-k+j]_q / [j]_q by exact univariate division.
    """
    if k < 0 or n < 0 or k > n:
        raise ValueError(f"q_binomial requires 0 <= k <= n, got n={n} k={k}")
    numerator = q_factorial(n)
    denominator = q_factorial(k) * q_factorial(n - k)
    return _exact_divide_q(numerator, denominator)


def _exact_divide_q(num: MultiPoly, den: MultiPoly) -> MultiPoly:
    """Exact division of polynomials in q alone; raises if not divisible."""
    num_c = _q_coeff_list(num)
    den_c = _q_coeff_list(den)
    if not den_c:
        raise ZeroDivisionError("division by zero polynomial")
    quot = [_ZERO] * (len(num_c) - len(den_c) + 1) if len(num_c) >= len(den_c) else []
    rem = list(num_c)
    for i in range(len(quot) - 1, -1, -1):
        c = rem[i + len(den_c) - 1] / den_c[-1]
        quot[i] = c
        if c != 0:
            for j, d in enumerate(den_c):
                rem[i + j] -= c * d
    if any(r != 0 for r in rem):
        raise ValueError("polynomials do not divide exactly")
    return MultiPoly({(i, 0, 0): c for i, c in enumerate(quot) if c != 0})


def _q_coeff_list(poly: MultiPoly) -> list[Fraction]:
    deg = poly.degree("q")
    if poly.degree("qt") > 0 or poly.degree("theta") > 0:
        raise ValueError("expected a polynomial in q only")
    out = [_ZERO] * (deg + 1)
    for (a, _, _), c in poly.terms.items():
        out[a] = c
    return out


def q_multinomial(n: int, parts: list[int]) -> MultiPoly:
    """q-multinomial [n choose parts]_q as a product of nested q-binomials."""
    if any(p < 0 for p in parts):
        raise ValueError("parts must be nonnegative")
    if sum(parts) != n:
        raise ValueError(f"parts must sum to n: sum({parts}) != {n}")
    out = MultiPoly.one()
    remaining = n
    for p in parts:
        out = out * q_binomial(remaining, p)
        remaining -= p
    return out
