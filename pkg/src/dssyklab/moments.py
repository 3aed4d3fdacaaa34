"""Reduced moments of the constant-perturbed double-scaled model.

Two independent exact routes to m_n are provided: the direct combinatorial
sum over interval compositions (`reduced_moment`) and the extraction from
the cyclic generating function log 1/(1-B) (`reduced_moment_gf`).  Both
return identical polynomials in (q, qt, theta).

Half-integer powers of qt appear in intermediate quantities because every
unpaired chord is marked with sqrt(qt) before the inter-interval pairing.
Internally the qt exponent therefore counts *half* powers; the doubled
bookkeeping is collapsed (and integrality asserted) at the very end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product

import numpy as np

from . import qhermite
from .qcore import HermiteExpansion, MultiPoly
from .qhermite import ConvergenceError, linearization, monomial_to_hermite, rt_moment

MAX_MOMENT_ORDER = 14


def _halve_qt(poly: MultiPoly) -> MultiPoly:
    """Collapse the doubled qt bookkeeping; every exponent must be even."""
    terms = {}
    for (a, b, c), coeff in poly.terms.items():
        if b % 2:
            raise AssertionError(f"half-integer qt power survived pairing: qt^{b}/2 in {poly}")
        terms[(a, b // 2, c)] = coeff
    return MultiPoly(terms)


def conditional_moment_expansion(k: int) -> HermiteExpansion:
    """Hermite expansion of the conditional k-th moment of the stationary
    q-Gaussian Markov transition.

    The coefficient of H_{k-2m} is c_{m,k} * qt^{(k-2m)/2}; since MultiPoly
    exponents are integers, the qt exponent stored here counts half powers
    (qt_pow = k-2m means qt to the (k-2m)/2).
    """
    if k < 0:
        raise ValueError("order must be nonnegative")
    base = monomial_to_hermite(k)
    coeffs = [base.coefficient(d) * MultiPoly.monomial(qt_pow=d) for d in range(base.degree + 1)]
    return HermiteExpansion(coeffs)


def _compositions(total: int, parts: int):
    """Ordered compositions of `total` into `parts` positive integers."""
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _block_vacuum(comp: tuple[int, ...]) -> MultiPoly:
    """Vacuum expectation of prod_i b_{k_i}: per-interval contractions times
    the inter-interval linearization.  qt exponents in half units."""
    options = []
    for k in comp:
        exp = conditional_moment_expansion(k)
        options.append([(d, exp.coefficient(d)) for d in range(exp.degree + 1)
                        if not exp.coefficient(d).is_zero()])
    total = MultiPoly.zero()
    for choice in product(*options):
        degrees = [d for d, _ in choice]
        lin = linearization(degrees)
        if lin.is_zero():
            continue
        coeff = MultiPoly.one()
        for _, c in choice:
            coeff = coeff * c
        total = total + coeff * lin
    return total


def _reduced_moment_half(n: int) -> MultiPoly:
    """m_n with qt exponents still in half units (they are all even)."""
    if n < 1:
        raise ValueError("moment order must be positive")
    if n > MAX_MOMENT_ORDER:
        raise ValueError(f"moment order capped at {MAX_MOMENT_ORDER}")
    total = MultiPoly.monomial(theta_pow=n)  # j = 0: bare theta^n
    for j in range(1, (n - 1) // 2 + 1):
        blocks = n - 2 * j
        cyclic = Fraction(n, blocks)
        theta_factor = MultiPoly.monomial(theta_pow=blocks)
        for l in range(1, min(blocks, 2 * j) + 1):
            slot_choice = math.comb(blocks, l)
            acc = MultiPoly.zero()
            for comp in _compositions(2 * j, l):
                acc = acc + _block_vacuum(tuple(sorted(comp)))
            total = total + (cyclic * slot_choice) * theta_factor * acc
    return total


@lru_cache(maxsize=None)
def reduced_moment(n: int) -> MultiPoly:
    """Exact reduced moment m_n as a polynomial in (q, qt, theta).

    Direct route: sum over the number 2j of random nodes, over interval
    counts l and ordered compositions (k_1..k_l) of 2j, with the cyclic
    factor n/(n-2j), the slot choice C(n-2j, l), per-interval contraction
    coefficients and the inter-interval linearization.
    """
    return _halve_qt(_reduced_moment_half(n))


# ---------------------------------------------------------------------------
# generating-function route
# ---------------------------------------------------------------------------

@dataclass
class BSeries:
    """Truncated z-series of the interval generating function B(z, x0).

    coeffs[p] is the Hermite expansion multiplying z^p; the z^0 entry is
    identically empty and the z^1 coefficient is theta * H_0.  Coefficient
    polynomials carry theta markers and half-unit qt exponents.
    """

    order: int
    coeffs: list[HermiteExpansion] = field(default_factory=list)

    @classmethod
    def build(cls, order: int) -> "BSeries":
        theta = MultiPoly.theta()
        coeffs = [HermiteExpansion([])]
        for p in range(1, order + 1):
            coeffs.append(conditional_moment_expansion(p - 1).scale(theta))
        return cls(order=order, coeffs=coeffs)

    def evaluate(self, z: float, x0: float, q: float, qt: float, theta: float = 1.0) -> float:
        """Numeric partial sum of B at a point (principal sqrt for qt)."""
        sq = math.sqrt(qt)
        max_deg = max((exp.degree for exp in self.coeffs[1:]), default=0)
        hvals = qhermite.hermite_values(max(max_deg, 0), np.array(x0), q)
        total = 0.0
        for p in range(1, self.order + 1):
            exp = self.coeffs[p]
            coeff = 0.0
            for d in range(exp.degree + 1):
                poly = exp.coefficient(d)
                val = sum(float(frac) * q ** a * sq ** b * theta ** c
                          for (a, b, c), frac in poly.terms.items())
                coeff += val * float(hvals[d])
            total += coeff * z ** p
        return total


def _series_multiply(s1, s2, order):
    """Convolve two z-series whose coefficients map sorted Hermite-degree
    tuples to MultiPoly weights (vacuum expectation deferred)."""
    out = [dict() for _ in range(order + 1)]
    for p1, terms1 in enumerate(s1):
        if not terms1:
            continue
        for p2, terms2 in enumerate(s2):
            if not terms2 or p1 + p2 > order:
                continue
            bucket = out[p1 + p2]
            for key1, c1 in terms1.items():
                for key2, c2 in terms2.items():
                    key = tuple(sorted(key1 + key2))
                    prodc = c1 * c2
                    acc = bucket.get(key)
                    bucket[key] = prodc if acc is None else acc + prodc
    return out


@lru_cache(maxsize=None)
def reduced_moment_gf(n: int) -> MultiPoly:
    """m_n extracted from the pointed-cycle generating function.

    Builds log 1/(1-B) as a z-series whose coefficients are formal products
    of Hermite basis elements (kept unexpanded), takes n times the z^n
    coefficient, and evaluates every deferred product through the
    linearization kernel in one final pass.
    """
    if n < 1:
        raise ValueError("moment order must be positive")
    if n > MAX_MOMENT_ORDER:
        raise ValueError(f"moment order capped at {MAX_MOMENT_ORDER}")
    bseries = BSeries.build(n)
    b_terms = [dict() for _ in range(n + 1)]
    for p in range(1, n + 1):
        exp = bseries.coeffs[p]
        for d in range(exp.degree + 1):
            coeff = exp.coefficient(d)
            if not coeff.is_zero():
                b_terms[p][(d,)] = coeff
    log_series = [dict() for _ in range(n + 1)]
    power = b_terms
    for m in range(1, n + 1):
        inv_m = Fraction(1, m)
        for p, terms in enumerate(power):
            bucket = log_series[p]
            for key, coeff in terms.items():
                scaled = inv_m * coeff
                acc = bucket.get(key)
                bucket[key] = scaled if acc is None else acc + scaled
        if m < n:
            power = _series_multiply(power, b_terms, n)
    total = MultiPoly.zero()
    for key, coeff in log_series[n].items():
        lin = linearization(list(key))
        if not lin.is_zero():
            total = total + coeff * lin
    return _halve_qt(n * total)


# ---------------------------------------------------------------------------
# assembled moments, the c = 1 oracle, and limits
# ---------------------------------------------------------------------------

def full_moment(n: int, r) -> MultiPoly:
    """Normalized trace moment of the full Hamiltonian: r m_n plus the
    pure-random part (present only at even n)."""
    r = Fraction(r)
    if not 0 < r <= 1:
        raise ValueError("r must lie in (0, 1]")
    out = r * reduced_moment(n)
    if n % 2 == 0:
        out = out + rt_moment(n // 2)
    return out


def _weak_compositions_weighted(j: int):
    """All (k_1..k_j) >= 0 with sum i*k_i = j."""
    def rec(i, remaining, acc):
        if i > j:
            if remaining == 0:
                yield tuple(acc)
            return
        for k in range(remaining // i + 1):
            acc.append(k)
            yield from rec(i + 1, remaining - i * k, acc)
            acc.pop()
    yield from rec(1, j, [])


@lru_cache(maxsize=None)
def boolean_moment_c1(n: int) -> MultiPoly:
    """Single-defect moment formula: the Boolean moment-cumulant special case.

    Sums over multisets of even-moment blocks RT(i) with multinomial slot
    weights and the cyclic prefactor; coincides with reduced_moment at
    qt = 0.
    """
    if n < 1:
        raise ValueError("moment order must be positive")
    if n > MAX_MOMENT_ORDER:
        raise ValueError(f"moment order capped at {MAX_MOMENT_ORDER}")
    total = MultiPoly.monomial(theta_pow=n)
    for j in range(1, (n - 1) // 2 + 1):
        blocks = n - 2 * j
        cyclic = Fraction(n, blocks)
        for ks in _weak_compositions_weighted(j):
            s = sum(ks)
            if s > blocks:
                continue
            weight = math.factorial(blocks)
            for k in ks:
                weight //= math.factorial(k)
            weight //= math.factorial(blocks - s)
            term = MultiPoly.monomial(theta_pow=blocks, coeff=cyclic * weight)
            for i, k in enumerate(ks, start=1):
                if k:
                    term = term * rt_moment(i) ** k
            total = total + term
    return total


def qtilde_limit_check(n: int, which: int) -> MultiPoly:
    """Specialize m_n at qt = 0 or qt = 1 and assert it equals the
    corresponding independent formula (Boolean at 0, binomial shift at 1).

    Returns the specialized polynomial; raises ValueError with a diagnostic
    on inconsistency.
    """
    if which not in (0, 1):
        raise ValueError("which must be 0 or 1")
    specialized = reduced_moment(n).substitute(qt=which)
    if which == 0:
        other = boolean_moment_c1(n)
        label = "Boolean c=1 formula"
    else:
        other = MultiPoly.zero()
        for i in range(0, n):
            if i % 2 == 0:
                other = other + math.comb(n, i) * rt_moment(i // 2) * MultiPoly.monomial(theta_pow=n - i)
        label = "binomial shift identity"
    if specialized != other:
        raise ValueError(
            f"qt={which} limit of m_{n} disagrees with the {label}:\n"
            f"  specialized: {specialized}\n  independent: {other}")
    return specialized


# ---------------------------------------------------------------------------
# numeric layer: continued fraction and the n-boundary partition function
# ---------------------------------------------------------------------------

def _b_fraction_once(z: float, x0: float, q: float, qt: float, depth: int, theta: float) -> float:
    sq = math.sqrt(qt)
    g = 0.0
    for j in range(depth, -1, -1):
        diag = sq * q ** j * x0
        off = (1.0 - qt * q ** j) * (1.0 - q ** (j + 1)) / (1.0 - q)
        denom = 1.0 - diag * z - off * z * z * g
        if denom == 0.0:
            raise ConvergenceError(f"continued fraction hit a pole at level {j}")
        g = 1.0 / denom
    return theta * z * g


def b_continued_fraction(z: float, x0: float, q: float, qt: float,
                         depth: int = 60, theta: float = 1.0) -> float:
    """Continued-fraction evaluation of the interval generating function B.

    Level j has diagonal sqrt(qt) q^j x0 and off-diagonal weight
    (1 - qt q^j)[j+1]_q; convergence is checked by comparing two truncation
    depths.  theta enters as an overall linear factor.
    """
    if not 0.0 <= q < 1.0:
        raise ValueError("need 0 <= q < 1")
    if not 0.0 <= qt <= 1.0:
        raise ValueError("need 0 <= qt <= 1")
    if depth < 20:
        raise ValueError("depth must be at least 20")
    deep = _b_fraction_once(z, x0, q, qt, depth, theta)
    shallow = _b_fraction_once(z, x0, q, qt, depth - 5, theta)
    if abs(deep - shallow) > 1e-12 * max(1.0, abs(deep)):
        raise ConvergenceError(
            f"continued fraction not settled at depth {depth}: |delta|={abs(deep - shallow):.3e}")
    return deep


def coherent_state_factor(x, q: float, z: float):
    """q-deformed coherent state product Gamma_q(x, z), truncated at the
    standard product tolerance."""
    x = np.asarray(x, dtype=float)
    K = qhermite.default_truncation(q)
    out = np.ones_like(x)
    for k in range(K):
        qk = q ** k
        out /= 1.0 - (1.0 - q) * qk * z * x + (1.0 - q) * qk * qk * z * z
    return out


def z_n(n: int, beta: float, q: float, qt: float) -> float:
    """n-boundary partition function: the n-th moment of
    y(E) = exp(-beta E) Gamma_q(E, qt) under the q-Gaussian measure.

    Integrated with the panel quadrature; a refined rule must agree or a
    ConvergenceError is raised.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if not 0.0 <= q <= qhermite.Q_NUMERIC_MAX:
        raise ValueError(f"numeric q must lie in [0, {qhermite.Q_NUMERIC_MAX}]")
    if not 0.0 <= qt < 1.0:
        raise ValueError("need 0 <= qt < 1")

    def value(panels: int) -> float:
        quad = qhermite.QGaussianQuadrature(q, panels=panels)
        y = np.exp(-beta * quad.nodes) * coherent_state_factor(quad.nodes, q, qt)
        return float(np.sum(quad.weights * y ** n))

    coarse, fine = value(64), value(128)
    if abs(fine - coarse) > 1e-8 * max(1.0, abs(fine)):
        raise ConvergenceError(f"partition-function quadrature not converged: {coarse} vs {fine}")
    return fine


# ---------------------------------------------------------------------------
# moment tables
# ---------------------------------------------------------------------------

@dataclass
class MomentTable:
    """Moments m_1 .. m_max_n plus a note on which variables are symbolic."""

    max_n: int
    values: list[MultiPoly]
    params_note: dict

    @classmethod
    def symbolic(cls, max_n: int) -> "MomentTable":
        vals = [reduced_moment(n) for n in range(1, max_n + 1)]
        return cls(max_n, vals, {"q": "symbolic", "qt": "symbolic", "theta": "symbolic"})

    @classmethod
    def specialized(cls, max_n: int, q=None, qt=None, theta=None) -> "MomentTable":
        note = {"q": "symbolic" if q is None else str(Fraction(q)),
                "qt": "symbolic" if qt is None else str(Fraction(qt)),
                "theta": "symbolic" if theta is None else str(Fraction(theta))}
        vals = [reduced_moment(n).substitute(q=q, qt=qt, theta=theta)
                for n in range(1, max_n + 1)]
        return cls(max_n, vals, note)

    def moment(self, n: int) -> MultiPoly:
        return self.values[n - 1]

    def to_json_obj(self) -> dict:
        return {
            "max_n": self.max_n,
            "params": self.params_note,
            "moments": {str(n): self.values[n - 1].to_json_obj() for n in range(1, self.max_n + 1)},
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "MomentTable":
        max_n = int(obj["max_n"])
        vals = [MultiPoly.from_json_obj(obj["moments"][str(n)]) for n in range(1, max_n + 1)]
        return cls(max_n, vals, dict(obj["params"]))

    def numeric_rows(self) -> list[tuple[int, float]]:
        """(n, m_n) pairs; only valid once fully specialized."""
        rows = []
        for n in range(1, self.max_n + 1):
            poly = self.values[n - 1]
            if not poly.is_constant():
                raise ValueError("moment table still contains symbolic entries")
            rows.append((n, float(poly.constant_value())))
        return rows
