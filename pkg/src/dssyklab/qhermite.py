"""q-Hermite polynomial machinery.

The monic combinatorial normalization is used throughout:

    x H_n(x) = H_{n+1}(x) + [n]_q H_{n-1}(x),   H_0 = 1, H_1 = x.

Symbolic operations (basis changes, linearization coefficients, moments)
stay exact over the rationals; the orthogonality measure, its quadrature
and the conditional q-normal kernel are the numeric layer.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import chordcombi
from .qcore import HermiteExpansion, MultiPoly, q_binomial, q_factorial, q_integer, q_multinomial

Q_NUMERIC_MAX = 0.99
PRODUCT_EPS = 1e-16


class ConvergenceError(RuntimeError):
    """A truncated sum or iteration failed to settle within its budget."""


# ---------------------------------------------------------------------------
# exact symbolic layer
# ---------------------------------------------------------------------------

def hermite_in_x(n: int) -> list[MultiPoly]:
    """Coefficients of H_n^(q) in the monomial basis x^0 .. x^n."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    prev = [MultiPoly.one()]          # H_0
    if n == 0:
        return prev
    cur = [MultiPoly.zero(), MultiPoly.one()]  # H_1 = x
    for m in range(1, n):
        # H_{m+1} = x H_m - [m]_q H_{m-1}
        shifted = [MultiPoly.zero()] + cur
        qm = q_integer(m)
        nxt = [shifted[i] - (prev[i] * qm if i < len(prev) else MultiPoly.zero())
               for i in range(m + 2)]
        prev, cur = cur, nxt
    return cur


@lru_cache(maxsize=None)
def monomial_to_hermite(k: int) -> HermiteExpansion:
    """Expansion x^k = sum_m c_{m,k} H_{k-2m}, built by the inverse recurrence.

    Iterates x * H_j = H_{j+1} + [j]_q H_{j-1} starting from x^0 = H_0, so
    all coefficients come out as exact polynomials in q with no division.
    """
    if k < 0:
        raise ValueError("power must be nonnegative")
    coeffs = [MultiPoly.one()]
    for _ in range(k):
        nxt = [MultiPoly.zero() for _ in range(len(coeffs) + 1)]
        for j, c in enumerate(coeffs):
            if c.is_zero():
                continue
            nxt[j + 1] = nxt[j + 1] + c
            if j >= 1:
                nxt[j - 1] = nxt[j - 1] + c * q_integer(j)
        coeffs = nxt
    return HermiteExpansion(coeffs)


def contraction_coefficient(m: int, k: int) -> MultiPoly:
    """c_{m,k}: the H_{k-2m} coefficient of x^k, exact in q."""
    if m < 0 or 2 * m > k:
        raise ValueError("need 0 <= 2m <= k")
    return monomial_to_hermite(k).coefficient(k - 2 * m)


def c_closed_form(m: int, n: int, q_value: Fraction) -> Fraction:
    """Closed-form alternating sum for c_{m,n}, evaluated exactly at rational q.

    Cross-check route only; the 1/(1-q)^m prefactor makes q = 1 a genuine
    pole of the expression (the recurrence route covers q = 1).
    """
    q_value = Fraction(q_value)
    if m < 0 or 2 * m > n:
        raise ValueError("need 0 <= 2m <= n")
    if q_value == 1:
        raise ValueError("closed form is singular at q = 1; use the recurrence route")
    total = Fraction(0)
    for j in range(m + 1):
        gauss = q_binomial(n - 2 * m + j, j).evaluate_exact(q_value, 0, 0)
        term = (Fraction(n - 2 * m + 2 * j + 1, n + 1)
                * math.comb(n + 1, m - j) * gauss
                * q_value ** (j + j * (j - 1) // 2))
        total += -term if j % 2 else term
    return total / (1 - q_value) ** m


def _symmetric_matrices(row_sums: tuple[int, ...]):
    """Yield upper triangles of symmetric nonnegative integer matrices with
    zero diagonal and the given row sums.  The yielded list is reused
    between iterations; consume it before advancing."""
    l = len(row_sums)
    upper = [[0] * l for _ in range(l)]
    residual = list(row_sums)

    def fill_row(i: int):
        if i == l:
            yield upper
            return
        cols = range(i + 1, l)

        def fill_entry(ci: int):
            if ci == len(cols):
                if residual[i] == 0:
                    yield from fill_row(i + 1)
                return
            j = cols[ci]
            for v in range(min(residual[i], residual[j]) + 1):
                upper[i][j] = v
                residual[i] -= v
                residual[j] -= v
                yield from fill_entry(ci + 1)
                residual[i] += v
                residual[j] += v
            upper[i][j] = 0

        yield from fill_entry(0)

    yield from fill_row(0)


@lru_cache(maxsize=None)
def _linearization_ordered(degrees: tuple[int, ...]) -> MultiPoly:
    l = len(degrees)
    total = MultiPoly.zero()
    for upper in _symmetric_matrices(degrees):
        value = MultiPoly.one()
        for i in range(l):
            row = [upper[min(i, j)][max(i, j)] if i != j else 0 for j in range(l)]
            value = value * q_multinomial(degrees[i], row)
        for i in range(l):
            for j in range(i + 1, l):
                if upper[i][j] > 1:
                    value = value * q_factorial(upper[i][j])
        b = 0
        edges = [(i, j, upper[i][j]) for i in range(l) for j in range(i + 1, l) if upper[i][j]]
        for ei in range(len(edges)):
            i, mm, w1 = edges[ei]
            for ej in range(len(edges)):
                j, p, w2 = edges[ej]
                if i < j < mm < p:
                    b += w1 * w2
        total = total + value * MultiPoly.monomial(q_pow=b)
    return total


def linearization(degrees: list[int]) -> MultiPoly:
    """Vacuum expectation of prod_j H_{n_j}, as an exact polynomial in q.

    Implemented as the sum over symmetric nonnegative integer matrices with
    zero diagonal and row sums n_j, each weighted by q-multinomials, the
    q-factorials of the off-diagonal entries, and q^B for the inter-group
    interleavings B = sum_{i<j<m<p} n_im n_jp.  Zero whenever sum(n_j) is
    odd.  The value is symmetric in the degrees, so lookups are canonicalized
    to sorted order.
    """
    if any(d < 0 for d in degrees):
        raise ValueError("degrees must be nonnegative")
    return _linearization_ordered(tuple(sorted(degrees)))


def rt_moment(k: int) -> MultiPoly:
    """2k-th q-Gaussian moment: sum over perfect matchings of q^crossings.

    Computed exactly through the truncated transfer matrix; truncation at k
    open chords is lossless.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    return chordcombi.transfer_vacuum_moment(2 * k, k)


# ---------------------------------------------------------------------------
# numeric layer: the q-Gaussian measure and its quadrature
# ---------------------------------------------------------------------------

def default_truncation(q: float) -> int:
    """Smallest K with q^K below the product tolerance (1 for q = 0)."""
    if q <= 0.0:
        return 1
    return max(1, math.ceil(math.log(PRODUCT_EPS) / math.log(q)))


def support_radius(q: float) -> float:
    return 2.0 / math.sqrt(1.0 - q)


def _theta_weight(theta: np.ndarray, q: float, K: int) -> np.ndarray:
    """Un-normalized quadrature weight in theta: (2/pi) sin^2(t) * product."""
    w = (2.0 / math.pi) * np.sin(theta) ** 2
    cos2t = np.cos(2.0 * theta)
    for k in range(1, K + 1):
        qk = q ** k
        w *= (1.0 - qk) * (1.0 - 2.0 * qk * cos2t + qk * qk)
    return w


class QGaussianQuadrature:
    """Fixed quadrature rule for integrals against the q-Gaussian measure.

    Uses the substitution x = 2 cos(theta)/sqrt(1-q) and composite
    Gauss-Legendre panels on theta in [0, pi]; the substitution removes the
    square-root endpoint singularities of the density.  Weights are
    renormalized so they sum to one.  Immutable after construction.
    """

    def __init__(self, q: float, panels: int = 64, points_per_panel: int = 8,
                 truncation_K: int | None = None):
        if not 0.0 <= q <= Q_NUMERIC_MAX:
            raise ValueError(f"numeric q must lie in [0, {Q_NUMERIC_MAX}]")
        self.q = float(q)
        self.truncation_K = truncation_K if truncation_K is not None else default_truncation(q)
        base_x, base_w = np.polynomial.legendre.leggauss(points_per_panel)
        edges = np.linspace(0.0, math.pi, panels + 1)
        thetas = []
        weights = []
        for a, b in zip(edges[:-1], edges[1:]):
            half = 0.5 * (b - a)
            thetas.append(0.5 * (a + b) + half * base_x)
            weights.append(half * base_w)
        theta = np.concatenate(thetas)
        wtheta = np.concatenate(weights) * _theta_weight(theta, self.q, self.truncation_K)
        self._raw_mass = float(np.sum(wtheta))
        self.nodes = 2.0 * np.cos(theta) / math.sqrt(1.0 - self.q)
        self.weights = wtheta / self._raw_mass
        if np.any(self.weights <= 0):
            raise ValueError("quadrature produced non-positive weights")

    def integrate(self, f) -> float:
        return float(np.sum(self.weights * f(self.nodes)))

    def moment(self, n: int) -> float:
        return float(np.sum(self.weights * self.nodes ** n))


@lru_cache(maxsize=32)
def _cached_quadrature(q: float, K: int) -> QGaussianQuadrature:
    return QGaussianQuadrature(q, truncation_K=K)


def quadrature(q: float, truncation_K: int | None = None) -> QGaussianQuadrature:
    K = truncation_K if truncation_K is not None else default_truncation(q)
    return _cached_quadrature(float(q), K)


def nu_q_density(x: float, q: float, truncation_K: int | None = None) -> float:
    """Density of the q-Gaussian measure at x for 0 <= q <= 0.99.

    The infinite product is truncated at K factors and the result is
    renormalized by the quadrature mass so the measure integrates to one.
    At q = 0 this collapses to the semicircle sqrt(4 - x^2)/(2 pi).
    """
    if not 0.0 <= q <= Q_NUMERIC_MAX:
        raise ValueError(f"numeric q must lie in [0, {Q_NUMERIC_MAX}]")
    R = support_radius(q)
    if abs(x) > R * (1 + 1e-12):
        raise ValueError(f"x={x} outside the support [-{R}, {R}]")
    K = truncation_K if truncation_K is not None else default_truncation(q)
    arg = min(1.0, max(-1.0, x * math.sqrt(1.0 - q) / 2.0))
    theta = math.acos(arg)
    dens = (math.sqrt(1.0 - q) / math.pi) * math.sin(theta)
    cos2t = math.cos(2.0 * theta)
    for k in range(1, K + 1):
        qk = q ** k
        dens *= (1.0 - qk) * (1.0 - 2.0 * qk * cos2t + qk * qk)
    return dens / _cached_quadrature(float(q), K)._raw_mass


def hermite_values(n_max: int, x, q: float):
    """H_0(x) .. H_{n_max}(x) by the recurrence, on scalars or arrays."""
    x = np.asarray(x, dtype=float)
    values = [np.ones_like(x)]
    if n_max >= 1:
        values.append(x.copy())
    qn = 0.0
    for n in range(1, n_max):
        qn = qn * q + 1.0  # [n]_q
        values.append(x * values[n] - qn * values[n - 1])
    return values


def conditional_kernel(x: float, y: float, r: float, q: float, truncation: int = 200) -> float:
    """Conditional q-normal kernel p_r(x,y) = sum_n r^n H_n(x) H_n(y) / [n]_q!.

    Direct summation with a settling guard: the partial sums must become
    stationary (three consecutive negligible terms) within the truncation
    budget, otherwise a ConvergenceError is raised.  p_r(x,.) integrates to
    one against the q-Gaussian measure.
    """
    if not 0.0 <= q < 1.0:
        raise ValueError("need 0 <= q < 1")
    if not 0.0 <= r < 1.0:
        raise ValueError("need 0 <= r < 1")
    R = support_radius(q)
    if abs(x) > R * (1 + 1e-12) or abs(y) > R * (1 + 1e-12):
        raise ValueError("kernel arguments must lie inside the support")
    if r == 0.0:
        return 1.0
    total = 0.0
    hx_prev, hx = 0.0, 1.0  # H_{-1}, H_0 at x
    hy_prev, hy = 0.0, 1.0
    rn = 1.0      # r^n
    fact = 1.0    # [n]_q!
    settled = 0
    for n in range(truncation + 1):
        term = rn * hx * hy / fact
        total += term
        if abs(term) <= 1e-14 * max(1.0, abs(total)):
            settled += 1
            if settled >= 3:
                return total
        else:
            settled = 0
        qn = (1.0 - q ** n) / (1.0 - q)          # [n]_q
        hx, hx_prev = x * hx - qn * hx_prev, hx  # H_{n+1} = x H_n - [n]_q H_{n-1}
        hy, hy_prev = y * hy - qn * hy_prev, hy
        rn *= r
        fact *= (1.0 - q ** (n + 1)) / (1.0 - q)
    raise ConvergenceError(
        f"kernel sum did not settle within {truncation} terms at (x={x}, y={y}, r={r}, q={q})")
