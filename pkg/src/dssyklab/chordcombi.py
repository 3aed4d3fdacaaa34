"""Brute-force combinatorial oracles on chord diagrams.

Everything here exists for correctness, not speed: partitions and matchings
are enumerated explicitly (with deliberate scale caps) so the closed-form
machinery elsewhere can be checked against direct counting.  The transfer
matrix realization of the chord-number evolution lives here too.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .qcore import HermiteExpansion, MultiPoly, q_integer

PAIR_PARTITION_CAP = 16
P12_CAP = 12
ORACLE_POINT_CAP = 14


@dataclass(frozen=True)
class SetPartition:
    """Partition of the ground set {1..n} into disjoint blocks.

    Blocks are stored as sorted tuples, ordered by their minimum element.
    """

    blocks: tuple[tuple[int, ...], ...]

    @classmethod
    def from_blocks(cls, blocks) -> "SetPartition":
        canon = tuple(sorted((tuple(sorted(b)) for b in blocks), key=lambda b: b[0]))
        seen = [i for b in canon for i in b]
        if sorted(seen) != list(range(1, len(seen) + 1)):
            raise ValueError("blocks must partition {1..n}")
        return cls(canon)

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    def pairs(self) -> list[tuple[int, int]]:
        return [b for b in self.blocks if len(b) == 2]

    def singletons(self) -> list[int]:
        return [b[0] for b in self.blocks if len(b) == 1]

    def to_json_obj(self) -> dict:
        return {"blocks": [list(b) for b in self.blocks]}


@dataclass(frozen=True)
class MatchingStats:
    """A partition with its cached crossing statistics.

    cr: crossings between 2-element blocks; sd: total depth of singletons
    under 2-element blocks; singleton_count: number of 1-element blocks.
    """

    partition: SetPartition
    cr: int
    sd: int
    singleton_count: int

    def to_json_obj(self) -> dict:
        obj = self.partition.to_json_obj()
        obj.update(cr=self.cr, sd=self.sd, singletons=self.singleton_count)
        return obj


def crossing_number(pairs) -> int:
    """Number of interleaved pairs (a,b),(c,d) with a < c < b < d."""
    cr = 0
    plist = list(pairs)
    for i in range(len(plist)):
        a, b = plist[i]
        for j in range(i + 1, len(plist)):
            c, d = plist[j]
            if a < c < b < d or c < a < d < b:
                cr += 1
    return cr


def singleton_depths(pairs, singletons) -> int:
    """Sum over singletons s of the number of pairs (a,b) with a < s < b."""
    return sum(1 for s in singletons for (a, b) in pairs if a < s < b)


def _stats(blocks) -> MatchingStats:
    part = SetPartition.from_blocks(blocks)
    pairs = part.pairs()
    singles = part.singletons()
    return MatchingStats(part, crossing_number(pairs), singleton_depths(pairs, singles), len(singles))


def enumerate_pair_partitions(n: int) -> list[MatchingStats]:
    """All perfect matchings of {1..n} with exact crossing counts.

    Odd n yields the empty list (no perfect matchings exist).  Enumeration
    is lexicographic by smallest unmatched element, so the output order is
    deterministic.
    """
    if n < 0 or n > PAIR_PARTITION_CAP:
        raise ValueError(f"enumerate_pair_partitions supports 0 <= n <= {PAIR_PARTITION_CAP}")
    if n % 2 == 1:
        return []
    out: list[MatchingStats] = []

    def recurse(remaining: tuple[int, ...], acc: list[tuple[int, int]]):
        if not remaining:
            out.append(_stats(list(acc)))
            return
        first, rest = remaining[0], remaining[1:]
        for i, partner in enumerate(rest):
            acc.append((first, partner))
            recurse(rest[:i] + rest[i + 1:], acc)
            acc.pop()

    recurse(tuple(range(1, n + 1)), [])
    return out


def enumerate_p12(k: int) -> list[MatchingStats]:
    """All partitions of {1..k} with blocks of size at most 2, with statistics."""
    if k < 0 or k > P12_CAP:
        raise ValueError(f"enumerate_p12 supports 0 <= k <= {P12_CAP}")
    out: list[MatchingStats] = []

    def recurse(remaining: tuple[int, ...], acc: list[tuple[int, ...]]):
        if not remaining:
            out.append(_stats(list(acc)))
            return
        first, rest = remaining[0], remaining[1:]
        acc.append((first,))
        recurse(rest, acc)
        acc.pop()
        for i, partner in enumerate(rest):
            acc.append((first, partner))
            recurse(rest[:i] + rest[i + 1:], acc)
            acc.pop()

    recurse(tuple(range(1, k + 1)), [])
    return out


def normal_order_power(k: int) -> HermiteExpansion:
    """Hermite expansion of T^k obtained by normal-ordering (x + D_q)^k.

    Words in {x, D_q} are kept as normal forms x^a D_q^b; right-multiplying
    by x uses D_q^b x = [b]_q D_q^(b-1) + q^b x D_q^b, which is the
    commutation rule D_q x -> 1 + q x D_q applied once per inversion.  The
    vacuum-surviving part (b = 0) carries the Hermite coefficients.
    """
    if k < 0 or k > P12_CAP:
        raise ValueError(f"normal_order_power supports 0 <= k <= {P12_CAP}")
    # normal form: map (x-power, D-power) -> MultiPoly in q
    form: dict[tuple[int, int], MultiPoly] = {(0, 0): MultiPoly.one()}
    for _ in range(k):
        new: dict[tuple[int, int], MultiPoly] = {}

        def add(key, val):
            acc = new.get(key)
            new[key] = val if acc is None else acc + val

        for (a, b), coeff in form.items():
            # times x: D^b x = [b]_q D^(b-1) + q^b x D^b
            if b > 0:
                add((a, b - 1), coeff * q_integer(b))
            add((a + 1, b), coeff * MultiPoly.monomial(q_pow=b))
            # times D
            add((a, b + 1), coeff)
        form = {key: val for key, val in new.items() if not val.is_zero()}
    max_a = max((a for (a, b) in form if b == 0), default=0)
    coeffs = [form.get((a, 0), MultiPoly.zero()) for a in range(max_a + 1)]
    return HermiteExpansion(coeffs)


def inhomogeneous_matching_oracle(class_sizes: list[int]) -> MultiPoly:
    """Sum of q^crossings over perfect matchings with no within-class chord.

    Points are laid out on a line grouped by class in the given order; a
    chord may only join points of different classes.  Zero when no such
    matching exists (in particular for odd totals).
    """
    if any(s < 0 for s in class_sizes):
        raise ValueError("class sizes must be nonnegative")
    total = sum(class_sizes)
    if total > ORACLE_POINT_CAP:
        raise ValueError(f"oracle capped at {ORACLE_POINT_CAP} points")
    if total % 2 == 1:
        return MultiPoly.zero()
    label = {}
    pos = 1
    for ci, size in enumerate(class_sizes):
        for _ in range(size):
            label[pos] = ci
            pos += 1
    result = MultiPoly.zero()

    def recurse(remaining: tuple[int, ...], acc: list[tuple[int, int]]):
        nonlocal result
        if not remaining:
            result = result + MultiPoly.monomial(q_pow=crossing_number(acc))
            return
        first, rest = remaining[0], remaining[1:]
        for i, partner in enumerate(rest):
            if label[first] == label[partner]:
                continue
            acc.append((first, partner))
            recurse(rest[:i] + rest[i + 1:], acc)
            acc.pop()

    recurse(tuple(range(1, total + 1)), [])
    return result


class TransferMatrix:
    """Truncated chord transfer matrix T|l> = |l+1> + [l]_q |l-1>.

    Entries are exact polynomials in q on the chord-number basis
    |0>, ..., |L>.  Truncation at L is lossless for moments T^k as long
    as at most L chords can simultaneously be open, i.e. L >= ceil(k/2).
    """

    def __init__(self, truncation: int):
        if truncation < 0:
            raise ValueError("truncation must be nonnegative")
        self.truncation = truncation

    def entry(self, row: int, col: int) -> MultiPoly:
        if row == col + 1:
            return MultiPoly.one()
        if row == col - 1:
            return q_integer(col)
        return MultiPoly.zero()

    def apply(self, vec: list[MultiPoly]) -> list[MultiPoly]:
        L = self.truncation
        out = [MultiPoly.zero() for _ in range(L + 1)]
        for l, amp in enumerate(vec):
            if amp.is_zero():
                continue
            if l + 1 <= L:
                out[l + 1] = out[l + 1] + amp
            if l - 1 >= 0:
                out[l - 1] = out[l - 1] + amp * q_integer(l)
        return out


def transfer_vacuum_moment(k: int, L: int | None = None) -> MultiPoly:
    """<0| T^k |0> over the polynomial ring, via the truncated transfer matrix."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    need = (k + 1) // 2
    if L is None:
        L = need
    if L < need:
        raise ValueError(f"truncation L={L} loses chords for k={k}; need L >= {need}")
    T = TransferMatrix(L)
    vec = [MultiPoly.one()] + [MultiPoly.zero()] * L
    for _ in range(k):
        vec = T.apply(vec)
    return vec[0]


def pair_partition_polynomial(n: int) -> MultiPoly:
    """Sum of q^cr over all perfect matchings of {1..n}; zero for odd n."""
    result = MultiPoly.zero()
    for stats in enumerate_pair_partitions(n):
        result = result + MultiPoly.monomial(q_pow=stats.cr)
    return result


def p12_hermite_polynomial(k: int) -> HermiteExpansion:
    """Aggregate sum over P_{1,2}(k) of q^(cr+sd) H_(s1), grouped by singleton count.

    This is the partition form of the normal-ordering identity; it must
    agree with normal_order_power degree by degree.
    """
    buckets: dict[int, MultiPoly] = {}
    for stats in enumerate_p12(k):
        s = stats.singleton_count
        term = MultiPoly.monomial(q_pow=stats.cr + stats.sd)
        buckets[s] = buckets.get(s, MultiPoly.zero()) + term
    max_s = max(buckets, default=0)
    return HermiteExpansion([buckets.get(s, MultiPoly.zero()) for s in range(max_s + 1)])


def involution_count(k: int) -> int:
    """Number of partitions in P_{1,2}(k): the k-th involution number."""
    a, b = 1, 1  # I(0), I(1)
    if k == 0:
        return 1
    for m in range(2, k + 1):
        a, b = b, b + (m - 1) * a
    return b


def double_factorial(n: int) -> int:
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def oracle_dump(stats_list: list[MatchingStats]) -> list[dict]:
    """JSON-ready listing of partitions with their statistics (golden files)."""
    return [s.to_json_obj() for s in stats_list]
