import pytest

from dssyklab import mixed as mx
from dssyklab import moments as mo
from dssyklab.qcore import MultiPoly
from dssyklab.qhermite import rt_moment

THETA = MultiPoly.theta()
QT = MultiPoly.qt()
Q = MultiPoly.q()


def phi(text):
    return mx.mixed_moment(mx.Word.parse(text)).value


class TestWord:
    def test_parse_and_str(self):
        w = mx.Word.parse("xDxd")
        assert str(w) == "xdxd"

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            mx.Word(())

    def test_rejects_bad_letters(self):
        with pytest.raises(ValueError):
            mx.Word.parse("xyz")


class TestWorkedExamples:
    def test_x4(self):
        assert phi("xxxx") == 2 + Q

    def test_x6(self):
        assert phi("xxxxxx") == 5 + 6 * Q + 3 * Q ** 2 + Q ** 3

    def test_xdxd(self):
        assert phi("xdxd") == QT * THETA ** 2

    def test_xxdd(self):
        assert phi("xxdd") == THETA ** 2

    def test_d4(self):
        assert phi("dddd") == THETA ** 4

    def test_odd_x_count_vanishes(self):
        assert phi("xdd").is_zero()
        assert mx.mixed_moment(mx.Word.parse("xdd")).partition_count == 0

    def test_matching_count(self):
        assert mx.mixed_moment(mx.Word.parse("xxxx")).partition_count == 3

    def test_word_sum_4(self):
        expected = (2 + Q) + (4 + 2 * QT) * THETA ** 2 + THETA ** 4
        assert mx.word_sum_moment(4) == expected

    def test_word_sum_2(self):
        assert mx.word_sum_moment(2) == MultiPoly.one() + THETA ** 2

    def test_word_sum_1(self):
        assert mx.word_sum_moment(1) == THETA


class TestTraceProperty:
    def test_cyclic_invariance(self):
        from itertools import product
        for n in range(2, 9):
            for letters in product("xd", repeat=n):
                word = mx.Word(letters)
                base = mx.mixed_moment(word).value
                for shift in range(1, n):
                    assert mx.mixed_moment(word.rotated(shift)).value == base, \
                        f"trace property broken for {word} shift {shift}"


class TestIndependenceLimits:
    def test_classical_factorization_at_qt_one(self):
        from itertools import product
        for n in range(1, 9):
            for letters in product("xd", repeat=n):
                value = mx.mixed_moment(mx.Word(letters)).value.substitute(qt=1)
                n_x = letters.count("x")
                n_d = n - n_x
                if n_x % 2:
                    assert value.is_zero()
                else:
                    assert value == rt_moment(n_x // 2) * THETA ** n_d

    def test_boolean_factorization_at_qt_zero(self):
        # with walls impenetrable, the moment factorizes over cyclic arcs
        from itertools import product
        for n in range(1, 8):
            for letters in product("xd", repeat=n):
                word = mx.Word(letters)
                value = mx.mixed_moment(word).value.substitute(qt=0)
                arcs = mx._cyclic_arc_ids(letters)
                sizes = {}
                for pos, arc in arcs.items():
                    sizes[arc] = sizes.get(arc, 0) + 1
                n_d = letters.count("d")
                if any(s % 2 for s in sizes.values()):
                    assert value.is_zero()
                else:
                    expected = MultiPoly.monomial(theta_pow=n_d)
                    for s in sizes.values():
                        expected = expected * rt_moment(s // 2)
                    assert value == expected


class TestResultInvariants:
    def test_theta_exponent_counts_d_letters(self):
        from itertools import product
        for n in range(1, 7):
            for letters in product("xd", repeat=n):
                value = mx.mixed_moment(mx.Word(letters)).value
                n_d = letters.count("d")
                for (a, b, c), _ in value.items():
                    assert c == n_d
                    assert a >= 0 and b >= 0

    def test_partition_count_is_double_factorial(self):
        from dssyklab.chordcombi import double_factorial
        for text in ("xx", "xxxx", "xdxdxx", "xxxxxx"):
            res = mx.mixed_moment(mx.Word.parse(text))
            n_x = text.count("x")
            assert res.partition_count == double_factorial(n_x - 1)


class TestWordSumOracle:
    def test_reconstructs_reduced_moments(self):
        for n in range(1, 9):
            syk = rt_moment(n // 2) if n % 2 == 0 else MultiPoly.zero()
            assert mx.word_sum_moment(n) - syk == mo.reduced_moment(n)

    def test_cap(self):
        with pytest.raises(ValueError):
            mx.word_sum_moment(11)


class TestFreeSide:
    def test_noncrossing_counts_are_catalan(self):
        catalan = [1, 1, 2, 5, 14, 42]
        for n in range(6):
            assert mx.noncrossing_count(n) == catalan[n]

    def test_crossing_partition_excluded(self):
        parts = [sorted(tuple(b) for b in p)
                 for p in mx.noncrossing_partitions((1, 2, 3, 4))]
        assert [(1, 3), (2, 4)] not in parts
        assert len(parts) == 14

    def test_atom_cumulants(self):
        assert mx._free_cumulant_for_atom(1) == THETA
        for j in range(2, 7):
            assert mx._free_cumulant_for_atom(j).is_zero()

    def test_moments_reassemble(self):
        for n in (1, 2, 4, 6):
            assert mx.free_moment_d(n) == THETA ** n

    def test_cap(self):
        with pytest.raises(ValueError):
            mx.free_moment_d(13)
