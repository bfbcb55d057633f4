"""Tests for designs, responses, the cover relation and decision rules."""

import numpy as np
import pytest

from gthyp.core import (
    CompRule,
    DefectiveSet,
    Hypothesis,
    ResponseVector,
    SizeDistribution,
    TestMatrix,
    WeightRule,
    covered_columns,
    covers,
    decide,
    find_disjunct_violation,
    is_disjunctive_code,
    iter_subsets,
    pack_rows,
    response,
    subset_chunks,
    unpack_row,
)
from gthyp.errors import InputError, ParseError, ResourceError

SMALL_TEXT = "3 4\n1011\n1101\n0111\n"


@pytest.fixture
def small():
    """Columns 110, 011, 101, 111."""
    return TestMatrix.from_columns(["110", "011", "101", "111"])


def rv(bits: str) -> ResponseVector:
    return ResponseVector(np.array([int(b) for b in bits]))


class TestTestMatrix:
    def test_shape_and_columns(self, small):
        assert small.n_tests == 3
        assert small.n_items == 4
        assert str(small.column(3)) == "111"

    def test_rejects_non_binary(self):
        with pytest.raises(InputError):
            TestMatrix(np.array([[0, 2]]))

    def test_bits_read_only(self, small):
        with pytest.raises(ValueError):
            small.bits[0, 0] = 0

    def test_constant_weight(self, small):
        assert small.constant_weight() is None
        assert TestMatrix.identity(4).constant_weight() == 1

    def test_to_text(self, small):
        assert small.to_text() == SMALL_TEXT

    def test_from_text(self, small):
        assert TestMatrix.from_text(SMALL_TEXT) == small

    def test_from_text_without_final_newline(self, small):
        assert TestMatrix.from_text(SMALL_TEXT.rstrip("\n")) == small

    def test_bad_character_names_line(self):
        with pytest.raises(ParseError) as exc:
            TestMatrix.from_text("3 4\n1011\n1201\n0111\n", path="m.txt")
        assert exc.value.line == 3
        assert "m.txt:line 3" in str(exc.value)

    def test_trailing_whitespace_rejected(self):
        with pytest.raises(ParseError) as exc:
            TestMatrix.from_text("3 4\n1011 \n1101\n0111\n")
        assert exc.value.line == 2

    def test_bad_header(self):
        with pytest.raises(ParseError) as exc:
            TestMatrix.from_text("3  4\n1011\n1101\n0111\n")
        assert exc.value.line == 1

    def test_missing_rows(self):
        with pytest.raises(ParseError) as exc:
            TestMatrix.from_text("3 4\n1011\n")
        assert exc.value.line == 3

    def test_extra_rows(self):
        with pytest.raises(ParseError) as exc:
            TestMatrix.from_text(SMALL_TEXT + "1111\n")
        assert exc.value.line == 5

    def test_packing_spans_several_words(self):
        rng = np.random.default_rng(3)
        bits = rng.integers(0, 2, size=(2, 130), dtype=np.uint8)
        words = pack_rows(bits)
        assert words.shape == (2, 3)
        assert np.array_equal(unpack_row(words[1], 130), bits[1])


class TestResponse:
    def test_empty_set_gives_zero_vector(self, small):
        y = response(small, DefectiveSet())
        assert y.weight == 0
        assert str(y) == "000"

    def test_identity_pair(self):
        y = response(TestMatrix.identity(2), DefectiveSet.from_labels([1, 2]))
        assert str(y) == "11"

    def test_or_of_two_columns(self, small):
        y = response(small, DefectiveSet.from_labels([1, 2]))
        assert str(y) == "111"
        assert y.weight == 3

    def test_index_out_of_range(self, small):
        with pytest.raises(InputError):
            response(small, DefectiveSet((4,)))

    def test_union_is_or_of_responses(self):
        rng = np.random.default_rng(11)
        X = TestMatrix(rng.integers(0, 2, size=(9, 12), dtype=np.uint8))
        for _ in range(50):
            a = DefectiveSet(tuple(rng.choice(12, size=3, replace=False)))
            b = DefectiveSet(tuple(rng.choice(12, size=2, replace=False)))
            joint = response(X, a.union(b))
            assert np.array_equal(joint.bits, response(X, a).bits | response(X, b).bits)
            assert covers(joint, response(X, a))

    def test_defective_set_labels(self):
        S = DefectiveSet.from_labels([3, 1])
        assert S.members == (0, 2)
        assert S.labels() == (1, 3)

    def test_defective_set_rejects_repeats(self):
        with pytest.raises(InputError):
            DefectiveSet((1, 1))


class TestCovers:
    def test_subset_support(self):
        assert covers(rv("110"), rv("100"))

    def test_reflexive(self):
        assert covers(rv("101"), rv("101"))

    def test_disjoint(self):
        assert not covers(rv("01"), rv("10"))

    def test_length_mismatch(self):
        with pytest.raises(InputError):
            covers(rv("01"), rv("010"))

    def test_covered_columns_all_ones(self, small):
        assert covered_columns(small, rv("111")) == frozenset(range(4))

    def test_covered_columns_zero(self, small):
        assert covered_columns(small, rv("000")) == frozenset()

    def test_covered_columns_partial(self, small):
        assert covered_columns(small, rv("110")) == frozenset({0})


class TestDecide:
    def test_weight_rule_at_threshold(self, small):
        assert decide(WeightRule(2), small, rv("110")) is Hypothesis.H0

    def test_weight_rule_above_threshold(self, small):
        assert decide(WeightRule(2), small, rv("111")) is Hypothesis.H1

    def test_comp_zero_response(self, small):
        assert decide(CompRule(2), small, rv("000")) is Hypothesis.H0

    def test_comp_full_response(self, small):
        assert decide(CompRule(2), small, rv("111")) is Hypothesis.H1

    def test_weight_rule_ignores_positions(self):
        rng = np.random.default_rng(5)
        X = TestMatrix.identity(8)
        for _ in range(30):
            bits = rng.integers(0, 2, size=8)
            first = decide(WeightRule(3), X, ResponseVector(bits))
            assert decide(WeightRule(3), X, ResponseVector(rng.permutation(bits))) is first

    def test_threshold_from_tau(self):
        assert WeightRule.from_tau(0.2065, 14).threshold == 2

    def test_invalid_rules(self):
        with pytest.raises(InputError):
            WeightRule(-1)
        with pytest.raises(InputError):
            CompRule(0)


class TestDisjunctiveCode:
    def test_identity_is_disjunctive(self):
        X = TestMatrix.identity(8)
        for s in range(1, 8):
            assert is_disjunctive_code(X, s)

    def test_repeated_column(self):
        X = TestMatrix.from_columns(["10", "10", "01"])
        assert not is_disjunctive_code(X, 1)

    def test_small_matrix_witness(self, small):
        subset, column = find_disjunct_violation(small, 2)
        assert subset.members == (0, 1)
        assert column == 2
        assert not is_disjunctive_code(small, 2)

    def test_recovers_small_sets_exactly(self):
        X = TestMatrix.identity(10)
        rng = np.random.default_rng(2)
        for _ in range(40):
            S = DefectiveSet(tuple(rng.choice(10, size=rng.integers(0, 4), replace=False)))
            assert covered_columns(X, response(X, S)) == frozenset(S.members)

    def test_s_out_of_range(self, small):
        with pytest.raises(InputError):
            is_disjunctive_code(small, 4)

    def test_cap(self):
        with pytest.raises(ResourceError):
            is_disjunctive_code(TestMatrix.identity(30), 3, cap=1000)


class TestSubsets:
    def test_colex_order(self):
        assert list(iter_subsets(4, 2)) == [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3)]

    def test_chunks_cover_everything_in_order(self):
        chunks = list(subset_chunks(7, 3, chunk_size=4))
        flat = [tuple(row) for chunk in chunks for row in chunk]
        assert flat == list(iter_subsets(7, 3))
        assert all(len(chunk) <= 4 for chunk in chunks)

    def test_empty_subset(self):
        (chunk,) = list(subset_chunks(5, 0))
        assert chunk.shape == (1, 0)


class TestSizeDistribution:
    def test_worst_case(self):
        p = SizeDistribution.worst_case(2, 5)
        assert p.support() == [2, 3]

    def test_must_sum_to_one(self):
        with pytest.raises(InputError):
            SizeDistribution((0.5, 0.4))

    def test_no_negative_mass(self):
        with pytest.raises(InputError):
            SizeDistribution((1.5, -0.5))
