from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from audioactive.errors import BudgetExceeded, DegenerateInputError
from audioactive.rewrite import (
    ALPHABET,
    Run,
    RuleKind,
    RuleSpec,
    compress,
    decode_runs,
    encode_runs,
    expand,
    format_ratio_table,
    generate_sequence,
    length_ratios,
    render_count,
    say_chunks,
    say_step,
    step_length,
)

STUTTER = RuleSpec.stutter()
STANDARD = RuleSpec.standard()


@st.composite
def digit_strings(draw, min_size=0, max_size=60):
    base = draw(st.integers(2, 12))
    s = draw(st.text(alphabet=ALPHABET[:base], min_size=min_size, max_size=max_size))
    return base, s


@st.composite
def rules(draw, base):
    kind = draw(st.sampled_from(list(RuleKind)))
    j = draw(st.integers(1, 4)) if kind is RuleKind.JSTUTTER else None
    return RuleSpec(kind, base, j)


class TestRuleSpec:
    def test_j_only_for_jstutter(self):
        with pytest.raises(ValueError):
            RuleSpec(RuleKind.STANDARD, 10, 2)
        with pytest.raises(ValueError):
            RuleSpec(RuleKind.JSTUTTER, 10)

    @pytest.mark.parametrize("base", [1, 37])
    def test_base_range(self, base):
        with pytest.raises(ValueError):
            RuleSpec.stutter(base)

    def test_hashable_and_described(self):
        assert len({RuleSpec.jstutter(4), RuleSpec.jstutter(4)}) == 1
        assert RuleSpec.jstutter(4).describe() == "jstutter(j=4, base=10)"


class TestRuns:
    def test_exponent_example(self):
        assert encode_runs("3321112111") == [(3, 2), (2, 1), (1, 3), (2, 1), (1, 3)]

    def test_second_example(self):
        assert encode_runs("2222551") == [Run(2, 4), Run(5, 2), Run(1, 1)]

    def test_empty(self):
        assert encode_runs("") == []

    def test_long_run_count_is_exact(self):
        assert encode_runs("7" * 100_000) == [(7, 100_000)]

    @given(digit_strings())
    def test_round_trip_and_maximal(self, bs):
        _, s = bs
        runs = encode_runs(s)
        assert decode_runs(runs) == s
        assert all(a.digit != b.digit for a, b in zip(runs, runs[1:]))
        assert all(r.count >= 1 for r in runs)

    @given(digit_strings())
    def test_compress_round_trip(self, bs):
        assert expand(compress(bs[1])) == bs[1]

    def test_compress_notation(self):
        assert compress("3321112111") == "3^2 2 1^3 2 1^3"
        assert expand("9^{10}8^9 0") == "9" * 10 + "8" * 9 + "0"


class TestRenderCount:
    @pytest.mark.parametrize("n,base,out", [(10, 10, "10"), (3, 2, "11"), (1, 10, "1"), (35, 36, "z"), (12, 12, "10")])
    def test_examples(self, n, base, out):
        assert render_count(n, base) == out

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            render_count(0)

    @given(st.integers(1, 10**6), st.integers(2, 36))
    def test_round_trip(self, n, base):
        text = render_count(n, base)
        assert text[0] != "0"
        assert int(text, base) == n


class TestSayStep:
    def test_stutter_examples(self):
        assert say_step("222", STUTTER) == "3332"
        assert say_step("2222551", STUTTER) == "4444222511"

    def test_standard_examples(self):
        assert say_step("111", STANDARD) == "31"
        assert say_step("31", STANDARD) == "1311"

    def test_jstutter_example(self):
        assert say_step("111", RuleSpec.jstutter(2)) == "3311"

    def test_ten_ones_stutter(self):
        assert say_step("1" * 10, STUTTER) == "10" * 10 + "1"

    def test_ten_zeros_decay(self):
        # nine copies of 10 followed by 100
        assert say_step("0" * 10, STUTTER) == "10" * 9 + "100"

    def test_ten_ones_standard(self):
        assert generate_sequence("1" * 10, STANDARD, 4) == ["1" * 10, "101", "111011", "311021"]

    def test_binary(self):
        assert say_step("111", RuleSpec.stutter(2)) == "1111111"

    def test_empty_rejected(self):
        with pytest.raises(DegenerateInputError):
            say_step("", STUTTER)

    @given(st.data())
    def test_chunks_start_nonzero(self, data):
        base, s = data.draw(digit_strings(min_size=1))
        rule = data.draw(rules(base))
        chunks = say_chunks(s, rule)
        assert len(chunks) == len(encode_runs(s))
        assert all(c[0] != "0" for c in chunks)
        assert "".join(chunks) == say_step(s, rule)

    @given(st.data())
    def test_length_law(self, data):
        base, s = data.draw(digit_strings(min_size=1))
        rule = data.draw(rules(base))
        expected = 0
        for _, n in encode_runs(s):
            numeral = render_count(n, base)
            copies = n if rule.kind is RuleKind.STUTTER else (rule.j or 1)
            expected += copies * len(numeral) + rule.digit_copies()
        assert len(say_step(s, rule)) == expected == step_length(s, rule)

    @given(digit_strings(min_size=1))
    def test_j1_equals_standard(self, bs):
        base, s = bs
        assert say_step(s, RuleSpec.jstutter(1, base)) == say_step(s, RuleSpec.standard(base))

    @given(digit_strings(min_size=1), st.integers(2, 4))
    @settings(max_examples=50)
    def test_jstutter_shape(self, bs, j):
        base, s = bs
        rule = RuleSpec.jstutter(j, base)
        for (d, n), chunk in zip(encode_runs(s), say_chunks(s, rule)):
            assert chunk == render_count(n, base) * j + ALPHABET[d] * j


class TestSequences:
    def test_standard_111(self):
        assert generate_sequence("111", STANDARD, 6) == ["111", "31", "1311", "111321", "31131211", "132113111221"]

    def test_stutter_seed_0(self):
        assert generate_sequence("0", STUTTER, 6) == ["0", "10", "1110", "333110", "333322110", "4444322222110"]

    def test_standard_seed_0(self):
        assert generate_sequence("0", STANDARD, 6) == ["0", "10", "1110", "3110", "132110", "1113122110"]

    def test_stutter_seed_1(self):
        expected = ["1", "11", "221", "22211", "3332221", "3333333211", "7777777312221"]
        assert generate_sequence("1", STUTTER, 7) == expected

    @pytest.mark.parametrize("d", "23456789")
    def test_stutter_digit_seeds(self, d):
        expected = [x + d for x in ["", "1", "111", "33311", "33332211", "444432222211"]]
        assert generate_sequence(d, STUTTER, 6) == expected

    def test_ten_ones(self):
        seq = generate_sequence("1" * 10, STUTTER, 3)
        assert seq[1] == "101010101010101010101"
        assert seq[2] == expand("1^301^301^301^301^301^301^301^301^301^301^2")

    def test_one_term(self):
        assert generate_sequence("5", STUTTER, 1) == ["5"]

    def test_bad_digit(self):
        with pytest.raises(ValueError):
            generate_sequence("3", RuleSpec.stutter(3), 2)

    def test_budget(self):
        with pytest.raises(BudgetExceeded) as info:
            generate_sequence("0", STUTTER, 50, digit_limit=100)
        assert info.value.partial[:3] == ["0", "10", "1110"]
        assert max(map(len, info.value.partial)) <= 100


class TestRatios:
    def test_first_ratios(self):
        seq = generate_sequence("0", STUTTER, 6)
        assert length_ratios(seq) == [2, 2, Fraction(3, 2), Fraction(3, 2), Fraction(13, 9)]

    def test_constant(self):
        assert set(length_ratios(["22"] * 5)) == {1}

    def test_single_line(self):
        assert format_ratio_table(length_ratios(["0", "10"])) == "1 2\n"

    def test_needs_two_terms(self):
        with pytest.raises(ValueError):
            length_ratios(["0"])

    def test_ten_significant_digits(self):
        assert format_ratio_table([Fraction(2, 3)]) == "1 0.6666666667\n"
