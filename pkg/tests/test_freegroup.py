#!/usr/bin/env python3
"""
Tests for the free-group word arithmetic
"""

import os
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

# Add the parent directory to the path so we can import our module
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from library.errors import ParseError, ResourceLimitError
from library.freegroup import (
    LETTERS,
    Letter,
    Word,
    ball,
    ball_size,
    begins_with,
    inv,
    iter_ball,
    letter_schedule,
    mul,
    parse_word,
    parse_word_expression,
    power,
    render,
    sort_shortlex,
    words_to_json,
)

words = st.text(alphabet="aAbB", max_size=10).map(parse_word)


class TestParsing:
    """Reading and writing words"""

    def test_identity_literals(self):
        assert parse_word("") == Word()
        assert parse_word("e") == Word()
        assert render(Word()) == "e"

    def test_parse_reduces(self):
        assert parse_word("aA") == Word()
        assert parse_word("abBa") == Word("aa")
        assert parse_word("bAab") == Word("bb")

    def test_unknown_character_reports_position(self):
        with pytest.raises(ParseError) as excinfo:
            parse_word("abx")
        assert excinfo.value.position == 2

    @pytest.mark.parametrize("text, position", [("  abx", 4), ("\tab x ", 3), (" c", 1)])
    def test_position_counts_leading_whitespace(self, text, position):
        with pytest.raises(ParseError) as excinfo:
            parse_word(text)
        assert excinfo.value.position == position
        assert excinfo.value.text == text
        assert text[position] not in "aAbB"

    def test_padded_input_still_parses(self):
        assert parse_word("  aB \n") == Word("aB")
        assert parse_word(" e ") == Word()
        assert parse_word_expression("  a^2*B ") == Word("aaB")

    def test_expression_position_counts_leading_whitespace(self):
        with pytest.raises(ParseError) as excinfo:
            parse_word_expression("  a^")
        assert excinfo.value.position == 3

    def test_parse_error_is_value_error(self):
        with pytest.raises(ValueError):
            parse_word("c")

    def test_word_rejects_unreduced_text(self):
        with pytest.raises(ParseError):
            Word("abBa")

    def test_expression_powers(self):
        assert parse_word_expression("b^-1") == Word("B")
        assert parse_word_expression("a^3") == Word("aaa")
        assert parse_word_expression("a^2*B") == Word("aaB")
        assert parse_word_expression("a.b^-2") == Word("aBB")
        assert parse_word_expression("e") == Word()
        assert parse_word_expression("a^2*a^-2") == Word()

    def test_expression_rejects_garbage(self):
        with pytest.raises(ParseError):
            parse_word_expression("a^")

    @given(words)
    def test_render_parse_roundtrip(self, w):
        assert parse_word(render(w)) == w


class TestGroupLaws:
    """The free group axioms on reduced words"""

    def test_multiplication_cancels(self):
        assert mul(Word("ab"), Word("Ba")) == Word("aa")
        assert mul(Word("ab"), Word("BA")) == Word()

    def test_inverse(self):
        assert inv(Word("abA")) == Word("aBA")
        assert ~Word("a") == Word("A")

    def test_powers(self):
        assert Word("ab") ** 3 == Word("ababab")
        assert Word("ab") ** -1 == Word("BA")
        assert Word("ab") ** 0 == Word()
        assert power(Word("aB"), 2) == Word("aBaB")
        assert power(Word("aB"), -2) == Word("bAbA")

    @given(words, words, words)
    def test_associativity(self, u, v, w):
        assert (u * v) * w == u * (v * w)

    @given(words)
    def test_inverse_laws(self, w):
        assert w * w.inverse() == Word()
        assert w.inverse() * w == Word()
        assert w.inverse().inverse() == w

    @given(words)
    def test_identity_law(self, w):
        assert w * Word() == w
        assert Word() * w == w

    @given(words, words)
    def test_inverse_of_product(self, u, v):
        assert (u * v).inverse() == v.inverse() * u.inverse()

    @given(words)
    def test_factorizations_multiply_back(self, w):
        splits = list(w.factorizations())
        assert len(splits) == len(w) + 1
        for u, v in splits:
            assert u * v == w
            assert len(u) + len(v) == len(w)


class TestLetters:
    """Letters, schedule and shortlex order"""

    def test_letter_inverse(self):
        assert Letter.A.inverse is Letter.A_INV
        assert Letter.B_INV.inverse is Letter.B

    def test_schedule_period_four(self):
        assert [letter_schedule(n) for n in range(6)] == [
            Letter.A, Letter.A_INV, Letter.B, Letter.B_INV, Letter.A, Letter.A_INV,
        ]

    def test_schedule_rejects_negative(self):
        with pytest.raises(ValueError):
            letter_schedule(-1)

    def test_begins_with(self):
        assert begins_with(Word("ab"), Letter.A)
        assert not begins_with(Word("ab"), Letter.B)
        assert not begins_with(Word(), Letter.A)

    def test_shortlex_order(self):
        shuffled = [Word("b"), Word("aa"), Word(), Word("A"), Word("B"), Word("a")]
        assert words_to_json(shuffled) == ["e", "a", "A", "b", "B", "aa"]
        assert Word("a") < Word("A") < Word("b") < Word("B") < Word("aa")

    def test_letters_in_shortlex_order(self):
        assert [str(letter) for letter in LETTERS] == ["a", "A", "b", "B"]


class TestBalls:
    """Enumeration of Cayley balls"""

    @pytest.mark.parametrize("radius", range(6))
    def test_ball_size_closed_form(self, radius):
        assert len(ball(radius)) == ball_size(radius) == 2 * 3 ** radius - 1

    def test_iter_ball_is_shortlex_sorted(self):
        enumerated = list(iter_ball(3))
        assert enumerated == sort_shortlex(enumerated)
        assert len(set(enumerated)) == len(enumerated)

    def test_ball_radius_one(self):
        assert words_to_json(ball(1)) == ["e", "a", "A", "b", "B"]

    def test_cap_enforced(self):
        with pytest.raises(ResourceLimitError) as excinfo:
            list(iter_ball(5, cap=4))
        assert excinfo.value.cap == 4
        assert excinfo.value.requested == 5

    @settings(max_examples=50)
    @given(st.integers(min_value=0, max_value=4), words)
    def test_ball_membership_is_length(self, radius, w):
        assert (w in ball(radius)) == (len(w) <= radius)
