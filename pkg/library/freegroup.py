#!/usr/bin/env python3
"""
Cairn-Check: Free Group on Two Generators
Reduced words over {a, A, b, B} where uppercase is the inverse letter and
"e" is the identity. Words are immutable and hashable, ordered shortlex
(length first, then a < A < b < B).

Features:
- Group law with free reduction, inverses, powers
- The period-4 letter schedule a, A, b, B that drives the interval chain
- Cayley-ball enumeration in shortlex order
"""

import re
from dataclasses import dataclass
from enum import Enum
from functools import total_ordering
from typing import FrozenSet, Iterable, Iterator, List, Tuple

import structlog

from library.errors import ParseError, ResourceLimitError

logger = structlog.get_logger(__name__)

DEFAULT_BALL_CAP = 14
IDENTITY_LITERAL = "e"

_ALPHABET = re.compile(r"[aAbB]*")
_CANCELLING_PAIR = re.compile(r"aA|Aa|bB|Bb")
_EXPRESSION_TOKEN = re.compile(r"\s*([aAbBe])(?:\^(-?\d+))?\s*[*.]?")
_SHORTLEX = str.maketrans("aAbB", "0123")


class Letter(Enum):
    """Generators and their inverses; the value is the serialized character"""
    A = "a"
    A_INV = "A"
    B = "b"
    B_INV = "B"

    @property
    def inverse(self) -> "Letter":
        return Letter(self.value.swapcase())

    def __str__(self) -> str:
        return self.value


# Shortlex order of letters, also the order of the schedule
LETTERS: Tuple[Letter, ...] = (Letter.A, Letter.A_INV, Letter.B, Letter.B_INV)
GENERATORS: Tuple[Letter, ...] = (Letter.A, Letter.B)


@total_ordering
@dataclass(frozen=True)
class Word:
    """A reduced word; the empty text is the identity"""
    text: str = ""

    def __post_init__(self):
        if not _ALPHABET.fullmatch(self.text):
            bad = next(i for i, ch in enumerate(self.text) if ch not in "aAbB")
            raise ParseError("unknown letter", self.text, bad)
        match = _CANCELLING_PAIR.search(self.text)
        if match:
            raise ParseError("word is not reduced", self.text, match.start())

    @classmethod
    def identity(cls) -> "Word":
        return cls("")

    @classmethod
    def of(cls, letter: Letter) -> "Word":
        return cls(letter.value)

    @property
    def letters(self) -> Tuple[Letter, ...]:
        return tuple(Letter(ch) for ch in self.text)

    @property
    def is_identity(self) -> bool:
        return not self.text

    def __len__(self) -> int:
        return len(self.text)

    def __str__(self) -> str:
        return self.text or IDENTITY_LITERAL

    def __lt__(self, other: "Word") -> bool:
        if not isinstance(other, Word):
            return NotImplemented
        return self.shortlex_key() < other.shortlex_key()

    def shortlex_key(self) -> Tuple[int, str]:
        return len(self.text), self.text.translate(_SHORTLEX)

    def __mul__(self, other: "Word") -> "Word":
        if not isinstance(other, Word):
            return NotImplemented
        return Word(_reduce_concat(self.text, other.text))

    def inverse(self) -> "Word":
        return Word(self.text[::-1].swapcase())

    __invert__ = inverse

    def __pow__(self, k: int) -> "Word":
        if k < 0:
            return self.inverse() ** (-k)
        result, base = Word(), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def begins_with(self, letter: Letter) -> bool:
        return self.text[:1] == letter.value

    def factorizations(self) -> Iterator[Tuple["Word", "Word"]]:
        """Every split of the reduced word into a prefix and a suffix"""
        for i in range(len(self.text) + 1):
            yield Word(self.text[:i]), Word(self.text[i:])


def _reduce_concat(left: str, right: str) -> str:
    k = 0
    limit = min(len(left), len(right))
    while k < limit and left[-1 - k] == right[k].swapcase():
        k += 1
    return left[:len(left) - k] + right[k:]


def parse_word(text: str) -> Word:
    """Read a word over {a, A, b, B} left to right, cancelling as it goes"""
    if text.strip() in ("", IDENTITY_LITERAL):
        return Word()
    # Positions are reported against the text as given, surrounding blanks included
    start = len(text) - len(text.lstrip())
    stack: List[str] = []
    for position, ch in enumerate(text.rstrip()[start:], start):
        if ch not in "aAbB":
            raise ParseError("unknown character", text, position)
        if stack and stack[-1] == ch.swapcase():
            stack.pop()
        else:
            stack.append(ch)
    return Word("".join(stack))


def parse_word_expression(text: str) -> Word:
    """
    Read a word written with powers, e.g. "b^-1", "a^2*B" or "a.b^3".

    Each token is a letter (or e) with an optional integer exponent; tokens may
    be separated by "*" or ".".
    """
    end = len(text.rstrip())
    result = Word()
    position = len(text) - len(text.lstrip())
    while position < end:
        match = _EXPRESSION_TOKEN.match(text, position, end)
        if not match or match.end() == position:
            raise ParseError("unexpected character", text, position)
        letter, exponent = match.group(1), match.group(2)
        if letter != IDENTITY_LITERAL:
            result = result * Word(letter) ** (int(exponent) if exponent else 1)
        position = match.end()
    return result


def render(w: Word) -> str:
    return str(w)


def mul(u: Word, v: Word) -> Word:
    return u * v


def inv(u: Word) -> Word:
    return u.inverse()


def power(w: Word, k: int) -> Word:
    return w ** k


def begins_with(w: Word, letter: Letter) -> bool:
    return w.begins_with(letter)


def letter_schedule(n: int) -> Letter:
    """The letter used to grow I_n into I_{n+1}: a, A, b, B repeating"""
    if n < 0:
        raise ValueError(f"schedule index must be nonnegative, got {n}")
    return LETTERS[n % 4]


def ball_size(radius: int) -> int:
    """Closed form |ball(R)| = 2*3^R - 1"""
    return 2 * 3 ** radius - 1


def iter_ball(radius: int, cap: int = DEFAULT_BALL_CAP) -> Iterator[Word]:
    """Reduced words of length <= radius, yielded in shortlex order"""
    if radius < 0:
        raise ValueError(f"radius must be nonnegative, got {radius}")
    if radius > cap:
        raise ResourceLimitError("ball radius", radius, cap)
    level = [""]
    yield Word()
    for _ in range(radius):
        # Appending letters in shortlex order to a sorted level keeps it sorted
        level = [w + ch for w in level for ch in "aAbB" if not w or w[-1] != ch.swapcase()]
        for text in level:
            yield Word(text)


def ball(radius: int, cap: int = DEFAULT_BALL_CAP) -> FrozenSet[Word]:
    words = frozenset(iter_ball(radius, cap))
    logger.debug("Enumerated Cayley ball", radius=radius, size=len(words))
    return words


def sort_shortlex(words: Iterable[Word]) -> List[Word]:
    return sorted(words, key=Word.shortlex_key)


def words_to_json(words: Iterable[Word]) -> List[str]:
    return [str(w) for w in sort_shortlex(words)]
