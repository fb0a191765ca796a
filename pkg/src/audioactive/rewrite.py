"""Run-length encoding and the say-what-you-see rewriting rules.

Digit strings are plain ``str`` objects using the characters ``0-9a-z``
(digit value = position in :data:`ALPHABET`).  All functions here are pure.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

from .errors import BudgetExceeded, DegenerateInputError

ALPHABET = "0123456789abcdefghijklmnopqrstuvwxyz"
MAX_BASE = len(ALPHABET)
DEFAULT_DIGIT_LIMIT = 10**8

_RUN_RE = re.compile(r"(.)\1*", re.DOTALL)


class RuleKind(str, Enum):
    STANDARD = "standard"
    STUTTER = "stutter"
    JSTUTTER = "jstutter"


@dataclass(frozen=True)
class RuleSpec:
    """Which rewriting rule is applied to a run ``d^n``, and in which base.

    * standard: ``d^n -> n d``
    * stutter:  ``d^n -> n^n d``
    * jstutter: ``d^n -> n^j d^j``
    """

    kind: RuleKind = RuleKind.STUTTER
    base: int = 10
    j: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", RuleKind(self.kind))
        if not 2 <= self.base <= MAX_BASE:
            raise ValueError(f"base must be in [2, {MAX_BASE}], got {self.base}")
        if self.kind is RuleKind.JSTUTTER:
            if self.j is None or self.j < 1:
                raise ValueError("jstutter rule needs j >= 1")
        elif self.j is not None:
            raise ValueError(f"j is only meaningful for the jstutter rule, not {self.kind.value}")

    @classmethod
    def standard(cls, base: int = 10) -> "RuleSpec":
        return cls(RuleKind.STANDARD, base)

    @classmethod
    def stutter(cls, base: int = 10) -> "RuleSpec":
        return cls(RuleKind.STUTTER, base)

    @classmethod
    def jstutter(cls, j: int, base: int = 10) -> "RuleSpec":
        return cls(RuleKind.JSTUTTER, base, j)

    def count_copies(self, n: int) -> int:
        """How many times the numeral of a run length ``n`` is written."""
        if self.kind is RuleKind.STUTTER:
            return n
        if self.kind is RuleKind.JSTUTTER:
            return self.j
        return 1

    def digit_copies(self) -> int:
        return self.j if self.kind is RuleKind.JSTUTTER else 1

    def describe(self) -> str:
        if self.kind is RuleKind.JSTUTTER:
            return f"jstutter(j={self.j}, base={self.base})"
        return f"{self.kind.value}(base={self.base})"


class Run(NamedTuple):
    digit: int
    count: int


def check_digits(s: str, base: int) -> None:
    """Raise ``ValueError`` if ``s`` uses a character outside base ``base``."""
    allowed = ALPHABET[:base]
    bad = set(s) - set(allowed)
    if bad:
        raise ValueError(f"digits {sorted(bad)} are not valid in base {base}")


def encode_runs(s: str) -> list[Run]:
    """Maximal runs of ``s`` as ``(digit, count)`` pairs."""
    return [Run(ALPHABET.index(m.group(1)), m.end() - m.start()) for m in _RUN_RE.finditer(s)]


def decode_runs(runs: Iterable[Run]) -> str:
    return "".join(ALPHABET[d] * n for d, n in runs)


@lru_cache(maxsize=4096)
def render_count(n: int, base: int = 10) -> str:
    """Positional base-``base`` numeral of the positive integer ``n``."""
    if n < 1:
        raise ValueError(f"run counts are positive, got {n}")
    if base == 10:
        return str(n)
    out = []
    while n:
        n, r = divmod(n, base)
        out.append(ALPHABET[r])
    return "".join(reversed(out))


def _chunk(digit: str, n: int, rule: RuleSpec) -> str:
    return render_count(n, rule.base) * rule.count_copies(n) + digit * rule.digit_copies()


# memoised chunks of short runs, per rule
_CHUNK_TABLES: dict[RuleSpec, dict[str, str]] = {}
_CACHED_RUN = 512


def say_chunks(s: str, rule: RuleSpec) -> list[str]:
    """Output of ``say_step`` cut at run boundaries, one chunk per input run."""
    if not s:
        raise DegenerateInputError("cannot rewrite the empty string")
    table = _CHUNK_TABLES.setdefault(rule, {})
    out = []
    for m in _RUN_RE.finditer(s):
        run = m.group()
        c = table.get(run)
        if c is None:
            c = _chunk(run[0], len(run), rule)
            if len(run) <= _CACHED_RUN:
                table[run] = c
        out.append(c)
    return out


def say_step(s: str, rule: RuleSpec) -> str:
    """Apply the rule once to every maximal run of ``s``."""
    return "".join(say_chunks(s, rule))


def step_length(s: str, rule: RuleSpec) -> int:
    """Length of ``say_step(s, rule)`` computed from the runs alone."""
    total = 0
    for _, n in encode_runs(s):
        total += rule.count_copies(n) * len(render_count(n, rule.base)) + rule.digit_copies()
    return total


def generate_sequence(
    seed: str, rule: RuleSpec, terms: int, digit_limit: int = DEFAULT_DIGIT_LIMIT
) -> list[str]:
    """The first ``terms`` terms of the sequence starting at ``seed``.

    Raises :class:`BudgetExceeded` (carrying the terms produced so far) when a
    term would exceed ``digit_limit`` digits.
    """
    if terms < 1:
        raise ValueError("terms must be >= 1")
    if not seed:
        raise DegenerateInputError("empty seed")
    check_digits(seed, rule.base)
    seq = [seed]
    while len(seq) < terms:
        if step_length(seq[-1], rule) > digit_limit:
            raise BudgetExceeded(f"term {len(seq)} exceeds {digit_limit} digits", partial=seq)
        seq.append(say_step(seq[-1], rule))
    return seq


def length_ratios(seq: Sequence[str]) -> list[Fraction]:
    """Exact ratios ``len(seq[k+1]) / len(seq[k])``."""
    return ratios_from_lengths([len(t) for t in seq])


def ratios_from_lengths(lengths: Sequence[int]) -> list[Fraction]:
    if len(lengths) < 2:
        raise ValueError("need at least two terms to form a ratio")
    if any(n == 0 for n in lengths):
        raise DegenerateInputError("empty term in sequence")
    return [Fraction(b, a) for a, b in zip(lengths, lengths[1:])]


def format_ratio_table(ratios: Sequence[Fraction]) -> str:
    """Two-column ``index ratio`` text, index starting at 1."""
    return "".join(f"{k} {float(r):.10g}\n" for k, r in enumerate(ratios, start=1))


def compress(s: str) -> str:
    """Exponent notation, e.g. ``3321112111 -> 3^2 2 1^3 2 1^3``.

    Exponents above 9 are braced (``9^{10}``) so the text parses unambiguously.
    """
    parts = []
    for d, n in encode_runs(s):
        if n == 1:
            parts.append(ALPHABET[d])
        else:
            parts.append(f"{ALPHABET[d]}^{n}" if n < 10 else f"{ALPHABET[d]}^{{{n}}}")
    return " ".join(parts)


_EXPONENT_RE = re.compile(r"([0-9a-z])(?:\^(?:\{(\d+)\}|(\d)))?")


def expand(text: str) -> str:
    """Inverse of :func:`compress`.

    Whitespace is ignored and an unbraced exponent is a single digit, so
    ``1^301^3`` reads as ``1^3 0 1^3``.
    """
    out = []
    for d, braced, single in _EXPONENT_RE.findall("".join(text.split())):
        out.append(d * int(braced or single or 1))
    return "".join(out)
