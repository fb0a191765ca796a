"""Splitting strings into elements.

A cut between ``s[i]`` and ``s[i+1]`` is safe whenever the left part ends in
``0`` and the right part starts with a nonzero digit: the left descendant keeps
its trailing zero and the right descendant always begins with the leading
digit of a numeral, so the two halves never merge into a common run.

The j-rules need finer cuts to give a finite chemistry; see
:class:`LookaheadSplit`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

from .errors import DegenerateInputError
from .rewrite import RuleKind, RuleSpec, say_chunks, say_step


@dataclass(frozen=True)
class SplitPredicate:
    """A cut rule: ``decides(s, i)`` says whether ``s`` splits after index ``i``.

    ``cuts`` (optional) returns every cut position of a whole string at once;
    when given, :func:`split` uses it instead of probing positions one by one.
    """

    name: str
    decides: Callable[[str, int], bool]
    cuts: Callable[[str], list[int]] | None = None
    compatible: frozenset = frozenset({"standard", "stutter", "jstutter"})

    def __call__(self, s: str, i: int) -> bool:
        return self.decides(s, i)


def split_after_zero(s: str, i: int) -> bool:
    """True iff ``s[i] == '0'`` and ``s[i+1] != '0'``."""
    if not 0 <= i < len(s) - 1:
        raise IndexError(f"cut index {i} out of range for a string of length {len(s)}")
    return s[i] == "0" and s[i + 1] != "0"


_ZERO_CUT = re.compile(r"(?<=0)(?=[^0])")

AFTER_ZERO = SplitPredicate(
    "after-zero", split_after_zero, cuts=lambda s: [m.start() for m in _ZERO_CUT.finditer(s)]
)


def leading_digits(s: str, rule: RuleSpec, horizon: int = 30, window: int = 64) -> set[str] | None:
    """First digits of ``s, s_1, ..., s_{horizon-1}``.

    Only a prefix of at most ``window`` digits is simulated.  Returns ``None``
    if the prefix is used up before ``horizon`` generations.
    """
    head, cut = s[:window], len(s) > window
    seen = set()
    for _ in range(horizon):
        if not head:
            return None
        seen.add(head[0])
        head, cut = _advance_head(head, cut, rule, window)
    return seen


@dataclass(frozen=True)
class LookaheadSplit:
    """Cut after ``s[i]`` when no descendant of ``s[i+1:]`` starts with ``s[i]``.

    Every rule here ends the rewrite of ``L`` with ``L``'s last digit, so the
    halves of ``LR`` stay separate exactly as long as the right part's leading
    digit avoids that digit.  The leading digits are followed for ``horizon``
    generations.  Cuts are found right to left so each right part is examined
    only up to the next cut, which makes splitting idempotent.
    """

    rule: RuleSpec
    horizon: int = 30
    window: int = 64

    def decides(self, s: str, i: int) -> bool:
        if not 0 <= i < len(s) - 1:
            raise IndexError(f"cut index {i} out of range for a string of length {len(s)}")
        return i + 1 in self.cuts(s)

    def cuts(self, s: str) -> list[int]:
        found, end = [], len(s)
        for i in range(len(s) - 2, -1, -1):
            a = s[i]
            if a == s[i + 1]:
                continue
            lead = leading_digits(s[i + 1 : end], self.rule, self.horizon, self.window)
            if lead is not None and a not in lead:
                found.append(i + 1)
                end = i + 1
        return found[::-1]

    def predicate(self) -> SplitPredicate:
        return SplitPredicate(
            f"lookahead(h={self.horizon})",
            self.decides,
            cuts=self.cuts,
            compatible=frozenset({self.rule.kind.value}),
        )


def default_predicate(rule: RuleSpec) -> SplitPredicate:
    """After-zero cuts for the stutter rule, lookahead cuts otherwise."""
    if rule.kind is RuleKind.STUTTER:
        return AFTER_ZERO
    return LookaheadSplit(rule).predicate()


def split(s: str, pred: SplitPredicate = AFTER_ZERO) -> list[str]:
    """Cut ``s`` at every position accepted by ``pred``."""
    if not s:
        raise DegenerateInputError("cannot split the empty string")
    if pred.cuts is not None:
        cuts = pred.cuts(s)
    else:
        cuts = [i + 1 for i in range(len(s) - 1) if pred(s, i)]
    bounds = [0, *cuts, len(s)]
    return [s[a:b] for a, b in zip(bounds, bounds[1:])]


def is_element(s: str, pred: SplitPredicate = AFTER_ZERO) -> bool:
    return len(split(s, pred)) == 1


def verify_split_empirically(
    left: str, right: str, rule: RuleSpec, depth: int = 15, window: int = 32, full: bool = False
) -> bool:
    """Check ``(LR)_n == L_n R_n`` for ``n = 1..depth`` by simulation.

    Every rule here rewrites each maximal run independently, so
    ``say(L_k R_k) == say(L_k) say(R_k)`` exactly when the last run of ``L_k``
    and the first run of ``R_k`` do not merge.  The default mode therefore only
    simulates a suffix of ``L`` and a prefix of ``R`` (``window`` digits each,
    enlarged whenever a window runs dry) and falls back to whole-string
    simulation when the boundary digits coincide.  ``full=True`` always
    simulates the whole strings.
    """
    if not left or not right:
        raise DegenerateInputError("both halves of a split must be nonempty")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if full:
        return _verify_full(left, right, rule, depth)
    while True:
        verdict = _verify_windowed(left, right, rule, depth, window)
        if verdict is not None:
            return verdict
        if window >= max(len(left), len(right)):
            return _verify_full(left, right, rule, depth)
        window *= 4


def _verify_windowed(left: str, right: str, rule: RuleSpec, depth: int, window: int) -> bool | None:
    """``None`` when a window is used up before ``depth`` generations."""
    tail, tail_cut = left[-window:], len(left) > window
    head, head_cut = right[:window], len(right) > window
    for _ in range(depth):
        if not tail or not head:
            return None
        if tail[-1] == head[0]:
            return _verify_full(left, right, rule, depth)
        tail, tail_cut = _advance_tail(tail, tail_cut, rule, window)
        head, head_cut = _advance_head(head, head_cut, rule, window)
    return True


def _advance_head(head: str, cut: bool, rule: RuleSpec, window: int) -> tuple[str, bool]:
    chunks = say_chunks(head, rule)
    if cut:
        # the last run of a truncated prefix may continue past the window
        chunks = chunks[:-1]
    out = "".join(chunks)
    return out[:window], cut or len(out) > window


def _advance_tail(tail: str, cut: bool, rule: RuleSpec, window: int) -> tuple[str, bool]:
    chunks = say_chunks(tail, rule)
    if cut:
        chunks = chunks[1:]
    out = "".join(chunks)
    return out[-window:] if out else out, cut or len(out) > window


def _verify_full(left: str, right: str, rule: RuleSpec, depth: int) -> bool:
    whole, a, b = left + right, left, right
    for _ in range(depth):
        whole, a, b = say_step(whole, rule), say_step(a, rule), say_step(b, rule)
        if whole != a + b:
            return False
    return True
