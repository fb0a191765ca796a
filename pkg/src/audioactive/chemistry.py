"""Elements, decay closure and the derived chemistry of a rewriting rule."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components

from .errors import BudgetExceeded, DegenerateInputError
from .rewrite import RuleSpec, check_digits, say_step
from .spectral import SparseMatrix
from .splitting import SplitPredicate, default_predicate, split


@dataclass
class Element:
    id: int
    string: str
    decay: list[int]
    persistent: bool = True

    def __len__(self):
        return len(self.string)


@dataclass(frozen=True)
class Limits:
    max_elements: int = 5000
    max_length: int = 10**6
    max_iterations: int = 200


@dataclass
class Chemistry:
    """A closed set of elements under decay.

    ``elements`` are the common elements, with ids ``1..n``; the decay matrix
    is indexed by them.  ``exotics`` (ids ``n+1..``) are reachable from the
    seed but not from the dominant part of the decay graph: transients,
    terminal-only elements such as isotopes, and their cycles.
    """

    rule: RuleSpec
    predicate: str
    seed: str
    elements: list[Element]
    exotics: list[Element] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.elements)

    def all_elements(self) -> list[Element]:
        return self.elements + self.exotics

    def element(self, ident: int) -> Element:
        return self.all_elements()[ident - 1]

    def by_string(self) -> dict[str, Element]:
        return {e.string: e for e in self.all_elements()}

    def common_strings(self) -> set[str]:
        return {e.string for e in self.elements}

    def decay_strings(self, e: Element) -> list[str]:
        return [self.element(i).string for i in e.decay]


def decay_of(s: str, rule: RuleSpec, pred: SplitPredicate | None = None) -> list[str]:
    """Split the rewrite of ``s`` into elements."""
    return split(say_step(s, rule), pred or default_predicate(rule))


def _closure(start: Sequence[str], rule: RuleSpec, pred: SplitPredicate, limits: Limits) -> dict[str, list[str]]:
    decays: dict[str, list[str] | None] = dict.fromkeys(start)
    frontier = list(decays)
    for _ in range(limits.max_iterations):
        if not frontier:
            return decays
        nxt = []
        for s in frontier:
            d = decay_of(s, rule, pred)
            decays[s] = d
            for c in d:
                if c in decays:
                    continue
                if len(c) > limits.max_length:
                    raise BudgetExceeded(f"element of length {len(c)} exceeds {limits.max_length}", partial=decays)
                if len(decays) >= limits.max_elements:
                    raise BudgetExceeded(f"more than {limits.max_elements} elements", partial=decays)
                decays[c] = None
                nxt.append(c)
        frontier = nxt
    if frontier:
        raise BudgetExceeded(f"closure did not finish in {limits.max_iterations} rounds", partial=decays)
    return decays


def _spectral_radius(block: np.ndarray) -> float:
    if block.shape[0] == 1:
        return float(block[0, 0])
    return float(np.abs(np.linalg.eigvals(block)).max())


def classify(strings: Sequence[str], decays: dict[str, list[str]]) -> tuple[list[bool], list[bool]]:
    """Return ``(common, persistent)`` flags for each string.

    Persistent: reachable from a cycle of the decay graph.  Common: reachable
    from a strongly connected component of maximal spectral radius.
    """
    index = {s: k for k, s in enumerate(strings)}
    n = len(strings)
    counts = Counter((index[s], index[c]) for s in strings for c in decays[s])
    rows, cols = zip(*counts) if counts else ((), ())
    vals = [counts[k] for k in counts]
    graph = csr_matrix((np.array(vals, dtype=float), (rows, cols)), shape=(n, n))
    ncomp, labels = connected_components(graph, directed=True, connection="strong")
    members: dict[int, list[int]] = {}
    for k, lab in enumerate(labels):
        members.setdefault(lab, []).append(k)

    dense = graph.toarray()
    radius = {}
    for lab, idx in members.items():
        if len(idx) > 1 or dense[idx[0], idx[0]]:
            radius[lab] = _spectral_radius(dense[np.ix_(idx, idx)].T)
    if not radius:
        return [False] * n, [False] * n
    top = max(radius.values())
    dominant = [lab for lab, r in radius.items() if r >= top * (1 - 1e-9)]

    def reach(labs):
        seen = np.zeros(n, dtype=bool)
        for lab in labs:
            start = members[lab][0]
            if not seen[start]:
                seen[breadth_first_order(graph, start, directed=True, return_predecessors=False)] = True
        return seen

    return list(reach(dominant)), list(reach(radius))


def discover_elements(
    seed: str, rule: RuleSpec, pred: SplitPredicate | None = None, limits: Limits = Limits()
) -> Chemistry:
    """Close the elements of the first descendant of ``seed`` under decay."""
    if not seed:
        raise DegenerateInputError("empty seed")
    check_digits(seed, rule.base)
    pred = pred or default_predicate(rule)
    start = list(dict.fromkeys(split(say_step(seed, rule), pred)))
    decays = _closure(start, rule, pred, limits)
    strings = list(decays)
    common, persistent = classify(strings, decays)
    ordered = [s for s, c in zip(strings, common) if c] + [s for s, c in zip(strings, common) if not c]
    ids = {s: k + 1 for k, s in enumerate(ordered)}
    flag = {s: bool(f) for s, f in zip(strings, persistent)}
    made = [Element(ids[s], s, [ids[c] for c in decays[s]], flag[s]) for s in ordered]
    ncommon = sum(common)
    return Chemistry(rule, pred.name, seed, made[:ncommon], made[ncommon:])


def build_decay_matrix(chem: Chemistry) -> SparseMatrix:
    """``D[i][j]`` = number of times element ``i+1`` occurs in the decay of ``j+1``."""
    n = chem.n
    cols = []
    for e in chem.elements:
        col = Counter(i - 1 for i in e.decay)
        if any(i >= n for i in col):
            raise ValueError(f"element {e.id} decays outside the common set")
        cols.append(dict(col))
    return SparseMatrix(n, cols)


def relabel(chem: Chemistry, order: Sequence[int]) -> Chemistry:
    """Renumber common elements so that ``order[k]`` (an old id) becomes ``k+1``."""
    n = chem.n
    if sorted(order) != list(range(1, n + 1)):
        raise ValueError("order must be a permutation of the common ids")
    new_id = {old: k + 1 for k, old in enumerate(order)}
    for e in chem.exotics:
        new_id[e.id] = e.id
    elements = [chem.element(old) for old in order]
    remap = lambda e, i: replace(e, id=i, decay=[new_id[d] for d in e.decay])  # noqa: E731
    return Chemistry(
        chem.rule,
        chem.predicate,
        chem.seed,
        [remap(e, k + 1) for k, e in enumerate(elements)],
        [remap(e, e.id) for e in chem.exotics],
    )


def abundance_order(chem: Chemistry, abundance: Sequence[float], digits: int = 10) -> list[int]:
    """Old ids sorted by decreasing abundance, then length, then string.

    Abundances are compared after rounding to ``digits`` decimals (in percent)
    so that mathematically equal values tie regardless of floating noise.
    """
    if len(abundance) != chem.n:
        raise ValueError("one abundance per common element is required")
    key = lambda e: (-round(float(abundance[e.id - 1]), digits), len(e.string), e.string)  # noqa: E731
    return [e.id for e in sorted(chem.elements, key=key)]


def order_by_abundance(chem: Chemistry, abundance: Sequence[float], digits: int = 10) -> tuple[Chemistry, list[float]]:
    """Relabel by abundance; returns the new chemistry and the permuted abundances."""
    order = abundance_order(chem, abundance, digits)
    return relabel(chem, order), [float(abundance[i - 1]) for i in order]


# --- periodic table notation --------------------------------------------

_POWER = re.compile(r"\^\{?(\d+)\}?")

_SYMBOL = re.compile(r"([a-z])(?:_\{?(\d+)\}?)?")

# extra abbreviations used by the published base-10 stutter table
TABLE_MACROS = {"h": "e_{532}f_{359}^{16}f_{%d}", "k": "f_{237}f_{133}f_{152}"}


def parse_decay(expr: str, macros: dict[str, str] | None = None) -> list[int]:
    """Expand periodic-table notation to a list of element ids.

    ``f_i = e_1^9 e_i`` and ``g_i = e_1^10 e_i``; further abbreviations are
    given in ``macros`` as templates, ``{"k": "f_{237}f_{133}f_{152}"}`` or
    ``{"h": "e_{532}f_{359}^{16}f_{%d}"}`` (``%d`` takes the subscript).
    """
    macros = macros or {}
    out: list[int] = []
    pos = 0
    expr = expr.replace(" ", "")
    while pos < len(expr):
        m = _SYMBOL.match(expr, pos)
        if not m:
            raise ValueError(f"cannot parse decay expression at {expr[pos:]!r}")
        letter, sub = m.group(1), m.group(2)
        pos = m.end()
        power = 1
        pm = _POWER.match(expr, pos)
        if pm:
            power, pos = int(pm.group(1)), pm.end()
        if letter == "e":
            atom = [int(sub)]
        elif letter == "f":
            atom = [1] * 9 + [int(sub)]
        elif letter == "g":
            atom = [1] * 10 + [int(sub)]
        elif letter in macros:
            template = macros[letter]
            atom = parse_decay(template % int(sub) if sub else template, macros)
        else:
            raise ValueError(f"unknown symbol {letter!r}")
        out.extend(atom * power)
    return out


def _atoms(ids: Sequence[int]) -> list[tuple[str, int | None]]:
    """Group a decay list into ``e``/``f``/``g`` atoms."""
    atoms, k = [], 0
    while k < len(ids):
        if ids[k] == 1:
            r = k
            while r < len(ids) and ids[r] == 1:
                r += 1
            ones = r - k
            if r < len(ids) and ones in (9, 10):
                atoms.append(("f" if ones == 9 else "g", ids[r]))
                k = r + 1
                continue
            atoms.extend([("e", 1)] * ones)
            k = r
        else:
            atoms.append(("e", ids[k]))
            k += 1
    return atoms


def render_decay(ids: Sequence[int], abbreviate: bool = True, macros: dict[str, str] | None = None) -> str:
    """Compact periodic-table notation, e.g. ``e_{366}f_{26}^{175}f_{365}f_{293}``.

    Repeated atoms get exponents.  With ``macros`` (same format as in
    :func:`parse_decay`), atom sequences matching a macro are replaced by it,
    longest macro first.
    """
    atoms = _atoms(ids) if abbreviate else [("e", i) for i in ids]
    if macros:
        atoms = _apply_macros(atoms, macros)
    parts, k = [], 0
    while k < len(atoms):
        r = k
        while r < len(atoms) and atoms[r] == atoms[k]:
            r += 1
        letter, sub = atoms[k]
        text = letter if sub is None else f"{letter}_{{{sub}}}"
        if r - k > 1:
            text += f"^{{{r - k}}}"
        parts.append(text)
        k = r
    return "".join(parts)


def _apply_macros(atoms, macros):
    patterns = []
    for name, template in macros.items():
        if "%d" in template:
            head = _atoms(parse_decay(template.replace("%d", "999999"), macros={}))[:-1]
            patterns.append((len(head) + 1, name, head, True))
        else:
            body = _atoms(parse_decay(template, macros={}))
            patterns.append((len(body), name, body, False))
    patterns.sort(key=lambda t: -t[0])
    out, k = [], 0
    while k < len(atoms):
        for size, name, body, indexed in patterns:
            if indexed:
                tail = atoms[k + len(body)] if k + len(body) < len(atoms) else None
                if atoms[k : k + len(body)] == body and tail is not None and tail[0] == "f":
                    out.append((name, tail[1]))
                    k += size
                    break
            elif atoms[k : k + size] == body:
                out.append((name, None))
                k += size
                break
        else:
            out.append(atoms[k])
            k += 1
    return out


@dataclass
class TableRow:
    index: int
    length: int
    string: str
    decay: str
    abundance: float | None


def periodic_table(
    chem: Chemistry,
    abundance: Sequence[float] | None = None,
    abbreviate: bool = True,
    macros: dict[str, str] | None = None,
) -> list[TableRow]:
    return [
        TableRow(
            e.id,
            len(e.string),
            e.string,
            render_decay(e.decay, abbreviate, macros),
            None if abundance is None else float(abundance[e.id - 1]),
        )
        for e in chem.elements
    ]


# --- following whole sequences through their elements ---------------------


class DecayCache:
    """Memoised decays of element strings for one rule and predicate."""

    def __init__(self, rule: RuleSpec, pred: SplitPredicate | None = None):
        self.rule = rule
        self.pred = pred or default_predicate(rule)
        self._cache: dict[str, tuple[str, ...]] = {}

    def __call__(self, s: str) -> tuple[str, ...]:
        d = self._cache.get(s)
        if d is None:
            d = self._cache[s] = tuple(decay_of(s, self.rule, self.pred))
        return d

    def split(self, s: str) -> list[str]:
        return split(s, self.pred)


def census_sequence(seed: str, rule: RuleSpec, terms: int, pred: SplitPredicate | None = None, cache=None):
    """Yield ``(n, census)`` for ``n = 0..terms-1``; census counts the elements of S_n."""
    if not seed:
        raise DegenerateInputError("empty seed")
    cache = cache or DecayCache(rule, pred)
    census = Counter(cache.split(seed))
    for n in range(terms):
        yield n, census
        nxt: Counter = Counter()
        for s, c in census.items():
            for chunk in cache(s):
                nxt[chunk] += c
        census = nxt


def sequence_lengths(seed: str, rule: RuleSpec, terms: int, pred: SplitPredicate | None = None) -> list[int]:
    """Exact digit counts of the first ``terms`` terms, without building them."""
    return [sum(len(s) * c for s, c in census.items()) for _, census in census_sequence(seed, rule, terms, pred)]


@dataclass
class TailReport:
    seed: str
    preperiod: int
    cycle: list[str]
    cycle_ids: list[int | None]
    trail: list[str]
    exotic: list[str]

    @property
    def cycle_length(self) -> int:
        return len(self.cycle)


def terminal_elements(seed: str, rule: RuleSpec, max_terms: int, pred=None, cache=None) -> Iterable[str]:
    """Last element of each term.  The last element of S_{n+1} is the last
    element of the decay of the last element of S_n, so only that chunk is
    followed."""
    cache = cache or DecayCache(rule, pred)
    last = cache.split(seed)[-1]
    for _ in range(max_terms):
        yield last
        last = cache(last)[-1]


def tail_analysis(
    seed: str, rule: RuleSpec, pred=None, max_terms: int = 1000, chem: Chemistry | None = None
) -> TailReport:
    """Find the eventual cycle of terminal elements by first-repeat detection."""
    if max_terms < 1:
        raise ValueError("max_terms must be >= 1")
    if not seed:
        raise DegenerateInputError("empty seed")
    seen: dict[str, int] = {}
    trail: list[str] = []
    for n, last in enumerate(terminal_elements(seed, rule, max_terms, pred)):
        if last in seen:
            start = seen[last]
            cycle = trail[start:]
            lookup = chem.by_string() if chem else {}
            common = chem.common_strings() if chem else set()
            exotic = list(dict.fromkeys(s for s in trail if chem and s not in common))
            return TailReport(
                seed, start, cycle, [lookup[s].id if s in lookup else None for s in cycle], trail, exotic
            )
        seen[last] = n
        trail.append(last)
    raise BudgetExceeded(f"no terminal cycle within {max_terms} terms", partial=trail)


def known_exotics(rule: RuleSpec, pred=None, max_terms: int = 1000) -> set[str]:
    """Terminal cycle elements of the single-digit seeds."""
    from .rewrite import ALPHABET

    out: set[str] = set()
    for d in ALPHABET[: rule.base]:
        out.update(tail_analysis(d, rule, pred, max_terms).cycle)
    return out


@dataclass
class AuditReport:
    seed: str
    terms: int
    conformant_from: int | None
    first_split_term: int | None
    violations: dict[str, int]
    final_exotics: list[str]

    @property
    def conformant(self) -> bool:
        return self.conformant_from is not None


def audit_seed(
    seed: str,
    rule: RuleSpec,
    common: set[str],
    extra: set[str] = frozenset(),
    max_terms: int = 60,
    pred=None,
    cache=None,
) -> AuditReport:
    """Check whether every element of late terms lies in ``common | extra``.

    ``conformant_from`` is the first index from which all inspected terms
    conform; ``violations`` counts, per offending string, the terms after the
    last conforming stretch began that contained it.
    """
    allowed = set(common) | set(extra)
    conformant_from = None
    first_split = None
    violations: Counter = Counter()
    last_census: Counter = Counter()
    for n, census in census_sequence(seed, rule, max_terms, pred, cache):
        if first_split is None and sum(census.values()) > 1:
            first_split = n
        bad = [s for s in census if s not in allowed]
        if bad:
            conformant_from = None
            violations.update(bad)
        elif conformant_from is None:
            conformant_from = n
        last_census = census
    exotics = sorted((s for s in last_census if s not in common), key=len)
    return AuditReport(seed, max_terms, conformant_from, first_split, dict(violations), exotics)
