"""End-to-end runs: chemistry, decay matrix, growth rate and its degree."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal

from .chemistry import Chemistry, Limits, build_decay_matrix, discover_elements, order_by_abundance
from .polycert import GrowthDegree, growth_degree
from .polynomial import IntPolynomial
from .rewrite import RuleSpec
from .spectral import EigenResult, SparseMatrix, abundances, char_poly, dominant_eigen
from .splitting import SplitPredicate

log = logging.getLogger(__name__)


@dataclass
class Analysis:
    chemistry: Chemistry
    matrix: SparseMatrix
    eigen: EigenResult
    abundance: list[float]
    charpoly: IntPolynomial | None = None
    growth: GrowthDegree | None = None

    @property
    def growth_rate(self) -> float:
        return self.eigen.value


def analyze(
    rule: RuleSpec,
    seed: str = "0",
    pred: SplitPredicate | None = None,
    limits: Limits = Limits(),
    exact: bool = True,
    workers: int | None = None,
    tol: float = 1e-13,
    prime_budget: int = 25,
) -> Analysis:
    """Discover, order by abundance and (with ``exact``) certify the degree of lambda."""
    chem = discover_elements(seed, rule, pred, limits)
    log.info("%s: %d common elements, %d exotic", rule.describe(), chem.n, len(chem.exotics))
    first = dominant_eigen(build_decay_matrix(chem), tol=tol)
    chem, ab = order_by_abundance(chem, abundances(first.vector))
    matrix = build_decay_matrix(chem)
    eigen = dominant_eigen(matrix, tol=tol)
    result = Analysis(chem, matrix, eigen, list(abundances(eigen.vector)))
    if exact:
        result.charpoly = char_poly(matrix, workers=workers)
        result.growth = growth_degree(result.charpoly, eigen.value, prime_budget)
    return result


def format_decimal(x: float, places: int = 10) -> str:
    """Round half-even to ``places`` fractional digits."""
    q = Decimal(1).scaleb(-places)
    return str(Decimal(repr(float(x))).quantize(q, rounding=ROUND_HALF_EVEN))


@dataclass
class SweepRow:
    label: str
    value: int
    elements: int
    growth_rate: float
    degree: int | None
    status: str

    def cells(self, places: int = 10) -> list[str]:
        degree = str(self.degree) if self.degree is not None else "Inconclusive"
        return [str(self.value), str(self.elements), format_decimal(self.growth_rate, places), degree]


def sweep(rules: list[tuple[int, RuleSpec]], label: str, seed: str = "0", **kwargs) -> list[SweepRow]:
    rows = []
    for value, rule in rules:
        a = analyze(rule, seed, **kwargs)
        g = a.growth
        rows.append(
            SweepRow(label, value, a.chemistry.n, a.growth_rate, g.degree if g else None, g.status.value if g else "")
        )
    return rows


def sweep_bases(bases, seed: str = "0", **kwargs) -> list[SweepRow]:
    return sweep([(b, RuleSpec.stutter(b)) for b in bases], "b", seed, **kwargs)


def sweep_j(js, base: int = 10, seed: str = "0", **kwargs) -> list[SweepRow]:
    return sweep([(j, RuleSpec.jstutter(j, base)) for j in js], "j", seed, **kwargs)


def format_sweep(rows: list[SweepRow], places: int = 10) -> str:
    if not rows:
        return ""
    lines = [f"{rows[0].label}\telements\tlambda\tdegree"]
    lines += ["\t".join(r.cells(places)) for r in rows]
    return "\n".join(lines) + "\n"
