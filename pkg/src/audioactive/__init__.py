"""Look-and-say rewriting, its chemistry of elements, and exact growth rates."""

from .chemistry import (
    Chemistry,
    Element,
    Limits,
    audit_seed,
    build_decay_matrix,
    decay_of,
    discover_elements,
    order_by_abundance,
    parse_decay,
    periodic_table,
    render_decay,
    sequence_lengths,
    tail_analysis,
)
from .errors import (
    AudioactiveError,
    BudgetExceeded,
    ConvergenceError,
    DegenerateInputError,
    NotAFactorError,
    VerificationError,
)
from .pipeline import Analysis, analyze
from .polycert import certify_irreducible, factor_degrees_mod_p, growth_degree, squarefree_part, strip_trivial_factors
from .polynomial import IntPolynomial, divide_exact
from .rewrite import RuleKind, RuleSpec, encode_runs, generate_sequence, length_ratios, render_count, say_step
from .spectral import SparseMatrix, abundances, char_poly, dominant_eigen, newton_refine
from .splitting import AFTER_ZERO, SplitPredicate, default_predicate, is_element, split, verify_split_empirically

__version__ = "0.1.0"
