"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 budget exceeded (partial output is
written next to the requested output with a ``.partial`` suffix), 3 failed
internal verification.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import mpmath

from . import io as aio
from .chemistry import Limits, audit_seed, known_exotics, periodic_table, sequence_lengths, tail_analysis
from .errors import AudioactiveError, BudgetExceeded, ConvergenceError, DegenerateInputError, VerificationError
from .pipeline import analyze, format_decimal, format_sweep, sweep_bases, sweep_j
from .rewrite import DEFAULT_DIGIT_LIMIT, RuleKind, RuleSpec, check_digits, format_ratio_table, generate_sequence, ratios_from_lengths
from .spectral import WORKERS_ENV, char_poly, newton_refine

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_VERIFY = 0, 1, 2, 3

log = logging.getLogger("audioactive")


class UsageError(Exception):
    pass


@dataclass
class JobConfig:
    rule: str = "stutter"
    j: int | None = None
    base: int = 10
    seed: str = "0"
    terms: int = 10
    count: int = 55
    max_elements: int = Limits.max_elements
    max_length: int = Limits.max_length
    digit_limit: int = DEFAULT_DIGIT_LIMIT
    tol: float = 1e-13
    format: str = "text"
    workers: int | None = None
    output: str | None = None
    precision: int = 10
    prime_budget: int = 25
    range: str | None = None
    max_terms: int = 60
    exact: bool = True
    both: bool = False

    def validate(self) -> None:
        if self.rule not in {k.value for k in RuleKind}:
            raise UsageError(f"unknown rule {self.rule!r}")
        if self.rule == "jstutter" and self.j is None:
            raise UsageError("--j is required with --rule jstutter")
        if self.rule != "jstutter" and self.j is not None:
            raise UsageError(f"--j is only valid with --rule jstutter, not {self.rule}")
        if self.j is not None and self.j < 1:
            raise UsageError("--j must be >= 1")
        if not 2 <= self.base <= 36:
            raise UsageError("--base must be between 2 and 36")
        if not self.seed:
            raise UsageError("--seed must be nonempty")
        try:
            check_digits(self.seed, self.base)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        for name in ("terms", "count", "max_elements", "max_length", "digit_limit", "prime_budget", "max_terms"):
            if getattr(self, name) < 1:
                raise UsageError(f"--{name.replace('_', '-')} must be >= 1")
        if self.tol <= 0:
            raise UsageError("--tol must be positive")
        if self.format not in ("text", "json"):
            raise UsageError("--format must be text or json")
        if self.workers is not None and self.workers < 1:
            raise UsageError("--workers must be >= 1")
        if not 1 <= self.precision <= 60:
            raise UsageError("--precision must be between 1 and 60")

    def rule_spec(self) -> RuleSpec:
        return RuleSpec(RuleKind(self.rule), self.base, self.j)

    def limits(self) -> Limits:
        return Limits(self.max_elements, self.max_length)


def load_config_file(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    known = {f.name for f in fields(JobConfig)}
    data = {k.replace("-", "_"): v for k, v in data.items()}
    unknown = sorted(set(data) - known)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    return data


def build_config(args: argparse.Namespace) -> JobConfig:
    """Defaults, then the config file, then explicit flags."""
    values = load_config_file(args.config) if args.config else {}
    for f in fields(JobConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    try:
        cfg = JobConfig(**values)
    except TypeError as exc:
        raise UsageError(str(exc)) from None
    if cfg.workers is None and os.environ.get(WORKERS_ENV):
        try:
            cfg.workers = int(os.environ[WORKERS_ENV])
        except ValueError:
            raise UsageError(f"{WORKERS_ENV} must be an integer") from None
    cfg.validate()
    return cfg


def parse_range(text: str | None, default: tuple[int, int]) -> list[int]:
    if not text:
        lo, hi = default
    else:
        try:
            lo, _, hi = text.partition("-")
            lo, hi = int(lo), int(hi or lo)
        except ValueError:
            raise UsageError(f"bad range {text!r}; expected e.g. 2-5") from None
    if lo > hi:
        raise UsageError(f"empty range {text!r}")
    return list(range(lo, hi + 1))


def emit(cfg: JobConfig, text: str, name: str | None = None) -> None:
    """Write to ``--output`` (a file, or a directory when ``name`` is given) or stdout."""
    if cfg.output:
        target = Path(cfg.output) / name if name else Path(cfg.output)
        aio.write_text(target, text)
        log.info("wrote %s", target)
    else:
        sys.stdout.write(text)


def out_dir(cfg: JobConfig) -> Path:
    path = Path(cfg.output or "audioactive-out")
    path.mkdir(parents=True, exist_ok=True)
    return path


# --- subcommands ------------------------------------------------------------


def cmd_seq(cfg: JobConfig) -> int:
    rule = cfg.rule_spec()
    try:
        terms = generate_sequence(cfg.seed, rule, cfg.terms, cfg.digit_limit)
    except BudgetExceeded as exc:
        partial = Path((cfg.output or "seq.txt") + ".partial")
        aio.write_text(partial, _format_terms(exc.partial, cfg))
        raise
    emit(cfg, _format_terms(terms, cfg))
    return EXIT_OK


def _format_terms(terms, cfg: JobConfig) -> str:
    shown = [aio.display(t) for t in terms]
    if cfg.format == "json":
        return json.dumps(shown) + "\n"
    return "".join(t + "\n" for t in shown)


def cmd_ratios(cfg: JobConfig) -> int:
    def series(rule: RuleSpec):
        lengths = sequence_lengths(cfg.seed, rule, cfg.count + 1)
        return ratios_from_lengths(lengths)

    if not cfg.both:
        emit(cfg, format_ratio_table(series(cfg.rule_spec())))
        return EXIT_OK
    stutter = series(RuleSpec.stutter(cfg.base))
    standard = series(RuleSpec.standard(cfg.base))
    lines = ["# index stutter standard\n"]
    lines += [f"{k} {float(a):.10g} {float(b):.10g}\n" for k, (a, b) in enumerate(zip(stutter, standard), start=1)]
    emit(cfg, "".join(lines))
    return EXIT_OK


def _analysis(cfg: JobConfig, exact: bool):
    return analyze(
        cfg.rule_spec(),
        cfg.seed,
        limits=cfg.limits(),
        exact=exact,
        workers=cfg.workers,
        tol=cfg.tol,
        prime_budget=cfg.prime_budget,
    )


def _write_chemistry(a, d: Path) -> None:
    aio.write_text(d / "chemistry.json", aio.chemistry_to_json(a.chemistry))
    aio.write_text(d / "periodic_table.csv", aio.periodic_table_csv(periodic_table(a.chemistry, a.abundance)))
    aio.write_text(d / "decay.dot", aio.chemistry_to_dot(a.chemistry))


def cmd_chem(cfg: JobConfig) -> int:
    a = _analysis(cfg, exact=False)
    d = out_dir(cfg)
    _write_chemistry(a, d)
    chem = a.chemistry
    summary = {
        "rule": chem.rule.describe(),
        "elements": chem.n,
        "exotic": len(chem.exotics),
        "longest": max(len(e.string) for e in chem.elements),
        "output": str(d),
    }
    _print_summary(cfg, summary)
    return EXIT_OK


def _lambda_text(value, places: int) -> str:
    if isinstance(value, float):
        return format_decimal(value, places)
    return mpmath.nstr(value, places + 1, strip_zeros=False)


def cmd_eigen(cfg: JobConfig) -> int:
    a = _analysis(cfg, exact=False)
    lam = a.eigen.value
    if cfg.precision > 12:
        # beyond double precision: polish on the exact characteristic polynomial
        poly = char_poly(a.matrix, workers=cfg.workers)
        with mpmath.workdps(cfg.precision + 20):
            lam = newton_refine(poly, lam, prec=int(3.33 * (cfg.precision + 20)))
    if cfg.output:
        aio.write_text(Path(cfg.output), aio.abundance_csv(a.abundance))
    summary = {
        "lambda": _lambda_text(lam, cfg.precision),
        "residual": a.eigen.residual,
        "iterations": a.eigen.iterations,
        "elements": a.chemistry.n,
        "top_abundance": format_decimal(a.abundance[0], 8),
    }
    _print_summary(cfg, summary)
    return EXIT_OK


def cmd_charpoly(cfg: JobConfig) -> int:
    a = _analysis(cfg, exact=True)
    d = out_dir(cfg)
    aio.write_text(d / "charpoly.json", aio.polynomial_to_json(a.charpoly))
    report = aio.growth_report(a.growth)
    if a.growth.factor is not None:
        aio.write_text(d / "residual.json", aio.polynomial_to_json(a.growth.factor))
    if a.growth.certification is not None:
        aio.write_text(d / "certification.json", aio.certification_to_json(a.growth.certification))
    aio.write_text(d / "factorization.json", json.dumps(report, indent=1) + "\n")
    g = a.growth
    summary = {
        "degree": a.charpoly.degree,
        "stripped": " ".join(f"{f.label}^{f.multiplicity}" if f.multiplicity > 1 else f.label for f in g.stripped),
        "residual_degree": g.factor.degree if g.factor is not None else None,
        "trailing_coefficient": g.factor.coeffs[0] if g.factor is not None else None,
        "growth_degree": g.degree if g.degree is not None else "Inconclusive",
        "status": g.status.value,
        "output": str(d),
    }
    _print_summary(cfg, summary)
    return EXIT_OK


def cmd_sweep_bases(cfg: JobConfig) -> int:
    rows = sweep_bases(
        parse_range(cfg.range, (2, 5)), cfg.seed, exact=cfg.exact, workers=cfg.workers, prime_budget=cfg.prime_budget,
        limits=cfg.limits(),
    )
    emit(cfg, format_sweep(rows, cfg.precision))
    return EXIT_OK


def cmd_sweep_j(cfg: JobConfig) -> int:
    rows = sweep_j(
        parse_range(cfg.range, (2, 10)), cfg.base, cfg.seed, exact=cfg.exact, workers=cfg.workers,
        prime_budget=cfg.prime_budget, limits=cfg.limits(),
    )
    emit(cfg, format_sweep(rows, cfg.precision))
    return EXIT_OK


def cmd_audit(cfg: JobConfig) -> int:
    rule = cfg.rule_spec()
    chem = analyze(rule, "0", limits=cfg.limits(), exact=False).chemistry
    extra = known_exotics(rule)
    tail = tail_analysis(cfg.seed, rule, chem=chem)
    audit = audit_seed(cfg.seed, rule, chem.common_strings(), extra, cfg.max_terms)
    common = chem.common_strings()
    doc = {
        "seed": cfg.seed,
        "rule": rule.describe(),
        "tail": {
            "preperiod": tail.preperiod,
            "cycle_length": tail.cycle_length,
            "cycle": [aio.display(s) for s in tail.cycle],
            "cycle_ids": tail.cycle_ids,
            "cycle_exotic": [s not in common for s in tail.cycle],
            "cycle_known": [s in extra for s in tail.cycle],
            "transient_exotics": len(tail.exotic),
        },
        "audit": {
            "terms": audit.terms,
            "conformant": audit.conformant,
            "conformant_from": audit.conformant_from,
            "first_split_term": audit.first_split_term,
            "violating_elements": len(audit.violations),
            "violating_terms": max(audit.violations.values(), default=0),
            "final_exotics": [{"string": aio.display(s), "known": s in extra} for s in audit.final_exotics],
        },
    }
    emit(cfg, json.dumps(doc, indent=1) + "\n")
    return EXIT_OK


def cmd_export(cfg: JobConfig) -> int:
    """Every data file of one rule: chemistry, table, graph, matrix,
    abundances, ratios and (unless ``--no-exact``) the polynomial files."""
    a = _analysis(cfg, exact=cfg.exact)
    d = out_dir(cfg)
    _write_chemistry(a, d)
    aio.write_text(d / "matrix.txt", a.matrix.to_triplet_text())
    aio.write_text(d / "abundance.csv", aio.abundance_csv(a.abundance))
    ratios = ratios_from_lengths(sequence_lengths(cfg.seed, cfg.rule_spec(), cfg.count + 1))
    aio.write_text(d / "ratios.dat", format_ratio_table(ratios))
    if a.charpoly is not None:
        aio.write_text(d / "charpoly.json", aio.polynomial_to_json(a.charpoly))
        aio.write_text(d / "factorization.json", json.dumps(aio.growth_report(a.growth), indent=1) + "\n")
        if a.growth.certification is not None:
            aio.write_text(d / "certification.json", aio.certification_to_json(a.growth.certification))
    _print_summary(cfg, {"elements": a.chemistry.n, "lambda": format_decimal(a.growth_rate, cfg.precision), "output": str(d)})
    return EXIT_OK


def _print_summary(cfg: JobConfig, summary: dict) -> None:
    if cfg.format == "json":
        print(json.dumps(summary))
    else:
        for k, v in summary.items():
            print(f"{k}: {v}")


COMMANDS = {
    "seq": cmd_seq,
    "ratios": cmd_ratios,
    "chem": cmd_chem,
    "eigen": cmd_eigen,
    "charpoly": cmd_charpoly,
    "sweep-bases": cmd_sweep_bases,
    "sweep-j": cmd_sweep_j,
    "audit": cmd_audit,
    "export": cmd_export,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # defaults live in JobConfig so that a config file can sit between them and the flags
    common.add_argument("--config", help="TOML file with JobConfig keys; flags override it")
    common.add_argument("--rule", choices=[k.value for k in RuleKind])
    common.add_argument("--j", type=int, help="copies for the jstutter rule")
    common.add_argument("--base", type=int)
    common.add_argument("--seed")
    common.add_argument("--max-elements", type=int)
    common.add_argument("--max-length", type=int)
    common.add_argument("--digit-limit", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--format", choices=["text", "json"])
    common.add_argument("--workers", type=int, help=f"processes for modular work (env {WORKERS_ENV})")
    common.add_argument("-o", "--output")
    common.add_argument("--precision", type=int, help="fractional digits printed for lambda")
    common.add_argument("--prime-budget", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="audioactive", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("seq", parents=[common], help="print sequence terms")
    p.add_argument("--terms", type=int)
    p = sub.add_parser("ratios", parents=[common], help="ratios of successive term lengths")
    p.add_argument("--count", type=int, help="number of ratios (default 55)")
    p.add_argument("--both", action="store_true", default=None, help="stutter and standard side by side")
    sub.add_parser("chem", parents=[common], help="discover the chemistry and write JSON, CSV and DOT")
    sub.add_parser("eigen", parents=[common], help="growth rate and abundances")
    sub.add_parser("charpoly", parents=[common], help="exact characteristic polynomial and degree of lambda")
    for name, default in (("sweep-bases", "2-5"), ("sweep-j", "2-10")):
        p = sub.add_parser(name, parents=[common], help=f"table over a range (default {default})")
        p.add_argument("--range")
        p.add_argument("--no-exact", dest="exact", action="store_false", default=None)
    p = sub.add_parser("audit", parents=[common], help="terminal cycle and common-element audit of a seed")
    p.add_argument("--max-terms", type=int)
    p = sub.add_parser("export", parents=[common], help="write every data file for one rule")
    p.add_argument("--count", type=int)
    p.add_argument("--no-exact", dest="exact", action="store_false", default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = build_config(args)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"audioactive: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        print(f"audioactive: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (VerificationError, ConvergenceError) as exc:
        print(f"audioactive: verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except DegenerateInputError as exc:
        print(f"audioactive: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AudioactiveError as exc:
        print(f"audioactive: error: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
