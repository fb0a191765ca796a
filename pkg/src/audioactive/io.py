"""Deterministic file formats: chemistry JSON, DOT, CSV, triplets, ratios."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Sequence

from .chemistry import Chemistry, Element, TableRow
from .polycert import Certification, GrowthDegree
from .polynomial import IntPolynomial
from .rewrite import RuleKind, RuleSpec, compress, expand

RLE_THRESHOLD = 1000


def display(s: str, threshold: int = RLE_THRESHOLD) -> str:
    """``s`` itself, or ``rle:`` plus exponent notation when it is long."""
    return s if len(s) <= threshold else "rle:" + compress(s)


def undisplay(text: str) -> str:
    return expand(text[4:]) if text.startswith("rle:") else text


def rule_to_dict(rule: RuleSpec) -> dict:
    return {"kind": rule.kind.value, "base": rule.base, "j": rule.j}


def rule_from_dict(d: dict) -> RuleSpec:
    return RuleSpec(RuleKind(d["kind"]), int(d["base"]), d.get("j"))


def _element_dict(e: Element, threshold: int) -> dict:
    out = {"id": e.id, "length": len(e.string)}
    if len(e.string) > threshold:
        out.update(string=compress(e.string), rle=True)
    else:
        out["string"] = e.string
    out.update(decay=e.decay, persistent=e.persistent)
    return out


def _element_from(d: dict) -> Element:
    s = expand(d["string"]) if d.get("rle") else d["string"]
    return Element(int(d["id"]), s, [int(i) for i in d["decay"]], bool(d.get("persistent", True)))


def chemistry_to_json(chem: Chemistry, threshold: int = RLE_THRESHOLD) -> str:
    doc = {
        "rule": rule_to_dict(chem.rule),
        "base": chem.rule.base,
        "seed": chem.seed,
        "predicate": chem.predicate,
        "elements": [_element_dict(e, threshold) for e in chem.elements],
        "exotic": [_element_dict(e, threshold) for e in chem.exotics],
    }
    return json.dumps(doc, indent=1) + "\n"


def chemistry_from_json(text: str) -> Chemistry:
    doc = json.loads(text)
    return Chemistry(
        rule_from_dict(doc["rule"]),
        doc["predicate"],
        doc["seed"],
        [_element_from(d) for d in doc["elements"]],
        [_element_from(d) for d in doc["exotic"]],
    )


def chemistry_to_dot(chem: Chemistry) -> str:
    """Decay digraph; edge labels give multiplicities."""
    lines = ["digraph decay {"]
    for e in chem.all_elements():
        shape = "box" if e.id > chem.n else "ellipse"
        lines.append(f'  e{e.id} [label="{e.id} ({len(e.string)})", shape={shape}];')
    for e in chem.all_elements():
        counts: dict[int, int] = {}
        for d in e.decay:
            counts[d] = counts.get(d, 0) + 1
        for d in sorted(counts):
            lines.append(f'  e{e.id} -> e{d} [label="{counts[d]}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def periodic_table_csv(rows: Sequence[TableRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "length", "decay", "abundance"])
    for r in rows:
        w.writerow([r.index, r.length, r.decay, "" if r.abundance is None else repr(r.abundance)])
    return buf.getvalue()


def abundance_csv(abundance: Sequence[float]) -> str:
    return "id,abundance\n" + "".join(f"{k},{a!r}\n" for k, a in enumerate(abundance, start=1))


def polynomial_to_json(poly: IntPolynomial) -> str:
    return poly.to_json() + "\n"


def polynomial_from_json(text: str) -> IntPolynomial:
    return IntPolynomial.from_json(text)


def certification_to_json(cert: Certification) -> str:
    return json.dumps(cert.to_dict(), indent=1) + "\n"


def growth_report(g: GrowthDegree) -> dict:
    return {
        "degree": g.degree,
        "status": g.status.value,
        "stripped": [{"factor": f.label, "multiplicity": f.multiplicity} for f in g.stripped],
        "residual_degree": g.factor.degree if g.factor is not None else None,
        "note": g.note,
        "certification": g.certification.to_dict() if g.certification else None,
    }


def write_text(path: Path | str, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path
