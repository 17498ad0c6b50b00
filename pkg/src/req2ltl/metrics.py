"""Corpus loading and the four-metric evaluation harness.

Per requirement/formula pair the harness reports: syntax validity (does the
emitted text parse), structural match (AST equality after canonical
printing), an optional bounded-equivalence verdict (the machine stand-in
for expert exact-match review, reported separately because structural and
semantic agreement differ), proposition recall, and an abstracted BLEU
score.  Reports serialize to JSON with a plain-text summary table, and the
CLI can render the scores as figures next to the delimited output.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence

from req2ltl.ltl import (
    LtlFormula,
    LtlSyntaxError,
    TooManyAPs,
    bounded_equiv,
    collect_aps,
    iter_atoms,
    map_atoms,
    normalize_atom_text,
    parse_ltl,
    print_ltl,
    print_tokens,
)
from req2ltl.onion import SchemaError

__all__ = [
    "CorpusPair",
    "PairResult",
    "Aggregates",
    "EvalReport",
    "OracleMode",
    "ParseError",
    "load_corpus",
    "ap_recall",
    "bleu",
    "evaluate",
    "identity_pipeline",
    "write_figures",
    "pair_table_tsv",
]

BUNDLED_CORPUS = Path(__file__).parent / "data" / "tableI.jsonl"


class ParseError(ValueError):
    def __init__(self, pair_id: str, why: str):
        super().__init__(f"pair {pair_id!r}: {why}")
        self.pair_id = pair_id


@dataclass(frozen=True)
class CorpusPair:
    id: str
    nl: str
    gold_text: str
    gold: LtlFormula
    lifted: bool = False
    placeholder_map: Optional[Mapping[str, str]] = None


class OracleMode(Enum):
    STRUCTURAL_ONLY = "structural-only"
    WITH_BOUNDED_EQUIV = "with-bounded-equiv"


@dataclass(frozen=True)
class PairResult:
    id: str
    syntax_valid: bool
    structural_match: bool
    bounded_equiv_match: Optional[bool]
    ap_recall: float
    bleu: float
    error: Optional[str] = None


@dataclass(frozen=True)
class Aggregates:
    syntax_validity: float
    structural_match: float
    bounded_equiv_match: Optional[float]
    ap_recall: float
    bleu: float


@dataclass(frozen=True)
class EvalReport:
    per_pair: tuple[PairResult, ...]
    aggregates: Aggregates
    backend: str = "unknown"
    template_version: str = "unknown"
    timestamp: str = ""

    def to_jsonable(self) -> dict:
        return {
            "perPair": [
                {
                    "id": r.id,
                    "syntaxValid": r.syntax_valid,
                    "structuralMatch": r.structural_match,
                    "boundedEquivMatch": r.bounded_equiv_match,
                    "apRecall": r.ap_recall,
                    "bleu": r.bleu,
                    "error": r.error,
                }
                for r in self.per_pair
            ],
            "aggregates": {
                "syntaxValidity": self.aggregates.syntax_validity,
                "structuralMatch": self.aggregates.structural_match,
                "boundedEquivMatch": self.aggregates.bounded_equiv_match,
                "apRecall": self.aggregates.ap_recall,
                "bleu": self.aggregates.bleu,
            },
            "runMetadata": {
                "backend": self.backend,
                "templateVersion": self.template_version,
                "timestamp": self.timestamp,
            },
        }

    def summary_table(self) -> str:
        agg = self.aggregates
        rows = [
            ("pairs", f"{len(self.per_pair)}"),
            ("syntax validity", f"{agg.syntax_validity:7.1%}"),
            ("structural match", f"{agg.structural_match:7.1%}"),
            (
                "bounded-equiv match",
                "n/a" if agg.bounded_equiv_match is None else f"{agg.bounded_equiv_match:7.1%}",
            ),
            ("AP recall", f"{agg.ap_recall:7.1%}"),
            ("BLEU", f"{agg.bleu:7.4f}"),
        ]
        width = max(len(name) for name, _ in rows)
        return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)


# ---------------------------------------------------------------------------
# Corpus


def load_corpus(path: str | Path) -> list[CorpusPair]:
    """Decode a JSONL corpus, pre-parsing every gold formula."""
    pairs = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        where = f"line {lineno}"
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(where, f"invalid JSON: {exc}") from exc
        if not isinstance(row, dict):
            raise SchemaError(where, "corpus rows must be objects")
        for key in ("id", "nl", "ltl"):
            if not isinstance(row.get(key), str) or not row[key].strip():
                raise SchemaError(where, f"missing or empty {key!r} field")
        try:
            gold = parse_ltl(row["ltl"])
        except LtlSyntaxError as exc:
            raise ParseError(row["id"], f"gold formula does not parse: {exc}") from exc
        lifted = bool(row.get("lifted", False))
        placeholders = row.get("placeholders")
        if lifted:
            if not isinstance(placeholders, dict):
                raise SchemaError(where, "lifted pairs need a placeholders map")
            missing = {
                a for a in collect_aps(gold) if a.startswith("Prop") and a not in placeholders
            }
            if missing:
                raise SchemaError(where, f"placeholders missing for {sorted(missing)}")
        pairs.append(
            CorpusPair(
                id=row["id"],
                nl=row["nl"],
                gold_text=row["ltl"],
                gold=gold,
                lifted=lifted,
                placeholder_map=placeholders,
            )
        )
    return pairs


# ---------------------------------------------------------------------------
# Metrics


def ap_recall(predicted: LtlFormula, gold: LtlFormula) -> float:
    """|APs(pred) ∩ APs(gold)| / |APs(gold)| after atom normalization;
    a gold formula with no atoms scores 1.0 by convention."""
    gold_aps = {normalize_atom_text(a) for a in collect_aps(gold)}
    if not gold_aps:
        return 1.0
    pred_aps = {normalize_atom_text(a) for a in collect_aps(predicted)}
    return len(pred_aps & gold_aps) / len(gold_aps)


def _abstracted_tokens(predicted: LtlFormula, gold: LtlFormula) -> tuple[list[str], list[str]]:
    """Token streams with atoms abstracted: gold atoms become P1, P2, ... in
    first-occurrence order; predicted atoms map through normalized-string
    identity and fall back to PX."""
    placeholder: dict[str, str] = {}
    for atom in iter_atoms(gold):
        key = normalize_atom_text(atom)
        if key not in placeholder:
            placeholder[key] = f"P{len(placeholder) + 1}"
    gold_tokens = print_tokens(gold, lambda a: placeholder[normalize_atom_text(a)])
    pred_tokens = print_tokens(
        predicted, lambda a: placeholder.get(normalize_atom_text(a), "PX")
    )
    return pred_tokens, gold_tokens


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(predicted: LtlFormula, gold: LtlFormula) -> float:
    """BLEU-4 with uniform weights and add-one smoothing over abstracted
    operator/parenthesis/placeholder token streams."""
    candidate, reference = _abstracted_tokens(predicted, gold)
    log_sum = 0.0
    for n in range(1, 5):
        cand_counts = _ngrams(candidate, n)
        ref_counts = _ngrams(reference, n)
        total = sum(cand_counts.values())
        clipped = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
        log_sum += 0.25 * math.log((clipped + 1) / (total + 1))
    c, r = len(candidate), len(reference)
    if c == 0:
        return 0.0
    brevity = 1.0 if c > r else math.exp(1 - r / c)
    return brevity * math.exp(log_sum)


# ---------------------------------------------------------------------------
# Evaluation


def identity_pipeline(pair: CorpusPair) -> str:
    """Feeds the gold text back; the self-consistency baseline."""
    return pair.gold_text


def _substitute_lenient(formula: LtlFormula, mapping: Mapping[str, str]) -> LtlFormula:
    return map_atoms(formula, lambda text: mapping.get(text, text))


def _score_pair(pair: CorpusPair, emitted: str, oracle_mode: OracleMode) -> PairResult:
    try:
        predicted = parse_ltl(emitted)
    except LtlSyntaxError as exc:
        return PairResult(pair.id, False, False, None, 0.0, 0.0, error=str(exc))
    gold = pair.gold
    if pair.lifted and pair.placeholder_map:
        predicted = _substitute_lenient(predicted, pair.placeholder_map)
        gold = _substitute_lenient(gold, pair.placeholder_map)
    structural = print_ltl(predicted) == print_ltl(gold)
    bounded: Optional[bool] = None
    if oracle_mode is OracleMode.WITH_BOUNDED_EQUIV:
        try:
            bounded = bounded_equiv(predicted, gold)
        except TooManyAPs:
            bounded = None
    return PairResult(
        pair.id,
        syntax_valid=True,
        structural_match=structural,
        bounded_equiv_match=bounded,
        ap_recall=ap_recall(predicted, gold),
        bleu=bleu(predicted, gold),
    )


def evaluate(
    corpus: Sequence[CorpusPair],
    pipeline: Callable[[CorpusPair], str],
    oracle_mode: OracleMode = OracleMode.STRUCTURAL_ONLY,
    backend: str = "unknown",
    template_version: str = "unknown",
) -> EvalReport:
    """Score ``pipeline`` over ``corpus``; per-pair failures never abort the
    run, they score as syntax-invalid entries."""
    results = []
    for pair in corpus:
        try:
            emitted = pipeline(pair)
        except Exception as exc:  # pipeline errors are data
            results.append(
                PairResult(pair.id, False, False, None, 0.0, 0.0, error=f"{type(exc).__name__}: {exc}")
            )
            continue
        results.append(_score_pair(pair, emitted, oracle_mode))
    results.sort(key=lambda r: r.id)
    return EvalReport(
        per_pair=tuple(results),
        aggregates=aggregate(results),
        backend=backend,
        template_version=template_version,
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )


def aggregate(results: Sequence[PairResult]) -> Aggregates:
    if not results:
        return Aggregates(0.0, 0.0, None, 0.0, 0.0)
    n = len(results)
    bounded = [r.bounded_equiv_match for r in results if r.bounded_equiv_match is not None]
    return Aggregates(
        syntax_validity=sum(r.syntax_valid for r in results) / n,
        structural_match=sum(r.structural_match for r in results) / n,
        bounded_equiv_match=(sum(bounded) / len(bounded)) if bounded else None,
        ap_recall=sum(r.ap_recall for r in results) / n,
        bleu=sum(r.bleu for r in results) / n,
    )


# ---------------------------------------------------------------------------
# Report artifacts


def pair_table_tsv(report: EvalReport) -> str:
    header = "id\tsyntax_valid\tstructural_match\tbounded_equiv_match\tap_recall\tbleu"
    lines = [header]
    for r in report.per_pair:
        bounded = "" if r.bounded_equiv_match is None else str(int(r.bounded_equiv_match))
        lines.append(
            f"{r.id}\t{int(r.syntax_valid)}\t{int(r.structural_match)}\t{bounded}"
            f"\t{r.ap_recall:.4f}\t{r.bleu:.4f}"
        )
    return "\n".join(lines) + "\n"


def write_figures(report: EvalReport, out_dir: str | Path) -> list[Path]:
    """Render the aggregate bars and per-pair score bars as PNG files."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    agg = report.aggregates
    names = ["syntax", "structural", "AP recall", "BLEU"]
    values = [agg.syntax_validity, agg.structural_match, agg.ap_recall, agg.bleu]
    if agg.bounded_equiv_match is not None:
        names.insert(2, "bounded equiv")
        values.insert(2, agg.bounded_equiv_match)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar(names, values, color="#4878a8")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("score")
    ax.set_title("aggregate metrics")
    for i, v in enumerate(values):
        ax.text(i, v + 0.02, f"{v:.2f}", ha="center", fontsize=8)
    fig.tight_layout()
    path = out_dir / "metrics_summary.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    ids = [r.id for r in report.per_pair]
    fig, ax = plt.subplots(figsize=(max(6, 0.6 * len(ids)), 3.5))
    x = range(len(ids))
    ax.bar([i - 0.2 for i in x], [r.ap_recall for r in report.per_pair], width=0.4, label="AP recall")
    ax.bar([i + 0.2 for i in x], [r.bleu for r in report.per_pair], width=0.4, label="BLEU")
    ax.set_xticks(list(x))
    ax.set_xticklabels(ids, rotation=45, ha="right", fontsize=7)
    ax.set_ylim(0, 1.05)
    ax.legend(fontsize=8)
    ax.set_title("per-pair scores")
    fig.tight_layout()
    path = out_dir / "per_pair_scores.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)
    return written
