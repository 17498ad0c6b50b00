"""Prompt-guided decomposition of a requirement into an onion tree.

Two stages.  Stage I extracts the outermost scope and builds the tree root:
a temporal scope becomes the root operator, a mode condition becomes the
antecedent of an implication under Globally, and a scopeless clause is
wrapped in Globally.  Stage II recursively decomposes the main clause:
unary operator extraction first, then binary splitting, then an atomicity
check whose leaves get normalized into proposition subfields; clauses that
resist all three go through one rephrasing prompt and are retried.

Every backend call is a separate step with a one-object JSON response
contract, so runs are fully auditable: the step trace records the prompt
digest, raw response, and parsed result of each call, and feeding a saved
trace's raw responses back through the parsers rebuilds the identical tree.
Trees that fail validation are re-prompted with the diagnostics embedded,
up to a configurable number of repair rounds.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Optional

from req2ltl.gateway import BackendError, GenerationParams, LlmBackend, prompt_digest
from req2ltl.onion import (
    AtomicNode,
    AtomicProposition,
    ModeScopeNode,
    NodePath,
    OnionNode,
    Rel,
    RelationNode,
    RelationOp,
    ScopeNode,
    ScopeOp,
    edit_node,
    loose_jsonable,
    parse_onion_loose,
)
from req2ltl.validation import ValidationReport, validate

__all__ = [
    "DecompositionConfig",
    "StepId",
    "TraceEntry",
    "StepTrace",
    "ScopeFinding",
    "ProtocolError",
    "DepthExceeded",
    "RepairExhausted",
    "decompose",
    "extract_scope",
    "decompose_clause",
    "normalize_ap",
    "replay_trace",
]

DEFAULT_DEPTH_BUDGET = 12

_PROMPT_ROOT = Path(__file__).parent / "prompts"
_FEWSHOT_ROOT = Path(__file__).parent / "fewshot"


@dataclass(frozen=True)
class DecompositionConfig:
    max_repair_rounds: int = 3
    few_shot_set_id: str = "default"
    lifted_mode: bool = False
    prompt_template_version: str = "v1"
    depth_budget: int = DEFAULT_DEPTH_BUDGET
    params: GenerationParams = GenerationParams()

    def __post_init__(self) -> None:
        if self.max_repair_rounds < 0:
            raise ValueError("max_repair_rounds must be >= 0")


class StepId(Enum):
    EXTRACT_SCOPE = "ExtractScope"
    TOP_LEVEL = "TopLevel"
    UNARY_EXTRACT = "UnaryExtract"
    BINARY_SPLIT = "BinarySplit"
    ATOMICITY_CHECK = "AtomicityCheck"
    NORMALIZE_AP = "NormalizeAP"
    REFINE = "Refine"


@dataclass(frozen=True)
class TraceEntry:
    step_id: StepId
    prompt_digest: str
    raw_response: str
    parsed_result: str
    round: int = 0

    def to_json(self) -> str:
        return json.dumps(
            {
                "step": self.step_id.value,
                "promptDigest": self.prompt_digest,
                "rawResponse": self.raw_response,
                "parsedResult": self.parsed_result,
                "round": self.round,
            }
        )


@dataclass
class StepTrace:
    entries: list[TraceEntry] = field(default_factory=list)

    def add(self, entry: TraceEntry) -> None:
        self.entries.append(entry)

    @property
    def raw_responses(self) -> list[str]:
        """Backend responses in call order (synthetic entries excluded)."""
        return [e.raw_response for e in self.entries if e.step_id is not StepId.TOP_LEVEL]

    @property
    def max_round(self) -> int:
        return max((e.round for e in self.entries), default=0)

    def to_jsonl(self) -> str:
        return "\n".join(e.to_json() for e in self.entries) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "StepTrace":
        entries = []
        for line in text.splitlines():
            if not line.strip():
                continue
            row = json.loads(line)
            entries.append(
                TraceEntry(
                    StepId(row["step"]),
                    row["promptDigest"],
                    row["rawResponse"],
                    row["parsedResult"],
                    row.get("round", 0),
                )
            )
        return cls(entries)


@dataclass(frozen=True)
class ScopeFinding:
    """Stage-I outcome: ``temporal`` (with op), ``mode`` (with condition), or ``none``."""

    kind: str
    op: Optional[ScopeOp] = None
    condition: Optional[AtomicProposition] = None


class ProtocolError(RuntimeError):
    """A step response kept violating its JSON contract after one re-ask."""


class DepthExceeded(RuntimeError):
    pass


class RepairExhausted(RuntimeError):
    def __init__(self, diagnostics, tree, trace: StepTrace):
        super().__init__(
            f"validation still failing after repair budget: "
            f"{'; '.join(d.message for d in diagnostics)}"
        )
        self.last_diagnostics = diagnostics
        self.last_tree = tree
        self.trace = trace


# ---------------------------------------------------------------------------
# Prompt assembly

_FENCE_RE = re.compile(r"^```[a-zA-Z]*\n(.*)\n```$", re.DOTALL)


def _strip_fences(text: str) -> str:
    text = text.strip()
    m = _FENCE_RE.match(text)
    return m.group(1).strip() if m else text


def _render_template(template: str, slots: dict[str, str]) -> str:
    # plain replacement: templates contain JSON braces, so str.format is out
    for name, value in slots.items():
        template = template.replace("{" + name + "}", value)
    return template


def _load_fewshot(set_id: str) -> str:
    path = _FEWSHOT_ROOT / f"{set_id}.json"
    if not path.exists():
        raise ValueError(f"unknown few-shot set {set_id!r}")
    data = json.loads(path.read_text())
    blocks = []
    for ex in data["examples"]:
        blocks.append(
            f"Requirement: {ex['requirement']}\n"
            f"Tree: {json.dumps(ex['tree'], sort_keys=True)}\n"
            f"Formula: {ex['ltl']}"
        )
    return "\n\n".join(blocks)


class _Session:
    """One decomposition run: prompt assembly, step calls, trace recording."""

    def __init__(
        self,
        cfg: DecompositionConfig,
        backend: LlmBackend,
        requirement: str,
        feedback: str | None = None,
    ):
        self.cfg = cfg
        self.backend = backend
        self.requirement = requirement
        self.trace = StepTrace()
        self.round = 0
        self._grammar = (_PROMPT_ROOT / "grammar.txt").read_text()
        self._fewshot = _load_fewshot(cfg.few_shot_set_id)
        self._feedback = f"Reviewer feedback to honour:\n{feedback}\n" if feedback else ""
        version_dir = _PROMPT_ROOT / cfg.prompt_template_version
        if not version_dir.is_dir():
            raise ValueError(f"unknown prompt template version {cfg.prompt_template_version!r}")
        self._templates = {p.stem: p.read_text() for p in version_dir.glob("*.txt")}

    def prompt(self, step: str, **extra: str) -> str:
        slots = {
            "GRAMMAR": self._grammar,
            "FEWSHOT": self._fewshot,
            "FEEDBACK": self._feedback,
            "LIFTED": (
                "The clause uses lifted placeholders (Prop1, Prop2, ...): keep the "
                "placeholder verbatim as var with no rel/formula."
                if self.cfg.lifted_mode
                else ""
            ),
            **extra,
        }
        return _render_template(self._templates[step], slots)

    def ask(self, step_id: StepId, prompt: str, contract) -> Any:
        """One step call under its JSON contract, re-asking once on violation."""
        raw = self.backend.complete(prompt, self.cfg.params)
        try:
            parsed = contract(json.loads(_strip_fences(raw)))
        except (json.JSONDecodeError, ProtocolError, KeyError, TypeError, ValueError) as exc:
            self.record(step_id, prompt, raw, f"<contract violation: {exc}>")
            retry_prompt = (
                prompt
                + "\n\nThe previous reply was not a valid JSON object for this step. "
                "Reply with exactly one JSON object matching the stated shape."
            )
            raw = self.backend.complete(retry_prompt, self.cfg.params)
            try:
                parsed = contract(json.loads(_strip_fences(raw)))
            except (json.JSONDecodeError, ProtocolError, KeyError, TypeError, ValueError) as exc2:
                self.record(step_id, retry_prompt, raw, f"<contract violation: {exc2}>")
                raise ProtocolError(f"{step_id.value}: {exc2}") from exc2
            self.record(step_id, retry_prompt, raw, json.dumps(_jsonable(parsed)))
            return parsed
        self.record(step_id, prompt, raw, json.dumps(_jsonable(parsed)))
        return parsed

    def record(self, step_id: StepId, prompt: str, raw: str, parsed: str) -> None:
        self.trace.add(TraceEntry(step_id, prompt_digest(prompt), raw, parsed, self.round))


def _jsonable(value: Any) -> Any:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, AtomicProposition):
        return loose_jsonable(AtomicNode(value))
    if isinstance(value, (OnionNode, type(None))):
        return loose_jsonable(value)
    return str(value)


# ---------------------------------------------------------------------------
# Step response contracts

_SCOPE_OPS = {o.value.lower(): o for o in ScopeOp}
_RELATION_OPS = {o.value.lower(): o for o in RelationOp}
_REL_CODES = {r.value: r for r in Rel} | {r.name.lower(): r for r in Rel}


def _decode_scope_op(raw: Any) -> ScopeOp:
    if isinstance(raw, str) and raw.lower() in _SCOPE_OPS:
        return _SCOPE_OPS[raw.lower()]
    raise ProtocolError(f"unknown scope operator {raw!r}")


def _decode_relation_op(raw: Any) -> RelationOp:
    if isinstance(raw, str) and raw.lower() in _RELATION_OPS:
        return _RELATION_OPS[raw.lower()]
    raise ProtocolError(f"unknown relation operator {raw!r}")


def _decode_ap(row: dict, lifted: bool) -> AtomicProposition:
    # Permissive on subfield *consistency*: a missing formula or empty var
    # is representable and left for the validator to flag.
    var = str(row.get("var", "") or "")
    if lifted:
        return AtomicProposition(var=var)
    rel_raw = row.get("rel")
    rel = Rel.NONE
    if isinstance(rel_raw, str) and rel_raw.strip() and rel_raw.lower() in _REL_CODES:
        rel = _REL_CODES[rel_raw.lower()]
    formula = row.get("formula")
    com = row.get("com")
    return AtomicProposition(
        var=var,
        rel=rel,
        formula=str(formula) if formula is not None else None,
        com=str(com) if com else None,
    )


def _contract_extract_scope(row: dict) -> tuple[ScopeFinding, str]:
    scope = row["scope"]
    kind = scope.get("kind")
    clause = str(row.get("clause", "")).strip()
    if kind == "temporal":
        return ScopeFinding("temporal", op=_decode_scope_op(scope.get("op"))), clause
    if kind == "mode":
        cond = scope.get("condition")
        if not isinstance(cond, dict):
            raise ProtocolError("mode scope needs a condition object")
        return ScopeFinding("mode", condition=_decode_ap(cond, lifted=False)), clause
    if kind == "none":
        return ScopeFinding("none"), clause
    raise ProtocolError(f"unknown scope kind {kind!r}")


def _contract_unary(row: dict) -> tuple[ScopeOp, str] | None:
    if not row.get("found"):
        return None
    return _decode_scope_op(row.get("op")), str(row.get("clause", "")).strip()


def _contract_binary(row: dict) -> tuple[RelationOp, str, str] | None:
    if not row.get("found"):
        return None
    op = _decode_relation_op(row.get("op"))
    return op, str(row.get("left", "")).strip(), str(row.get("right", "")).strip()


def _contract_atomicity(row: dict) -> bool:
    atomic = row.get("atomic")
    if not isinstance(atomic, bool):
        raise ProtocolError("atomicity check must answer with a boolean")
    return atomic


def _contract_refine(row: dict) -> str:
    clause = str(row.get("clause", "")).strip()
    if not clause:
        raise ProtocolError("refine must return a non-empty clause")
    return clause


def _contract_repair(row: dict) -> OnionNode | None:
    return parse_onion_loose(row)


# ---------------------------------------------------------------------------
# The algorithm


def _extract_scope(session: _Session, clause: str) -> tuple[ScopeFinding, str]:
    prompt = session.prompt("extract_scope", CLAUSE=clause)
    finding, remainder = session.ask(StepId.EXTRACT_SCOPE, prompt, _contract_extract_scope)
    return finding, remainder or clause


def _decompose_clause(session: _Session, clause: str, budget: int) -> OnionNode | None:
    if budget < 1:
        raise DepthExceeded(f"clause nesting exceeded the depth budget: {clause!r}")
    if not clause:
        return None  # empty split side; the validator reports the arity hole
    unary = session.ask(
        StepId.UNARY_EXTRACT, session.prompt("unary_extract", CLAUSE=clause), _contract_unary
    )
    if unary is not None:
        op, rest = unary
        return ScopeNode(op, _decompose_clause(session, rest, budget - 1))
    binary = session.ask(
        StepId.BINARY_SPLIT, session.prompt("binary_split", CLAUSE=clause), _contract_binary
    )
    if binary is not None:
        op, left, right = binary
        return RelationNode(
            op,
            _decompose_clause(session, left, budget - 1),
            _decompose_clause(session, right, budget - 1),
        )
    if _is_atomic(session, clause):
        return AtomicNode(_normalize_ap(session, clause))
    refined = session.ask(StepId.REFINE, session.prompt("refine", CLAUSE=clause), _contract_refine)
    return _decompose_clause(session, refined, budget - 1)


def _is_atomic(session: _Session, clause: str) -> bool:
    return session.ask(
        StepId.ATOMICITY_CHECK, session.prompt("atomicity_check", CLAUSE=clause), _contract_atomicity
    )


def _normalize_ap(session: _Session, clause: str) -> AtomicProposition:
    return session.ask(
        StepId.NORMALIZE_AP,
        session.prompt("normalize_ap", CLAUSE=clause),
        lambda r: _decode_ap(r, session.cfg.lifted_mode),
    )


def _build_root(session: _Session, finding: ScopeFinding, clause: str) -> OnionNode:
    budget = session.cfg.depth_budget
    if finding.kind == "temporal":
        session.record(
            StepId.TOP_LEVEL, "", "", json.dumps({"root": finding.op.value})
        )
        if _is_atomic(session, clause):
            return ScopeNode(finding.op, AtomicNode(_normalize_ap(session, clause)))
        return ScopeNode(finding.op, _decompose_clause(session, clause, budget))
    if finding.kind == "mode":
        session.record(
            StepId.TOP_LEVEL,
            "",
            "",
            json.dumps({"root": "Globally", "antecedent": finding.condition.render()}),
        )
        return ScopeNode(
            ScopeOp.GLOBALLY,
            ModeScopeNode(finding.condition, _decompose_clause(session, clause, budget)),
        )
    session.record(
        StepId.TOP_LEVEL, "", "", json.dumps({"root": "Globally", "fallback": True})
    )
    return ScopeNode(ScopeOp.GLOBALLY, _decompose_clause(session, clause, budget))


def _repair_target(tree: OnionNode, path: NodePath) -> NodePath:
    """Deepest prefix of ``path`` that still resolves to a proper node."""
    current: Any = tree
    good: list = []
    for step in path:
        if isinstance(current, ScopeNode) and step.value == "child":
            nxt = current.child
        elif isinstance(current, ModeScopeNode) and step.value == "consequent":
            nxt = current.consequent
        elif isinstance(current, RelationNode) and step.value in ("left", "right"):
            nxt = current.left if step.value == "left" else current.right
        else:
            break
        if not isinstance(nxt, OnionNode):
            break
        current = nxt
        good.append(step)
    return NodePath(tuple(good))


def _repair(session: _Session, tree: OnionNode, report: ValidationReport) -> OnionNode:
    first = report.errors[0]
    target = _repair_target(tree, first.path)
    failing = tree
    for step in target:
        failing = getattr(
            failing,
            {"child": "child", "consequent": "consequent", "left": "left", "right": "right"}[
                step.value
            ],
        )
    prompt = session.prompt(
        "repair",
        CLAUSE=session.requirement,
        TREE=json.dumps(loose_jsonable(failing), sort_keys=True, indent=2),
        DIAGNOSTICS="\n".join(d.to_json() for d in report.errors),
    )
    fixed = session.ask(StepId.REFINE, prompt, _contract_repair)
    if fixed is None:
        return tree
    if not target.steps:
        return fixed
    return edit_node(tree, target, fixed)


def decompose(
    requirement: str,
    cfg: DecompositionConfig,
    backend: LlmBackend,
    feedback: str | None = None,
) -> tuple[OnionNode, StepTrace]:
    """Run the full two-stage decomposition with validator-driven repair.

    Returns a tree that validates with zero errors, or raises
    :class:`RepairExhausted` carrying the last diagnostics and tree.
    """
    requirement = requirement.strip()
    if not requirement:
        raise ValueError("requirement must be non-empty")
    session = _Session(cfg, backend, requirement, feedback)
    finding, clause = _extract_scope(session, requirement)
    tree = _build_root(session, finding, clause)
    for round_no in range(cfg.max_repair_rounds + 1):
        report = validate(tree)
        if report.ok:
            return tree, session.trace
        if round_no == cfg.max_repair_rounds:
            raise RepairExhausted(report.errors, tree, session.trace)
        session.round = round_no + 1
        tree = _repair(session, tree, report)


# public per-step entry points


def extract_scope(
    clause: str, backend: LlmBackend, cfg: DecompositionConfig | None = None
) -> tuple[ScopeFinding, str]:
    """Stage-I step on its own: outermost scope plus the remaining clause."""
    session = _Session(cfg or DecompositionConfig(), backend, clause)
    return _extract_scope(session, clause)


def decompose_clause(
    clause: str,
    backend: LlmBackend,
    depth_budget: int = DEFAULT_DEPTH_BUDGET,
    cfg: DecompositionConfig | None = None,
) -> OnionNode:
    """Stage-II recursion on its own."""
    if depth_budget < 1:
        raise ValueError("depth_budget must be >= 1")
    session = _Session(cfg or DecompositionConfig(), backend, clause)
    return _decompose_clause(session, clause.strip(), depth_budget)


def normalize_ap(
    clause: str, backend: LlmBackend, cfg: DecompositionConfig | None = None
) -> AtomicProposition:
    """Step-6 normalization on its own."""
    session = _Session(cfg or DecompositionConfig(), backend, clause)
    return _normalize_ap(session, clause)


def replay_trace(
    requirement: str, cfg: DecompositionConfig, trace: StepTrace
) -> OnionNode:
    """Rebuild the tree from a saved trace by replaying its raw responses."""
    from req2ltl.gateway import SequenceBackend

    tree, _ = decompose(requirement, cfg, SequenceBackend(trace.raw_responses))
    return tree
