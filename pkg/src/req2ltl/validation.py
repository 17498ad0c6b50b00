"""Machine validation of onion trees.

A depth-first pass checks structural well-formedness (arity, leaf placement,
mode-scope placement), proposition subfield compatibility, and flags
redundant constructs such as right-leaning And/Or chains or stuttered
scopes.  Findings are data, never exceptions: errors block translation,
warnings do not.  Clean trees get a canonical form with all And/Or runs
re-bracketed left-associatively and stuttered scopes collapsed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from functools import reduce
from typing import Any, Optional

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
    Step,
)

__all__ = [
    "Severity",
    "DiagnosticKind",
    "Diagnostic",
    "ValidationReport",
    "validate",
    "canonicalize",
]


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


class DiagnosticKind(Enum):
    ARITY_VIOLATION = "ArityViolation"
    LEAF_MISPLACEMENT = "LeafMisplacement"
    ILLEGAL_MODE_PLACEMENT = "IllegalModePlacement"
    MISSING_SUBFIELD = "MissingSubfield"
    CONTRADICTORY_SUBFIELDS = "ContradictorySubfields"
    ILLEGAL_SCOPE_NESTING = "IllegalScopeNesting"
    REDUNDANT_CHAIN = "RedundantChain"
    UNKNOWN_OPERATOR = "UnknownOperator"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    kind: DiagnosticKind
    path: NodePath
    message: str
    suggested_fix: Optional[str] = None

    def as_dict(self) -> dict:
        return {
            "severity": self.severity.value,
            "kind": self.kind.value,
            "path": self.path.to_strings(),
            "message": self.message,
            "suggestedFix": self.suggested_fix,
        }

    def to_json(self) -> str:
        """One JSON line, the CLI/report wire form."""
        return json.dumps(self.as_dict())


@dataclass(frozen=True)
class ValidationReport:
    diagnostics: tuple[Diagnostic, ...]
    canonical_tree: Optional[OnionNode]

    @property
    def errors(self) -> tuple[Diagnostic, ...]:
        return tuple(d for d in self.diagnostics if d.severity is Severity.ERROR)

    @property
    def warnings(self) -> tuple[Diagnostic, ...]:
        return tuple(d for d in self.diagnostics if d.severity is Severity.WARNING)

    @property
    def ok(self) -> bool:
        return not self.errors


_NUMERIC_RELS = (Rel.GT, Rel.LT, Rel.GE, Rel.LE)


def _is_number(text: str) -> bool:
    try:
        float(text)
        return True
    except (TypeError, ValueError):
        return False


class _Validator:
    def __init__(self) -> None:
        self.out: list[Diagnostic] = []

    def error(self, kind: DiagnosticKind, path: NodePath, message: str, fix: str | None = None) -> None:
        self.out.append(Diagnostic(Severity.ERROR, kind, path, message, fix))

    def warn(self, kind: DiagnosticKind, path: NodePath, message: str, fix: str | None = None) -> None:
        self.out.append(Diagnostic(Severity.WARNING, kind, path, message, fix))

    def check_ap(self, ap: AtomicProposition, path: NodePath) -> None:
        if not isinstance(ap.var, str) or not ap.var.strip():
            self.error(
                DiagnosticKind.MISSING_SUBFIELD, path,
                "proposition has no variable name",
                "fill in var with the observed quantity or signal",
            )
        if ap.rel is not Rel.NONE and ap.formula is None:
            self.error(
                DiagnosticKind.MISSING_SUBFIELD, path,
                f"relational operator {ap.rel.value!r} has no value to compare against",
                "add the compared value in formula",
            )
        if ap.rel is Rel.NONE and ap.formula is not None:
            self.error(
                DiagnosticKind.CONTRADICTORY_SUBFIELDS, path,
                "formula given without a relational operator",
                "add rel, or drop formula for a bare boolean proposition",
            )
        if ap.rel in _NUMERIC_RELS and ap.formula is not None and not _is_number(ap.formula):
            self.warn(
                DiagnosticKind.CONTRADICTORY_SUBFIELDS, path,
                f"numeric comparison {ap.rel.value!r} against non-numeric {ap.formula!r}",
                "use = / != for symbolic values",
            )

    def visit_slot(self, value: Any, path: NodePath, slot: str, parent: Any = None) -> None:
        """A position that must hold a proper node."""
        if isinstance(value, OnionNode):
            self.visit(value, path, parent)
        elif isinstance(value, AtomicProposition):
            self.error(
                DiagnosticKind.LEAF_MISPLACEMENT, path,
                f"bare atomic proposition in the {slot} position",
                "wrap it in an atomic leaf node",
            )
        else:
            self.error(
                DiagnosticKind.ARITY_VIOLATION, path,
                f"{slot} is missing or not a tree node",
                "supply a node here",
            )

    def visit(self, node: OnionNode, path: NodePath, parent: Any = None) -> None:
        if isinstance(node, AtomicNode):
            self.check_ap(node.ap, path)
            return
        if isinstance(node, ScopeNode):
            if not isinstance(node.op, ScopeOp):
                self.error(
                    DiagnosticKind.UNKNOWN_OPERATOR, path,
                    f"unknown scope operator {node.op!r}",
                    "use one of Globally, Eventually, Next, Not",
                )
            if isinstance(node.child, ScopeNode) and isinstance(node.op, ScopeOp):
                if node.op is ScopeOp.GLOBALLY and node.child.op is ScopeOp.GLOBALLY:
                    self.warn(
                        DiagnosticKind.REDUNDANT_CHAIN, path,
                        "stuttered Globally scopes",
                        "collapse to a single Globally",
                    )
                if node.op is ScopeOp.NOT and node.child.op is ScopeOp.NOT:
                    self.warn(
                        DiagnosticKind.REDUNDANT_CHAIN, path,
                        "double negation",
                        "drop both Not scopes",
                    )
            self.visit_slot(node.child, path.child(Step.CHILD), "child", parent=node)
            return
        if isinstance(node, ModeScopeNode):
            under_root_globally = (
                path.steps == (Step.CHILD,)
                and isinstance(parent, ScopeNode)
                and parent.op is ScopeOp.GLOBALLY
            )
            if not under_root_globally:
                self.error(
                    DiagnosticKind.ILLEGAL_MODE_PLACEMENT, path,
                    "mode scope is only meaningful directly under the root Globally",
                    "hoist the mode condition or rewrite it as an Implies relation",
                )
            if isinstance(node.condition, AtomicProposition):
                self.check_ap(node.condition, path.child(Step.CONDITION))
            else:
                self.error(
                    DiagnosticKind.ARITY_VIOLATION, path.child(Step.CONDITION),
                    "mode condition is missing or not an atomic proposition",
                    "supply the mode condition proposition",
                )
            self.visit_slot(node.consequent, path.child(Step.CONSEQUENT), "consequent", parent=node)
            return
        if isinstance(node, RelationNode):
            if not isinstance(node.op, RelationOp):
                self.error(
                    DiagnosticKind.UNKNOWN_OPERATOR, path,
                    f"unknown relation operator {node.op!r}",
                    "use one of And, Or, Implies, SustainedUntil, BasicPrecedence",
                )
            self.visit_slot(node.left, path.child(Step.LEFT), "left operand", parent=node)
            self.visit_slot(node.right, path.child(Step.RIGHT), "right operand", parent=node)
            return
        self.error(
            DiagnosticKind.ARITY_VIOLATION, path,
            f"unrecognised node object {type(node).__name__}",
        )

    def check_chains(self, node: OnionNode, path: NodePath, parent_op: Any) -> None:
        """Flag maximal And/Or runs that are not in left-associative form."""
        if isinstance(node, RelationNode):
            same = isinstance(node.op, RelationOp) and node.op in (RelationOp.AND, RelationOp.OR)
            if same and node.op is not parent_op and not _run_is_left_nested(node):
                self.warn(
                    DiagnosticKind.REDUNDANT_CHAIN, path,
                    f"nested {node.op.value} chain is not left-associative",
                    "re-bracket the chain left-associatively",
                )
            run_op = node.op if same else None
            if isinstance(node.left, OnionNode):
                self.check_chains(node.left, path.child(Step.LEFT), run_op)
            if isinstance(node.right, OnionNode):
                self.check_chains(node.right, path.child(Step.RIGHT), run_op)
        elif isinstance(node, ScopeNode) and isinstance(node.child, OnionNode):
            self.check_chains(node.child, path.child(Step.CHILD), None)
        elif isinstance(node, ModeScopeNode) and isinstance(node.consequent, OnionNode):
            self.check_chains(node.consequent, path.child(Step.CONSEQUENT), None)


def _run_is_left_nested(root: RelationNode) -> bool:
    op = root.op
    node: OnionNode = root
    while isinstance(node, RelationNode) and node.op is op:
        if isinstance(node.right, RelationNode) and node.right.op is op:
            return False
        node = node.left
    return True


def validate(node: OnionNode) -> ValidationReport:
    """Depth-first validation; accepts arbitrary decoded values, including
    trees a permissive decoder let through."""
    v = _Validator()
    if isinstance(node, OnionNode):
        v.visit(node, NodePath())
        v.check_chains(node, NodePath(), None)
    elif isinstance(node, AtomicProposition):
        v.error(
            DiagnosticKind.LEAF_MISPLACEMENT, NodePath(),
            "bare atomic proposition in the root position",
            "wrap it in an atomic leaf node",
        )
    else:
        v.error(DiagnosticKind.ARITY_VIOLATION, NodePath(), "document is not a tree node")
    diagnostics = tuple(v.out)
    has_errors = any(d.severity is Severity.ERROR for d in diagnostics)
    canonical = canonicalize(node) if not has_errors else None
    return ValidationReport(diagnostics, canonical)


def canonicalize(node: OnionNode) -> OnionNode:
    """Left-associative form: And/Or runs re-bracketed preserving operand
    order, stuttered Globally and paired Not scopes collapsed.  Idempotent
    and semantics-preserving; expects an error-free tree."""
    if isinstance(node, AtomicNode):
        return node
    if isinstance(node, ScopeNode):
        child = canonicalize(node.child)
        if node.op is ScopeOp.GLOBALLY and isinstance(child, ScopeNode) and child.op is ScopeOp.GLOBALLY:
            return child
        if node.op is ScopeOp.NOT and isinstance(child, ScopeNode) and child.op is ScopeOp.NOT:
            return child.child
        return ScopeNode(node.op, child)
    if isinstance(node, ModeScopeNode):
        return ModeScopeNode(node.condition, canonicalize(node.consequent))
    if isinstance(node, RelationNode):
        left, right = canonicalize(node.left), canonicalize(node.right)
        if node.op in (RelationOp.AND, RelationOp.OR):
            operands = _flatten_run(left, node.op) + _flatten_run(right, node.op)
            return reduce(lambda a, b: RelationNode(node.op, a, b), operands)
        return RelationNode(node.op, left, right)
    raise TypeError(f"not an onion node: {node!r}")


def _flatten_run(node: OnionNode, op: RelationOp) -> list[OnionNode]:
    if isinstance(node, RelationNode) and node.op is op:
        return _flatten_run(node.left, op) + _flatten_run(node.right, op)
    return [node]
