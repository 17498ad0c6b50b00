"""Deterministic rule-based synthesis of LTL from validated onion trees.

The mapping is total on error-free trees and structure-preserving: scopes
become unary operators, relations become binary operators, leaves become
atoms rendered from their subfields.  Mode scopes become the antecedent of
an implication; the enclosing Globally comes from the tree shape.  No
simplification is applied.
"""

from __future__ import annotations

from req2ltl.ltl import (
    And,
    Atom,
    Eventually,
    Globally,
    Implies,
    LtlFormula,
    Next,
    Not,
    Or,
    Until,
)
from req2ltl.onion import (
    AtomicNode,
    AtomicProposition,
    ModeScopeNode,
    OnionNode,
    RelationNode,
    RelationOp,
    ScopeNode,
    ScopeOp,
)
from req2ltl.validation import validate

__all__ = ["NotValidated", "translate", "translate_atomic"]


class NotValidated(ValueError):
    """Raised when a tree carrying error diagnostics reaches the translator."""

    def __init__(self, diagnostics):
        lines = "; ".join(d.message for d in diagnostics)
        super().__init__(f"tree failed validation: {lines}")
        self.diagnostics = diagnostics


_SCOPE_MAP = {
    ScopeOp.GLOBALLY: Globally,
    ScopeOp.EVENTUALLY: Eventually,
    ScopeOp.NEXT: Next,
    ScopeOp.NOT: Not,
}

_RELATION_MAP = {
    RelationOp.AND: And,
    RelationOp.OR: Or,
    RelationOp.IMPLIES: Implies,
    RelationOp.SUSTAINED_UNTIL: Until,
}


def translate_atomic(ap: AtomicProposition) -> LtlFormula:
    """Atom whose text is the flattened predicate rendering of ``ap``."""
    return Atom(ap.render())


def _tr(node: OnionNode) -> LtlFormula:
    if isinstance(node, AtomicNode):
        return translate_atomic(node.ap)
    if isinstance(node, ScopeNode):
        return _SCOPE_MAP[node.op](_tr(node.child))
    if isinstance(node, ModeScopeNode):
        return Implies(translate_atomic(node.condition), _tr(node.consequent))
    if isinstance(node, RelationNode):
        if node.op is RelationOp.BASIC_PRECEDENCE:
            return Eventually(And(_tr(node.left), Eventually(_tr(node.right))))
        return _RELATION_MAP[node.op](_tr(node.left), _tr(node.right))
    raise TypeError(f"not an onion node: {node!r}")


def translate(node: OnionNode) -> LtlFormula:
    """Post-order translation; defensively re-validates and raises
    :class:`NotValidated` on a tree with error diagnostics."""
    report = validate(node)
    if not report.ok:
        raise NotValidated(report.errors)
    return _tr(node)
