"""The onion tree: hierarchical requirement structure behind LTL synthesis.

A tree is built from four node kinds: unary scopes (Globally, Eventually,
Next, Not), mode scopes (an operating-mode condition that acts as the
antecedent of an implication under a top-level Globally), binary relations
(And, Or, Implies, SustainedUntil, BasicPrecedence), and atomic leaves.
Leaves carry a four-field proposition record: component, variable,
relational operator, and value expression.

The module owns the JSON wire format, Mermaid rendering for human review,
path-addressed editing, and a deterministic random generator for tests.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterator, Union

__all__ = [
    "Rel",
    "ScopeOp",
    "RelationOp",
    "Step",
    "AtomicProposition",
    "OnionNode",
    "ScopeNode",
    "ModeScopeNode",
    "RelationNode",
    "AtomicNode",
    "NodePath",
    "SchemaError",
    "PathError",
    "KindMismatch",
    "parse_onion_json",
    "parse_onion_loose",
    "serialize_onion",
    "render_mermaid",
    "edit_node",
    "gen_random_tree",
    "resolve_path",
    "iter_nodes",
    "node_count",
]


class Rel(Enum):
    EQ = "="
    NEQ = "!="
    GT = ">"
    LT = "<"
    GE = ">="
    LE = "<="
    NONE = "none"


class ScopeOp(Enum):
    GLOBALLY = "Globally"
    EVENTUALLY = "Eventually"
    NEXT = "Next"
    NOT = "Not"


class RelationOp(Enum):
    AND = "And"
    OR = "Or"
    IMPLIES = "Implies"
    SUSTAINED_UNTIL = "SustainedUntil"
    BASIC_PRECEDENCE = "BasicPrecedence"


class Step(Enum):
    CHILD = "child"
    LEFT = "left"
    RIGHT = "right"
    CONDITION = "condition"
    CONSEQUENT = "consequent"


@dataclass(frozen=True)
class AtomicProposition:
    """Leaf predicate: ``var`` optionally compared to ``formula`` via ``rel``,
    optionally namespaced by a component identifier."""

    var: str
    rel: Rel = Rel.NONE
    formula: str | None = None
    com: str | None = None
    source_text: str | None = None

    def render(self) -> str:
        """Flattened predicate text: bare variable, ``com.var`` prefix, and
        ``var REL formula`` when a comparison is present."""
        base = f"{self.com}.{self.var}" if self.com else self.var
        if self.rel is Rel.NONE:
            return base
        return f"{base} {self.rel.value} {self.formula}"


@dataclass(frozen=True)
class OnionNode:
    """Base class for tree nodes."""


@dataclass(frozen=True)
class ScopeNode(OnionNode):
    op: ScopeOp
    child: OnionNode


@dataclass(frozen=True)
class ModeScopeNode(OnionNode):
    condition: AtomicProposition
    consequent: OnionNode


@dataclass(frozen=True)
class RelationNode(OnionNode):
    op: RelationOp
    left: OnionNode
    right: OnionNode


@dataclass(frozen=True)
class AtomicNode(OnionNode):
    ap: AtomicProposition


@dataclass(frozen=True)
class NodePath:
    """Address of a node (or slot) as steps from the root."""

    steps: tuple[Step, ...] = ()

    @classmethod
    def of(cls, *steps: Step) -> "NodePath":
        return cls(tuple(steps))

    @classmethod
    def from_strings(cls, items: list[str]) -> "NodePath":
        try:
            return cls(tuple(Step(s.lower()) for s in items))
        except ValueError as exc:
            raise PathError(f"unknown path step in {items!r}") from exc

    def to_strings(self) -> list[str]:
        return [s.value for s in self.steps]

    def child(self, step: Step) -> "NodePath":
        return NodePath(self.steps + (step,))

    def __iter__(self) -> Iterator[Step]:
        return iter(self.steps)

    def __len__(self) -> int:
        return len(self.steps)


class SchemaError(ValueError):
    """Rejected document; ``path`` is a JSON pointer to the offending value."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path or '/'}: {reason}")
        self.path = path
        self.reason = reason


class PathError(LookupError):
    pass


class KindMismatch(TypeError):
    pass


# ---------------------------------------------------------------------------
# JSON wire format

_ATOMIC_FIELDS = {"type", "var", "rel", "formula", "com", "text"}
_REL_ALIASES = {r.value: r for r in Rel} | {r.name.lower(): r for r in Rel}


def _decode_rel(raw: Any, path: str) -> Rel:
    if not isinstance(raw, str) or raw.lower() not in _REL_ALIASES:
        raise SchemaError(path, f"unknown relational operator {raw!r}")
    return _REL_ALIASES[raw.lower()]


def _decode_enum(cls, raw: Any, path: str):
    if isinstance(raw, str):
        for member in cls:
            if member.value.lower() == raw.lower():
                return member
    raise SchemaError(path, f"unknown operator {raw!r}")


def _decode_atomic(obj: dict, path: str, strict: bool) -> AtomicProposition:
    if strict:
        extra = set(obj) - _ATOMIC_FIELDS
        if extra:
            raise SchemaError(path, f"unknown fields {sorted(extra)}")
    var = obj.get("var")
    if strict and (not isinstance(var, str) or not var.strip()):
        raise SchemaError(path + "/var", "var must be a non-empty string")
    rel = _decode_rel(obj["rel"], path + "/rel") if "rel" in obj else Rel.NONE
    formula = obj.get("formula")
    if strict:
        if rel is not Rel.NONE and formula is None:
            raise SchemaError(path + "/formula", "formula is required when rel is present")
        if rel is Rel.NONE and formula is not None:
            raise SchemaError(path + "/formula", "formula is only allowed alongside rel")
    return AtomicProposition(
        var=var if isinstance(var, str) else "",
        rel=rel,
        formula=str(formula) if formula is not None else None,
        com=obj.get("com"),
        source_text=obj.get("text"),
    )


def _decode_node(obj: Any, path: str, strict: bool) -> OnionNode | None:
    if obj is None and not strict:
        return None
    if not isinstance(obj, dict):
        raise SchemaError(path, f"expected an object, got {type(obj).__name__}")
    kind = obj.get("type")
    if kind == "atomic":
        return AtomicNode(_decode_atomic(obj, path, strict))
    if kind == "scope":
        if strict and (extra := set(obj) - {"type", "op", "child"}):
            raise SchemaError(path, f"unknown fields {sorted(extra)}")
        if strict and "child" not in obj:
            raise SchemaError(path + "/child", "scope nodes need exactly one child")
        try:
            op: Any = _decode_enum(ScopeOp, obj.get("op"), path + "/op")
        except SchemaError:
            if strict:
                raise
            op = obj.get("op")
        return ScopeNode(op, _decode_node(obj.get("child"), path + "/child", strict))
    if kind == "mode":
        if strict and (extra := set(obj) - {"type", "condition", "consequent"}):
            raise SchemaError(path, f"unknown fields {sorted(extra)}")
        cond_obj = obj.get("condition")
        if not isinstance(cond_obj, dict) or cond_obj.get("type") != "atomic":
            if strict:
                raise SchemaError(path + "/condition", "condition must be an atomic object")
            condition = AtomicProposition(var="")
        else:
            condition = _decode_atomic(cond_obj, path + "/condition", strict)
        if strict and "consequent" not in obj:
            raise SchemaError(path + "/consequent", "mode nodes need a consequent")
        return ModeScopeNode(condition, _decode_node(obj.get("consequent"), path + "/consequent", strict))
    if kind == "relation":
        if strict and (extra := set(obj) - {"type", "op", "left", "right"}):
            raise SchemaError(path, f"unknown fields {sorted(extra)}")
        for side in ("left", "right"):
            if strict and side not in obj:
                raise SchemaError(f"{path}/{side}", "relation nodes need two children")
        try:
            op = _decode_enum(RelationOp, obj.get("op"), path + "/op")
        except SchemaError:
            if strict:
                raise
            op = obj.get("op")
        return RelationNode(
            op,
            _decode_node(obj.get("left"), path + "/left", strict),
            _decode_node(obj.get("right"), path + "/right", strict),
        )
    raise SchemaError(path + "/type", f"unknown node type {kind!r}")


def parse_onion_json(text: str) -> OnionNode:
    """Decode the JSON wire format strictly: unknown fields rejected, enum
    spellings matched case-insensitively, arity enforced."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON: {exc}") from exc
    return _decode_node(data, "", strict=True)


def parse_onion_loose(data: Union[str, dict]) -> OnionNode | None:
    """Permissive decode for machine-produced trees under repair: arity
    violations and operator typos come through as malformed nodes so the
    validator can report them instead of the decoder crashing."""
    if isinstance(data, str):
        data = json.loads(data)
    return _decode_node(data, "", strict=False)


def _encode(node: OnionNode) -> dict:
    if isinstance(node, AtomicNode):
        ap = node.ap
        out: dict[str, Any] = {"type": "atomic", "var": ap.var}
        if ap.rel is not Rel.NONE:
            out["rel"] = ap.rel.value
        if ap.formula is not None:
            out["formula"] = ap.formula
        if ap.com is not None:
            out["com"] = ap.com
        if ap.source_text is not None:
            out["text"] = ap.source_text
        return out
    if isinstance(node, ScopeNode):
        return {"type": "scope", "op": node.op.value, "child": _encode(node.child)}
    if isinstance(node, ModeScopeNode):
        cond: dict[str, Any] = {"type": "atomic", "var": node.condition.var}
        if node.condition.rel is not Rel.NONE:
            cond["rel"] = node.condition.rel.value
        if node.condition.formula is not None:
            cond["formula"] = node.condition.formula
        if node.condition.com is not None:
            cond["com"] = node.condition.com
        if node.condition.source_text is not None:
            cond["text"] = node.condition.source_text
        return {"type": "mode", "condition": cond, "consequent": _encode(node.consequent)}
    if isinstance(node, RelationNode):
        return {
            "type": "relation",
            "op": node.op.value,
            "left": _encode(node.left),
            "right": _encode(node.right),
        }
    raise TypeError(f"not an onion node: {node!r}")


def serialize_onion(node: OnionNode) -> str:
    """Canonical JSON: sorted keys, two-space indent; a fixpoint of
    ``serialize . parse``."""
    return json.dumps(_encode(node), sort_keys=True, indent=2)


def to_jsonable(node: OnionNode) -> dict:
    """Plain-dict form of the wire format (for embedding in larger payloads)."""
    return _encode(node)


def loose_jsonable(node: Any) -> Any:
    """Best-effort dict form that tolerates malformed trees (missing children,
    raw operator strings); pairs with :func:`parse_onion_loose`."""
    if node is None:
        return None
    if isinstance(node, AtomicProposition):
        node = AtomicNode(node)
    if isinstance(node, AtomicNode):
        ap = node.ap
        out: dict[str, Any] = {"type": "atomic", "var": ap.var}
        if isinstance(ap.rel, Rel) and ap.rel is not Rel.NONE:
            out["rel"] = ap.rel.value
        if ap.formula is not None:
            out["formula"] = ap.formula
        if ap.com is not None:
            out["com"] = ap.com
        return out
    if isinstance(node, ScopeNode):
        op = node.op.value if isinstance(node.op, ScopeOp) else str(node.op)
        return {"type": "scope", "op": op, "child": loose_jsonable(node.child)}
    if isinstance(node, ModeScopeNode):
        return {
            "type": "mode",
            "condition": loose_jsonable(node.condition),
            "consequent": loose_jsonable(node.consequent),
        }
    if isinstance(node, RelationNode):
        op = node.op.value if isinstance(node.op, RelationOp) else str(node.op)
        return {
            "type": "relation",
            "op": op,
            "left": loose_jsonable(node.left),
            "right": loose_jsonable(node.right),
        }
    return {"type": "unknown", "repr": repr(node)}


# ---------------------------------------------------------------------------
# Traversal and editing


def iter_nodes(node: OnionNode, path: NodePath = NodePath()) -> Iterator[tuple[NodePath, OnionNode]]:
    """Depth-first (pre-order) walk yielding (path, node) pairs."""
    yield path, node
    if isinstance(node, ScopeNode) and isinstance(node.child, OnionNode):
        yield from iter_nodes(node.child, path.child(Step.CHILD))
    elif isinstance(node, ModeScopeNode) and isinstance(node.consequent, OnionNode):
        yield from iter_nodes(node.consequent, path.child(Step.CONSEQUENT))
    elif isinstance(node, RelationNode):
        if isinstance(node.left, OnionNode):
            yield from iter_nodes(node.left, path.child(Step.LEFT))
        if isinstance(node.right, OnionNode):
            yield from iter_nodes(node.right, path.child(Step.RIGHT))


def node_count(node: OnionNode) -> int:
    return sum(1 for _ in iter_nodes(node))


def resolve_path(node: OnionNode, path: NodePath) -> Any:
    """Value at ``path``: a node, or an atomic proposition for condition slots.
    Raises :class:`PathError` when a step does not match the node kind."""
    current: Any = node
    for i, step in enumerate(path):
        where = "/".join(s.value for s in list(path)[: i + 1])
        if isinstance(current, ScopeNode) and step is Step.CHILD:
            current = current.child
        elif isinstance(current, ModeScopeNode) and step is Step.CONSEQUENT:
            current = current.consequent
        elif isinstance(current, ModeScopeNode) and step is Step.CONDITION:
            current = current.condition
        elif isinstance(current, RelationNode) and step is Step.LEFT:
            current = current.left
        elif isinstance(current, RelationNode) and step is Step.RIGHT:
            current = current.right
        else:
            raise PathError(f"step {step.value!r} does not resolve at {where!r}")
    return current


def edit_node(
    node: OnionNode,
    path: NodePath,
    replacement: Union[OnionNode, ScopeOp, RelationOp, AtomicProposition],
) -> OnionNode:
    """New tree with the addressed node's operator or subtree replaced.

    Operator replacements must preserve the node kind (scope op on a scope
    node, relation op on a relation node); everything off the path is shared
    structurally unchanged.
    """
    resolve_path(node, path)  # surface PathError before rebuilding

    def rebuild(current: Any, steps: tuple[Step, ...]) -> Any:
        if not steps:
            return _apply(current, replacement)
        step, rest = steps[0], steps[1:]
        if isinstance(current, ScopeNode) and step is Step.CHILD:
            return ScopeNode(current.op, rebuild(current.child, rest))
        if isinstance(current, ModeScopeNode) and step is Step.CONSEQUENT:
            return ModeScopeNode(current.condition, rebuild(current.consequent, rest))
        if isinstance(current, ModeScopeNode) and step is Step.CONDITION:
            return ModeScopeNode(rebuild(current.condition, rest), current.consequent)
        if isinstance(current, RelationNode) and step is Step.LEFT:
            return RelationNode(current.op, rebuild(current.left, rest), current.right)
        if isinstance(current, RelationNode) and step is Step.RIGHT:
            return RelationNode(current.op, current.left, rebuild(current.right, rest))
        raise PathError(f"step {step.value!r} does not resolve")

    return rebuild(node, path.steps)


def _apply(target: Any, replacement: Any) -> Any:
    if isinstance(replacement, ScopeOp):
        if not isinstance(target, ScopeNode):
            raise KindMismatch("a scope operator can only replace a scope node's operator")
        return ScopeNode(replacement, target.child)
    if isinstance(replacement, RelationOp):
        if not isinstance(target, RelationNode):
            raise KindMismatch("a relation operator can only replace a relation node's operator")
        return RelationNode(replacement, target.left, target.right)
    if isinstance(target, AtomicProposition):
        if isinstance(replacement, AtomicNode):
            return replacement.ap
        if isinstance(replacement, AtomicProposition):
            return replacement
        raise KindMismatch("a condition slot takes an atomic proposition")
    if isinstance(replacement, OnionNode):
        return replacement
    raise KindMismatch(f"cannot place {type(replacement).__name__} at a node position")


# ---------------------------------------------------------------------------
# Mermaid rendering


def _node_id(path: NodePath) -> str:
    digest = hashlib.sha1("/".join(path.to_strings()).encode()).hexdigest()
    return "n" + digest[:8]


def _label(node: OnionNode) -> str:
    if isinstance(node, ScopeNode):
        return node.op.value if isinstance(node.op, ScopeOp) else str(node.op)
    if isinstance(node, ModeScopeNode):
        return f"Mode: {node.condition.render()}"
    if isinstance(node, RelationNode):
        return node.op.value if isinstance(node.op, RelationOp) else str(node.op)
    if isinstance(node, AtomicNode):
        return node.ap.render()
    return type(node).__name__


def render_mermaid(node: OnionNode) -> str:
    """``graph TD`` document: one statement per node, one edge per link;
    node ids are derived from tree paths so re-renders are stable."""
    lines = ["graph TD"]
    pairs = list(iter_nodes(node))
    for path, n in pairs:
        label = _label(n).replace('"', "#quot;")
        lines.append(f'    {_node_id(path)}["{label}"]')
    for path, n in pairs:
        for step in _child_steps(n):
            lines.append(f"    {_node_id(path)} --> {_node_id(path.child(step))}")
    return "\n".join(lines) + "\n"


def _child_steps(node: OnionNode) -> tuple[Step, ...]:
    if isinstance(node, ScopeNode) and isinstance(node.child, OnionNode):
        return (Step.CHILD,)
    if isinstance(node, ModeScopeNode) and isinstance(node.consequent, OnionNode):
        return (Step.CONSEQUENT,)
    if isinstance(node, RelationNode):
        steps = []
        if isinstance(node.left, OnionNode):
            steps.append(Step.LEFT)
        if isinstance(node.right, OnionNode):
            steps.append(Step.RIGHT)
        return tuple(steps)
    return ()


# ---------------------------------------------------------------------------
# Random trees

_VOCAB_BARE = ("red", "green", "yellow", "p", "q", "busy")
_VOCAB_COMPARISONS = (
    ("temperature", Rel.GT, "50"),
    ("warning", Rel.EQ, "ON"),
    ("mode", Rel.EQ, "valid"),
    ("speed", Rel.LE, "120"),
    ("count", Rel.NEQ, "0"),
    ("angle", Rel.LT, "2"),
)
_VOCAB_COMS = (None, None, None, "INS", "GPS")


def gen_random_tree(seed: int, max_depth: int) -> OnionNode:
    """Deterministic-in-seed well-formed tree of depth <= ``max_depth``.

    Leaves draw from a per-tree pool of at most three distinct propositions,
    which keeps translations inside the bounded-equivalence AP guard.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    rng = random.Random(seed)
    pool = [_random_ap(rng) for _ in range(rng.randint(1, 3))]

    def leaf() -> AtomicNode:
        return AtomicNode(rng.choice(pool))

    def subtree(depth: int) -> OnionNode:
        if depth <= 1:
            return leaf()
        roll = rng.random()
        if roll < 0.35:
            op = rng.choice(list(ScopeOp))
            return ScopeNode(op, subtree(depth - 1))
        if roll < 0.85:
            op = rng.choice(list(RelationOp))
            return RelationNode(op, subtree(depth - 1), subtree(depth - 1))
        return leaf()

    if max_depth >= 3 and rng.random() < 0.3:
        # Condition drawn from the same pool so the distinct-AP budget holds.
        return ScopeNode(ScopeOp.GLOBALLY, ModeScopeNode(rng.choice(pool), subtree(max_depth - 2)))
    return subtree(max_depth)


def _random_ap(rng: random.Random) -> AtomicProposition:
    com = rng.choice(_VOCAB_COMS)
    if rng.random() < 0.5:
        return AtomicProposition(var=rng.choice(_VOCAB_BARE), com=com)
    var, rel, formula = rng.choice(_VOCAB_COMPARISONS)
    return AtomicProposition(var=var, rel=rel, formula=formula, com=com)
