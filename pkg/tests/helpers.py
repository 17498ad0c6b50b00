"""Shared test utilities: formula strategies, a brute-force lasso oracle,
and the single-corruption mutation catalog for the validator suite."""

from __future__ import annotations

import itertools
from dataclasses import replace

from hypothesis import strategies as st

from req2ltl.ltl import (
    And,
    Atom,
    Eventually,
    Globally,
    Implies,
    LassoTrace,
    Next,
    Not,
    Or,
    Until,
    eval_lasso,
)
from req2ltl.onion import (
    AtomicNode,
    AtomicProposition,
    ModeScopeNode,
    Rel,
    RelationNode,
    ScopeNode,
    ScopeOp,
    edit_node,
    iter_nodes,
)

UNARY_CTORS = (Not, Next, Eventually, Globally)
BINARY_CTORS = (And, Or, Implies, Until)


def formulas(atom_names=("p", "q", "r"), max_depth=8):
    """Hypothesis strategy for random formula ASTs over ``atom_names``."""
    atoms = st.sampled_from(atom_names).map(Atom)

    def extend(children):
        unary = st.builds(
            lambda ctor, c: ctor(c), st.sampled_from(UNARY_CTORS), children
        )
        binary = st.builds(
            lambda ctor, a, b: ctor(a, b), st.sampled_from(BINARY_CTORS), children, children
        )
        return unary | binary

    return st.recursive(atoms, extend, max_leaves=2 ** (max_depth - 1))


def all_lassos(aps, max_prefix, max_period):
    """Every lasso over ``aps`` within the given shape bounds."""
    aps = sorted(aps)
    states = [dict(zip(aps, bits)) for bits in itertools.product((False, True), repeat=len(aps))]
    for p_len in range(max_prefix + 1):
        for q_len in range(1, max_period + 1):
            for word in itertools.product(states, repeat=p_len + q_len):
                yield LassoTrace(tuple(word[:p_len]), tuple(word[p_len:]))


def brute_equiv(f, g, aps, max_prefix, max_period):
    """Reference oracle: agreement of ``f`` and ``g`` at position 0 on every
    explicitly enumerated lasso."""
    return all(
        eval_lasso(f, t, 0) == eval_lasso(g, t, 0)
        for t in all_lassos(aps, max_prefix, max_period)
    )


MUTATION_KINDS = ("drop_child", "misplace_ap", "mode_under_eventually", "drop_formula")


def mutate(tree, kind, rng):
    """One corruption from the mutation catalog, or None when the tree has no
    site for it; returns (mutant, path of the corrupted region)."""
    paths = list(iter_nodes(tree))
    if kind == "drop_child":
        internal = [(p, n) for p, n in paths if isinstance(n, (ScopeNode, RelationNode))]
        if not internal:
            return None
        path, node = rng.choice(internal)
        if isinstance(node, ScopeNode):
            broken = ScopeNode(node.op, None)
        else:
            broken = RelationNode(node.op, node.left, None)
        return edit_node(tree, path, broken), path
    if kind == "misplace_ap":
        scopes = [(p, n) for p, n in paths if isinstance(n, ScopeNode)]
        if not scopes:
            return None
        path, node = rng.choice(scopes)
        return edit_node(tree, path, ScopeNode(node.op, AtomicProposition("stray"))), path
    if kind == "mode_under_eventually":
        path, node = rng.choice(paths)
        wrapped = ScopeNode(
            ScopeOp.EVENTUALLY, ModeScopeNode(AtomicProposition("m"), node)
        )
        return edit_node(tree, path, wrapped), path
    if kind == "drop_formula":
        leaves = [(p, n) for p, n in paths if isinstance(n, AtomicNode)]
        if not leaves:
            return None
        path, node = rng.choice(leaves)
        broken_ap = replace(node.ap, rel=Rel.GT, formula=None)
        return edit_node(tree, path, AtomicNode(broken_ap)), path
    raise ValueError(kind)
