from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from req2ltl.ltl import Atom, parse_ltl, print_ltl
from req2ltl.onion import (
    AtomicNode,
    AtomicProposition,
    ModeScopeNode,
    Rel,
    RelationNode,
    RelationOp,
    ScopeNode,
    ScopeOp,
    gen_random_tree,
    iter_nodes,
    parse_onion_json,
)
from req2ltl.translate import NotValidated, translate, translate_atomic
from req2ltl.validation import canonicalize

FIXTURES = Path(__file__).parent / "fixtures" / "trees"

GOLDEN = {
    "tableI_01.json": "G (red -> X !green)",
    "tableI_02.json": "G (red -> (red U yellow))",
    "tableI_03.json": "G (b -> X ((c U a) | G c))",
    "tableI_04.json": "G (a -> (c U b))",
    "tableI_05.json": "F green & G !landmark1",
    "tableI_06.json": "F (landmark1 & F red)",
}


def load_tree(name):
    return parse_onion_json((FIXTURES / name).read_text())


class TestGolden:
    @pytest.mark.parametrize("fixture,expected", sorted(GOLDEN.items()))
    def test_traffic_and_navigation_suite(self, fixture, expected):
        formula = translate(load_tree(fixture))
        assert print_ltl(formula) == expected
        assert formula == parse_ltl(expected)

    def test_valid_mode_example(self):
        formula = translate(load_tree("valid_mode_warning.json"))
        assert print_ltl(formula) == "G (workmode = valid -> F (temperature > 50 -> warning = ON))"

    def test_dual_inu_nesting(self):
        formula = translate(load_tree("req02_dual_inu.json"))
        assert print_ltl(formula) == (
            "G (Dual_INU_Active -> (weightedAvg U (Single_Module | GPS_Restored)))"
        )

    def test_nav_output_eventuality(self):
        formula = translate(load_tree("req01_nav_output.json"))
        assert print_ltl(formula) == (
            "G (valid_mode -> F (((output = pure_inertial | output = gps_aided)"
            " | output = star_aided) | output = integrated))"
        )

    def test_waypoint_before_repair(self):
        formula = translate(load_tree("req04_waypoint.json"))
        assert print_ltl(formula) == (
            "G (WaypointCmd = True -> (F HeadingFun = True & F DevAngleLow < 2))"
        )

    def test_basic_precedence_image(self):
        tree = RelationNode(
            RelationOp.BASIC_PRECEDENCE,
            AtomicNode(AtomicProposition("landmark1")),
            AtomicNode(AtomicProposition("red")),
        )
        assert print_ltl(translate(tree)) == "F (landmark1 & F red)"


class TestAtomRendering:
    def test_bare_var(self):
        assert translate_atomic(AtomicProposition("red")) == Atom("red")

    def test_comparison(self):
        got = translate_atomic(AtomicProposition("temperature", Rel.GT, "50"))
        assert got == Atom("temperature > 50")

    def test_component_prefix_round_trips(self):
        got = translate_atomic(AtomicProposition("mode", Rel.EQ, "valid", com="INS"))
        assert got == Atom("INS.mode = valid")
        assert parse_ltl(got.text) == got


class TestContract:
    def test_rejects_invalid_tree(self):
        broken = RelationNode(RelationOp.AND, AtomicNode(AtomicProposition("p")), None)
        with pytest.raises(NotValidated):
            translate(broken)

    def test_mode_without_globally_rejected(self):
        tree = ScopeNode(ScopeOp.EVENTUALLY,
                         ModeScopeNode(AtomicProposition("m"), AtomicNode(AtomicProposition("p"))))
        with pytest.raises(NotValidated):
            translate(tree)

    @given(st.integers(min_value=0, max_value=5000))
    @settings(max_examples=300)
    def test_total_and_deterministic_on_generated_trees(self, seed):
        tree = gen_random_tree(seed, 6)
        first = translate(tree)
        second = translate(tree)
        assert first == second
        assert parse_ltl(print_ltl(first)) == first

    @given(st.integers(min_value=0, max_value=3000))
    @settings(max_examples=150)
    def test_structure_preserved(self, seed):
        tree = gen_random_tree(seed, 6)
        assert _formula_size(translate(tree)) == _expected_size(tree)

    @given(st.integers(min_value=0, max_value=500))
    @settings(max_examples=50, deadline=None)
    def test_canonicalization_commutes_semantically(self, seed):
        from req2ltl.ltl import bounded_equiv

        tree = gen_random_tree(seed, 5)
        assert bounded_equiv(translate(tree), translate(canonicalize(tree)))


def _formula_size(formula) -> int:
    from req2ltl.ltl import subformulas

    count = 0
    stack = [formula]
    while stack:
        node = stack.pop()
        count += 1
        for attr in ("child", "left", "right"):
            value = getattr(node, attr, None)
            if value is not None:
                stack.append(value)
    return count


def _expected_size(tree) -> int:
    # operator mapping is bijective except the two composite images:
    # a mode scope becomes Implies + condition atom, basic precedence
    # becomes F(l & F r).
    total = 0
    for _, node in iter_nodes(tree):
        if isinstance(node, ModeScopeNode):
            total += 2
        elif isinstance(node, RelationNode) and node.op is RelationOp.BASIC_PRECEDENCE:
            total += 3
        else:
            total += 1
    return total
