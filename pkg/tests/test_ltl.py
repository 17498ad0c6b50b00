import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import brute_equiv, formulas
from req2ltl.ltl import (
    And,
    Atom,
    Eventually,
    Globally,
    Implies,
    LassoTrace,
    LtlSyntaxError,
    MissingPlaceholder,
    Next,
    Not,
    Or,
    TooManyAPs,
    UnknownAtom,
    Until,
    bounded_equiv,
    collect_aps,
    eval_lasso,
    normalize_atom_text,
    parse_ltl,
    print_ltl,
    print_tokens,
    substitute_placeholders,
)


class TestParse:
    def test_traffic_light_next(self):
        assert parse_ltl("G (red -> X !green)") == Globally(
            Implies(Atom("red"), Next(Not(Atom("green"))))
        )

    def test_single_atom(self):
        assert parse_ltl("p") == Atom("p")

    def test_until_is_left_associative(self):
        # Reference grammar table: U chains group to the left.
        a, b, c = Atom("a"), Atom("b"), Atom("c")
        assert parse_ltl("a U b U c") == Until(Until(a, b), c)

    def test_implies_is_right_associative(self):
        a, b, c = Atom("a"), Atom("b"), Atom("c")
        assert parse_ltl("a -> b -> c") == Implies(a, Implies(b, c))

    def test_and_or_left_associative(self):
        a, b, c = Atom("a"), Atom("b"), Atom("c")
        assert parse_ltl("a & b & c") == And(And(a, b), c)
        assert parse_ltl("a | b | c") == Or(Or(a, b), c)

    def test_precedence_ladder(self):
        # !/X/F/G bind tighter than U, then &, then |, then ->.
        got = parse_ltl("a -> b | c & d U X e")
        want = Implies(
            Atom("a"), Or(Atom("b"), And(Atom("c"), Until(Atom("d"), Next(Atom("e")))))
        )
        assert got == want

    @pytest.mark.parametrize(
        "variant",
        ["G(red -> X !green)", "G (red → X ¬green)", "G (red -> X ! green)"],
    )
    def test_alternate_spellings(self, variant):
        assert parse_ltl(variant) == parse_ltl("G (red -> X !green)")

    def test_double_symbol_connectives(self):
        assert parse_ltl("a && b") == And(Atom("a"), Atom("b"))
        assert parse_ltl("a || b") == Or(Atom("a"), Atom("b"))

    def test_relational_atoms(self):
        assert parse_ltl("temperature > 50") == Atom("temperature > 50")
        assert parse_ltl("temperature>50") == Atom("temperature > 50")
        assert parse_ltl("INS.mode = valid") == Atom("INS.mode = valid")
        assert parse_ltl("x != -3") == Atom("x != -3")

    def test_relational_atom_binds_before_until(self):
        got = parse_ltl("a > 1 U b <= 2")
        assert got == Until(Atom("a > 1"), Atom("b <= 2"))

    @pytest.mark.parametrize(
        "bad", ["", "G (", "a ->", "a b", "(a U )", "a > ", "a &", "? p"]
    )
    def test_syntax_errors(self, bad):
        with pytest.raises(LtlSyntaxError) as exc:
            parse_ltl(bad)
        assert exc.value.offset >= 0
        assert exc.value.expected

    def test_error_reports_offset(self):
        with pytest.raises(LtlSyntaxError) as exc:
            parse_ltl("G (red -> )")
        assert exc.value.offset == 10


class TestPrint:
    def test_sustained_until_grouped(self):
        f = Globally(Implies(Atom("red"), Until(Atom("red"), Atom("yellow"))))
        assert print_ltl(f) == "G (red -> (red U yellow))"

    def test_atom(self):
        assert print_ltl(Atom("p")) == "p"

    def test_unary_operands_stay_bare(self):
        f = And(Eventually(Atom("green")), Globally(Not(Atom("lm1"))))
        text = print_ltl(f)
        assert text == "F green & G !lm1"
        assert parse_ltl(text) == f

    def test_canonical_spelling(self):
        f = parse_ltl("¬a ∧ (b ∨ c) → X d")
        assert print_ltl(f) == "(!a & (b | c)) -> X d"

    @given(formulas())
    @settings(max_examples=200)
    def test_round_trip(self, f):
        assert parse_ltl(print_ltl(f)) == f

    def test_token_stream_matches_text(self):
        f = parse_ltl("G (red -> (red U yellow))")
        assert print_tokens(f) == ["G", "(", "red", "->", "(", "red", "U", "yellow", ")", ")"]


class TestAtoms:
    def test_collect_traffic_light(self):
        assert collect_aps(parse_ltl("G (red -> X !green)")) == {"red", "green"}

    def test_collect_single(self):
        assert collect_aps(Atom("p")) == {"p"}

    def test_collect_collapses_duplicates(self):
        assert collect_aps(parse_ltl("F g & G !g")) == {"g"}

    def test_normalize_atom_text(self):
        assert normalize_atom_text("  temperature   >  50 ") == "temperature > 50"
        assert normalize_atom_text("red") == "red"
        assert normalize_atom_text("a  b") == "a b"


class TestPlaceholders:
    def test_substitution(self):
        f = parse_ltl("G (Prop1 -> X !Prop2)")
        got = substitute_placeholders(f, {"Prop1": "red", "Prop2": "green"})
        assert got == parse_ltl("G (red -> X !green)")

    def test_identity_without_placeholders(self):
        f = parse_ltl("G (red -> X !green)")
        assert substitute_placeholders(f, {}) == f

    def test_missing_placeholder(self):
        with pytest.raises(MissingPlaceholder) as exc:
            substitute_placeholders(parse_ltl("F Prop1"), {"Prop2": "x"})
        assert exc.value.name == "Prop1"

    @given(formulas(atom_names=("Prop1", "Prop2", "Prop3"), max_depth=6))
    @settings(max_examples=100)
    def test_ap_image(self, f):
        mapping = {"Prop1": "red", "Prop2": "green", "Prop3": "yellow"}
        got = collect_aps(substitute_placeholders(f, mapping))
        assert got == {mapping[a] for a in collect_aps(f)}


class TestEvalLasso:
    def test_globally_true_loop(self):
        t = LassoTrace((), ({"p": True},))
        assert eval_lasso(parse_ltl("G p"), t, 0) is True

    def test_until_hand_unrolled(self):
        # pos 0: q false but p holds; pos 1 (loop): q true => p U q holds.
        t = LassoTrace(({"p": True, "q": False},), ({"p": False, "q": True},))
        assert eval_lasso(parse_ltl("p U q"), t, 0) is True

    def test_next(self):
        t = LassoTrace(({"p": False}, {"p": True}), ({"p": False},))
        assert eval_lasso(parse_ltl("X p"), t, 0) is True

    def test_globally_false_when_loop_flips(self):
        t = LassoTrace(({"p": True},), ({"p": True}, {"p": False}))
        assert eval_lasso(parse_ltl("G p"), t, 0) is False

    def test_eventually_only_in_prefix(self):
        # F p at a position past the only p-state must be false.
        t = LassoTrace(({"p": True}, {"p": False}), ({"p": False},))
        assert eval_lasso(parse_ltl("F p"), t, 0) is True
        assert eval_lasso(parse_ltl("F p"), t, 1) is False

    def test_unknown_atom(self):
        t = LassoTrace((), ({"p": True},))
        with pytest.raises(UnknownAtom):
            eval_lasso(parse_ltl("q"), t, 0)

    def test_position_out_of_range(self):
        t = LassoTrace((), ({"p": True},))
        with pytest.raises(IndexError):
            eval_lasso(parse_ltl("p"), t, 1)

    def test_period_must_be_nonempty(self):
        with pytest.raises(ValueError):
            LassoTrace(({"p": True},), ())

    def test_keysets_must_agree(self):
        with pytest.raises(ValueError):
            LassoTrace(({"p": True},), ({"q": True},))

    @given(
        formulas(atom_names=("p", "q"), max_depth=4),
        st.lists(st.tuples(st.booleans(), st.booleans()), min_size=0, max_size=3),
        st.lists(st.tuples(st.booleans(), st.booleans()), min_size=1, max_size=3),
        st.integers(min_value=0, max_value=5),
    )
    @settings(max_examples=150)
    def test_loop_positions_are_stable(self, f, prefix, period, k):
        t = LassoTrace(
            tuple({"p": a, "q": b} for a, b in prefix),
            tuple({"p": a, "q": b} for a, b in period),
        )
        loop = len(prefix)
        # Unrolling the period into the prefix denotes the same word, so the
        # truth at loop position k folds back to loop position k mod |period|.
        unrolled = LassoTrace(t.prefix + t.period * 6, t.period)
        assert eval_lasso(f, unrolled, loop + k) == eval_lasso(
            f, t, loop + (k % len(period))
        )


class TestBoundedEquiv:
    def test_globally_duality(self):
        assert bounded_equiv(parse_ltl("G p"), parse_ltl("!F !p")) is True

    def test_refutes_flipped_negation(self):
        f = parse_ltl("G (red -> X !green)")
        g = parse_ltl("G (red -> X green)")
        assert bounded_equiv(f, g) is False

    def test_until_vs_basic_precedence(self):
        # Witness: a false at position 0, a and b both reachable later.
        f = parse_ltl("F (a & F b)")
        g = parse_ltl("a U b")
        assert bounded_equiv(f, g) is False
        witness = LassoTrace(
            ({"a": False, "b": False}, {"a": True, "b": False}),
            ({"a": False, "b": True},),
        )
        assert eval_lasso(f, witness, 0) is True
        assert eval_lasso(g, witness, 0) is False

    def test_next_negation_commutes(self):
        assert bounded_equiv(parse_ltl("X !p"), parse_ltl("!X p")) is True

    def test_ap_guard(self):
        f = parse_ltl("a & b & c & d & e")
        with pytest.raises(TooManyAPs):
            bounded_equiv(f, f)

    @given(formulas(atom_names=("p", "q"), max_depth=4), formulas(atom_names=("p", "q"), max_depth=4))
    @settings(max_examples=60, deadline=None)
    def test_agrees_with_brute_force(self, f, g):
        got = bounded_equiv(f, g, max_prefix=2, max_period=2)
        want = brute_equiv(f, g, {"p", "q"}, max_prefix=2, max_period=2)
        assert got == want

    @given(formulas(atom_names=("p", "q", "r"), max_depth=4))
    @settings(max_examples=25, deadline=None)
    def test_temporal_dualities(self, f):
        assert bounded_equiv(Not(Globally(f)), Eventually(Not(f)))
        assert bounded_equiv(Not(Next(f)), Next(Not(f)))
