"""LTL formulas: AST, text parsing/printing, and a bounded equivalence oracle.

Formulas are immutable trees over atomic propositions and the operators
``! & | -> X F G U``.  Atoms are opaque canonical strings; relational
predicates such as ``temperature > 50`` live inside a single atom.
Equivalence checking works on ultimately-periodic (lasso) traces: exact
up to the configured prefix/period bounds, hence a sound refuter.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping, Sequence

import numpy as np

__all__ = [
    "LtlFormula",
    "Atom",
    "Not",
    "And",
    "Or",
    "Implies",
    "Next",
    "Eventually",
    "Globally",
    "Until",
    "LassoTrace",
    "LtlSyntaxError",
    "MissingPlaceholder",
    "UnknownAtom",
    "TooManyAPs",
    "parse_ltl",
    "print_ltl",
    "collect_aps",
    "map_atoms",
    "substitute_placeholders",
    "eval_lasso",
    "bounded_equiv",
    "subformulas",
    "normalize_atom_text",
]


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class LtlFormula:
    """Base class for formula nodes."""


@dataclass(frozen=True)
class Atom(LtlFormula):
    text: str

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("atom text must be non-empty")


@dataclass(frozen=True)
class Not(LtlFormula):
    child: LtlFormula


@dataclass(frozen=True)
class Next(LtlFormula):
    child: LtlFormula


@dataclass(frozen=True)
class Eventually(LtlFormula):
    child: LtlFormula


@dataclass(frozen=True)
class Globally(LtlFormula):
    child: LtlFormula


@dataclass(frozen=True)
class And(LtlFormula):
    left: LtlFormula
    right: LtlFormula


@dataclass(frozen=True)
class Or(LtlFormula):
    left: LtlFormula
    right: LtlFormula


@dataclass(frozen=True)
class Implies(LtlFormula):
    left: LtlFormula
    right: LtlFormula


@dataclass(frozen=True)
class Until(LtlFormula):
    left: LtlFormula
    right: LtlFormula


_UNARY = (Not, Next, Eventually, Globally)
_BINARY = (And, Or, Implies, Until)


class LtlSyntaxError(Exception):
    """Malformed formula text; carries the byte offset and an expectation hint."""

    def __init__(self, message: str, offset: int, expected: str):
        super().__init__(f"{message} at offset {offset} (expected {expected})")
        self.offset = offset
        self.expected = expected


class MissingPlaceholder(KeyError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name


class UnknownAtom(KeyError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name


class TooManyAPs(ValueError):
    pass


# ---------------------------------------------------------------------------
# Parsing

_RESERVED = {"G", "F", "X", "U"}

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<lparen>\()
    | (?P<rparen>\))
    | (?P<implies>->|→)
    | (?P<relop>>=|<=|!=|=|>|<)
    | (?P<and>&&|&|∧)
    | (?P<or>\|\||\||∨)
    | (?P<not>!|¬)
    | (?P<number>-?\d+(?:\.\d+)?)
    | (?P<ident>[^\W\d]\w*(?:\.[^\W\d]\w*)*)
    """,
    re.VERBOSE,
)

_REL_OPS = ("=", "!=", ">", "<", ">=", "<=")


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise LtlSyntaxError(f"unexpected character {text[pos]!r}", pos, "a formula token")
        kind = m.lastgroup or ""
        if kind != "ws":
            tok_text = m.group()
            if kind == "ident" and tok_text in _RESERVED:
                kind = "op" + tok_text  # opG / opF / opX / opU
            tokens.append(_Token(kind, tok_text, pos))
        pos = m.end()
    tokens.append(_Token("eof", "", len(text)))
    return tokens


class _Parser:
    """Recursive-descent parser.

    Precedence, tightest first: unary (! X F G), U, &, |, ->.
    U, & and | associate to the left; -> associates to the right.
    """

    def __init__(self, tokens: list[_Token]):
        self._tokens = tokens
        self._pos = 0

    def _peek(self) -> _Token:
        return self._tokens[self._pos]

    def _advance(self) -> _Token:
        tok = self._tokens[self._pos]
        self._pos += 1
        return tok

    def _fail(self, expected: str) -> LtlSyntaxError:
        tok = self._peek()
        what = "end of input" if tok.kind == "eof" else repr(tok.text)
        return LtlSyntaxError(f"unexpected {what}", tok.offset, expected)

    def parse(self) -> LtlFormula:
        f = self._implies()
        if self._peek().kind != "eof":
            raise self._fail("end of input or a binary operator")
        return f

    def _implies(self) -> LtlFormula:
        left = self._or()
        if self._peek().kind == "implies":
            self._advance()
            return Implies(left, self._implies())
        return left

    def _or(self) -> LtlFormula:
        f = self._and()
        while self._peek().kind == "or":
            self._advance()
            f = Or(f, self._and())
        return f

    def _and(self) -> LtlFormula:
        f = self._until()
        while self._peek().kind == "and":
            self._advance()
            f = And(f, self._until())
        return f

    def _until(self) -> LtlFormula:
        f = self._unary()
        while self._peek().kind == "opU":
            self._advance()
            f = Until(f, self._unary())
        return f

    def _unary(self) -> LtlFormula:
        kind = self._peek().kind
        ctor = {"not": Not, "opX": Next, "opF": Eventually, "opG": Globally}.get(kind)
        if ctor is not None:
            self._advance()
            return ctor(self._unary())
        return self._primary()

    def _primary(self) -> LtlFormula:
        tok = self._peek()
        if tok.kind == "lparen":
            self._advance()
            f = self._implies()
            if self._peek().kind != "rparen":
                raise self._fail("')'")
            self._advance()
            return f
        if tok.kind == "ident":
            self._advance()
            if self._peek().kind == "relop":
                rel = self._advance()
                term = self._peek()
                if term.kind not in ("ident", "number"):
                    raise self._fail("a value after the relational operator")
                self._advance()
                return Atom(f"{tok.text} {rel.text} {term.text}")
            return Atom(tok.text)
        raise self._fail("an atom, '(', or a unary operator")


def parse_ltl(text: str) -> LtlFormula:
    """Parse formula text into an AST; raises :class:`LtlSyntaxError` on bad input."""
    return _Parser(_tokenize(text)).parse()


# ---------------------------------------------------------------------------
# Printing

_BIN_SYMBOL = {And: "&", Or: "|", Implies: "->", Until: "U"}
_UNARY_SYMBOL = {Not: "!", Next: "X", Eventually: "F", Globally: "G"}


def _operand(f: LtlFormula) -> str:
    # Binary subterms are always grouped; unary chains and atoms never are.
    text = print_ltl(f)
    return f"({text})" if isinstance(f, _BINARY) else text


def print_ltl(f: LtlFormula) -> str:
    """Render ``f`` in the canonical spelling: ``G F X U ! & | ->``.

    The output round-trips: ``parse_ltl(print_ltl(f))`` is structurally
    identical to ``f``.
    """
    if isinstance(f, Atom):
        return f.text
    if isinstance(f, Not):
        return "!" + _operand(f.child)
    if isinstance(f, _UNARY):
        return f"{_UNARY_SYMBOL[type(f)]} {_operand(f.child)}"
    if isinstance(f, _BINARY):
        return f"{_operand(f.left)} {_BIN_SYMBOL[type(f)]} {_operand(f.right)}"
    raise TypeError(f"not a formula node: {f!r}")


def print_tokens(f: LtlFormula, atom_text: Callable[[str], str] = lambda s: s) -> list[str]:
    """Token stream of the canonical rendering, one entry per operator,
    parenthesis, or atom.  ``atom_text`` maps atom strings (used by metrics
    to abstract propositions into placeholders)."""
    out: list[str] = []

    def emit(node: LtlFormula, grouped: bool) -> None:
        if grouped and isinstance(node, _BINARY):
            out.append("(")
            emit(node, False)
            out.append(")")
            return
        if isinstance(node, Atom):
            out.append(atom_text(node.text))
        elif isinstance(node, _UNARY):
            out.append(_UNARY_SYMBOL[type(node)])
            emit(node.child, True)
        else:
            emit(node.left, True)
            out.append(_BIN_SYMBOL[type(node)])
            emit(node.right, True)

    emit(f, False)
    return out


# ---------------------------------------------------------------------------
# Atoms and placeholders


def iter_atoms(f: LtlFormula) -> Iterator[str]:
    """Atom texts in left-to-right first-visit order (with repeats)."""
    if isinstance(f, Atom):
        yield f.text
    elif isinstance(f, _UNARY):
        yield from iter_atoms(f.child)
    elif isinstance(f, _BINARY):
        yield from iter_atoms(f.left)
        yield from iter_atoms(f.right)


def collect_aps(f: LtlFormula) -> set[str]:
    """Set of atomic-proposition strings occurring in ``f``."""
    return set(iter_atoms(f))


_ATOM_PARTS_RE = re.compile(r"^\s*(\S+)\s*(>=|<=|!=|=|>|<)\s*(\S+)\s*$")


def normalize_atom_text(text: str) -> str:
    """Canonical atom spelling: single spaces around a relational operator,
    surrounding whitespace trimmed."""
    m = _ATOM_PARTS_RE.match(text)
    if m:
        return f"{m.group(1)} {m.group(2)} {m.group(3)}"
    return " ".join(text.split())


_PLACEHOLDER_RE = re.compile(r"^Prop\d+$")


def map_atoms(f: LtlFormula, fn: Callable[[str], str]) -> LtlFormula:
    """Structure-preserving rewrite of every atom text through ``fn``."""
    if isinstance(f, Atom):
        return Atom(fn(f.text))
    if isinstance(f, _UNARY):
        return type(f)(map_atoms(f.child, fn))
    return type(f)(map_atoms(f.left, fn), map_atoms(f.right, fn))


def substitute_placeholders(f: LtlFormula, mapping: Mapping[str, str]) -> LtlFormula:
    """Replace ``Prop<k>`` atoms by their mapped text; everything else is kept.

    Raises :class:`MissingPlaceholder` when a placeholder atom has no entry.
    """

    def lookup(text: str) -> str:
        if _PLACEHOLDER_RE.match(text):
            if text not in mapping:
                raise MissingPlaceholder(text)
            return mapping[text]
        return text

    return map_atoms(f, lookup)


def subformulas(*roots: LtlFormula) -> list[LtlFormula]:
    """Distinct subformulas of the given roots, children before parents."""
    seen: dict[LtlFormula, None] = {}

    def visit(node: LtlFormula) -> None:
        if node in seen:
            return
        if isinstance(node, _UNARY):
            visit(node.child)
        elif isinstance(node, _BINARY):
            visit(node.left)
            visit(node.right)
        seen[node] = None

    for root in roots:
        visit(root)
    return list(seen)


# ---------------------------------------------------------------------------
# Lasso traces and evaluation


@dataclass(frozen=True)
class LassoTrace:
    """Ultimately-periodic word ``prefix . period^ω`` of AP valuations."""

    prefix: tuple[Mapping[str, bool], ...]
    period: tuple[Mapping[str, bool], ...]

    def __post_init__(self) -> None:
        if len(self.period) < 1:
            raise ValueError("period must contain at least one valuation")
        keysets = {frozenset(v) for v in self.prefix} | {frozenset(v) for v in self.period}
        if len(keysets) > 1:
            raise ValueError("all valuations must share the same AP key set")

    def valuation(self, pos: int) -> Mapping[str, bool]:
        if pos < len(self.prefix):
            return self.prefix[pos]
        return self.period[pos - len(self.prefix)]

    def __len__(self) -> int:
        return len(self.prefix) + len(self.period)


def eval_lasso(f: LtlFormula, trace: LassoTrace, pos: int = 0) -> bool:
    """Truth of ``f`` at position ``pos`` of the infinite word.

    Computed bottom-up: each subformula gets a truth vector over all
    represented positions; U/F/G are solved by seeding the loop
    pessimistically (U, F) or optimistically (G) and sweeping backwards
    until stable.
    """
    n = len(trace)
    if not 0 <= pos < n:
        raise IndexError(f"position {pos} outside the represented 0..{n - 1} range")
    loop = len(trace.prefix)

    def succ(i: int) -> int:
        return i + 1 if i + 1 < n else loop

    table: dict[LtlFormula, list[bool]] = {}
    for node in subformulas(f):
        if isinstance(node, Atom):
            vals = []
            for i in range(n):
                valuation = trace.valuation(i)
                if node.text not in valuation:
                    raise UnknownAtom(node.text)
                vals.append(bool(valuation[node.text]))
        elif isinstance(node, Not):
            vals = [not v for v in table[node.child]]
        elif isinstance(node, And):
            vals = [a and b for a, b in zip(table[node.left], table[node.right])]
        elif isinstance(node, Or):
            vals = [a or b for a, b in zip(table[node.left], table[node.right])]
        elif isinstance(node, Implies):
            vals = [(not a) or b for a, b in zip(table[node.left], table[node.right])]
        elif isinstance(node, Next):
            child = table[node.child]
            vals = [child[succ(i)] for i in range(n)]
        else:
            vals = _fix_temporal(node, table, n, succ)
        table[node] = vals
    return table[f][pos]


def _fix_temporal(
    node: LtlFormula,
    table: dict[LtlFormula, list[bool]],
    n: int,
    succ: Callable[[int], int],
) -> list[bool]:
    if isinstance(node, Until):
        hold, goal = table[node.left], table[node.right]
        step = lambda i, nxt: goal[i] or (hold[i] and nxt)
        seed = False
    elif isinstance(node, Eventually):
        child = table[node.child]
        step = lambda i, nxt: child[i] or nxt
        seed = False
    elif isinstance(node, Globally):
        child = table[node.child]
        step = lambda i, nxt: child[i] and nxt
        seed = True
    else:
        raise TypeError(f"not a temporal fixpoint node: {node!r}")
    vals = [seed] * n
    for _ in range(2 * n + 2):
        changed = False
        for i in reversed(range(n)):
            new = step(i, vals[succ(i)])
            if new != vals[i]:
                vals[i] = new
                changed = True
        if not changed:
            break
    return vals


# ---------------------------------------------------------------------------
# Bounded equivalence

AP_GUARD = 4
DEFAULT_MAX_PREFIX = 4
DEFAULT_MAX_PERIOD = 3


def bounded_equiv(
    f: LtlFormula,
    g: LtlFormula,
    max_prefix: int = DEFAULT_MAX_PREFIX,
    max_period: int = DEFAULT_MAX_PERIOD,
) -> bool:
    """True iff ``f`` and ``g`` agree at position 0 on every lasso over their
    joint AP set with prefix length <= ``max_prefix`` and period length
    <= ``max_period``.

    Sound as a refuter; incomplete as an equivalence proof.  Rather than
    enumerating lassos one by one, the check enumerates suffix *behaviours*:
    truth assignments to all subformulas at the start of a word suffix.  All
    periods of one length are evaluated in a single vectorized fixpoint, and
    prefixes are grown by extending the deduplicated behaviour set one state
    at a time (expansion laws make each extension local).
    """
    aps = sorted(collect_aps(f) | collect_aps(g))
    if len(aps) > AP_GUARD:
        raise TooManyAPs(f"joint AP set has {len(aps)} atoms; the guard allows {AP_GUARD}")
    nodes = subformulas(f, g)
    index = {node: i for i, node in enumerate(nodes)}
    f_col, g_col = index[f], index[g]
    ap_bit = {ap: i for i, ap in enumerate(aps)}
    n_states = 1 << len(aps)

    def agree(matrix: np.ndarray) -> bool:
        return bool(np.array_equal(matrix[:, f_col], matrix[:, g_col]))

    behaviours: list[np.ndarray] = []
    for q in range(1, max_period + 1):
        mat = _period_behaviours(nodes, index, ap_bit, n_states, q)
        if not agree(mat):
            return False
        behaviours.append(mat)
    current = np.unique(np.vstack(behaviours), axis=0)
    for _ in range(max_prefix):
        current = _extend_behaviours(nodes, index, ap_bit, n_states, current)
        if not agree(current):
            return False
    return True


def _period_behaviours(
    nodes: Sequence[LtlFormula],
    index: Mapping[LtlFormula, int],
    ap_bit: Mapping[str, int],
    n_states: int,
    q: int,
) -> np.ndarray:
    """Behaviour matrix (one row per period word of length ``q``) holding the
    truth of every subformula at loop position 0."""
    total = n_states**q
    word = np.arange(total)
    states = [(word // n_states**j) % n_states for j in range(q)]
    vals: list[list[np.ndarray]] = [[] for _ in nodes]
    for node in nodes:
        i = index[node]
        if isinstance(node, Atom):
            bit = ap_bit[node.text]
            vals[i] = [((s >> bit) & 1).astype(bool) for s in states]
        elif isinstance(node, Not):
            vals[i] = [~v for v in vals[index[node.child]]]
        elif isinstance(node, And):
            vals[i] = [a & b for a, b in zip(vals[index[node.left]], vals[index[node.right]])]
        elif isinstance(node, Or):
            vals[i] = [a | b for a, b in zip(vals[index[node.left]], vals[index[node.right]])]
        elif isinstance(node, Implies):
            vals[i] = [~a | b for a, b in zip(vals[index[node.left]], vals[index[node.right]])]
        elif isinstance(node, Next):
            child = vals[index[node.child]]
            vals[i] = [child[(j + 1) % q] for j in range(q)]
        else:
            vals[i] = _fix_temporal_vec(node, vals, index, q, total)
    return np.column_stack([vals[index[node]][0] for node in nodes])


def _fix_temporal_vec(
    node: LtlFormula,
    vals: list[list[np.ndarray]],
    index: Mapping[LtlFormula, int],
    q: int,
    total: int,
) -> list[np.ndarray]:
    if isinstance(node, Until):
        hold, goal = vals[index[node.left]], vals[index[node.right]]
        step = lambda j, nxt: goal[j] | (hold[j] & nxt)
        seed = False
    elif isinstance(node, Eventually):
        child = vals[index[node.child]]
        step = lambda j, nxt: child[j] | nxt
        seed = False
    elif isinstance(node, Globally):
        child = vals[index[node.child]]
        step = lambda j, nxt: child[j] & nxt
        seed = True
    else:
        raise TypeError(f"not a temporal fixpoint node: {node!r}")
    out = [np.full(total, seed) for _ in range(q)]
    for _ in range(2 * q + 2):
        changed = False
        for j in reversed(range(q)):
            new = step(j, out[(j + 1) % q])
            if not np.array_equal(new, out[j]):
                out[j] = new
                changed = True
        if not changed:
            break
    return out


def _extend_behaviours(
    nodes: Sequence[LtlFormula],
    index: Mapping[LtlFormula, int],
    ap_bit: Mapping[str, int],
    n_states: int,
    suffix: np.ndarray,
) -> np.ndarray:
    """Behaviours of one-state-longer prefixes, one block per prepended state."""
    rows = suffix.shape[0]
    blocks = []
    for state in range(n_states):
        cols: list[np.ndarray] = [np.empty(0)] * len(nodes)
        for node in nodes:
            i = index[node]
            if isinstance(node, Atom):
                here = bool((state >> ap_bit[node.text]) & 1)
                cols[i] = np.full(rows, here)
            elif isinstance(node, Not):
                cols[i] = ~cols[index[node.child]]
            elif isinstance(node, And):
                cols[i] = cols[index[node.left]] & cols[index[node.right]]
            elif isinstance(node, Or):
                cols[i] = cols[index[node.left]] | cols[index[node.right]]
            elif isinstance(node, Implies):
                cols[i] = ~cols[index[node.left]] | cols[index[node.right]]
            elif isinstance(node, Next):
                cols[i] = suffix[:, index[node.child]]
            elif isinstance(node, Until):
                cols[i] = cols[index[node.right]] | (cols[index[node.left]] & suffix[:, i])
            elif isinstance(node, Eventually):
                cols[i] = cols[index[node.child]] | suffix[:, i]
            elif isinstance(node, Globally):
                cols[i] = cols[index[node.child]] & suffix[:, i]
            else:
                raise TypeError(f"not a formula node: {node!r}")
        blocks.append(np.column_stack(cols))
    return np.unique(np.vstack(blocks), axis=0)
