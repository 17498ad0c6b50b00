"""Requirement-to-LTL toolkit.

Pipeline: natural-language requirement -> hierarchical onion tree (LLM-guided
decomposition) -> machine validation -> deterministic rule-based synthesis of
an LTL formula, with a metrics harness, CLI, and review service on top.
"""

from req2ltl.decompose import (
    DecompositionConfig,
    RepairExhausted,
    StepTrace,
    decompose,
    replay_trace,
)
from req2ltl.gateway import (
    BackendError,
    GenerationParams,
    HttpBackend,
    ScriptedBackend,
)
from req2ltl.ltl import (
    And,
    Atom,
    Eventually,
    Globally,
    Implies,
    LassoTrace,
    LtlFormula,
    LtlSyntaxError,
    Next,
    Not,
    Or,
    Until,
    bounded_equiv,
    collect_aps,
    eval_lasso,
    parse_ltl,
    print_ltl,
    substitute_placeholders,
)
from req2ltl.metrics import (
    CorpusPair,
    EvalReport,
    OracleMode,
    ap_recall,
    bleu,
    evaluate,
    load_corpus,
)
from req2ltl.onion import (
    AtomicNode,
    AtomicProposition,
    ModeScopeNode,
    NodePath,
    OnionNode,
    RelationNode,
    RelationOp,
    ScopeNode,
    ScopeOp,
    edit_node,
    gen_random_tree,
    parse_onion_json,
    render_mermaid,
    serialize_onion,
)
from req2ltl.translate import NotValidated, translate, translate_atomic
from req2ltl.validation import (
    Diagnostic,
    DiagnosticKind,
    Severity,
    ValidationReport,
    canonicalize,
    validate,
)

__version__ = "0.1.0"
