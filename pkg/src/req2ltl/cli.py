"""Command-line entry points for the requirement-to-LTL pipeline.

Exit codes: 0 success, 2 validation failure, 3 backend failure, 4 usage.
"""

from __future__ import annotations

import json
import sys
from dataclasses import replace
from pathlib import Path

import click

from req2ltl.decompose import (
    DecompositionConfig,
    ProtocolError,
    RepairExhausted,
    decompose,
)
from req2ltl.gateway import (
    BackendError,
    GenerationParams,
    LlmBackend,
    ScriptedBackend,
    backend_from_env,
)
from req2ltl.ltl import print_ltl
from req2ltl.metrics import (
    OracleMode,
    evaluate,
    identity_pipeline,
    load_corpus,
    pair_table_tsv,
    write_figures,
)
from req2ltl.onion import SchemaError, parse_onion_loose, render_mermaid, serialize_onion
from req2ltl.translate import translate
from req2ltl.validation import validate

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_BACKEND = 3
EXIT_USAGE = 4


def _load_config(path: str | None) -> tuple[DecompositionConfig, dict]:
    """Decomposition config plus raw gateway settings from a config file."""
    if path is None:
        return DecompositionConfig(), {}
    raw = json.loads(Path(path).read_text())
    params = GenerationParams(
        model_name=raw.get("model", "default"),
        max_tokens=raw.get("maxTokens", 1024),
        temperature=raw.get("temperature", 0.0),
        timeout=raw.get("timeout", 60.0),
    )
    cfg = DecompositionConfig(
        max_repair_rounds=raw.get("maxRepairRounds", 3),
        few_shot_set_id=raw.get("fewShotSetId", "default"),
        lifted_mode=raw.get("liftedMode", False),
        prompt_template_version=raw.get("promptTemplateVersion", "v1"),
        params=params,
    )
    return cfg, raw


def _resolve_backend(stub: str | None, gateway: dict | None = None) -> LlmBackend:
    if stub is not None:
        return ScriptedBackend.from_file(stub)
    if gateway and gateway.get("endpoint"):
        from req2ltl.gateway import HttpBackend

        return HttpBackend(
            gateway["endpoint"],
            api_key=gateway.get("apiKey", ""),
            model=gateway.get("model", ""),
        )
    return backend_from_env()


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        click.echo(text)


@click.group()
def cli() -> None:
    """Translate natural-language requirements into LTL via a reviewed tree."""


@cli.command("translate")
@click.argument("requirement")
@click.option("--stub", type=click.Path(exists=True), help="scripted transcript instead of a live backend")
@click.option("--config", "config_path", type=click.Path(exists=True), help="decomposition config JSON")
@click.option("--lifted", is_flag=True, help="treat propositions as lifted placeholders")
@click.option("--out", type=click.Path(), help="write the formula here instead of stdout")
@click.option("--max-repairs", type=int, default=None, help="repair-round budget")
@click.option("--trace", type=click.Path(), help="write the step trace here as JSONL")
def cmd_translate(requirement, stub, config_path, lifted, out, max_repairs, trace):
    """Decompose REQUIREMENT, validate, and print the synthesized formula."""
    if not requirement.strip():
        raise click.UsageError("requirement must be non-empty")
    cfg, gateway = _load_config(config_path)
    if lifted:
        cfg = replace(cfg, lifted_mode=True)
    if max_repairs is not None:
        cfg = replace(cfg, max_repair_rounds=max_repairs)
    try:
        backend = _resolve_backend(stub, gateway)
        tree, step_trace = decompose(requirement, cfg, backend)
    except RepairExhausted as exc:
        for d in exc.last_diagnostics:
            click.echo(d.to_json())
        if trace:
            Path(trace).write_text(exc.trace.to_jsonl())
        sys.exit(EXIT_VALIDATION)
    except (BackendError, ProtocolError) as exc:
        click.echo(f"backend failure: {exc}", err=True)
        sys.exit(EXIT_BACKEND)
    if trace:
        Path(trace).write_text(step_trace.to_jsonl())
    _emit(print_ltl(translate(tree)), out)


@cli.command("validate")
@click.argument("tree_file", type=click.Path(exists=True))
def cmd_validate(tree_file):
    """Print diagnostics for a tree file as JSON lines."""
    report = validate(_read_tree(tree_file))
    for d in report.diagnostics:
        click.echo(d.to_json())
    sys.exit(EXIT_OK if report.ok else EXIT_VALIDATION)


@cli.command("synthesize")
@click.argument("tree_file", type=click.Path(exists=True))
@click.option("--out", type=click.Path(), help="write the formula here instead of stdout")
def cmd_synthesize(tree_file, out):
    """Translate a validated tree file into LTL text."""
    tree = _read_tree(tree_file)
    report = validate(tree)
    if not report.ok:
        for d in report.errors:
            click.echo(d.to_json(), err=True)
        sys.exit(EXIT_VALIDATION)
    _emit(print_ltl(translate(tree)), out)


@cli.command("render")
@click.argument("tree_file", type=click.Path(exists=True))
@click.option("--out", type=click.Path(), help="write the diagram here instead of stdout")
def cmd_render(tree_file, out):
    """Render a tree file as a Mermaid graph."""
    _emit(render_mermaid(_read_tree(tree_file)), out)


@cli.command("canonicalize")
@click.argument("tree_file", type=click.Path(exists=True))
@click.option("--out", type=click.Path(), help="write the canonical tree here instead of stdout")
def cmd_canonicalize(tree_file, out):
    """Print the canonical (left-associative) form of a tree file."""
    report = validate(_read_tree(tree_file))
    if not report.ok:
        for d in report.errors:
            click.echo(d.to_json(), err=True)
        sys.exit(EXIT_VALIDATION)
    _emit(serialize_onion(report.canonical_tree), out)


@cli.command("eval")
@click.argument("corpus_file", type=click.Path(exists=True))
@click.option("--stub", type=click.Path(exists=True), help="scripted transcript instead of a live backend")
@click.option("--config", "config_path", type=click.Path(exists=True), help="decomposition config JSON")
@click.option("--identity", is_flag=True, help="feed the gold formulas back (harness self-check)")
@click.option("--bounded-equiv", is_flag=True, help="also run the bounded-equivalence oracle")
@click.option("--out", type=click.Path(), help="write the report JSON here")
@click.option("--figures", type=click.Path(), help="write score figures and the per-pair TSV here")
def cmd_eval(corpus_file, stub, config_path, identity, bounded_equiv, out, figures):
    """Score a pipeline over a JSONL corpus and print the summary table."""
    corpus = load_corpus(corpus_file)
    oracle = OracleMode.WITH_BOUNDED_EQUIV if bounded_equiv else OracleMode.STRUCTURAL_ONLY
    cfg, gateway = _load_config(config_path)
    if identity:
        pipeline = identity_pipeline
        backend_name = "identity"
    else:
        try:
            backend = _resolve_backend(stub, gateway)
        except BackendError as exc:
            click.echo(f"backend failure: {exc}", err=True)
            sys.exit(EXIT_BACKEND)
        backend_name = "stub" if stub else "http"

        def pipeline(pair):
            pair_cfg = replace(cfg, lifted_mode=True) if pair.lifted else cfg
            tree, _ = decompose(pair.nl, pair_cfg, backend)
            return print_ltl(translate(tree))

    report = evaluate(
        corpus,
        pipeline,
        oracle_mode=oracle,
        backend=backend_name,
        template_version=cfg.prompt_template_version,
    )
    click.echo(report.summary_table())
    if out:
        Path(out).write_text(json.dumps(report.to_jsonable(), indent=2) + "\n")
    if figures:
        write_figures(report, figures)
        (Path(figures) / "per_pair.tsv").write_text(pair_table_tsv(report))


@cli.command("serve")
@click.option("--port", type=int, default=8742, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--stub", type=click.Path(exists=True), help="scripted transcript instead of a live backend")
@click.option("--config", "config_path", type=click.Path(exists=True), help="decomposition config JSON")
@click.option("--state-dir", type=click.Path(), default="./.req2ltl/sessions", show_default=True)
def cmd_serve(port, host, stub, config_path, state_dir):
    """Host the review-session HTTP API for the browser UI."""
    import uvicorn

    from req2ltl.service import create_app

    cfg, gateway = _load_config(config_path)
    try:
        backend = _resolve_backend(stub, gateway)
    except BackendError as exc:
        click.echo(f"backend failure: {exc}", err=True)
        sys.exit(EXIT_BACKEND)
    app = create_app(backend, cfg, state_dir)
    uvicorn.run(app, host=host, port=port)


def _read_tree(path: str):
    # permissive decode: structural problems are the validator's to report
    try:
        return parse_onion_loose(Path(path).read_text())
    except (json.JSONDecodeError, SchemaError) as exc:
        raise click.UsageError(f"{path}: {exc}") from exc


def main(argv: list[str] | None = None) -> int:
    """Entry point with the documented exit-code scheme."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except SystemExit as exc:
        return int(exc.code or 0)
    except click.exceptions.Abort:
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
