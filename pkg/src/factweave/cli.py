"""Command-line front end.

Pipeline commands (respond, retrieve, extract, describe-image, serve) need a
provider source: a recorded cassette to replay, or live provider settings,
optionally recording into a cassette for later replay.  Annotation analysis
commands (evaluate, agreement, report) work offline from annotation files.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import click

from . import __version__
from .credibility import Registry, load_registry
from .evaluation.aggregate import (
    GROUPABLE_LABELS,
    MissingAnnotation,
    agreement_summary,
    build_report,
    response_scores,
    write_report_csv,
    write_report_json,
)
from .evaluation.store import AnnotationStore
from .ingest import MediaStore, load_image, load_post_file
from .models import Diagnostics, PipelineConfig, Post
from .pipeline import RunStore, run_pipeline, survey_pages
from .providers.cassette import Cassette, recording_backends, replay_backends
from .providers.config import load_provider_config
from .providers.gateway import ProviderGateway
from .providers.live import live_backends
from .retrieval import gate_from_spec


@dataclass
class CliState:
    config_path: Optional[str]
    registry_path: Optional[str]
    cassette_path: Optional[str]
    providers_path: Optional[str]
    record: bool
    cutoff: str
    parallelism: Optional[int]

    def pipeline_config(self) -> PipelineConfig:
        if self.config_path:
            raw = json.loads(Path(self.config_path).read_text(encoding="utf-8"))
            config = PipelineConfig.from_dict(raw)
        else:
            config = PipelineConfig()
        if self.parallelism is not None:
            config = config.with_parallelism(self.parallelism)
        return config

    def registry(self) -> Registry:
        if not self.registry_path:
            raise click.UsageError("--registry is required for this command")
        return load_registry(self.registry_path)

    def gateway(self, media: MediaStore) -> ProviderGateway:
        settings = (
            load_provider_config(self.providers_path) if self.providers_path else None
        )
        if self.record:
            if not self.cassette_path or not self.providers_path:
                raise click.UsageError(
                    "--record needs both --cassette (destination) and --providers"
                )
            backends = recording_backends(
                live_backends(settings), Cassette(self.cassette_path)
            )
        elif self.cassette_path:
            if not Path(self.cassette_path).exists():
                raise click.UsageError(
                    f"cassette not found: {self.cassette_path} (pass --record to create one)"
                )
            backends = replay_backends(Cassette(self.cassette_path))
        elif self.providers_path:
            backends = live_backends(settings)
        else:
            raise click.UsageError(
                "no provider source: pass --cassette to replay, or --providers "
                "(optionally with --record --cassette) for live calls"
            )
        return ProviderGateway(backends, media=media, settings=settings)


@click.group()
@click.version_option(__version__)
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Pipeline tuning values (JSON).")
@click.option("--registry", "registry_path", type=click.Path(), default=None,
              help="Publisher credibility registry (CSV or JSON).")
@click.option("--cassette", "cassette_path", type=click.Path(), default=None,
              help="Recorded provider traffic; replayed unless --record.")
@click.option("--providers", "providers_path", type=click.Path(), default=None,
              help="Live provider settings (JSON).")
@click.option("--record", is_flag=True, default=False,
              help="Call live providers and record traffic into --cassette.")
@click.option("--cutoff", default="post-time", show_default=True,
              help="Evidence cutoff: 'post-time' or an RFC 3339 reference time "
                   "(gated 30 minutes earlier).")
@click.option("--parallelism", type=click.IntRange(min=1), default=None,
              help="Worker bound for provider fan-out.")
@click.pass_context
def main(ctx, config_path, registry_path, cassette_path, providers_path,
         record, cutoff, parallelism):
    """Evidence-backed misinformation correction pipeline."""
    ctx.obj = CliState(
        config_path=config_path,
        registry_path=registry_path,
        cassette_path=cassette_path,
        providers_path=providers_path,
        record=record,
        cutoff=cutoff,
        parallelism=parallelism,
    )


def _load_post(state: CliState, post_file: str, media: MediaStore) -> Post:
    try:
        return load_post_file(post_file, media)
    except (ValueError, OSError) as exc:
        raise click.ClickException(f"cannot load post: {exc}")


def _gate(state: CliState, post: Post):
    try:
        return gate_from_spec(state.cutoff, post)
    except ValueError as exc:
        raise click.UsageError(f"bad --cutoff: {exc}")


def _emit(payload, output: Optional[str]) -> None:
    text = json.dumps(payload, indent=2, ensure_ascii=False, sort_keys=True)
    if output:
        Path(output).write_text(text + "\n", encoding="utf-8")
    else:
        click.echo(text)


@main.command()
@click.argument("post_file", type=click.Path(exists=True))
@click.option("--runs", "runs_dir", type=click.Path(), default=None,
              help="Run store directory; identical reruns reuse the record.")
@click.option("--output", type=click.Path(), default=None,
              help="Write the response JSON here instead of stdout.")
@click.pass_obj
def respond(state: CliState, post_file, runs_dir, output):
    """Produce a correction response for one post."""
    media = MediaStore()
    config = state.pipeline_config()
    registry = state.registry()
    gateway = state.gateway(media)
    post = _load_post(state, post_file, media)
    gate = _gate(state, post)
    store = RunStore(runs_dir) if runs_dir else None
    record = run_pipeline(gateway, registry, config, post, gate, store=store)
    if record.status != "ok":
        raise click.ClickException(f"run failed: {record.error}")
    text = record.response.stable_json()
    if output:
        Path(output).write_text(text + "\n", encoding="utf-8")
    else:
        click.echo(text)


@main.command()
@click.argument("post_file", type=click.Path(exists=True))
@click.option("--output", type=click.Path(), default=None)
@click.pass_obj
def retrieve(state: CliState, post_file, output):
    """Show the evidence pages that survive relevance and time gating."""
    media = MediaStore()
    config = state.pipeline_config()
    registry = state.registry()
    post = _load_post(state, post_file, media)
    gate = _gate(state, post)
    gateway = state.gateway(media).for_run(Diagnostics(cutoff=gate.cutoff))
    descriptions, queries, ranked = survey_pages(gateway, registry, config, post, gate)
    _emit(
        {
            "descriptions": [d.to_dict() for d in descriptions],
            "queries": [q.text for q in queries],
            "pages": [p.to_dict() for p in ranked],
        },
        output,
    )


@main.command()
@click.argument("post_file", type=click.Path(exists=True))
@click.option("--output", type=click.Path(), default=None)
@click.pass_obj
def extract(state: CliState, post_file, output):
    """Run retrieval then quote extraction; show evidence and page verdicts."""
    from .evidence import gather

    media = MediaStore()
    config = state.pipeline_config()
    registry = state.registry()
    post = _load_post(state, post_file, media)
    gate = _gate(state, post)
    gateway = state.gateway(media).for_run(Diagnostics(cutoff=gate.cutoff))
    descriptions, queries, ranked = survey_pages(gateway, registry, config, post, gate)
    evidence, results = gather(gateway, ranked, post, descriptions, config)
    _emit(
        {
            "evidence": [item.to_dict() for item in evidence],
            "pages": [
                {
                    "url": r.page.url,
                    "verdict": r.verdict.value,
                    "items": [item.to_dict() for item in r.items],
                }
                for r in results
            ],
        },
        output,
    )


@main.command("describe-image")
@click.argument("image_path", type=click.Path(exists=True))
@click.option("--output", type=click.Path(), default=None)
@click.pass_obj
def describe_image_cmd(state: CliState, image_path, output):
    """Build the informative description for one local image."""
    from .describe import describe_image

    media = MediaStore()
    gateway = state.gateway(media).for_run(Diagnostics())
    image = load_image(image_path, media)
    description = describe_image(gateway, image)
    _emit(description.to_dict(), output)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--runs", "runs_dir", type=click.Path(), required=True,
              help="Run store directory.")
@click.option("--annotations", "annotations_path", type=click.Path(), default=None,
              help="Annotation store file (JSONL); enables annotation endpoints.")
@click.option("--study", "study_path", type=click.Path(), default=None,
              help="Study definition (tasks, responses, assignments) as JSON.")
@click.option("--synchronous", is_flag=True, default=False,
              help="Execute runs inside the submit request instead of a worker pool.")
@click.option("--ui", "ui_dir", type=click.Path(exists=True, file_okay=False),
              default=None,
              help="Static asset directory (annotation workbench) served at /.")
@click.pass_obj
def serve(state: CliState, host, port, runs_dir, annotations_path, study_path,
          synchronous, ui_dir):
    """Serve the correction and annotation HTTP API."""
    import uvicorn

    from .service import create_app, load_study_or_none

    media = MediaStore()
    app = create_app(
        gateway=state.gateway(media),
        registry=state.registry(),
        config=state.pipeline_config(),
        run_store=RunStore(runs_dir),
        annotation_store=AnnotationStore(annotations_path) if annotations_path else None,
        study=load_study_or_none(study_path),
        synchronous=synchronous,
        ui_dir=ui_dir,
    )
    uvicorn.run(app, host=host, port=port)


def _load_annotations(path: str):
    try:
        annotations = AnnotationStore(path).load_all()
    except (KeyError, ValueError) as exc:
        raise click.ClickException(f"malformed annotation file {path}: {exc}")
    if not annotations:
        raise click.ClickException(f"no annotations in {path}")
    return annotations


@main.command()
@click.argument("annotations_file", type=click.Path(exists=True))
@click.option("--output", type=click.Path(), default=None)
def evaluate(annotations_file, output):
    """Blend annotations into per-response criterion scores."""
    annotations = _load_annotations(annotations_file)
    try:
        scores = response_scores(annotations)
    except MissingAnnotation as exc:
        raise click.ClickException(str(exc))
    _emit([scores[key] for key in sorted(scores)], output)


@main.command()
@click.argument("annotations_file", type=click.Path(exists=True))
@click.option("--weights", type=click.Choice(["linear", "quadratic"]),
              default="linear", show_default=True)
@click.option("--output", type=click.Path(), default=None)
def agreement(annotations_file, weights, output):
    """Inter-annotator agreement per criterion over double-annotated units."""
    annotations = _load_annotations(annotations_file)
    _emit(agreement_summary(annotations, weights=weights), output)


@main.command()
@click.argument("annotations_file", type=click.Path(exists=True))
@click.option("--group-by", "group_by", type=click.Choice(GROUPABLE_LABELS),
              default=None, help="Also break results down by this task label.")
@click.option("--json", "json_path", type=click.Path(), default=None,
              help="Write the full report as JSON here.")
@click.option("--csv", "csv_path", type=click.Path(), default=None,
              help="Write the flat per-criterion table as CSV here.")
def report(annotations_file, group_by, json_path, csv_path):
    """Approach comparison report from annotation files."""
    annotations = _load_annotations(annotations_file)
    try:
        built = build_report(annotations, group_by=group_by)
    except MissingAnnotation as exc:
        raise click.ClickException(str(exc))
    if json_path:
        write_report_json(built, json_path)
    if csv_path:
        write_report_csv(built, csv_path)
    if not json_path and not csv_path:
        click.echo(json.dumps(built, indent=2, ensure_ascii=False, sort_keys=True))


if __name__ == "__main__":
    sys.exit(main())
