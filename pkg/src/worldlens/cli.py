"""Command-line entry points."""
from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from . import engine, errors, interchange, preference
from .report import emit_report


def _out_dir(value):
    return os.environ.get("WORLDLENS_OUT", value)


@click.group()
def main():
    """Deterministic driving-video evaluation over precomputed artifacts."""


@main.command("eval")
@click.option("--manifest", required=True, type=click.Path(exists=True))
@click.option("--metrics", default="", help="Comma-separated metric ids (default: all)")
@click.option("--workers", default=1, type=int, show_default=True)
@click.option("--out", default=".", help="Output directory (env WORLDLENS_OUT overrides)")
@click.option("--format", "fmt", default="json", show_default=True,
              type=click.Choice(["json", "csv", "md", "radar"]))
def eval_cmd(manifest, metrics, workers, out, fmt):
    """Run the selected metrics and write a report."""
    selected = [m.strip() for m in metrics.split(",") if m.strip()]
    config = engine.RunConfig(manifest_path=manifest, metrics=selected,
                              workers=workers, out_dir=_out_dir(out))
    try:
        report = engine.run_evaluation(config)
    except errors.WorldLensError as exc:
        raise click.ClickException(f"{type(exc).__name__}: {exc}")
    path = emit_report(report, fmt, config.out_dir)
    if fmt != "json":
        emit_report(report, "json", config.out_dir)
    for w in sorted(report.warnings):
        click.echo(f"warning: {w}", err=True)
    click.echo(f"wrote {path}")


@main.command("report")
@click.option("--report", "report_path", "--in", required=True,
              type=click.Path(exists=True), help="Existing report.json")
@click.option("--format", "fmt", required=True,
              type=click.Choice(["json", "csv", "md", "radar"]))
@click.option("--out", default=".", help="Output directory (env WORLDLENS_OUT overrides)")
def report_cmd(report_path, fmt, out):
    """Re-emit an existing JSON report in another format."""
    with open(report_path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    from .report import MetricReport
    report = MetricReport(meta=doc.get("meta", {}), scores=doc.get("scores", {}),
                          per_video=doc.get("per_video", {}),
                          warnings=doc.get("warnings", []))
    path = emit_report(report, fmt, _out_dir(out))
    click.echo(f"wrote {path}")


@main.command("validate-artifacts")
@click.option("--manifest", required=True, type=click.Path(exists=True))
def validate_cmd(manifest):
    """Check every artifact the manifest references; exit 1 on diagnostics."""
    try:
        m = interchange.load_manifest(manifest)
        diagnostics = engine.validate_artifacts(m)
    except errors.WorldLensError as exc:
        click.echo(f"{type(exc).__name__}: {exc}")
        sys.exit(1)
    for d in diagnostics:
        click.echo(d)
    if diagnostics:
        sys.exit(1)
    click.echo("ok")


@main.group()
def prefs():
    """Human-preference record tools."""


@prefs.command("stats")
@click.option("--records", required=True, type=click.Path(exists=True))
@click.option("--model", required=True)
def prefs_stats(records, model):
    """Per-dimension order statistics for one model."""
    recs = preference.load_records(records)
    out = {}
    for dim in preference.DIMENSIONS:
        try:
            s = preference.dimension_stats(recs, dim, model)
        except errors.NoRecords:
            continue
        out[dim] = {"min": s.min, "max": s.max, "mean": s.mean, "std": s.std,
                    "median": s.median, "q25": s.q25, "q75": s.q75}
    click.echo(json.dumps(out, sort_keys=True, indent=2))


@prefs.command("reconcile")
@click.option("--records", required=True, type=click.Path(exists=True))
@click.option("--threshold", default=3, type=int, show_default=True)
def prefs_reconcile(records, threshold):
    """List items whose group scores diverge by at least the threshold."""
    recs = preference.load_records(records)
    click.echo(json.dumps(preference.reconcile_groups(recs, threshold),
                          sort_keys=True, indent=2))


@prefs.command("export-sft")
@click.option("--records", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def prefs_export(records, out):
    """Write validated records as newline-delimited training samples."""
    recs = preference.load_records(records)
    try:
        text = preference.serialize_sft(preference.export_sft(recs))
    except errors.WorldLensError as exc:
        raise click.ClickException(f"{type(exc).__name__}: {exc}")
    Path(out).write_text(text, encoding="utf-8")
    click.echo(f"wrote {out}")


if __name__ == "__main__":
    main()
