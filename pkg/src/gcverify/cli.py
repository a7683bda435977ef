"""Command-line front end.

Exit codes: 0 all checks pass, 1 some check fails, 2 configuration or schema
error, 3 sampling was inconclusive.  JSON goes to stdout, the human summary
to stderr.
"""
from __future__ import annotations

import json
import sys

import click
import numpy as np

from .cover_glue import classify_at
from .errors import DomainError, SceneError
from .scene import EXPORTABLE, export_scene, load_scene
from .suites import SUITES, Fixtures, RunConfig, run_suite, suite_checks

EXIT_SCHEMA = 2
U64 = click.IntRange(0, 2**64 - 1)


def _emit(report, json_only: bool) -> None:
    click.echo(report.to_json())
    if not json_only:
        click.echo(report.summary(), err=True)
    sys.exit(report.exit_code)


def _config_error(msg: str) -> None:
    click.echo(f"error: {msg}", err=True)
    sys.exit(EXIT_SCHEMA)


def _run_flags(f):
    f = click.option("--json-only", is_flag=True, help="Suppress the summary on stderr.")(f)
    f = click.option("--samples", type=click.IntRange(min=1), default=None, help="Points per check [64].")(f)
    f = click.option("--tol", type=click.FloatRange(min=0, min_open=True), default=None,
                     help="Override every upper-bound tolerance.")(f)
    f = click.option("--seed", type=U64, default=None, help="Base seed [42].")(f)
    return f


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def main():
    """Numerical verification of generalized complex geometry."""


@main.command()
@click.option("--builtin", "name", required=True, type=click.Choice(sorted(SUITES) + ["all"]),
              help="Built-in suite to run.")
@_run_flags
def verify(name, seed, tol, samples, json_only):
    """Run a built-in verification suite."""
    cfg = RunConfig(42 if seed is None else seed, 64 if samples is None else samples, tol)
    _emit(run_suite(name, cfg), json_only)


@main.command()
@click.argument("scene_path", type=click.Path(dir_okay=False))
@_run_flags
def run(scene_path, seed, tol, samples, json_only):
    """Run the checks of a JSON scene file."""
    try:
        scene = load_scene(scene_path)
    except SceneError as exc:
        _config_error(str(exc))
    _emit(scene.run(scene.config(seed, samples, tol)), json_only)


def _parse_point(text: str) -> np.ndarray:
    try:
        p = np.array([float(x) for x in text.replace(",", " ").split()])
    except ValueError:
        raise click.BadParameter(f"not a list of numbers: {text!r}", param_hint="--point")
    if p.size == 0:
        raise click.BadParameter("empty point", param_hint="--point")
    return p


@main.command()
@click.option("--builtin", "builtin", type=click.Choice(["hopf"]), default=None, help="Built-in cover.")
@click.option("--scene", "scene_path", type=click.Path(dir_okay=False), default=None, help="Scene file with covers.")
@click.option("--cover", "cover_name", default=None, help="Cover name inside the scene.")
@click.option("--point", required=True, help="Real coordinates, comma or space separated.")
def classify(builtin, scene_path, cover_name, point):
    """Type, Poisson rank and parity of the structure at a point."""
    p = _parse_point(point)
    if (builtin is None) == (scene_path is None):
        _config_error("give exactly one of --builtin or --scene")
    if builtin is not None:
        cov = Fixtures().hopf_cover
    else:
        try:
            scene = load_scene(scene_path)
        except SceneError as exc:
            _config_error(str(exc))
        if cover_name is None and len(scene.covers) == 1:
            cover_name = next(iter(scene.covers))
        if cover_name not in scene.covers:
            _config_error(f"cover {cover_name!r} not found; scene has {sorted(scene.covers)}")
        cov = scene.covers[cover_name]
    if p.size != cov.charts[0].m:
        _config_error(f"point needs {cov.charts[0].m} coordinates, got {p.size}")
    try:
        out = classify_at(cov, p)
    except DomainError as exc:
        _config_error(str(exc))
    click.echo(json.dumps(out, sort_keys=True))


@main.command()
@click.option("--builtin", "name", required=True, type=click.Choice(sorted(EXPORTABLE)), help="Fixture to export.")
def export(name):
    """Print a fixture as a JSON scene."""
    click.echo(json.dumps(export_scene(name), sort_keys=True, indent=1))


@main.command("list")
def list_suites():
    """List built-in suites and their checks."""
    fx = Fixtures()
    for name in sorted(SUITES):
        checks = suite_checks(name, fx)
        click.echo(f"{name} ({sum(len(c.specs) for c in checks)} checks)")


if __name__ == "__main__":  # pragma: no cover
    main()
