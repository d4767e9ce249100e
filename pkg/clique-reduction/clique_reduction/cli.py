"""
Command-line front end for clique-reduction.

Every generating command takes ``--seed``; nothing depends on the clock. Machine
output goes to files, stdout carries short human-readable summaries.
"""
import functools
import logging
import os
import sys
import traceback
from math import comb
from typing import Optional

import click
from pydantic import ValidationError as PydanticValidationError

from .adversarial import WorstCaseFiltration, WorstCaseParams, worst_case_audit, worst_case_filtration
from .bench import ExperimentConfig, emit_csv, emit_svg, fit_rows, loglog_fit, read_table, run_experiment
from .config import describe_settings, get_setting, update_settings
from .errors import BadPolicy, CliqueReductionError, ParseError, ValidationError
from .flagfilt import EdgeOrder, Explicit, Filtration, boundary_matrix, build_columns
from .homology import (betti1_profile, betti_probability_scan, check_fillup_betti_bound, critical_implies_cycle,
                       default_grid, emit_profile_csv, emit_scan_csv, fillup_betti_bound)
from .randmodels import Seed, VRSample, er_order, vr_order
from .z2core import reduce

logger = logging.getLogger("clique-reduction.cli")

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
HEADER = "filtration v1"


# ---------------------------------------------------------------------------
# filtration v1 codec
# ---------------------------------------------------------------------------

def _ints(line_no: int, text: str, count: int, what: str) -> list[int]:
    parts = text.split()
    if len(parts) != count:
        raise ParseError(line_no, f"expected {count} integers for {what}, got {len(parts)}")
    try:
        return [int(part) for part in parts]
    except ValueError:
        raise ParseError(line_no, f"{what} must be integers: {text!r}") from None


def _keyword(line_no: int, text: Optional[str], keyword: str) -> int:
    if text is None:
        raise ParseError(line_no, f"missing '{keyword} <int>' line")
    parts = text.split()
    if len(parts) != 2 or parts[0] != keyword:
        raise ParseError(line_no, f"expected '{keyword} <int>', got {text!r}")
    try:
        value = int(parts[1])
    except ValueError:
        raise ParseError(line_no, f"'{keyword}' needs an integer, got {parts[1]!r}") from None
    if value < 0:
        raise ParseError(line_no, f"'{keyword}' must be non-negative")
    return value


def parse_filtration(text: str) -> Filtration:
    """
    Parse the filtration v1 text format.

    Without a ``columns`` section the default tie policy orders the triangles.

    Raises:
        ParseError: If the text does not follow the grammar
        ValidationError: If the edges are not a permutation of the complete graph or the
            columns are not a permutation of the triangles in entry-time order
    """
    lines = text.split("\n")
    while lines and not lines[-1].strip():
        lines.pop()

    def line(k):
        return lines[k] if k < len(lines) else None

    if line(0) is None or line(0).strip() != HEADER:
        raise ParseError(1, f"first line must be '{HEADER}'")
    n = _keyword(2, line(1), "n")
    m = _keyword(3, line(2), "edges")
    if len(lines) < 3 + m:
        raise ParseError(len(lines) + 1, f"expected {m} edge lines, file ends early")
    edges = [tuple(_ints(3 + k + 1, lines[3 + k], 2, "an edge")) for k in range(m)]
    edge_order = EdgeOrder(n=n, order=tuple(edges))

    cursor = 3 + m
    if cursor == len(lines):
        return Filtration.from_edge_order(edge_order)
    t = _keyword(cursor + 1, line(cursor), "columns")
    if len(lines) != cursor + 1 + t:
        raise ParseError(min(len(lines), cursor + 1 + t) + 1,
                         f"expected exactly {t} column lines after 'columns {t}'")
    triangles = [tuple(_ints(cursor + 2 + k, lines[cursor + 1 + k], 3, "a triangle")) for k in range(t)]
    if t != comb(n, 3):
        raise ValidationError(f"expected {comb(n, 3)} columns for n={n}, got {t}")
    policy = Explicit.from_column_sequence(edge_order, triangles)
    try:
        return Filtration.from_edge_order(edge_order, policy)
    except BadPolicy as e:
        raise ValidationError(f"columns are not a permutation of the triangles: {e}") from e


def format_filtration(f: Filtration, columns: Optional[bool] = None) -> str:
    """
    Render a filtration in the v1 format.

    The ``columns`` section is written when asked for, or by default whenever the
    column order differs from the default tie policy.
    """
    if columns is None:
        columns = f.column_order != build_columns(f.edge_order)
    out = [HEADER, f"n {f.n}", f"edges {f.m}"]
    out.extend(f"{u} {v}" for u, v in f.edge_order.order)
    if columns:
        out.append(f"columns {len(f.column_order)}")
        out.extend(f"{u} {v} {w}" for u, v, w in f.column_order.triangles)
    return "\n".join(out) + "\n"


def _not_utf8(path: str, e: UnicodeDecodeError) -> click.ClickException:
    return click.ClickException(f"{path}: not UTF-8 text ({e.reason} at byte {e.start})")


def read_filtration(path: str) -> Filtration:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except UnicodeDecodeError as e:
        raise _not_utf8(path, e) from e
    try:
        return parse_filtration(text)
    except CliqueReductionError as e:
        raise click.ClickException(f"{path}: {e}") from e


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def format_vr_sidecar(sample: VRSample) -> str:
    """Point coordinates and per-rank edge lengths, as plain text."""
    cloud = sample.cloud
    out = [f"points {cloud.n} {cloud.d}"]
    out.extend(" ".join(repr(float(x)) for x in row) for row in cloud.points)
    out.append(f"lengths {len(sample.lengths)}")
    out.extend(f"{rank} {length!r}" for rank, length in enumerate(sample.lengths))
    return "\n".join(out) + "\n"


def format_group_sidecar(wc: WorstCaseFiltration) -> str:
    """One ``rank,u,v,group,u_label,v_label`` row per edge of a worst-case filtration."""
    label = wc.params.vertex_label
    out = ["rank,u,v,group,u_label,v_label"]
    out.extend(f"{rank},{u},{v},{group},{label(u)},{label(v)}" for rank, u, v, group in wc.grouped.rows())
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def configure_logging(debug: bool) -> None:
    """Log to stderr and to the CLI log file; ``--debug`` switches everything to DEBUG."""
    if debug:
        update_settings(log_level=logging.DEBUG)
    level = get_setting("log_level", logging.INFO)
    logs_dir = get_setting("logs_dir")
    handlers = [logging.StreamHandler()]
    try:
        os.makedirs(logs_dir, exist_ok=True)
        handlers.append(logging.FileHandler(os.path.join(logs_dir, "clique_reduction.log")))
    except OSError as e:
        print(f"Warning: cannot write logs to {logs_dir}: {e}", file=sys.stderr)
    logging.basicConfig(level=logging.WARNING, format=LOG_FORMAT, handlers=handlers)
    logging.getLogger("clique-reduction").setLevel(level)
    if debug:
        logger.debug("Debug mode enabled")
        for line in describe_settings():
            logger.debug(f"Setting {line}")


def reported(func):
    """Turn domain and file errors into a one-line message and exit status 1."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (CliqueReductionError, PydanticValidationError) as e:
            logger.debug(f"{func.__name__} failed: {e}\n{traceback.format_exc()}")
            raise click.ClickException(str(e)) from e
        except OSError as e:
            logger.debug(f"{func.__name__} failed: {e}\n{traceback.format_exc()}")
            where = f"{e.filename}: " if e.filename else ""
            raise click.ClickException(f"{where}{e.strerror or e}") from e
    return wrapper


def _sizes(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise click.BadParameter(f"expected a comma-separated list of integers, got {text!r}") from None


@click.group()
@click.option("--debug", is_flag=True, help="Enable debug mode with verbose logging")
@click.option("--workers", type=click.IntRange(min=1), default=None,
              help="Worker processes for experiments and scans (1 runs in-process)")
def cli(debug: bool, workers: Optional[int]):
    """Matrix reduction on clique filtrations: generate, reduce, measure."""
    configure_logging(debug)
    if workers is not None:
        update_settings(workers=workers)


@cli.command()
@click.option("--model", type=click.Choice(["er", "vr", "worst"]), required=True)
@click.option("--n", "n", type=click.IntRange(min=2), default=None, help="Vertex count (er, vr)")
@click.option("--dim", type=click.IntRange(min=1), default=2, show_default=True, help="Dimension (vr)")
@click.option("--p", "p", type=int, default=None, help="Group size (worst)")
@click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), required=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
@click.option("--sidecar", type=click.Path(dir_okay=False), default=None,
              help="Write VR points and lengths, or worst-case group labels")
@reported
def gen(model, n, dim, p, seed, output, sidecar):
    """Generate a filtration and write it in the v1 format."""
    s = Seed(seed).derive(f"gen-{model}")
    sidecar_text = None
    if model == "worst":
        if p is None:
            raise click.UsageError("--p is required for --model worst")
        wc = worst_case_filtration(WorstCaseParams(p), s)
        f = wc.filtration
        sidecar_text = format_group_sidecar(wc)
    else:
        if n is None:
            raise click.UsageError(f"--n is required for --model {model}")
        if model == "er":
            f = Filtration.from_edge_order(er_order(n, s))
        else:
            sample = vr_order(n, dim, s)
            f = Filtration.from_edge_order(sample.edge_order)
            sidecar_text = format_vr_sidecar(sample)
    _write_text(output, format_filtration(f))
    if sidecar:
        if sidecar_text is None:
            raise click.UsageError(f"--model {model} has no sidecar")
        _write_text(sidecar, sidecar_text)
    click.echo(f"{model}: n={f.n}, {f.m} edges, {len(f.column_order)} triangles -> {output}")


@cli.command("reduce")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--stats", "stats_path", type=click.Path(dir_okay=False), default=None,
              help="Write the reduction record as JSON")
@click.option("--log-additions", is_flag=True, help="Record which columns were added to each column; printed unless --stats is given")
@reported
def reduce_command(file, stats_path, log_additions):
    """Reduce the boundary matrix of a filtration file."""
    f = read_filtration(file)
    _, stats = reduce(boundary_matrix(f), log_additions=log_additions)
    if stats_path:
        _write_text(stats_path, stats.to_json())
    record = stats.to_record()
    for key in ("r", "c", "fill_up", "cost", "n_step", "n_critical", "additions_total"):
        click.echo(f"{key}: {record[key]}")
    click.echo(f"critical_indices: {record['critical_indices']}")
    if log_additions and not stats_path:
        # without a JSON record the log goes to stdout, one line per column that was added to
        click.echo("addition_log:")
        for index, added in enumerate(stats.addition_log):
            if added:
                click.echo(f"  {index}: {' '.join(str(k) for k in added)}")


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None, help="Write i,betti1 rows")
@reported
def betti(file, output):
    """First Betti numbers along a filtration, with the bound checks they support."""
    f = read_filtration(file)
    reduced, stats = reduce(boundary_matrix(f))
    profile = betti1_profile(f, reduced)
    if output:
        emit_profile_csv(profile, output)
    click.echo(f"max betti1: {max(profile.values)}")
    click.echo(f"steps with betti1 > 0: {len(profile.nonzero_steps())}")
    click.echo(f"critical rows carry a cycle: {critical_implies_cycle(f, reduced, stats, profile)}")
    click.echo(f"fill-up {stats.fill_up} <= {fillup_betti_bound(f, profile)}: "
               f"{check_fillup_betti_bound(stats, f, profile)}")


@cli.command()
@click.option("--p", "p", type=int, required=True, help="Group size, odd and >= 3")
@click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), required=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
@click.option("--audit", is_flag=True, help="Reduce the matrix and check the fat and cascade columns")
@click.option("--sidecar", type=click.Path(dir_okay=False), default=None, help="Write the edge group labels")
@reported
def worst(p, seed, output, audit, sidecar):
    """Write the worst-case filtration for group size p."""
    wc = worst_case_filtration(WorstCaseParams(p), Seed(seed).derive("gen-worst"))
    _write_text(output, format_filtration(wc.filtration, columns=True))
    if sidecar:
        _write_text(sidecar, format_group_sidecar(wc))
    sizes = ", ".join(f"{group}={size}" for group, size in wc.group_sizes().items())
    click.echo(f"worst p={p}: n={wc.params.n}; groups {sizes} -> {output}")
    if audit:
        matrix = boundary_matrix(wc.filtration)
        reduced, stats = reduce(matrix)
        report = worst_case_audit(wc, reduced, stats, original=matrix)
        for line in report.summary_lines():
            click.echo(line)
        if not report.passed:
            raise click.ClickException(f"worst-case audit failed for p={p}")


@cli.command()
@click.option("--model", type=click.Choice(["er", "vr", "worst"]), required=True)
@click.option("--dim", type=click.IntRange(min=1), default=2, show_default=True, help="Dimension (vr)")
@click.option("--ns", "ns", required=True, help="Comma-separated sizes: n for er/vr, p for worst")
@click.option("--trials", type=click.IntRange(min=1), default=None, help="Trials per size")
@click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), required=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
@click.option("--svg", "svg_prefix", default=None, help="Write <prefix>_fillup.svg and <prefix>_cost.svg")
@click.option("--wallclock/--no-wallclock", default=None, help="Measure wall-clock time per reduction")
@reported
def experiment(model, dim, ns, trials, seed, output, svg_prefix, wallclock):
    """Run a seeded sweep and write the aggregated table."""
    options = {"model": model, "sizes": _sizes(ns), "seed": seed, "dim": dim if model == "vr" else None,
               "workers": get_setting("workers")}
    if trials is not None:
        options["trials"] = trials
    if wallclock is not None:
        options["record_wallclock"] = wallclock
    result = run_experiment(ExperimentConfig(**options))
    if result.rows:
        emit_csv(result.rows, output)
        for row in result.rows:
            click.echo(f"{row.model} n={row.n}: fill-up {row.mean_fillup:.3f}, cost {row.mean_cost:.3f}")
    if len(result.rows) >= 2:
        for metric, suffix in (("fill_up", "fillup"), ("cost", "cost")):
            fit = fit_rows(result.rows, metric)
            click.echo(f"{metric} ~ {fit.annotation}")
            if svg_prefix:
                emit_svg(result.rows, fit, f"{svg_prefix}_{suffix}.svg", metric)
    for failure in result.failures:
        click.echo(f"size {failure.size} aborted: {failure.message}")
    if not result.ok:
        raise click.ClickException(f"{len(result.failures)} of {len(result.config.sizes)} rows aborted")


@cli.command()
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--x", "x_column", default="n", show_default=True)
@click.option("--y", "y_column", required=True)
@reported
def fit(csv_path, x_column, y_column):
    """Fit y = lambda * x^e by least squares on log-log scale."""
    try:
        table = read_table(csv_path)
    except UnicodeDecodeError as e:
        raise _not_utf8(csv_path, e) from e
    if table and (x_column not in table[0] or y_column not in table[0]):
        raise click.ClickException(f"{csv_path}: no column named {x_column!r} or {y_column!r}")
    try:
        points = [(float(row[x_column]), float(row[y_column])) for row in table]
    except ValueError as e:
        raise click.ClickException(f"{csv_path}: {e}") from e
    result = loglog_fit(points)
    click.echo(f"lambda: {result.lam:.6f}")
    click.echo(f"exponent: {result.exponent:.6f}")
    click.echo(f"residual: {result.residual:.6g}")


@cli.command()
@click.option("--model", type=click.Choice(["er", "vr"]), required=True)
@click.option("--n", "n", type=click.IntRange(min=2), required=True)
@click.option("--dim", type=click.IntRange(min=1), default=2, show_default=True, help="Dimension (vr)")
@click.option("--trials", type=click.IntRange(min=1), default=None, help="Trials per grid")
@click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), required=True)
@click.option("--grid-points", type=click.IntRange(min=2), default=None, help="Size of the geometric grid")
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
@reported
def scan(model, n, dim, trials, seed, grid_points, output):
    """Estimate P(betti1(K_i) > 0) along the filtration."""
    trials = trials or get_setting("default_trials")
    grid = default_grid(comb(n, 2), grid_points)
    result = betti_probability_scan(model, n, trials, grid, Seed(seed), d=dim)
    emit_scan_csv(result, output)
    click.echo(f"{result.model} n={n}: {trials} trials over {len(grid)} grid points")
    click.echo(f"threshold index: {result.threshold_index}")
    if result.threshold_constant is not None:
        click.echo(f"threshold constant: {result.threshold_constant:.4f}")
        click.echo(f"excess constant: {result.excess_constant:.4f}")


def main(argv=None) -> int:
    """Run the CLI and return its exit status."""
    try:
        cli.main(args=argv, prog_name="clique-reduction", standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
