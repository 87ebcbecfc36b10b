"""Command-line surface: verification checklist, pair tools, reports.

Exit codes: 0 success, 1 verification failure (bound violated, covering
gap, basic-fact mismatch), 2 usage error.  Every numeric value prints
both as an exact rational string and a float convenience.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__
from .bodies import (
    TranslateSet,
    covering_lattice_nine_eighths,
    verify_basic_facts,
)
from .covering import (
    THETA_FLOOR,
    NotACovering,
    certify_covering,
    density as density_of,
    scaled_cell,
    theorem_report,
)
from .overlap import NotOverlapping, config_lower_bound, exact_pair_volume
from .ratmath import Rat, rat, rat_str, vec3
from .search import (
    SearchParams,
    lattice_density,
    minimize_density,
)
from .slices import NoFeasibleHeight, find_good_height, slice_at


def _dual(v) -> str:
    return f"{rat_str(v)} (~{float(v):.9g})"


def _parse_vec(text: str):
    parts = text.split(",")
    if len(parts) != 3:
        raise click.BadParameter(f"expected x,y,z, got {text!r}")
    try:
        return vec3([rat(p.strip()) for p in parts])
    except (ValueError, ZeroDivisionError) as exc:
        raise click.BadParameter(f"bad coordinate in {text!r}: {exc}")


def _parse_rat(text: str):
    try:
        return rat(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise click.BadParameter(f"bad rational {text!r}: {exc}")


def _load_translates(path: str) -> TranslateSet:
    return TranslateSet.from_json(Path(path).read_text())


@click.group()
@click.version_option(__version__)
@click.option(
    "--workers",
    type=int,
    default=None,
    envvar="OCTACOVER_WORKERS",
    help="Worker hint; results are worker-count independent.",
)
@click.pass_context
def main(ctx, workers):
    """Exact verification and search tools for octahedron coverings."""
    ctx.ensure_object(dict)
    ctx.obj["workers"] = workers


@main.command("verify-facts")
def verify_facts_cmd():
    """Run the exact basic-fact checklist for the two bodies."""
    results = verify_basic_facts()
    ok = True
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        click.echo(f"{status}  {r.name}: {r.computed} (expected {r.expected})")
        ok &= r.passed
    sys.exit(0 if ok else 1)


@main.command("pair-volume")
@click.option("--xi", required=True, help="first translate, x,y,z")
@click.option("--xj", required=True, help="second translate, x,y,z")
def pair_volume_cmd(xi, xj):
    """Exact intersection volume of two translated octahedra."""
    v = exact_pair_volume(_parse_vec(xi), _parse_vec(xj))
    click.echo(_dual(v))


@main.command("pair-bound")
@click.option("--xi", required=True, help="anchor translate, x,y,z")
@click.option("--xj", required=True, help="other translate, x,y,z")
@click.option("--height", required=True, help="slice height z0 (rational)")
def pair_bound_cmd(xi, xj, height):
    """Closed-form overlap certificate for a pair at a slice height."""
    z0 = _parse_rat(height)
    sa = slice_at(_parse_vec(xi), z0)
    sb = slice_at(_parse_vec(xj), z0)
    if sa is None or sb is None:
        click.echo(f"no slice at height {rat_str(z0)}")
        sys.exit(1)
    try:
        pb = config_lower_bound(sa, sb)
    except NotOverlapping:
        click.echo("slices do not overlap")
        sys.exit(1)
    click.echo(f"config: {pb.kind}")
    click.echo(f"certificate: {pb.certificate}")
    click.echo(f"value: {_dual(pb.value)}")
    click.echo(f"in_window: {pb.in_window}")
    exact = exact_pair_volume(_parse_vec(xi), _parse_vec(xj))
    click.echo(f"exact_pair_volume: {_dual(exact)}")


@main.command("good-height")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
def good_height_cmd(input_path):
    """Good slice height for a translate file (anchor listed last)."""
    x_set = _load_translates(input_path)
    try:
        z0 = find_good_height(x_set)
    except NoFeasibleHeight as exc:
        click.echo(f"no feasible height: {exc}")
        sys.exit(1)
    click.echo(_dual(z0))


@main.command("certify")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--grid", default="1/32", help="grid step h (rational)")
@click.option("--scale", default="1", help="region scale r for r*P")
def certify_cmd(input_path, grid, scale):
    """Grid-margin covering certification over the scaled cell."""
    x_set = _load_translates(input_path)
    region = scaled_cell(_parse_rat(scale))
    cert = certify_covering(x_set, region, _parse_rat(grid))
    click.echo(f"status: {cert.status}")
    click.echo(f"cells_checked: {cert.cells_checked}")
    click.echo(f"margin_rule: {cert.margin_rule}")
    for w in cert.gap_witnesses[:10]:
        click.echo("gap_witness: " + ",".join(rat_str(c) for c in w))
    if len(cert.gap_witnesses) > 10:
        click.echo(f"... {len(cert.gap_witnesses) - 10} more witnesses")
    sys.exit(0 if cert.certified else 1)


@main.command("density")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--scale", default="1", help="region scale r for r*P")
def density_cmd(input_path, scale):
    """Exact localized density over the scaled cell."""
    x_set = _load_translates(input_path)
    region = scaled_cell(_parse_rat(scale))
    click.echo(_dual(density_of(x_set, region)))


@main.command("theorem")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--grid", default="1/32", help="grid step h (rational)")
@click.option("--out", "out_path", type=click.Path(), default=None)
@click.option("--assume-covering", is_flag=True,
              help="skip grid certification (caller holds an exact proof)")
def theorem_cmd(input_path, grid, out_path, assume_covering):
    """End-to-end density report against the 1 + 4/6^10 floor."""
    x_set = _load_translates(input_path)
    report = theorem_report(
        x_set, _parse_rat(grid), assume_covering=assume_covering
    )
    click.echo(f"case_used: {report.case_used}")
    click.echo(f"coverage: {report.coverage_status}")
    click.echo(f"theta: {_dual(report.theta)}")
    if report.bound_value is not None:
        click.echo(f"bound_value: {_dual(report.bound_value)}")
    click.echo(f"bound_satisfied: {report.bound_satisfied}")
    if out_path:
        Path(out_path).write_text(
            json.dumps(report.to_json_obj(), indent=2) + "\n"
        )
        _plot_certificates(report, Path(out_path).with_suffix(".png"))
    sys.exit(0 if report.bound_satisfied else 1)


@main.command("search")
@click.option("--seed", type=int, default=0)
@click.option("--iters", type=int, default=10_000)
@click.option("--grid", default="1/8", help="grid step h (rational)")
@click.option("--out-prefix", "prefix", type=click.Path(), default=None,
              help="write <prefix>_trace.csv, <prefix>_best.json, <prefix>_theta.png")
def search_cmd(seed, iters, grid, prefix):
    """Annealing run thinning a covering of the cell from the lattice start."""
    params = SearchParams(
        iterations=iters, seed=seed, grid_step=_parse_rat(grid)
    )
    trace = minimize_density(params)
    click.echo(f"iterations: {iters}")
    click.echo(f"best_theta: {_dual(trace.best_theta)}")
    click.echo(f"best_size: {len(trace.best_translates)}")
    click.echo(f"floor: {_dual(THETA_FLOOR)}")
    click.echo(f"above_floor: {trace.best_theta >= THETA_FLOOR}")
    if prefix:
        base = Path(prefix)
        base.parent.mkdir(parents=True, exist_ok=True)
        Path(f"{base}_trace.csv").write_text(
            "\n".join(trace.csv_lines()) + "\n"
        )
        Path(f"{base}_best.json").write_text(
            trace.best_translates.to_json() + "\n"
        )
        _plot_trace(trace, Path(f"{base}_theta.png"))
    sys.exit(0 if trace.best_theta >= THETA_FLOOR else 1)


@main.command("lattice")
@click.option("--scale", default="1", help="scale factor for the 9/8 basis")
@click.option("--region-scale", default=None,
              help="also measure theta over r*P for this r")
def lattice_cmd(scale, region_scale):
    """Intrinsic density of the (scaled) 9/8 covering lattice."""
    basis = covering_lattice_nine_eighths().scaled(_parse_rat(scale))
    region = (
        scaled_cell(_parse_rat(region_scale)) if region_scale else None
    )
    try:
        rep = lattice_density(basis, region)
    except NotACovering as exc:
        click.echo(f"NotACovering: {exc}")
        sys.exit(1)
    click.echo(f"intrinsic: {_dual(rep.intrinsic)}")
    if rep.region_theta is not None:
        click.echo(f"region_theta: {_dual(rep.region_theta)}")


def _plot_trace(trace, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4))
    xs = [r.iteration for r in trace.records]
    ys = [r.theta_proxy for r in trace.records]
    ax.plot(xs, ys, lw=0.8, label="grid multiplicity proxy")
    ax.axhline(float(THETA_FLOOR), color="red", ls="--", lw=0.8,
               label="1 + 4/6^10")
    ax.set_xlabel("iteration")
    ax.set_ylabel("theta (grid proxy)")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _plot_certificates(report, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4))
    values = [float(c.value) for c in report.certificates]
    if values:
        ax.bar(range(len(values)), values)
        ax.set_yscale("log")
    ax.axhline(float(Rat(4, 3**10)), color="red", ls="--", lw=0.8,
               label="4/3^10 floor")
    ax.set_xlabel("certificate")
    ax.set_ylabel("pairwise volume bound")
    ax.set_title(f"case {report.case_used}")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


if __name__ == "__main__":
    main()
