"""
Command-line interface for lowzero.

Subcommands compute the headline bounds, reproduce the published tables,
check the moment formulas against random matrices and run the self-test
suite. Results go to stdout (or ``--output``); logs and errors go to stderr.

Exit codes: 0 success, 1 numerical failure, 2 usage error.
"""

import io
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, NoReturn, Optional

import click
from rich.console import Console

from lowzero import __version__
from lowzero.bounds import (
    PUBLISHED_TABLES,
    calibrate_a,
    even_range,
    omega_min_closed_form,
    omega_min_solver,
    percent_table,
    published_table,
)
from lowzero.config import load_config
from lowzero.formatters.records import (
    reports_json,
    table_csv,
    table_payload,
    to_json,
    write_figure_data,
)
from lowzero.formatters.text import checks_table, percent_table_view, report_panel
from lowzero.manifest import RunManifest, manifest_path
from lowzero.numerics.kernels import KERNEL_NAMES, get_kernel
from lowzero.numerics.moments import MomentSpec
from lowzero.numerics.quad import RULES, QuadConfig
from lowzero.numerics.testfun import CURVATURES, make_naive
from lowzero.rmt import RmtConfig, rmt_check
from lowzero.selftest import run_selftest
from lowzero.utils.file_utils import write_file
from lowzero.utils.logging_utils import setup_logger

# Status and errors on stderr; results on stdout.
console = Console(stderr=True)
out = Console()
logger = setup_logger()

LOG_LEVELS = ["debug", "info", "warning", "error"]


def common_options(func: Callable[..., Any]) -> Callable[..., Any]:
    """Options shared by every computing subcommand."""
    options = [
        click.option(
            "--config",
            "-c",
            type=click.Path(exists=True, dir_okay=False),
            help="Path to configuration file",
        ),
        click.option(
            "--log-level",
            type=click.Choice(LOG_LEVELS, case_sensitive=False),
            default=None,
            help="Set the logging level (default: logging.level from config)",
        ),
        click.option(
            "--threads",
            type=click.IntRange(min=1),
            default=None,
            help="Worker processes (falls back to LOWZERO_THREADS)",
        ),
        click.option(
            "--output",
            "-o",
            type=click.Path(),
            default=None,
            help="Write results to this file",
        ),
        click.option(
            "--manifest",
            type=click.Path(dir_okay=False),
            default=None,
            help="Manifest path",
        ),
        click.option(
            "--no-manifest",
            is_flag=True,
            default=False,
            help="Do not write a run manifest",
        ),
        click.option(
            "--grid",
            type=click.IntRange(min=8),
            default=None,
            help="Quadrature points per dimension",
        ),
        click.option("--tol", type=float, default=None, help="Quadrature tolerance"),
        click.option(
            "--rule", type=click.Choice(RULES), default=None, help="1-D quadrature rule"
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@dataclass
class RunContext:
    """Resolved settings of one invocation."""

    config: Dict[str, Any]
    quad: QuadConfig
    threads: int
    output: Optional[str]
    manifest: Optional[str]
    no_manifest: bool
    started: float

    @classmethod
    def from_options(cls, options: Dict[str, Any]) -> "RunContext":
        config = load_config(options.get("config"))
        setup_logger(options.get("log_level") or config["logging"]["level"])
        try:
            quad = QuadConfig.from_config(
                config,
                points_per_dim=options.get("grid"),
                tolerance=options.get("tol"),
                rule=options.get("rule"),
            )
        except ValueError as e:
            raise click.UsageError(str(e))
        threads = options.get("threads") or config["threads"]
        logger.debug(f"Quadrature {quad}, threads {threads}")
        return cls(
            config=config,
            quad=quad,
            threads=int(threads),
            output=options.get("output"),
            manifest=options.get("manifest"),
            no_manifest=bool(options.get("no_manifest")),
            started=time.perf_counter(),
        )

    def emit(self, text: str) -> None:
        if self.output:
            write_file(self.output, text)
            console.print(f"Results written to [bold]{self.output}[/bold]")
        else:
            click.echo(text, nl=False)

    def show(self, renderable: Any) -> None:
        """Rich output to the terminal, or captured as plain text for ``--output``."""
        if self.output:
            buffer = io.StringIO()
            Console(file=buffer, width=100, color_system=None).print(renderable)
            self.emit(buffer.getvalue())
        else:
            out.print(renderable)

    def finish(self, ctx: click.Context, subcommand: str) -> None:
        if self.no_manifest:
            return
        record = RunManifest(
            subcommand=subcommand,
            params=dict(ctx.params),
            version=__version__,
            duration=round(time.perf_counter() - self.started, 3),
            resolved={"quadrature": asdict(self.quad), "threads": self.threads},
        )
        record.write(manifest_path(subcommand, self.output, self.manifest))


def _fail(action: str, e: Exception) -> NoReturn:
    console.print(f"[bold red]Error:[/bold red] {str(e)}")
    logger.error(f"{action} failed: {str(e)}", exc_info=True)
    sys.exit(1)


def _parse_levels(values: List[str]) -> List[int]:
    levels = []
    for value in values:
        for part in str(value).split(","):
            part = part.strip()
            if not part:
                continue
            try:
                levels.append(int(part))
            except ValueError:
                raise click.BadParameter(
                    f"{part!r} is not an integer level", param_hint="--n-level"
                )
    return levels


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, "-v", "--version", prog_name="lowzero")
def main() -> None:
    """
    lowzero: numerical bounds on low-lying zeros of L-functions.

    Computes the smallest interval around the central point guaranteed to
    hold a normalized zero, bounds the share of forms with many zeros near
    the central point, and checks the moment formulas against random
    orthogonal matrices.
    """
    pass


@main.command("omega-min")
@click.option(
    "--n-level", "n_level", type=int, default=1, show_default=True, help="Odd level n"
)
@click.option(
    "--a",
    "a",
    type=click.IntRange(min=1),
    default=None,
    help="S-parameter (default: n)",
)
@click.option("--sigma", type=float, default=None, help="Support budget (default 2)")
@click.option(
    "--kernel",
    type=click.Choice(KERNEL_NAMES + ("cosine",)),
    default=None,
    help="Seed kernel",
)
@click.option(
    "--method",
    type=click.Choice(["closed-form", "solve"]),
    default=None,
    help="closed-form (n = 1) or solve",
)
@click.option(
    "--curvature",
    type=click.Choice(CURVATURES),
    default=None,
    help="Boundary curvature convention",
)
@click.option(
    "--bracket",
    type=float,
    nargs=2,
    default=None,
    help="Search interval for the solver",
)
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["json", "text"]),
    default="json",
    show_default=True,
)
@common_options
@click.pass_context
def omega_min(
    ctx: click.Context,
    n_level: int,
    a: Optional[int],
    sigma: Optional[float],
    kernel: Optional[str],
    method: Optional[str],
    curvature: Optional[str],
    bracket: Optional[List[float]],
    fmt: str,
    **options: Any,
) -> None:
    """
    Smallest omega such that some form has a normalized zero in (-omega, omega).
    """
    run = RunContext.from_options(options)
    settings = run.config["omega"]
    if n_level < 1 or n_level % 2 == 0:
        raise click.UsageError(
            f"--n-level must be a positive odd level, got {n_level}; even levels bound "
            "percentages (see `lowzero percent`)"
        )
    method = method or ("closed-form" if n_level == 1 else "solve")
    if method == "closed-form" and n_level != 1:
        raise click.UsageError("--method closed-form is only available for --n-level 1")

    try:
        k = get_kernel(kernel or settings["kernel"])
        sigma = sigma if sigma is not None else float(settings["sigma"])
        curvature = curvature or settings["curvature"]
        if method == "closed-form":
            report = omega_min_closed_form(k, sigma, run.quad, curvature=curvature)
        else:
            console.print(
                f"Solving for omega_min at level [bold]{n_level}[/bold] "
                f"with kernel {k.name}..."
            )
            report = omega_min_solver(
                MomentSpec(n=n_level, a=a, sign=1, sigma=sigma),
                k,
                run.quad,
                bracket=tuple(bracket) if bracket else tuple(settings["bracket"]),
                scan_points=int(settings["scan_points"]),
                root_tolerance=float(settings["root_tolerance"]),
                curvature=curvature,
                threads=run.threads,
            )
        if fmt == "text":
            run.show(report_panel(report))
        else:
            run.emit(reports_json([report]))
        run.finish(ctx, "omega-min")
    except click.ClickException:
        raise
    except ValueError as e:
        raise click.UsageError(str(e))
    except Exception as e:
        _fail("omega-min", e)


@main.command()
@click.option(
    "--n-level",
    "n_level",
    multiple=True,
    help="Even level(s); repeat or give a comma list",
)
@click.option("--r", "r", type=int, default=None, help="Single number of zeros (even)")
@click.option("--r-min", type=int, default=None, help="Smallest r of a table")
@click.option("--r-max", type=int, default=None, help="Largest r of a table")
@click.option(
    "--rho", type=float, default=None, help="Half-width of the interval (default 0.2)"
)
@click.option(
    "--a",
    "a",
    type=click.IntRange(min=1),
    default=None,
    help="S-parameter (default: n)",
)
@click.option("--sigma", type=float, default=None, help="Support budget (default 2)")
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["csv", "json", "text"]),
    default=None,
    help="Default: json for --r, csv for tables",
)
@click.option(
    "--figure-data",
    type=click.Path(file_okay=False),
    default=None,
    help="Directory for r,percent plot files",
)
@common_options
@click.pass_context
def percent(
    ctx: click.Context,
    n_level: List[str],
    r: Optional[int],
    r_min: Optional[int],
    r_max: Optional[int],
    rho: Optional[float],
    a: Optional[int],
    sigma: Optional[float],
    fmt: Optional[str],
    figure_data: Optional[str],
    **options: Any,
) -> None:
    """
    Upper bound on the share of forms with at least r normalized zeros in (-rho, rho).
    """
    run = RunContext.from_options(options)
    settings = run.config["percent"]
    levels = _parse_levels(n_level) or [int(n) for n in settings["levels"]]
    rho = rho if rho is not None else float(settings["rho"])
    sigma = sigma if sigma is not None else float(settings["sigma"])

    try:
        if r is not None:
            r_values = [r]
        else:
            r_values = even_range(
                r_min if r_min is not None else int(settings["r_min"]),
                r_max if r_max is not None else int(settings["r_max"]),
            )
        fmt = fmt or ("json" if r is not None else "csv")
        table = percent_table(
            levels, r_values, rho, run.quad, a=a, sigma=sigma, threads=run.threads
        )

        for report in table.reports():
            for line in report.diagnostics:
                console.print(f"[yellow]{line}[/yellow]")

        if fmt == "csv":
            run.emit(table_csv(table))
        elif fmt == "json":
            if r is not None:
                run.emit(reports_json(table.reports()))
            else:
                run.emit(to_json(table_payload(table)))
        elif r is not None and len(levels) == 1:
            run.show(report_panel(table.reports()[0]))
        else:
            run.show(percent_table_view(table))

        if figure_data:
            for path in write_figure_data(table, figure_data):
                console.print(f"Plot data written to [bold]{path}[/bold]")
        run.finish(ctx, "percent")
    except click.ClickException:
        raise
    except ValueError as e:
        raise click.UsageError(str(e))
    except Exception as e:
        _fail("percent", e)


@main.command()
@click.option(
    "--which",
    type=click.Choice(["1", "2", "3", "all"]),
    default="all",
    show_default=True,
)
@click.option(
    "--a",
    "a",
    type=click.IntRange(min=1),
    default=None,
    help="S-parameter (default: n)",
)
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["csv", "json", "text"]),
    default="csv",
    show_default=True,
)
@common_options
@click.pass_context
def table(
    ctx: click.Context, which: str, a: Optional[int], fmt: str, **options: Any
) -> None:
    """
    Recompute the published percentage tables.

    With --which all and --output, OUTPUT is a directory receiving one file
    per table.
    """
    run = RunContext.from_options(options)
    numbers = sorted(PUBLISHED_TABLES) if which == "all" else [int(which)]

    try:
        rendered: Dict[int, str] = {}
        for number in numbers:
            console.print(f"Computing table [bold]{number}[/bold]...")
            result = published_table(number, run.quad, a=a, threads=run.threads)
            if fmt == "text":
                title = f"Table {number} (rho = {result.rho:g})"
                run.show(percent_table_view(result, title=title))
                continue
            if fmt == "csv":
                rendered[number] = table_csv(result)
            else:
                payload = table_payload(result)
                rows = PUBLISHED_TABLES[number].rows
                payload["published"] = {
                    str(r): list(values) for r, values in sorted(rows.items())
                }
                rendered[number] = to_json(payload)

        if rendered:
            if run.output and len(rendered) > 1:
                for number, text in rendered.items():
                    path = Path(run.output) / f"table{number}.{fmt}"
                    write_file(path, text)
                    console.print(f"Table {number} written to [bold]{path}[/bold]")
            else:
                run.emit("\n".join(rendered[number] for number in numbers))
        run.finish(ctx, "table")
    except click.ClickException:
        raise
    except ValueError as e:
        raise click.UsageError(str(e))
    except Exception as e:
        _fail("table", e)


@main.command("rmt-check")
@click.option(
    "--matrix-size",
    "half_size",
    type=click.IntRange(min=2),
    default=None,
    help="N; matrices are 2N x 2N",
)
@click.option(
    "--samples",
    type=click.IntRange(min=1),
    default=None,
    help="Number of sampled matrices",
)
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Root seed")
@click.option(
    "--max-n",
    "--n-level",
    "max_n",
    type=click.IntRange(1, 6),
    default=3,
    show_default=True,
    help="Highest centered moment",
)
@click.option(
    "--support",
    type=float,
    default=None,
    help="Support of the naive test function (default 1)",
)
@click.option(
    "--a",
    "a",
    type=click.IntRange(min=1),
    default=None,
    help="S-parameter (default: moment order)",
)
@click.option(
    "--blocks", type=click.IntRange(min=2), default=None, help="Jackknife blocks"
)
@click.option(
    "--z-gate",
    type=float,
    default=None,
    help="Fail when any |z| exceeds this (default 4)",
)
@click.option(
    "--test-mode", is_flag=True, default=False, help="Audit every sampled matrix"
)
@common_options
@click.pass_context
def rmt_check_cmd(
    ctx: click.Context,
    half_size: Optional[int],
    samples: Optional[int],
    seed: Optional[int],
    max_n: int,
    support: Optional[float],
    a: Optional[int],
    blocks: Optional[int],
    z_gate: Optional[float],
    test_mode: bool,
    **options: Any,
) -> None:
    """
    Compare Monte-Carlo moments over SO(2N) with their predicted values.
    """
    run = RunContext.from_options(options)
    settings = run.config["rmt"]

    try:
        cfg = RmtConfig.from_config(
            run.config,
            half_size=half_size,
            samples=samples,
            seed=seed,
            blocks=blocks,
            test_mode=test_mode or None,
        )
        support = support if support is not None else float(settings["support"])
        gate = z_gate if z_gate is not None else float(settings["z_gate"])
        console.print(
            f"Sampling [bold]{cfg.samples}[/bold] matrices of size "
            f"{2 * cfg.half_size} (seed {cfg.seed})..."
        )
        check = rmt_check(
            cfg, make_naive(support), max_n, run.quad, a=a, threads=run.threads
        )
        run.emit(to_json(check.to_dict()))
        run.finish(ctx, "rmt-check")
    except click.ClickException:
        raise
    except ValueError as e:
        raise click.UsageError(str(e))
    except Exception as e:
        _fail("rmt-check", e)

    worst = check.max_abs_z()
    if worst > gate:
        console.print(
            f"[bold red]Error:[/bold red] largest |z| = {worst:.2f} "
            f"exceeds the gate {gate:g}"
        )
        sys.exit(1)


@main.command()
@click.option(
    "--quick/--full",
    default=True,
    help="Quick invariant suite or the full oracle suite",
)
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["json", "text"]),
    default="text",
    show_default=True,
)
@common_options
@click.pass_context
def selftest(ctx: click.Context, quick: bool, fmt: str, **options: Any) -> None:
    """
    Run the invariant suites of all modules.
    """
    run = RunContext.from_options(options)
    try:
        results = run_selftest(run.quad, full=not quick, threads=run.threads)
    except Exception as e:
        _fail("selftest", e)

    if fmt == "json":
        run.emit(to_json([asdict(result) for result in results]))
    else:
        run.show(checks_table(results))
    run.finish(ctx, "selftest")

    failed = [result.name for result in results if not result.passed]
    if failed:
        console.print(
            f"[bold red]Error:[/bold red] {len(failed)} check(s) failed: "
            f"{', '.join(failed)}"
        )
        sys.exit(1)


@main.command()
@click.option(
    "--n-level", "n_level", type=int, default=2, show_default=True, help="Even level"
)
@click.option(
    "--r", "r", type=int, default=2, show_default=True, help="Even number of zeros"
)
@click.option(
    "--rho",
    type=float,
    default=0.2,
    show_default=True,
    help="Half-width of the interval",
)
@click.option(
    "--target",
    type=float,
    default=6.651738,
    show_default=True,
    help="Published cell value",
)
@click.option(
    "--rel-tol",
    type=float,
    default=5e-3,
    show_default=True,
    help="Relative match tolerance",
)
@click.option(
    "--sigma", type=float, default=2.0, show_default=True, help="Support budget"
)
@common_options
@click.pass_context
def calibrate(
    ctx: click.Context,
    n_level: int,
    r: int,
    rho: float,
    target: float,
    rel_tol: float,
    sigma: float,
    **options: Any,
) -> None:
    """
    Sweep the S-parameter a over 1..n against one published table cell.
    """
    run = RunContext.from_options(options)
    try:
        result = calibrate_a(
            n_level, r, rho, target, run.quad, rel_tol=rel_tol, sigma=sigma
        )
        if result.chosen is None:
            console.print(
                f"[yellow]No a in 1..{n_level} reproduces {target:g}[/yellow]"
            )
        run.emit(to_json(result.to_dict()))
        run.finish(ctx, "calibrate")
    except click.ClickException:
        raise
    except ValueError as e:
        raise click.UsageError(str(e))
    except Exception as e:
        _fail("calibrate", e)


@main.command()
@click.argument("manifest_file", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def replay(ctx: click.Context, manifest_file: str) -> None:
    """
    Re-run a subcommand from its manifest.

    MANIFEST_FILE: Manifest written by an earlier run
    """
    try:
        record = RunManifest.from_file(manifest_file)
    except ValueError as e:
        raise click.UsageError(str(e))

    command = main.commands.get(record.subcommand)
    if command is None or record.subcommand == "replay":
        raise click.UsageError(
            f"Manifest names an unknown subcommand {record.subcommand!r}"
        )
    if record.version != __version__:
        console.print(
            f"[yellow]Manifest was written by lowzero {record.version}, "
            f"running {__version__}[/yellow]"
        )
    console.print(f"Replaying [bold]{record.subcommand}[/bold] from {manifest_file}...")
    ctx.invoke(command, **record.params)


if __name__ == "__main__":
    main()
