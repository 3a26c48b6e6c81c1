"""Command-line interface for the witness engines."""

import logging
from collections.abc import Callable
from pathlib import Path
from typing import Any

import click
from rich.console import Console
from rich.table import Table

from . import __version__
from .config import CommandName, OperatorVariant, OutputFormat
from .exceptions import DescriptorError, HypermixError, NoWitnessInRangeError
from .logging_setup import setup_logging
from .runner import RunOutcome, load_descriptor, parse_descriptor, run
from .settings import settings
from .verification import VerifyReport

logger = logging.getLogger(__name__)

console = Console()
err_console = Console(stderr=True)

LITERAL_HELP = """\b
Element literals:
  hardy          "1 + 2*z^3 - (1+2j)*z"
  laplacian      "3*X(2)Y(0) + X(1) - Y(4)"
  translations   "2*chi(0,1) + chi(1,3/2)*t^2*w^(-1/2*t)", "ramp", "ramp(2)"
  any space      "0"
"""


class HypermixGroup(click.Group):
    """Group whose usage errors exit with status 1.

    Status 2 is reserved for NO_WITNESS_IN_RANGE.
    """

    def main(self, *args: Any, **kwargs: Any) -> Any:
        kwargs.pop("standalone_mode", None)
        try:
            return super().main(*args, standalone_mode=False, **kwargs)
        except click.exceptions.Abort:
            err_console.print("[yellow]Aborted.[/]")
            raise SystemExit(1) from None
        except click.ClickException as e:
            e.show()
            raise SystemExit(1) from None


@click.group(cls=HypermixGroup)
@click.version_option(version=__version__, prog_name="hypermix")
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    default=None,
    help=f"Logging level on stderr (default {settings.LOG_LEVEL})",
)
def cli(log_level: str | None) -> None:
    """Witness certificates for unbounded operator dynamics."""
    setup_logging(log_level)


# === Shared options ===


def operator_options(func: Callable[..., Any]) -> Callable[..., Any]:
    options = [
        click.option(
            "--op",
            "variant",
            type=click.Choice([v.value for v in OperatorVariant]),
            default=None,
            help="Operator family",
        ),
        click.option("--w", type=float, default=None, help="Translation weight base (> 1)"),
        click.option("--a", type=str, default=None, help="Translation step, e.g. 1 or 1/2"),
        click.option("--p", type=float, default=None, help="L_p exponent (translation-lp)"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def run_options(func: Callable[..., Any]) -> Callable[..., Any]:
    options = [
        click.option("--n-max", type=int, default=None, help="Largest power scanned"),
        click.option("--tolerance", type=float, default=None, help="Residual tolerance"),
        click.option(
            "-o",
            "--output",
            type=click.Path(dir_okay=False, path_type=Path),
            default=None,
            help="Artifact file (stdout when omitted)",
        ),
        click.option(
            "--format",
            "fmt",
            type=click.Choice([f.value for f in OutputFormat]),
            default=None,
            help="Artifact format",
        ),
        click.option(
            "--from-file",
            type=click.Path(exists=True, dir_okay=False, path_type=Path),
            default=None,
            help="JSON experiment descriptor",
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _operator_payload(
    variant: str | None, w: float | None, a: str | None, p: float | None
) -> dict[str, Any] | None:
    if variant is None:
        return None
    payload: dict[str, Any] = {"variant": variant, "w": w, "a": a, "p": p}
    return {k: v for k, v in payload.items() if v is not None}


def _dispatch(
    command: CommandName,
    *,
    op: dict[str, Any] | None = None,
    inputs: dict[str, Any] | None = None,
    n_max: int | None = None,
    tolerance: float | None = None,
    output: Path | None = None,
    fmt: str | None = None,
    from_file: Path | None = None,
    seed: int | None = None,
    quick: bool = False,
) -> None:
    """Build the descriptor, run it and map errors to exit codes."""
    try:
        if from_file is not None:
            descriptor = load_descriptor(from_file)
            if descriptor.command != command:
                raise DescriptorError(
                    f"descriptor is for '{descriptor.command.value}', not '{command.value}'",
                    details={"loc": "command"},
                )
        else:
            payload: dict[str, Any] = {
                "command": command.value,
                "op": op,
                "inputs": {k: v for k, v in (inputs or {}).items() if v is not None},
                "seed": seed,
                "quick": quick,
            }
            if n_max is not None:
                payload["n_max"] = n_max
            if tolerance is not None:
                payload["tolerance"] = tolerance
            descriptor = parse_descriptor(payload)

        if output is not None or fmt is not None:
            update = {}
            if output is not None:
                update["path"] = output
            if fmt is not None:
                update["format"] = OutputFormat(fmt)
            descriptor = descriptor.model_copy(
                update={"output": descriptor.output.model_copy(update=update)}
            )

        outcome = run(descriptor)
    except NoWitnessInRangeError as e:
        logger.warning(e.message, extra={"code": e.code})
        err_console.print(f"[yellow]No witness:[/] {e.message}")
        _print_decay(e.details.get("decay", []))
        raise SystemExit(e.exit_code) from None
    except HypermixError as e:
        logger.error(e.message, extra={"code": e.code, "details": e.details})
        where = f" at {e.details['loc']}" if e.details.get("loc") else ""
        err_console.print(f"[red]Error{where}:[/] {e.message} [dim]({e.code})[/]")
        raise SystemExit(e.exit_code) from None

    _emit(outcome, descriptor.output.path)


def _print_decay(rows: list[dict[str, Any]]) -> None:
    if not rows:
        return
    table = Table(title="delta per n")
    table.add_column("n", justify="right")
    table.add_column("delta", justify="right")
    for row in rows:
        table.add_row(str(row["n"]), f"{row['delta']:.6g}")
    err_console.print(table)


def _emit(outcome: RunOutcome, path: Path | None) -> None:
    if isinstance(outcome.result, VerifyReport):
        _print_report(outcome.result)
    if path is not None:
        err_console.print(f"[green]Wrote[/] {path}")
    elif not isinstance(outcome.result, VerifyReport):
        click.echo(outcome.artifact, nl=False)
    if outcome.exit_code:
        raise SystemExit(outcome.exit_code)


def _print_report(report: VerifyReport) -> None:
    table = Table(title=f"Invariant suite (seed {report.seed}{', quick' if report.quick else ''})")
    table.add_column("Check", style="cyan")
    table.add_column("Status")
    table.add_column("Detail")
    table.add_column("Time", justify="right", style="dim")
    for result in report.results:
        status = "[green]PASS[/]" if result.passed else "[red]FAIL[/]"
        table.add_row(result.name, status, result.detail, f"{result.elapsed:.2f}s")
    console.print(table)


# === Commands ===


@cli.command()
@operator_options
@click.option("--x", "x", type=str, default=None, help="Element x in S^n x")
@click.option("--y", "y", type=str, default=None, help="Limit y")
@run_options
def decay(
    variant: str | None,
    w: float | None,
    a: str | None,
    p: float | None,
    x: str | None,
    y: str | None,
    n_max: int | None,
    tolerance: float | None,
    output: Path | None,
    fmt: str | None,
    from_file: Path | None,
) -> None:
    """Tabulate S^n x + w_n → y (CSV columns n, s_norm, kernel_gap, combined)."""
    _dispatch(
        CommandName.DECAY,
        op=_operator_payload(variant, w, a, p),
        inputs={"x": x, "y": y},
        n_max=n_max,
        tolerance=tolerance,
        output=output,
        fmt=fmt,
        from_file=from_file,
    )


@cli.command()
@operator_options
@click.option("--x", "x", type=str, default=None, help="Element to approximate")
@run_options
def density(
    variant: str | None,
    w: float | None,
    a: str | None,
    p: float | None,
    x: str | None,
    n_max: int | None,
    tolerance: float | None,
    output: Path | None,
    fmt: str | None,
    from_file: Path | None,
) -> None:
    """Tabulate generalized-kernel gaps ‖x - w_n‖ for n = 1..n_max."""
    _dispatch(
        CommandName.DENSITY,
        op=_operator_payload(variant, w, a, p),
        inputs={"x": x},
        n_max=n_max,
        tolerance=tolerance,
        output=output,
        fmt=fmt,
        from_file=from_file,
    )


def _ball_command(command: CommandName, doc: str, target: bool, second_ball: bool) -> None:
    """Register a witness command taking a ball and optionally a target or a second ball."""

    def callback(**kwargs: Any) -> None:
        inputs = {
            "center": kwargs["center"],
            "radius": kwargs["radius"],
            "target": kwargs.get("target"),
            "v_center": kwargs.get("v_center"),
            "v_radius": kwargs.get("v_radius"),
        }
        _dispatch(
            command,
            op=_operator_payload(kwargs["variant"], kwargs["w"], kwargs["a"], kwargs["p"]),
            inputs=inputs,
            n_max=kwargs["n_max"],
            tolerance=kwargs["tolerance"],
            output=kwargs["output"],
            fmt=kwargs["fmt"],
            from_file=kwargs["from_file"],
        )

    callback.__doc__ = doc
    func: Callable[..., Any] = run_options(callback)
    if second_ball:
        func = click.option("--v-radius", type=float, default=None, help="Radius of V")(func)
        func = click.option("--v-center", type=str, default=None, help="Center of V")(func)
    if target:
        func = click.option("--target", type=str, default=None, help="Target y")(func)
    func = click.option("--radius", type=float, default=None, help="Radius of U")(func)
    func = click.option("--center", type=str, default=None, help="Center of U")(func)
    func = operator_options(func)
    cli.command(command.value, help=f"{doc}\n\n{LITERAL_HELP}")(func)


_ball_command(
    CommandName.WITNESS_HM,
    "Witnesses u_n ∈ U with T^n u_n = y for every n ≥ N.",
    target=True,
    second_ball=False,
)
_ball_command(
    CommandName.WITNESS_STT,
    "The smallest n with u ∈ U and T^n u = y.",
    target=True,
    second_ball=False,
)
_ball_command(
    CommandName.WITNESS_ZERO,
    "Kernel witnesses u_n ∈ U with T^n u_n = 0.",
    target=False,
    second_ball=False,
)
_ball_command(
    CommandName.WITNESS_TRANSITIVITY,
    "The first n with T^n(U) ∩ V nonempty.",
    target=False,
    second_ball=True,
)
_ball_command(
    CommandName.WITNESS_MIXING,
    "T^n(U) ∩ V nonempty for every n ≥ N.",
    target=False,
    second_ball=True,
)


@cli.command("leading-poly")
@click.option("--alpha", type=str, default=None, help="Nonzero leading scalar, e.g. 2 or 1+2j")
@click.option("--center", type=str, default=None, help="Polynomial center of U")
@click.option("--radius", type=float, default=None, help="Radius of U")
@run_options
def leading_poly(
    alpha: str | None,
    center: str | None,
    radius: float | None,
    n_max: int | None,
    tolerance: float | None,
    output: Path | None,
    fmt: str | None,
    from_file: Path | None,
) -> None:
    """Polynomials p_n ∈ U of degree n with leading coefficient α/n!."""
    _dispatch(
        CommandName.LEADING_POLY,
        inputs={"alpha": alpha, "center": center, "radius": radius},
        n_max=n_max,
        tolerance=tolerance,
        output=output,
        fmt=fmt,
        from_file=from_file,
    )


@cli.command()
@click.option("--period", type=int, default=None, help="Period N of the vector")
@click.option("--order", type=int, default=None, help="Truncation order M (≥ N)")
@click.option("--root-index", type=int, default=None, help="λ = exp(2πi·j/N) for index j")
@click.option(
    "-o", "--output", type=click.Path(dir_okay=False, path_type=Path), default=None
)
@click.option("--format", "fmt", type=click.Choice([f.value for f in OutputFormat]), default=None)
@click.option(
    "--from-file", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None
)
def periodic(
    period: int | None,
    order: int | None,
    root_index: int | None,
    output: Path | None,
    fmt: str | None,
    from_file: Path | None,
) -> None:
    """Approximate periodic vector of the derivative with its defect ‖D^N f - f‖."""
    _dispatch(
        CommandName.PERIODIC,
        inputs={"period": period, "order": order, "root_index": root_index},
        output=output,
        fmt=fmt,
        from_file=from_file,
    )


@cli.command()
@click.option("--seed", type=int, default=None, help=f"Random seed (default {settings.VERIFY_SEED})")
@click.option("--quick", is_flag=True, help="Smaller sample counts")
@click.option(
    "-o", "--output", type=click.Path(dir_okay=False, path_type=Path), default=None
)
@click.option("--format", "fmt", type=click.Choice([f.value for f in OutputFormat]), default=None)
def verify(seed: int | None, quick: bool, output: Path | None, fmt: str | None) -> None:
    """Run the invariant suite and print a pass/fail table."""
    _dispatch(CommandName.VERIFY, seed=seed, quick=quick, output=output, fmt=fmt)


@cli.command()
def spaces() -> None:
    """List the operator families and the element literal grammar."""
    console.print("[bold cyan]Operator families[/]")
    console.print()
    console.print("  --op derivative        D on H², S = integration from 0")
    console.print("  --op laplacian         Δ on polynomials in L²((0,1)²), S = Δ⁻¹ series")
    console.print("  --op translation-lp    (Tf)(t) = w^t f(t+a) on L_p(0,∞)   --w --a --p")
    console.print("  --op translation-c0    (Tf)(t) = w^t f(t+a) on C₀[0,∞)    --w --a")
    console.print()
    console.print("[bold cyan]Element literals[/]")
    console.print()
    console.print('  hardy           "1 + 2*z^3 - (1+2j)*z"')
    console.print('  laplacian       "3*X(2)Y(0) + X(1) - Y(4)"')
    console.print('  translations    "2*chi(0,1) + chi(1,3/2)*t^2*w^(-1/2*t)"')
    console.print('                  "ramp", "ramp(2)"  continuous hat 1 - t/h on [0, h)')
    console.print('  any space       "0"')
    console.print()
    console.print("[bold cyan]Exit status[/]")
    console.print()
    console.print("  0  success    1  invalid input or failed check    2  no witness in range")


def main() -> None:
    """Main entry point."""
    cli()


if __name__ == "__main__":  # pragma: no cover
    main()
