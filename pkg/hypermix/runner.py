"""Execute experiment descriptors and render their artifacts."""

import csv
import io
import json
import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ValidationError
from rich.console import Console
from rich.progress import Progress, SpinnerColumn, TextColumn

from .config import CommandName, ExperimentDescriptor, OutputFormat
from .dynamics import (
    DecayTable,
    LeadingPolynomials,
    PeriodicVector,
    WitnessCertificate,
    WitnessSequence,
    hm_criterion_table,
    hm_witnesses,
    leading_polynomials,
    mixing_witnesses,
    periodic_vector_derivative,
    stt_witness,
    transitivity_witness,
    zero_witness,
)
from .exceptions import DescriptorError, HypermixError
from .kernels import DensityTable, gk_density_table
from .literals import parse_element
from .settings import settings
from .spaces import BallSpec, Element, FunctionSpace, SpaceKind, parse_complex
from .verification import VerifyReport, run_checks

logger = logging.getLogger(__name__)

# Progress output shares stderr with logging so stdout carries only artifacts
console = Console(stderr=True)


@dataclass
class RunOutcome:
    command: CommandName
    result: BaseModel
    artifact: str
    exit_code: int = 0


def _loc(error: ValidationError) -> str:
    first = error.errors()[0]
    return ".".join(str(part) for part in first["loc"])


def load_descriptor(path: Path) -> ExperimentDescriptor:
    """Read a JSON descriptor file.

    Raises:
        DescriptorError: unreadable JSON or a field that fails validation;
            ``details["loc"]`` is the failing field path.
    """
    try:
        payload = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise DescriptorError(f"cannot read descriptor {path}: {e}", details={"loc": ""}) from None
    return parse_descriptor(payload)


def parse_descriptor(payload: Any) -> ExperimentDescriptor:
    try:
        return ExperimentDescriptor.model_validate(payload)
    except ValidationError as e:
        loc = _loc(e)
        raise DescriptorError(
            f"invalid descriptor field '{loc}': {e.errors()[0]['msg']}", details={"loc": loc}
        ) from None


# === Inputs ===


class _Inputs:
    """Typed access to the raw descriptor inputs."""

    def __init__(self, descriptor: ExperimentDescriptor, space: FunctionSpace):
        self.raw = descriptor.inputs
        self.space = space

    def element(self, key: str) -> Element:
        try:
            return parse_element(self.space, self.raw[key])
        except HypermixError as e:
            e.details.setdefault("loc", f"inputs.{key}")
            raise

    def number(self, key: str, kind: Callable[[Any], Any]) -> Any:
        try:
            return kind(self.raw[key])
        except (TypeError, ValueError):
            raise DescriptorError(
                f"input '{key}' is not a valid {kind.__name__}", details={"loc": f"inputs.{key}"}
            ) from None

    def ball(self, center: str, radius: str) -> BallSpec:
        try:
            return BallSpec(
                space=self.space, center=self.element(center), radius=self.number(radius, float)
            )
        except ValidationError as e:
            raise DescriptorError(
                f"invalid ball: {e.errors()[0]['msg']}", details={"loc": f"inputs.{radius}"}
            ) from None


def _execute(descriptor: ExperimentDescriptor) -> BaseModel:
    command = descriptor.command
    if command == CommandName.VERIFY:
        return run_checks(seed=descriptor.seed, quick=descriptor.quick)
    if command == CommandName.PERIODIC:
        inputs = _Inputs(descriptor, FunctionSpace(kind=SpaceKind.HARDY))
        root_index = inputs.number("root_index", int) if "root_index" in inputs.raw else 1
        return periodic_vector_derivative(
            inputs.number("period", int), inputs.number("order", int), root_index
        )

    op = descriptor.operator
    inputs = _Inputs(descriptor, op.space)
    n_max, tolerance = descriptor.n_max, descriptor.tolerance
    if command == CommandName.DECAY:
        return hm_criterion_table(op, inputs.element("x"), inputs.element("y"), n_max, tolerance)
    if command == CommandName.DENSITY:
        return gk_density_table(op, inputs.element("x"), n_max)
    if command == CommandName.LEADING_POLY:
        return leading_polynomials(
            inputs.number("alpha", parse_complex),
            inputs.ball("center", "radius"),
            n_max,
            tolerance,
        )

    U = inputs.ball("center", "radius")
    if command == CommandName.WITNESS_HM:
        return hm_witnesses(op, U, inputs.element("target"), n_max, tolerance)
    if command == CommandName.WITNESS_STT:
        return stt_witness(op, U, inputs.element("target"), n_max, tolerance)
    if command == CommandName.WITNESS_ZERO:
        return zero_witness(op, U, n_max, tolerance)
    V = inputs.ball("v_center", "v_radius")
    if command == CommandName.WITNESS_TRANSITIVITY:
        return transitivity_witness(op, U, V, n_max, tolerance)
    return mixing_witnesses(op, U, V, n_max, tolerance)


# === Rendering ===


def _round(value: Any) -> Any:
    """Fix float output at FLOAT_DIGITS significant digits, recursively."""
    if isinstance(value, float):
        return float(f"{value:.{settings.FLOAT_DIGITS}g}")
    if isinstance(value, dict):
        return {k: _round(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_round(v) for v in value]
    return value


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.{settings.FLOAT_DIGITS}g}"
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _table(result: BaseModel) -> tuple[Sequence[str], list[Sequence[Any]]]:
    if isinstance(result, DecayTable):
        return ("n", "s_norm", "kernel_gap", "combined"), [
            (r.n, r.s_norm, r.kernel_gap, r.combined) for r in result.rows
        ]
    if isinstance(result, DensityTable):
        return ("n", "gap", "saturated"), [(r.n, r.gap, r.saturated) for r in result.rows]
    if isinstance(result, WitnessSequence | LeadingPolynomials):
        certificates: Sequence[WitnessCertificate] = result.certificates
    elif isinstance(result, WitnessCertificate):
        certificates = [result]
    elif isinstance(result, PeriodicVector):
        return ("k", "re", "im"), [(k, c.real, c.imag) for k, c in enumerate(result.f.coeffs)]
    elif isinstance(result, VerifyReport):
        return ("check", "passed", "detail"), [
            (r.name, r.passed, r.detail) for r in result.results
        ]
    else:  # pragma: no cover
        raise TypeError(f"no tabular form for {type(result).__name__}")
    return ("n", "residual", "delta", "radius", "inside", "bound_mode"), [
        (c.n, c.residual, c.delta, c.radius, c.inside, c.bound_mode.value) for c in certificates
    ]


def _payload(result: BaseModel) -> Any:
    if isinstance(result, VerifyReport):
        # timings vary between runs
        payload = result.model_dump(mode="json", exclude={"results": {"__all__": {"elapsed"}}})
        payload["passed"] = result.passed
        return payload
    return result.model_dump(mode="json")


def render(result: BaseModel, fmt: OutputFormat) -> str:
    """Deterministic artifact text: sorted keys and fixed float precision."""
    if fmt == OutputFormat.JSON:
        return json.dumps(_round(_payload(result)), sort_keys=True, indent=2) + "\n"
    header, rows = _table(result)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows([_cell(v) for v in row] for row in rows)
    return buffer.getvalue()


def run(descriptor: ExperimentDescriptor) -> RunOutcome:
    """Run one descriptor and write its artifact when an output path is set.

    Engine errors propagate; the CLI maps them to exit codes.
    """
    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        console=console,
        transient=True,
    ) as progress:
        progress.add_task(description=f"Running {descriptor.command.value}...", total=None)
        result = _execute(descriptor)

    artifact = render(result, descriptor.output.format)
    if descriptor.output.path is not None:
        descriptor.output.path.write_text(artifact)
        logger.info("Artifact written", extra={"path": str(descriptor.output.path)})

    exit_code = 0
    if isinstance(result, VerifyReport) and not result.passed:
        exit_code = 1
    return RunOutcome(
        command=descriptor.command, result=result, artifact=artifact, exit_code=exit_code
    )
