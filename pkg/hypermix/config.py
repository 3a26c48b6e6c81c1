"""Configuration models for operators and experiment descriptors."""

from enum import Enum
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .settings import settings
from .spaces import FunctionSpace, Rational, SpaceKind


class OperatorVariant(str, Enum):
    """Supported operator families."""

    DERIVATIVE = "derivative"
    LAPLACIAN = "laplacian"
    TRANSLATION_LP = "translation-lp"
    TRANSLATION_C0 = "translation-c0"


_SPACE_OF = {
    OperatorVariant.DERIVATIVE: SpaceKind.HARDY,
    OperatorVariant.LAPLACIAN: SpaceKind.BIVAR_POLY,
    OperatorVariant.TRANSLATION_LP: SpaceKind.TRANSLATION_LP,
    OperatorVariant.TRANSLATION_C0: SpaceKind.TRANSLATION_C0,
}


class OperatorConfig(BaseModel):
    """One operator T together with its right inverse S.

    ``w`` and ``a`` parametrize the weighted left translations
    (Tf)(t) = w^t f(t + a); ``p`` selects the L_p norm.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True, extra="forbid")

    variant: OperatorVariant
    w: float | None = None
    a: Rational | None = None
    p: float | None = None

    @model_validator(mode="after")
    def validate_option_combinations(self) -> "OperatorConfig":
        """Validate that parameters match the variant.

        Raises ValueError for invalid combinations:
        - Translations require w > 1 and a > 0
        - Derivative and Laplacian take no w or a
        - p applies only to translation-lp and must be at least 1
        """
        if self.is_translation:
            if self.w is None or not self.w > 1:
                raise ValueError(f"{self.variant.value} requires w > 1")
            if self.a is None or not self.a > 0:
                raise ValueError(f"{self.variant.value} requires a > 0")
        elif self.w is not None or self.a is not None:
            raise ValueError(f"{self.variant.value} takes no w or a")

        if self.variant == OperatorVariant.TRANSLATION_LP:
            if self.p is not None and not self.p >= 1:
                raise ValueError("translation-lp requires p >= 1")
        elif self.p is not None:
            raise ValueError("p applies only to translation-lp")
        return self

    @property
    def is_translation(self) -> bool:
        return self.variant in (OperatorVariant.TRANSLATION_LP, OperatorVariant.TRANSLATION_C0)

    @property
    def space(self) -> FunctionSpace:
        """The space T acts in."""
        return FunctionSpace(kind=_SPACE_OF[self.variant], w=self.w, a=self.a, p=self.p)

    def label(self) -> str:
        if self.variant == OperatorVariant.TRANSLATION_LP:
            p = self.p if self.p is not None else 1.0
            return f"translation-lp(w={self.w:g}, a={self.a}, p={p:g})"
        if self.variant == OperatorVariant.TRANSLATION_C0:
            return f"translation-c0(w={self.w:g}, a={self.a})"
        return self.variant.value


class CommandName(str, Enum):
    """Batch commands."""

    DECAY = "decay"
    WITNESS_HM = "witness-hm"
    WITNESS_STT = "witness-stt"
    WITNESS_ZERO = "witness-zero"
    WITNESS_TRANSITIVITY = "witness-transitivity"
    WITNESS_MIXING = "witness-mixing"
    LEADING_POLY = "leading-poly"
    PERIODIC = "periodic"
    DENSITY = "density"
    VERIFY = "verify"


class OutputFormat(str, Enum):
    """Artifact formats."""

    JSON = "json"
    CSV = "csv"


REQUIRED_INPUTS: dict[CommandName, tuple[str, ...]] = {
    CommandName.DECAY: ("x", "y"),
    CommandName.WITNESS_HM: ("center", "radius", "target"),
    CommandName.WITNESS_STT: ("center", "radius", "target"),
    CommandName.WITNESS_ZERO: ("center", "radius"),
    CommandName.WITNESS_TRANSITIVITY: ("center", "radius", "v_center", "v_radius"),
    CommandName.WITNESS_MIXING: ("center", "radius", "v_center", "v_radius"),
    CommandName.LEADING_POLY: ("alpha", "center", "radius"),
    CommandName.PERIODIC: ("period", "order"),
    CommandName.DENSITY: ("x",),
    CommandName.VERIFY: (),
}

_NEEDS_NO_OPERATOR = (CommandName.PERIODIC, CommandName.VERIFY, CommandName.LEADING_POLY)


class OutputSpec(BaseModel):
    """Where and how artifacts are written (stdout when ``path`` is None)."""

    path: Path | None = None
    format: OutputFormat = OutputFormat.JSON


class ExperimentDescriptor(BaseModel):
    """A batch experiment: one command, its operator and its inputs.

    Element inputs are literals (``"1 + 2*z^3"``, ``"chi(0,1)"``, ``"X(2)Y(0)"``,
    ``"ramp"``) or element JSON objects; scalar inputs are numbers or strings.
    """

    model_config = ConfigDict(extra="forbid")

    command: CommandName
    op: OperatorConfig | None = None
    inputs: dict[str, Any] = Field(default_factory=dict)
    n_max: int = Field(default_factory=lambda: settings.DEFAULT_N_MAX, ge=1)
    tolerance: float = Field(default_factory=lambda: settings.TOLERANCE, gt=0)
    seed: int | None = None
    quick: bool = False
    output: OutputSpec = Field(default_factory=OutputSpec)

    @model_validator(mode="after")
    def validate_inputs(self) -> "ExperimentDescriptor":
        """Each command needs its operator and inputs."""
        if self.op is None and self.command not in _NEEDS_NO_OPERATOR:
            raise ValueError(f"{self.command.value} requires an operator")
        missing = [key for key in REQUIRED_INPUTS[self.command] if key not in self.inputs]
        if missing:
            raise ValueError(f"{self.command.value} requires inputs: {', '.join(missing)}")
        return self

    @property
    def operator(self) -> OperatorConfig:
        """The operator; leading-poly always runs on the derivative."""
        if self.op is not None:
            return self.op
        return OperatorConfig(variant=OperatorVariant.DERIVATIVE)
