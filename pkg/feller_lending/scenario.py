"""Load and dump scenario files.

A scenario is an INI file; one file drives every subcommand::

    [model]
    a = 1
    q = 1
    eps = 2
    c = 0
    n_banks = 10
    gamma = 1                  ; or gamma_times / gamma_values knot lists

    [horizon]
    kind = finite              ; or infinite
    T = 1                      ; finite horizon
    r = 0.1                    ; discount rate, infinite horizon
    game = finite-player       ; or mean-field
    steps_per_unit = 10000     ; defaults to FELLER_STEPS_PER_UNIT

    [simulation]
    kind = equilibrium         ; uncontrolled, total-reserve, mfg-representative
    dt = 0.001
    paths = 1000
    seed = 42
    scheme = full-truncation-euler
    record = terminal-plus-events
    record_stride = 1

    [initial]
    kind = point               ; fixed (values = ...) or gamma (shape, scale)
    value = 1

    [outputs]
    directory = feller-output
    formats = csv, binary

    [risk]
    y0 = 10

    [sweep]
    parameter = q
    values = 0.9, 1.0, 1.1

Unknown sections or keys are rejected.
"""
import configparser
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, Extra, Field, root_validator, validator
from pydantic import ValidationError as PydanticValidationError
from typing_extensions import Literal

from .coeffs import GrowthRate, ModelParams
from .const import (
    BLOCK_SIZE,
    HORIZON_FINITE,
    HORIZON_INFINITE,
    INITIAL_FIXED,
    INITIAL_GAMMA,
    INITIAL_POINT,
    KIND_EQUILIBRIUM,
    MODE_FINITE,
    RECORD_TERMINAL,
    SCHEME_EULER,
)
from .errors import ValidationError
from .sde import InitialCondition, SimConfig

SECTIONS = ("model", "horizon", "simulation", "initial", "outputs", "risk", "sweep")
FORMAT_CSV = "csv"
FORMAT_BINARY = "binary"


def _split(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class Section(BaseModel):
    """Represent a scenario section; unknown keys are errors."""

    class Config:
        """Configure the section models."""

        extra = Extra.forbid
        allow_mutation = False


class ModelSection(Section):
    """Represent the [model] section."""

    a: float = Field(..., ge=0)
    q: float = Field(..., ge=0)
    eps: float = Field(..., ge=0)
    c: float = Field(0.0, ge=0)
    n_banks: int = Field(..., ge=2)
    gamma: Optional[float] = Field(None, ge=0)
    gamma_times: Optional[List[float]] = None
    gamma_values: Optional[List[float]] = None

    _lists = validator(
        "gamma_times", "gamma_values", pre=True, allow_reuse=True
    )(_split)

    @root_validator(skip_on_failure=True)
    def one_growth_rate(  # pylint: disable=no-self-argument
        cls, values: Dict[str, Any]
    ) -> Dict[str, Any]:
        """Check that the growth rate is a constant or a knot table."""
        given = [values.get(key) is not None for key in ("gamma_times", "gamma_values")]
        table = any(given)
        if table and values.get("gamma") is not None:
            raise ValueError("give either gamma or gamma_times/gamma_values")
        if table and not all(given):
            raise ValueError("gamma_times and gamma_values go together")
        return values

    def growth_rate(self) -> GrowthRate:
        """Return the growth rate."""
        if self.gamma_times is not None and self.gamma_values is not None:
            return GrowthRate(
                times=tuple(self.gamma_times), values=tuple(self.gamma_values)
            )
        return GrowthRate.constant(self.gamma or 0.0)


class HorizonSection(Section):
    """Represent the [horizon] section."""

    kind: Literal["finite", "infinite"] = HORIZON_FINITE
    T: Optional[float] = Field(None, gt=0)  # pylint: disable=invalid-name
    r: Optional[float] = Field(None, gt=0)
    game: Literal["finite-player", "mean-field"] = MODE_FINITE
    steps_per_unit: Optional[int] = Field(None, ge=1)

    @root_validator(skip_on_failure=True)
    def matching_horizon(  # pylint: disable=no-self-argument
        cls, values: Dict[str, Any]
    ) -> Dict[str, Any]:
        """Check that the horizon kind has its parameter."""
        if values["kind"] == HORIZON_FINITE and values.get("T") is None:
            raise ValueError("a finite horizon needs T")
        if values["kind"] == HORIZON_INFINITE and values.get("r") is None:
            raise ValueError("an infinite horizon needs r")
        return values


class SimulationSection(Section):
    """Represent the [simulation] section."""

    kind: Literal[
        "uncontrolled", "equilibrium", "total-reserve", "mfg-representative"
    ] = KIND_EQUILIBRIUM
    dt: float = Field(1e-3, gt=0)
    paths: int = Field(1000, ge=1)
    seed: int = Field(0, ge=0, lt=1 << 64)
    scheme: Literal["full-truncation-euler", "exact-besq"] = SCHEME_EULER
    record: Literal["full-paths", "terminal-plus-events"] = RECORD_TERMINAL
    record_stride: int = Field(1, ge=1)
    block_size: Optional[int] = Field(None, ge=1)


class InitialSection(Section):
    """Represent the [initial] section."""

    kind: Literal["point", "fixed", "gamma"] = INITIAL_POINT
    value: float = Field(1.0, ge=0)
    values: Optional[List[float]] = None
    shape: float = Field(1.0, gt=0)
    scale: float = Field(1.0, gt=0)

    _lists = validator("values", pre=True, allow_reuse=True)(_split)


class OutputsSection(Section):
    """Represent the [outputs] section."""

    directory: str = "feller-output"
    formats: List[Literal["csv", "binary"]] = [FORMAT_CSV]

    _lists = validator("formats", pre=True, allow_reuse=True)(_split)


class RiskSection(Section):
    """Represent the [risk] section."""

    y0: Optional[float] = Field(None, gt=0)


class SweepSection(Section):
    """Represent the [sweep] section: one or two parameter grids."""

    parameter: Literal["q", "eps", "r", "gamma", "n_banks"]
    values: List[float]
    parameter2: Optional[Literal["q", "eps", "r", "gamma", "n_banks"]] = None
    values2: Optional[List[float]] = None

    _lists = validator("values", "values2", pre=True, allow_reuse=True)(_split)

    @root_validator(skip_on_failure=True)
    def paired_grid(  # pylint: disable=no-self-argument
        cls, values: Dict[str, Any]
    ) -> Dict[str, Any]:
        """Check that a second parameter comes with its grid."""
        if (values.get("parameter2") is None) != (values.get("values2") is None):
            raise ValueError("parameter2 and values2 go together")
        if not values["values"]:
            raise ValueError("sweep grid is empty")
        return values


class Scenario(Section):
    """Represent a validated scenario file."""

    model: ModelSection
    horizon: HorizonSection
    simulation: SimulationSection = SimulationSection()
    initial: InitialSection = InitialSection()
    outputs: OutputsSection = OutputsSection()
    risk: RiskSection = RiskSection()
    sweep: Optional[SweepSection] = None

    @property
    def mode(self) -> str:
        """Return the coefficient mode."""
        return self.horizon.game

    @property
    def infinite(self) -> bool:
        """Return True for the discounted infinite-horizon game."""
        return self.horizon.kind == HORIZON_INFINITE

    def params(self, **overrides: Any) -> ModelParams:
        """Return the model parameters, optionally with replaced fields."""
        fields: Dict[str, Any] = dict(
            a=self.model.a,
            q=self.model.q,
            eps=self.model.eps,
            c=self.model.c,
            n_banks=self.model.n_banks,
            gamma=self.model.growth_rate(),
            horizon=None if self.infinite else self.horizon.T,
            discount=self.horizon.r if self.infinite else None,
        )
        fields.update(overrides)
        return ModelParams(**fields)

    def sim_config(
        self,
        seed: Optional[int] = None,
        paths: Optional[int] = None,
        workers: int = 1,
        block_size: int = BLOCK_SIZE,
    ) -> SimConfig:
        """Return the Monte Carlo settings with command line overrides."""
        sim = self.simulation
        return SimConfig(
            dt=sim.dt,
            n_paths=sim.paths if paths is None else paths,
            seed=sim.seed if seed is None else seed,
            scheme=sim.scheme,
            record=sim.record,
            record_stride=sim.record_stride,
            block_size=sim.block_size or block_size,
            workers=workers,
            horizon=self.horizon.T,
        )

    def initial_condition(self) -> InitialCondition:
        """Return the initial reserve law."""
        init = self.initial
        if init.kind == INITIAL_GAMMA:
            return InitialCondition.gamma(init.shape, init.scale)
        if init.kind == INITIAL_FIXED:
            if not init.values:
                raise ValidationError("fixed initial condition needs values")
            return InitialCondition.fixed(tuple(init.values))
        return InitialCondition.point(init.value)


def parse_scenario(text: str) -> Scenario:
    """Return the validated scenario from INI text."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str  # type: ignore
    try:
        parser.read_string(text)
    except configparser.Error as err:
        raise ValidationError("unreadable scenario: {}".format(err)) from err
    data = {name: dict(parser.items(name)) for name in parser.sections()}
    try:
        scenario = Scenario(**data)
        scenario.params()
    except PydanticValidationError as err:
        raise ValidationError("invalid scenario:\n{}".format(err)) from err
    return scenario


def load_scenario(path: Union[str, Path]) -> Scenario:
    """Return the validated scenario stored at path."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise ValidationError("cannot read scenario {}: {}".format(path, err)) from err
    return parse_scenario(text)


def _format(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ", ".join(_format(item) for item in value)
    return str(value)


def dump_scenario(scenario: Scenario) -> str:
    """Return INI text that loads back to the same scenario."""
    lines: List[str] = []
    for name in SECTIONS:
        section = getattr(scenario, name)
        if section is None:
            continue
        lines.append("[{}]".format(name))
        lines.extend(
            "{} = {}".format(key, _format(value))
            for key, value in section.dict().items()
            if value is not None
        )
        lines.append("")
    return "\n".join(lines)
