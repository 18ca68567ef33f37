import argparse
import logging
import math
import os
import re
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from models import ModelHandle, ModelKind, get_model
from monodromy import LoopSpec
from pipeline_steps.custom_exception import UsageError
from .manifest import __version__

Command = Literal["bifurcation", "roots", "flow", "rotation", "monodromy", "quasi"]

COMMAND_HELP = {
    "bifurcation": "scan the discriminant of the spectral quartic over an (h, k) grid",
    "roots": "track the roots of the spectral quartic around a loop",
    "flow": "integrate one trajectory and its reduced orbit",
    "rotation": "rotation number along a loop and its total variation",
    "monodromy": "monodromy matrix from the root exchange and the residue at infinity",
    "quasi": "relative rotation variation of the quasi-Lax model as eps shrinks",
}

OUTPUT_ENV = "LAXMONO_OUT"
DEFAULT_OUT = Path("laxmono_out")
DEFAULT_RADIUS = {
    ModelKind.JAYNES_CUMMINGS: 0.5,
    ModelKind.SPHERICAL_PENDULUM: 0.1,
    ModelKind.QUASI_LAX: 0.1,
}
LOOP_SAMPLES = {"roots": 512, "monodromy": 512, "rotation": 64}
SCAN_HALF_WIDTH = 1.0
FLOW_OFFSET = 0.01
MODEL_PARAMETERS = ("omega0", "omega", "g", "s0", "ball_radius")
SOLVER_METHODS = ("RK45", "RK23", "DOP853", "Radau", "BDF", "LSODA")


def _split_numbers(value: Any) -> Any:
    """'2.0, 1.0' → [2.0, 1.0]; lists and tuples pass through."""
    if isinstance(value, str):
        return [float(part) for part in value.split(",") if part.strip()]
    if isinstance(value, (int, float)):
        return [float(value)]
    return value


class RunConfig(BaseModel):
    """
    Fully resolved options of one command. Options a command does not use
    are carried along unchanged so the manifest records the whole run.
    """

    model_config = ConfigDict(extra="forbid")

    command: Command
    model: Optional[ModelKind] = None
    omega0: Optional[float] = None
    omega: Optional[float] = None
    g: Optional[float] = None
    s0: Optional[float] = None
    ball_radius: Optional[float] = None
    center: Optional[Tuple[float, float]] = None
    radius: Optional[float] = Field(None, gt=0)
    samples: Optional[int] = Field(None, ge=16)
    guard: float = Field(3.0, gt=1)
    tol: float = Field(1e-10, gt=0)
    method: str = "RK45"
    h_range: Optional[Tuple[float, float]] = None
    k_range: Optional[Tuple[float, float]] = None
    grid: int = Field(64, ge=16)
    fiber: Optional[Tuple[float, float]] = None
    t_max: Optional[float] = None
    step: Optional[float] = Field(None, gt=0)
    phi: float = 0.0
    rho: float = Field(0.1, gt=0)
    eps: List[float] = Field(default_factory=lambda: [0.4, 0.2, 0.1, 0.05], min_length=1)
    out: Path = DEFAULT_OUT
    log_level: str = "INFO"

    @field_validator("center", "fiber", "h_range", "k_range", "eps", mode="before")
    @classmethod
    def split_comma_lists(cls, value):
        return _split_numbers(value)

    @field_validator("eps")
    @classmethod
    def eps_inside_quarter_turn(cls, value: List[float]) -> List[float]:
        for eps in value:
            if not 0 < eps < math.pi / 2:
                raise ValueError(f"eps must lie in (0, π/2), got {eps}")
        return value

    @field_validator("method")
    @classmethod
    def known_method(cls, value: str) -> str:
        if value not in SOLVER_METHODS:
            raise ValueError(f"method must be one of {', '.join(SOLVER_METHODS)}")
        return value

    @field_validator("log_level")
    @classmethod
    def known_level(cls, value: str) -> str:
        value = str(value).upper()
        if not isinstance(logging.getLevelName(value), int):
            raise ValueError(f"unknown log level {value}")
        return value

    @model_validator(mode="after")
    def quasi_command_uses_quasi_model(self) -> "RunConfig":
        if self.command == "quasi" and self.model not in (None, ModelKind.QUASI_LAX):
            raise ValueError("the quasi command runs the quasi-Lax model only")
        if self.t_max == 0:
            raise ValueError("t_max must be nonzero")
        return self

    def model_params(self) -> Dict[str, float]:
        return {name: getattr(self, name) for name in MODEL_PARAMETERS if getattr(self, name) is not None}

    def default_model(self) -> ModelKind:
        return ModelKind.QUASI_LAX if self.command == "quasi" else ModelKind.JAYNES_CUMMINGS

    def build_model(self) -> ModelHandle:
        return get_model(self.model or self.default_model(), self.model_params())

    def loop(self) -> LoopSpec:
        return LoopSpec(center=self.center, radius=self.radius, n_samples=self.samples)

    def resolve(self, m: ModelHandle) -> "RunConfig":
        """Fill the model- and command-dependent defaults."""
        h0, k0 = self.center or m.critical_value()
        update: Dict[str, Any] = {"model": m.kind, "center": (h0, k0)}
        update.update(m.params.model_dump())
        if self.radius is None:
            update["radius"] = DEFAULT_RADIUS[m.kind]
        if self.samples is None:
            update["samples"] = LOOP_SAMPLES.get(self.command, 512)
        if self.fiber is None:
            update["fiber"] = (h0, k0 - FLOW_OFFSET)
        if self.h_range is None:
            update["h_range"] = (h0 - SCAN_HALF_WIDTH, h0 + SCAN_HALF_WIDTH)
        if self.k_range is None:
            update["k_range"] = (k0 - SCAN_HALF_WIDTH, k0 + SCAN_HALF_WIDTH)
        return self.model_copy(update=update)


class ConfigFileParser:
    """Parse a run configuration file into a flat dict of option values."""

    pattern: re.Pattern = re.compile(r"^(?P<key>[A-Za-z_][\w-]*)\s*=\s*(?P<value>.*)$")
    """One ``key = value`` per line; values are YAML scalars or flow lists."""

    def parse(self, text: str, yaml_document: bool = False) -> Dict[str, Any]:
        try:
            if yaml_document:
                values = yaml.safe_load(text) or {}
                if not isinstance(values, dict):
                    raise UsageError("a YAML config file must hold a mapping")
            else:
                values = {}
                for number, raw in enumerate(text.splitlines(), start=1):
                    line = raw.split("#", 1)[0].strip()
                    if not line:
                        continue
                    match = self.pattern.match(line)
                    if not match:
                        raise UsageError(f"config line {number}: expected 'key = value', got {raw.strip()!r}")
                    value = match.group("value").strip()
                    values[match.group("key")] = yaml.safe_load(value) if value else None
        except yaml.YAMLError as e:
            raise UsageError(f"Failed to parse config file: {e}") from e
        return {str(key).replace("-", "_"): value for key, value in values.items()}

    def load(self, path: Path) -> Dict[str, Any]:
        if not path.is_file():
            raise UsageError(f"config file not found: {path}")
        text = path.read_text(encoding="utf-8")
        return self.parse(text, yaml_document=path.suffix.lower() in (".yaml", ".yml"))


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _common_options() -> ArgumentParser:
    common = ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--model", choices=[kind.value for kind in ModelKind])
    common.add_argument("--config", metavar="FILE", help="key = value file, or .yaml/.yml")
    common.add_argument("--out", metavar="DIR", help=f"output directory (env {OUTPUT_ENV})")
    common.add_argument("--log-level", dest="log_level", metavar="LEVEL")

    params = common.add_argument_group("model parameters")
    params.add_argument("--omega0", type=float)
    params.add_argument("--omega", type=float)
    params.add_argument("--g", type=float)
    params.add_argument("--s0", type=float)
    params.add_argument("--ball-radius", dest="ball_radius", type=float)

    loop = common.add_argument_group("loop")
    loop.add_argument("--center", metavar="H,K")
    loop.add_argument("--radius", type=float)
    loop.add_argument("--samples", type=int)
    loop.add_argument("--guard", type=float)

    flow = common.add_argument_group("integration")
    flow.add_argument("--tol", type=float)
    flow.add_argument("--method", metavar="NAME")
    flow.add_argument("--fiber", metavar="H,K")
    flow.add_argument("--t-max", dest="t_max", type=float)
    flow.add_argument("--step", type=float, help="output spacing in time for flow")

    scan = common.add_argument_group("bifurcation scan")
    scan.add_argument("--h-range", dest="h_range", metavar="A,B")
    scan.add_argument("--k-range", dest="k_range", metavar="A,B")
    scan.add_argument("--grid", type=int)

    quasi = common.add_argument_group("quasi-Lax")
    quasi.add_argument("--rho", type=float)
    quasi.add_argument("--eps", metavar="E1,E2,...")
    quasi.add_argument("--phi", type=float)
    return common


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="laxmono",
        description="Hamiltonian monodromy of integrable systems from their spectral curves.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    common = _common_options()
    for name, text in COMMAND_HELP.items():
        subparsers.add_parser(name, parents=[common], help=text, argument_default=argparse.SUPPRESS)
    return parser


def parse_config(argv: Sequence[str], config_file: Optional[Path] = None) -> RunConfig:
    """
    Flags override config file values, which override defaults. The output
    directory comes from --out, then $LAXMONO_OUT, then the config file.
    """
    parser = build_parser()
    argv = list(argv)
    if not argv:
        raise UsageError(parser.format_help())
    flags = vars(parser.parse_args(argv))
    path = flags.pop("config", None) or config_file
    values = ConfigFileParser().load(Path(path)) if path else {}
    values.update(flags)
    if "out" not in flags and os.environ.get(OUTPUT_ENV):
        values["out"] = os.environ[OUTPUT_ENV]

    try:
        cfg = RunConfig.model_validate(values)
        cfg = cfg.resolve(cfg.build_model())
    except ValidationError as e:
        raise UsageError(f"invalid configuration: {e}") from e
    logging.debug(f"resolved configuration: {cfg.model_dump(mode='json')}")
    return cfg
