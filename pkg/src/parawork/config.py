"""Run configuration: JSON schema validation and a round-trippable dataclass."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from parawork.mechanisms import make_mechanism
from parawork.optimize import PRS3_BOUNDS, TMECH_BOUNDS, OptConfig
from parawork.workspace import GridConfig


class ConfigError(ValueError):
    """The configuration does not match the schema or is internally inconsistent."""


def load_schema() -> dict:
    text = resources.files("parawork").joinpath("schema/runconfig.schema.json").read_text()
    return json.loads(text)


@dataclass(frozen=True)
class OptimizeSettings:
    method: str = "full"
    stage3: bool = False
    rho0: tuple | None = None
    bounds: tuple | None = None
    mesh0: float = 1.0
    mesh_tol: float = 1e-3
    expand: float = 2.0
    contract: float = 0.5
    max_evals: int = 2000
    cache: bool = True
    coarse_nm: int | None = None

    def opt_config(self, mech) -> OptConfig:
        rho0 = self.rho0 if self.rho0 is not None else tuple(mech.design())
        bounds = self.bounds
        if bounds is None:
            bounds = PRS3_BOUNDS if mech.kind == "prs3" else TMECH_BOUNDS
        return OptConfig(rho0, bounds, self.mesh0, self.mesh_tol, self.expand, self.contract,
                         self.max_evals, self.cache)

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["rho0"] is not None:
            d["rho0"] = list(d["rho0"])
        if d["bounds"] is not None:
            d["bounds"] = [list(b) for b in d["bounds"]]
        # unset optional fields are omitted rather than written as null
        return {k: v for k, v in d.items() if v is not None}

    @classmethod
    def from_dict(cls, d: dict) -> "OptimizeSettings":
        d = dict(d)
        if d.get("rho0") is not None:
            d["rho0"] = tuple(float(v) for v in d["rho0"])
        if d.get("bounds") is not None:
            d["bounds"] = tuple((float(lo), float(hi)) for lo, hi in d["bounds"])
        return cls(**d)


@dataclass(frozen=True)
class OutputSettings:
    directory: str = "out"
    formats: tuple = ("csv", "json")

    def to_dict(self) -> dict:
        return {"directory": self.directory, "formats": list(self.formats)}


@dataclass(frozen=True)
class RunConfig:
    mechanism_type: str
    mechanism_params: dict
    grid: GridConfig
    optimize: OptimizeSettings | None = None
    output: OutputSettings = field(default_factory=OutputSettings)

    def build_mechanism(self):
        return make_mechanism(self.mechanism_type, self.mechanism_params)

    def to_dict(self) -> dict:
        d = {
            "mechanism": {"type": self.mechanism_type, "params": _plain(self.mechanism_params)},
            "grid": self.grid.to_dict(),
            "output": self.output.to_dict(),
        }
        if self.optimize is not None:
            d["optimize"] = self.optimize.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        validate(d)
        try:
            grid = GridConfig.from_dict(d["grid"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"grid: {exc}") from exc
        opt = OptimizeSettings.from_dict(d["optimize"]) if "optimize" in d else None
        out = d.get("output", {})
        output = OutputSettings(out.get("directory", "out"), tuple(out.get("formats", ("csv", "json"))))
        return cls(d["mechanism"]["type"], _plain(d["mechanism"]["params"]), grid, opt, output)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _plain(params: dict) -> dict:
    out = {}
    for k, v in params.items():
        out[k] = [float(x) for x in v] if isinstance(v, (list, tuple)) else float(v)
    return out


def validate(d: dict) -> None:
    try:
        jsonschema.validate(d, load_schema())
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{path}: {exc.message}") from exc


def load_config(path) -> RunConfig:
    try:
        d = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return RunConfig.from_dict(d)
