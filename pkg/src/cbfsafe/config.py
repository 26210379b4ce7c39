"""Run configuration: strict TOML with ``[env]``, ``[sac]`` and ``[filter]`` sections.

Missing keys take defaults; unknown keys are an error naming the key.
"""
import dataclasses
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .barriers import BarrierSet
from .errors import ConfigError, ParameterError
from .env import DEFAULT_OBSTACLES, EnvConfig
from .learner.sac import FilterConfig, SacConfig


@dataclass
class RunConfig:
    env: EnvConfig = field(default_factory=EnvConfig)
    sac: SacConfig = field(default_factory=SacConfig)
    filter: FilterConfig = field(default_factory=FilterConfig)
    seed: int = 0
    output_dir: str = "runs/default"

    def validate(self):
        if not self.filter.kappa > 0:
            raise ConfigError("filter.kappa", f"must be positive, got {self.filter.kappa}")
        if not self.filter.alpha_gain > 0:
            raise ConfigError("filter.alpha_gain", f"must be positive, got {self.filter.alpha_gain}")
        self.env.validate(self.filter.alpha_gain)
        self.sac.validate()
        return self

    def to_dict(self):
        env = dataclasses.asdict(self.env)
        env["obstacles"] = self.env.obstacles.to_records()
        env["goal_center"] = list(self.env.goal_center)
        env["start_box"] = [list(c) for c in self.env.start_box]
        sac = dataclasses.asdict(self.sac)
        sac["hidden"] = list(self.sac.hidden)
        return {
            "seed": self.seed,
            "output_dir": str(self.output_dir),
            "env": env,
            "sac": sac,
            "filter": dataclasses.asdict(self.filter),
        }


_SECTIONS = {"env": EnvConfig, "sac": SacConfig, "filter": FilterConfig}
_TOP = {"seed", "output_dir"}


def _build(section, cls, raw):
    if not isinstance(raw, dict):
        raise ConfigError(section, "must be a table")
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, val in raw.items():
        if key not in names:
            raise ConfigError(f"{section}.{key}", "unknown key")
        kwargs[key] = val
    try:
        if cls is EnvConfig:
            if "obstacles" in kwargs:
                kwargs["obstacles"] = _obstacles(kwargs["obstacles"])
            for key in ("goal_center",):
                if key in kwargs:
                    kwargs[key] = tuple(float(v) for v in kwargs[key])
            if "start_box" in kwargs:
                kwargs["start_box"] = tuple(tuple(float(v) for v in c) for c in kwargs["start_box"])
        if cls is SacConfig and "hidden" in kwargs:
            kwargs["hidden"] = tuple(int(v) for v in kwargs["hidden"])
        obj = cls(**kwargs)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(section, str(exc)) from exc
    for f in dataclasses.fields(cls):
        default = getattr(cls(), f.name) if f.name != "obstacles" else None
        val = getattr(obj, f.name)
        if isinstance(default, bool) and not isinstance(val, bool):
            raise ConfigError(f"{section}.{f.name}", f"expected a boolean, got {val!r}")
        if isinstance(default, (int, float)) and not isinstance(default, bool):
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigError(f"{section}.{f.name}", f"expected a number, got {val!r}")
            if isinstance(default, int) and not isinstance(default, bool) and isinstance(val, float):
                if val != int(val):
                    raise ConfigError(f"{section}.{f.name}", f"expected an integer, got {val!r}")
                setattr(obj, f.name, int(val))
    return obj


def _obstacles(records):
    try:
        for r in records:
            extra = set(r) - {"center", "radius"}
            if extra:
                raise ConfigError(f"env.obstacles.{sorted(extra)[0]}", "unknown key")
        return BarrierSet.from_records(records)
    except (KeyError, TypeError, ParameterError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("env.obstacles", f"bad obstacle record: {exc}") from exc


def config_from_dict(data):
    for key in data:
        if key not in _SECTIONS and key not in _TOP:
            raise ConfigError(key, "unknown key")
    cfg = RunConfig(
        env=_build("env", EnvConfig, data.get("env", {})),
        sac=_build("sac", SacConfig, data.get("sac", {})),
        filter=_build("filter", FilterConfig, data.get("filter", {})),
        seed=data.get("seed", 0),
        output_dir=data.get("output_dir", "runs/default"),
    )
    if isinstance(cfg.seed, bool) or not isinstance(cfg.seed, int):
        raise ConfigError("seed", f"expected an integer, got {cfg.seed!r}")
    return cfg.validate()


def load_config(path):
    """Parse and validate a run configuration file."""
    text = Path(path).read_text()
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("<file>", f"parse error: {exc}") from exc
    return config_from_dict(data)


__all__ = ["RunConfig", "load_config", "config_from_dict", "DEFAULT_OBSTACLES"]
