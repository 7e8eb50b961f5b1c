import pathlib
import tomllib
import typing as t

import pydantic
from neverraise import Err, Ok, Result
from pydantic import BaseModel, ConfigDict, Field

from elaine_embed.analysis.classify import TRAIN_RATIOS
from elaine_embed.analysis.sweep import SweepParam
from elaine_embed.env import Env
from elaine_embed.errors import ConfigError
from elaine_embed.model import ElaineConfig
from elaine_embed.proximity import WalkConfig

PathLike = str | pathlib.Path


class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class InputSection(_Section):
    graph: pathlib.Path | None = None
    edge_attrs: pathlib.Path | None = None
    labels: pathlib.Path | None = None


class OutputSection(_Section):
    out: pathlib.Path | None = Field(
        default=None,
        description="embedding file for `embed` (default embedding.txt), "
        "report directory otherwise (default results)",
    )


class EvalSection(_Section):
    repeats: int = Field(default=5, ge=1)
    holdout_frac: float = Field(default=0.2, gt=0, lt=1)
    max_eval_nodes: int = Field(default=1024, ge=1)
    train_ratios: tuple[float, ...] = Field(default=TRAIN_RATIOS, min_length=1)
    sweep_param: SweepParam = "dim"
    sweep_values: tuple[float, ...] | None = Field(
        default=None,
        min_length=1,
        description="unset: 2 8 32 128 for dim, powers of ten 1e-5 ... 1e3 otherwise",
    )


class RunSection(_Section):
    seed: int | None = Field(
        default=None, ge=0, description="overrides both the model and walk seeds"
    )
    jobs: int = Field(default=Env.JOBS, ge=1)
    log_level: t.Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"
    cache_dir: pathlib.Path | None = pathlib.Path(Env.CACHE_DIR) if Env.CACHE_DIR else None


class RunConfig(_Section):
    input: InputSection = InputSection()
    output: OutputSection = OutputSection()
    model: ElaineConfig = ElaineConfig()
    walk: WalkConfig = WalkConfig()
    eval: EvalSection = EvalSection()
    run: RunSection = RunSection()

    def elaine_config(self) -> ElaineConfig:
        """The model config with the [walk] section and the run seed folded in."""
        walk = self.walk
        update: dict[str, t.Any] = {}
        if self.run.seed is not None:
            walk = walk.model_copy(update={"seed": self.run.seed})
            update["seed"] = self.run.seed
        return self.model.model_copy(update={**update, "walk": walk})


def _dotted(loc: tuple[int | str, ...]) -> str:
    return ".".join(str(part) for part in loc)


def _config_error(e: pydantic.ValidationError) -> ConfigError:
    problems: list[str] = []
    for error in e.errors():
        key = _dotted(error["loc"])
        if error["type"] == "extra_forbidden":
            problems.append(f"unknown key {key!r}")
        else:
            problems.append(f"{key}: {error['msg']}")
    return ConfigError("Invalid configuration: " + "; ".join(problems))


def apply_overrides(
    raw: dict[str, t.Any], overrides: t.Mapping[str, t.Any]
) -> dict[str, t.Any]:
    """Merge dotted-key overrides ("model.dim" -> 64) into nested config data."""
    merged = {
        key: dict(value) if isinstance(value, dict) else value for key, value in raw.items()
    }
    for dotted, value in overrides.items():
        section, _, key = dotted.partition(".")
        target = merged.setdefault(section, {})
        if not isinstance(target, dict):
            target = merged[section] = {}
        t.cast(dict[str, t.Any], target)[key] = value
    return merged


def resolve_config(
    raw: dict[str, t.Any], overrides: t.Mapping[str, t.Any] | None = None
) -> Result[RunConfig, ConfigError]:
    merged = apply_overrides(raw, overrides or {})
    model = merged.get("model")
    if isinstance(model, dict) and "walk" in model:
        return Err(ConfigError("unknown key 'model.walk'; walk settings go in [walk]"))
    try:
        return Ok(RunConfig.model_validate(merged))
    except pydantic.ValidationError as e:
        return Err(_config_error(e))


def read_config_file(path: PathLike) -> Result[dict[str, t.Any], ConfigError]:
    try:
        with open(path, "rb") as f:
            return Ok(tomllib.load(f))
    except OSError as e:
        return Err(ConfigError(f"Cannot read config {path}: {e}"))
    except tomllib.TOMLDecodeError as e:
        return Err(ConfigError(f"Config {path} is not valid TOML: {e}"))


def load_config(
    path: PathLike | None, overrides: t.Mapping[str, t.Any] | None = None
) -> Result[RunConfig, ConfigError]:
    """Defaults < file < overrides. `path=None` skips the file."""
    raw: dict[str, t.Any] = {}
    if path is not None:
        # fmt: off
        match read_config_file(path):
            case Ok(data): raw = data  # noqa: E701
            case Err(e): return Err(e)  # noqa: E701
        # fmt: on
    return resolve_config(raw, overrides)
