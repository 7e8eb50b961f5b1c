import typing as t

import msgspec

from elaine_embed.analysis.linkpred import run_link_prediction
from elaine_embed.errors import ValidationError
from elaine_embed.graph import EdgeAttributes, Graph
from elaine_embed.logger import logger
from elaine_embed.model import ElaineConfig, PathLike

SweepParam = t.Literal["dim", "alpha_1", "alpha_v", "alpha_l", "alpha_r"]
SWEEP_PARAMS: tuple[SweepParam, ...] = t.get_args(SweepParam)
DIM_GRID: tuple[float, ...] = (2.0, 8.0, 32.0, 128.0)


class SweepRow(msgspec.Struct, frozen=True):
    value: float
    map_mean: float
    map_std: float
    repeats: int


def alpha_grid(lo_exp: int = -5, hi_exp: int = 3) -> list[float]:
    """Powers of ten 10^lo_exp ... 10^hi_exp."""
    return [10.0**e for e in range(lo_exp, hi_exp + 1)]


def default_sweep_values(param: SweepParam) -> tuple[float, ...]:
    """Dimension grid for `dim`, the power-of-ten grid for the alpha weights."""
    return DIM_GRID if param == "dim" else tuple(alpha_grid())


def run_sweep(
    g: Graph,
    ea: EdgeAttributes,
    base_cfg: ElaineConfig,
    param: SweepParam,
    values: t.Sequence[float],
    repeats: int = 5,
    holdout_frac: float = 0.2,
    max_eval_nodes: int = 1024,
    jobs: int = 1,
    cache_dir: PathLike | None = None,
) -> list[SweepRow]:
    """One link-prediction run per value; every run uses the same split seeds."""
    if not values:
        raise ValidationError("Sweep needs at least one value")
    if param not in SWEEP_PARAMS:
        raise ValidationError(f"Cannot sweep {param!r}; choose from {SWEEP_PARAMS}")

    rows: list[SweepRow] = []
    for value in values:
        typed: int | float = int(value) if param == "dim" else float(value)
        cfg = ElaineConfig.model_validate({**base_cfg.model_dump(), param: typed})
        logger.info(f"Sweep {param}={typed}")
        report = run_link_prediction(
            g,
            ea,
            cfg,
            repeats=repeats,
            holdout_frac=holdout_frac,
            max_eval_nodes=max_eval_nodes,
            jobs=jobs,
            cache_dir=cache_dir,
        )
        rows.append(
            SweepRow(
                value=float(typed),
                map_mean=report.map.mean,
                map_std=report.map.std,
                repeats=report.repeats,
            )
        )
    return rows
