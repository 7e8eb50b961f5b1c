import typing as t

import msgspec

from elaine_embed.analysis.linkpred import run_link_prediction
from elaine_embed.errors import ValidationError
from elaine_embed.graph import EdgeAttributes, Graph
from elaine_embed.logger import logger
from elaine_embed.model import EdgeAttrMode, ElaineConfig, PathLike

ABLATION_LADDER: tuple[tuple[str, dict[str, t.Any]], ...] = (
    (
        "AE",
        {
            "use_vae": False,
            "use_higher_order": False,
            "use_roles": False,
            "edge_attr_mode": EdgeAttrMode.NONE,
        },
    ),
    (
        "VAE",
        {
            "use_vae": True,
            "use_higher_order": False,
            "use_roles": False,
            "edge_attr_mode": EdgeAttrMode.NONE,
        },
    ),
    (
        "VAE+HO",
        {
            "use_vae": True,
            "use_higher_order": True,
            "use_roles": False,
            "edge_attr_mode": EdgeAttrMode.NONE,
        },
    ),
    (
        "VAE+HO-R",
        {
            "use_vae": True,
            "use_higher_order": True,
            "use_roles": True,
            "edge_attr_mode": EdgeAttrMode.NONE,
        },
    ),
    (
        "NA-ELAINE",
        {
            "use_vae": True,
            "use_higher_order": True,
            "use_roles": True,
            "edge_attr_mode": EdgeAttrMode.NODE_AGGREGATED,
        },
    ),
    (
        "ELAINE",
        {
            "use_vae": True,
            "use_higher_order": True,
            "use_roles": True,
            "edge_attr_mode": EdgeAttrMode.COUPLED,
        },
    ),
)


class AblationRow(msgspec.Struct, frozen=True):
    variant: str
    map_mean: float
    map_std: float
    repeats: int
    failures: int


def variant_config(base_cfg: ElaineConfig, variant: str) -> ElaineConfig:
    flags = dict(ABLATION_LADDER)[variant]
    return ElaineConfig.model_validate({**base_cfg.model_dump(), **flags})


def run_ablation(
    g: Graph,
    ea: EdgeAttributes,
    base_cfg: ElaineConfig,
    repeats: int = 5,
    holdout_frac: float = 0.2,
    max_eval_nodes: int = 1024,
    jobs: int = 1,
    cache_dir: PathLike | None = None,
) -> list[AblationRow]:
    """Evaluate the six-step ladder AE → ELAINE on identical splits."""
    rows: list[AblationRow] = []
    reference: list[str] | None = None
    for variant, _ in ABLATION_LADDER:
        logger.info(f"Ablation variant {variant}")
        report = run_link_prediction(
            g,
            ea,
            variant_config(base_cfg, variant),
            repeats=repeats,
            holdout_frac=holdout_frac,
            max_eval_nodes=max_eval_nodes,
            jobs=jobs,
            cache_dir=cache_dir,
        )
        if reference is None:
            reference = report.split_fingerprints
        elif not report.failures and report.split_fingerprints != reference[: report.repeats]:
            raise ValidationError(f"Variant {variant} did not see the same splits as the others")
        rows.append(
            AblationRow(
                variant=variant,
                map_mean=report.map.mean,
                map_std=report.map.std,
                repeats=report.repeats,
                failures=len(report.failures),
            )
        )
    return rows
