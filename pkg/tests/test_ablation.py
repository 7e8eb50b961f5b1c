import pytest

from elaine_embed.analysis.ablation import ABLATION_LADDER, run_ablation, variant_config
from elaine_embed.analysis.sweep import (
    DIM_GRID,
    SweepParam,
    alpha_grid,
    default_sweep_values,
    run_sweep,
)
from elaine_embed.errors import ValidationError
from elaine_embed.graph import EdgeAttributes, Graph, NodeLabels
from elaine_embed.model import EdgeAttrMode, ElaineConfig
from elaine_embed.proximity import WalkConfig


@pytest.fixture
def quick_cfg() -> ElaineConfig:
    return ElaineConfig(
        dim=2, encoder_hidden=(4,), epochs=1, minibatch_size=8, walk=WalkConfig(k=2, l=2)
    )


def test_ladder_order():
    assert [name for name, _ in ABLATION_LADDER] == [
        "AE",
        "VAE",
        "VAE+HO",
        "VAE+HO-R",
        "NA-ELAINE",
        "ELAINE",
    ]


def test_variant_flags(quick_cfg: ElaineConfig):
    ae = variant_config(quick_cfg, "AE")
    na = variant_config(quick_cfg, "NA-ELAINE")

    assert (ae.use_vae, ae.use_higher_order, ae.use_roles) == (False, False, False)
    assert ae.edge_attr_mode == EdgeAttrMode.NONE
    assert ae.dim == quick_cfg.dim
    assert na.edge_attr_mode == EdgeAttrMode.NODE_AGGREGATED
    assert variant_config(quick_cfg, "ELAINE").edge_attr_mode == EdgeAttrMode.COUPLED


def test_ablation_rows(
    planted: tuple[Graph, EdgeAttributes, NodeLabels], quick_cfg: ElaineConfig
):
    g, ea, _ = planted
    rows = run_ablation(g, ea, quick_cfg, repeats=1)

    assert [row.variant for row in rows] == [name for name, _ in ABLATION_LADDER]
    assert all(row.failures == 0 and row.map_std == 0.0 for row in rows)
    assert all(0.0 <= row.map_mean <= 1.0 for row in rows)


def test_alpha_grid():
    grid = alpha_grid()

    assert len(grid) == 9
    assert grid[0] == pytest.approx(1e-5)
    assert grid[-1] == pytest.approx(1e3)
    assert alpha_grid(-2, 2) == pytest.approx([0.01, 0.1, 1.0, 10.0, 100.0])


@pytest.mark.parametrize("param", ["alpha_1", "alpha_v", "alpha_l", "alpha_r"])
def test_alpha_params_default_to_alpha_grid(param: SweepParam):
    assert default_sweep_values(param) == tuple(alpha_grid())


def test_dim_defaults_to_dimension_grid():
    assert default_sweep_values("dim") == DIM_GRID


def test_sweep_rows(planted: tuple[Graph, EdgeAttributes, NodeLabels], quick_cfg: ElaineConfig):
    g, ea, _ = planted
    rows = run_sweep(g, ea, quick_cfg, "dim", [2, 3], repeats=1)

    assert [row.value for row in rows] == [2.0, 3.0]
    assert len(run_sweep(g, ea, quick_cfg, "alpha_1", [0.5], repeats=1)) == 1


def test_sweep_rejects_bad_input(
    planted: tuple[Graph, EdgeAttributes, NodeLabels], quick_cfg: ElaineConfig
):
    g, ea, _ = planted

    with pytest.raises(ValidationError):
        _ = run_sweep(g, ea, quick_cfg, "dim", [], repeats=1)
    with pytest.raises(ValidationError):
        _ = run_sweep(g, ea, quick_cfg, "epochs", [1.0], repeats=1)  # pyright: ignore[reportArgumentType]
