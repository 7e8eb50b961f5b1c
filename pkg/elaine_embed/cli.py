import argparse
import pathlib
import sys
import typing as t

from neverraise import Err, Ok, Result
from pydantic import BaseModel

from elaine_embed.analysis.ablation import run_ablation
from elaine_embed.analysis.classify import run_node_classification
from elaine_embed.analysis.linkpred import random_scorer, run_link_prediction
from elaine_embed.analysis.report import (
    format_table,
    report_rows,
    write_report_csv,
    write_table_csv,
)
from elaine_embed.analysis.sweep import SWEEP_PARAMS, default_sweep_values, run_sweep
from elaine_embed.config import EvalSection, RunConfig, RunSection, load_config
from elaine_embed.errors import ConfigError
from elaine_embed.graph import EdgeAttributes, Graph, NodeLabels
from elaine_embed.graph_io import (
    load_edge_attributes,
    load_graph,
    load_node_labels,
    save_edge_attributes,
    save_graph,
    save_node_labels,
)
from elaine_embed.logger import logger, setup_logging
from elaine_embed.model import (
    EdgeAttrMode,
    ElaineConfig,
    embed,
    save_embedding,
    save_model,
    train,
)
from elaine_embed.proximity import WalkConfig
from elaine_embed.roles import role_features, save_role_features
from elaine_embed.synthetic import generate_sbm_with_edge_topics

DEFAULT_EMBEDDING_FILE = pathlib.Path("embedding.txt")
DEFAULT_REPORT_DIR = pathlib.Path("results")

SUPPRESS = argparse.SUPPRESS


def _default(model: type[BaseModel], name: str) -> t.Any:
    return model.model_fields[name].default


def _help(text: str, model: type[BaseModel], name: str) -> str:
    default = _default(model, name)
    if isinstance(default, tuple):
        default = " ".join(str(x) for x in t.cast(tuple[t.Any, ...], default)) or "none"
    return f"{text} (default: {default})"


def _common_flags() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group("run")
    _ = group.add_argument(
        "--config", type=pathlib.Path, help="TOML run configuration (default: none)"
    )
    _ = group.add_argument(
        "--out",
        dest="output.out",
        type=pathlib.Path,
        default=SUPPRESS,
        help="output location (default: embedding.txt for embed, results/ otherwise)",
    )
    _ = group.add_argument(
        "--seed",
        dest="run.seed",
        type=int,
        default=SUPPRESS,
        help="seed for the model, the walks and every split (default: model seed 0)",
    )
    _ = group.add_argument(
        "--jobs",
        dest="run.jobs",
        type=int,
        default=SUPPRESS,
        help=_help("parallel workers", RunSection, "jobs"),
    )
    _ = group.add_argument(
        "--log-level",
        dest="run.log_level",
        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
        default=SUPPRESS,
        help=_help("standard-error log level", RunSection, "log_level"),
    )
    _ = group.add_argument(
        "--cache-dir",
        dest="run.cache_dir",
        type=pathlib.Path,
        default=SUPPRESS,
        help=_help("similarity-matrix cache directory", RunSection, "cache_dir"),
    )
    return parser


def _input_flags() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group("input")
    _ = group.add_argument(
        "--graph", dest="input.graph", type=pathlib.Path, default=SUPPRESS,
        help="edge list 'u v [w]' (required)",
    )  # fmt: skip
    _ = group.add_argument(
        "--edge-attrs", dest="input.edge_attrs", type=pathlib.Path, default=SUPPRESS,
        help="edge attributes 'u v a1 ... ap' (default: none)",
    )  # fmt: skip
    _ = group.add_argument(
        "--labels", dest="input.labels", type=pathlib.Path, default=SUPPRESS,
        help="node labels 'u l1,l2,...' (default: none)",
    )  # fmt: skip
    return parser


def _model_flags() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group("model")

    def flag(name: str, field: str, text: str, **kwargs: t.Any) -> None:
        _ = group.add_argument(
            name,
            dest=f"model.{field}",
            default=SUPPRESS,
            help=_help(text, ElaineConfig, field),
            **kwargs,
        )

    flag("--dim", "dim", "embedding dimension; 128 performed best in published runs", type=int)
    flag(
        "--encoder-hidden", "encoder_hidden", "encoder hidden sizes", type=int, nargs="+"
    )
    flag(
        "--edge-decoder-hidden",
        "edge_decoder_hidden",
        "edge-attribute decoder hidden sizes",
        type=int,
        nargs="*",
    )
    flag("--alpha-1", "alpha_1", "edge-attribute loss weight", type=float)
    flag("--alpha-v", "alpha_v", "KL loss weight", type=float)
    flag("--alpha-l", "alpha_l", "L1 weight penalty", type=float)
    flag("--alpha-r", "alpha_r", "L2 weight penalty", type=float)
    flag("--beta", "beta_penalty", "weight on nonzero feature entries", type=float)
    flag("--epochs", "epochs", "training epochs", type=int)
    flag("--minibatch-size", "minibatch_size", "edges per minibatch", type=int)
    flag("--learning-rate", "learning_rate", "Adam learning rate", type=float)
    flag(
        "--edge-attr-mode",
        "edge_attr_mode",
        "how edge attributes enter the model",
        choices=[mode.value for mode in EdgeAttrMode],
    )
    flag("--vae", "use_vae", "variational latent layer", action=argparse.BooleanOptionalAction)
    flag(
        "--higher-order",
        "use_higher_order",
        "random-walk similarity instead of adjacency rows",
        action=argparse.BooleanOptionalAction,
    )
    flag("--roles", "use_roles", "append role features", action=argparse.BooleanOptionalAction)

    walk = parser.add_argument_group("walk")
    _ = walk.add_argument(
        "--walks", dest="walk.k", type=int, default=SUPPRESS,
        help=_help("walks per node", WalkConfig, "k"),
    )  # fmt: skip
    _ = walk.add_argument(
        "--walk-length", dest="walk.l", type=int, default=SUPPRESS,
        help=_help("walk length", WalkConfig, "l"),
    )  # fmt: skip
    return parser


def _eval_flags() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group("evaluation")
    _ = group.add_argument(
        "--repeats", dest="eval.repeats", type=int, default=SUPPRESS,
        help=_help("paired repeats", EvalSection, "repeats"),
    )  # fmt: skip
    _ = group.add_argument(
        "--holdout-frac", dest="eval.holdout_frac", type=float, default=SUPPRESS,
        help=_help("share of edges hidden per split", EvalSection, "holdout_frac"),
    )  # fmt: skip
    _ = group.add_argument(
        "--max-eval-nodes", dest="eval.max_eval_nodes", type=int, default=SUPPRESS,
        help=_help("nodes sampled for ranking", EvalSection, "max_eval_nodes"),
    )  # fmt: skip
    return parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="elaine", description="Edge-attributed, role-aware graph embeddings"
    )
    commands = parser.add_subparsers(dest="command", required=True)
    common, inputs, model, evaluation = (
        _common_flags(),
        _input_flags(),
        _model_flags(),
        _eval_flags(),
    )

    embed_cmd = commands.add_parser(
        "embed", parents=[common, inputs, model], help="train and write an embedding"
    )
    _ = embed_cmd.add_argument(
        "--checkpoint",
        type=pathlib.Path,
        help="also write the trained model here (default: none)",
    )
    _ = embed_cmd.add_argument(
        "--roles-out",
        type=pathlib.Path,
        help="also write raw and scaled role features as CSV (default: none)",
    )

    linkpred = commands.add_parser(
        "linkpred",
        parents=[common, inputs, model, evaluation],
        help="held-out link prediction",
    )
    _ = linkpred.add_argument(
        "--scorer",
        choices=("elaine", "random"),
        default="elaine",
        help="pair scorer (default: elaine)",
    )

    nodeclass = commands.add_parser(
        "nodeclass",
        parents=[common, inputs, model, evaluation],
        help="multi-label node classification",
    )
    _ = nodeclass.add_argument(
        "--train-ratios", dest="eval.train_ratios", type=float, nargs="+",
        default=SUPPRESS, help=_help("training shares", EvalSection, "train_ratios"),
    )  # fmt: skip

    _ = commands.add_parser(
        "ablate",
        parents=[common, inputs, model, evaluation],
        help="link prediction over the six-step component ladder",
    )

    sweep = commands.add_parser(
        "sweep",
        parents=[common, inputs, model, evaluation],
        help="link prediction over a grid of one parameter",
    )
    _ = sweep.add_argument(
        "--param", dest="eval.sweep_param", choices=SWEEP_PARAMS, default=SUPPRESS,
        help=_help("parameter to vary", EvalSection, "sweep_param"),
    )  # fmt: skip
    _ = sweep.add_argument(
        "--values", dest="eval.sweep_values", type=float, nargs="+", default=SUPPRESS,
        help="values to try (default: 2 8 32 128 for dim, 1e-05 ... 1000 for alphas)",
    )  # fmt: skip

    synthetic = commands.add_parser(
        "gen-synthetic",
        parents=[common],
        help="write a planted-topic stochastic block model",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    _ = synthetic.add_argument("--blocks", type=int, default=4, help="communities")
    _ = synthetic.add_argument(
        "--nodes-per-block", type=int, default=50, help="nodes per community"
    )
    _ = synthetic.add_argument("--p-in", type=float, default=0.15, help="intra-block edge prob")
    _ = synthetic.add_argument("--p-out", type=float, default=0.02, help="inter-block edge prob")
    _ = synthetic.add_argument(
        "--topics", type=int, default=None, help="attribute dimension; blocks when unset"
    )
    _ = synthetic.add_argument(
        "--noise", type=float, default=0.2, help="uniform mass mixed into planted topics"
    )
    return parser


def _overrides(args: argparse.Namespace) -> dict[str, t.Any]:
    return {key: value for key, value in vars(args).items() if "." in key}


def _unwrap[T, E: Exception](result: Result[T, E]) -> T:
    match result:
        case Ok(value):
            return value
        case Err(e):
            raise e


def _existing(path: pathlib.Path | None, key: str, required: bool) -> pathlib.Path | None:
    if path is None:
        if required:
            raise ConfigError(f"{key} is required for this command")
        return None
    if not path.is_file():
        raise ConfigError(f"{key}: {path} does not exist")
    return path


def _load_inputs(
    cfg: RunConfig, need_attrs: bool = False, need_labels: bool = False
) -> tuple[Graph, EdgeAttributes, NodeLabels | None]:
    graph_path = _existing(cfg.input.graph, "input.graph", True)
    attrs_path = _existing(cfg.input.edge_attrs, "input.edge_attrs", need_attrs)
    labels_path = _existing(cfg.input.labels, "input.labels", need_labels)
    assert graph_path is not None

    g = _unwrap(load_graph(graph_path))
    ea = _unwrap(load_edge_attributes(attrs_path, g)) if attrs_path else EdgeAttributes.empty(g)
    labels = _unwrap(load_node_labels(labels_path, g.n)) if labels_path else None
    return g, ea, labels


def _model_config(cfg: RunConfig, ea: EdgeAttributes) -> ElaineConfig:
    model_cfg = cfg.elaine_config()
    if ea.p == 0 and model_cfg.edge_attr_mode != EdgeAttrMode.NONE:
        logger.warning(
            f"No edge attributes given; edge_attr_mode {model_cfg.edge_attr_mode} -> none"
        )
        model_cfg = model_cfg.model_copy(update={"edge_attr_mode": EdgeAttrMode.NONE})
    return model_cfg


def _report_dir(cfg: RunConfig) -> pathlib.Path:
    out = cfg.output.out or DEFAULT_REPORT_DIR
    out.mkdir(parents=True, exist_ok=True)
    return out


def run_embed(cfg: RunConfig, args: argparse.Namespace) -> None:
    g, ea, _ = _load_inputs(cfg)
    model_cfg = _model_config(cfg, ea)
    result = train(g, ea, model_cfg, jobs=cfg.run.jobs, cache_dir=cfg.run.cache_dir)
    emb = embed(result.model, result.features)

    out = cfg.output.out or DEFAULT_EMBEDDING_FILE
    out.parent.mkdir(parents=True, exist_ok=True)
    save_embedding(out, emb)
    logger.info(f"Wrote {emb.n}x{emb.d} embedding to {out}")
    if args.checkpoint is not None:
        save_model(args.checkpoint, result.model)
        logger.info(f"Wrote model checkpoint to {args.checkpoint}")
    if args.roles_out is not None:
        args.roles_out.parent.mkdir(parents=True, exist_ok=True)
        save_role_features(args.roles_out, role_features(g))
        logger.info(f"Wrote role features to {args.roles_out}")

    if result.history:
        last = result.history[-1]
        print(
            format_table(
                ("epochs", "L", "L_n", "L_e", "L_v"),
                [(len(result.history), last.total, last.l_n, last.l_e, last.l_v)],
            )
        )


def run_linkpred(cfg: RunConfig, args: argparse.Namespace) -> None:
    g, ea, _ = _load_inputs(cfg)
    model_cfg = _model_config(cfg, ea)
    scorer = random_scorer(model_cfg.seed) if args.scorer == "random" else None
    report = run_link_prediction(
        g,
        ea,
        model_cfg,
        repeats=cfg.eval.repeats,
        holdout_frac=cfg.eval.holdout_frac,
        max_eval_nodes=cfg.eval.max_eval_nodes,
        scorer=scorer,
        jobs=cfg.run.jobs,
        cache_dir=cfg.run.cache_dir,
    )
    rows = report_rows(args.scorer, report)
    write_report_csv(_report_dir(cfg) / "linkpred.csv", rows)
    print(
        format_table(
            ("scorer", "metric", "mean", "std", "repeats"),
            [(r.group, r.metric, r.mean, r.std, r.repeats) for r in rows],
        )
    )


def run_nodeclass(cfg: RunConfig, args: argparse.Namespace) -> None:
    g, ea, labels = _load_inputs(cfg, need_labels=True)
    assert labels is not None
    model_cfg = _model_config(cfg, ea)
    result = train(g, ea, model_cfg, jobs=cfg.run.jobs, cache_dir=cfg.run.cache_dir)
    emb = embed(result.model, result.features)
    rows = run_node_classification(
        emb, labels, cfg.eval.train_ratios, repeats=cfg.eval.repeats, seed=model_cfg.seed
    )

    header = ("train_ratio", "micro_mean", "micro_std", "macro_mean", "macro_std", "repeats")
    table = [
        (r.train_ratio, r.micro_mean, r.micro_std, r.macro_mean, r.macro_std, r.repeats)
        for r in rows
    ]
    write_table_csv(_report_dir(cfg) / "nodeclass.csv", header, table)
    print(format_table(header, table))


def run_ablate(cfg: RunConfig, args: argparse.Namespace) -> None:
    g, ea, _ = _load_inputs(cfg, need_attrs=True)
    rows = run_ablation(
        g,
        ea,
        cfg.elaine_config(),
        repeats=cfg.eval.repeats,
        holdout_frac=cfg.eval.holdout_frac,
        max_eval_nodes=cfg.eval.max_eval_nodes,
        jobs=cfg.run.jobs,
        cache_dir=cfg.run.cache_dir,
    )
    header = ("variant", "map_mean", "map_std", "repeats", "failures")
    table = [(r.variant, r.map_mean, r.map_std, r.repeats, r.failures) for r in rows]
    write_table_csv(_report_dir(cfg) / "ablation.csv", header, table)
    print(format_table(header, table))


def run_sweep_command(cfg: RunConfig, args: argparse.Namespace) -> None:
    g, ea, _ = _load_inputs(cfg)
    param = cfg.eval.sweep_param
    rows = run_sweep(
        g,
        ea,
        _model_config(cfg, ea),
        param,
        cfg.eval.sweep_values or default_sweep_values(param),
        repeats=cfg.eval.repeats,
        holdout_frac=cfg.eval.holdout_frac,
        max_eval_nodes=cfg.eval.max_eval_nodes,
        jobs=cfg.run.jobs,
        cache_dir=cfg.run.cache_dir,
    )
    header = ("param", "value", "map_mean", "map_std", "repeats")
    table = [(param, r.value, r.map_mean, r.map_std, r.repeats) for r in rows]
    write_table_csv(_report_dir(cfg) / "sweep.csv", header, table)
    print(format_table(header, table))


def run_gen_synthetic(cfg: RunConfig, args: argparse.Namespace) -> None:
    g, ea, labels = generate_sbm_with_edge_topics(
        blocks=args.blocks,
        nodes_per_block=args.nodes_per_block,
        p_in=args.p_in,
        p_out=args.p_out,
        p_topics=args.topics if args.topics is not None else args.blocks,
        noise=args.noise,
        seed=cfg.run.seed if cfg.run.seed is not None else 0,
    )
    out = _report_dir(cfg)
    save_graph(out / "graph.tsv", g)
    save_edge_attributes(out / "edge_attrs.tsv", ea)
    save_node_labels(out / "labels.tsv", labels)
    print(format_table(("n", "m", "p", "labels"), [(g.n, g.m, ea.p, labels.num_labels)]))


COMMANDS: dict[str, t.Callable[[RunConfig, argparse.Namespace], None]] = {
    "embed": run_embed,
    "linkpred": run_linkpred,
    "nodeclass": run_nodeclass,
    "ablate": run_ablate,
    "sweep": run_sweep_command,
    "gen-synthetic": run_gen_synthetic,
}


def main(argv: t.Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 0

    setup_logging()
    match load_config(args.config, _overrides(args)):
        case Ok(cfg):
            setup_logging(cfg.run.log_level)
        case Err(e):
            logger.error(str(e))
            return 2

    try:
        COMMANDS[args.command](cfg, args)
    except ConfigError as e:
        logger.error(str(e))
        return 2
    except Exception as e:
        logger.exception(f"{args.command} failed: {e}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
