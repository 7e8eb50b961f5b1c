import enum
import hashlib
import math
import pathlib
import typing as t

import msgspec
import numpy as np
import pydantic
from neverraise import Err, Ok, Result
from pydantic import BaseModel, ConfigDict, Field

from elaine_embed.errors import (
    CheckpointError,
    ContractViolation,
    GraphParseError,
    TrainingFault,
    ValidationError,
)
from elaine_embed.graph import EdgeAttributes, FloatArray, Graph, IntArray
from elaine_embed.logger import logger
from elaine_embed.nn.adam import AdamState, adam_step
from elaine_embed.nn.checkpoint import decode_blob, encode_blob, restore_into
from elaine_embed.nn.layers import Activation, LayerStack, backward, forward
from elaine_embed.nn.vae import (
    GaussianHead,
    backward_head,
    encode_head,
    kl_unit_gaussian,
    kl_unit_gaussian_grad,
    sample_latent,
)
from elaine_embed.proximity import WalkConfig, cached_similarity, transition_matrix
from elaine_embed.roles import aggregate_edge_attributes, role_features

PathLike = str | pathlib.Path

NEIGHBOURHOOD = "neighbourhood"
ROLES = "roles"
ATTRIBUTES = "attributes"


class EdgeAttrMode(enum.StrEnum):
    NONE = "none"
    NODE_AGGREGATED = "node_aggregated"
    COUPLED = "coupled"


LayerSize = t.Annotated[int, Field(ge=1)]


class ElaineConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    dim: int = Field(default=128, ge=1, description="embedding dimension")
    encoder_hidden: tuple[LayerSize, ...] = Field(default=(500, 300), min_length=1)
    edge_decoder_hidden: tuple[LayerSize, ...] = ()
    alpha_1: float = Field(default=1.0, ge=0, description="edge-attribute loss weight")
    alpha_v: float = Field(default=1e-2, ge=0, description="KL loss weight")
    alpha_l: float = Field(default=0.0, ge=0, description="L1 weight penalty")
    alpha_r: float = Field(default=1e-4, ge=0, description="L2 weight penalty")
    beta_penalty: float = Field(default=5.0, ge=1, description="weight on observed entries")
    walk: WalkConfig = WalkConfig()
    use_vae: bool = True
    use_higher_order: bool = True
    use_roles: bool = True
    edge_attr_mode: EdgeAttrMode = EdgeAttrMode.COUPLED
    epochs: int = Field(default=200, ge=0)
    minibatch_size: int = Field(default=64, ge=1)
    learning_rate: float = Field(default=1e-3, gt=0)
    seed: int = Field(default=0, ge=0)

    def fingerprint(self) -> str:
        return hashlib.sha256(self.model_dump_json().encode()).hexdigest()


class FeatureLayout(msgspec.Struct, frozen=True):
    blocks: dict[str, tuple[int, int]]
    """Block name -> (start, stop) column range"""
    width: int


class FeatureMatrix(msgspec.Struct, frozen=True):
    F: FloatArray
    layout: FeatureLayout
    graph_hash: str


def assemble_features(
    g: Graph,
    ea: EdgeAttributes,
    cfg: ElaineConfig,
    jobs: int = 1,
    cache_dir: PathLike | None = None,
) -> FeatureMatrix:
    """F = [S or row-normalised adjacency, R?, aggregated attributes?]."""
    if g.n == 0:
        raise ValidationError("Cannot assemble features for an empty graph")

    parts: list[tuple[str, FloatArray]] = []
    if cfg.use_higher_order:
        parts.append((NEIGHBOURHOOD, cached_similarity(g, cfg.walk, cache_dir, jobs).S))
    else:
        parts.append((NEIGHBOURHOOD, transition_matrix(g)))
    if cfg.use_roles:
        parts.append((ROLES, role_features(g).R))
    if cfg.edge_attr_mode == EdgeAttrMode.NODE_AGGREGATED:
        parts.append((ATTRIBUTES, aggregate_edge_attributes(g, ea)))

    blocks: dict[str, tuple[int, int]] = {}
    offset = 0
    for name, block in parts:
        blocks[name] = (offset, offset + block.shape[1])
        offset += block.shape[1]
    F = np.hstack([block for _, block in parts])
    return FeatureMatrix(
        F=F,
        layout=FeatureLayout(blocks=blocks, width=offset),
        graph_hash=g.fingerprint(),
    )


class ElaineModel:
    """Coupled variational autoencoder.

    Both endpoints of an edge go through the same `encoder`, `head` and
    `feature_decoder` objects; the coupling lives only in the edge decoder,
    which reads the concatenated endpoint codes.
    """

    config: ElaineConfig
    layout: FeatureLayout
    attr_dim: int
    encoder: LayerStack
    head: GaussianHead
    feature_decoder: LayerStack
    edge_decoder: LayerStack | None
    adam: AdamState

    def __init__(
        self,
        config: ElaineConfig,
        layout: FeatureLayout,
        attr_dim: int,
        encoder: LayerStack,
        head: GaussianHead,
        feature_decoder: LayerStack,
        edge_decoder: LayerStack | None,
    ):
        self.config = config
        self.layout = layout
        self.attr_dim = attr_dim
        self.encoder = encoder
        self.head = head
        self.feature_decoder = feature_decoder
        self.edge_decoder = edge_decoder
        self.adam = AdamState.for_params(self.parameters(), lr=config.learning_rate)

    @classmethod
    def initialize(
        cls,
        config: ElaineConfig,
        layout: FeatureLayout,
        attr_dim: int,
        rng: np.random.Generator | None = None,
    ) -> t.Self:
        if config.edge_attr_mode == EdgeAttrMode.COUPLED and attr_dim < 1:
            raise ValidationError("edge_attr_mode=coupled needs edge attributes (p >= 1)")
        rng = rng if rng is not None else np.random.default_rng(config.seed)
        hidden = list(config.encoder_hidden)

        encoder = LayerStack.init([layout.width, *hidden], Activation.RELU, Activation.RELU, rng)
        head = GaussianHead.init(hidden[-1], config.dim, rng)
        feature_decoder = LayerStack.init(
            [config.dim, *reversed(hidden), layout.width],
            Activation.RELU,
            Activation.SIGMOID,
            rng,
        )
        edge_decoder = None
        if config.edge_attr_mode == EdgeAttrMode.COUPLED:
            edge_decoder = LayerStack.init(
                [2 * config.dim, *config.edge_decoder_hidden, attr_dim],
                Activation.RELU,
                Activation.SIGMOID,
                rng,
            )
        return cls(config, layout, attr_dim, encoder, head, feature_decoder, edge_decoder)

    def parameters(self) -> list[FloatArray]:
        params = (
            self.encoder.parameters()
            + self.head.parameters()
            + self.feature_decoder.parameters()
        )
        if self.edge_decoder is not None:
            params += self.edge_decoder.parameters()
        return params

    def weight_groups(self) -> dict[str, list[FloatArray]]:
        """Weight matrices (no biases) of the encoder, feature decoder and edge decoder."""
        return {
            "encoder": self.encoder.weights() + self.head.weights(),
            "feature_decoder": self.feature_decoder.weights(),
            "edge_decoder": self.edge_decoder.weights() if self.edge_decoder else [],
        }

    def encode(self, X: FloatArray) -> FloatArray:
        h, _ = forward(self.encoder, X)
        return encode_head(self.head, h)

    def reconstruct(self, Y: FloatArray) -> FloatArray:
        F_hat, _ = forward(self.feature_decoder, Y)
        return F_hat


class EdgeBatch(msgspec.Struct, frozen=True):
    src: IntArray
    dst: IntArray
    attrs: FloatArray
    """len(src)×p attribute rows, aligned with (src, dst)"""


class LossTerms(msgspec.Struct, frozen=True):
    l_n: float
    l_e: float
    l_v: float
    l_l: float
    l_r: float
    total: float

    def as_array(self) -> FloatArray:
        return np.array([self.l_n, self.l_e, self.l_v, self.l_l, self.l_r, self.total])

    @classmethod
    def from_array(cls, values: FloatArray) -> t.Self:
        l_n, l_e, l_v, l_l, l_r, total = (float(x) for x in values)
        return cls(l_n=l_n, l_e=l_e, l_v=l_v, l_l=l_l, l_r=l_r, total=total)


def observed_mask(X: FloatArray, beta: float) -> FloatArray:
    """β where the feature entry is positive, 1 elsewhere."""
    return np.where(X > 0, beta, 1.0)


def _evaluate(
    model: ElaineModel,
    batch: EdgeBatch,
    features: FeatureMatrix,
    eps: FloatArray | None,
    with_grads: bool,
) -> tuple[LossTerms, list[FloatArray]]:
    cfg = model.config
    size = len(batch.src)
    if size == 0 or len(batch.dst) != size:
        raise ContractViolation("Batch must hold at least one (src, dst) pair")
    if np.any(batch.src == batch.dst):
        raise ContractViolation("Batch contains a self-pair")

    X = features.F[np.concatenate([batch.src, batch.dst])]
    mask = observed_mask(X, cfg.beta_penalty)
    if eps is None or not cfg.use_vae:
        eps = np.zeros((2 * size, cfg.dim))

    h, enc_cache = forward(model.encoder, X)
    sample = sample_latent(model.head, h, eps)
    F_hat, dec_cache = forward(model.feature_decoder, sample.z)
    resid = (F_hat - X) * mask
    l_n = float(np.sum(resid**2))

    l_e = 0.0
    edge_cache = None
    diff = np.zeros((size, 0))
    if model.edge_decoder is not None:
        pair = np.hstack([sample.z[:size], sample.z[size:]])
        e_hat, edge_cache = forward(model.edge_decoder, pair)
        diff = e_hat - batch.attrs
        l_e = float(np.sum(diff**2))

    l_v = 0.0
    if cfg.use_vae:
        l_v = kl_unit_gaussian(sample.mu[:size], sample.logvar[:size]) + kl_unit_gaussian(
            sample.mu[size:], sample.logvar[size:]
        )

    weights = [w for group in model.weight_groups().values() for w in group]
    l_l = float(sum(np.abs(w).sum() for w in weights))
    l_r = float(sum((w**2).sum() for w in weights))

    alpha_v = cfg.alpha_v if cfg.use_vae else 0.0
    total = (
        l_n
        + cfg.alpha_1 * l_e
        + alpha_v * l_v
        + cfg.alpha_l * l_l
        + cfg.alpha_r * l_r
    )
    terms = LossTerms(l_n=l_n, l_e=l_e, l_v=l_v, l_l=l_l, l_r=l_r, total=total)
    if not with_grads:
        return terms, []

    dz, dec_grads = backward(model.feature_decoder, 2.0 * resid * mask, dec_cache)
    edge_grads: list[FloatArray] = []
    if model.edge_decoder is not None and edge_cache is not None:
        d_pair, edge_grads = backward(
            model.edge_decoder, 2.0 * cfg.alpha_1 * diff, edge_cache
        )
        dz[:size] += d_pair[:, : cfg.dim]
        dz[size:] += d_pair[:, cfg.dim :]

    dmu_extra = dlogvar_extra = None
    if cfg.use_vae:
        mu_i, lv_i = kl_unit_gaussian_grad(sample.mu[:size], sample.logvar[:size])
        mu_j, lv_j = kl_unit_gaussian_grad(sample.mu[size:], sample.logvar[size:])
        dmu_extra = alpha_v * np.vstack([mu_i, mu_j])
        dlogvar_extra = alpha_v * np.vstack([lv_i, lv_j])
    dh, head_grads = backward_head(model.head, sample, dz, dmu_extra, dlogvar_extra)
    _, enc_grads = backward(model.encoder, dh, enc_cache)

    grads = enc_grads + head_grads + dec_grads + edge_grads
    for param, grad in zip(model.parameters(), grads):
        # weight matrices are the 2-D parameters; biases are not regularised
        if param.ndim == 2:
            grad += cfg.alpha_l * np.sign(param) + 2.0 * cfg.alpha_r * param
    return terms, grads


def loss_terms(
    model: ElaineModel,
    batch: EdgeBatch,
    features: FeatureMatrix,
    eps: FloatArray | None = None,
) -> LossTerms:
    """Loss of one edge minibatch. `eps` is (2·batch)×d, source rows first;
    None means zero noise."""
    terms, _ = _evaluate(model, batch, features, eps, with_grads=False)
    return terms


def loss_and_gradients(
    model: ElaineModel,
    batch: EdgeBatch,
    features: FeatureMatrix,
    eps: FloatArray | None = None,
) -> tuple[LossTerms, list[FloatArray]]:
    """As `loss_terms`, plus d(total)/d(param) aligned with `model.parameters()`."""
    return _evaluate(model, batch, features, eps, with_grads=True)


class TrainResult(msgspec.Struct):
    model: ElaineModel
    features: FeatureMatrix
    history: list[LossTerms]
    """Per-epoch mean of each loss term"""


def train(
    g: Graph,
    ea: EdgeAttributes,
    cfg: ElaineConfig,
    features: FeatureMatrix | None = None,
    jobs: int = 1,
    cache_dir: PathLike | None = None,
) -> TrainResult:
    if g.m == 0:
        raise ValidationError("Training needs at least one edge")
    if features is None:
        features = assemble_features(g, ea, cfg, jobs=jobs, cache_dir=cache_dir)

    rng = np.random.default_rng(cfg.seed)
    model = ElaineModel.initialize(cfg, features.layout, ea.p, rng)
    params = model.parameters()

    edges = g.edge_array()
    attrs = ea.matrix(edges) if model.edge_decoder is not None else np.zeros((g.m, 0))
    steps = math.ceil(g.m / cfg.minibatch_size)
    history: list[LossTerms] = []
    report_every = max(1, cfg.epochs // 10)

    for epoch in range(cfg.epochs):
        order = rng.permutation(g.m)
        sums = np.zeros(6)
        for step in range(steps):
            chosen = order[step * cfg.minibatch_size : (step + 1) * cfg.minibatch_size]
            flip = rng.random(len(chosen)) < 0.5
            src = np.where(flip, edges[chosen, 1], edges[chosen, 0])
            dst = np.where(flip, edges[chosen, 0], edges[chosen, 1])
            batch = EdgeBatch(src=src, dst=dst, attrs=attrs[chosen])
            eps = rng.standard_normal((2 * len(chosen), cfg.dim)) if cfg.use_vae else None

            terms, grads = loss_and_gradients(model, batch, features, eps)
            if not math.isfinite(terms.total):
                raise TrainingFault(
                    f"Non-finite loss {terms!r}", epoch=epoch, step=step, history=history
                )
            _ = adam_step(model.adam, params, grads)
            sums += terms.as_array()

        history.append(LossTerms.from_array(sums / steps))
        if epoch % report_every == 0 or epoch == cfg.epochs - 1:
            mean = history[-1]
            logger.info(
                f"Epoch {epoch + 1}/{cfg.epochs}: L={mean.total:.6g} L_n={mean.l_n:.6g} "
                f"L_e={mean.l_e:.6g} L_v={mean.l_v:.6g}"
            )

    return TrainResult(model=model, features=features, history=history)


class Embedding(msgspec.Struct, frozen=True):
    Y: FloatArray
    config_fingerprint: str
    graph_hash: str

    @property
    def n(self) -> int:
        return self.Y.shape[0]

    @property
    def d(self) -> int:
        return self.Y.shape[1]


def embed(model: ElaineModel, features: FeatureMatrix) -> Embedding:
    """Posterior means μ(F_u) for every node; no sampling."""
    return Embedding(
        Y=model.encode(features.F),
        config_fingerprint=model.config.fingerprint(),
        graph_hash=features.graph_hash,
    )


def score_edge(model: ElaineModel, Y: FloatArray, u: int, v: int) -> float:
    """½(F̂_u[v] + F̂_v[u]) on the reconstructed neighbourhood block."""
    if u == v:
        raise ContractViolation(f"Cannot score self-pair ({u}, {u})")
    start, _ = model.layout.blocks[NEIGHBOURHOOD]
    F_hat = model.reconstruct(Y[[u, v]])
    return 0.5 * (float(F_hat[0, start + v]) + float(F_hat[1, start + u]))


def score_matrix(model: ElaineModel, Y: FloatArray) -> FloatArray:
    """All-pairs `score_edge`; symmetric, diagonal meaningless."""
    start, stop = model.layout.blocks[NEIGHBOURHOOD]
    block = model.reconstruct(Y)[:, start:stop]
    return 0.5 * (block + block.T)


def predict_edge_attributes(model: ElaineModel, Y: FloatArray, u: int, v: int) -> FloatArray:
    if model.edge_decoder is None:
        raise ContractViolation("Model was trained without the edge-attribute decoder")
    out, _ = forward(model.edge_decoder, np.concatenate([Y[u], Y[v]])[None, :])
    return out[0]


def save_embedding(path: PathLike, emb: Embedding) -> None:
    with open(path, "w", encoding="utf-8") as f:
        _ = f.write(f"{emb.n} {emb.d}\n")
        for u, row in enumerate(emb.Y):
            values = " ".join(f"{x:.17g}" for x in row)
            _ = f.write(f"{u} {values}\n")


def load_embedding(path: PathLike) -> Result[Embedding, GraphParseError]:
    try:
        with open(path, encoding="utf-8") as f:
            n, d = (int(x) for x in f.readline().split())
            Y = np.zeros((n, d))
            for lineno, line in enumerate(f, start=2):
                fields = line.split()
                if len(fields) != d + 1:
                    raise GraphParseError(f"{path}:{lineno}: expected {d + 1} fields")
                Y[int(fields[0])] = [float(x) for x in fields[1:]]
    except GraphParseError as e:
        return Err(e)
    except (OSError, ValueError, IndexError) as e:
        return Err(GraphParseError(f"Cannot read embedding {path}: {e}"))
    return Ok(Embedding(Y=Y, config_fingerprint="", graph_hash=""))


class ModelMetadata(msgspec.Struct, frozen=True):
    config: dict[str, t.Any]
    blocks: dict[str, tuple[int, int]]
    width: int
    attr_dim: int


def save_model(path: PathLike, model: ElaineModel) -> None:
    metadata = ModelMetadata(
        config=model.config.model_dump(mode="json"),
        blocks=model.layout.blocks,
        width=model.layout.width,
        attr_dim=model.attr_dim,
    )
    data = encode_blob(
        model.parameters(), model.adam, msgspec.json.encode(metadata).decode()
    )
    pathlib.Path(path).write_bytes(data)


def load_model(path: PathLike) -> Result[ElaineModel, CheckpointError]:
    try:
        data = pathlib.Path(path).read_bytes()
    except OSError as e:
        return Err(CheckpointError(f"Cannot read checkpoint {path}: {e}"))

    # fmt: off
    match decode_blob(data):
        case Ok(blob): ...  # noqa: E701
        case Err(e): return Err(e)  # noqa: E701
    # fmt: on

    try:
        metadata = msgspec.json.decode(blob.metadata, type=ModelMetadata)
        config = ElaineConfig.model_validate(metadata.config)
        model = ElaineModel.initialize(
            config,
            FeatureLayout(blocks=metadata.blocks, width=metadata.width),
            metadata.attr_dim,
        )
    except (msgspec.DecodeError, pydantic.ValidationError, ValidationError) as e:
        return Err(CheckpointError(f"Bad checkpoint metadata: {e}"))

    # fmt: off
    match restore_into(blob, model.parameters(), model.adam):
        case Ok(): return Ok(model)  # noqa: E701
        case Err(e): return Err(e)  # noqa: E701
    # fmt: on
