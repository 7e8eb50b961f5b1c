import pathlib
import typing as t

import numpy as np
from neverraise import Err, Ok, Result

from elaine_embed.errors import GraphParseError, ValidationError
from elaine_embed.graph import (
    EdgeAttributes,
    EdgeKey,
    FloatArray,
    Graph,
    NodeLabels,
    edge_key,
)
from elaine_embed.logger import logger

PathLike = str | pathlib.Path

NODES_HEADER = "nodes"


def _data_lines(path: PathLike) -> t.Iterator[tuple[int, list[str]]]:
    """Yield (line number, fields) skipping blanks and '#' comments."""
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield lineno, line.split()


def _node_id(token: str, path: PathLike, lineno: int) -> int:
    try:
        node = int(token)
    except ValueError as e:
        raise GraphParseError(f"{path}:{lineno}: bad node id {token!r}") from e
    if node < 0:
        raise GraphParseError(f"{path}:{lineno}: negative node id {node}")
    return node


def _float(token: str, path: PathLike, lineno: int) -> float:
    try:
        return float(token)
    except ValueError as e:
        raise GraphParseError(f"{path}:{lineno}: bad number {token!r}") from e


def _declared_nodes(path: PathLike) -> int | None:
    """Node count from a leading "# nodes N" line, if the file has one."""
    with open(path, encoding="utf-8") as f:
        first = f.readline().split()
    if first[:2] != ["#", NODES_HEADER]:
        return None
    if len(first) != 3 or not first[2].isdigit():
        raise GraphParseError(f"{path}:1: expected '# {NODES_HEADER} N'")
    return int(first[2])


def load_graph(
    path: PathLike, n: int | None = None
) -> Result[Graph, GraphParseError | ValidationError]:
    """Read a "u v [w]" edge list. Duplicate pairs, in either order, sum weights.

    The node count is `n` when given, else the "# nodes N" header, else the
    largest id plus one. Trailing isolated nodes need one of the first two.
    """
    edges: list[tuple[int, int, float]] = []
    try:
        declared = n if n is not None else _declared_nodes(path)
        for lineno, fields in _data_lines(path):
            if len(fields) not in (2, 3):
                raise GraphParseError(
                    f"{path}:{lineno}: expected 'u v [w]', got {len(fields)} fields"
                )
            u = _node_id(fields[0], path, lineno)
            v = _node_id(fields[1], path, lineno)
            w = _float(fields[2], path, lineno) if len(fields) == 3 else 1.0
            if u == v:
                raise ValidationError(f"{path}:{lineno}: self-loop on node {u}")
            if not np.isfinite(w) or w <= 0:
                raise ValidationError(f"{path}:{lineno}: weight must be positive, got {w}")
            edges.append((u, v, w))
    except (GraphParseError, ValidationError) as e:
        return Err(e)
    except OSError as e:
        return Err(GraphParseError(f"Cannot read {path}: {e}"))

    inferred = max((max(u, v) for u, v, _ in edges), default=-1) + 1
    try:
        graph = Graph.from_edges(inferred if declared is None else declared, edges)
    except ValidationError as e:
        return Err(e)
    logger.info(f"Loaded graph {path}: n={graph.n} m={graph.m}")
    return Ok(graph)


def save_graph(path: PathLike, g: Graph) -> None:
    with open(path, "w", encoding="utf-8") as f:
        _ = f.write(f"# {NODES_HEADER} {g.n}\n")
        for u, v, w in g.edges():
            _ = f.write(f"{u}\t{v}\t{w:.17g}\n")


def load_edge_attributes(
    path: PathLike, g: Graph
) -> Result[EdgeAttributes, GraphParseError | ValidationError]:
    """Read "u v a1 ... ap" lines; graph edges without a line get zero vectors."""
    given: dict[EdgeKey, FloatArray] = {}
    p: int | None = None
    try:
        for lineno, fields in _data_lines(path):
            if len(fields) < 3:
                raise GraphParseError(f"{path}:{lineno}: expected 'u v a1 ... ap'")
            u = _node_id(fields[0], path, lineno)
            v = _node_id(fields[1], path, lineno)
            values = np.array([_float(x, path, lineno) for x in fields[2:]])
            if p is None:
                p = len(values)
            elif len(values) != p:
                raise ValidationError(
                    f"{path}:{lineno}: {len(values)} attributes, expected {p}"
                )
            if u >= g.n or v >= g.n or not g.has_edge(u, v):
                raise ValidationError(f"{path}:{lineno}: ({u}, {v}) is not an edge")
            key = edge_key(u, v)
            if key in given:
                raise ValidationError(f"{path}:{lineno}: duplicate attributes for {key}")
            given[key] = values
        attributes = EdgeAttributes.build(g, p or 0, given)
    except (GraphParseError, ValidationError) as e:
        return Err(e)
    except OSError as e:
        return Err(GraphParseError(f"Cannot read {path}: {e}"))

    if attributes.missing:
        logger.warning(
            f"{attributes.missing} edges have no attributes in {path}; using zero vectors"
        )
    return Ok(attributes)


def save_edge_attributes(path: PathLike, ea: EdgeAttributes) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for (u, v), vector in sorted(ea.rows.items()):
            values = " ".join(f"{x:.17g}" for x in vector)
            _ = f.write(f"{u}\t{v}\t{values}\n")


def load_node_labels(
    path: PathLike, n: int
) -> Result[NodeLabels, GraphParseError | ValidationError]:
    """Read "u l1,l2,..." lines; nodes without a line have no labels."""
    labels: dict[int, set[int]] = {}
    try:
        for lineno, fields in _data_lines(path):
            if len(fields) not in (1, 2):
                raise GraphParseError(f"{path}:{lineno}: expected 'u l1,l2,...'")
            node = _node_id(fields[0], path, lineno)
            if node >= n:
                raise ValidationError(f"{path}:{lineno}: node {node} not in graph")
            tokens = fields[1].split(",") if len(fields) == 2 else []
            labels.setdefault(node, set()).update(
                _node_id(x, path, lineno) for x in tokens if x
            )
        return Ok(NodeLabels.build(labels))
    except (GraphParseError, ValidationError) as e:
        return Err(e)
    except OSError as e:
        return Err(GraphParseError(f"Cannot read {path}: {e}"))


def save_node_labels(path: PathLike, labels: NodeLabels) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for node in sorted(labels.labels):
            joined = ",".join(str(x) for x in sorted(labels.labels[node]))
            _ = f.write(f"{node}\t{joined}\n")
