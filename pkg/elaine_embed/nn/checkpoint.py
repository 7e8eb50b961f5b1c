import typing as t

import msgspec
import numpy as np
from neverraise import Err, Ok, Result

from elaine_embed.errors import CheckpointError
from elaine_embed.graph import FloatArray
from elaine_embed.nn.adam import AdamState

CHECKPOINT_VERSION = 1


class ArrayRecord(msgspec.Struct, frozen=True):
    shape: list[int]
    data: bytes
    """Little-endian float64, row-major"""


class ParameterBlob(msgspec.Struct, frozen=True):
    version: int
    params: list[ArrayRecord]
    adam_step: int
    adam_lr: float
    adam_beta1: float
    adam_beta2: float
    adam_eps: float
    adam_m: list[ArrayRecord]
    adam_v: list[ArrayRecord]
    metadata: str
    """Free-form structured text stored alongside the parameters"""


def _record(array: FloatArray) -> ArrayRecord:
    data = np.ascontiguousarray(array, dtype="<f8").tobytes()
    return ArrayRecord(shape=list(array.shape), data=data)


def _array(record: ArrayRecord) -> FloatArray:
    return np.frombuffer(record.data, dtype="<f8").reshape(record.shape).astype(np.float64)


def encode_blob(params: t.Sequence[FloatArray], adam: AdamState, metadata: str) -> bytes:
    blob = ParameterBlob(
        version=CHECKPOINT_VERSION,
        params=[_record(p) for p in params],
        adam_step=adam.step,
        adam_lr=adam.lr,
        adam_beta1=adam.beta1,
        adam_beta2=adam.beta2,
        adam_eps=adam.eps,
        adam_m=[_record(m) for m in adam.m],
        adam_v=[_record(v) for v in adam.v],
        metadata=metadata,
    )
    return msgspec.msgpack.encode(blob)


def decode_blob(data: bytes) -> Result[ParameterBlob, CheckpointError]:
    try:
        blob = msgspec.msgpack.decode(data, type=ParameterBlob)
    except msgspec.DecodeError as e:
        return Err(CheckpointError(f"Corrupt checkpoint: {e}"))
    if blob.version != CHECKPOINT_VERSION:
        return Err(
            CheckpointError(
                f"Checkpoint version {blob.version} unsupported (expected {CHECKPOINT_VERSION})"
            )
        )
    return Ok(blob)


def restore_into(
    blob: ParameterBlob, params: list[FloatArray], adam: AdamState
) -> Result[None, CheckpointError]:
    """Copy stored values into freshly built `params` and `adam`, checking shapes."""
    expected = [list(p.shape) for p in params]
    for name, records in (("params", blob.params), ("adam_m", blob.adam_m), ("adam_v", blob.adam_v)):
        stored = [r.shape for r in records]
        if stored != expected:
            return Err(
                CheckpointError(f"Checkpoint {name} shapes {stored} do not match model {expected}")
            )
        if any(len(r.data) != 8 * int(np.prod(r.shape)) for r in records):
            return Err(CheckpointError(f"Checkpoint {name} data is truncated"))

    for p, record in zip(params, blob.params):
        p[...] = _array(record)
    for m, record in zip(adam.m, blob.adam_m):
        m[...] = _array(record)
    for v, record in zip(adam.v, blob.adam_v):
        v[...] = _array(record)
    adam.step = blob.adam_step
    adam.lr = blob.adam_lr
    adam.beta1 = blob.adam_beta1
    adam.beta2 = blob.adam_beta2
    adam.eps = blob.adam_eps
    return Ok(None)
