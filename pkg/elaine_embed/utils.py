import asyncio
import hashlib
import typing as t
from itertools import batched

import numpy as np
import numpy.typing as npt
from neverraise import Result, ResultAsync


async def batch_calls_result_async[T, E](
    datas: t.Iterable[t.Any],
    func: t.Callable[..., ResultAsync[T, E]],
    batch_size: int,
) -> list[Result[T, E]]:
    results: list[Result[T, E]] = []
    for chunk in batched(datas, max(batch_size, 1)):
        results.extend(await asyncio.gather(*(func(*params) for params in chunk)))
    return results


def run_in_thread[T, E](
    func: t.Callable[..., T],
    *args: t.Any,
    on_error: t.Callable[[Exception], E],
) -> ResultAsync[T, E]:
    """Run a blocking job on a worker thread, capturing any exception as an `Err`."""
    return ResultAsync.from_coro(asyncio.to_thread(func, *args), on_error)


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent random stream for `(seed, *keys)`, stable across worker counts."""
    return np.random.default_rng(np.random.SeedSequence([seed, *keys]))


def array_fingerprint(*arrays: npt.NDArray[t.Any]) -> str:
    digest = hashlib.sha256()
    for array in arrays:
        contiguous = np.ascontiguousarray(array)
        digest.update(str(contiguous.shape).encode())
        digest.update(str(contiguous.dtype).encode())
        digest.update(contiguous.tobytes())
    return digest.hexdigest()
