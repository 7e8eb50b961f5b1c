import typing as t

import pytest
from neverraise import Err, Ok, Result


def ok[T](result: Result[T, t.Any]) -> T:
    match result:
        case Ok(value):
            return value
        case Err(e):
            pytest.fail(f"expected Ok, got Err({e!r})")


def err[E](result: Result[t.Any, E]) -> E:
    match result:
        case Ok(value):
            pytest.fail(f"expected Err, got Ok({value!r})")
        case Err(e):
            return e
