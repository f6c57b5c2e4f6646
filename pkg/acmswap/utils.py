"""Utilities"""

# This file is a part of acmswap
# You can redistribute it and/or modify it under the terms of the GNU AGPLv3
# 🔑 https://www.gnu.org/licenses/agpl-3.0.html

import asyncio
import functools
import typing
from concurrent.futures import Executor, ThreadPoolExecutor


def run_sync(
    func,
    *args,
    executor: typing.Optional[Executor] = None,
    **kwargs,
) -> typing.Awaitable:
    """
    Run a non-async function in a worker thread and return an awaitable
    :param func: Sync-only function to execute
    :param executor: Executor to use, loop default if not passed
    :return: Awaitable future
    """
    return asyncio.get_running_loop().run_in_executor(
        executor,
        functools.partial(func, *args, **kwargs),
    )


def gather_sync(
    calls: typing.Sequence[typing.Callable[[], typing.Any]],
    workers: int = 1,
) -> typing.List[typing.Any]:
    """
    Runs blocking callables, at most `workers` at a time
    :param calls: Argument-less callables
    :param workers: Worker threads, `1` runs everything in order in this thread
    :return: Results in the order of `calls`
    """
    if workers <= 1 or len(calls) <= 1:
        return [call() for call in calls]

    async def _gather() -> typing.List[typing.Any]:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            return list(
                await asyncio.gather(
                    *(run_sync(call, executor=executor) for call in calls)
                )
            )

    return asyncio.run(_gather())
