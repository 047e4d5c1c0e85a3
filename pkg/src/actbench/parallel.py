from __future__ import annotations

import asyncio
import os
from collections.abc import Callable, Sequence
from typing import TypeVar

from rich.console import Console
from rich.progress import BarColumn, Progress, SpinnerColumn, TaskProgressColumn, TextColumn

T = TypeVar("T")
R = TypeVar("R")

WORKERS_ENV = "ACTBENCH_WORKERS"


def default_workers() -> int:
    """Worker count from ``ACTBENCH_WORKERS`` (default 1)."""
    raw = os.getenv(WORKERS_ENV, "1").strip()
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_bounded(
    fn: Callable[[T], R],
    items: Sequence[T],
    workers: int | None = None,
    description: str | None = None,
    console: Console | None = None,
) -> list[R]:
    """Apply ``fn`` to every item on at most ``workers`` threads.

    Results come back in input order. Exceptions propagate after all items finish;
    callers that need per-item failure handling should catch inside ``fn``.
    With ``workers == 1`` the items run inline, in order.
    """
    workers = workers or default_workers()
    if workers <= 1 or len(items) <= 1:
        if description and console is not None:
            return _run_inline_with_progress(fn, items, description, console)
        return [fn(item) for item in items]
    return asyncio.run(_run_async(fn, items, workers, description, console))


def _run_inline_with_progress(
    fn: Callable[[T], R], items: Sequence[T], description: str, console: Console
) -> list[R]:
    results: list[R] = []
    with _progress(console) as progress:
        task = progress.add_task(f"[cyan]{description}", total=len(items))
        for item in items:
            results.append(fn(item))
            progress.update(task, advance=1)
    return results


def _progress(console: Console) -> Progress:
    return Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TaskProgressColumn(),
        console=console,
        transient=True,
    )


async def _run_async(
    fn: Callable[[T], R],
    items: Sequence[T],
    workers: int,
    description: str | None,
    console: Console | None,
) -> list[R]:
    semaphore = asyncio.Semaphore(workers)
    results: list[R | None] = [None] * len(items)
    errors: list[BaseException] = []

    async def run_one(index: int, item: T) -> int:
        async with semaphore:
            try:
                results[index] = await asyncio.to_thread(fn, item)
            except Exception as e:
                errors.append(e)
            return index

    coros = [run_one(i, item) for i, item in enumerate(items)]
    if description and console is not None:
        with _progress(console) as progress:
            task = progress.add_task(f"[cyan]{description}", total=len(items))
            for coro in asyncio.as_completed(coros):
                await coro
                progress.update(task, advance=1)
    else:
        await asyncio.gather(*coros)

    if errors:
        raise errors[0]
    return results  # type: ignore[return-value]
