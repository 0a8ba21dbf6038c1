"""Worker-count policy shared by FFTs and sweep evaluation."""
import os
from concurrent.futures import ThreadPoolExecutor

ENV_VAR = "LAGREUL_THREADS"


def worker_count():
    """Number of workers allowed by ``LAGREUL_THREADS`` (default: all cores)."""
    raw = os.environ.get(ENV_VAR)
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{ENV_VAR} must be an integer >= 1, got {raw!r}") from None
    if value < 1:
        raise ValueError(f"{ENV_VAR} must be an integer >= 1, got {raw!r}")
    return value


def parallel_map(func, items):
    """Order-preserving map; threads only when more than one worker is allowed."""
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
