"""Worker-count plumbing; must run before numba is imported."""
from __future__ import annotations

import os
import warnings

ENV = "WEAKLEVY_THREADS"


def requested_threads() -> int | None:
    raw = os.environ.get(ENV)
    if raw is None or raw.strip() == "":
        return None
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"{ENV} must be a positive integer, got {raw!r}")
    return n


def prepare() -> None:
    # this numba build probes an old TBB and warns on every first launch;
    # the omp/workqueue layers it falls back to are fine
    warnings.filterwarnings("ignore", message="The TBB threading layer")
    # numba sizes its pool from NUMBA_NUM_THREADS at import; allow more
    # workers than cores when explicitly requested
    try:
        n = requested_threads()
    except ValueError:
        return  # reported by apply()
    if n is not None and "NUMBA_NUM_THREADS" not in os.environ:
        os.environ["NUMBA_NUM_THREADS"] = str(max(n, os.cpu_count() or 1))


def apply() -> int:
    import numba

    n = requested_threads()
    cap = numba.config.NUMBA_NUM_THREADS
    n = cap if n is None else min(n, cap)
    numba.set_num_threads(n)
    return n
