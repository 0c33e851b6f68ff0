"""Collects one result line per acceptance criterion for the run summary."""
import time
from contextlib import contextmanager

LINES: list[str] = []


@contextmanager
def criterion(number: int, title: str, limit: float | None = None):
    """Time a criterion body; record PASS/FAIL with the elapsed time."""
    start = time.perf_counter()
    state = {"detail": ""}
    ok = False
    try:
        yield state
        ok = True
    finally:
        dt = time.perf_counter() - start
        within = limit is None or dt < limit
        bound = f" (limit {limit:g}s)" if limit is not None else ""
        verdict = "PASS" if ok and within else "FAIL"
        extra = f" - {state['detail']}" if state["detail"] else ""
        if ok and not within:
            extra += " - over time limit"
        line = f"[{verdict}] criterion {number}: {title}: {dt:.2f}s{bound}{extra}"
        LINES.append(line)
        print(line)
    assert within, f"criterion {number} took {dt:.2f}s, limit {limit}s"
