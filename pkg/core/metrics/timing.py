import time
from dataclasses import dataclass
from typing import Any, Callable


@dataclass(frozen=True)
class TimedRun:
    cpu_seconds: float
    wall_seconds: float
    value: Any = None


def time_run(task: Callable[[], Any]) -> TimedRun:
    """
    Runs `task` and measures it. CPU time is the process CPU time, which sums
    the busy time of every worker thread; wall time is elapsed time.
    """
    cpu_start = time.process_time()
    wall_start = time.perf_counter()
    value = task()
    wall = time.perf_counter() - wall_start
    cpu = time.process_time() - cpu_start
    return TimedRun(cpu_seconds=max(cpu, 0.0), wall_seconds=max(wall, 0.0), value=value)
