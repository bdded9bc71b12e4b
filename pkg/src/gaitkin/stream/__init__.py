"""50 Hz streaming inference harness."""

from gaitkin.stream.ring import RingBuffer
from gaitkin.stream.runner import (
    LatencyStats,
    TickResult,
    iter_imu_lines,
    iter_socket_samples,
    latency_report,
    push_and_infer,
    queued_source,
    run_stream,
    write_tick_stream,
)

__all__ = [
    "RingBuffer",
    "TickResult",
    "LatencyStats",
    "push_and_infer",
    "run_stream",
    "latency_report",
    "write_tick_stream",
    "iter_imu_lines",
    "iter_socket_samples",
    "queued_source",
]
