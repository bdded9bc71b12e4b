"""Real-time inference loop: tick ingestion, windowing, latency accounting.

Replay mode processes samples as fast as possible; paced mode schedules
ticks on the 1/rate grid using wall-clock sleeps. A tick whose
inference runs past the next trigger counts as a budget violation; the
late result is still emitted and no sample is dropped unless
``drop_late`` asks for strict catch-up. Percentiles are nearest-rank.

Streaming predictions are bitwise equal to batch predictions over the
same windows: the ring buffer reproduces the dataset's left
zero-padding and the same eval-mode forward runs in both paths.
"""

from __future__ import annotations

import json
import socket
import time
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from gaitkin.errors import ChannelMismatch, EmptyStats, NonMonotoneTimestamps, SchemaError
from gaitkin.stream.ring import RingBuffer
from gaitkin.synth.imu import IMU_HEADER, ImuSample
from gaitkin.tcn.model import TcnModel, forward

import numpy as np

DEFAULT_RATE_HZ = 50.0


@dataclass(frozen=True)
class TickResult:
    time_s: float
    angles: tuple[float, float, float, float]  # r_hip, l_hip, r_knee, l_knee
    latency_ms: float
    warmup: bool

    def as_dict(self) -> dict:
        return {
            "time_s": self.time_s,
            "r_hip": self.angles[0],
            "l_hip": self.angles[1],
            "r_knee": self.angles[2],
            "l_knee": self.angles[3],
            "latency_ms": self.latency_ms,
            "warmup": self.warmup,
        }


@dataclass
class LatencyStats:
    """Per-tick wall-clock durations and their summary."""

    durations_ms: list[float] = field(default_factory=list)
    budget_ms: float = 20.0
    dropped: int = 0

    def add(self, ms: float) -> None:
        self.durations_ms.append(ms)

    @property
    def violations(self) -> int:
        return sum(1 for d in self.durations_ms if d > self.budget_ms)

    def percentile(self, q: float) -> float:
        """Nearest-rank percentile, q in (0, 100]."""
        if not self.durations_ms:
            raise EmptyStats("no ticks recorded")
        ordered = sorted(self.durations_ms)
        rank = max(1, int(np.ceil(q / 100.0 * len(ordered))))
        return ordered[rank - 1]

    @property
    def p50(self) -> float:
        return self.percentile(50)

    @property
    def p95(self) -> float:
        return self.percentile(95)

    @property
    def max(self) -> float:
        if not self.durations_ms:
            raise EmptyStats("no ticks recorded")
        return max(self.durations_ms)

    def as_dict(self) -> dict:
        return {
            "ticks": len(self.durations_ms),
            "p50_ms": self.p50,
            "p95_ms": self.p95,
            "max_ms": self.max,
            "budget_ms": self.budget_ms,
            "violations": self.violations,
            "dropped": self.dropped,
        }


def push_and_infer(buf: RingBuffer, model: TcnModel, sample: ImuSample) -> TickResult:
    """Append one sample, run eval-mode inference on the current window."""
    if len(sample.channels) != buf.channels:
        raise ChannelMismatch(
            f"sample has {len(sample.channels)} channels, buffer expects {buf.channels}"
        )
    t0 = time.perf_counter()
    buf.push(sample.channels)
    warm = buf.warmup
    pred = forward(model, buf.window(), "eval")
    latency_ms = (time.perf_counter() - t0) * 1000.0
    return TickResult(
        time_s=sample.time_s,
        angles=tuple(float(v) for v in pred),
        latency_ms=latency_ms,
        warmup=warm,
    )


def run_stream(
    source: Iterable[ImuSample],
    model: TcnModel,
    rate_hz: float = DEFAULT_RATE_HZ,
    paced: bool = False,
    drop_late: bool = False,
    budget_ms: float | None = None,
) -> tuple[list[TickResult], LatencyStats]:
    """Process a sample stream in order; returns all ticks and latency stats."""
    period = 1.0 / rate_hz
    stats = LatencyStats(budget_ms=budget_ms if budget_ms is not None else period * 1000.0)
    buf = RingBuffer(model.config.in_channels, model.config.window_len)
    results: list[TickResult] = []
    last_t = None
    deadline = None
    behind = 0.0
    for sample in source:
        if last_t is not None and sample.time_s <= last_t:
            raise NonMonotoneTimestamps(
                f"timestamp {sample.time_s} after {last_t}"
            )
        last_t = sample.time_s
        if paced:
            now = time.monotonic()
            if deadline is None:
                deadline = now
            if drop_late and now > deadline + period:
                # strict mode: skip samples until the schedule catches up
                behind = now - deadline
                skip = int(behind / period)
                deadline += period * skip
                stats.dropped += 1
                continue
            if now < deadline:
                time.sleep(deadline - now)
            deadline += period
        tick = push_and_infer(buf, model, sample)
        stats.add(tick.latency_ms)
        results.append(tick)
    return results, stats


def latency_report(stats: LatencyStats) -> str:
    """Human-readable latency summary."""
    d = stats.as_dict()
    return (
        f"ticks {d['ticks']}  p50 {d['p50_ms']:.3f} ms  p95 {d['p95_ms']:.3f} ms  "
        f"max {d['max_ms']:.3f} ms  budget {d['budget_ms']:.1f} ms  "
        f"violations {d['violations']}  dropped {d['dropped']}"
    )


def write_tick_stream(path, ticks: Iterable[TickResult]):
    with open(path, "w", encoding="utf-8") as fh:
        for tick in ticks:
            fh.write(json.dumps(tick.as_dict()) + "\n")


def iter_imu_lines(lines: Iterable[str], origin: str = "<stream>") -> Iterator[ImuSample]:
    """Parse IMU-file-schema lines (header optional) into samples."""
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        if line == IMU_HEADER:
            continue
        parts = line.split(",")
        if len(parts) != 19:
            raise SchemaError(origin, lineno, f"expected 19 fields, got {len(parts)}")
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            raise SchemaError(origin, lineno, "non-numeric field") from None
        yield ImuSample(time_s=vals[0], channels=tuple(vals[1:]))


def iter_socket_samples(address: str) -> Iterator[ImuSample]:
    """Connect to ``host:port`` and stream line-delimited IMU records."""
    host, _, port = address.partition(":")
    with socket.create_connection((host or "127.0.0.1", int(port))) as conn:
        with conn.makefile("r", encoding="utf-8") as fh:
            yield from iter_imu_lines(fh, origin=f"tcp://{address}")


def queued_source(source: Iterable[ImuSample], maxsize: int = 64) -> Iterator[ImuSample]:
    """Run a producer thread feeding a bounded queue.

    Single-consumer ordering is preserved; the producer blocks when the
    queue is full (back-pressure). Producer exceptions re-raise in the
    consumer.
    """
    import queue
    import threading

    q: "queue.Queue" = queue.Queue(maxsize=maxsize)
    done = object()

    def produce():
        try:
            for sample in source:
                q.put(sample)
            q.put(done)
        except BaseException as exc:  # propagate into the consumer
            q.put(exc)

    thread = threading.Thread(target=produce, daemon=True)
    thread.start()
    while True:
        item = q.get()
        if item is done:
            break
        if isinstance(item, BaseException):
            raise item
        yield item
    thread.join()
