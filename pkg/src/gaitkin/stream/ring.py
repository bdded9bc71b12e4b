"""Fixed-capacity ring buffer for causal input windows."""

from __future__ import annotations

import numpy as np

from gaitkin.errors import ChannelMismatch


class RingBuffer:
    """Last ``window_len`` samples of an n-channel stream, O(1) push.

    ``window()`` returns the causal window ending at the newest sample,
    zero-padded on the left while fewer than ``window_len`` samples have
    been pushed (the warmup phase). Padding is explicit: the window is
    assembled fresh on each call, never exposing stale slots.
    """

    def __init__(self, channels: int, window_len: int):
        if channels < 1 or window_len < 1:
            raise ValueError("channels and window_len must be >= 1")
        self.channels = channels
        self.window_len = window_len
        self._buf = np.zeros((channels, window_len))
        self._cursor = 0
        self._fill = 0

    def __len__(self) -> int:
        return self._fill

    @property
    def warmup(self) -> bool:
        return self._fill < self.window_len

    def push(self, sample) -> None:
        sample = np.asarray(sample, dtype=np.float64)
        if sample.shape != (self.channels,):
            raise ChannelMismatch(
                f"expected {self.channels} channels, got shape {sample.shape}"
            )
        self._buf[:, self._cursor] = sample
        self._cursor = (self._cursor + 1) % self.window_len
        self._fill = min(self._fill + 1, self.window_len)

    def window(self) -> np.ndarray:
        """(channels, window_len) causal window ending at the newest sample."""
        out = np.zeros((self.channels, self.window_len))
        n = self._fill
        if n == 0:
            return out
        first = (self._cursor - n) % self.window_len
        head = min(self.window_len - first, n)
        out[:, self.window_len - n : self.window_len - n + head] = self._buf[
            :, first : first + head
        ]
        if head < n:
            out[:, self.window_len - n + head :] = self._buf[:, : n - head]
        return out

    def reset(self) -> None:
        self._buf[:] = 0.0
        self._cursor = 0
        self._fill = 0
