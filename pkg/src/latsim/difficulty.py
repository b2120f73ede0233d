"""LWMA-1 per-block difficulty adjustment.

``lwma_next_target`` follows the reference C++ loop literally, including
per-block ``target / N`` truncation, the ``k / 10`` floor, and the two
overflow branches chosen on ``sumTarget >> 192``.  ``LwmaTracker`` is an
O(1)-per-block version of the same arithmetic used by the simulator.
"""

from __future__ import annotations

from collections import deque
from typing import Sequence

from .consensus import BlockRecord, ChainParams, Target256, target_spacing
from .errors import InsufficientHistoryError, TargetOverflowError


def clamp_solvetime(dt: int, T: int) -> int:
    return min(max(dt, -6 * T), 6 * T)


def lwma_k(N: int, T: int) -> int:
    return N * (N + 1) * T // 2


def _is_reset_height(params: ChainParams, next_height: int) -> bool:
    if params.warmup_blocks > 0 and next_height == params.warmup_blocks:
        return True
    # LWMA engages once a full window exists
    return next_height <= params.lwma_window


def lwma_next_target(
    params: ChainParams, window: Sequence[BlockRecord], next_height: int
) -> Target256:
    """Target for block ``next_height`` given the preceding N+1 blocks (oldest first).

    Returns powLimit at the warm-up boundary and while ``next_height <= N``.
    Only the last N+1 records of ``window`` are used.
    """
    pow_limit = params.pow_limit_target
    if _is_reset_height(params, next_height):
        return pow_limit

    N = params.lwma_window
    if len(window) < N + 1:
        raise InsufficientHistoryError(
            f"LWMA needs {N + 1} blocks before height {next_height}, got {len(window)}"
        )
    records = list(window)[-(N + 1):]
    if records[-1].height != next_height - 1:
        raise InsufficientHistoryError(
            f"window ends at height {records[-1].height}, expected {next_height - 1}"
        )
    for prev, cur in zip(records, records[1:]):
        if cur.height != prev.height + 1:
            raise InsufficientHistoryError("window heights are not consecutive")

    T = target_spacing(params, next_height)
    k = lwma_k(N, T)

    sum_target = Target256(0)
    weighted = 0
    # i = N is the tip, walking back one block per step
    for i in range(N, 0, -1):
        block, prev = records[i], records[i - 1]
        solvetime = clamp_solvetime(block.timestamp - prev.timestamp, T)
        weighted += solvetime * i
        sum_target = sum_target + block.target // N

    return _combine(sum_target, weighted, k, pow_limit)


def _combine(sum_target: Target256, weighted: int, k: int, pow_limit: Target256) -> Target256:
    if weighted < k // 10:
        weighted = k // 10
    if k >= 1 << 32 or weighted >= 1 << 32:
        raise ValueError(f"k={k} or weighted sum={weighted} does not fit the 32-bit casts")
    try:
        if sum_target >> 192:
            next_target = (sum_target // k) * weighted
        else:
            next_target = (sum_target * weighted) // k
    except TargetOverflowError:
        # a result past 2**256 is above powLimit anyway
        return pow_limit
    return min(next_target, pow_limit)


class LwmaTracker:
    """Rolling LWMA-1 state; ``next_target`` matches ``lwma_next_target``.

    Keeps the last N+1 timestamps and the last N truncated targets, and
    updates the weighted solve-time sum in O(1) per appended block.
    """

    def __init__(self, params: ChainParams, records: Sequence[BlockRecord]):
        self.params = params
        N = params.lwma_window
        if len(records) < N + 1:
            raise InsufficientHistoryError(f"tracker needs {N + 1} seed blocks")
        records = list(records)[-(N + 1):]
        self.height = records[-1].height
        self._times = deque((r.timestamp for r in records), maxlen=N + 1)
        self._parts = deque((r.target.value // N for r in records[1:]), maxlen=N)
        self._sum_target = sum(self._parts)
        self._T = None
        self._rebuild(target_spacing(params, self.height + 1))

    def _rebuild(self, T: int) -> None:
        times = list(self._times)
        solves = [clamp_solvetime(b - a, T) for a, b in zip(times, times[1:])]
        self._solves = deque(solves, maxlen=len(solves))
        self._plain = sum(solves)
        self._weighted = sum(i * s for i, s in enumerate(solves, 1))
        self._T = T

    def push(self, timestamp: int, target: Target256 | int) -> None:
        """Append the block at ``height + 1``."""
        N = self.params.lwma_window
        value = int(target)
        part = value // N
        self._sum_target += part - self._parts[0]
        self._parts.append(part)

        prev_time = self._times[-1]
        self._times.append(timestamp)
        self.height += 1

        T = target_spacing(self.params, self.height + 1)
        if T != self._T:
            self._rebuild(T)
            return
        solve = clamp_solvetime(timestamp - prev_time, T)
        self._weighted += N * solve - self._plain
        self._plain += solve - self._solves[0]
        self._solves.append(solve)

    def next_target(self) -> Target256:
        params = self.params
        next_height = self.height + 1
        if _is_reset_height(params, next_height):
            return params.pow_limit_target
        k = lwma_k(params.lwma_window, self._T)
        return _combine(Target256(self._sum_target), self._weighted, k, params.pow_limit_target)
