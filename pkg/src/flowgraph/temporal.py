"""Temporal dissection of a flow list into fixed-width snapshots.

Windows are half-open [k*width, (k+1)*width); a flow belongs to the
window of its start time even if its duration crosses the boundary.
Empty windows are never materialized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NonPositiveWidth
from .flow_model import FlowRecord


@dataclass(frozen=True)
class SnapshotIndex:
    """One temporal window: index k covers [k*width, (k+1)*width)."""

    index: int
    window_start: float
    window_end: float

    @classmethod
    def for_width(cls, index: int, width: float) -> "SnapshotIndex":
        start = index * width
        return cls(index=index, window_start=start, window_end=start + width)


def dissect(flows: list[FlowRecord], width: float) -> dict[SnapshotIndex, list[FlowRecord]]:
    """Assign each flow to its snapshot by floor(start_time / width).

    Returns a mapping ordered by snapshot index; within a snapshot the
    input order is preserved. Snapshots with no flows are omitted.
    """
    if not width > 0:
        raise NonPositiveWidth(f"snapshot width must be > 0, got {width}")

    buckets: dict[int, list[FlowRecord]] = {}
    for flow in flows:
        k = int(math.floor(flow.start_time / width))
        buckets.setdefault(k, []).append(flow)

    return {
        SnapshotIndex.for_width(k, width): buckets[k]
        for k in sorted(buckets)
    }
