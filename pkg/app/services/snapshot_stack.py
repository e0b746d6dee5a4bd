# app/services/snapshot_stack.py

from collections import deque
from typing import Callable, Container, List, Optional

from app.models.episode import SnapshotEntry
from app.utils.logger import logger


class SnapshotStack:
    """Sliding window of env checkpoints, newest on top.

    Entries are kept in increasing step order; pushing past capacity evicts
    the oldest entry and hands its token to `on_evict`.
    """

    def __init__(
        self,
        capacity: int,
        on_evict: Optional[Callable[[str], None]] = None,
    ):
        if capacity < 1:
            raise ValueError("snapshot capacity must be >= 1")
        self.capacity = capacity
        self.on_evict = on_evict
        self._entries: deque = deque()

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def entries(self) -> List[SnapshotEntry]:
        return list(self._entries)

    @property
    def top(self) -> Optional[SnapshotEntry]:
        return self._entries[-1] if self._entries else None

    def push(self, entry: SnapshotEntry) -> None:
        if self._entries and entry.step_index < self._entries[-1].step_index:
            raise ValueError("snapshots must be pushed in step order")
        self._entries.append(entry)
        while len(self._entries) > self.capacity:
            self._drop(self._entries.popleft(), "evicted")

    def find(self, state: str) -> Optional[SnapshotEntry]:
        """Most recent checkpoint taken at `state`."""
        for entry in reversed(self._entries):
            if entry.state == state:
                return entry
        return None

    def unwind(self, keep: Container[str]) -> int:
        """Pop entries from the top until the top state is in `keep`."""
        popped = 0
        while self._entries and self._entries[-1].state not in keep:
            self._drop(self._entries.pop(), "unwound")
            popped += 1
        return popped

    def _drop(self, entry: SnapshotEntry, why: str) -> None:
        logger.debug(f"Snapshot {entry.env_checkpoint} {why}")
        if self.on_evict is not None:
            self.on_evict(entry.env_checkpoint)
