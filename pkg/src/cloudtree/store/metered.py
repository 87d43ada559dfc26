from __future__ import annotations

import time
from typing import Sequence

from .base import KVStore
from .types import BatchWriteRequest, Item, StoreMetrics, UpdateAction


class MeteredStore(KVStore):
    """Wraps a backend and counts each remote request.

    Every request adds ``rtt`` seconds to ``metrics.simulated_elapsed``. With
    ``sleep=True`` the delay is also actually slept, which turns an in-process
    backend into a crude latency emulator. A request is counted even when the
    backend rejects it.
    """

    def __init__(self, inner: KVStore, rtt: float = 0.0, *, sleep: bool = False,
                 metrics: StoreMetrics | None = None) -> None:
        self.inner = inner
        self.rtt = rtt
        self.sleep = sleep
        self.metrics = metrics or StoreMetrics()

    @property
    def batch_limit(self) -> int:  # type: ignore[override]
        return self.inner.batch_limit

    def _charge(self, kind: str, read: int = 0, written: int = 0) -> None:
        self.metrics.record(kind, self.rtt, read=read, written=written)
        if self.sleep and self.rtt:
            time.sleep(self.rtt)

    # table management is not part of the per-node request budget
    def create_table(self, name: str) -> str:
        return self.inner.create_table(name)

    def delete_table(self, name: str) -> None:
        self.inner.delete_table(name)

    def list_tables(self) -> list[str]:
        return self.inner.list_tables()

    def get_item(self, table: str, key: int) -> Item | None:
        item = None
        try:
            item = self.inner.get_item(table, key)
            return item
        finally:
            self._charge("get", read=int(item is not None))

    def put_item(self, table: str, item: Item) -> None:
        try:
            self.inner.put_item(table, item)
        finally:
            self._charge("put", written=1)

    def update_item(self, table: str, key: int, actions: Sequence[UpdateAction]) -> None:
        try:
            self.inner.update_item(table, key, actions)
        finally:
            self._charge("update", written=1)

    def delete_item(self, table: str, key: int) -> None:
        try:
            self.inner.delete_item(table, key)
        finally:
            self._charge("delete", written=1)

    def batch_get(self, table: str, keys: Sequence[int]) -> list[Item]:
        items: list[Item] = []
        try:
            items = self.inner.batch_get(table, keys)
            return items
        finally:
            self._charge("batch_get", read=len(items))

    def batch_write(self, table: str, request: BatchWriteRequest) -> None:
        try:
            self.inner.batch_write(table, request)
        finally:
            self._charge("batch_write", written=len(request))

    def sync(self) -> None:
        self.inner.sync()

    def close(self) -> None:
        self.inner.close()
