"""Client-side cache controller: LRU node cache, id-window prefetch,
write-through updates and per-operation write aggregation."""

from __future__ import annotations

from collections import OrderedDict
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import CloudTreeError, ConflictingKeys, SessionPoisoned
from .node import META_KEY, TreeNode, item_to_node, node_to_item
from .store.base import KVStore
from .store.types import BatchWriteRequest, UpdateAction, apply_actions


@dataclass(frozen=True)
class CacheConfig:
    capacity_lines: int = 10000
    prefetch_size: int = 25
    caching_enabled: bool = True
    prefetch_enabled: bool = True
    aggregation_enabled: bool = True

    def __post_init__(self) -> None:
        if self.caching_enabled and self.capacity_lines < 1:
            raise ValueError("capacity_lines must be >= 1 when caching is enabled")
        if self.prefetch_size < 0:
            raise ValueError("prefetch_size must be >= 0")

    @classmethod
    def unoptimized(cls) -> CacheConfig:
        return cls(caching_enabled=False, prefetch_enabled=False, aggregation_enabled=False)

    @property
    def flags(self) -> str:
        on = [name for name, flag in (("cache", self.caching_enabled),
                                      ("prefetch", self.prefetch_enabled and self.caching_enabled),
                                      ("aggregation", self.aggregation_enabled)) if flag]
        return "+".join(on) or "none"


class CacheController:
    """Sits between one tree session and the store.

    Reads go through an LRU buffer of whole nodes. A miss fetches the window
    ``x .. x+prefetch`` in one batch_get when prefetching is on. Updates are
    written through immediately and never batched. Node creation and removal
    done inside :meth:`operation` are queued and flushed as batch writes when
    the operation ends.
    """

    def __init__(self, store: KVStore, table: str, config: CacheConfig | None = None) -> None:
        self.store = store
        self.table = table
        self.config = config or CacheConfig()
        self.batch_limit = store.batch_limit
        # the miss key plus the window must fit in one batch_get
        self.prefetch_size = min(self.config.prefetch_size, self.batch_limit - 1)
        self._lines: OrderedDict[int, TreeNode] = OrderedDict()
        self._pending_puts: dict[int, TreeNode] | None = None
        self._pending_deletes: dict[int, None] | None = None
        self.poisoned = False
        self.evictions = 0

    # -- cache lines ---------------------------------------------------------

    @property
    def caching(self) -> bool:
        return self.config.caching_enabled

    @property
    def prefetching(self) -> bool:
        return self.config.caching_enabled and self.config.prefetch_enabled and self.prefetch_size > 0

    def __len__(self) -> int:
        return len(self._lines)

    def __contains__(self, node_id: int) -> bool:
        return node_id in self._lines

    def cached_ids(self) -> list[int]:
        """Cached ids, least recently used first."""
        return list(self._lines)

    def cached_nodes(self) -> dict[int, TreeNode]:
        return dict(self._lines)

    def _install(self, node: TreeNode) -> None:
        if not self.caching:
            return
        self._lines[node.node_id] = node
        self._lines.move_to_end(node.node_id)
        self.evict_if_needed()

    def evict_if_needed(self) -> None:
        # lines are never dirty, eviction is just a drop
        while len(self._lines) > self.config.capacity_lines:
            self._lines.popitem(last=False)
            self.evictions += 1

    def invalidate(self, node_id: int) -> None:
        self._lines.pop(node_id, None)

    def clear(self) -> None:
        self._lines.clear()

    # -- reads ---------------------------------------------------------------

    def _check(self) -> None:
        if self.poisoned:
            raise SessionPoisoned("a remote write failed earlier; reopen the tree")

    def read_node(self, node_id: int) -> TreeNode | None:
        self._check()
        if self._pending_deletes is not None and node_id in self._pending_deletes:
            return None
        if self._pending_puts is not None and node_id in self._pending_puts:
            return self._pending_puts[node_id]
        if self.caching:
            node = self._lines.get(node_id)
            if node is not None:
                self._lines.move_to_end(node_id)
                return node
        if not self.prefetching:
            item = self.store.get_item(self.table, node_id)
            if item is None:
                return None
            node = item_to_node(item)
            self._install(node)
            return node

        keys = list(range(node_id, min(node_id + self.prefetch_size + 1, META_KEY)))
        found = None
        for item in self.store.batch_get(self.table, keys):
            node = item_to_node(item)
            if node.node_id == node_id:
                found = node
            elif node.node_id not in self._lines and not self._is_pending(node.node_id):
                self._install(node)
        if found is not None:
            self._install(found)
        return found

    def _is_pending(self, node_id: int) -> bool:
        return (self._pending_puts is not None and node_id in self._pending_puts) or (
            self._pending_deletes is not None and node_id in self._pending_deletes)

    # -- write-through -------------------------------------------------------

    @contextmanager
    def _writing(self) -> Iterator[None]:
        self._check()
        try:
            yield
        except CloudTreeError:
            self.poisoned = True
            raise

    def write_node(self, node: TreeNode) -> None:
        """Cache ``node`` and put it to the store right away."""
        with self._writing():
            self._install(node)
            self.store.put_item(self.table, node_to_item(node))

    def update_node(self, node_id: int, actions: Sequence[UpdateAction]) -> None:
        """Apply ``actions`` to the cached copy (if any), then one update_item.

        A node created earlier in the same operation and not yet flushed is
        patched in the write buffer instead; its pending put carries the change.
        """
        with self._writing():
            if self._pending_puts is not None and node_id in self._pending_puts:
                node = _apply(self._pending_puts[node_id], actions)
                self._pending_puts[node_id] = node
                self._install(node)
                return
            cached = self._lines.get(node_id)
            if cached is not None:
                self._lines[node_id] = _apply(cached, actions)
            self.store.update_item(self.table, node_id, list(actions))

    # -- aggregation buffer --------------------------------------------------

    @property
    def in_operation(self) -> bool:
        return self._pending_puts is not None

    @contextmanager
    def operation(self) -> Iterator[None]:
        """Scope of one tree operation; queued writes are flushed on exit."""
        self._check()
        if self.in_operation:
            raise RuntimeError("tree operations do not nest")
        self._pending_puts, self._pending_deletes = {}, {}
        try:
            yield
            self.flush()
        except BaseException:
            if self._pending_puts or self._pending_deletes:
                # cache already reflects writes the store never saw
                self.poisoned = True
            raise
        finally:
            self._pending_puts = self._pending_deletes = None

    def buffer_put(self, node: TreeNode) -> None:
        with self._writing():
            if self._pending_puts is None:
                raise RuntimeError("buffer_put outside of an operation")
            if node.node_id in self._pending_deletes:
                raise ConflictingKeys(f"node {node.node_id} both put and deleted in one operation")
            self._install(node)
            if self.config.aggregation_enabled:
                self._pending_puts[node.node_id] = node
            else:
                self.store.put_item(self.table, node_to_item(node))

    def buffer_delete(self, node_id: int) -> None:
        with self._writing():
            if self._pending_deletes is None:
                raise RuntimeError("buffer_delete outside of an operation")
            if node_id in self._pending_puts:
                raise ConflictingKeys(f"node {node_id} both put and deleted in one operation")
            self.invalidate(node_id)
            if self.config.aggregation_enabled:
                self._pending_deletes[node_id] = None
            else:
                self.store.delete_item(self.table, node_id)

    def flush(self) -> int:
        """Send queued puts/deletes as batch writes; returns the request count."""
        puts = list(self._pending_puts.values()) if self._pending_puts else []
        deletes = list(self._pending_deletes) if self._pending_deletes else []
        if not puts and not deletes:
            return 0
        writes: list = [node_to_item(n) for n in puts] + deletes
        sent = 0
        with self._writing():
            for start in range(0, len(writes), self.batch_limit):
                chunk = writes[start:start + self.batch_limit]
                request = BatchWriteRequest(
                    puts=[w for w in chunk if not isinstance(w, int)],
                    deletes=[w for w in chunk if isinstance(w, int)],
                )
                self.store.batch_write(self.table, request)
                sent += 1
        self._pending_puts.clear()
        self._pending_deletes.clear()
        return sent


def _apply(node: TreeNode, actions: Sequence[UpdateAction]) -> TreeNode:
    item = node_to_item(node)
    item.attributes = apply_actions(item.attributes, actions)
    return item_to_node(item)
