"""Tree lifecycle: create or re-open a named tree, allocate node ids, close."""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass
from typing import ClassVar, Iterator

from .cache import CacheConfig, CacheController
from .errors import (
    CorruptTree,
    IdSpaceExhausted,
    KindMismatch,
    NoSuchTable,
    NoSuchTree,
    SessionClosed,
)
from .node import META_KEY, TreeNode
from .store.base import KVStore
from .store.metered import MeteredStore
from .store.types import Item, StoreMetrics

PREFIX_TREE = "PrefixTree"
BS_TREE = "BSTree"
TREE_KINDS = (PREFIX_TREE, BS_TREE)

# ids are reserved in blocks: the persisted counter is always an upper bound
# on every id handed out, so a crashed writer may leak ids but never reuse them
CHECKPOINT_EVERY = 1000


@dataclass
class TreeMetadata:
    tree_name: str
    tree_kind: str
    next_node_id: int = 0

    def to_item(self, next_node_id: int | None = None) -> Item:
        value = self.next_node_id if next_node_id is None else next_node_id
        return Item(META_KEY, {"tree_kind": self.tree_kind, "next_node_id": value})

    @classmethod
    def from_item(cls, name: str, item: Item) -> TreeMetadata:
        kind = item.attributes.get("tree_kind")
        counter = item.attributes.get("next_node_id")
        if kind not in TREE_KINDS or isinstance(counter, bool) or not isinstance(counter, int):
            raise NoSuchTree(f"table {name!r} has no valid tree metadata")
        return cls(name, kind, counter)


class CloudTree:
    """One client session on one named tree.

    ``store`` is wrapped in a :class:`MeteredStore` so request counts are per
    session. ``rtt`` is the simulated cost charged per remote request.
    A session is single-threaded and at most one writer session may exist per
    tree at a time.
    """

    kind: ClassVar[str] = ""

    def __init__(self, store: KVStore, name: str, create_new: bool = True, *,
                 cache: CacheConfig | None = None, rtt: float = 0.0, sleep: bool = False,
                 metrics: StoreMetrics | None = None) -> None:
        if not self.kind:
            raise TypeError("open a concrete tree type")
        self.store = MeteredStore(store, rtt, sleep=sleep, metrics=metrics)
        self.name = name
        self.closed = False
        if create_new:
            self.store.create_table(name)
            self.meta = TreeMetadata(name, self.kind, 0)
            self._reserved = CHECKPOINT_EVERY
            self.store.put_item(name, self.meta.to_item(self._reserved))
        else:
            try:
                item = self.store.get_item(name, META_KEY)
            except NoSuchTable:
                raise NoSuchTree(f"no tree named {name!r}") from None
            if item is None:
                raise NoSuchTree(f"no tree named {name!r}")
            self.meta = TreeMetadata.from_item(name, item)
            if self.meta.tree_kind != self.kind:
                raise KindMismatch(f"tree {name!r} is a {self.meta.tree_kind}, not a {self.kind}")
            self._reserved = self.meta.next_node_id
        self.cache = CacheController(self.store, name, cache)

    # -- lifecycle -------------------------------------------------------------

    @property
    def metrics(self) -> StoreMetrics:
        return self.store.metrics

    @property
    def next_node_id(self) -> int:
        return self.meta.next_node_id

    def _require_open(self) -> None:
        if self.closed:
            raise SessionClosed(f"tree {self.name!r} is closed")

    def allocate_id(self) -> int:
        self._require_open()
        node_id = self.meta.next_node_id
        if node_id >= META_KEY:
            raise IdSpaceExhausted(f"tree {self.name!r} has used every node id")
        if node_id >= self._reserved:
            self._reserved = min(node_id + CHECKPOINT_EVERY, META_KEY - 1)
            self.store.put_item(self.name, self.meta.to_item(self._reserved))
        self.meta.next_node_id = node_id + 1
        return node_id

    def close(self) -> None:
        """Persist the metadata and release the session. Idempotent."""
        if self.closed:
            return
        if not self.cache.poisoned:
            self.store.put_item(self.name, self.meta.to_item())
            self.store.sync()
        self.closed = True
        self.cache.clear()

    def __enter__(self):
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- helpers for tree operations ------------------------------------------

    @contextmanager
    def _operation(self) -> Iterator[CacheController]:
        self._require_open()
        with self.cache.operation():
            yield self.cache

    def _node(self, node_id: int) -> TreeNode:
        node = self.cache.read_node(node_id)
        if node is None:
            raise CorruptTree(f"tree {self.name!r}: dangling reference to node {node_id}")
        return node

    def _root(self) -> TreeNode | None:
        if self.meta.next_node_id == 0:
            return None
        return self.cache.read_node(0)


def open_tree(name: str, kind: str, create_new: bool, *, store: KVStore,
              cache: CacheConfig | None = None, rtt: float = 0.0, **kwargs) -> CloudTree:
    """Open (or create) the tree ``name`` of ``kind`` on ``store``."""
    from .bstree import CloudBSTree
    from .prefixtree import CloudPrefixTree

    classes = {PREFIX_TREE: CloudPrefixTree, BS_TREE: CloudBSTree,
               "prefix": CloudPrefixTree, "bst": CloudBSTree}
    try:
        cls = classes[kind]
    except KeyError:
        raise ValueError(f"unknown tree kind {kind!r}") from None
    return cls(store, name, create_new, cache=cache, rtt=rtt, **kwargs)
