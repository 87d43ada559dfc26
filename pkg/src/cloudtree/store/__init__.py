"""Key-value store contract and its self-hosted backends."""

from .base import KVStore
from .memory import SNAPSHOT_ENV, SNAPSHOT_HEADER, FileStore, MemoryStore, dump_snapshot, load_snapshot
from .metered import MeteredStore
from .types import (
    AttributeValue,
    BatchWriteRequest,
    Item,
    RemoveAttribute,
    SetAdd,
    SetAttribute,
    SetRemove,
    StoreConfig,
    StoreMetrics,
    UpdateAction,
    apply_actions,
)

__all__ = [
    "AttributeValue",
    "BatchWriteRequest",
    "FileStore",
    "Item",
    "KVStore",
    "MemoryStore",
    "MeteredStore",
    "RemoveAttribute",
    "SNAPSHOT_ENV",
    "SNAPSHOT_HEADER",
    "SetAdd",
    "SetAttribute",
    "SetRemove",
    "StoreConfig",
    "StoreMetrics",
    "UpdateAction",
    "apply_actions",
    "dump_snapshot",
    "load_snapshot",
]
