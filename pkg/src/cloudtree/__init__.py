"""Prefix trees and binary search trees stored node-per-item in a remote
key-value store, with a caching, prefetching and write-aggregating client."""

from .bstree import CloudBSTree
from .cache import CacheConfig, CacheController
from .node import META_KEY, ChildEntry, TreeNode
from .prefixtree import CloudPrefixTree
from .session import BS_TREE, PREFIX_TREE, CloudTree, TreeMetadata, open_tree
from .store import FileStore, KVStore, MemoryStore, MeteredStore, StoreConfig, StoreMetrics

__version__ = "0.1.0"

__all__ = [
    "BS_TREE",
    "CacheConfig",
    "CacheController",
    "ChildEntry",
    "CloudBSTree",
    "CloudPrefixTree",
    "CloudTree",
    "FileStore",
    "KVStore",
    "META_KEY",
    "MemoryStore",
    "MeteredStore",
    "PREFIX_TREE",
    "StoreConfig",
    "StoreMetrics",
    "TreeMetadata",
    "TreeNode",
    "open_tree",
]
