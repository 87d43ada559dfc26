from __future__ import annotations

import pytest

from cloudtree import CloudBSTree, CloudPrefixTree, open_tree
from cloudtree.bench import gen_balanced_order
from cloudtree.cache import CacheConfig
from cloudtree.errors import KindMismatch, NoSuchTree, SessionClosed, SessionPoisoned, StoreError
from cloudtree.node import META_KEY
from cloudtree.session import CHECKPOINT_EVERY
from cloudtree.store import FileStore, Item, MemoryStore


def meta(store, name):
    return store.get_item(name, META_KEY).attributes


def test_create_writes_metadata():
    store = MemoryStore()
    tree = CloudPrefixTree(store, "trie1")
    assert store.list_tables() == ["trie1"]
    assert meta(store, "trie1") == {"tree_kind": "PrefixTree", "next_node_id": CHECKPOINT_EVERY}
    tree.insert("an")
    assert tree.next_node_id == 3
    tree.close()
    assert meta(store, "trie1")["next_node_id"] == 3


def test_reopen_continues_counter():
    store = MemoryStore()
    with CloudBSTree(store, "b") as t:
        for k in (5, 2, 7):
            t.insert(k)
    with CloudBSTree(store, "b", create_new=False) as t:
        assert t.next_node_id == 3
        t.insert(9)
        assert t.query(9) and t.query(2)
        assert t.next_node_id == 4


def test_reopen_errors():
    store = MemoryStore()
    with pytest.raises(NoSuchTree):
        CloudPrefixTree(store, "nope", create_new=False)
    store.create_table("plain")
    with pytest.raises(NoSuchTree):
        CloudPrefixTree(store, "plain", create_new=False)
    CloudBSTree(store, "b").close()
    with pytest.raises(KindMismatch):
        CloudPrefixTree(store, "b", create_new=False)


def test_create_existing_fails():
    store = MemoryStore()
    CloudPrefixTree(store, "t").close()
    with pytest.raises(StoreError):
        CloudPrefixTree(store, "t")


def test_closed_session_rejects_ops():
    tree = CloudPrefixTree(MemoryStore(), "t")
    tree.close()
    tree.close()
    with pytest.raises(SessionClosed):
        tree.insert("x")


def test_crash_never_reuses_ids():
    store = MemoryStore()
    tree = CloudBSTree(store, "b")
    for k in gen_balanced_order(1500):
        tree.insert(k)
    # no close(): the persisted counter is a reservation, always ahead of use
    reserved = meta(store, "b")["next_node_id"]
    assert reserved >= 1500
    reopened = CloudBSTree(store, "b", create_new=False)
    reopened.insert(-1)
    used = {k for k in store.dump()["b"] if k != META_KEY}
    assert len(used) == 1501
    assert max(used) == reserved


def test_reservation_costs_one_put_per_block():
    store = MemoryStore()
    tree = CloudBSTree(store, "b", cache=CacheConfig.unoptimized())
    puts_before = tree.metrics.requests_by_kind["put"]
    for k in gen_balanced_order(2500):
        tree.insert(k)  # every insert puts exactly one new node
    extra = tree.metrics.requests_by_kind["put"] - puts_before - 2500
    assert extra == 2  # ids 1000 and 2000 start new blocks


def test_poisoned_session_skips_metadata():
    store = MemoryStore()
    tree = CloudPrefixTree(store, "t")
    tree.insert("abc")
    store.delete_table("t")
    with pytest.raises(StoreError):
        tree.insert("abd")
    with pytest.raises(SessionPoisoned):
        tree.query("abc")
    tree.close()  # does not try to write metadata
    assert store.list_tables() == []


def test_open_tree_factory(tmp_path):
    store = FileStore(tmp_path / "kv")
    t = open_tree("x", "bst", True, store=store)
    assert isinstance(t, CloudBSTree)
    t.insert(1)
    t.close()
    again = open_tree("x", "BSTree", False, store=FileStore(tmp_path / "kv"))
    assert again.query(1)
    with pytest.raises(ValueError):
        open_tree("y", "heap", True, store=store)


def test_metadata_not_a_node():
    store = MemoryStore()
    with CloudPrefixTree(store, "t") as t:
        t.insert("a")
    assert store.get_item("t", META_KEY) == Item(META_KEY, {"tree_kind": "PrefixTree", "next_node_id": 2})


def test_metrics_are_per_session():
    store = MemoryStore()
    a = CloudPrefixTree(store, "a", rtt=0.02)
    b = CloudPrefixTree(store, "b", rtt=0.02)
    a.insert("hello")
    assert b.metrics.total_requests == 1  # its own metadata put
    assert a.metrics.simulated_elapsed == pytest.approx(a.metrics.total_requests * 0.02)
