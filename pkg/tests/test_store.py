from __future__ import annotations

import itertools

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from cloudtree.errors import (
    AlreadyExists,
    BatchTooLarge,
    ConflictingKeys,
    CorruptSnapshot,
    InvalidName,
    NoSuchTable,
    TypeMismatch,
)
from cloudtree.store import (
    BatchWriteRequest,
    FileStore,
    Item,
    MemoryStore,
    MeteredStore,
    RemoveAttribute,
    SetAdd,
    SetAttribute,
    SetRemove,
    StoreConfig,
    dump_snapshot,
    load_snapshot,
)

_names = itertools.count()


def fresh(store):
    return store.create_table(f"t{next(_names)}")


# -- tables ----------------------------------------------------------------------


def test_create_and_list(backend):
    s = backend.store
    assert s.create_table("trie1") == "trie1"
    assert s.list_tables() == ["trie1"]
    with pytest.raises(AlreadyExists):
        s.create_table("trie1")


@pytest.mark.parametrize("name", ["", "has space", "x" * 256, "slash/no"])
def test_invalid_table_names(backend, name):
    with pytest.raises(InvalidName):
        backend.store.create_table(name)


def test_delete_table(backend):
    s = backend.store
    s.create_table("a")
    s.create_table("b")
    assert set(s.list_tables()) == {"a", "b"}
    s.delete_table("a")
    assert s.list_tables() == ["b"]
    with pytest.raises(NoSuchTable):
        s.delete_table("zz")


def test_missing_table_errors(backend):
    s = backend.store
    with pytest.raises(NoSuchTable):
        s.get_item("nope", 0)
    with pytest.raises(NoSuchTable):
        s.put_item("nope", Item(0))
    with pytest.raises(NoSuchTable):
        s.batch_get("nope", [0])


# -- single items ------------------------------------------------------------------


def test_read_your_write(backend):
    s = backend.store
    t = fresh(s)
    s.put_item(t, Item(0, {"data_item": 5}))
    assert s.get_item(t, 0) == Item(0, {"data_item": 5})
    assert s.get_item(t, 99) is None


def test_put_round_trips_string_set(backend):
    # node 3 of the generic example tree with children 4, 5, 6
    s = backend.store
    t = fresh(s)
    item = Item(3, {"children_set": {"4:d", "5:e", "6:f"}})
    s.put_item(t, item)
    assert s.get_item(t, 3) == item
    assert s.get_item(t, 3).attributes["children_set"] == frozenset({"4:d", "5:e", "6:f"})


def test_put_replaces_entirely(backend):
    s = backend.store
    t = fresh(s)
    s.put_item(t, Item(1, {"a": 1, "b": "x"}))
    s.put_item(t, Item(1, {"c": True}))
    assert s.get_item(t, 1).attributes == {"c": True}


def test_delete_item(backend):
    s = backend.store
    t = fresh(s)
    s.put_item(t, Item(1, {"a": 1}))
    s.delete_item(t, 1)
    assert s.get_item(t, 1) is None
    s.delete_item(t, 1)  # absent key: no-op
    assert s.get_item(t, 1) is None


def test_update_set_add_remove(backend):
    s = backend.store
    t = fresh(s)
    s.put_item(t, Item(1, {"children_set": {"2:n"}}))
    s.update_item(t, 1, [SetAdd("children_set", "3:t")])
    assert s.get_item(t, 1).attributes["children_set"] == {"2:n", "3:t"}
    s.update_item(t, 1, [SetRemove("children_set", "2:n"), SetRemove("children_set", "3:t")])
    assert "children_set" not in s.get_item(t, 1).attributes


def test_update_is_upsert(backend):
    s = backend.store
    t = fresh(s)
    s.update_item(t, 7, [SetAttribute("word", True), SetAdd("children_set", "8:x")])
    assert s.get_item(t, 7) == Item(7, {"word": True, "children_set": {"8:x"}})
    s.update_item(t, 7, [RemoveAttribute("word")])
    assert s.get_item(t, 7) == Item(7, {"children_set": {"8:x"}})


def test_update_type_mismatch(backend):
    s = backend.store
    t = fresh(s)
    s.put_item(t, Item(1, {"data_item": 4}))
    with pytest.raises(TypeMismatch):
        s.update_item(t, 1, [SetAdd("data_item", "x")])
    assert s.get_item(t, 1).attributes == {"data_item": 4}


def test_values_round_trip(backend):
    s = backend.store
    t = fresh(s)
    item = Item(2**64 - 1, {"i": -(2**63), "j": 2**63 - 1, "s": "héllo:wörld", "b": False, "ss": {"a", "b:c"}})
    s.put_item(t, item)
    assert s.get_item(t, 2**64 - 1) == item


# -- batches -------------------------------------------------------------------------


def test_batch_get_matches_sequential_gets(backend):
    s = backend.store
    t = fresh(s)
    for k in range(10):
        s.put_item(t, Item(k, {"data_item": k * k}))
    got = s.batch_get(t, list(range(0, 25)))
    assert sorted(got, key=lambda i: i.key) == [s.get_item(t, k) for k in range(10)]


def test_batch_limits_and_dedup(backend):
    s = backend.store
    t = fresh(s)
    s.put_item(t, Item(5, {"x": 1}))
    with pytest.raises(BatchTooLarge):
        s.batch_get(t, list(range(26)))
    assert s.batch_get(t, [5, 5]) == [Item(5, {"x": 1})]
    with pytest.raises(BatchTooLarge):
        s.batch_write(t, BatchWriteRequest(puts=[Item(k) for k in range(20)], deletes=list(range(100, 106))))


def test_batch_write_puts_and_deletes(backend):
    s = backend.store
    t = fresh(s)
    s.batch_write(t, BatchWriteRequest(puts=[Item(k, {"v": k}) for k in range(1, 6)]))
    assert [s.get_item(t, k).attributes["v"] for k in range(1, 6)] == [1, 2, 3, 4, 5]
    s.batch_write(t, BatchWriteRequest(deletes=[2, 3, 4]))
    assert [s.get_item(t, k) is not None for k in range(1, 6)] == [True, False, False, False, True]
    with pytest.raises(ConflictingKeys):
        s.batch_write(t, BatchWriteRequest(puts=[Item(1, {"v": 9})], deletes=[1]))
    assert s.get_item(t, 1).attributes["v"] == 1


# -- metrics (contract level) ----------------------------------------------------------


def test_each_call_is_one_request(backend):
    m = MeteredStore(backend.store, rtt=0.02)
    t = fresh(m)
    m.put_item(t, Item(0, {"data_item": 5}))
    before = m.metrics.requests_by_kind["get"]
    m.get_item(t, 0)
    assert m.metrics.requests_by_kind["get"] == before + 1
    m.delete_item(t, 0)
    assert m.metrics.requests_by_kind["delete"] == 1
    m.batch_write(t, BatchWriteRequest(puts=[Item(k) for k in range(3)]))
    assert m.metrics.requests_by_kind["batch_write"] == 1
    assert m.metrics.items_written == 1 + 1 + 3
    got = m.batch_get(t, list(range(25)))
    assert len(got) == 3 and m.metrics.requests_by_kind["batch_get"] == 1
    m.update_item(t, 1, [SetAdd("s", "x"), SetAdd("s", "y")])
    assert m.metrics.requests_by_kind["update"] == 1
    assert m.metrics.items_read == 1 + 3
    assert m.metrics.total_requests == 6
    assert m.metrics.simulated_elapsed == pytest.approx(6 * 0.02)


def test_request_counts_are_deterministic():
    def run():
        m = MeteredStore(MemoryStore(), rtt=0.001)
        t = m.create_table("t")
        for k in range(40):
            m.put_item(t, Item(k, {"v": k}))
            m.batch_get(t, [k, k + 1])
            if k % 3 == 0:
                m.update_item(t, k, [SetAdd("s", str(k))])
        return m.metrics.snapshot()

    assert run() == run()


# -- snapshots -----------------------------------------------------------------------


def test_snapshot_format_is_canonical(tmp_path):
    s = MemoryStore()
    s.create_table("b")
    s.create_table("a")
    s.put_item("a", Item(10, {"word": True, "children_set": {"3:t", "11:x"}, "data_item": -4, "name": "q"}))
    s.put_item("a", Item(2, {}))
    text = s.snapshot_text()
    assert text == (
        "CLOUDTREE-KV v1\n"
        "TABLE a\n"
        'ITEM a 2 {}\n'
        'ITEM a 10 {"children_set":{"SS":["11:x","3:t"]},"data_item":{"N":"-4"},'
        '"name":{"S":"q"},"word":{"BOOL":true}}\n'
        "TABLE b\n"
        "END 4\n"
    )


def test_snapshot_round_trip(tmp_path):
    s = MemoryStore()
    s.create_table("t")
    for k in range(50):
        s.put_item("t", Item(k, {"children_set": {f"{k + 1}:{chr(97 + k % 26)}"}, "word": k % 2 == 0}))
    path = s.snapshot_save(tmp_path / "snap")
    loaded = FileStore(path)
    assert loaded.dump() == s.dump()
    assert loaded.snapshot_text() == path.read_text()


def test_empty_snapshot(tmp_path):
    path = MemoryStore().snapshot_save(tmp_path / "empty")
    s = MemoryStore()
    s.snapshot_load(path)
    assert s.list_tables() == []


@pytest.mark.parametrize("cut", [1, 10, 30, -1, -4])
def test_truncated_snapshot(tmp_path, cut):
    s = MemoryStore()
    s.create_table("t")
    s.put_item("t", Item(1, {"a": 1}))
    s.put_item("t", Item(2, {"a": 2}))
    text = s.snapshot_text()
    with pytest.raises(CorruptSnapshot):
        load_snapshot(text[:cut])


def test_snapshot_drops_a_whole_line():
    s = MemoryStore()
    s.create_table("t")
    for k in range(3):
        s.put_item("t", Item(k, {"a": k}))
    lines = s.snapshot_text().splitlines(keepends=True)
    with pytest.raises(CorruptSnapshot):
        load_snapshot("".join(lines[:-2] + lines[-1:]))


def test_snapshot_env_default(tmp_path, monkeypatch):
    monkeypatch.setenv("CLOUDTREE_SNAPSHOT", str(tmp_path / "env.snap"))
    store = FileStore()
    store.create_table("x")
    store.sync()
    assert (tmp_path / "env.snap").read_text().startswith("CLOUDTREE-KV v1\nTABLE x\n")
    assert FileStore().list_tables() == ["x"]


def test_file_store_persists_on_close(tmp_path):
    path = tmp_path / "kv"
    with FileStore(path) as s:
        s.create_table("t")
        s.put_item("t", Item(4, {"data_item": 4}))
    assert FileStore(path).get_item("t", 4) == Item(4, {"data_item": 4})


# -- properties ----------------------------------------------------------------------

attr_values = st.one_of(
    st.integers(-(2**63), 2**63 - 1),
    st.text(max_size=5),
    st.booleans(),
    st.frozensets(st.text(min_size=1, max_size=4), min_size=1, max_size=4),
)
items = st.builds(Item, st.integers(0, 60), st.dictionaries(st.sampled_from("abc"), attr_values, max_size=2))


@st.composite
def disjoint_batches(draw):
    puts = draw(st.lists(items, max_size=12, unique_by=lambda i: i.key))
    put_keys = {i.key for i in puts}
    deletes = draw(st.lists(st.integers(0, 60).filter(lambda k: k not in put_keys), max_size=25 - len(puts), unique=True))
    return BatchWriteRequest(puts=puts, deletes=deletes)


@settings(suppress_health_check=[HealthCheck.too_slow])
@given(st.lists(items, max_size=10), disjoint_batches())
def test_batch_write_equals_individual_writes(seed_items, batch):
    a, b = MemoryStore(), MemoryStore()
    for s in (a, b):
        s.create_table("t")
        for item in seed_items:
            s.put_item("t", item)
    a.batch_write("t", batch)
    for item in batch.puts:
        b.put_item("t", item)
    for key in batch.deletes:
        b.delete_item("t", key)
    assert a.dump() == b.dump()


set_ops = st.lists(st.tuples(st.booleans(), st.sampled_from(["1:a", "2:b", "3:c", "10:h"])), max_size=40)


@given(set_ops)
def test_set_semantics_match_model(ops):
    s = MemoryStore()
    s.create_table("t")
    model: set[str] = set()
    for add, elem in ops:
        s.update_item("t", 0, [SetAdd("children_set", elem) if add else SetRemove("children_set", elem)])
        (model.add if add else model.discard)(elem)
        attrs = s.get_item("t", 0).attributes
        if model:
            assert attrs["children_set"] == model
        else:
            assert "children_set" not in attrs


@given(st.lists(st.tuples(st.sampled_from("pgdub"), st.integers(0, 9)), max_size=30))
def test_reads_reflect_latest_write(ops):
    s = MemoryStore()
    s.create_table("t")
    model: dict[int, dict] = {}
    for op, k in ops:
        if op == "p":
            s.put_item("t", Item(k, {"v": k}))
            model[k] = {"v": k}
        elif op == "u":
            s.update_item("t", k, [SetAdd("s", "x")])
            model[k] = {**model.get(k, {}), "s": frozenset({"x"})}
        elif op == "d":
            s.delete_item("t", k)
            model.pop(k, None)
        elif op == "b":
            s.batch_write("t", BatchWriteRequest(puts=[Item(k, {"w": 1})]))
            model[k] = {"w": 1}
        got = s.get_item("t", k)
        assert (got.attributes if got else None) == model.get(k)


@settings(max_examples=30, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(disjoint_batches())
def test_snapshot_round_trip_property(tmp_path, batch):
    s = MemoryStore()
    s.create_table("t")
    s.batch_write("t", batch)
    assert load_snapshot(dump_snapshot(s.dump())) == s.dump()


def test_store_config_validation():
    with pytest.raises(ValueError):
        StoreConfig(batch_limit=0)
    with pytest.raises(ValueError):
        StoreConfig(rtt=-1)
