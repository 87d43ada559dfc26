from __future__ import annotations

import json
import os
import tempfile
import threading
from pathlib import Path
from typing import Iterator, Sequence

from ..errors import (
    AlreadyExists,
    BatchTooLarge,
    ConflictingKeys,
    CorruptSnapshot,
    InvalidItem,
    InvalidName,
    NoSuchTable,
    ParseError,
)
from .base import KVStore
from .types import (
    AttributeValue,
    BatchWriteRequest,
    Item,
    StoreConfig,
    UpdateAction,
    apply_actions,
    canonical_json,
    decode_attributes,
    encode_attributes,
    validate_key,
    validate_table_name,
)

SNAPSHOT_HEADER = "CLOUDTREE-KV v1"
SNAPSHOT_ENV = "CLOUDTREE_SNAPSHOT"

Tables = dict[str, dict[int, dict[str, AttributeValue]]]


class MemoryStore(KVStore):
    """In-process backend. Thread-safe; every operation is atomic."""

    def __init__(self, config: StoreConfig | None = None) -> None:
        self.config = config or StoreConfig()
        self.batch_limit = self.config.batch_limit
        self._tables: Tables = {}
        self._lock = threading.RLock()

    def _table(self, name: str) -> dict[int, dict[str, AttributeValue]]:
        try:
            return self._tables[name]
        except (KeyError, TypeError):
            raise NoSuchTable(f"no such table: {name!r}") from None

    def create_table(self, name: str) -> str:
        validate_table_name(name)
        with self._lock:
            if name in self._tables:
                raise AlreadyExists(f"table {name!r} already exists")
            self._tables[name] = {}
        return name

    def delete_table(self, name: str) -> None:
        with self._lock:
            self._table(name)
            del self._tables[name]

    def list_tables(self) -> list[str]:
        with self._lock:
            return sorted(self._tables)

    def get_item(self, table: str, key: int) -> Item | None:
        validate_key(key)
        with self._lock:
            attrs = self._table(table).get(key)
            return None if attrs is None else Item(key, dict(attrs))

    def put_item(self, table: str, item: Item) -> None:
        if not isinstance(item, Item):
            raise InvalidItem("put_item expects an Item")
        with self._lock:
            self._table(table)[item.key] = dict(item.attributes)

    def update_item(self, table: str, key: int, actions: Sequence[UpdateAction]) -> None:
        validate_key(key)
        if not actions:
            raise InvalidItem("update_item needs at least one action")
        with self._lock:
            rows = self._table(table)
            attrs = apply_actions(rows.get(key, {}), actions)
            rows[key] = attrs

    def delete_item(self, table: str, key: int) -> None:
        validate_key(key)
        with self._lock:
            self._table(table).pop(key, None)

    def batch_get(self, table: str, keys: Sequence[int]) -> list[Item]:
        if not keys:
            raise InvalidItem("batch_get needs at least one key")
        if len(keys) > self.batch_limit:
            raise BatchTooLarge(f"{len(keys)} keys exceeds batch limit {self.batch_limit}")
        unique = list(dict.fromkeys(validate_key(k) for k in keys))
        with self._lock:
            rows = self._table(table)
            return [Item(k, dict(rows[k])) for k in unique if k in rows]

    def batch_write(self, table: str, request: BatchWriteRequest) -> None:
        if len(request) > self.batch_limit:
            raise BatchTooLarge(f"{len(request)} writes exceeds batch limit {self.batch_limit}")
        put_keys = {item.key for item in request.puts}
        delete_keys = {validate_key(k) for k in request.deletes}
        if put_keys & delete_keys:
            raise ConflictingKeys(f"keys both put and deleted: {sorted(put_keys & delete_keys)}")
        with self._lock:
            rows = self._table(table)
            for item in request.puts:
                rows[item.key] = dict(item.attributes)
            for key in delete_keys:
                rows.pop(key, None)

    # -- introspection, outside the remote contract ------------------------

    def scan(self, table: str) -> Iterator[Item]:
        """Yield every item of ``table`` in key order (test/diagnostic helper)."""
        with self._lock:
            rows = self._table(table)
            items = [Item(k, dict(rows[k])) for k in sorted(rows)]
        yield from items

    def dump(self) -> dict[str, dict[int, dict[str, AttributeValue]]]:
        with self._lock:
            return {t: {k: dict(a) for k, a in rows.items()} for t, rows in self._tables.items()}

    # -- snapshots ----------------------------------------------------------

    def snapshot_text(self) -> str:
        with self._lock:
            return dump_snapshot(self._tables)

    def snapshot_save(self, path: str | os.PathLike | None = None) -> Path:
        path = Path(path or os.environ.get(SNAPSHOT_ENV) or "cloudtree.snapshot")
        text = self.snapshot_text()
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
        return path

    def snapshot_load(self, path: str | os.PathLike | None = None) -> None:
        path = Path(path or os.environ.get(SNAPSHOT_ENV) or "cloudtree.snapshot")
        tables = load_snapshot(path.read_text(encoding="utf-8"))
        with self._lock:
            self._tables = tables


class FileStore(MemoryStore):
    """MemoryStore persisted to a snapshot file.

    The file is loaded on construction when it exists and rewritten by
    ``sync()``/``close()``.
    """

    def __init__(self, path: str | os.PathLike | None = None, config: StoreConfig | None = None) -> None:
        super().__init__(config)
        path = path or os.environ.get(SNAPSHOT_ENV)
        if not path:
            raise ValueError(f"no snapshot path given and ${SNAPSHOT_ENV} is unset")
        self.path = Path(path)
        if self.path.exists():
            self.snapshot_load(self.path)

    def sync(self) -> None:
        self.snapshot_save(self.path)


def dump_snapshot(tables: Tables) -> str:
    lines = [SNAPSHOT_HEADER]
    for name in sorted(tables):
        lines.append(f"TABLE {name}")
        rows = tables[name]
        for key in sorted(rows):
            lines.append(f"ITEM {name} {key} {canonical_json(encode_attributes(rows[key]))}")
    lines.append(f"END {len(lines) - 1}")
    return "\n".join(lines) + "\n"


def load_snapshot(text: str) -> Tables:
    if not text.endswith("\n"):
        raise CorruptSnapshot("snapshot does not end with a newline")
    lines = text[:-1].split("\n")
    if lines[0] != SNAPSHOT_HEADER:
        raise CorruptSnapshot("missing snapshot header")
    if len(lines) < 2 or not lines[-1].startswith("END "):
        raise CorruptSnapshot("missing END trailer (truncated snapshot?)")
    records = lines[1:-1]
    if lines[-1] != f"END {len(records)}":
        raise CorruptSnapshot("record count mismatch")
    tables: Tables = {}
    for lineno, line in enumerate(records, start=2):
        kind, _, rest = line.partition(" ")
        try:
            if kind == "TABLE":
                validate_table_name(rest)
                if rest in tables:
                    raise CorruptSnapshot(f"line {lineno}: duplicate table {rest!r}")
                tables[rest] = {}
            elif kind == "ITEM":
                table, key_text, payload = rest.split(" ", 2)
                if table not in tables:
                    raise CorruptSnapshot(f"line {lineno}: item before its table")
                key = validate_key(int(key_text))
                tables[table][key] = decode_attributes(json.loads(payload))
            else:
                raise CorruptSnapshot(f"line {lineno}: unknown record {kind!r}")
        except CorruptSnapshot:
            raise
        except (ValueError, ParseError, InvalidItem, InvalidName) as exc:
            raise CorruptSnapshot(f"line {lineno}: {exc}") from None
    return tables
