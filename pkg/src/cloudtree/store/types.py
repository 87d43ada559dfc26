"""Value types of the key-value store contract.

Items are schemaless: a node key plus a map of attribute name to value, where a
value is an ``int``, a ``str``, a ``bool`` or a string set (``frozenset[str]``).
An empty string set is never stored; the attribute is simply absent.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Union

from ..errors import InvalidItem, InvalidName, ParseError, TypeMismatch

AttributeValue = Union[int, str, bool, frozenset]

KEY_LIMIT = 2**64
INT_MIN = -(2**63)
INT_MAX = 2**63 - 1
TABLE_NAME_RE = re.compile(r"[A-Za-z0-9_.-]{1,255}")


def validate_table_name(name: Any) -> str:
    if not isinstance(name, str) or not TABLE_NAME_RE.fullmatch(name):
        raise InvalidName(f"invalid table name: {name!r}")
    return name


def validate_key(key: Any) -> int:
    if isinstance(key, bool) or not isinstance(key, int) or not 0 <= key < KEY_LIMIT:
        raise InvalidItem(f"node key must be an unsigned 64-bit integer, got {key!r}")
    return key


def normalize_value(name: str, value: Any) -> AttributeValue | None:
    """Validate one attribute value; returns None for an empty string set."""
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        if not INT_MIN <= value <= INT_MAX:
            raise InvalidItem(f"attribute {name!r}: integer out of 64-bit range")
        return value
    if isinstance(value, str):
        return value
    if isinstance(value, (set, frozenset)):
        for elem in value:
            if not isinstance(elem, str) or not elem:
                raise InvalidItem(f"attribute {name!r}: set elements must be non-empty strings")
        return frozenset(value) or None
    raise InvalidItem(f"attribute {name!r}: unsupported value type {type(value).__name__}")


def normalize_attributes(attributes: Mapping[str, Any]) -> dict[str, AttributeValue]:
    out: dict[str, AttributeValue] = {}
    for name, value in attributes.items():
        if not isinstance(name, str) or not name:
            raise InvalidItem(f"attribute names must be non-empty strings, got {name!r}")
        norm = normalize_value(name, value)
        if norm is not None:
            out[name] = norm
    return out


@dataclass(eq=True)
class Item:
    key: int
    attributes: dict[str, AttributeValue] = field(default_factory=dict)

    def __post_init__(self) -> None:
        validate_key(self.key)
        self.attributes = normalize_attributes(self.attributes)

    def copy(self) -> Item:
        # values are immutable, a shallow copy of the map is enough
        return Item(self.key, dict(self.attributes))


# ---------------------------------------------------------------------------
# update actions


@dataclass(frozen=True)
class SetAttribute:
    name: str
    value: AttributeValue


@dataclass(frozen=True)
class RemoveAttribute:
    name: str


@dataclass(frozen=True)
class SetAdd:
    name: str
    element: str


@dataclass(frozen=True)
class SetRemove:
    name: str
    element: str


UpdateAction = Union[SetAttribute, RemoveAttribute, SetAdd, SetRemove]


def apply_actions(attributes: Mapping[str, AttributeValue], actions: Iterable[UpdateAction]) -> dict[str, AttributeValue]:
    """Return a new attribute map with ``actions`` applied in order.

    Raises TypeMismatch when a set action targets a non-set attribute. Nothing
    is applied if any action fails.
    """
    attrs = dict(attributes)
    for action in actions:
        if isinstance(action, SetAttribute):
            value = normalize_value(action.name, action.value)
            if value is None:
                attrs.pop(action.name, None)
            else:
                attrs[action.name] = value
        elif isinstance(action, RemoveAttribute):
            attrs.pop(action.name, None)
        elif isinstance(action, (SetAdd, SetRemove)):
            if not isinstance(action.element, str) or not action.element:
                raise InvalidItem("set elements must be non-empty strings")
            current = attrs.get(action.name)
            if current is not None and not isinstance(current, frozenset):
                raise TypeMismatch(f"attribute {action.name!r} is not a string set")
            current = current or frozenset()
            if isinstance(action, SetAdd):
                attrs[action.name] = current | {action.element}
            else:
                remaining = current - {action.element}
                if remaining:
                    attrs[action.name] = remaining
                else:
                    attrs.pop(action.name, None)
        else:
            raise InvalidItem(f"unknown update action {action!r}")
    return attrs


@dataclass
class BatchWriteRequest:
    puts: list[Item] = field(default_factory=list)
    deletes: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.puts) + len(self.deletes)


# ---------------------------------------------------------------------------
# config and metrics


@dataclass(frozen=True)
class StoreConfig:
    rtt: float = 0.020  # seconds per remote request, simulated
    batch_limit: int = 25
    strong_consistency: bool = True  # reads are always strongly consistent

    def __post_init__(self) -> None:
        if self.batch_limit < 1:
            raise ValueError("batch_limit must be >= 1")
        if self.rtt < 0:
            raise ValueError("rtt must be >= 0")


REQUEST_KINDS = ("get", "put", "update", "delete", "batch_get", "batch_write")


class StoreMetrics:
    """Per-session request counters; every remote request adds one rtt."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.requests_by_kind = dict.fromkeys(REQUEST_KINDS, 0)
        self.items_read = 0
        self.items_written = 0
        self.simulated_elapsed = 0.0

    def record(self, kind: str, rtt: float, read: int = 0, written: int = 0) -> None:
        with self._lock:
            self.requests_by_kind[kind] += 1
            self.items_read += read
            self.items_written += written
            self.simulated_elapsed += rtt

    @property
    def total_requests(self) -> int:
        return sum(self.requests_by_kind.values())

    def snapshot(self) -> dict[str, Any]:
        with self._lock:
            return {
                **self.requests_by_kind,
                "items_read": self.items_read,
                "items_written": self.items_written,
                "simulated_elapsed": self.simulated_elapsed,
            }

    def reset(self) -> None:
        with self._lock:
            self.requests_by_kind = dict.fromkeys(REQUEST_KINDS, 0)
            self.items_read = 0
            self.items_written = 0
            self.simulated_elapsed = 0.0


# ---------------------------------------------------------------------------
# canonical encoding shared by snapshots and the wire protocol


def encode_value(value: AttributeValue) -> dict[str, Any]:
    if isinstance(value, bool):
        return {"BOOL": value}
    if isinstance(value, int):
        return {"N": str(value)}
    if isinstance(value, str):
        return {"S": value}
    if isinstance(value, frozenset):
        return {"SS": sorted(value)}
    raise InvalidItem(f"cannot encode {value!r}")


def decode_value(obj: Any) -> AttributeValue:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ParseError(f"bad attribute value: {obj!r}")
    ((tag, raw),) = obj.items()
    if tag == "N" and isinstance(raw, str):
        try:
            return int(raw)
        except ValueError:
            raise ParseError(f"bad number: {raw!r}") from None
    if tag == "S" and isinstance(raw, str):
        return raw
    if tag == "BOOL" and isinstance(raw, bool):
        return raw
    if tag == "SS" and isinstance(raw, list) and all(isinstance(e, str) for e in raw):
        return frozenset(raw)
    raise ParseError(f"bad attribute value: {obj!r}")


def encode_attributes(attributes: Mapping[str, AttributeValue]) -> dict[str, Any]:
    return {name: encode_value(attributes[name]) for name in sorted(attributes)}


def decode_attributes(obj: Any) -> dict[str, AttributeValue]:
    if not isinstance(obj, dict):
        raise ParseError("attributes must be an object")
    try:
        return normalize_attributes({name: decode_value(v) for name, v in obj.items()})
    except InvalidItem as exc:
        raise ParseError(str(exc)) from None


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
