"""Newline-delimited JSON wire format.

One canonical-JSON object per line. Requests look like::

    {"id":7,"op":"Get","payload":{"key":0,"table":"t"}}

and responses like::

    {"id":7,"payload":{"attributes":{...},"key":0},"status":"ok"}

Items use the same attribute encoding as the snapshot file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from ..errors import InvalidItem, ParseError
from ..store.types import (
    BatchWriteRequest,
    Item,
    RemoveAttribute,
    SetAdd,
    SetAttribute,
    SetRemove,
    UpdateAction,
    canonical_json,
    decode_attributes,
    decode_value,
    encode_attributes,
    encode_value,
)

MAX_LINE = 1 << 20
DEFAULT_PORT = 4511

OPS = (
    "CreateTable",
    "DeleteTable",
    "ListTables",
    "Get",
    "Put",
    "Update",
    "Delete",
    "BatchGet",
    "BatchWrite",
    "SnapshotSave",
)


@dataclass
class WireRequest:
    id: int
    op: str
    payload: dict[str, Any] = field(default_factory=dict)
    token: str | None = None


@dataclass
class WireResponse:
    id: int | None
    status: str = "ok"
    payload: Any = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


# -- payload pieces ------------------------------------------------------------


def item_to_wire(item: Item) -> dict[str, Any]:
    return {"key": item.key, "attributes": encode_attributes(item.attributes)}


def item_from_wire(obj: Any) -> Item:
    if not isinstance(obj, dict) or set(obj) != {"key", "attributes"}:
        raise ParseError(f"bad item: {obj!r}")
    key = obj["key"]
    if isinstance(key, bool) or not isinstance(key, int):
        raise ParseError(f"bad item key: {key!r}")
    try:
        return Item(key, decode_attributes(obj["attributes"]))
    except (ValueError, InvalidItem) as exc:
        raise ParseError(str(exc)) from None


def action_to_wire(action: UpdateAction) -> dict[str, Any]:
    if isinstance(action, SetAttribute):
        return {"type": "SET", "name": action.name, "value": encode_value(action.value)}
    if isinstance(action, RemoveAttribute):
        return {"type": "REMOVE", "name": action.name}
    if isinstance(action, SetAdd):
        return {"type": "ADD", "name": action.name, "element": action.element}
    if isinstance(action, SetRemove):
        return {"type": "DELETE", "name": action.name, "element": action.element}
    raise ParseError(f"unknown action {action!r}")


def action_from_wire(obj: Any) -> UpdateAction:
    if not isinstance(obj, dict) or not isinstance(obj.get("name"), str):
        raise ParseError(f"bad action: {obj!r}")
    kind, name = obj.get("type"), obj["name"]
    if kind == "SET":
        return SetAttribute(name, decode_value(obj.get("value")))
    if kind == "REMOVE":
        return RemoveAttribute(name)
    if kind in ("ADD", "DELETE") and isinstance(obj.get("element"), str):
        return (SetAdd if kind == "ADD" else SetRemove)(name, obj["element"])
    raise ParseError(f"bad action: {obj!r}")


def _key(obj: Any) -> int:
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise ParseError(f"bad key: {obj!r}")
    return obj


def _table(payload: dict[str, Any]) -> str:
    table = payload.get("table")
    if not isinstance(table, str):
        raise ParseError("payload.table must be a string")
    return table


def _list(payload: dict[str, Any], name: str) -> list:
    value = payload.get(name, [])
    if not isinstance(value, list):
        raise ParseError(f"payload.{name} must be a list")
    return value


# payload (domain objects) <-> payload (JSON) per op

def _encode_payload(op: str, p: dict[str, Any]) -> dict[str, Any]:
    if op == "ListTables":
        return {}
    if op == "SnapshotSave":
        return {} if p.get("path") is None else {"path": str(p["path"])}
    out: dict[str, Any] = {"table": p["table"]}
    if op in ("Get", "Delete", "Update"):
        out["key"] = p["key"]
    if op == "Update":
        out["actions"] = [action_to_wire(a) for a in p["actions"]]
    elif op == "Put":
        out["item"] = item_to_wire(p["item"])
    elif op == "BatchGet":
        out["keys"] = list(p["keys"])
    elif op == "BatchWrite":
        req: BatchWriteRequest = p["request"]
        out["puts"] = [item_to_wire(i) for i in req.puts]
        out["deletes"] = list(req.deletes)
    return out


def _decode_payload(op: str, p: Any) -> dict[str, Any]:
    if not isinstance(p, dict):
        raise ParseError("payload must be an object")
    if op == "ListTables":
        return {}
    if op == "SnapshotSave":
        path = p.get("path")
        if path is not None and not isinstance(path, str):
            raise ParseError("payload.path must be a string")
        return {"path": path}
    out: dict[str, Any] = {"table": _table(p)}
    if op in ("Get", "Delete", "Update"):
        out["key"] = _key(p.get("key"))
    if op == "Update":
        out["actions"] = [action_from_wire(a) for a in _list(p, "actions")]
    elif op == "Put":
        out["item"] = item_from_wire(p.get("item"))
    elif op == "BatchGet":
        out["keys"] = [_key(k) for k in _list(p, "keys")]
    elif op == "BatchWrite":
        out["request"] = BatchWriteRequest(
            puts=[item_from_wire(i) for i in _list(p, "puts")],
            deletes=[_key(k) for k in _list(p, "deletes")],
        )
    return out


# -- framing -----------------------------------------------------------------------


def encode_request(req: WireRequest) -> bytes:
    if req.op not in OPS:
        raise ParseError(f"unknown op {req.op!r}")
    obj: dict[str, Any] = {"id": req.id, "op": req.op, "payload": _encode_payload(req.op, req.payload)}
    if req.token is not None:
        obj["token"] = req.token
    return canonical_json(obj).encode("utf-8") + b"\n"


def _load_line(data: bytes | str) -> Any:
    if isinstance(data, bytes):
        if len(data) > MAX_LINE + 1:
            raise ParseError("message exceeds maximum line length")
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError:
            raise ParseError("message is not valid UTF-8") from None
    try:
        return json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}") from None


def decode_request(data: bytes | str) -> WireRequest:
    obj = _load_line(data)
    if not isinstance(obj, dict):
        raise ParseError("request must be a JSON object")
    rid = obj.get("id")
    if isinstance(rid, bool) or not isinstance(rid, int) or rid < 0:
        raise ParseError("request id must be an unsigned integer")
    op = obj.get("op")
    if op not in OPS:
        raise ParseError(f"unknown op {op!r}")
    token = obj.get("token")
    if token is not None and not isinstance(token, str):
        raise ParseError("token must be a string")
    return WireRequest(rid, op, _decode_payload(op, obj.get("payload", {})), token)


def encode_response(resp: WireResponse) -> bytes:
    return canonical_json({"id": resp.id, "status": resp.status, "payload": resp.payload}).encode("utf-8") + b"\n"


def decode_response(data: bytes | str) -> WireResponse:
    obj = _load_line(data)
    if not isinstance(obj, dict) or "status" not in obj or not isinstance(obj["status"], str):
        raise ParseError("response must be an object with a status")
    rid = obj.get("id")
    if rid is not None and (isinstance(rid, bool) or not isinstance(rid, int)):
        raise ParseError("bad response id")
    return WireResponse(rid, obj["status"], obj.get("payload"))


def request_id_hint(data: bytes) -> int | None:
    """Best-effort id extraction from a request that failed to decode."""
    try:
        obj = json.loads(data)
    except (ValueError, UnicodeDecodeError):
        return None
    rid = obj.get("id") if isinstance(obj, dict) else None
    return rid if isinstance(rid, int) and not isinstance(rid, bool) else None
