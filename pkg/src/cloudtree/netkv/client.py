from __future__ import annotations

import itertools
import socket
import threading
from typing import Any, Sequence

from ..errors import ERRORS_BY_CODE, ConnectFailed, ConnectionLost, ParseError, ServerError
from ..store.base import KVStore
from ..store.types import BatchWriteRequest, Item, UpdateAction
from .protocol import WireRequest, decode_response, encode_request, item_from_wire
from .server import parse_address


class RemoteStore(KVStore):
    """KVStore backed by a netkv server; one method call is one wire request.

    The handle may be shared between threads; calls on the connection are
    serialized.
    """

    def __init__(self, address: str, *, batch_limit: int = 25, timeout: float | None = 30.0,
                 token: str | None = None) -> None:
        self.address = address
        self.batch_limit = batch_limit
        self.token = token
        self.requests_sent = 0
        self._ids = itertools.count(1)
        self._lock = threading.Lock()
        host, port = parse_address(address)
        try:
            self._sock = socket.create_connection((host, port), timeout=timeout)
        except OSError as exc:
            raise ConnectFailed(f"cannot connect to {host}:{port}: {exc}") from exc
        self._sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self._rfile = self._sock.makefile("rb")

    def _call(self, op: str, **payload: Any) -> Any:
        with self._lock:
            req = WireRequest(next(self._ids), op, payload, self.token)
            try:
                self._sock.sendall(encode_request(req))
                self.requests_sent += 1
                line = self._rfile.readline()
            except OSError as exc:
                raise ConnectionLost(f"connection to {self.address} lost: {exc}") from exc
            if not line:
                raise ConnectionLost(f"connection to {self.address} closed by server")
        resp = decode_response(line)
        if resp.id != req.id:
            raise ParseError(f"response id {resp.id} does not match request id {req.id}")
        if not resp.ok:
            message = (resp.payload or {}).get("message", "") if isinstance(resp.payload, dict) else ""
            raise ERRORS_BY_CODE.get(resp.status, ServerError)(message or resp.status)
        return resp.payload

    def create_table(self, name: str) -> str:
        return self._call("CreateTable", table=name)

    def delete_table(self, name: str) -> None:
        self._call("DeleteTable", table=name)

    def list_tables(self) -> list[str]:
        return list(self._call("ListTables"))

    def get_item(self, table: str, key: int) -> Item | None:
        raw = self._call("Get", table=table, key=key)
        return None if raw is None else item_from_wire(raw)

    def put_item(self, table: str, item: Item) -> None:
        self._call("Put", table=table, item=item)

    def update_item(self, table: str, key: int, actions: Sequence[UpdateAction]) -> None:
        self._call("Update", table=table, key=key, actions=list(actions))

    def delete_item(self, table: str, key: int) -> None:
        self._call("Delete", table=table, key=key)

    def batch_get(self, table: str, keys: Sequence[int]) -> list[Item]:
        return [item_from_wire(raw) for raw in self._call("BatchGet", table=table, keys=list(keys))]

    def batch_write(self, table: str, request: BatchWriteRequest) -> None:
        self._call("BatchWrite", table=table, request=request)

    def snapshot_save(self, path: str | None = None) -> str:
        return self._call("SnapshotSave", path=path)

    def close(self) -> None:
        try:
            self._rfile.close()
            self._sock.close()
        except OSError:
            pass


def remote_store(address: str, **kwargs: Any) -> RemoteStore:
    return RemoteStore(address, **kwargs)
