from __future__ import annotations

import logging
import socket
import socketserver
import threading
import time
from collections import Counter
from typing import Any

from ..errors import BindFailed, CloudTreeError, ParseError
from ..store.base import KVStore
from .protocol import (
    DEFAULT_PORT,
    MAX_LINE,
    WireRequest,
    WireResponse,
    decode_request,
    encode_response,
    item_to_wire,
    request_id_hint,
)

log = logging.getLogger(__name__)


def parse_address(addr: str, default_host: str = "127.0.0.1") -> tuple[str, int]:
    """``host:port``, ``host`` or ``:port`` -> (host, port)."""
    host, sep, port = addr.rpartition(":")
    if not sep:
        return addr or default_host, DEFAULT_PORT
    return host or default_host, int(port) if port else DEFAULT_PORT


def execute(store: KVStore, req: WireRequest) -> Any:
    """Run one decoded request against ``store`` and return the JSON payload."""
    p = req.payload
    op = req.op
    if op == "CreateTable":
        return store.create_table(p["table"])
    if op == "DeleteTable":
        store.delete_table(p["table"])
        return None
    if op == "ListTables":
        return store.list_tables()
    if op == "Get":
        item = store.get_item(p["table"], p["key"])
        return None if item is None else item_to_wire(item)
    if op == "Put":
        store.put_item(p["table"], p["item"])
        return None
    if op == "Update":
        store.update_item(p["table"], p["key"], p["actions"])
        return None
    if op == "Delete":
        store.delete_item(p["table"], p["key"])
        return None
    if op == "BatchGet":
        return [item_to_wire(i) for i in store.batch_get(p["table"], p["keys"])]
    if op == "BatchWrite":
        store.batch_write(p["table"], p["request"])
        return None
    if op == "SnapshotSave":
        save = getattr(store, "snapshot_save", None)
        if save is None:
            raise CloudTreeError("backing store does not support snapshots")
        return str(save(p.get("path")))
    raise ParseError(f"unknown op {op!r}")


class _Handler(socketserver.StreamRequestHandler):
    server: KVServer

    def handle(self) -> None:
        srv = self.server
        srv._register(self.connection)
        try:
            while True:
                line = self.rfile.readline(MAX_LINE + 1)
                if not line:
                    return
                if len(line) > MAX_LINE and not line.endswith(b"\n"):
                    # drop the rest of the oversized line
                    while line and not line.endswith(b"\n"):
                        line = self.rfile.readline(MAX_LINE + 1)
                    self._send(WireResponse(None, "bad-request", {"message": "line too long"}))
                    continue
                if not line.strip():
                    continue
                self._send(srv.respond(line))
        except (ConnectionError, OSError):
            pass
        finally:
            srv._unregister(self.connection)

    def _send(self, resp: WireResponse) -> None:
        self.wfile.write(encode_response(resp))
        self.wfile.flush()


class KVServer(socketserver.ThreadingTCPServer):
    """TCP front end for a KVStore.

    ``counters`` tallies executed requests per op; ``rtt`` adds an artificial
    delay before every response.
    """

    allow_reuse_address = True
    daemon_threads = False
    block_on_close = True

    def __init__(self, address: tuple[str, int], store: KVStore, *, rtt: float = 0.0,
                 token: str | None = None) -> None:
        self.store = store
        self.rtt = rtt
        self.token = token
        self.counters: Counter[str] = Counter()
        self._conns: set[socket.socket] = set()
        self._conn_lock = threading.Lock()
        self._thread: threading.Thread | None = None
        try:
            super().__init__(address, _Handler)
        except OSError as exc:
            raise BindFailed(f"cannot bind {address[0]}:{address[1]}: {exc}") from exc

    @property
    def address(self) -> str:
        host, port = self.server_address[:2]
        return f"{host}:{port}"

    def respond(self, line: bytes) -> WireResponse:
        try:
            req = decode_request(line)
        except ParseError as exc:
            return WireResponse(request_id_hint(line), "bad-request", {"message": str(exc)})
        if self.token is not None and req.token != self.token:
            return WireResponse(req.id, "unauthorized", {"message": "bad or missing token"})
        with self._conn_lock:
            self.counters[req.op] += 1
        try:
            payload = execute(self.store, req)
            resp = WireResponse(req.id, "ok", payload)
        except CloudTreeError as exc:
            resp = WireResponse(req.id, exc.code, {"message": str(exc)})
        except Exception as exc:  # keep the connection alive on backend bugs
            log.exception("request %s failed", req.id)
            resp = WireResponse(req.id, "server-error", {"message": repr(exc)})
        if self.rtt:
            time.sleep(self.rtt)
        return resp

    def _register(self, conn: socket.socket) -> None:
        with self._conn_lock:
            self._conns.add(conn)

    def _unregister(self, conn: socket.socket) -> None:
        with self._conn_lock:
            self._conns.discard(conn)

    def start(self) -> KVServer:
        self._thread = threading.Thread(target=self.serve_forever, kwargs={"poll_interval": 0.05},
                                        name="netkv-server", daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        """Stop accepting, let in-flight requests finish, close connections."""
        if self._thread is not None:
            self.shutdown()
        with self._conn_lock:
            conns = list(self._conns)
        for conn in conns:
            try:
                conn.shutdown(socket.SHUT_RD)
            except OSError:
                pass
        self.server_close()
        if self._thread is not None:
            self._thread.join()

    def __enter__(self) -> KVServer:
        return self

    def __exit__(self, *exc) -> None:
        self.stop()


def serve(bind: str, store: KVStore, *, rtt: float = 0.0, token: str | None = None) -> KVServer:
    """Start a server on ``bind`` in a background thread and return it."""
    return KVServer(parse_address(bind), store, rtt=rtt, token=token).start()
