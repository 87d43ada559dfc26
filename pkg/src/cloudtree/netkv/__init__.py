"""The store contract over TCP: a threaded server and a matching client backend."""

from .client import RemoteStore, remote_store
from .protocol import (
    DEFAULT_PORT,
    MAX_LINE,
    OPS,
    WireRequest,
    WireResponse,
    decode_request,
    decode_response,
    encode_request,
    encode_response,
)
from .server import KVServer, parse_address, serve

__all__ = [
    "DEFAULT_PORT",
    "KVServer",
    "MAX_LINE",
    "OPS",
    "RemoteStore",
    "WireRequest",
    "WireResponse",
    "decode_request",
    "decode_response",
    "encode_request",
    "encode_response",
    "parse_address",
    "remote_store",
    "serve",
]
