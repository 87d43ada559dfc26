"""Exception hierarchy shared by the store, the wire protocol and the trees."""

from __future__ import annotations


class CloudTreeError(Exception):
    """Base class for every error raised by this package."""

    code = "internal"


class StoreError(CloudTreeError):
    """An error reported by a key-value backend."""

    code = "store-error"


class NoSuchTable(StoreError):
    code = "NoSuchTable"


class AlreadyExists(StoreError):
    code = "AlreadyExists"


class InvalidName(StoreError):
    code = "InvalidName"


class InvalidItem(StoreError):
    code = "InvalidItem"


class TypeMismatch(StoreError):
    code = "TypeMismatch"


class BatchTooLarge(StoreError):
    code = "BatchTooLarge"


class ConflictingKeys(StoreError):
    code = "ConflictingKeys"


class CorruptSnapshot(StoreError):
    code = "CorruptSnapshot"


class ParseError(CloudTreeError, ValueError):
    code = "bad-request"


class SchemaError(CloudTreeError, ValueError):
    code = "SchemaError"


class DuplicateLabel(CloudTreeError):
    code = "DuplicateLabel"


class NetError(StoreError):
    code = "net-error"


class BindFailed(NetError):
    code = "BindFailed"


class ConnectFailed(NetError):
    code = "ConnectFailed"


class ConnectionLost(NetError):
    code = "ConnectionLost"


class ServerError(NetError):
    """A server-side failure that maps to no specific store error."""

    code = "server-error"


class Unauthorized(NetError):
    code = "unauthorized"


class SessionError(CloudTreeError):
    code = "session-error"


class SessionClosed(SessionError):
    code = "SessionClosed"


class SessionPoisoned(SessionError):
    """A remote write failed after the cache was already updated."""

    code = "SessionPoisoned"


class NoSuchTree(SessionError):
    code = "NoSuchTree"


class KindMismatch(SessionError):
    code = "KindMismatch"


class IdSpaceExhausted(SessionError):
    code = "IdSpaceExhausted"


class CorruptTree(CloudTreeError):
    """A child entry points at a node that does not exist."""

    code = "CorruptTree"


def _collect(cls: type) -> dict[str, type]:
    out = {}
    for sub in cls.__subclasses__():
        out[sub.code] = sub
        out.update(_collect(sub))
    return out


#: error code -> exception class, used to re-raise server errors on the client
ERRORS_BY_CODE: dict[str, type[CloudTreeError]] = _collect(CloudTreeError)
