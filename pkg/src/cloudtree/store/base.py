from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Sequence

from .types import BatchWriteRequest, Item, UpdateAction


class KVStore(ABC):
    """The remote key-value store contract.

    Every method call is one remote request. Tables are addressed by name; the
    name itself is the table handle.
    """

    batch_limit: int = 25

    @abstractmethod
    def create_table(self, name: str) -> str: ...

    @abstractmethod
    def delete_table(self, name: str) -> None: ...

    @abstractmethod
    def list_tables(self) -> list[str]: ...

    @abstractmethod
    def get_item(self, table: str, key: int) -> Item | None: ...

    @abstractmethod
    def put_item(self, table: str, item: Item) -> None: ...

    @abstractmethod
    def update_item(self, table: str, key: int, actions: Sequence[UpdateAction]) -> None: ...

    @abstractmethod
    def delete_item(self, table: str, key: int) -> None: ...

    @abstractmethod
    def batch_get(self, table: str, keys: Sequence[int]) -> list[Item]: ...

    @abstractmethod
    def batch_write(self, table: str, request: BatchWriteRequest) -> None: ...

    def sync(self) -> None:
        """Make completed writes durable. No-op for volatile backends."""

    def close(self) -> None:
        self.sync()

    def __enter__(self) -> KVStore:
        return self

    def __exit__(self, *exc) -> None:
        self.close()
