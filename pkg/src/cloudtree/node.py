"""Tree nodes as store items, and the ``"childId:label"`` child-entry codec."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DuplicateLabel, ParseError, SchemaError
from .store.types import Item

META_KEY = 2**63

NODE_ID = "node_id"
DATA_ITEM = "data_item"
CHILDREN_SET = "children_set"
WORD = "word"
NODE_ATTRIBUTES = frozenset({NODE_ID, DATA_ITEM, CHILDREN_SET, WORD})


def _check_id(value: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value < META_KEY:
        raise ValueError(f"node id out of range: {value!r}")
    return value


@dataclass(frozen=True, order=True)
class ChildEntry:
    child_id: int
    label: str

    def __post_init__(self) -> None:
        _check_id(self.child_id)
        if not isinstance(self.label, str) or not self.label:
            raise ValueError("child label must be a non-empty string")

    def __str__(self) -> str:
        return encode_child(self)


def encode_child(entry: ChildEntry) -> str:
    return f"{entry.child_id}:{entry.label}"


def parse_child(s: str) -> ChildEntry:
    """Split ``s`` at the first colon into (child id, label)."""
    head, sep, label = s.partition(":")
    if not sep:
        raise ParseError(f"child entry without ':' separator: {s!r}")
    if not head.isdigit() or not head.isascii():
        raise ParseError(f"child id is not a decimal number: {s!r}")
    if not label:
        raise ParseError(f"child entry has an empty label: {s!r}")
    try:
        return ChildEntry(int(head), label)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


@dataclass(frozen=True)
class TreeNode:
    node_id: int
    data_item: int | None = None
    children: frozenset[ChildEntry] = field(default_factory=frozenset)
    word: bool = False

    def __post_init__(self) -> None:
        _check_id(self.node_id)
        if not isinstance(self.children, frozenset):
            object.__setattr__(self, "children", frozenset(self.children))

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def with_children(self, children) -> TreeNode:
        return TreeNode(self.node_id, self.data_item, frozenset(children), self.word)


def node_to_item(node: TreeNode) -> Item:
    attrs: dict = {}
    if node.data_item is not None:
        attrs[DATA_ITEM] = node.data_item
    if node.children:
        attrs[CHILDREN_SET] = frozenset(encode_child(c) for c in node.children)
    if node.word:
        attrs[WORD] = True
    return Item(node.node_id, attrs)


def item_to_node(item: Item) -> TreeNode:
    attrs = item.attributes
    unknown = set(attrs) - NODE_ATTRIBUTES
    if unknown:
        raise SchemaError(f"item {item.key}: unknown attributes {sorted(unknown)}")
    if NODE_ID in attrs and attrs[NODE_ID] != item.key:
        raise SchemaError(f"item {item.key}: node_id attribute disagrees with key")
    data = attrs.get(DATA_ITEM)
    if data is not None and (isinstance(data, bool) or not isinstance(data, int)):
        raise SchemaError(f"item {item.key}: data_item must be an integer")
    raw_children = attrs.get(CHILDREN_SET, frozenset())
    if not isinstance(raw_children, frozenset):
        raise SchemaError(f"item {item.key}: children_set must be a string set")
    word = attrs.get(WORD, False)
    if not isinstance(word, bool):
        raise SchemaError(f"item {item.key}: word must be a boolean")
    try:
        children = frozenset(parse_child(s) for s in raw_children)
        return TreeNode(item.key, data, children, word)
    except (ParseError, ValueError) as exc:
        raise SchemaError(f"item {item.key}: {exc}") from None


def find_child_by_label(node: TreeNode, label: str) -> int | None:
    """Id of the child reached via ``label``, or None."""
    found = None
    for entry in node.children:
        if entry.label == label:
            if found is not None:
                raise DuplicateLabel(f"node {node.node_id} has two children labelled {label!r}")
            found = entry.child_id
    return found


def split_children(node: TreeNode) -> tuple[ChildEntry | None, ChildEntry | None]:
    """(left, right) entries of a binary search tree node.

    Direction comes from comparing each entry's embedded key with the node's
    own key, since the set itself is unordered.
    """
    if node.data_item is None:
        raise SchemaError(f"node {node.node_id} has no data_item")
    left = right = None
    for entry in node.children:
        try:
            key = int(entry.label)
        except ValueError:
            raise SchemaError(f"node {node.node_id}: non-integer child label {entry.label!r}") from None
        if key < node.data_item:
            if left is not None:
                raise SchemaError(f"node {node.node_id} has two left children")
            left = entry
        elif key > node.data_item:
            if right is not None:
                raise SchemaError(f"node {node.node_id} has two right children")
            right = entry
        else:
            raise SchemaError(f"node {node.node_id}: child label equals own key")
    return left, right


def follow_child(node: TreeNode, key: int) -> int | None:
    """Child id to descend into when searching ``key`` below ``node``."""
    left, right = split_children(node)
    entry = left if key < node.data_item else right
    return None if entry is None else entry.child_id
