"""Prefix tree (trie) whose nodes live in the store, one item per character."""

from __future__ import annotations

from .node import CHILDREN_SET, WORD, ChildEntry, TreeNode, find_child_by_label
from .session import PREFIX_TREE, CloudTree
from .store.types import RemoveAttribute, SetAdd, SetAttribute, SetRemove


def _check(s: str) -> str:
    if not isinstance(s, str) or not s:
        raise ValueError("prefix tree keys must be non-empty strings")
    return s


class CloudPrefixTree(CloudTree):
    """A trie of strings. Node 0 is the root and carries no character.

    Every other node is reached from its parent through the child entry
    ``"<id>:<char>"``; a node whose ``word`` flag is set ends a stored string.
    """

    kind = PREFIX_TREE

    def _walk(self, s: str) -> list[TreeNode]:
        """Nodes matched along ``s`` from the root (root included)."""
        root = self._root()
        if root is None:
            return []
        path = [root]
        for ch in s:
            child = find_child_by_label(path[-1], ch)
            if child is None:
                break
            path.append(self._node(child))
        return path

    def insert(self, s: str) -> None:
        _check(s)
        with self._operation() as cache:
            if self.next_node_id == 0:
                cache.buffer_put(TreeNode(self.allocate_id()))
            path = self._walk(s)
            if not path:
                # root lost (metadata recovered after a crash): recreate it
                cache.buffer_put(TreeNode(0))
                path = [cache.read_node(0)]
            matched = len(path) - 1
            cur = path[-1]
            if matched == len(s):
                if not cur.word:
                    cache.update_node(cur.node_id, [SetAttribute(WORD, True)])
                return

            new_ids = [self.allocate_id() for _ in range(len(s) - matched)]
            cache.update_node(cur.node_id, [SetAdd(CHILDREN_SET, f"{new_ids[0]}:{s[matched]}")])
            for j, node_id in enumerate(new_ids):
                if j + 1 < len(new_ids):
                    node = TreeNode(node_id, children=frozenset({ChildEntry(new_ids[j + 1], s[matched + j + 1])}))
                else:
                    node = TreeNode(node_id, word=True)
                cache.buffer_put(node)

    def query(self, s: str) -> bool:
        _check(s)
        with self._operation():
            path = self._walk(s)
            return len(path) == len(s) + 1 and path[-1].word

    def delete(self, s: str) -> bool:
        """Remove ``s``; returns False when it was not stored.

        Nodes that only served ``s`` are deleted. The walk back up stops at the
        root, at a node ending another word, or at a node with other children.
        """
        _check(s)
        with self._operation() as cache:
            path = self._walk(s)
            if len(path) != len(s) + 1 or not path[-1].word:
                return False
            end = path[-1]
            if end.children:
                cache.update_node(end.node_id, [RemoveAttribute(WORD)])
                return True
            keep = len(path) - 2
            while keep > 0 and not path[keep].word and len(path[keep].children) < 2:
                keep -= 1
            anchor = path[keep]
            cache.update_node(anchor.node_id, [SetRemove(CHILDREN_SET, f"{path[keep + 1].node_id}:{s[keep]}")])
            for node in path[keep + 1:]:
                cache.buffer_delete(node.node_id)
            return True
