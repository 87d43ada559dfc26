"""Binary search tree of integers whose nodes live in the store."""

from __future__ import annotations

from .node import CHILDREN_SET, DATA_ITEM, TreeNode, follow_child, split_children
from .session import BS_TREE, CloudTree
from .store.types import INT_MAX, INT_MIN, SetAdd, SetAttribute, SetRemove


def _check(n: int) -> int:
    if isinstance(n, bool) or not isinstance(n, int) or not INT_MIN <= n <= INT_MAX:
        raise ValueError("binary search tree keys must be 64-bit integers")
    return n


class CloudBSTree(CloudTree):
    """Unbalanced BST. Each child entry ``"<id>:<key>"`` embeds the child's key,
    so one fetched node is enough to choose the direction of descent."""

    kind = BS_TREE

    def _find(self, n: int) -> tuple[TreeNode | None, TreeNode | None, TreeNode | None]:
        """(node holding n or None, its parent, last node visited)."""
        parent = None
        cur = self._root()
        while cur is not None:
            if cur.data_item == n:
                return cur, parent, cur
            nxt = follow_child(cur, n)
            if nxt is None:
                return None, parent, cur
            parent, cur = cur, self._node(nxt)
        return None, None, None

    def insert(self, n: int) -> None:
        _check(n)
        with self._operation() as cache:
            if self.next_node_id == 0:
                cache.buffer_put(TreeNode(self.allocate_id(), data_item=n))
                return
            found, _, last = self._find(n)
            if found is not None:
                return
            if last is None:
                # every key was deleted; the root slot is reused
                cache.buffer_put(TreeNode(0, data_item=n))
                return
            node_id = self.allocate_id()
            cache.update_node(last.node_id, [SetAdd(CHILDREN_SET, f"{node_id}:{n}")])
            cache.buffer_put(TreeNode(node_id, data_item=n))

    def query(self, n: int) -> bool:
        _check(n)
        with self._operation():
            return self._find(n)[0] is not None

    def delete(self, n: int) -> bool:
        _check(n)
        with self._operation():
            cur, parent, _ = self._find(n)
            if cur is None:
                return False
            self._remove(cur, parent)
            return True

    def _remove(self, cur: TreeNode, parent: TreeNode | None) -> None:
        cache = self.cache
        left, right = split_children(cur)
        if left is None and right is None:
            if parent is not None:
                cache.update_node(parent.node_id, [SetRemove(CHILDREN_SET, f"{cur.node_id}:{cur.data_item}")])
            cache.buffer_delete(cur.node_id)
            return

        # replace cur's key by its in-order predecessor (or successor when there
        # is no left subtree), then remove the node that held the replacement
        go_left = left is not None
        rep_parent, rep = cur, self._node((left or right).child_id)
        while True:
            l, r = split_children(rep)
            step = r if go_left else l
            if step is None:
                break
            rep_parent, rep = rep, self._node(step.child_id)

        old, new = cur.data_item, rep.data_item
        cache.update_node(cur.node_id, [SetAttribute(DATA_ITEM, new)])
        if parent is not None:
            # the parent's entry embeds the key, so it must follow the change
            cache.update_node(parent.node_id, [
                SetRemove(CHILDREN_SET, f"{cur.node_id}:{old}"),
                SetAdd(CHILDREN_SET, f"{cur.node_id}:{new}"),
            ])
        self._remove(rep, rep_parent)
