"""Ordered tree edit distance via the keyroot dynamic program.

Works on the small tag trees built from table structures but is generic over
any ``TreeNode`` tree and any cost functions.  Costs are floats so content
substitutions can be fractional.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable


@dataclass
class TreeNode:
    tag: str
    colspan: int = 1
    rowspan: int = 1
    content: str = ""
    children: list["TreeNode"] = field(default_factory=list)


def tree_size(node: TreeNode) -> int:
    return 1 + sum(tree_size(c) for c in node.children)


class _Annotated:
    """Postorder node list with leftmost-leaf indices and keyroots."""

    def __init__(self, root: TreeNode) -> None:
        self.nodes: list[TreeNode] = []
        self.lmds: list[int] = []

        def visit(n: TreeNode) -> int:
            first: int | None = None
            for child in n.children:
                f = visit(child)
                if first is None:
                    first = f
            idx = len(self.nodes)
            self.nodes.append(n)
            self.lmds.append(first if first is not None else idx)
            return self.lmds[idx]

        visit(root)
        keyroots: dict[int, int] = {}
        for i, lmd in enumerate(self.lmds):
            keyroots[lmd] = i  # the last (deepest-right) node wins per lmd
        self.keyroots = sorted(keyroots.values())


CostFn = Callable[[TreeNode], float]
UpdateFn = Callable[[TreeNode, TreeNode], float]


def tree_edit_distance(
    a: TreeNode,
    b: TreeNode,
    *,
    delete_cost: CostFn,
    insert_cost: CostFn,
    update_cost: UpdateFn,
) -> float:
    """Exact minimum-cost edit script length between two ordered trees."""
    A, B = _Annotated(a), _Annotated(b)
    td = [[0.0] * len(B.nodes) for _ in range(len(A.nodes))]
    for i in A.keyroots:
        for j in B.keyroots:
            _fill_forest(A, B, i, j, td, delete_cost, insert_cost, update_cost)
    return td[-1][-1]


def _fill_forest(
    A: _Annotated,
    B: _Annotated,
    i: int,
    j: int,
    td: list[list[float]],
    delc: CostFn,
    insc: CostFn,
    updc: UpdateFn,
) -> None:
    Al, Bl = A.lmds, B.lmds
    An, Bn = A.nodes, B.nodes
    m = i - Al[i] + 2
    n = j - Bl[j] + 2
    fd = [[0.0] * n for _ in range(m)]
    ioff = Al[i] - 1
    joff = Bl[j] - 1
    for x in range(1, m):
        fd[x][0] = fd[x - 1][0] + delc(An[x + ioff])
    for y in range(1, n):
        fd[0][y] = fd[0][y - 1] + insc(Bn[y + joff])
    for x in range(1, m):
        for y in range(1, n):
            if Al[i] == Al[x + ioff] and Bl[j] == Bl[y + joff]:
                fd[x][y] = min(
                    fd[x - 1][y] + delc(An[x + ioff]),
                    fd[x][y - 1] + insc(Bn[y + joff]),
                    fd[x - 1][y - 1] + updc(An[x + ioff], Bn[y + joff]),
                )
                td[x + ioff][y + joff] = fd[x][y]
            else:
                p = Al[x + ioff] - 1 - ioff
                q = Bl[y + joff] - 1 - joff
                fd[x][y] = min(
                    fd[x - 1][y] + delc(An[x + ioff]),
                    fd[x][y - 1] + insc(Bn[y + joff]),
                    fd[p][q] + td[x + ioff][y + joff],
                )


def levenshtein(a: str, b: str) -> int:
    """Unit-cost string edit distance."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i] + [0] * len(b)
        for j, cb in enumerate(b, start=1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb))
        prev = cur
    return prev[-1]


def normalized_edit_distance(a: str, b: str) -> float:
    """Levenshtein distance scaled into [0, 1]; 0 for two empty strings."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 0.0
    return levenshtein(a, b) / longest
