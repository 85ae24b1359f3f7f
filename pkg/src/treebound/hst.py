"""Hierarchically well-separated trees (labelled rooted trees over leaves).

A tree node carries a label ``delta``; leaves have delta 0 and a point id.
The induced metric is d(x, y) = delta(lca(x, y)), an ultrametric.  A k-HST
additionally shrinks labels by a factor >= k on every internal edge.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .metric import MetricSpace, validate_metric, _freeze

# relative slack for parent/child label-ratio checks (labels are floats)
RATIO_EPS = 1e-12


class HstError(ValueError):
    pass


@dataclass(frozen=True, eq=False)  # identity semantics: nodes are shared subtrees
class HstNode:
    delta: float
    children: tuple = ()
    point: str | None = None

    @property
    def is_leaf(self) -> bool:
        return self.point is not None

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"point": self.point, "delta": 0}
        return {"delta": self.delta, "children": [c.to_dict() for c in self.children]}

    @staticmethod
    def from_dict(obj: dict) -> "HstNode":
        if "point" in obj:
            return leaf(obj["point"])
        return internal(float(obj["delta"]), [HstNode.from_dict(c) for c in obj["children"]])


def leaf(point) -> HstNode:
    return HstNode(delta=0.0, children=(), point=str(point))


def internal(delta: float, children) -> HstNode:
    children = tuple(children)
    if not children:
        raise HstError("internal vertex needs at least one child")
    return HstNode(delta=float(delta), children=children, point=None)


def leaves(t: HstNode) -> list:
    """Leaf nodes in depth-first order."""
    if t.is_leaf:
        return [t]
    out = []
    stack = [t]
    while stack:
        node = stack.pop()
        if node.is_leaf:
            out.append(node)
        else:
            stack.extend(reversed(node.children))
    return out


def leaf_points(t: HstNode) -> list:
    return [x.point for x in leaves(t)]


def validate_hst(t: HstNode) -> HstNode:
    """Check the 1-HST invariants: delta=0 iff leaf, monotone labels, distinct leaf ids."""
    seen = set()

    def walk(node: HstNode):
        if node.is_leaf:
            if node.delta != 0:
                raise HstError(f"leaf {node.point!r} has nonzero label {node.delta}")
            if node.point in seen:
                raise HstError(f"duplicate leaf point id {node.point!r}")
            seen.add(node.point)
            return
        if not node.delta > 0:
            raise HstError(f"internal vertex has non-positive label {node.delta}")
        for c in node.children:
            if c.delta > node.delta * (1 + RATIO_EPS):
                raise HstError(f"label increases on an edge: {node.delta} -> {c.delta}")
            walk(c)

    walk(t)
    return t


def hst_to_metric(t: HstNode) -> MetricSpace:
    """Metric on the leaves: d(x,y) = label of the least common ancestor."""
    validate_hst(t)
    pts = leaf_points(t)
    n = len(pts)
    order = {p: i for i, p in enumerate(pts)}
    m = np.zeros((n, n))

    def fill(node: HstNode) -> list:
        if node.is_leaf:
            return [order[node.point]]
        groups = [fill(c) for c in node.children]
        merged = []
        for g in groups:
            for i in merged:
                for j in g:
                    m[i, j] = m[j, i] = node.delta
            merged.extend(g)
        return merged

    fill(t)
    return validate_metric(m, pts)


def check_khst(t: HstNode, k: float):
    """Is every internal edge label ratio >= k?  Returns (ok, witness edge or None)."""
    if k < 1:
        raise ValueError("k must be >= 1")

    def walk(node: HstNode):
        if node.is_leaf:
            return None
        for c in node.children:
            if not c.is_leaf:
                if c.delta > (node.delta / k) * (1 + RATIO_EPS):
                    return (node.delta, c.delta)
                w = walk(c)
                if w is not None:
                    return w
        return None

    w = walk(t)
    return (w is None), w


def remove_degenerate(t: HstNode) -> HstNode:
    """Coalesce single-child vertices; leaf-to-leaf distances are unchanged."""
    node = t
    while not node.is_leaf and len(node.children) == 1:
        node = node.children[0]
    if node.is_leaf:
        return node
    return internal(node.delta, [remove_degenerate(c) for c in node.children])


def to_ell_hst(t: HstNode, ell: float) -> HstNode:
    """Round a 1-HST up to an ell-HST (top-down vertex deletion).

    A non-root vertex v with parent u is deleted (children reattached to u)
    iff delta(v) >= delta(u)/ell; ties delete.  Pairwise distances grow by a
    factor in [1, ell].
    """
    if not ell > 1:
        raise ValueError("ell must be > 1")
    validate_hst(t)

    def compress(node: HstNode) -> HstNode:
        if node.is_leaf:
            return node
        kept = []
        pending = list(node.children)
        while pending:
            v = pending.pop(0)
            if not v.is_leaf and v.delta >= node.delta / ell:
                pending = list(v.children) + pending
            else:
                kept.append(compress(v))
        return internal(node.delta, kept)

    return compress(t)


def subdominant_ultrametric(M: MetricSpace) -> HstNode:
    """The largest ultrametric pointwise below M, as a 1-HST.

    Equals the minimax path value u(x,y) = min over x-y paths of the max edge;
    built by single-linkage merging in increasing distance order, with equal
    distances merged simultaneously (tie order cannot change u).
    """
    n = M.n
    if n == 1:
        return leaf(M.points[0])
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    node_of = {i: leaf(M.points[i]) for i in range(n)}
    pairs = sorted(
        ((float(M.dist[i, j]), i, j) for i in range(n) for j in range(i + 1, n)),
        key=lambda e: e[0])
    idx = 0
    while idx < len(pairs):
        w = pairs[idx][0]
        group = []
        while idx < len(pairs) and pairs[idx][0] == w:
            group.append(pairs[idx])
            idx += 1
        roots = set()
        for _, i, j in group:
            roots.add(find(i))
            roots.add(find(j))
        for _, i, j in group:
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[rj] = ri
        merged = {}
        for r in roots:
            merged.setdefault(find(r), []).append(node_of.pop(r))
        for r, parts in merged.items():
            node_of[r] = parts[0] if len(parts) == 1 else internal(w, parts)
    (root,) = node_of.values()
    return root


@dataclass(frozen=True)
class HstClass:
    """Structural flags from the HST subclass hierarchy (evaluated on the
    degenerate-coalesced tree)."""

    is_khst: bool
    binary_balanced: bool
    binary_uniform: bool
    bkrs: bool
    bfm: bool
    krr: bool

    def to_dict(self) -> dict:
        return {
            "is_khst": self.is_khst,
            "binary_balanced": self.binary_balanced,
            "binary_uniform": self.binary_uniform,
            "bkrs": self.bkrs,
            "bfm": self.bfm,
            "krr": self.krr,
        }


def _leaf_count(node: HstNode, memo) -> int:
    if id(node) in memo:
        return memo[id(node)]
    c = 1 if node.is_leaf else sum(_leaf_count(ch, memo) for ch in node.children)
    memo[id(node)] = c
    return c


def classify_hst(t: HstNode, k: float = 1.0) -> HstClass:
    """Evaluate the five subclass predicates plus the k-HST check."""
    validate_hst(t)
    khst_ok, _ = check_khst(t, k)
    t = remove_degenerate(t)
    memo: dict = {}
    internals = []
    stack = [t]
    while stack:
        node = stack.pop()
        if not node.is_leaf:
            internals.append(node)
            stack.extend(node.children)

    def balanced(node):
        counts = [_leaf_count(c, memo) for c in node.children]
        return max(counts) - min(counts) <= 1

    binary_balanced = all(len(v.children) <= 2 or balanced(v) for v in internals)
    binary_uniform = all(
        len(v.children) <= 2 or all(c.is_leaf for c in v.children) for v in internals)
    bkrs = binary_uniform and all(
        len(v.children) != 2 or balanced(v) or any(c.is_leaf for c in v.children)
        for v in internals)
    bfm = all(
        len(v.children) <= 2 and sum(0 if c.is_leaf else 1 for c in v.children) <= 1
        for v in internals)
    uniform_space = len(internals) == 0 or (
        len(internals) == 1 and all(c.is_leaf for c in internals[0].children))
    super_increasing = khst_ok and all(
        len(v.children) <= 2 and sum(0 if c.is_leaf else 1 for c in v.children) <= 1
        for v in internals)
    krr = uniform_space or super_increasing
    return HstClass(is_khst=khst_ok, binary_balanced=binary_balanced,
                    binary_uniform=binary_uniform, bkrs=bkrs, bfm=bfm, krr=krr)


def _lca_table(t: HstNode):
    """Map each unordered leaf-point pair to an id of its lca vertex."""
    table = {}
    counter = [0]

    def walk(node: HstNode) -> list:
        vid = counter[0]
        counter[0] += 1
        if node.is_leaf:
            table[(node.point, node.point)] = vid
            return [node.point]
        groups = [walk(c) for c in node.children]
        merged = []
        for g in groups:
            for a in merged:
                for b in g:
                    table[(min(a, b), max(a, b))] = vid
            merged.extend(g)
        return merged

    walk(t)
    return table


def check_lca_consistency(t: HstNode, w: HstNode):
    """lca_T(a,b)=lca_T(c,d)  =>  lca_W(a,b)=lca_W(c,d), over all quadruples.

    Returns (ok, witness quadruple or None).  Leaf sets must agree.
    """
    pts_t = sorted(leaf_points(t))
    pts_w = sorted(leaf_points(w))
    if pts_t != pts_w:
        raise ValueError("leaf sets differ")
    lt = _lca_table(t)
    lw = _lca_table(w)
    groups: dict = {}
    for pair, vid in lt.items():
        groups.setdefault(vid, []).append(pair)
    for pairs in groups.values():
        first = pairs[0]
        for other in pairs[1:]:
            if lw[other] != lw[first]:
                return False, (first[0], first[1], other[0], other[1])
    return True, None


def hst_metric_matrix(t: HstNode) -> tuple:
    """(points, matrix) without the validation pass; internal fast path."""
    pts = leaf_points(t)
    n = len(pts)
    m = np.zeros((n, n))
    pos = {p: i for i, p in enumerate(pts)}

    def fill(node: HstNode) -> list:
        if node.is_leaf:
            return [pos[node.point]]
        groups = [fill(c) for c in node.children]
        merged: list = []
        for g in groups:
            for i in merged:
                for j in g:
                    m[i, j] = m[j, i] = node.delta
            merged.extend(g)
        return merged

    fill(t)
    return pts, _freeze(m)
