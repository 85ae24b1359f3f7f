"""Subspace extraction: shell deletion, sparse-subtree DP, tree pruning,
greedy binary codes, mesh extraction, branch selectors, special-subclass
extractors, and tight-example generators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import mpmath
import numpy as np

from .hst import (HstNode, internal, leaf, leaf_points, hst_metric_matrix,
                  remove_degenerate, to_ell_hst, validate_hst)
from .metric import MetricSpace, mesh_distance, restrict
from .util import ceil_int, frac


@dataclass(frozen=True)
class Extraction:
    """A subspace together with an HST over it that the subspace dominates.

    Invariants: the restricted source metric dominates hst_to_metric(tree),
    measured_factor <= guaranteed_factor, and |subset| >= guaranteed_size.
    """

    subset: tuple
    tree: HstNode
    guaranteed_size: float
    guaranteed_factor: float
    measured_factor: float
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "subset": list(self.subset),
            "tree": self.tree.to_dict(),
            "guaranteed_size": self.guaranteed_size,
            "guaranteed_factor": self.guaranteed_factor,
            "measured_factor": self.measured_factor,
            "meta": self.meta,
        }


def scale_tree(t: HstNode, gamma: float) -> HstNode:
    if t.is_leaf:
        return t
    return internal(t.delta * gamma, [scale_tree(c, gamma) for c in t.children])


def measure_against(M: MetricSpace, tree: HstNode, tol: float = 1e-9):
    """(max ratio d_M/d_tree over leaf pairs, dominated flag)."""
    pts, tm = hst_metric_matrix(tree)
    if len(pts) == 1:
        return 1.0, True
    sub = restrict(M, pts).dist
    iu = np.triu_indices(len(pts), k=1)
    ratios = sub[iu] / tm[iu]
    return float(ratios.max()), bool(ratios.min() >= 1 - tol)


# ---------------------------------------------------------------------------
# shell extraction: metric -> large subspace dominating a 1-HST

def shell_extract(M: MetricSpace, beta: float) -> Extraction:
    """Recursive shell deletion around a diameter endpoint.

    Guarantees |subset| >= n^(1/beta) and a dominated factor of 2t+1 with
    t = ceil(log_beta(log2 n) + 1); beta is clamped to log2 n.
    """
    if not beta > 1:
        raise ValueError("beta must be > 1")
    n = M.n
    pts = M.points
    dist = M.dist
    if n == 1:
        return Extraction(subset=pts, tree=leaf(pts[0]), guaranteed_size=1.0,
                          guaranteed_factor=1.0, measured_factor=1.0,
                          meta={"t": 0, "beta": beta})
    if n == 2:
        tree = internal(float(dist[0, 1]), [leaf(pts[0]), leaf(pts[1])])
        return Extraction(subset=pts, tree=tree, guaranteed_size=2.0,
                          guaranteed_factor=1.0, measured_factor=1.0,
                          meta={"t": 0, "beta": beta})

    log2n = math.log2(n)
    beta_eff = min(beta, log2n)
    t = ceil_int(math.log(log2n, beta_eff) + 1)
    width = 2 * t + 1
    inv_beta = 1.0 / beta_eff

    def rec(idx: np.ndarray) -> HstNode:
        # n=2 is NOT special-cased here: subspaces keep the diam/(2t+1) root
        # label so labels stay monotone under shell parents.
        m = len(idx)
        if m == 1:
            return leaf(pts[idx[0]])
        sub = dist[np.ix_(idx, idx)]
        diam = float(sub.max())
        x = int(np.unravel_index(int(np.argmax(sub)), sub.shape)[0])
        dx = sub[x]
        eps = [float(np.count_nonzero(dx <= diam * i / width)) / m
               for i in range(width + 1)]
        cands = [i for i in range(1, 2 * t + 1) if eps[i - 1] < 1.0]
        if eps[t] > 0.5:
            cands = cands[::-1]  # the proof's complement flip reverses the scan
        best, best_score = cands[0], -1.0
        for i in cands:
            score = eps[i - 1] ** inv_beta + (1.0 - eps[i]) ** inv_beta
            if score > best_score:
                best, best_score = i, score
        ball = dx <= diam * (best - 1) / width
        outer = dx > diam * best / width
        b_tree = rec(idx[ball])
        if not outer.any():
            return b_tree
        c_tree = rec(idx[outer])
        return internal(diam / width, [b_tree, c_tree])

    tree = rec(np.arange(n))
    subset = tuple(leaf_points(tree))
    measured, dominated = measure_against(M, tree)
    assert dominated, "shell extraction lost domination"
    return Extraction(subset=subset, tree=tree,
                      guaranteed_size=n ** (1.0 / beta),
                      guaranteed_factor=float(width),
                      measured_factor=measured,
                      meta={"t": t, "beta": beta, "beta_eff": beta_eff})


# ---------------------------------------------------------------------------
# h-sparse subtrees

def sparse_subtree(t: HstNode, h: int) -> HstNode:
    """Largest subtree whose branching vertices are pairwise >= h edges apart.

    Exact maximizer of the DP
        g(leaf, i) = 1
        g(T, i>0) = max_j g(T_j, i-1)
        g(T, 0)   = max(sum_j g(T_j, h-1), max_j g(T_j, 0))
    with at least n^(1/h) leaves.  The result keeps original labels; chains of
    degenerate vertices are retained (coalesce separately if needed).
    """
    if h < 1:
        raise ValueError("h must be >= 1")
    g: dict = {}
    choice: dict = {}

    def G(node: HstNode, i: int) -> int:
        key = (id(node), i)
        if key in g:
            return g[key]
        if node.is_leaf:
            val, ch = 1, ("leaf",)
        elif i > 0:
            best, bj = -1, 0
            for j, c in enumerate(node.children):
                v = G(c, i - 1)
                if v > best:
                    best, bj = v, j
            val, ch = best, ("descend", bj)
        else:
            branch = sum(G(c, h - 1) for c in node.children)
            best, bj = -1, 0
            for j, c in enumerate(node.children):
                v = G(c, 0)
                if v > best:
                    best, bj = v, j
            if branch >= best:
                val, ch = branch, ("branch",)
            else:
                val, ch = best, ("descend", bj)
        g[key] = val
        choice[key] = ch
        return val

    G(t, 0)

    def build(node: HstNode, i: int) -> HstNode:
        ch = choice[(id(node), i)]
        if ch[0] == "leaf":
            return node
        if ch[0] == "branch":
            return internal(node.delta, [build(c, h - 1) for c in node.children])
        j = ch[1]
        return internal(node.delta, [build(node.children[j], max(i - 1, 0))])

    return build(t, 0)


def is_h_sparse(t: HstNode, h: int) -> bool:
    """Branching (>=2 children) vertices pairwise >= h edges apart."""
    paths = []  # root paths (as tuples of vertex ids) of branching vertices

    def walk(node: HstNode, path: tuple):
        if node.is_leaf:
            return
        here = path + (id(node),)
        if len(node.children) >= 2:
            paths.append(here)
        for c in node.children:
            walk(c, here)

    walk(t, ())
    for a, b in combinations(paths, 2):
        common = 0
        for x, y in zip(a, b):
            if x != y:
                break
            common += 1
        if (len(a) - common) + (len(b) - common) < h:
            return False
    return True


def prune_to_khst(t: HstNode, k: float, ell: float) -> Extraction:
    """1-HST -> subtree that is a k-HST, via ell-HST rounding plus the
    h-sparse DP with h = ceil(log_ell k), then coalescing.

    The output labels are rescaled so the input metric dominates the output
    exactly; the max input/output ratio (the measured factor) is <= ell.
    """
    if not k > 1:
        raise ValueError("k must be > 1")
    if not (1 < ell <= k):
        raise ValueError("ell must be in (1, k]")
    validate_hst(t)
    n = len(leaf_points(t))
    h = ceil_int(math.log(k, ell))
    rounded = to_ell_hst(t, ell)
    sub = remove_degenerate(sparse_subtree(rounded, h))
    sub_pts = leaf_points(sub)
    if len(sub_pts) == 1:
        out, measured = sub, 1.0
    else:
        _, out_m = hst_metric_matrix(sub)
        all_pts, all_m = hst_metric_matrix(t)
        pos = {pt: i for i, pt in enumerate(all_pts)}
        sel = [pos[pt] for pt in sub_pts]
        in_m = all_m[np.ix_(sel, sel)]
        iu = np.triu_indices(len(sub_pts), k=1)
        max_ratio = float((out_m[iu] / in_m[iu]).max())  # >= 1 by the rounding direction
        out = scale_tree(sub, 1.0 / max_ratio)
        _, out_m2 = hst_metric_matrix(out)
        measured = float((in_m[iu] / out_m2[iu]).max())
    return Extraction(subset=tuple(sub_pts), tree=out,
                      guaranteed_size=n ** (1.0 / h),
                      guaranteed_factor=float(ell),
                      measured_factor=measured,
                      meta={"h": h, "k": k, "ell": ell})


def ramsey_extract(M: MetricSpace, beta: float, k: float, ell: float) -> Extraction:
    """Shell extraction followed by k-HST pruning.

    Guarantees |subset| >= n^(1/(beta*ceil(log_ell k))) and a dominated factor
    of ell*(2t+1); beta = ell = 2 matches the headline parameterization.
    """
    first = shell_extract(M, beta)
    second = prune_to_khst(first.tree, k, ell)
    measured, dominated = measure_against(M, second.tree)
    assert dominated, "composition lost domination"
    h = second.meta["h"]
    return Extraction(subset=second.subset, tree=second.tree,
                      guaranteed_size=M.n ** (1.0 / (beta * h)),
                      guaranteed_factor=ell * first.guaranteed_factor,
                      measured_factor=measured,
                      meta={"t": first.meta["t"], "h": h, "beta": beta,
                            "k": k, "ell": ell,
                            "shell_size": len(first.subset)})


# ---------------------------------------------------------------------------
# greedy binary codes (distance-d codes meeting the entropy volume bound)

@dataclass(frozen=True)
class BinaryCode:
    h: int
    words: tuple          # ints, each < 2^h
    min_distance: int     # guaranteed lower bound on pairwise Hamming distance

    def to_dict(self) -> dict:
        return {"h": self.h, "words": list(self.words), "min_distance": self.min_distance}


def binary_entropy(alpha: float) -> float:
    if alpha <= 0 or alpha >= 1:
        return 0.0
    return -(alpha * math.log2(alpha) + (1 - alpha) * math.log2(1 - alpha))


def gv_code(h: int, alpha) -> BinaryCode:
    """Greedy lexicographic code with min Hamming distance >= ceil(alpha*h)
    and size >= 2^(h(1-H_2(alpha))); alpha in (0, 0.5)."""
    if h < 1 or h > 24:
        raise ValueError("h out of budget (1..24)")
    a = float(alpha)
    if not (0 < a < 0.5):
        raise ValueError("alpha must be in (0, 0.5)")
    d = ceil_int(a * h)
    if d < 1:
        d = 1
    deltas = [0]
    for r in range(1, d):
        for pos in combinations(range(h), r):
            mask = 0
            for p in pos:
                mask |= 1 << p
            deltas.append(mask)
    size = 1 << h
    blocked = bytearray(size)
    words = []
    for w in range(size):
        if not blocked[w]:
            words.append(w)
            for dm in deltas:
                blocked[w ^ dm] = 1
    return BinaryCode(h=h, words=tuple(words), min_distance=d)


def code_distance_ok(code: BinaryCode) -> bool:
    """Exhaustive check that no two codewords are closer than min_distance."""
    wordset = set(code.words)
    deltas = []
    for r in range(1, code.min_distance):
        for pos in combinations(range(code.h), r):
            mask = 0
            for p in pos:
                mask |= 1 << p
            deltas.append(mask)
    for w in code.words:
        for dm in deltas:
            if (w ^ dm) in wordset:
                return False
    return True


# ---------------------------------------------------------------------------
# mesh extraction (corner sub-mesh recursion driven by the code)

def mesh_extract(s: int, h: int, p, max_points: int = 10 ** 6) -> Extraction:
    """[s]^h with the l_p norm: subset that 12-approximates a 9-HST.

    Sub-meshes of side ceil(s/9) are placed at code-word corners; recursion
    side s <- ceil(s/9).  Root label at side s is h^(1/p)*(s-1)/12.
    """
    if s < 1 or h < 1:
        raise ValueError("need s >= 1 and h >= 1")
    n_total = s ** h
    if n_total > max_points:
        raise ValueError(f"mesh has {n_total} points, over the budget of {max_points}")
    pinf = p == float("inf") or p == "inf"
    pval = float("inf") if pinf else float(p)
    if not pinf and pval < 1:
        raise ValueError("p must be >= 1 or inf")
    hroot = 1.0 if pinf else h ** (1.0 / pval)
    code = gv_code(h, 1.0 / 3.0)
    levels = []

    def build(side: int, offset: tuple) -> HstNode:
        if side == 1:
            return leaf(",".join(str(c) for c in offset))
        label = hroot * (side - 1) / 12.0
        nxt = -(-side // 9)  # ceil(side/9)
        kids = []
        for w in code.words:
            child_off = tuple(
                offset[ax] + ((w >> (h - 1 - ax)) & 1) * (side - nxt)
                for ax in range(h))
            kids.append(build(nxt, child_off))
        return internal(label, kids)

    side = s
    while side > 1:
        levels.append(side)
        side = -(-side // 9)
    tree = build(s, (0,) * h)
    subset = tuple(leaf_points(tree))
    coords = [tuple(int(c) for c in pt.split(",")) for pt in subset]
    pts_n = len(subset)
    if pts_n == 1:
        measured, dominated = 1.0, True
    else:
        _, tm = hst_metric_matrix(tree)
        worst, ok = 0.0, True
        for i in range(pts_n):
            for j in range(i + 1, pts_n):
                actual = mesh_distance(coords[i], coords[j], pval)
                ratio = actual / tm[i, j]
                worst = max(worst, ratio)
                if ratio < 1 - 1e-9:
                    ok = False
        measured, dominated = worst, ok
    assert dominated, "mesh extraction lost domination"
    return Extraction(subset=subset, tree=tree,
                      guaranteed_size=2.0 ** (0.08 * h * math.log(max(s, 1), 9)) if s > 1 else 1.0,
                      guaranteed_factor=12.0,
                      measured_factor=measured,
                      meta={"s": s, "h": h, "p": "inf" if pinf else pval,
                            "levels": levels, "code_size": len(code.words),
                            "n_total": n_total})


# ---------------------------------------------------------------------------
# branch selectors

@dataclass(frozen=True)
class BranchChoice:
    kind: str          # "binary" | "equal"
    ell: int | None    # set for "equal"


def select_branching(n_list) -> BranchChoice:
    """Either sqrt(n1)+sqrt(n2) >= sqrt(n), or some ell >= 3 has
    ell*sqrt(n_ell) > sqrt(n); decided exactly in rational arithmetic."""
    vals = [frac(x) for x in n_list]
    if not vals:
        raise ValueError("empty list")
    if any(v <= 0 for v in vals):
        raise ValueError("values must be positive")
    for a, b in zip(vals, vals[1:]):
        if b > a:
            raise ValueError("values must be non-increasing")
    n = sum(vals)
    n1 = vals[0]
    n2 = vals[1] if len(vals) > 1 else Fraction(0)
    rest = n - n1 - n2
    # sqrt(n1)+sqrt(n2) >= sqrt(n)  <=>  rest <= 0 or 4*n1*n2 >= rest^2
    if rest <= 0 or 4 * n1 * n2 >= rest * rest:
        return BranchChoice("binary", None)
    for ell in range(3, len(vals) + 1):
        if ell * ell * vals[ell - 1] > n:
            return BranchChoice("equal", ell)
    raise AssertionError("selector exhausted; the dichotomy should always apply")


def select_branching_log(log_n) -> BranchChoice:
    """select_branching on values given as natural logs (overflow-safe)."""
    ln = list(map(float, log_n))
    if not ln:
        raise ValueError("empty list")
    for a, b in zip(ln, ln[1:]):
        if b > a + 1e-12:
            raise ValueError("values must be non-increasing")
    top = max(ln)
    log_total = top + math.log(sum(math.exp(v - top) for v in ln))
    lhs = ln[0] / 2 + math.log1p(math.exp((ln[1] - ln[0]) / 2)) if len(ln) > 1 else ln[0] / 2
    if lhs >= log_total / 2:
        return BranchChoice("binary", None)
    for ell in range(3, len(ln) + 1):
        if math.log(ell) + ln[ell - 1] / 2 > log_total / 2:
            return BranchChoice("equal", ell)
    raise AssertionError("selector exhausted; the dichotomy should always apply")


def bkrs_select(n_list) -> str:
    """Which of b, 2*n2^(1/(2*sqrt(log2 n))), n1^(1/(2*sqrt(log2 n)))+1 attains
    2^(sqrt(log2 n)/2); first match in that order ('wide'|'heavy2'|'heavy1')."""
    vals = [int(x) for x in n_list]
    if not vals:
        raise ValueError("empty list")
    if any(v <= 0 for v in vals):
        raise ValueError("values must be positive integers")
    for a, b in zip(vals, vals[1:]):
        if b > a:
            raise ValueError("values must be non-increasing")
    n = sum(vals)
    b = len(vals)
    with mpmath.workdps(40):
        if n == 1:
            return "wide"
        L = mpmath.log(n, 2)
        thr = mpmath.power(2, mpmath.sqrt(L) / 2)
        tie = mpmath.mpf("1e-25")
        if b - thr >= -tie:
            return "wide"
        if len(vals) > 1:
            t2 = 2 * mpmath.power(vals[1], 1 / (2 * mpmath.sqrt(L)))
            if t2 - thr >= -tie:
                return "heavy2"
        t1 = mpmath.power(vals[0], 1 / (2 * mpmath.sqrt(L))) + 1
        if t1 - thr >= -tie:
            return "heavy1"
    raise AssertionError("one of the three terms must attain the threshold")


# ---------------------------------------------------------------------------
# subclass extractors

def _first_leaf(node: HstNode) -> HstNode:
    while not node.is_leaf:
        node = node.children[0]
    return node


def _counts_sorted(node: HstNode):
    kids = list(node.children)
    counts = [len(leaf_points(c)) for c in kids]
    order = sorted(range(len(kids)), key=lambda i: (-counts[i], i))
    return [kids[i] for i in order], [counts[i] for i in order]


def binary_balanced_extract(t: HstNode, m: int) -> HstNode | None:
    """Subtree with exactly m leaves classifying binary/balanced, for any
    m <= ceil(sqrt(n)); recursion driven by select_branching on child sizes."""
    validate_hst(t)
    t = remove_degenerate(t)
    n = len(leaf_points(t))
    cap = math.isqrt(n - 1) + 1 if n > 1 else 1  # ceil(sqrt(n))
    if not 0 <= m <= cap:
        raise ValueError(f"m must be in [0, {cap}]")

    def ext(node: HstNode, want: int) -> HstNode | None:
        if want == 0:
            return None
        if node.is_leaf:
            return node
        kids, counts = _counts_sorted(node)
        choice = select_branching(counts)
        if choice.kind == "binary":
            c1 = math.isqrt(counts[0] - 1) + 1
            c2 = math.isqrt(counts[1] - 1) + 1 if len(counts) > 1 else 0
            m1 = min(want, c1)
            m2 = want - m1
            assert m2 <= c2, "binary split exceeded the child cap"
            parts = [ext(kids[0], m1)]
            if m2 > 0:
                parts.append(ext(kids[1], m2))
        else:
            ell = choice.ell
            lo, extra = divmod(want, ell)
            parts = []
            for i in range(ell):
                mi = lo + (1 if i < extra else 0)
                if mi > 0:
                    parts.append(ext(kids[i], mi))
        parts = [x for x in parts if x is not None]
        if not parts:
            return None
        if len(parts) == 1:
            return parts[0]
        return internal(node.delta, parts)

    return ext(t, m)


def special_extract(t: HstNode, kind: str, m: int | None = None, k: float = 1.0) -> HstNode:
    """Extract a subtree classifying as the requested subclass.

    kind='krr': uniform star of size >= max out-degree, or a super-increasing
    caterpillar along the longest vertical path.  kind='bfm': binarize, take
    the longest vertical path, adjoin one side leaf per path vertex (>= log2 n
    leaves).  kind='bkrs': exactly m <= ceil(2^(sqrt(log2 n)/2)) leaves.
    """
    validate_hst(t)
    t = remove_degenerate(t)
    n = len(leaf_points(t))
    if kind == "krr":
        if t.is_leaf:
            return t
        best, best_deg = None, 0
        stack = [t]
        while stack:
            node = stack.pop()
            if not node.is_leaf:
                if len(node.children) > best_deg:
                    best, best_deg = node, len(node.children)
                stack.extend(node.children)
        if best_deg >= math.ceil(math.log2(max(n, 2))):
            return internal(best.delta, [_first_leaf(c) for c in best.children])
        return _caterpillar(t)
    if kind == "bfm":
        return _caterpillar(_binarize(t))
    if kind == "bkrs":
        if m is None:
            raise ValueError("bkrs extraction needs a target size m")
        cap = math.ceil(2 ** (math.sqrt(math.log2(n)) / 2)) if n > 1 else 1
        if not 1 <= m <= cap:
            raise ValueError(f"m must be in [1, {cap}]")
        return _bkrs(t, m)
    raise ValueError(f"unknown kind {kind!r}")


def _binarize(node: HstNode) -> HstNode:
    """Split high-degree vertices into equal-label combs (metric unchanged)."""
    if node.is_leaf:
        return node
    kids = [_binarize(c) for c in node.children]
    while len(kids) > 2:
        right = internal(node.delta, kids[-2:])
        kids = kids[:-2] + [right]
    return internal(node.delta, kids)


def _caterpillar(t: HstNode) -> HstNode:
    """Longest vertical path plus one side leaf per path vertex."""
    if t.is_leaf:
        return t

    def deepest(node: HstNode):
        if node.is_leaf:
            return 0, [(node, None)]
        best_d, best_path = -1, None
        for i, c in enumerate(node.children):
            d, path = deepest(c)
            if d + 1 > best_d:
                best_d, best_path = d + 1, [(node, i)] + path
        return best_d, best_path

    _, path = deepest(t)
    result = path[-1][0]  # the leaf at the end
    for node, on_path_idx in reversed(path[:-1]):
        side = next((c for i, c in enumerate(node.children) if i != on_path_idx), None)
        if side is None:
            continue  # degenerate vertex; nothing to adjoin
        result = internal(node.delta, [_first_leaf(side), result])
    return result


def _bkrs(node: HstNode, m: int) -> HstNode:
    node = remove_degenerate(node)
    if m == 1 or node.is_leaf:
        return _first_leaf(node)
    kids, counts = _counts_sorted(node)
    sel = bkrs_select(counts)
    order = {"wide": 0, "heavy2": 1, "heavy1": 2}[sel]
    attempts = [("wide", "heavy2", "heavy1")[(order + i) % 3] for i in range(3)]
    for attempt in attempts:
        if attempt == "wide" and len(kids) >= m:
            return internal(node.delta, [_first_leaf(kids[i]) for i in range(m)])
        if attempt == "heavy2" and len(kids) >= 2:
            hi, lo = -(-m // 2), m // 2
            if counts[0] >= hi and counts[1] >= lo:
                return internal(node.delta, [_bkrs(kids[0], hi), _bkrs(kids[1], lo)])
        if attempt == "heavy1" and len(kids) >= 2 and counts[0] >= m - 1:
            return internal(node.delta, [_bkrs(kids[0], m - 1), _first_leaf(kids[1])])
    raise AssertionError(f"cannot place {m} leaves under a vertex with sizes {counts}")


# ---------------------------------------------------------------------------
# tight examples

def tight_example(case: int, k: float, ell: float, h: int, eps: float | None = None,
                  max_points: int = 10 ** 5):
    """Label-geometric complete trees witnessing extraction tightness.

    Returns (tree, meta); labels at edge depth i are ell'^(-i) with
    ell' = (1+eps)*ell < k.  Cases: 1 binary of height h*ceil(log_ell' k);
    2 same height with out-degree 2^h; 3 out-degree h (needs
    h >= ceil(log_ell' k)); 4 binary of height h.
    """
    if not (k > ell > 1):
        raise ValueError("need k > ell > 1")
    if eps is None:
        eps = (k / ell - 1) / 2
    ellp = (1 + eps) * ell
    if not ellp < k:
        raise ValueError("(1+eps)*ell must stay below k")
    g = ceil_int(math.log(k, ellp))
    if case == 1:
        height, degree = h * g, 2
    elif case == 2:
        height, degree = h * g, 2 ** h
    elif case == 3:
        if h < g:
            raise ValueError(f"case 3 needs h >= ceil(log_ell' k) = {g}")
        height, degree = h * g, h
    elif case == 4:
        height, degree = h, 2
    else:
        raise ValueError("case must be 1..4")
    n = degree ** height
    if n > max_points:
        raise ValueError(f"tree would have {n} leaves, over the budget of {max_points}")

    def build(depth: int, tag: str) -> HstNode:
        if depth == height:
            return leaf(tag)
        return internal(ellp ** (-depth),
                        [build(depth + 1, f"{tag}.{j}") for j in range(degree)])

    tree = build(0, "r")
    exact_ceiling = {1: 2 ** h, 2: 2 ** (2 * h), 3: h + 1, 4: h + 1}[case]
    claimed = {
        1: n ** (1.0 / math.log(k, ell)) + 1,
        2: 2.0 ** (2 * math.sqrt(math.log2(n) / math.log(k, ell))),
        3: h + 1,
        4: math.log2(n) + 1,
    }[case]
    meta = {"case": case, "k": k, "ell": ell, "ell_prime": ellp, "eps": eps,
            "h": h, "height": height, "degree": degree, "n": n,
            "exact_ceiling": exact_ceiling, "claimed_ceiling": claimed}
    return tree, meta
