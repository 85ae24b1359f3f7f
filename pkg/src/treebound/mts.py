"""(Unfair) metrical task systems: work functions, exact offline optima,
online algorithms with cost accounting, and an expectimax oracle.

Conventions: a task is (point index, cost).  Online cost for serving a task
by moving i -> j is s*d(i,j) + r_j*c_j (move first, pay local at the
destination); offline costs are plain (r = 1, s = 1).  Exact mode carries
Fractions end to end (floats convert exactly).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .metric import MetricSpace
from .util import derive_seed, frac


@dataclass(frozen=True, eq=False)
class Umts:
    """Metric plus per-point online cost ratios and a distance ratio."""

    metric: MetricSpace
    r: tuple
    s: float = 1.0

    def __post_init__(self):
        if len(self.r) != self.metric.n:
            raise ValueError("need one cost ratio per point")
        if not self.s > 0:
            raise ValueError("distance ratio must be positive")

    @property
    def b(self) -> int:
        return self.metric.n

    def to_dict(self) -> dict:
        return {"metric": self.metric.to_dict(), "r": list(map(float, self.r)),
                "s": float(self.s)}


def fair_umts(M: MetricSpace) -> Umts:
    return Umts(metric=M, r=(1.0,) * M.n, s=1.0)


def umts_normalize(U: Umts):
    """Fold the distance ratio into the cost ratios: (M; r_i; s) -> (M; r_i/s; 1).

    Returns (normalized UMTS, s); competitive ratios convert by the factor s.
    """
    if U.s == 1.0:
        return U, 1.0
    return Umts(metric=U.metric, r=tuple(ri / U.s for ri in U.r), s=1.0), U.s


# ---------------------------------------------------------------------------
# work functions (offline costs)

@dataclass(frozen=True)
class WorkFunction:
    values: tuple
    base: int  # starting point index


def wf_start(M: MetricSpace, u0: int, exact: bool = False) -> WorkFunction:
    row = M.dist[u0]
    vals = tuple(frac(x) for x in row) if exact else tuple(float(x) for x in row)
    return WorkFunction(values=vals, base=u0)


def wf_update(w: WorkFunction, task, M: MetricSpace, exact: bool = False) -> WorkFunction:
    """w'(i) = min_j (w(j) + c_j + d(j,i)); task is (point, cost) or a full vector."""
    n = M.n
    if isinstance(task, (tuple, list)) and len(task) == 2 and not isinstance(task[0], (list, tuple)):
        i0, c0 = task
        costs = [0] * n
        costs[int(i0)] = c0
    else:
        costs = list(task)
        if len(costs) != n:
            raise ValueError("cost vector length mismatch")
    conv = frac if exact else float
    costs = [conv(c) if not (isinstance(c, float) and math.isinf(c)) else math.inf
             for c in costs]
    base_plus = [w.values[j] + costs[j] for j in range(n)]
    vals = []
    for i in range(n):
        best = base_plus[i]
        for j in range(n):
            if j == i:
                continue
            cand = base_plus[j] + conv(M.dist[j, i])
            if cand < best:
                best = cand
        vals.append(best)
    return WorkFunction(values=tuple(vals), base=w.base)


def wf_is_lipschitz(w: WorkFunction, M: MetricSpace, tol: float = 1e-9) -> bool:
    n = M.n
    for i in range(n):
        for j in range(n):
            if float(w.values[i] - w.values[j]) > float(M.dist[i, j]) * (1 + tol) + tol:
                return False
    return True


def opt_cost(M: MetricSpace, tasks, u0: int, exact: bool = False):
    w = wf_start(M, u0, exact=exact)
    for task in tasks:
        w = wf_update(w, task, M, exact=exact)
    return min(w.values)


def opt0_cost(M: MetricSpace, tasks, u0: int, exact: bool = False):
    w = wf_start(M, u0, exact=exact)
    for task in tasks:
        w = wf_update(w, task, M, exact=exact)
    conv = frac if exact else float
    return min(w.values[i] + conv(M.dist[i, u0]) for i in range(M.n))


# ---------------------------------------------------------------------------
# online algorithms

@dataclass
class CostReport:
    total: float
    moving: float
    local: float
    moves: int

    def to_dict(self) -> dict:
        return {"total": self.total, "moving": self.moving,
                "local": self.local, "moves": self.moves}


class _StayPut:
    def __init__(self, U: Umts, u0: int):
        self.pos = u0

    def step(self, task, rng):
        return self.pos


class _RandomJump:
    """Jump to a uniformly random other point whenever hit by a positive task."""

    def __init__(self, U: Umts, u0: int):
        self.b = U.b
        self.pos = u0

    def step(self, task, rng):
        i, c = task
        if i == self.pos and c > 0 and self.b > 1:
            u = int(rng.integers(self.b - 1))
            self.pos = u + (1 if u >= self.pos else 0)
        return self.pos


class _Marking:
    """Positive tasks mark their point; when hit, move to a random unmarked
    point; when none remains, start a new phase (clear marks)."""

    def __init__(self, U: Umts, u0: int):
        self.b = U.b
        self.pos = u0
        self.marks = [False] * U.b

    def step(self, task, rng):
        i, c = task
        if c > 0:
            self.marks[i] = True
        if i == self.pos and c > 0 and self.b > 1:
            cands = [j for j in range(self.b) if not self.marks[j] and j != i]
            if not cands:
                self.marks = [False] * self.b
                self.marks[i] = True
                cands = [j for j in range(self.b) if j != i]
            self.pos = cands[int(rng.integers(len(cands)))]
        return self.pos


class _WfaLike:
    """Move to argmin_j(w(j) + d(pos, j)) for the updated offline work function."""

    def __init__(self, U: Umts, u0: int):
        self.U = U
        self.w = wf_start(U.metric, u0)
        self.pos = u0

    def step(self, task, rng):
        self.w = wf_update(self.w, task, self.U.metric)
        d = self.U.metric.dist
        scores = [self.w.values[j] + float(d[self.pos, j]) for j in range(self.U.b)]
        self.pos = int(np.argmin(scores))
        return self.pos


_BUILTINS = {"stay_put": _StayPut, "random_jump": _RandomJump,
             "marking": _Marking, "wfa_like": _WfaLike}


class OnlineAlgorithm:
    def __init__(self, name: str):
        if name not in _BUILTINS:
            raise ValueError(f"unknown algorithm {name!r}; have {sorted(_BUILTINS)}")
        self.name = name

    def fresh(self, U: Umts, u0: int):
        return _BUILTINS[self.name](U, u0)


def builtin_algorithm(name: str) -> OnlineAlgorithm:
    return OnlineAlgorithm(name)


def run_online(A, U: Umts, tasks, u0: int, rng) -> CostReport:
    """Simulate an online algorithm; deterministic given the rng (numpy Generator)."""
    if isinstance(A, str):
        A = builtin_algorithm(A)
    runner = A.fresh(U, u0)
    d = U.metric.dist
    moving = local = 0.0
    moves = 0
    pos = u0
    for task in tasks:
        i, c = task
        j = runner.step((int(i), float(c)), rng)
        if not 0 <= j < U.b:
            raise ValueError(f"algorithm returned invalid point {j}")
        if j != pos:
            moving += U.s * float(d[pos, j])
            moves += 1
            pos = j
        if j == i:
            local += U.r[j] * float(c)
    return CostReport(total=moving + local, moving=moving, local=local, moves=moves)


# ---------------------------------------------------------------------------
# expectimax oracle over explicit distribution trees

@dataclass(frozen=True, eq=False)
class DistTree:
    """Finite distribution over task sequences, as a prefix tree.

    branches: tuple of (probability, task, subtree); empty means end of
    sequence.  Probabilities at a node sum to 1.
    """

    branches: tuple = ()

    @property
    def is_leaf(self) -> bool:
        return not self.branches


def dist_tree_from_sequences(weighted) -> DistTree:
    """Build a prefix tree from [(prob, [task, ...]), ...]; probs sum to 1."""
    weighted = [(frac(p), list(seq)) for p, seq in weighted]
    total = sum(p for p, _ in weighted)
    if total != 1:
        raise ValueError(f"probabilities sum to {total}, not 1")

    def build(items) -> DistTree:
        done = [(p, seq) for p, seq in items if not seq]
        if done and len(done) != len(items):
            raise ValueError("sequences must not be proper prefixes of one another")
        if done:
            return DistTree()
        groups: dict = {}
        for p, seq in items:
            groups.setdefault(seq[0], []).append((p, seq[1:]))
        branches = []
        mass = sum(p for p, _ in items)
        for task, rest in groups.items():
            sub_mass = sum(p for p, _ in rest)
            branches.append((sub_mass / mass, task, build(rest)))
        return DistTree(branches=tuple(branches))

    return build(weighted)


def count_states(tree: DistTree) -> int:
    seen = set()
    stack = [tree]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        for _, _, sub in node.branches:
            stack.append(sub)
    return len(seen)


def expectimax_online_opt(tree: DistTree, U: Umts, u0: int,
                          budget: int = 10 ** 6, exact: bool = True):
    """Exact min over deterministic online algorithms of the expected cost,
    by backward induction over (sequence prefix, current point).

    Lower-bounds the expected cost of every (randomized) online algorithm on
    the distribution.
    """
    b = U.b
    if count_states(tree) * b > budget:
        raise ValueError("distribution tree exceeds the state budget")
    conv = frac if exact else float
    d = [[conv(U.metric.dist[i, j]) for j in range(b)] for i in range(b)]
    r = [conv(x) for x in U.r]
    s = conv(U.s)
    memo: dict = {}

    def value(node: DistTree, pos: int):
        key = (id(node), pos)
        if key in memo:
            return memo[key]
        if node.is_leaf:
            memo[key] = conv(0)
            return memo[key]
        total = conv(0)
        for p, (ti, tc), sub in node.branches:
            tc = conv(tc)
            best = None
            for j in range(b):
                cost = s * d[pos][j] + (r[j] * tc if j == ti else conv(0)) + value(sub, j)
                if best is None or cost < best:
                    best = cost
            total += conv(p) * best
        memo[key] = total
        return total

    return value(tree, u0)


# ---------------------------------------------------------------------------
# batched simulation (vectorized over samples x start points)

def pad_task_arrays(samples, pad_point: int = 0):
    """Pack variable-length task lists into (S, L) arrays, padded with
    zero-cost tasks (neutral for work functions and the builtin algorithms)."""
    S = len(samples)
    L = max((len(s) for s in samples), default=0)
    pts = np.zeros((S, max(L, 1)), dtype=np.int64)
    pts[:] = pad_point
    costs = np.zeros((S, max(L, 1)), dtype=float)
    for k, seq in enumerate(samples):
        for t, (i, c) in enumerate(seq):
            pts[k, t] = i
            costs[k, t] = c
    return pts, costs


def batch_opt0(M: MetricSpace, pts: np.ndarray, costs: np.ndarray):
    """Exact offline optima for every sample and every start point.

    Returns (opt (S,b), opt0 (S,b)) where the second index is the start.
    """
    d = M.dist
    b = M.n
    S, L = pts.shape
    w = np.broadcast_to(d[None, :, :], (S, b, b)).copy()  # w[s, u0, i]
    rows = np.arange(S)
    for t in range(L):
        c = np.zeros((S, b))
        c[rows, pts[:, t]] = costs[:, t]
        wc = w + c[:, None, :]
        new = wc.copy()
        for j in range(b):
            cand = wc[:, :, j][:, :, None] + d[j][None, None, :]
            np.minimum(new, cand, out=new)
        w = new
    opt = w.min(axis=2)
    opt0 = (w + d.T[None, :, :]).min(axis=2)  # + d(i, u0)
    return opt, opt0


def batch_run(name: str, U: Umts, pts: np.ndarray, costs: np.ndarray,
              starts, seed: int):
    """Vectorized builtin run: cost matrix (S, len(starts)).

    Semantics match the scalar runners; random draws come from an
    independent PCG64 stream derived from the seed.
    """
    d = U.metric.dist
    r = np.array(U.r, dtype=float)
    s = float(U.s)
    b = U.b
    S, L = pts.shape
    starts = np.array(list(starts), dtype=np.int64)
    B = len(starts)
    pos = np.broadcast_to(starts[None, :], (S, B)).copy()
    cost = np.zeros((S, B))
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, "batch", name)))
    rows = np.arange(S)

    if name == "marking":
        marks = np.zeros((S, B, b), dtype=bool)
    if name == "wfa_like":
        w = np.broadcast_to(d[starts][None, :, :], (S, B, b)).copy()

    for t in range(L):
        pt = pts[:, t]
        c = costs[:, t]
        active = c > 0
        hit = (pos == pt[:, None]) & active[:, None]
        if name == "stay_put":
            cost += np.where(hit, (r[pt] * c)[:, None], 0.0)
        elif name == "random_jump":
            u = rng.integers(0, max(b - 1, 1), size=(S, B))
            jump = np.minimum(u + (u >= pos), b - 1)
            new = np.where(hit, jump, pos)
            cost += s * d[pos, new]
            cost += np.where(new == pt[:, None], (r[pt] * c)[:, None], 0.0)
            pos = new
        elif name == "marking":
            marks[rows[active], :, pt[active]] = True
            cands = ~marks & (np.arange(b)[None, None, :] != pt[:, None, None])
            none_left = hit & ~cands.any(axis=2)
            if none_left.any():
                si, ui = np.nonzero(none_left)
                marks[si, ui, :] = False
                marks[si, ui, pt[si]] = True
                cands = ~marks & (np.arange(b)[None, None, :] != pt[:, None, None])
            scores = rng.random((S, B, b))
            scores[~cands] = np.inf
            choice = scores.argmin(axis=2)
            new = np.where(hit, choice, pos)
            cost += s * d[pos, new]
            cost += np.where(new == pt[:, None], (r[pt] * c)[:, None], 0.0)
            pos = new
        elif name == "wfa_like":
            cvec = np.zeros((S, b))
            cvec[rows, pt] = c
            wc = w + cvec[:, None, :]
            new_w = wc.copy()
            for j in range(b):
                cand = wc[:, :, j][:, :, None] + d[j][None, None, :]
                np.minimum(new_w, cand, out=new_w)
            w = new_w
            scores = w + d[pos]
            new = scores.argmin(axis=2)
            cost += s * d[pos, new]
            cost += np.where(new == pt[:, None], (r[new] * c[:, None]), 0.0)
            pos = new
        else:
            raise ValueError(f"no batch runner for {name!r}")
    return cost
