"""Task-system to (n-1)-server reduction on an n-point space.

A server configuration with n-1 servers and no co-location is identified
with its uncovered point.  The reduction turns an elementary task (i, delta)
into a server request at i iff

    wT(i) + delta >= min_{j != i} (wT(j) + d(i, j)),

simulates the server algorithm on the request stream (built obliviously to
its random bits), and mirrors its uncovered point as the task-system state.
Exact mode runs the ledgers in rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .metric import MetricSpace, diameter
from .mts import WorkFunction, wf_start, wf_update
from .util import frac


def reduce_task(wT: WorkFunction, task, M: MetricSpace, exact: bool = False) -> bool:
    """Eq-style request rule; ties emit a request."""
    i, delta = task
    conv = frac if exact else float
    lhs = wT.values[i] + conv(delta)
    rhs = min(wT.values[j] + conv(M.dist[j, i]) for j in range(M.n) if j != i)
    return lhs >= rhs


def server_wf_update(wS: WorkFunction, request: int, M: MetricSpace,
                     exact: bool = False) -> WorkFunction:
    """Uncovered-point work function: a request at l forces
    w'(l) = min_{j != l}(w(j) + d(l, j)); other values are unchanged."""
    conv = frac if exact else float
    vals = list(wS.values)
    vals[request] = min(wS.values[j] + conv(M.dist[j, request])
                        for j in range(M.n) if j != request)
    return WorkFunction(values=tuple(vals), base=wS.base)


def server_opt(M: MetricSpace, requests, start_uncovered: int, exact: bool = False):
    """Exact offline optimum for n-1 servers (end in any configuration)."""
    w = wf_start(M, start_uncovered, exact=exact)
    for l in requests:
        w = server_wf_update(w, int(l), M, exact=exact)
    return min(w.values)


class _GreedyServers:
    """Covered requests are free; an uncovered request is served by the
    nearest server (lowest index on ties)."""

    def __init__(self, M: MetricSpace, uncovered: int):
        self.M = M
        self.uncovered = uncovered

    def step(self, request: int, rng) -> int:
        if request != self.uncovered:
            return self.uncovered
        d = self.M.dist
        best, best_j = None, None
        for j in range(self.M.n):
            if j == request:
                continue
            dist = float(d[j, request])
            if best is None or dist < best:
                best, best_j = dist, j
        self.uncovered = best_j
        return self.uncovered


class _BalanceServers:
    """Serve with the server minimizing cumulative distance plus move cost."""

    def __init__(self, M: MetricSpace, uncovered: int):
        self.M = M
        self.uncovered = uncovered
        self.cum = {j: 0.0 for j in range(M.n) if j != uncovered}

    def step(self, request: int, rng) -> int:
        if request != self.uncovered:
            return self.uncovered
        d = self.M.dist
        best, best_j = None, None
        for j, c in sorted(self.cum.items()):
            score = c + float(d[j, request])
            if best is None or score < best:
                best, best_j = score, j
        self.cum[request] = self.cum.pop(best_j) + float(d[best_j, request])
        self.uncovered = best_j
        return self.uncovered


_SERVER_ALGS = {"greedy": _GreedyServers, "balance": _BalanceServers}


def server_algorithm(name: str):
    if name not in _SERVER_ALGS:
        raise ValueError(f"unknown server algorithm {name!r}; have {sorted(_SERVER_ALGS)}")
    return _SERVER_ALGS[name]


@dataclass
class StepRecord:
    task: tuple
    request: bool
    wT: tuple
    wS: tuple
    state: int          # A_T position (= A_S uncovered point) after the step
    lcost_T: object     # running totals
    mcost_T: object


@dataclass
class ReductionTrace:
    M: MetricSpace
    start: int
    steps: list = field(default_factory=list)
    requests: list = field(default_factory=list)
    lcost_T: object = 0.0
    mcost_T: object = 0.0
    mcost_S: object = 0.0
    exact: bool = False

    @property
    def cost_T(self):
        return self.lcost_T + self.mcost_T

    @property
    def cost_S(self):
        return self.mcost_S

    def final_wT(self):
        return self.steps[-1].wT if self.steps else None

    def to_dict(self) -> dict:
        return {
            "start": self.start,
            "requests": [int(s) for s in self.requests],
            "lcost_T": float(self.lcost_T),
            "mcost_T": float(self.mcost_T),
            "mcost_S": float(self.mcost_S),
            "cost_T": float(self.cost_T),
            "cost_S": float(self.cost_S),
            "steps": len(self.steps),
        }


def run_reduction(A_S, tasks, M: MetricSpace, start_uncovered: int, rng,
                  exact: bool = False) -> ReductionTrace:
    """Transform tasks -> requests, simulate the server algorithm, and record
    both cost ledgers.  The request stream depends only on the tasks."""
    if M.n < 2:
        raise ValueError("the reduction needs n >= 2 points")
    if isinstance(A_S, str):
        A_S = server_algorithm(A_S)
    runner = A_S(M, start_uncovered)
    conv = frac if exact else float
    wT = wf_start(M, start_uncovered, exact=exact)
    wS = wf_start(M, start_uncovered, exact=exact)
    trace = ReductionTrace(M=M, start=start_uncovered, exact=exact)
    zero = conv(0)
    trace.lcost_T = trace.mcost_T = trace.mcost_S = zero
    pos = start_uncovered
    for task in tasks:
        i, delta = int(task[0]), task[1]
        emit = reduce_task(wT, (i, delta), M, exact=exact)
        wT = wf_update(wT, (i, conv(delta)), M, exact=exact)
        if emit:
            new_unc = runner.step(i, rng)
            if new_unc == i:
                raise RuntimeError(f"server algorithm left the request at {i} unserved")
            wS = server_wf_update(wS, i, M, exact=exact)
            trace.requests.append(i)
            move = conv(M.dist[pos, new_unc])
            trace.mcost_S = trace.mcost_S + move
            trace.mcost_T = trace.mcost_T + move
            pos = new_unc
        else:
            if pos == i:
                trace.lcost_T = trace.lcost_T + conv(delta)
        trace.steps.append(StepRecord(task=(i, float(delta)), request=emit,
                                      wT=wT.values, wS=wS.values, state=pos,
                                      lcost_T=trace.lcost_T,
                                      mcost_T=trace.mcost_T))
    return trace


def verify_relation(trace: ReductionTrace, tol: float = 1e-9) -> dict:
    """Stepwise checks: wS <= wT pointwise, the running local-cost ledger
    lcost_T <= mcost_T + wT(state), and the final bound
    cost_T <= 2*cost_S + opt_T + diameter."""
    M = trace.M
    slack = 0 if trace.exact else tol
    for step_no, s in enumerate(trace.steps):
        for i in range(M.n):
            if s.wS[i] > s.wT[i] + slack * (1 + abs(float(s.wT[i]))):
                return {"ok": False, "step": step_no, "violation": "wS<=wT",
                        "point": i, "wS": float(s.wS[i]), "wT": float(s.wT[i])}
        bound = s.mcost_T + s.wT[s.state]
        if s.lcost_T > bound + slack * (1 + abs(float(bound))):
            return {"ok": False, "step": step_no, "violation": "lcost ledger",
                    "lcost_T": float(s.lcost_T), "bound": float(bound)}
    if trace.steps:
        opt_T = min(trace.steps[-1].wT)
    else:
        opt_T = 0.0
    diam, _ = diameter(M)
    lhs = trace.cost_T
    rhs = 2 * trace.cost_S + opt_T + (frac(diam) if trace.exact else diam)
    if lhs > rhs + slack * (1 + abs(float(rhs))):
        return {"ok": False, "step": None, "violation": "final bound",
                "cost_T": float(lhs), "bound": float(rhs)}
    return {"ok": True, "steps": len(trace.steps),
            "cost_T": float(trace.cost_T), "cost_S": float(trace.cost_S),
            "opt_T": float(opt_T), "requests": len(trace.requests)}
