"""Validated finite metric spaces: construction, restriction, scaling, distortion.

Distances are 64-bit floats; the metric axioms (symmetry, zero diagonal,
positivity off the diagonal, triangle inequality) are checked with relative
tolerance ``DEFAULT_TOL``.  All values are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

DEFAULT_TOL = 1e-9


class MetricError(ValueError):
    """Raised when a matrix fails a metric axiom; names the axiom and a witness."""

    def __init__(self, axiom: str, witness: tuple, message: str):
        self.axiom = axiom
        self.witness = witness
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class MetricSpace:
    """Finite metric space: point ids plus a validated distance matrix."""

    points: tuple
    dist: np.ndarray  # (n, n) float64, read-only

    @property
    def n(self) -> int:
        return len(self.points)

    def index(self, point) -> int:
        return self.points.index(point)

    def d(self, a, b) -> float:
        return float(self.dist[self.index(a), self.index(b)])

    def to_dict(self) -> dict:
        return {"points": list(self.points), "dist": [[float(x) for x in row] for row in self.dist]}

    @staticmethod
    def from_dict(obj: dict, tol: float = DEFAULT_TOL) -> "MetricSpace":
        return validate_metric(obj["dist"], obj["points"], tol=tol)


def _freeze(m: np.ndarray) -> np.ndarray:
    m = np.array(m, dtype=float)
    m.setflags(write=False)
    return m


def validate_metric(matrix, names=None, tol: float = DEFAULT_TOL) -> MetricSpace:
    """Check the metric axioms and build a MetricSpace, or raise MetricError.

    Triangle violations are flagged when d(i,k) > (d(i,j)+d(j,k)) * (1+tol).
    """
    m = np.array(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise MetricError("shape", m.shape, f"distance matrix must be square, got {m.shape}")
    n = m.shape[0]
    if n < 1:
        raise MetricError("shape", m.shape, "need at least one point")
    if names is None:
        names = [f"p{i}" for i in range(n)]
    names = tuple(str(x) for x in names)
    if len(names) != n:
        raise MetricError("shape", (len(names), n), "point-name count does not match matrix size")
    if len(set(names)) != n:
        raise MetricError("names", names, "duplicate point ids")
    if not np.all(np.isfinite(m)):
        i, j = np.argwhere(~np.isfinite(m))[0]
        raise MetricError("finite", (names[i], names[j]), f"non-finite distance at ({names[i]},{names[j]})")
    bad = np.argwhere(m < 0)
    if len(bad):
        i, j = bad[0]
        raise MetricError("nonnegative", (names[i], names[j]),
                          f"negative distance d({names[i]},{names[j]}) = {m[i, j]}")
    if np.any(np.diag(m) != 0):
        i = int(np.argwhere(np.diag(m) != 0)[0][0])
        raise MetricError("identity", (names[i],), f"d({names[i]},{names[i]}) = {m[i, i]} != 0")
    scale = np.maximum(np.abs(m), np.abs(m.T))
    asym = np.abs(m - m.T) > tol * np.maximum(scale, 1e-300)
    if np.any(asym):
        i, j = np.argwhere(asym)[0]
        raise MetricError("symmetry", (names[i], names[j]),
                          f"asymmetry: d({names[i]},{names[j]})={m[i, j]} vs d({names[j]},{names[i]})={m[j, i]}")
    m = (m + m.T) / 2.0  # exact symmetrization within tolerance
    if n > 1:
        off = m + np.diag([np.inf] * n)
        if np.any(off == 0):
            i, j = np.argwhere(off == 0)[0]
            raise MetricError("positivity", (names[i], names[j]),
                              f"zero distance between distinct points {names[i]},{names[j]}")
        # triangle: d[i,k] <= d[i,j] + d[j,k] for all j
        through = m[:, :, None] + m[None, :, :]  # through[i,j,k]
        best = through.min(axis=1)
        viol = m > best * (1 + tol)
        if np.any(viol):
            i, k = np.argwhere(viol)[0]
            j = int(np.argmin(through[i, :, k]))
            raise MetricError(
                "triangle", (names[i], names[k], names[j]),
                f"triangle violation: d({names[i]},{names[k]})={m[i, k]} > "
                f"d({names[i]},{names[j]})+d({names[j]},{names[k]})={through[i, j, k]}")
    return MetricSpace(points=names, dist=_freeze(m))


def restrict(M: MetricSpace, subset) -> MetricSpace:
    """Subspace on the given points; distances copied exactly."""
    subset = list(subset)
    if not subset:
        raise ValueError("subset must be nonempty")
    idx = []
    for p in subset:
        if p not in M.points:
            raise KeyError(f"unknown point id {p!r}")
        idx.append(M.index(p))
    sub = M.dist[np.ix_(idx, idx)]
    return MetricSpace(points=tuple(subset), dist=_freeze(sub))


def scale(M: MetricSpace, gamma: float) -> MetricSpace:
    """Multiply every distance by gamma > 0."""
    if not gamma > 0:
        raise ValueError(f"scale factor must be positive, got {gamma}")
    return MetricSpace(points=M.points, dist=_freeze(M.dist * float(gamma)))


def diameter(M: MetricSpace):
    """Max pairwise distance and one attaining pair (singleton -> 0)."""
    if M.n == 1:
        return 0.0, (M.points[0], M.points[0])
    i, j = np.unravel_index(int(np.argmax(M.dist)), M.dist.shape)
    return float(M.dist[i, j]), (M.points[i], M.points[j])


@dataclass(frozen=True)
class ApproxReport:
    """Distortion of M relative to a candidate approximation M2 on the same points.

    ``dominated`` means d_{M2} <= d_M everywhere; ``alpha`` is then the max
    ratio d_M/d_{M2} (so M2 <= M <= alpha*M2).  ``optimal_rescale`` is the
    factor gamma* such that gamma*·M2 stays dominated with the least alpha.
    """

    alpha: float
    dominated: bool
    worst_pair: tuple
    optimal_rescale: float
    rescaled_alpha: float


def approximation_factor(M: MetricSpace, M2: MetricSpace, tol: float = DEFAULT_TOL) -> ApproxReport:
    if M.points != M2.points:
        if set(M.points) != set(M2.points):
            raise ValueError("point sets differ")
        M2 = restrict(M2, M.points)
    if M.n == 1:
        return ApproxReport(1.0, True, (M.points[0], M.points[0]), 1.0, 1.0)
    iu = np.triu_indices(M.n, k=1)
    a = M.dist[iu]
    b = M2.dist[iu]
    if np.any(b <= 0):
        raise ValueError("candidate approximation has a zero off-diagonal distance")
    ratios = a / b
    hi = int(np.argmax(ratios))
    lo = int(np.argmin(ratios))
    dominated = bool(ratios[lo] >= 1 - tol)
    alpha = float(ratios[hi])
    worst = (M.points[iu[0][hi]], M.points[iu[1][hi]])
    gamma = float(ratios[lo])
    rescaled = float(ratios[hi] / ratios[lo])
    return ApproxReport(alpha=alpha, dominated=dominated, worst_pair=worst,
                        optimal_rescale=gamma, rescaled_alpha=rescaled)


def transfer_bound(r_prime: float, alpha: float) -> float:
    """Lower bound transferred through an alpha-approximation: r'/alpha."""
    if not r_prime > 0:
        raise ValueError("r' must be positive")
    if alpha < 1:
        raise ValueError("approximation factor must be >= 1")
    return r_prime / alpha


def dedupe(matrix, names=None, tol: float = DEFAULT_TOL) -> MetricSpace:
    """Collapse duplicate points (zero off-diagonal distances) and validate."""
    m = np.array(matrix, dtype=float)
    n = m.shape[0]
    if names is None:
        names = [f"p{i}" for i in range(n)]
    keep = []
    for i in range(n):
        if all(m[i, j] > 0 or m[j, i] > 0 for j in keep):
            keep.append(i)
    return validate_metric(m[np.ix_(keep, keep)], [names[i] for i in keep], tol=tol)


def mesh_distance(a, b, p) -> float:
    """l_p distance between integer grid points; p may be math.inf."""
    diffs = [abs(x - y) for x, y in zip(a, b)]
    if p == float("inf"):
        return float(max(diffs))
    if p == 1:
        return float(sum(diffs))
    if p == 2:
        return float(np.hypot.reduce(np.array(diffs, dtype=float))) if len(diffs) > 1 else float(diffs[0])
    return float(sum(d ** p for d in diffs) ** (1.0 / p))


def generate(kind: str, *, n=None, b=None, delta=1.0, step=1.0, s=None, h=None, p=2,
             max_points: int = 20000) -> MetricSpace:
    """Standard spaces: uniform(b, delta), path(n, step), mesh(s, h, p)."""
    if kind == "uniform":
        if b is None or b < 1:
            raise ValueError("uniform space needs b >= 1")
        if not delta > 0:
            raise ValueError("uniform space needs delta > 0")
        m = np.full((b, b), float(delta))
        np.fill_diagonal(m, 0.0)
        return validate_metric(m, [f"v{i}" for i in range(b)])
    if kind == "path":
        if n is None or n < 1:
            raise ValueError("path needs n >= 1")
        if not step > 0:
            raise ValueError("path needs step > 0")
        idx = np.arange(n, dtype=float)
        m = np.abs(idx[:, None] - idx[None, :]) * float(step)
        return validate_metric(m, [str(i) for i in range(n)])
    if kind == "mesh":
        if s is None or h is None or s < 1 or h < 1:
            raise ValueError("mesh needs s >= 1 and h >= 1")
        npts = s ** h
        if npts > max_points:
            raise ValueError(f"mesh would have {npts} points, over the budget of {max_points}")
        coords = list(product(range(s), repeat=h))
        m = np.zeros((npts, npts))
        for i in range(npts):
            for j in range(i + 1, npts):
                m[i, j] = m[j, i] = mesh_distance(coords[i], coords[j], p)
        return validate_metric(m, [",".join(map(str, c)) for c in coords])
    raise ValueError(f"unknown space kind {kind!r}")
