"""Clustering on precomputed distance matrices.

Agglomerative clustering is driven by the Lance-Williams recurrence so
that any linkage works directly on a distance matrix; affinity propagation
runs the standard damped message-passing updates on similarities (negated
distances). Cluster quality is summarised by exemplar-based between-like
and within-like criteria.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .matrix import DistanceMatrix

__all__ = [
    "APResult",
    "ClusterAssignment",
    "Dendrogram",
    "LINKAGES",
    "MergeStep",
    "affinity_propagation",
    "criteria",
    "CriteriaResult",
    "cut",
    "exemplar",
    "hca",
]

LINKAGES = ("single", "average", "weighted", "ward")


def _values(m: DistanceMatrix | np.ndarray) -> np.ndarray:
    if isinstance(m, DistanceMatrix):
        return m.values
    vals = np.asarray(m, dtype=np.float64)
    if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
        raise ValueError("expected a square distance matrix")
    return vals


@dataclass(frozen=True)
class MergeStep:
    """One agglomeration: clusters ``left`` and ``right`` join at ``height``.

    Cluster ids 0..n-1 are the original items; the cluster created by step
    t gets id n + t. ``size`` is the member count of the new cluster.
    """

    left: int
    right: int
    height: float
    size: int


@dataclass(frozen=True, eq=False)
class Dendrogram:
    """Full merge history of an agglomerative run.

    ``inversions`` lists the step indices whose merge height dropped below
    the previous step's height. Ward heights on a plain dissimilarity
    matrix may do this; the inversions are reported rather than hidden.
    """

    n_items: int
    linkage: str
    steps: tuple[MergeStep, ...]
    inversions: tuple[int, ...]

    def heights(self) -> np.ndarray:
        return np.array([s.height for s in self.steps])


@dataclass(frozen=True, eq=False)
class ClusterAssignment:
    """Labels in [0, k) for each item, every cluster nonempty."""

    labels: np.ndarray
    k: int

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1:
            raise ValueError("labels must be a 1-D array")
        if self.k < 1 or labels.size < self.k:
            raise ValueError(f"invalid cluster count k={self.k} for {labels.size} items")
        present = np.unique(labels)
        if present.size != self.k or present[0] != 0 or present[-1] != self.k - 1:
            raise ValueError("labels must cover 0..k-1 with every cluster nonempty")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    def members(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.labels == c)


def hca(m: DistanceMatrix | np.ndarray, linkage: str = "average") -> Dendrogram:
    """Agglomerative clustering of a distance matrix via Lance-Williams.

    At each step the closest active pair merges (ties broken toward the
    lowest index pair) and the merged cluster's distances to the rest are
    rewritten by the linkage's recurrence. Ward runs the recurrence on
    squared dissimilarities and reports square-rooted heights.

    Parameters
    ----------
    m : DistanceMatrix or square ndarray
    linkage : {"single", "average", "weighted", "ward"}

    Returns
    -------
    Dendrogram
    """
    if linkage not in LINKAGES:
        raise ValueError(f"unknown linkage {linkage!r}; expected one of {', '.join(LINKAGES)}")
    vals = _values(m)
    n = vals.shape[0]
    if n < 1:
        raise ValueError("hca: empty matrix")
    work = vals.astype(np.float64).copy()
    if linkage == "ward":
        work = work ** 2
    np.fill_diagonal(work, np.inf)
    sizes = np.ones(n)
    cluster_id = np.arange(n)
    active = np.ones(n, dtype=bool)
    steps: list[MergeStep] = []
    inversions: list[int] = []
    prev_height = -np.inf
    for step in range(n - 1):
        i, j = divmod(int(np.argmin(work)), n)
        if i > j:  # argmin scans row-major, so (i, j) is already the
            i, j = j, i  # lowest-index pair; this is only a safeguard.
        d_ij = work[i, j]
        height = float(np.sqrt(max(d_ij, 0.0))) if linkage == "ward" else float(d_ij)
        others = active.copy()
        others[i] = others[j] = False
        k = np.flatnonzero(others)
        if linkage == "single":
            new = np.minimum(work[i, k], work[j, k])
        elif linkage == "average":
            new = (sizes[i] * work[i, k] + sizes[j] * work[j, k]) / (sizes[i] + sizes[j])
        elif linkage == "weighted":
            new = 0.5 * (work[i, k] + work[j, k])
        else:  # ward, on squared dissimilarities
            tot = sizes[i] + sizes[j] + sizes[k]
            new = ((sizes[i] + sizes[k]) * work[i, k]
                   + (sizes[j] + sizes[k]) * work[j, k]
                   - sizes[k] * d_ij) / tot
        work[i, k] = new
        work[k, i] = new
        work[j, :] = np.inf
        work[:, j] = np.inf
        steps.append(MergeStep(int(cluster_id[i]), int(cluster_id[j]), height, int(sizes[i] + sizes[j])))
        if height < prev_height - 1e-12 * max(1.0, abs(prev_height)):
            inversions.append(step)
        prev_height = height
        sizes[i] += sizes[j]
        active[j] = False
        cluster_id[i] = n + step
    return Dendrogram(n, linkage, tuple(steps), tuple(inversions))


def cut(dendrogram: Dendrogram, k: int) -> ClusterAssignment:
    """Cut a dendrogram into exactly ``k`` clusters by undoing the last
    k-1 merges. Cluster labels are ordered by each cluster's smallest
    member index, so the labelling is deterministic."""
    n = dendrogram.n_items
    if not 1 <= k <= n:
        raise ValueError(f"cut: k must be in [1, {n}], got {k}")
    members: dict[int, list[int]] = {i: [i] for i in range(n)}
    for t in range(n - k):
        step = dendrogram.steps[t]
        merged = members.pop(step.left) + members.pop(step.right)
        members[n + t] = merged
    clusters = sorted(members.values(), key=min)
    labels = np.empty(n, dtype=np.int64)
    for c, items in enumerate(clusters):
        labels[items] = c
    return ClusterAssignment(labels, k)


@dataclass(frozen=True, eq=False)
class APResult:
    """Outcome of affinity propagation.

    ``converged`` is False when the exemplar set was still changing at
    ``max_iter`` (the assignment is still returned, flagged as partial) or
    when the degenerate no-exemplar fallback fired.
    """

    assignment: ClusterAssignment
    exemplars: tuple[int, ...]
    converged: bool
    n_iter: int
    preference_value: float


def affinity_propagation(
    m: DistanceMatrix | np.ndarray,
    preference: float | str = "min-similarity",
    damping: float = 0.5,
    max_iter: int = 1000,
    convergence_iter: int = 15,
) -> APResult:
    """Affinity propagation on similarities s(i, j) = -distance(i, j).

    Exchanges damped responsibility/availability messages until the
    exemplar set has been stable for ``convergence_iter`` sweeps. The
    shared diagonal preference steers how many exemplars emerge.

    Parameters
    ----------
    m : DistanceMatrix or square ndarray
    preference : float or "min-similarity"
        Diagonal self-similarity. The default uses the minimum observed
        similarity (the negated largest distance), which favours few
        clusters; a raw numeric value may be given instead.
    damping : float in (0, 1)
        Message update inertia. The conventional 0.5 suits most inputs;
        when the preference magnitude dwarfs the similarity spread the
        messages can enter a limit cycle — the result then comes back
        with ``converged=False`` and a higher damping (e.g. 0.9) is the
        standard remedy.
    max_iter, convergence_iter : int
        Sweep budget and required stability window.
    """
    vals = _values(m)
    n = vals.shape[0]
    if not 0.0 < damping < 1.0:
        raise ValueError("affinity_propagation: damping must be strictly inside (0, 1)")
    if max_iter < 1 or convergence_iter < 1:
        raise ValueError("affinity_propagation: iteration counts must be positive")
    s = -vals.astype(np.float64)
    if isinstance(preference, str):
        if preference != "min-similarity":
            raise ValueError(f"unknown preference {preference!r}; pass a number or 'min-similarity'")
        off = ~np.eye(n, dtype=bool)
        pref = float(s[off].min()) if n > 1 else 0.0
    else:
        pref = float(preference)
    np.fill_diagonal(s, pref)

    if n == 1:
        assignment = ClusterAssignment(np.zeros(1, dtype=np.int64), 1)
        return APResult(assignment, (0,), True, 0, pref)

    idx = np.arange(n)
    resp = np.zeros((n, n))
    avail = np.zeros((n, n))
    stable = 0
    last_ex: np.ndarray | None = None
    converged = False
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        # responsibilities: how strongly i favours k over the runner-up
        tmp = avail + s
        best = tmp.argmax(axis=1)
        best_val = tmp[idx, best]
        tmp[idx, best] = -np.inf
        second_val = tmp.max(axis=1)
        r_new = s - best_val[:, None]
        r_new[idx, best] = s[idx, best] - second_val
        resp = damping * resp + (1.0 - damping) * r_new
        # availabilities: pooled positive support for k as an exemplar
        rp = np.maximum(resp, 0.0)
        np.fill_diagonal(rp, np.diag(resp))
        a_new = rp.sum(axis=0)[None, :] - rp
        diag_a = np.diag(a_new).copy()
        a_new = np.minimum(a_new, 0.0)
        np.fill_diagonal(a_new, diag_a)
        avail = damping * avail + (1.0 - damping) * a_new

        ex = np.flatnonzero(np.diag(avail) + np.diag(resp) > 0.0)
        if last_ex is not None and ex.size and np.array_equal(ex, last_ex):
            stable += 1
            if stable >= convergence_iter:
                converged = True
                break
        else:
            stable = 0
        last_ex = ex

    ex = np.flatnonzero(np.diag(avail) + np.diag(resp) > 0.0)
    if ex.size == 0:
        # Fully degenerate message state (e.g. all-equal similarities):
        # fall back to the single strongest self-evidence, flagged as
        # unconverged.
        ex = np.array([int(np.argmax(np.diag(avail) + np.diag(resp)))])
        converged = False

    score = (s + avail)[:, ex]
    labels = score.argmax(axis=1)
    for pos, e in enumerate(ex):
        labels[e] = pos
    return APResult(
        assignment=ClusterAssignment(labels.astype(np.int64), int(ex.size)),
        exemplars=tuple(int(e) for e in ex),
        converged=converged,
        n_iter=n_iter,
        preference_value=pref,
    )


def exemplar(indices: Sequence[int], m: DistanceMatrix | np.ndarray) -> int:
    """Most central member of an item subset: the member whose summed
    distance to the rest of the subset is smallest (ties break to the
    lowest item index)."""
    vals = _values(m)
    idx = np.unique(np.asarray(list(indices), dtype=np.int64))
    if idx.size == 0:
        raise ValueError("exemplar: empty index set")
    if idx[0] < 0 or idx[-1] >= vals.shape[0]:
        raise ValueError("exemplar: index out of range")
    sub = vals[np.ix_(idx, idx)]
    return int(idx[int(np.argmin(sub.sum(axis=1)))])


@dataclass(frozen=True)
class CriteriaResult:
    """Between-like and within-like criteria plus the exemplars behind them."""

    bc: float
    wc: float
    global_exemplar: int
    exemplars: tuple[int, ...]


def criteria(assignment: ClusterAssignment, m: DistanceMatrix | np.ndarray) -> CriteriaResult:
    """Exemplar-based cluster quality criteria.

    The between-like criterion sums the distances from the whole-dataset
    exemplar to each cluster exemplar (0 for a single cluster); the
    within-like criterion sums each cluster's mean distance from its
    exemplar to its members (0 when every item is its own cluster).
    """
    vals = _values(m)
    labels = assignment.labels
    if labels.size != vals.shape[0]:
        raise ValueError("criteria: assignment and matrix size differ")
    global_ex = exemplar(range(vals.shape[0]), vals)
    bc = 0.0
    wc = 0.0
    exs: list[int] = []
    for c in range(assignment.k):
        members = assignment.members(c)
        ex = exemplar(members, vals)
        exs.append(ex)
        bc += float(vals[global_ex, ex])
        wc += float(vals[ex, members].mean())
    return CriteriaResult(bc, wc, global_ex, tuple(exs))
