"""Shape distances between piecewise-linear trajectories.

These distances compare the geometric carriers of two trajectories and
ignore timestamps entirely: Hausdorff, continuous and discrete Frechet,
and the one-way / symmetrised one-way distances (OWD / SOWD).
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import as_points, segment_distances

__all__ = [
    "discrete_frechet",
    "frechet",
    "frechet_feasible",
    "frechet_candidates",
    "hausdorff",
    "owd",
    "sowd",
]


def _shape_points(t, name: str, min_points: int = 2) -> np.ndarray:
    pts = as_points(t)
    if pts.shape[0] < min_points:
        raise ValueError(f"{name}: needs trajectories with at least {min_points} points")
    return pts


def hausdorff(t1, t2) -> float:
    """Hausdorff distance between two polylines, evaluated at the vertices.

    Each vertex of one trajectory is measured against the other
    trajectory's full segment set; the largest such nearest-distance over
    both directions is returned. For a segment the point-to-carrier
    distance is maximal at an endpoint, so sampling the vertices suffices.
    """
    a = _shape_points(t1, "hausdorff")
    b = _shape_points(t2, "hausdorff")
    d_ab = segment_distances(a, b[:-1], b[1:]).min(axis=1)
    d_ba = segment_distances(b, a[:-1], a[1:]).min(axis=1)
    return float(max(d_ab.max(), d_ba.max()))


def discrete_frechet(t1, t2) -> float:
    """Discrete Frechet distance (coupling of vertices, order preserved).

    Smallest over all monotone couplings of the two vertex sequences of the
    largest paired point distance.
    """
    a, b = as_points(t1), as_points(t2)
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise ValueError("discrete_frechet: empty input")
    diff = a[:, None, :] - b[None, :, :]
    dist = np.sqrt(np.einsum("ijc,ijc->ij", diff, diff))
    n, m = dist.shape
    prev = np.full(m, np.inf)
    cur = np.empty(m)
    for i in range(n):
        for j in range(m):
            if i == 0 and j == 0:
                cur[0] = dist[0, 0]
            elif i == 0:
                cur[j] = max(cur[j - 1], dist[0, j])
            elif j == 0:
                cur[0] = max(prev[0], dist[i, 0])
            else:
                cur[j] = max(min(prev[j - 1], prev[j], cur[j - 1]), dist[i, j])
        prev, cur = cur, prev
    return float(prev[m - 1])


# ---------------------------------------------------------------------------
# Continuous Frechet distance: free-space feasibility + candidate search.
# ---------------------------------------------------------------------------


def _interval(a2: float, b: float, c0: float, eps2: float) -> tuple[float, float]:
    """Clamped parameter interval where a segment meets a disc.

    The squared distance from segment point X(t) = A + t(B-A) to the disc
    centre is a2*t^2 + b*t + c0; the interval solves <= eps2 within [0, 1].
    Returns (lo, hi) with lo > hi when empty.
    """
    if a2 <= 0.0:  # degenerate segment: a single point
        return (0.0, 1.0) if c0 <= eps2 else (1.0, 0.0)
    disc = b * b - 4.0 * a2 * (c0 - eps2)
    if disc < 0.0:
        return (1.0, 0.0)
    root = math.sqrt(disc)
    lo = (-b - root) / (2.0 * a2)
    hi = (-b + root) / (2.0 * a2)
    if lo < 0.0:
        lo = 0.0
    if hi > 1.0:
        hi = 1.0
    return (lo, hi)


class _FreeSpace:
    """Per-pair quadratic coefficients for free-space interval queries.

    Vertical boundaries pair vertex i of P with segment j of Q; horizontal
    boundaries pair vertex j of Q with segment i of P. Coefficients are
    computed once so that the feasibility decision can be replayed for many
    probe radii during the search.
    """

    def __init__(self, p: np.ndarray, q: np.ndarray) -> None:
        self.n = p.shape[0]
        self.m = q.shape[0]
        dq = q[1:] - q[:-1]  # (m-1, 2)
        dp = p[1:] - p[:-1]  # (n-1, 2)
        self.qa = np.einsum("jc,jc->j", dq, dq)  # (m-1,)
        self.pa = np.einsum("ic,ic->i", dp, dp)  # (n-1,)
        wv = q[:-1][None, :, :] - p[:, None, :]  # (n, m-1, 2)
        self.vb = 2.0 * np.einsum("ijc,jc->ij", wv, dq)
        self.vc = np.einsum("ijc,ijc->ij", wv, wv)
        wh = p[:-1][None, :, :] - q[:, None, :]  # (m, n-1, 2)
        self.hb = 2.0 * np.einsum("jic,ic->ji", wh, dp)
        self.hc = np.einsum("jic,jic->ji", wh, wh)
        self.d_start = math.dist(p[0], q[0])
        self.d_end = math.dist(p[-1], q[-1])

    def feasible(self, eps: float) -> bool:
        """Monotone-path decision at radius ``eps``.

        Propagates reachable sub-intervals of the cell boundaries through
        the free-space diagram in row-major order. The radius is inflated
        by one part in 1e12 so that intervals that open exactly at a
        candidate value survive floating-point rounding.
        """
        if eps < 0.0:
            return False
        if self.d_start > eps or self.d_end > eps:
            return False
        eps2 = (eps * (1.0 + 1e-12)) ** 2
        n, m = self.n, self.m
        qa, vb, vc = self.qa, self.vb, self.vc
        pa, hb, hc = self.pa, self.hb, self.hc

        # Reachable intervals on vertical boundaries (n, m-1) and
        # horizontal boundaries (n-1, m); lo > hi encodes "unreachable".
        rv = np.full((n, m - 1, 2), (1.0, 0.0))
        rh = np.full((n - 1, m, 2), (1.0, 0.0))

        # Left edge of the diagram: climb only while intervals stay joined.
        for j in range(m - 1):
            lo, hi = _interval(qa[j], vb[0, j], vc[0, j], eps2)
            if lo > hi or lo > 0.0:
                break
            rv[0, j] = (0.0, hi)
            if hi < 1.0:
                break
        for i in range(n - 1):
            lo, hi = _interval(pa[i], hb[0, i], hc[0, i], eps2)
            if lo > hi or lo > 0.0:
                break
            rh[i, 0] = (0.0, hi)
            if hi < 1.0:
                break

        for j in range(m - 1):
            for i in range(n - 1):
                left_lo, left_hi = rv[i, j]
                bot_lo, bot_hi = rh[i, j]
                if left_lo > left_hi and bot_lo > bot_hi:
                    continue
                # Right boundary: vertex i+1 of P against segment j of Q.
                lo, hi = _interval(qa[j], vb[i + 1, j], vc[i + 1, j], eps2)
                if lo <= hi:
                    if bot_lo <= bot_hi:
                        rv[i + 1, j] = (lo, hi)
                    else:
                        lo2 = max(lo, left_lo)
                        if lo2 <= hi:
                            rv[i + 1, j] = (lo2, hi)
                # Top boundary: vertex j+1 of Q against segment i of P.
                lo, hi = _interval(pa[i], hb[j + 1, i], hc[j + 1, i], eps2)
                if lo <= hi:
                    if left_lo <= left_hi:
                        rh[i, j + 1] = (lo, hi)
                    else:
                        lo2 = max(lo, bot_lo)
                        if lo2 <= hi:
                            rh[i, j + 1] = (lo2, hi)

        if m >= 2 and rv[n - 1, m - 2, 1] >= 1.0 and rv[n - 1, m - 2, 0] <= 1.0:
            return True
        if n >= 2 and rh[n - 2, m - 1, 1] >= 1.0 and rh[n - 2, m - 1, 0] <= 1.0:
            return True
        return False

    def candidates(self) -> np.ndarray:
        """Sorted unique search radii: per-cell segment-pair values plus
        the forced start/end vertex distances.

        Each cell value is the larger of the four vertex-to-segment
        distances of its segment pair, evaluated at the clamped orthogonal
        projection parameter of the stored quadratic.
        """
        tv = np.clip(-self.vb / np.where(self.qa > 0, 2 * self.qa, 1), 0.0, 1.0)
        dv = np.sqrt(np.maximum(self.qa * tv ** 2 + self.vb * tv + self.vc, 0.0))
        th = np.clip(-self.hb / np.where(self.pa > 0, 2 * self.pa, 1), 0.0, 1.0)
        dh = np.sqrt(np.maximum(self.pa * th ** 2 + self.hb * th + self.hc, 0.0))
        cell = np.maximum.reduce([dv[:-1, :], dv[1:, :], dh[:-1, :].T, dh[1:, :].T])
        vals = np.concatenate([cell.ravel(), [self.d_start, self.d_end]])
        return np.unique(vals)


def frechet_candidates(t1, t2) -> np.ndarray:
    """Candidate radii searched by :func:`frechet`: the segment-pair
    Frechet values of every cell plus the forced endpoint distances,
    sorted ascending."""
    a = _shape_points(t1, "frechet")
    b = _shape_points(t2, "frechet")
    return _FreeSpace(a, b).candidates()


def frechet_feasible(t1, t2, eps: float) -> bool:
    """Decide whether the two trajectories are within Frechet distance ``eps``.

    True when monotone traversals of both polylines exist that never drift
    further apart than ``eps`` (free-space reachability).
    """
    a = _shape_points(t1, "frechet_feasible")
    b = _shape_points(t2, "frechet_feasible")
    return _FreeSpace(a, b).feasible(float(eps))


def frechet(t1, t2) -> float:
    """Continuous Frechet distance between two polylines.

    Binary search over the candidate radii (segment-pair Frechet values
    plus the forced endpoint distances) with the free-space feasibility
    decision, then a bisection refinement inside the final bracket: the
    candidate list can skip the exact critical value when the bottleneck
    is a monotonicity constraint rather than a boundary opening.
    """
    a = _shape_points(t1, "frechet")
    b = _shape_points(t2, "frechet")
    fs = _FreeSpace(a, b)
    cand = fs.candidates()
    lo_i, hi_i = 0, len(cand) - 1
    if fs.feasible(float(cand[lo_i])):
        return float(cand[lo_i])
    if not fs.feasible(float(cand[hi_i])):
        # The largest segment-pair value admits a staircase traversal, so
        # this only guards numerical corner cases.
        hi = float(cand[hi_i]) if cand[hi_i] > 0 else 1.0
        for _ in range(64):
            hi *= 2.0
            if fs.feasible(hi):
                break
        else:
            raise RuntimeError("frechet: no feasible radius found")
        lo = float(cand[hi_i])
    else:
        while hi_i - lo_i > 1:
            mid = (lo_i + hi_i) // 2
            if fs.feasible(float(cand[mid])):
                hi_i = mid
            else:
                lo_i = mid
        lo, hi = float(cand[lo_i]), float(cand[hi_i])
    # Refine: the true value lies in (lo, hi]; stop once the bracket is
    # negligible relative to the answer.
    tol = max(1e-13, 1e-12 * hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if fs.feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# One-way distance.
# ---------------------------------------------------------------------------


def owd(t1, t2, samples_per_unit: float = 1.0) -> float:
    """One-way distance from ``t1`` to ``t2`` (directional).

    Mean distance from the carrier of ``t1`` to the carrier of ``t2``:
    the integral of the point-to-trajectory distance along ``t1``,
    divided by the length of ``t1``. The integral is evaluated by the
    trapezoidal rule on uniform arc-length samples of each segment
    (vertices always included, at least 8 samples per segment, default
    density one sample per unit length).

    Parameters
    ----------
    t1, t2 : Trajectory or array-like of shape (n, 2)
        Both must have positive total length.
    samples_per_unit : float
        Sampling density along ``t1``.
    """
    a = _shape_points(t1, "owd")
    b = _shape_points(t2, "owd")
    if samples_per_unit <= 0:
        raise ValueError("owd: samples_per_unit must be positive")
    starts, ends = a[:-1], a[1:]
    seg_len = np.hypot(*(ends - starts).T)
    total = float(seg_len.sum())
    if total <= 0.0:
        raise ValueError("owd: first trajectory has zero length")
    if float(np.hypot(*(b[1:] - b[:-1]).T).sum()) <= 0.0:
        raise ValueError("owd: second trajectory has zero length")
    bs, be = b[:-1], b[1:]
    integral = 0.0
    for k in range(starts.shape[0]):
        length = float(seg_len[k])
        if length == 0.0:
            continue
        pieces = max(7, math.ceil(length * samples_per_unit))
        t = np.linspace(0.0, 1.0, pieces + 1)
        samples = starts[k] + t[:, None] * (ends[k] - starts[k])
        d = segment_distances(samples, bs, be).min(axis=1)
        integral += float(np.trapezoid(d)) * (length / pieces)
    return integral / total


def sowd(t1, t2, samples_per_unit: float = 1.0) -> float:
    """Symmetrised one-way distance: mean of owd(t1, t2) and owd(t2, t1)."""
    return 0.5 * (owd(t1, t2, samples_per_unit) + owd(t2, t1, samples_per_unit))
