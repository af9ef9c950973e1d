"""Pairwise distance matrices: computation, binary persistence, CSV export.

The binary layout is: magic ``TRJD``, format version (u32), item count n
(u32), n length-prefixed UTF-8 ids, a length-prefixed UTF-8 kind string,
then the row-major strictly-upper triangle as little-endian float64. The
CSV export mirrors the full symmetric matrix for interoperability.
"""

from __future__ import annotations

import multiprocessing
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import shape, sspd, warping
from .geometry import Trajectory

__all__ = [
    "DISTANCE_NAMES",
    "DistanceMatrix",
    "DistanceSpec",
    "MatrixComputationError",
    "MatrixFormatError",
    "compute_matrix",
    "load_matrix",
    "pair_function",
    "save_matrix",
    "save_matrix_csv",
]

_MAGIC = b"TRJD"
_VERSION = 1

#: Distances that can back a matrix job. ``lcss`` is accepted as an alias
#: of ``dlcss``: a matrix must hold dissimilarities with a zero diagonal,
#: which the raw match count is not.
DISTANCE_NAMES = (
    "dtw",
    "dlcss",
    "edr",
    "erp",
    "hausdorff",
    "frechet",
    "discrete_frechet",
    "sowd",
    "sspd",
)


class MatrixFormatError(ValueError):
    """Raised when a stored matrix file cannot be decoded."""


class MatrixComputationError(RuntimeError):
    """Raised when a pairwise distance evaluation fails."""


@dataclass(frozen=True)
class DistanceSpec:
    """A distance name plus the parameters it needs.

    Parameters
    ----------
    name : str
        One of :data:`DISTANCE_NAMES` (or ``lcss``, stored as ``dlcss``).
    eps_d : float, optional
        Matching threshold; required for ``dlcss``/``edr``.
    gap : (float, float), optional
        ERP gap point; defaults to the projected-frame origin (0, 0).
    samples_per_unit : float, optional
        Arc-length sampling density for ``sowd``; defaults to 1.0.
    """

    name: str
    eps_d: float | None = None
    gap: tuple[float, float] | None = None
    samples_per_unit: float | None = None

    def __post_init__(self) -> None:
        name = "dlcss" if self.name == "lcss" else self.name
        object.__setattr__(self, "name", name)
        if name not in DISTANCE_NAMES:
            raise ValueError(f"unknown distance {self.name!r}; expected one of {', '.join(DISTANCE_NAMES)}")
        if name in ("dlcss", "edr"):
            if self.eps_d is None:
                raise ValueError(f"{name} requires eps_d (matching threshold)")
            if self.eps_d <= 0:
                raise ValueError(f"{name}: eps_d must be positive")
        if name == "erp" and self.gap is None:
            object.__setattr__(self, "gap", (0.0, 0.0))
        if name == "sowd":
            density = 1.0 if self.samples_per_unit is None else float(self.samples_per_unit)
            if density <= 0:
                raise ValueError("sowd: samples_per_unit must be positive")
            object.__setattr__(self, "samples_per_unit", density)

    def render(self) -> str:
        """Canonical kind string stored alongside a matrix."""
        if self.name in ("dlcss", "edr"):
            return f"{self.name}(eps_d={self.eps_d!r})"
        if self.name == "erp":
            return f"erp(gap=({self.gap[0]!r}, {self.gap[1]!r}))"
        if self.name == "sowd":
            return f"sowd(samples_per_unit={self.samples_per_unit!r})"
        return self.name


def pair_function(spec: DistanceSpec) -> Callable[[np.ndarray, np.ndarray], float]:
    """Bind a DistanceSpec to a two-argument distance over point arrays."""
    name = spec.name
    if name == "dtw":
        return warping.dtw
    if name == "dlcss":
        eps = float(spec.eps_d)
        return lambda a, b: warping.dlcss(a, b, eps)
    if name == "edr":
        eps = float(spec.eps_d)
        return lambda a, b: float(warping.edr(a, b, eps))
    if name == "erp":
        gap = spec.gap
        return lambda a, b: warping.erp(a, b, gap)
    if name == "hausdorff":
        return shape.hausdorff
    if name == "frechet":
        return shape.frechet
    if name == "discrete_frechet":
        return shape.discrete_frechet
    if name == "sowd":
        density = float(spec.samples_per_unit)
        return lambda a, b: shape.sowd(a, b, density)
    if name == "sspd":
        return sspd.sspd
    raise ValueError(f"unknown distance {name!r}")


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric pairwise distance matrix with item ids and a kind label.

    Attributes
    ----------
    ids : tuple of str
        Item identifiers, one per row/column.
    kind : str
        Distance name plus parameters, e.g. ``"edr(eps_d=0.5)"``.
    values : ndarray of shape (n, n)
        Symmetric, finite, non-negative, zero diagonal; read-only.
    """

    ids: tuple[str, ...]
    kind: str
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "ids", tuple(str(i) for i in self.ids))
        vals = np.array(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
            raise ValueError("distance matrix must be square")
        if len(self.ids) != vals.shape[0]:
            raise MatrixFormatError(
                f"id count mismatch: {len(self.ids)} ids for a {vals.shape[0]}x{vals.shape[1]} matrix")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("distance matrix ids must be unique")
        if not np.all(np.isfinite(vals)):
            raise ValueError("distance matrix values must be finite")
        if np.any(vals < 0):
            raise ValueError("distance matrix values must be non-negative")
        if np.any(np.diag(vals) != 0):
            raise ValueError("distance matrix diagonal must be zero")
        if not np.array_equal(vals, vals.T):
            raise ValueError("distance matrix must be symmetric")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.values.shape[0]

    def index_of(self, item_id: str) -> int:
        try:
            return self.ids.index(item_id)
        except ValueError:
            raise KeyError(f"no trajectory {item_id!r} in this matrix") from None


# -- parallel computation ----------------------------------------------------

_WORKER: dict = {}


def _init_worker(points: list[np.ndarray], spec: DistanceSpec) -> None:
    _WORKER["points"] = points
    _WORKER["func"] = pair_function(spec)
    _WORKER["pairs"] = np.column_stack(np.triu_indices(len(points), 1)).astype(np.int64)


def _eval_range(args: tuple[int, int]) -> tuple[int, list]:
    start, end = args
    points = _WORKER["points"]
    func = _WORKER["func"]
    pairs = _WORKER["pairs"]
    out = []
    for k in range(start, end):
        i, j = int(pairs[k, 0]), int(pairs[k, 1])
        try:
            out.append(func(points[i], points[j]))
        except Exception as exc:  # propagated with the offending pair attached
            return start, [("error", i, j, f"{type(exc).__name__}: {exc}")]
    return start, out


def compute_matrix(
    trajectories: Sequence[Trajectory],
    spec: DistanceSpec | str,
    workers: int = 1,
) -> DistanceMatrix:
    """Compute the full pairwise distance matrix for a trajectory list.

    Parameters
    ----------
    trajectories : sequence of Trajectory
        At least one trajectory; ids must be unique.
    spec : DistanceSpec or str
        Which distance to run (a bare name works when no parameter is needed).
    workers : int
        Worker processes; 1 computes in-process. Results are identical for
        any worker count, since every pair is evaluated independently.

    Raises
    ------
    MatrixComputationError
        If any pairwise evaluation fails; names the offending pair.
    """
    if isinstance(spec, str):
        spec = DistanceSpec(spec)
    if len(trajectories) == 0:
        raise ValueError("compute_matrix: need at least one trajectory")
    ids = [t.id for t in trajectories]
    if len(set(ids)) != len(ids):
        raise ValueError("compute_matrix: trajectory ids must be unique")
    if workers < 1:
        raise ValueError("compute_matrix: workers must be >= 1")
    points = [t.points for t in trajectories]
    n = len(points)
    iu = np.triu_indices(n, 1)
    pairs = np.column_stack(iu).astype(np.int64)
    npairs = pairs.shape[0]
    flat = np.zeros(npairs)
    func = pair_function(spec)

    if workers == 1 or npairs == 0:
        for k in range(npairs):
            i, j = int(pairs[k, 0]), int(pairs[k, 1])
            try:
                flat[k] = func(points[i], points[j])
            except Exception as exc:
                raise MatrixComputationError(
                    f"{spec.render()} failed on pair ({ids[i]!r}, {ids[j]!r}): {exc}") from exc
    else:
        chunk = max(1, npairs // (workers * 8))
        ranges = [(s, min(s + chunk, npairs)) for s in range(0, npairs, chunk)]
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(workers, initializer=_init_worker, initargs=(points, spec)) as pool:
            for start, out in pool.imap_unordered(_eval_range, ranges):
                if out and isinstance(out[0], tuple) and out[0][0] == "error":
                    _, i, j, msg = out[0]
                    pool.terminate()
                    raise MatrixComputationError(
                        f"{spec.render()} failed on pair ({ids[i]!r}, {ids[j]!r}): {msg}")
                flat[start:start + len(out)] = out

    values = np.zeros((n, n))
    values[iu] = flat
    values[(iu[1], iu[0])] = flat
    return DistanceMatrix(tuple(ids), spec.render(), values)


# -- persistence -------------------------------------------------------------


def save_matrix(m: DistanceMatrix, path: str | Path) -> None:
    """Write a matrix in the binary layout described in the module docstring."""
    n = len(m)
    blob = bytearray()
    blob += struct.pack("<4sII", _MAGIC, _VERSION, n)
    for item_id in m.ids:
        raw = item_id.encode("utf-8")
        blob += struct.pack("<I", len(raw)) + raw
    raw = m.kind.encode("utf-8")
    blob += struct.pack("<I", len(raw)) + raw
    iu = np.triu_indices(n, 1)
    tri = np.ascontiguousarray(m.values[iu], dtype="<f8")
    blob += tri.tobytes()
    Path(path).write_bytes(bytes(blob))


def _take(blob: bytes, offset: int, count: int, what: str) -> tuple[bytes, int]:
    if offset + count > len(blob):
        raise MatrixFormatError(f"truncated matrix file: ran out of bytes reading {what}")
    return blob[offset:offset + count], offset + count


def load_matrix(path: str | Path) -> DistanceMatrix:
    """Read a matrix written by :func:`save_matrix` (bit-exact round trip)."""
    blob = Path(path).read_bytes()
    head, offset = _take(blob, 0, 12, "header")
    magic, version, n = struct.unpack("<4sII", head)
    if magic != _MAGIC:
        raise MatrixFormatError(f"bad magic {magic!r}: not a trajkit matrix file")
    if version != _VERSION:
        raise MatrixFormatError(f"unsupported matrix format version {version}")
    ids = []
    for k in range(n):
        raw, offset = _take(blob, offset, 4, f"id table entry {k}")
        (ln,) = struct.unpack("<I", raw)
        raw, offset = _take(blob, offset, ln, f"id table entry {k}")
        ids.append(raw.decode("utf-8"))
    raw, offset = _take(blob, offset, 4, "kind string")
    (ln,) = struct.unpack("<I", raw)
    raw, offset = _take(blob, offset, ln, "kind string")
    kind = raw.decode("utf-8")
    npairs = n * (n - 1) // 2
    raw, offset = _take(blob, offset, 8 * npairs, "value payload")
    if offset != len(blob):
        raise MatrixFormatError(f"trailing bytes after matrix payload ({len(blob) - offset})")
    flat = np.frombuffer(raw, dtype="<f8")
    values = np.zeros((n, n))
    iu = np.triu_indices(n, 1)
    values[iu] = flat
    values[(iu[1], iu[0])] = flat
    return DistanceMatrix(tuple(ids), kind, values)


def save_matrix_csv(m: DistanceMatrix, path: str | Path) -> None:
    """Write the full symmetric matrix as CSV: a header row of ids, then
    one row per item. Floats are rendered with ``repr`` so that re-parsing
    reproduces the stored values bit-exactly."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("id," + ",".join(m.ids) + "\n")
        for item_id, row in zip(m.ids, m.values):
            fh.write(item_id + "," + ",".join(repr(v) for v in row.tolist()) + "\n")
