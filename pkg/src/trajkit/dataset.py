"""Dataset ingestion, synthetic generation, and canonical storage.

The canonical on-disk form is a CSV with columns ``traj_id,x,y,t`` holding
planar coordinates (``t`` may be empty), plus an optional JSON sidecar
(``<file>.meta.json``) carrying the coordinate frame and provenance.
Geographic input (CSV with lat/lon columns, or GeoJSON LineStrings) is
projected to planar metres once, at ingestion, about the dataset centroid.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .geometry import Trajectory, project_wgs84

__all__ = [
    "BundleSpec",
    "IngestError",
    "TrajectoryDataset",
    "ingest",
    "load_dataset",
    "save_dataset",
    "synth",
]


class IngestError(ValueError):
    """Raised for malformed input files or empty post-filter results."""


@dataclass(frozen=True, eq=False)
class TrajectoryDataset:
    """A nonempty collection of trajectories with unique ids.

    Attributes
    ----------
    trajectories : tuple of Trajectory
    crs : dict
        ``{"kind": "planar"}`` or ``{"kind": "projected-wgs84",
        "origin_lat": ..., "origin_lon": ...}``.
    provenance : dict
        Source description, filters applied, and drop counts.
    """

    trajectories: tuple[Trajectory, ...]
    crs: dict = field(default_factory=lambda: {"kind": "planar"})
    provenance: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "trajectories", tuple(self.trajectories))
        if len(self.trajectories) == 0:
            raise ValueError("dataset must contain at least one trajectory")
        ids = [t.id for t in self.trajectories]
        if len(set(ids)) != len(ids):
            raise ValueError("dataset trajectory ids must be unique")

    def __len__(self) -> int:
        return len(self.trajectories)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(t.id for t in self.trajectories)


def _parse_time(text: str, line_no: int) -> float:
    """Epoch seconds from a float literal or an ISO-8601 timestamp."""
    try:
        return float(text)
    except ValueError:
        pass
    try:
        stamp = datetime.fromisoformat(text)
    except ValueError as exc:
        raise IngestError(f"line {line_no}: cannot parse time {text!r}: {exc}") from None
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=timezone.utc)
    return stamp.timestamp()


def _read_rows(path: Path) -> tuple[bool, bool, list[tuple[str, float, float, float | None]]]:
    """Parse a trajectory CSV. Returns (is_geographic, has_time, rows)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(f"{path}: empty file") from None
        cols = [c.strip().lower() for c in header]
        id_col = next((cols.index(c) for c in ("traj_id", "id") if c in cols), None)
        if id_col is None:
            raise IngestError(f"{path}: header must name an id column (traj_id)")
        if "x" in cols and "y" in cols:
            geographic = False
            a_col, b_col = cols.index("x"), cols.index("y")
        elif "lat" in cols and "lon" in cols:
            geographic = True
            a_col, b_col = cols.index("lat"), cols.index("lon")
        else:
            raise IngestError(f"{path}: header must name x,y or lat,lon coordinate columns")
        t_col = next((cols.index(c) for c in ("t", "time", "timestamp") if c in cols), None)
        rows = []
        has_time = False
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(cols):
                raise IngestError(f"line {line_no}: expected {len(cols)} fields, got {len(row)}")
            tid = row[id_col].strip()
            if not tid:
                raise IngestError(f"line {line_no}: empty trajectory id")
            try:
                a = float(row[a_col])
                b = float(row[b_col])
            except ValueError as exc:
                raise IngestError(f"line {line_no}: bad coordinate: {exc}") from None
            t: float | None = None
            if t_col is not None and row[t_col].strip():
                t = _parse_time(row[t_col].strip(), line_no)
                has_time = True
            rows.append((tid, a, b, t))
    return geographic, has_time, rows


def _read_geojson(path: Path) -> list[tuple[str, float, float, float | None]]:
    """LineString features of a GeoJSON FeatureCollection as flat rows
    (lat, lon order, matching the geographic CSV convention)."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise IngestError(f"{path}: invalid JSON: {exc}") from None
    if doc.get("type") != "FeatureCollection":
        raise IngestError(f"{path}: expected a GeoJSON FeatureCollection")
    rows = []
    for k, feature in enumerate(doc.get("features", [])):
        geom = feature.get("geometry") or {}
        if geom.get("type") != "LineString":
            raise IngestError(f"feature {k}: only LineString geometries are supported")
        props = feature.get("properties") or {}
        tid = feature.get("id", props.get("traj_id", props.get("id")))
        if tid is None:
            raise IngestError(f"feature {k}: no id (feature.id or properties.traj_id)")
        coords = geom.get("coordinates") or []
        times = props.get("timestamps")
        if times is not None and len(times) != len(coords):
            raise IngestError(f"feature {k}: timestamps and coordinates differ in length")
        for p, pair in enumerate(coords):
            if len(pair) < 2:
                raise IngestError(f"feature {k}: coordinate {p} is not a lon,lat pair")
            t = None
            if times is not None:
                t = times[p] if isinstance(times[p], (int, float)) else _parse_time(str(times[p]), p)
            rows.append((str(tid), float(pair[1]), float(pair[0]), t))
    return rows


def _in_box(point: np.ndarray, box: tuple[float, float, float, float]) -> bool:
    x0, y0, x1, y1 = box
    return x0 <= point[0] <= x1 and y0 <= point[1] <= y1


def ingest(
    path: str | Path,
    fmt: str = "csv",
    wgs84: bool = False,
    min_points: int = 2,
    start_box: tuple[float, float, float, float] | None = None,
    end_box: tuple[float, float, float, float] | None = None,
) -> TrajectoryDataset:
    """Load raw trajectory data into a planar dataset.

    Parameters
    ----------
    path : str or Path
    fmt : {"csv", "geojson"}
        CSV needs columns ``traj_id,x,y[,t]`` (planar) or
        ``traj_id,lat,lon[,t]`` (with ``wgs84=True``); GeoJSON
        LineStrings are always geographic.
    wgs84 : bool
        Project geographic coordinates to local planar metres about the
        dataset centroid. Required for lat/lon CSVs.
    min_points : int
        Trajectories with fewer points are dropped (floor of 2: a single
        point has no carrier).
    start_box, end_box : (min_x, min_y, max_x, max_y), optional
        Keep only trajectories whose first/last point falls inside the
        box, in input coordinates (lon, lat order for geographic input).

    Raises
    ------
    IngestError
        Malformed rows (reported with line numbers), non-monotone
        timestamps within an id, or an empty post-filter result.
    """
    path = Path(path)
    if fmt == "csv":
        geographic, _, rows = _read_rows(path)
        if geographic and not wgs84:
            raise IngestError(f"{path}: lat/lon columns found; pass wgs84=True to project them")
        if not geographic and wgs84:
            raise IngestError(f"{path}: wgs84=True needs lat/lon columns, found x,y")
    elif fmt == "geojson":
        rows = _read_geojson(path)
        geographic, wgs84 = True, True
    else:
        raise ValueError(f"unknown format {fmt!r}; expected csv or geojson")

    by_id: dict[str, list[tuple[float, float, float | None]]] = {}
    for tid, a, b, t in rows:
        by_id.setdefault(tid, []).append((a, b, t))

    dropped = {"too_short": 0, "start_box": 0, "end_box": 0}
    min_points = max(2, int(min_points))
    kept: list[tuple[str, np.ndarray, np.ndarray | None]] = []
    for tid, recs in by_id.items():
        stamps = [r[2] for r in recs]
        with_time = [s for s in stamps if s is not None]
        if with_time and len(with_time) != len(stamps):
            raise IngestError(f"trajectory {tid!r}: some rows have timestamps and some do not")
        if with_time:
            recs = sorted(recs, key=lambda r: r[2])
            ts = np.array([r[2] for r in recs])
            if np.any(np.diff(ts) <= 0):
                raise IngestError(f"trajectory {tid!r}: timestamps are not strictly increasing")
        else:
            ts = None
        pts = np.array([(r[0], r[1]) for r in recs], dtype=np.float64)
        if pts.shape[0] < min_points:
            dropped["too_short"] += 1
            continue
        # Box filters run in input coordinates; geographic boxes are
        # (min_lon, min_lat, max_lon, max_lat).
        first = pts[0][::-1] if geographic else pts[0]
        last = pts[-1][::-1] if geographic else pts[-1]
        if start_box is not None and not _in_box(first, start_box):
            dropped["start_box"] += 1
            continue
        if end_box is not None and not _in_box(last, end_box):
            dropped["end_box"] += 1
            continue
        kept.append((tid, pts, ts))

    if not kept:
        raise IngestError(f"{path}: no trajectories left after filtering "
                          f"(dropped: {dropped})")

    if geographic:
        all_pts = np.concatenate([pts for _, pts, _ in kept])
        origin_lat = float(all_pts[:, 0].mean())
        origin_lon = float(all_pts[:, 1].mean())
        crs = {"kind": "projected-wgs84", "origin_lat": origin_lat, "origin_lon": origin_lon}
        trajectories = []
        for tid, pts, ts in kept:
            x, y = project_wgs84(pts[:, 0], pts[:, 1], origin_lat, origin_lon)
            trajectories.append(Trajectory(tid, np.column_stack([x, y]), ts))
    else:
        crs = {"kind": "planar"}
        trajectories = [Trajectory(tid, pts, ts) for tid, pts, ts in kept]

    provenance = {
        "source": str(path),
        "format": fmt,
        "wgs84": bool(wgs84),
        "min_points": min_points,
        "start_box": list(start_box) if start_box else None,
        "end_box": list(end_box) if end_box else None,
        "rows_read": len(rows),
        "trajectories_read": len(by_id),
        "dropped": dropped,
    }
    return TrajectoryDataset(tuple(trajectories), crs, provenance)


# -- synthetic bundles -------------------------------------------------------


@dataclass(frozen=True)
class BundleSpec:
    """Recipe for one bundle of noisy anchor resamplings.

    Attributes
    ----------
    anchor : array-like of shape (k, 2)
        Polyline with positive total length that the bundle follows.
    count : int
        Trajectories to generate.
    jitter : float
        Standard deviation of the Gaussian noise added to every sample.
    points : (int, int)
        Inclusive range of per-trajectory sample counts (minimum 2).
    """

    anchor: np.ndarray
    count: int
    jitter: float = 0.0
    points: tuple[int, int] = (8, 12)

    def __post_init__(self) -> None:
        anchor = np.array(self.anchor, dtype=np.float64)
        if anchor.ndim != 2 or anchor.shape[1] != 2 or anchor.shape[0] < 2:
            raise ValueError("bundle anchor must be a polyline of shape (k, 2), k >= 2")
        if not np.all(np.isfinite(anchor)):
            raise ValueError("bundle anchor must be finite")
        seg = np.hypot(*(anchor[1:] - anchor[:-1]).T)
        if seg.sum() <= 0:
            raise ValueError("bundle anchor must have positive length")
        anchor.setflags(write=False)
        object.__setattr__(self, "anchor", anchor)
        if self.count < 1:
            raise ValueError("bundle count must be >= 1")
        if self.jitter < 0:
            raise ValueError("bundle jitter must be >= 0")
        lo, hi = self.points
        if not (2 <= lo <= hi):
            raise ValueError("bundle points range must satisfy 2 <= lo <= hi")


def _along_anchor(anchor: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Points of the anchor polyline at the given arc-length positions."""
    seg = np.hypot(*(anchor[1:] - anchor[:-1]).T)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    x = np.interp(s, cum, anchor[:, 0])
    y = np.interp(s, cum, anchor[:, 1])
    return np.column_stack([x, y])


def synth(bundles: list[BundleSpec] | BundleSpec, seed: int) -> tuple[TrajectoryDataset, np.ndarray]:
    """Generate a labelled synthetic dataset of bundled trajectories.

    Each trajectory samples its bundle's anchor at uniformly spaced
    arc-length positions (endpoints included) and perturbs every sample
    with isotropic Gaussian noise. Fully deterministic for a given seed.

    Returns
    -------
    (dataset, labels)
        ``labels[i]`` is the bundle index of ``dataset.trajectories[i]``.
    """
    if isinstance(bundles, BundleSpec):
        bundles = [bundles]
    if not bundles:
        raise ValueError("synth: need at least one bundle")
    rng = np.random.default_rng(seed)
    trajectories: list[Trajectory] = []
    labels: list[int] = []
    for b_idx, spec in enumerate(bundles):
        total = float(np.hypot(*(spec.anchor[1:] - spec.anchor[:-1]).T).sum())
        lo, hi = spec.points
        for t_idx in range(spec.count):
            m = int(rng.integers(lo, hi + 1))
            s = np.linspace(0.0, total, m)
            pts = _along_anchor(spec.anchor, s)
            if spec.jitter > 0:
                pts = pts + rng.normal(0.0, spec.jitter, pts.shape)
            trajectories.append(Trajectory(f"b{b_idx}t{t_idx}", pts))
            labels.append(b_idx)
    provenance = {
        "source": "synth",
        "seed": int(seed),
        "bundles": [
            {"count": b.count, "jitter": b.jitter, "points": list(b.points),
             "anchor_points": int(b.anchor.shape[0])}
            for b in bundles
        ],
    }
    return TrajectoryDataset(tuple(trajectories), {"kind": "planar"}, provenance), np.array(labels)


# -- canonical storage -------------------------------------------------------


def _meta_path(path: Path) -> Path:
    return path.with_name(path.name + ".meta.json")


def save_dataset(dataset: TrajectoryDataset, path: str | Path) -> None:
    """Write the canonical ``traj_id,x,y,t`` CSV plus a metadata sidecar.

    Coordinates are rendered with ``repr`` so a load round-trips them
    bit-exactly.
    """
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("traj_id,x,y,t\n")
        for traj in dataset.trajectories:
            ts = traj.timestamps
            for k in range(len(traj)):
                t_txt = repr(float(ts[k])) if ts is not None else ""
                x_txt = repr(float(traj.points[k, 0]))
                y_txt = repr(float(traj.points[k, 1]))
                fh.write(f"{traj.id},{x_txt},{y_txt},{t_txt}\n")
    meta = {"crs": dataset.crs, "provenance": dataset.provenance}
    _meta_path(path).write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")


def load_dataset(path: str | Path) -> TrajectoryDataset:
    """Read a canonical planar dataset CSV (and its sidecar, if present)."""
    path = Path(path)
    geographic, _, rows = _read_rows(path)
    if geographic:
        raise IngestError(f"{path}: canonical datasets are planar; run ingest for lat/lon data")
    by_id: dict[str, list[tuple[float, float, float | None]]] = {}
    for tid, a, b, t in rows:
        by_id.setdefault(tid, []).append((a, b, t))
    trajectories = []
    for tid, recs in by_id.items():
        stamps = [r[2] for r in recs]
        ts = np.array(stamps, dtype=np.float64) if all(s is not None for s in stamps) else None
        pts = np.array([(r[0], r[1]) for r in recs], dtype=np.float64)
        trajectories.append(Trajectory(tid, pts, ts))
    crs: dict = {"kind": "planar"}
    provenance: dict = {"source": str(path)}
    meta_file = _meta_path(path)
    if meta_file.exists():
        meta = json.loads(meta_file.read_text(encoding="utf-8"))
        crs = meta.get("crs", crs)
        provenance = meta.get("provenance", provenance)
    return TrajectoryDataset(tuple(trajectories), crs, provenance)
