import json

import numpy as np
import pytest

from trajkit import (BundleSpec, IngestError, Trajectory, TrajectoryDataset,
                     ingest, load_dataset, save_dataset, sspd, synth)


PLANAR_CSV = """traj_id,x,y,t
a,0.0,0.0,0
a,1.0,0.0,1
a,2.0,0.5,2
b,5.0,5.0,10
b,6.0,5.0,11
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


class TestCsvIngest:
    def test_planar_happy_path(self, tmp_path):
        ds = ingest(write(tmp_path, "d.csv", PLANAR_CSV))
        assert ds.ids == ("a", "b")
        assert len(ds.trajectories[0]) == 3
        assert ds.crs == {"kind": "planar"}
        assert ds.provenance["rows_read"] == 5

    def test_rows_are_sorted_by_timestamp(self, tmp_path):
        text = "traj_id,x,y,t\na,2.0,0.0,3\na,0.0,0.0,1\na,1.0,0.0,2\n"
        ds = ingest(write(tmp_path, "d.csv", text))
        assert ds.trajectories[0].points[:, 0].tolist() == [0.0, 1.0, 2.0]

    def test_iso_timestamps_are_accepted(self, tmp_path):
        text = ("traj_id,x,y,time\n"
                "a,0.0,0.0,2024-05-01T10:00:00\n"
                "a,1.0,0.0,2024-05-01T10:00:30\n")
        ds = ingest(write(tmp_path, "d.csv", text))
        ts = ds.trajectories[0].timestamps
        assert ts is not None and ts[1] - ts[0] == 30.0

    def test_timestamps_are_optional(self, tmp_path):
        text = "traj_id,x,y\na,0.0,0.0\na,1.0,0.0\n"
        ds = ingest(write(tmp_path, "d.csv", text))
        assert ds.trajectories[0].timestamps is None

    def test_malformed_coordinate_names_the_line(self, tmp_path):
        text = "traj_id,x,y\na,0.0,0.0\na,oops,0.0\n"
        with pytest.raises(IngestError, match="line 3.*bad coordinate"):
            ingest(write(tmp_path, "d.csv", text))

    def test_short_row_names_the_line(self, tmp_path):
        text = "traj_id,x,y\na,0.0,0.0\na,1.0\n"
        with pytest.raises(IngestError, match="line 3.*expected 3 fields"):
            ingest(write(tmp_path, "d.csv", text))

    def test_duplicate_timestamps_rejected(self, tmp_path):
        text = "traj_id,x,y,t\na,0.0,0.0,5\na,1.0,0.0,5\n"
        with pytest.raises(IngestError, match="strictly increasing"):
            ingest(write(tmp_path, "d.csv", text))

    def test_mixed_timestamp_presence_rejected(self, tmp_path):
        text = "traj_id,x,y,t\na,0.0,0.0,1\na,1.0,0.0,\n"
        with pytest.raises(IngestError, match="some rows have timestamps"):
            ingest(write(tmp_path, "d.csv", text))

    def test_missing_id_column_rejected(self, tmp_path):
        text = "x,y\n0.0,0.0\n"
        with pytest.raises(IngestError, match="id column"):
            ingest(write(tmp_path, "d.csv", text))

    def test_latlon_without_flag_is_refused(self, tmp_path):
        text = "traj_id,lat,lon\na,48.85,2.35\na,48.86,2.36\n"
        with pytest.raises(IngestError, match="wgs84=True"):
            ingest(write(tmp_path, "d.csv", text))

    def test_flag_without_latlon_is_refused(self, tmp_path):
        with pytest.raises(IngestError, match="needs lat/lon"):
            ingest(write(tmp_path, "d.csv", PLANAR_CSV), wgs84=True)

    def test_latlon_projection_is_centered_and_metric(self, tmp_path):
        text = ("traj_id,lat,lon\n"
                "a,0.00,0.0\na,0.01,0.0\n")
        ds = ingest(write(tmp_path, "d.csv", text), wgs84=True)
        assert ds.crs["kind"] == "projected-wgs84"
        assert ds.crs["origin_lat"] == pytest.approx(0.005)
        pts = ds.trajectories[0].points
        # 0.01 degrees of latitude is about 1112 m
        assert abs(pts[1, 1] - pts[0, 1]) == pytest.approx(1111.95, abs=0.1)

    def test_min_points_drops_and_counts(self, tmp_path):
        text = "traj_id,x,y\na,0,0\na,1,0\na,2,0\nb,9,9\nb,8,8\n"
        ds = ingest(write(tmp_path, "d.csv", text), min_points=3)
        assert ds.ids == ("a",)
        assert ds.provenance["dropped"]["too_short"] == 1

    def test_start_and_end_boxes_filter(self, tmp_path):
        ds = ingest(write(tmp_path, "d.csv", PLANAR_CSV),
                    start_box=(-1.0, -1.0, 1.0, 1.0))
        assert ds.ids == ("a",)
        assert ds.provenance["dropped"]["start_box"] == 1
        ds = ingest(write(tmp_path, "d.csv", PLANAR_CSV),
                    end_box=(5.5, 4.5, 6.5, 5.5))
        assert ds.ids == ("b",)

    def test_empty_result_reports_drop_counts(self, tmp_path):
        with pytest.raises(IngestError, match="no trajectories left.*too_short"):
            ingest(write(tmp_path, "d.csv", PLANAR_CSV), min_points=10)

    def test_unknown_format_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="unknown format"):
            ingest(write(tmp_path, "d.csv", PLANAR_CSV), fmt="parquet")


class TestGeojsonIngest:
    def make_doc(self):
        return {
            "type": "FeatureCollection",
            "features": [
                {"type": "Feature", "id": "r1",
                 "geometry": {"type": "LineString",
                              "coordinates": [[2.35, 48.85], [2.36, 48.86]]},
                 "properties": {"timestamps": [0, 30]}},
                {"type": "Feature",
                 "geometry": {"type": "LineString",
                              "coordinates": [[2.40, 48.80], [2.41, 48.81]]},
                 "properties": {"traj_id": "r2"}},
            ],
        }

    def test_linestrings_are_projected(self, tmp_path):
        p = write(tmp_path, "d.geojson", json.dumps(self.make_doc()))
        ds = ingest(p, fmt="geojson")
        assert ds.ids == ("r1", "r2")
        assert ds.crs["kind"] == "projected-wgs84"
        assert ds.trajectories[0].timestamps is not None

    def test_non_linestring_rejected(self, tmp_path):
        doc = self.make_doc()
        doc["features"][0]["geometry"] = {"type": "Point", "coordinates": [0, 0]}
        p = write(tmp_path, "d.geojson", json.dumps(doc))
        with pytest.raises(IngestError, match="feature 0.*LineString"):
            ingest(p, fmt="geojson")

    def test_missing_id_rejected(self, tmp_path):
        doc = self.make_doc()
        del doc["features"][1]["properties"]["traj_id"]
        p = write(tmp_path, "d.geojson", json.dumps(doc))
        with pytest.raises(IngestError, match="feature 1.*no id"):
            ingest(p, fmt="geojson")

    def test_invalid_json_rejected(self, tmp_path):
        p = write(tmp_path, "d.geojson", "{nope")
        with pytest.raises(IngestError, match="invalid JSON"):
            ingest(p, fmt="geojson")


class TestSynth:
    ANCHOR = np.array([(0.0, 0.0), (10.0, 0.0)])

    def test_same_seed_reproduces_exactly(self):
        spec = BundleSpec(anchor=self.ANCHOR, count=4, jitter=0.3)
        ds1, lab1 = synth([spec], seed=42)
        ds2, lab2 = synth([spec], seed=42)
        assert ds1.ids == ds2.ids
        assert np.array_equal(lab1, lab2)
        for a, b in zip(ds1.trajectories, ds2.trajectories):
            assert np.array_equal(a.points, b.points)

    def test_different_seeds_differ(self):
        spec = BundleSpec(anchor=self.ANCHOR, count=4, jitter=0.3)
        ds1, _ = synth([spec], seed=1)
        ds2, _ = synth([spec], seed=2)
        assert not np.array_equal(ds1.trajectories[0].points, ds2.trajectories[0].points)

    def test_point_counts_respect_the_range(self):
        spec = BundleSpec(anchor=self.ANCHOR, count=30, points=(5, 7))
        ds, _ = synth([spec], seed=3)
        counts = {len(t) for t in ds.trajectories}
        assert counts <= {5, 6, 7}
        assert len(counts) > 1

    def test_zero_jitter_follows_the_anchor(self):
        spec = BundleSpec(anchor=self.ANCHOR, count=5, jitter=0.0)
        ds, _ = synth([spec], seed=4)
        for t in ds.trajectories:
            assert np.all(t.points[:, 1] == 0.0)
            assert t.points[0, 0] == 0.0 and t.points[-1, 0] == 10.0
        # resamplings of one carrier are mutually at distance zero
        assert sspd(ds.trajectories[0], ds.trajectories[1]) == 0.0

    def test_labels_map_bundles(self):
        a = BundleSpec(anchor=self.ANCHOR, count=2)
        b = BundleSpec(anchor=self.ANCHOR + 100.0, count=3)
        ds, labels = synth([a, b], seed=5)
        assert labels.tolist() == [0, 0, 1, 1, 1]
        assert ds.ids == ("b0t0", "b0t1", "b1t0", "b1t1", "b1t2")

    def test_anchor_validation(self):
        with pytest.raises(ValueError, match="positive length"):
            BundleSpec(anchor=np.zeros((2, 2)), count=1)
        with pytest.raises(ValueError, match="count"):
            BundleSpec(anchor=self.ANCHOR, count=0)
        with pytest.raises(ValueError, match="jitter"):
            BundleSpec(anchor=self.ANCHOR, count=1, jitter=-0.1)
        with pytest.raises(ValueError, match="points range"):
            BundleSpec(anchor=self.ANCHOR, count=1, points=(1, 5))


class TestSaveLoad:
    def test_round_trip_is_bit_exact(self, tmp_path):
        spec = BundleSpec(anchor=np.array([(0.0, 0.0), (3.0, 7.0)]), count=3, jitter=0.5)
        ds, _ = synth([spec], seed=11)
        path = tmp_path / "ds.csv"
        save_dataset(ds, path)
        back = load_dataset(path)
        assert back.ids == ds.ids
        for a, b in zip(ds.trajectories, back.trajectories):
            assert np.array_equal(a.points, b.points)
        assert back.provenance["seed"] == 11

    def test_round_trip_keeps_timestamps(self, tmp_path):
        ds = ingest(write(tmp_path, "in.csv", PLANAR_CSV))
        out = tmp_path / "out.csv"
        save_dataset(ds, out)
        back = load_dataset(out)
        assert np.array_equal(back.trajectories[0].timestamps,
                              ds.trajectories[0].timestamps)

    def test_load_refuses_geographic(self, tmp_path):
        text = "traj_id,lat,lon\na,48.85,2.35\na,48.86,2.36\n"
        p = write(tmp_path, "geo.csv", text)
        with pytest.raises(IngestError, match="planar"):
            load_dataset(p)


class TestTrajectoryDataset:
    def test_duplicate_ids_rejected(self):
        def t(i):
            return Trajectory(i, [(0.0, 0.0), (1.0, 1.0)])
        with pytest.raises(ValueError, match="unique"):
            TrajectoryDataset((t("a"), t("a")), {"kind": "planar"}, {})

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="at least one"):
            TrajectoryDataset((), {"kind": "planar"}, {})
