"""Spectral set arithmetic: unions, distances, and serialization."""

import numpy as np

from corona_spectra.sets import (
    Circle,
    Interval,
    SpectralSet,
    containment_depth,
    distance_to_point,
    hausdorff_distance,
    set_minkowski_sum,
    set_scale,
    set_to_json,
    set_to_rows,
    set_union,
    spectral_set,
)


def test_union_merges_overlapping_intervals():
    a = spectral_set(intervals=(Interval(0.0, 1.0), Interval(3.0, 4.0)))
    b = spectral_set(intervals=(Interval(0.5, 3.0),))
    u = set_union(a, b)
    assert u.intervals == (Interval(0.0, 4.0),)


def test_union_keeps_disjoint_intervals_and_dedups_points():
    a = spectral_set(points=np.array([1 + 0j, 2 + 0j]),
                     intervals=(Interval(-1.0, 0.0),))
    b = spectral_set(points=np.array([2 + 0j]),
                     intervals=(Interval(5.0, 6.0),), resolution=1e-3)
    u = set_union(a, b)
    assert u.intervals == (Interval(-1.0, 0.0), Interval(5.0, 6.0))
    assert len(u.points) == 2
    assert u.resolution == 1e-3


def test_distance_and_depth_on_interval():
    s = spectral_set(intervals=(Interval(-2.0, 2.0),))
    assert distance_to_point(s, 3.0) == 1.0
    assert distance_to_point(s, 1.0) == 0.0
    assert containment_depth(s, 0.0) == 2.0
    assert containment_depth(s, 1.5) == 0.5
    assert containment_depth(s, 2.5) == 0.0


def test_distance_on_circle():
    s = spectral_set(circles=(Circle(0.0, 2.0),))
    assert abs(distance_to_point(s, 0.0) - 2.0) < 1e-15
    assert abs(distance_to_point(s, 3.0) - 1.0) < 1e-15
    assert abs(distance_to_point(s, 2j) - 0.0) < 1e-15


def test_hausdorff_real_interval_vs_cloud():
    s = spectral_set(intervals=(Interval(0.0, 1.0),))
    cloud = spectral_set(points=np.linspace(0, 1, 11).astype(complex))
    assert abs(hausdorff_distance(s, cloud) - 0.05) < 1e-14
    far = spectral_set(points=np.array([0.5 + 0j, 3.0 + 0j]))
    assert abs(hausdorff_distance(s, far) - 2.0) < 1e-14


def test_hausdorff_symmetry_random_clouds():
    rng = np.random.default_rng(11)
    for _ in range(20):
        pa = rng.normal(size=8) + 1j * rng.normal(size=8)
        pb = rng.normal(size=5) + 1j * rng.normal(size=5)
        a = spectral_set(points=pa)
        b = spectral_set(points=pb)
        d1 = hausdorff_distance(a, b)
        d2 = hausdorff_distance(b, a)
        assert abs(d1 - d2) < 1e-14
        assert d1 >= 0.0
        assert hausdorff_distance(a, a) == 0.0


def test_scale_interval_and_resolution():
    s = spectral_set(intervals=(Interval(-1.0, 2.0),), resolution=1e-3)
    t = set_scale(s, 3.0)
    assert t.intervals == (Interval(-3.0, 6.0),)
    assert abs(t.resolution - 3e-3) < 1e-18
    flipped = set_scale(s, -1.0)
    assert flipped.intervals == (Interval(-2.0, 1.0),)


def test_minkowski_interval_plus_points():
    sym = spectral_set(intervals=(Interval(-2.0, 2.0),))
    shifts = spectral_set(points=np.array([-np.pi / 2, np.pi / 2]).astype(complex))
    s = set_minkowski_sum(sym, shifts)
    lo, hi = -2 - np.pi / 2, 2 + np.pi / 2
    assert abs(distance_to_point(s, lo) - 0.0) < 1e-15
    assert abs(distance_to_point(s, hi) - 0.0) < 1e-15
    assert distance_to_point(s, hi + 1.0) > 0.9


def test_rows_and_json_serialization():
    s = SpectralSet(points=np.array([1j]), intervals=(Interval(0.0, 1.0),),
                    circles=(Circle(0.0, 1.0),), resolution=2e-4)
    rows = set_to_rows(s)
    tags = {r[2] for r in rows}
    assert "point" in tags and "interval0:lo" in tags and "circle0:radius" in tags
    blob = set_to_json(s)
    assert blob["resolution"] == 2e-4
    assert blob["intervals"] == [[0.0, 1.0]]
