"""Resolution-tagged spectral sets: point clouds plus exact interval and
circle primitives, with union / scaling / Minkowski-sum / Hausdorff tools."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_REAL_TOL = 1e-12


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if self.hi < self.lo:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class Circle:
    center: complex
    radius: float


@dataclass(eq=False)
class SpectralSet:
    """A subset of the complex plane known up to `resolution` in Hausdorff
    distance: sampled points plus exact real intervals and circles."""

    points: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=complex))
    intervals: tuple = ()
    circles: tuple = ()
    resolution: float = 0.0

    def __post_init__(self):
        self.points = np.atleast_1d(np.asarray(self.points, dtype=complex))

    @property
    def is_empty(self) -> bool:
        return len(self.points) == 0 and not self.intervals and not self.circles

    def is_real(self, tol: float = _REAL_TOL) -> bool:
        if self.circles:
            return False
        if len(self.points) and np.max(np.abs(self.points.imag)) > tol:
            return False
        return True

    def sample(self, step: float) -> np.ndarray:
        """All points plus primitives densified at roughly `step`."""
        parts = [self.points]
        for iv in self.intervals:
            n = max(2, int(np.ceil((iv.hi - iv.lo) / max(step, 1e-12))) + 1)
            n = min(n, 2_000_001)
            parts.append(np.linspace(iv.lo, iv.hi, n).astype(complex))
        for c in self.circles:
            n = max(4, int(np.ceil(2 * np.pi * c.radius / max(step, 1e-12))))
            n = min(n, 2_000_001)
            ang = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
            parts.append(c.center + c.radius * np.exp(1j * ang))
        return np.concatenate(parts) if parts else np.empty(0, dtype=complex)

    def span(self) -> float:
        pts = [self.points.real, self.points.imag] if len(self.points) else []
        lo, hi = np.inf, -np.inf
        if len(self.points):
            lo = min(self.points.real.min(), self.points.imag.min())
            hi = max(self.points.real.max(), self.points.imag.max())
        for iv in self.intervals:
            lo, hi = min(lo, iv.lo), max(hi, iv.hi)
        for c in self.circles:
            lo = min(lo, c.center.real - c.radius, c.center.imag - c.radius)
            hi = max(hi, c.center.real + c.radius, c.center.imag + c.radius)
        return 0.0 if lo > hi else float(hi - lo)


def spectral_set(points=(), intervals=(), circles=(), resolution=0.0) -> SpectralSet:
    return SpectralSet(points=np.asarray(list(points), dtype=complex),
                       intervals=tuple(intervals), circles=tuple(circles),
                       resolution=float(resolution))


def set_union(*sets: SpectralSet) -> SpectralSet:
    pts = np.concatenate([s.points for s in sets]) if sets else np.empty(0, complex)
    ivs = _merge_intervals(iv for s in sets for iv in s.intervals)
    crc = tuple(dict.fromkeys(c for s in sets for c in s.circles))
    res = max((s.resolution for s in sets), default=0.0)
    if len(pts):
        pts = np.unique(pts)
    return SpectralSet(points=pts, intervals=ivs, circles=crc, resolution=res)


def _merge_intervals(intervals) -> tuple:
    """Exact canonical form of a union of real intervals: sorted and with
    overlapping or touching pieces fused."""
    items = sorted((iv.lo, iv.hi) for iv in intervals)
    merged = []
    for lo, hi in items:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return tuple(Interval(lo, hi) for lo, hi in merged)


def set_scale(s: SpectralSet, lam: complex) -> SpectralSet:
    """Pointwise scaling lam * S. Real lam keeps intervals exact; complex lam
    rotates them, so they are densified into the cloud."""
    lam = complex(lam)
    if lam == 0:
        return spectral_set(points=[0.0] if not s.is_empty else [],
                            resolution=0.0)
    pts = s.points * lam
    circles = tuple(Circle(c.center * lam, c.radius * abs(lam)) for c in s.circles)
    extra = []
    intervals = []
    densify_res = 0.0
    for iv in s.intervals:
        if abs(lam.imag) <= _REAL_TOL:
            a, b = iv.lo * lam.real, iv.hi * lam.real
            intervals.append(Interval(min(a, b), max(a, b)))
        else:
            step = max((iv.hi - iv.lo) / 4096.0, 1e-12)
            extra.append(np.linspace(iv.lo, iv.hi, 4097).astype(complex) * lam)
            densify_res = max(densify_res, abs(lam) * step / 2)
    if extra:
        pts = np.concatenate([pts] + extra)
    return SpectralSet(points=pts, intervals=tuple(intervals), circles=circles,
                       resolution=abs(lam) * s.resolution + densify_res)


def set_minkowski_sum(a: SpectralSet, b: SpectralSet) -> SpectralSet:
    """Minkowski sum A + B; exact on interval+interval, interval+real-point
    and circle+point pairs, densified otherwise."""
    if a.is_empty or b.is_empty:
        return spectral_set(resolution=a.resolution + b.resolution)
    res = a.resolution + b.resolution
    pts, ivs, crc = [], [], []
    dens = 0.0

    def split_points(s):
        mask = np.abs(s.points.imag) <= _REAL_TOL
        return s.points.real[mask], s.points[~mask]

    def ring(c, n=1024):
        ang = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        return c.center + c.radius * np.exp(1j * ang)

    if len(a.points) and len(b.points):
        pts.append((a.points[:, None] + b.points[None, :]).ravel())
    for iv in a.intervals:
        for jv in b.intervals:
            ivs.append(Interval(iv.lo + jv.lo, iv.hi + jv.hi))
    for s, t in ((a, b), (b, a)):
        for iv in s.intervals:
            reals, off = split_points(t)
            for x in reals:
                ivs.append(Interval(iv.lo + float(x), iv.hi + float(x)))
            if len(off):
                grid, step = np.linspace(iv.lo, iv.hi, 4097, retstep=True)
                pts.append((grid.astype(complex)[:, None] + off[None, :]).ravel())
                dens = max(dens, step / 2)
        for c in s.circles:
            for z in t.points:
                crc.append(Circle(c.center + complex(z), c.radius))
            for iv in t.intervals:
                grid, step = np.linspace(iv.lo, iv.hi, 4097, retstep=True)
                pts.append((ring(c)[:, None] + grid[None, :]).ravel())
                dens = max(dens, step / 2 + np.pi * c.radius / 1024)
    for c1 in a.circles:
        for c2 in b.circles:
            pts.append((ring(c1)[:, None] + ring(c2)[None, :]).ravel())
            dens = max(dens, np.pi * (c1.radius + c2.radius) / 1024)
    out_pts = np.concatenate(pts) if pts else np.empty(0, dtype=complex)
    return SpectralSet(points=out_pts, intervals=tuple(ivs), circles=tuple(crc),
                       resolution=res + dens)


# ---------------------------------------------------------------------------
# distances


def distance_to_point(s: SpectralSet, z: complex) -> float:
    """Exact distance from z to the set (primitives handled analytically)."""
    if s.is_empty:
        return float("inf")
    best = np.inf
    if len(s.points):
        best = float(np.min(np.abs(s.points - z)))
    for iv in s.intervals:
        x = min(max(z.real, iv.lo), iv.hi)
        best = min(best, float(np.hypot(z.real - x, z.imag)))
    for c in s.circles:
        best = min(best, abs(abs(z - c.center) - c.radius))
    return best


def containment_depth(s: SpectralSet, z: complex) -> float:
    """How far z sits inside an exact interval primitive (0 when it does not).

    Only intervals have interior; clouds and circle curves give depth 0."""
    depth = 0.0
    if abs(z.imag) > _REAL_TOL:
        return 0.0
    for iv in s.intervals:
        if iv.lo <= z.real <= iv.hi:
            depth = max(depth, min(z.real - iv.lo, iv.hi - z.real))
    return depth


def _merged_real_anchors(s: SpectralSet):
    """Sorted disjoint coverage items [(lo, hi)] of a real set (points are
    degenerate intervals)."""
    items = [(iv.lo, iv.hi) for iv in s.intervals]
    items += [(float(x), float(x)) for x in s.points.real]
    items.sort()
    merged = []
    for lo, hi in items:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def _directed_real(a: SpectralSet, b: SpectralSet) -> float:
    """Exact sup_{x in A} dist(x, B) for real sets."""
    cov = _merged_real_anchors(b)
    los = np.array([c[0] for c in cov])
    his = np.array([c[1] for c in cov])

    def dist_b(xs):
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        i = np.searchsorted(los, xs, side="right") - 1
        prev = np.clip(i, 0, len(his) - 1)
        inside = (i >= 0) & (xs <= his[prev])
        right = np.where(i >= 0, xs - his[prev], np.inf)
        left = np.where(i + 1 < len(los), los[np.clip(i + 1, 0, len(los) - 1)] - xs, np.inf)
        d = np.minimum(right, left)
        d[inside] = 0.0
        return d

    candidates = list(a.points.real)
    for iv in a.intervals:
        candidates += [iv.lo, iv.hi]
        # interior maxima of dist(., B) sit at midpoints of B coverage gaps
        for (l1, h1), (l2, h2) in zip(cov, cov[1:]):
            mid = 0.5 * (h1 + l2)
            if iv.lo < mid < iv.hi:
                candidates.append(mid)
    if not candidates:
        return 0.0
    return float(np.max(dist_b(np.array(candidates))))


def _directed_cloud(pa: np.ndarray, pb: np.ndarray) -> float:
    if len(pa) == 0:
        return 0.0
    best = np.full(len(pa), np.inf)
    chunk = max(1, int(4_000_000 // max(len(pb), 1)))
    for i in range(0, len(pa), chunk):
        d = np.abs(pa[i:i + chunk, None] - pb[None, :])
        best[i:i + chunk] = d.min(axis=1)
    return float(best.max())


def hausdorff_distance(a: SpectralSet, b: SpectralSet) -> float:
    """Hausdorff distance; exact for real sets (intervals + real points),
    densified otherwise, with error within the summed resolutions."""
    if a.is_empty and b.is_empty:
        return 0.0
    if a.is_empty or b.is_empty:
        return float("inf")
    if a.is_real() and b.is_real():
        return max(_directed_real(a, b), _directed_real(b, a))
    span = max(a.span(), b.span(), 1e-9)
    step = span / 65536.0
    pa, pb = a.sample(step), b.sample(step)
    return max(_directed_cloud(pa, pb), _directed_cloud(pb, pa))


# ---------------------------------------------------------------------------
# serialization


def set_to_rows(s: SpectralSet) -> list:
    """CSV rows (re, im, tag, resolution); primitives keep exact endpoints."""
    rows = []
    fmt = "%.12g"
    for p in sorted(s.points, key=lambda z: (z.real, z.imag)):
        rows.append((fmt % p.real, fmt % p.imag, "point", fmt % s.resolution))
    for i, iv in enumerate(s.intervals):
        rows.append((fmt % iv.lo, "0", f"interval{i}:lo", fmt % s.resolution))
        rows.append((fmt % iv.hi, "0", f"interval{i}:hi", fmt % s.resolution))
    for i, c in enumerate(s.circles):
        rows.append((fmt % c.center.real, fmt % c.center.imag,
                     f"circle{i}:center", fmt % s.resolution))
        rows.append((fmt % c.radius, "0", f"circle{i}:radius", fmt % s.resolution))
    return rows


def set_to_json(s: SpectralSet) -> dict:
    return {
        "resolution": s.resolution,
        "points": [[float(z.real), float(z.imag)] for z in
                   sorted(s.points, key=lambda z: (z.real, z.imag))],
        "intervals": [[iv.lo, iv.hi] for iv in s.intervals],
        "circles": [[c.center.real, c.center.imag, c.radius] for c in s.circles],
    }
