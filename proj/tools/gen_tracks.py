#!/usr/bin/env python3
"""Generate the bundled track files from centerline descriptions.

Each track is a centerline made of straights, arcs and sharp corners with a
per-vertex corridor width. Walls are the left/right miter offsets of the
centerline plus a closed back wall behind the spawn; the far end is left
open so the robot reaches open space when it leaves the passage.

    python3 tools/gen_tracks.py            # write tracks/*.json
    python3 tools/gen_tracks.py --check    # also drive each track with pure pursuit
"""

import argparse
import json
import math
import pathlib

from shapely.geometry import LineString, Polygon

ROOT = pathlib.Path(__file__).resolve().parent.parent
OUT = ROOT / "tracks"

# Default robot: 1.0 x 0.6 body, 0.05 margin, lidar 0.2 ahead, wheelbase 0.6.
HALF_LENGTH = 0.55
HALF_WIDTH = 0.35
LIDAR_OFFSET = 0.2
WHEELBASE = 0.6
MAX_STEER = 0.6
SPAWN_DISTANCE = 1.0
WAYPOINT_SPACING = 1.5


class Centerline:
    def __init__(self, width, heading_deg=0.0, origin=(0.0, 0.0)):
        self.points = [origin]
        self.widths = [width]
        self.heading = math.radians(heading_deg)
        self.width = width

    def _add(self, p):
        self.points.append(p)
        self.widths.append(self.width)

    def straight(self, length, width=None):
        if width is not None:
            self.width = width
        x, y = self.points[-1]
        self._add((x + length * math.cos(self.heading), y + length * math.sin(self.heading)))
        return self

    def corner(self, angle_deg):
        self.heading += math.radians(angle_deg)
        return self

    def arc(self, angle_deg, radius, step_deg=7.5):
        n = max(1, int(math.ceil(abs(angle_deg) / step_deg)))
        dtheta = math.radians(angle_deg) / n
        x, y = self.points[-1]
        sign = 1.0 if angle_deg > 0 else -1.0
        cx = x - sign * radius * math.sin(self.heading)
        cy = y + sign * radius * math.cos(self.heading)
        for _ in range(n):
            self.heading += dtheta
            self._add((cx + sign * radius * math.sin(self.heading), cy - sign * radius * math.cos(self.heading)))
        return self

    def wavy(self, length, amplitude, period, step=0.25):
        """Sinusoidal wiggle superposed on the current heading."""
        x0, y0 = self.points[-1]
        h = self.heading
        n = int(round(length / step))
        for i in range(1, n + 1):
            s = i * step
            off = amplitude * math.sin(2 * math.pi * s / period)
            self._add((x0 + s * math.cos(h) - off * math.sin(h), y0 + s * math.sin(h) + off * math.cos(h)))
        return self


def offsets(points, widths):
    left, right = [], []
    for i, p in enumerate(points):
        if i == 0:
            d_in = d_out = unit(sub(points[1], p))
        elif i == len(points) - 1:
            d_in = d_out = unit(sub(p, points[i - 1]))
        else:
            d_in = unit(sub(p, points[i - 1]))
            d_out = unit(sub(points[i + 1], p))
        n_in = (-d_in[1], d_in[0])
        n_out = (-d_out[1], d_out[0])
        nb = unit((n_in[0] + n_out[0], n_in[1] + n_out[1]))
        scale = (widths[i] / 2.0) / max(1e-9, nb[0] * n_in[0] + nb[1] * n_in[1])
        left.append((p[0] + nb[0] * scale, p[1] + nb[1] * scale))
        right.append((p[0] - nb[0] * scale, p[1] - nb[1] * scale))
    return left, right


def sub(a, b):
    return (a[0] - b[0], a[1] - b[1])


def unit(v):
    n = math.hypot(*v)
    return (v[0] / n, v[1] / n)


def point_at(points, s):
    """Point and tangent heading at arc length s along a polyline."""
    acc = 0.0
    for a, b in zip(points, points[1:]):
        seg = math.dist(a, b)
        if acc + seg >= s or b is points[-1]:
            t = min(1.0, max(0.0, (s - acc) / seg))
            return (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])), math.atan2(b[1] - a[1], b[0] - a[0])
        acc += seg
    raise ValueError


def polyline_length(points):
    return sum(math.dist(a, b) for a, b in zip(points, points[1:]))


def rnd(v):
    return round(v, 4)


def build(name, description, centerline):
    pts = centerline.points
    left, right = offsets(pts, centerline.widths)
    total = polyline_length(pts)
    (sx, sy), sth = point_at(pts, SPAWN_DISTANCE)
    waypoints = []
    s = SPAWN_DISTANCE + WAYPOINT_SPACING
    while s < total - 0.5 * WAYPOINT_SPACING:
        (wx, wy), wth = point_at(pts, s)
        waypoints.append([rnd(wx), rnd(wy), rnd(wth)])
        s += WAYPOINT_SPACING
    (ex, ey), eth = point_at(pts, total)
    waypoints.append([rnd(ex), rnd(ey), rnd(eth)])
    return {
        "name": name,
        "description": description,
        "walls": [
            [[rnd(x), rnd(y)] for x, y in left],
            [[rnd(x), rnd(y)] for x, y in right],
            [[rnd(right[0][0]), rnd(right[0][1])], [rnd(left[0][0]), rnd(left[0][1])]],
        ],
        "spawn": [rnd(sx), rnd(sy), rnd(sth)],
        "exit_band": [[rnd(left[-1][0]), rnd(left[-1][1])], [rnd(right[-1][0]), rnd(right[-1][1])]],
        "waypoints": waypoints,
        "_centerline": pts,
    }


def concat(*parts, width):
    """Chains several centerline builders into one (used for the big track)."""
    c = Centerline(width)
    for fn in parts:
        fn(c)
    return c


# Track segments. Tracks 1-3 are also the three sections of the big track.
def sec_track1(c):  # 45-degree bends and a long straight
    c.straight(4.0, 1.8).corner(45).straight(3.0).corner(-45).straight(3.0).corner(-45).straight(3.0).corner(45).straight(3.0)


def sec_track2(c):  # two 90-degree turns
    c.straight(3.0, 1.9).corner(90).straight(4.5).corner(-90).straight(4.0)


def sec_track3(c):  # hairpin and a 1 m wide squeeze
    c.straight(3.0, 1.9).arc(180, 1.25).straight(3.0).straight(0.8, 1.0).straight(2.4).straight(0.8, 1.7).straight(2.5)


TRACKS = {
    "corridor": ("Straight 10 m corridor, 1.2 m wide.",
                 lambda: Centerline(1.2).straight(10.0)),
    "turn90": ("Single 90-degree left turn, 1.9 m wide legs.",
               lambda: Centerline(1.9).straight(5.0).corner(90).straight(5.0)),
    "track1": ("Track 1: 45-degree bends, 1.8 m wide.",
               lambda: concat(sec_track1, width=1.8)),
    "track2": ("Track 2: two 90-degree turns, 1.9 m wide.",
               lambda: concat(sec_track2, width=1.9)),
    "track3": ("Track 3: 180-degree hairpin and a 1.0 m squeeze.",
               lambda: concat(sec_track3, width=1.9)),
    "big_track": ("Big track: Track 1, 2 and 3 joined; 45/90/180-degree corners, narrowest 1.0 m.",
                  lambda: concat(sec_track1, sec_track2, sec_track3, width=1.8)),
    "track4": ("Track 4 (unseen): uneven zig-zag walls around a straight course.",
               lambda: Centerline(1.7).straight(2.0).wavy(10.0, 0.15, 2.0).straight(2.0)),
    "track5": ("Track 5 (unseen): gentle left and right arcs, 1.7 m wide.",
               lambda: Centerline(1.7).straight(2.5).arc(60, 3.0).arc(-60, 3.0).straight(2.5)),
    "track6": ("Track 6 (unseen): mixed 45- and 90-degree corners, 1.8 m wide.",
               lambda: Centerline(1.8).straight(3.0).corner(-45).straight(3.0).corner(-45).straight(3.0).corner(90).straight(3.5)),
    "track7": ("Track 7 (unseen): continuous 90-degree turns, 1.9 m wide.",
               lambda: Centerline(1.9).straight(3.0).corner(90).straight(3.5).corner(90).straight(3.5).corner(-90).straight(3.5)),
    "track8": ("Track 8 (unseen): curvy sinusoidal passage, 1.7 m wide.",
               lambda: Centerline(1.7).straight(2.0).wavy(12.0, 0.9, 8.0).straight(2.0)),
}


# --- pure-pursuit feasibility check --------------------------------------------

def footprint(x, y, th):
    c, s = math.cos(th), math.sin(th)
    pts = [(HALF_LENGTH, HALF_WIDTH), (-HALF_LENGTH, HALF_WIDTH), (-HALF_LENGTH, -HALF_WIDTH), (HALF_LENGTH, -HALF_WIDTH)]
    return Polygon([(x + c * px - s * py, y + s * px + c * py) for px, py in pts])


def drive(track, lookahead=1.2, dt=0.2, substeps=10, v=0.6, max_steps=1500):
    walls = [LineString(w) for w in track["walls"]]
    pts = track["_centerline"]
    path = LineString(pts)
    x, y, th = track["spawn"]
    for step in range(max_steps):
        pos_s = path.project(LineString([(x, y), (x, y)]).interpolate(0))
        if pos_s >= path.length - 0.05:
            return True, step
        target = path.interpolate(min(path.length + 5.0, pos_s + lookahead))
        if pos_s + lookahead > path.length:
            (ex, ey), eth = point_at(pts, path.length)
            extra = pos_s + lookahead - path.length
            target = type(target)(ex + extra * math.cos(eth), ey + extra * math.sin(eth))
        alpha = math.atan2(target.y - y, target.x - x) - th
        w = math.atan2(2 * WHEELBASE * math.sin(alpha), lookahead)
        w = max(-MAX_STEER, min(MAX_STEER, w))
        h = dt / substeps
        rate = v / WHEELBASE * math.tan(w)
        for _ in range(substeps):
            mid = th + 0.5 * h * rate
            x += h * v * math.cos(mid)
            y += h * v * math.sin(mid)
            th += h * rate
        fp = footprint(x, y, th)
        if any(fp.intersects(wl) for wl in walls):
            return False, step
    return False, max_steps


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--check", action="store_true")
    args = ap.parse_args()
    OUT.mkdir(exist_ok=True)
    ok = True
    for name, (desc, make) in TRACKS.items():
        track = build(name, desc, make())
        spawn_fp = footprint(*track["spawn"])
        assert not any(spawn_fp.intersects(LineString(w)) for w in track["walls"]), name
        if args.check:
            success, steps = drive(track)
            ok &= success
            print(f"{name:10s} pure pursuit: {'ok' if success else 'FAILED'} after {steps} steps")
        track.pop("_centerline")
        (OUT / f"{name}.json").write_text(json.dumps(track, indent=1) + "\n")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
