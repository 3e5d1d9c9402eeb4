"""Static 2D environment: landmarks with signatures, convex obstacles, free-space
queries and map file I/O.

The robot is treated as a disc of ``robot_radius`` for all collision queries, so
orientation never enters a free-space test.  Obstacles are convex polygons
(rooms are assembled from axis-aligned wall rectangles, which are convex).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import yaml

MAP_FORMAT_VERSION = 1

TWO_PI = 2.0 * math.pi


class MapError(Exception):
    """Raised when a map file cannot be parsed or violates an invariant."""


class SamplingExhausted(Exception):
    """Raised when rejection sampling fails to find a free pose."""


def wrap_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    return math.pi - (math.pi - theta) % TWO_PI


def wrap_angles(theta: np.ndarray) -> np.ndarray:
    """Vectorized :func:`wrap_angle`."""
    return np.pi - (np.pi - np.asarray(theta)) % TWO_PI


@dataclass(frozen=True)
class Pose:
    """Planar robot pose (x, y in meters; theta in radians, wrapped to (-pi, pi])."""

    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))

    @property
    def xy(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta])

    @staticmethod
    def from_array(v) -> "Pose":
        return Pose(float(v[0]), float(v[1]), float(v[2]))

    def distance_to(self, other: "Pose") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Landmark:
    """A signed beacon. ``id`` is a signature and is deliberately non-unique."""

    id: int
    x: float
    y: float

    @property
    def xy(self) -> np.ndarray:
        return np.array([self.x, self.y])


class ConvexPolygon:
    """Convex polygon with vectorized containment / distance / occlusion tests.

    Vertices are stored counter-clockwise; construction reorders if needed.
    """

    def __init__(self, vertices) -> None:
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] < 3 or v.shape[1] != 2:
            raise MapError(f"polygon needs >= 3 planar vertices, got shape {v.shape}")
        if _signed_area(v) < 0:
            v = v[::-1].copy()
        if _signed_area(v) <= 0:
            raise MapError("polygon is degenerate (zero area)")
        self.vertices = v
        self._edges = np.roll(v, -1, axis=0) - v          # (E, 2)
        # inward normals for CCW ordering
        self._normals = np.stack([-self._edges[:, 1], self._edges[:, 0]], axis=1)
        norms = np.linalg.norm(self._normals, axis=1, keepdims=True)
        self._normals = self._normals / norms
        self._offsets = np.einsum("ij,ij->i", self._normals, v)
        self.aabb = (v[:, 0].min(), v[:, 1].min(), v[:, 0].max(), v[:, 1].max())

    @staticmethod
    def rectangle(x0: float, y0: float, x1: float, y1: float) -> "ConvexPolygon":
        if not (x1 > x0 and y1 > y0):
            raise MapError(f"rectangle [{x0},{y0},{x1},{y1}] has non-positive extent")
        return ConvexPolygon([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])

    def contains(self, pts: np.ndarray) -> np.ndarray:
        """Boolean mask: which of the (N, 2) points lie inside (boundary counts)."""
        pts = np.atleast_2d(pts)
        s = pts @ self._normals.T - self._offsets  # (N, E), >= 0 means inside half-plane
        return np.all(s >= 0.0, axis=1)

    def distance(self, pts: np.ndarray) -> np.ndarray:
        """Euclidean distance from each point to the polygon (0 inside)."""
        pts = np.atleast_2d(pts)
        d = _point_segment_distances(pts, self.vertices, np.roll(self.vertices, -1, axis=0))
        dist = d.min(axis=1)
        dist[self.contains(pts)] = 0.0
        return dist

    def intersects_segments(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        """Which segments p[i]->q[i] pass through the polygon interior.

        Touching the boundary only (zero-length overlap) does not count, so a
        sight line grazing a wall corner stays clear.
        """
        p = np.atleast_2d(p)
        q = np.atleast_2d(q)
        d = q - p
        # clip parameter interval [t0, t1] against each inward half-plane
        denom = d @ self._normals.T                       # (N, E)
        num = self._offsets - p @ self._normals.T         # (N, E)
        t0 = np.zeros(len(p))
        t1 = np.ones(len(p))
        with np.errstate(divide="ignore", invalid="ignore"):
            t = num / denom
        entering = denom > 0
        leaving = denom < 0
        parallel_out = (np.abs(denom) <= 1e-12) & (num > 0)
        t_enter = np.where(entering, t, -np.inf)
        t_leave = np.where(leaving, t, np.inf)
        t0 = np.maximum(t0, t_enter.max(axis=1, initial=-np.inf))
        t1 = np.minimum(t1, t_leave.min(axis=1, initial=np.inf))
        blocked = (t1 - t0) > 1e-9
        blocked &= ~parallel_out.any(axis=1)
        return blocked


def _signed_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _point_segment_distances(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distances from each of N points to each of E segments a[j]->b[j], (N, E)."""
    ab = b - a                                            # (E, 2)
    ap = pts[:, None, :] - a[None, :, :]                  # (N, E, 2)
    denom = np.einsum("ej,ej->e", ab, ab)
    t = np.einsum("nej,ej->ne", ap, ab) / np.where(denom > 0, denom, 1.0)
    t = np.clip(t, 0.0, 1.0)
    closest = a[None, :, :] + t[:, :, None] * ab[None, :, :]
    return np.linalg.norm(pts[:, None, :] - closest, axis=2)


@dataclass
class Environment:
    """Immutable world model; safe for concurrent read access."""

    bounds: tuple[float, float, float, float]   # (xmin, ymin, xmax, ymax)
    obstacles: list[ConvexPolygon]
    landmarks: list[Landmark]
    robot_radius: float
    regions: dict[str, tuple[float, float, float, float]] = field(default_factory=dict)

    def __post_init__(self):
        xmin, ymin, xmax, ymax = self.bounds
        if not (xmax > xmin and ymax > ymin):
            raise MapError(f"bounds {self.bounds} have non-positive extent")
        if self.robot_radius <= 0:
            raise MapError("robot_radius must be > 0")
        for lm in self.landmarks:
            if not (xmin <= lm.x <= xmax and ymin <= lm.y <= ymax):
                raise MapError(f"landmark id={lm.id} at ({lm.x}, {lm.y}) lies outside bounds")
        for k, poly in enumerate(self.obstacles):
            bx0, by0, bx1, by1 = poly.aabb
            if bx0 < xmin - 1e-9 or by0 < ymin - 1e-9 or bx1 > xmax + 1e-9 or by1 > ymax + 1e-9:
                raise MapError(f"obstacle #{k} extends outside bounds")
        self.landmark_xy = np.array([[lm.x, lm.y] for lm in self.landmarks]).reshape(-1, 2)
        self.landmark_ids = np.array([lm.id for lm in self.landmarks], dtype=int)
        self._build_stacked()

    def _build_stacked(self) -> None:
        # when every obstacle has the same vertex count (rectangles, typically),
        # collision and sight-line tests run as single stacked array ops
        counts = {len(p.vertices) for p in self.obstacles}
        if len(counts) == 1 and self.obstacles:
            self._stk_normals = np.stack([p._normals for p in self.obstacles])   # (P, E, 2)
            self._stk_offsets = np.stack([p._offsets for p in self.obstacles])   # (P, E)
            va = np.stack([p.vertices for p in self.obstacles])                  # (P, E, 2)
            vb = np.roll(va, -1, axis=1)
            self._stk_va = va.reshape(-1, 2)
            self._stk_vb = vb.reshape(-1, 2)
        else:
            self._stk_normals = None

    # -- free-space queries ------------------------------------------------

    def free_mask(self, xy: np.ndarray, radius: float | None = None) -> np.ndarray:
        """Which of the (N, 2) positions are collision-free for the robot disc."""
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        r = self.robot_radius if radius is None else radius
        xmin, ymin, xmax, ymax = self.bounds
        ok = (
            (xy[:, 0] >= xmin + r) & (xy[:, 0] <= xmax - r)
            & (xy[:, 1] >= ymin + r) & (xy[:, 1] <= ymax - r)
        )
        if not self.obstacles:
            return ok
        if self._stk_normals is not None:
            s = np.einsum("nk,pek->npe", xy, self._stk_normals) - self._stk_offsets
            inside_any = np.all(s >= 0.0, axis=2).any(axis=1)
            dmin = _point_segment_distances(xy, self._stk_va, self._stk_vb).min(axis=1)
            return ok & ~inside_any & (dmin > r)
        for poly in self.obstacles:
            if not ok.any():
                break
            idx = np.flatnonzero(ok)
            ok[idx] &= poly.distance(xy[idx]) > r
        return ok

    def segments_blocked(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        """Which sight lines p[i]->q[i] are blocked by some obstacle interior."""
        p = np.atleast_2d(p)
        q = np.atleast_2d(q)
        if not self.obstacles:
            return np.zeros(len(p), dtype=bool)
        if self._stk_normals is not None:
            d = q - p
            denom = np.einsum("nk,pek->npe", d, self._stk_normals)
            num = self._stk_offsets - np.einsum("nk,pek->npe", p, self._stk_normals)
            with np.errstate(divide="ignore", invalid="ignore"):
                t = num / denom
            t_enter = np.where(denom > 0, t, -np.inf).max(axis=2)
            t_exit = np.where(denom < 0, t, np.inf).min(axis=2)
            parallel_out = ((np.abs(denom) <= 1e-12) & (num > 0)).any(axis=2)
            overlap = np.minimum(t_exit, 1.0) - np.maximum(t_enter, 0.0)
            return (((overlap > 1e-9) & ~parallel_out).any(axis=1))
        blocked = np.zeros(len(p), dtype=bool)
        for poly in self.obstacles:
            live = np.flatnonzero(~blocked)
            if live.size == 0:
                break
            blocked[live] |= poly.intersects_segments(p[live], q[live])
        return blocked


def is_free(env: Environment, p: Pose) -> bool:
    """True iff the robot disc at (p.x, p.y) is inside bounds and clear of obstacles."""
    return bool(env.free_mask(np.array([[p.x, p.y]]))[0])


def is_free_segment(env: Environment, a: Pose, b: Pose, step: float = 0.01) -> bool:
    """True iff poses interpolated along a->b at spacing <= step are all free.

    Endpoints are always included; step must be > 0.
    """
    if step <= 0:
        raise ValueError("step must be > 0")
    dist = a.distance_to(b)
    n = max(2, int(math.ceil(dist / step)) + 1)
    xs = np.linspace(a.x, b.x, n)
    ys = np.linspace(a.y, b.y, n)
    return bool(env.free_mask(np.stack([xs, ys], axis=1)).all())


def sample_free_pose(env: Environment, rng: np.random.Generator,
                     max_attempts: int = 10_000) -> Pose:
    """Rejection-sample a pose uniform over free (x, y) with uniform heading."""
    xmin, ymin, xmax, ymax = env.bounds
    batch = 64
    attempts = 0
    while attempts < max_attempts:
        n = min(batch, max_attempts - attempts)
        xy = rng.uniform([xmin, ymin], [xmax, ymax], size=(n, 2))
        th = rng.uniform(-math.pi, math.pi, size=n)
        ok = env.free_mask(xy)
        hit = np.flatnonzero(ok)
        if hit.size:
            i = hit[0]
            return Pose(xy[i, 0], xy[i, 1], th[i])
        attempts += n
    raise SamplingExhausted(f"no free pose found in {max_attempts} attempts")


# -- map file I/O -----------------------------------------------------------


def load_map(path) -> Environment:
    """Load an environment from a YAML map file.

    Schema (``format_version: 1``)::

        format_version: 1
        bounds: [xmin, ymin, xmax, ymax]
        robot_radius: 0.15
        obstacles:              # list of vertex lists, meters
          - [[x, y], [x, y], ...]
        landmarks:
          - {id: 10, x: 1.0, y: 2.0}
        regions:                # optional named rectangles (metadata)
          passage: [x0, y0, x1, y1]
    """
    try:
        with open(path) as f:
            raw = yaml.safe_load(f)
    except FileNotFoundError:
        raise MapError(f"map file not found: {path}")
    except yaml.YAMLError as e:
        raise MapError(f"cannot parse {path}: {e}")
    return environment_from_dict(raw, name=str(path))


def environment_from_dict(raw: dict, name: str = "<map>") -> Environment:
    if not isinstance(raw, dict):
        raise MapError(f"{name}: top level must be a mapping")
    version = raw.get("format_version")
    if version != MAP_FORMAT_VERSION:
        raise MapError(f"{name}: unsupported format_version {version!r} "
                       f"(expected {MAP_FORMAT_VERSION})")
    for key in ("bounds", "robot_radius"):
        if key not in raw:
            raise MapError(f"{name}: missing required field '{key}'")
    bounds = raw["bounds"]
    if not (isinstance(bounds, (list, tuple)) and len(bounds) == 4):
        raise MapError(f"{name}: 'bounds' must be [xmin, ymin, xmax, ymax]")
    obstacles = []
    for k, verts in enumerate(raw.get("obstacles", []) or []):
        try:
            obstacles.append(ConvexPolygon(verts))
        except (MapError, TypeError, ValueError) as e:
            raise MapError(f"{name}: obstacle #{k}: {e}")
    landmarks = []
    for k, lm in enumerate(raw.get("landmarks", []) or []):
        try:
            landmarks.append(Landmark(id=int(lm["id"]), x=float(lm["x"]), y=float(lm["y"])))
        except (KeyError, TypeError, ValueError) as e:
            raise MapError(f"{name}: landmark #{k}: needs integer 'id' and numeric 'x','y' ({e})")
    regions = {}
    for rname, rect in (raw.get("regions", {}) or {}).items():
        if not (isinstance(rect, (list, tuple)) and len(rect) == 4):
            raise MapError(f"{name}: region '{rname}' must be [x0, y0, x1, y1]")
        regions[str(rname)] = tuple(float(v) for v in rect)
    try:
        return Environment(
            bounds=tuple(float(v) for v in bounds),
            obstacles=obstacles,
            landmarks=landmarks,
            robot_radius=float(raw["robot_radius"]),
            regions=regions,
        )
    except MapError as e:
        raise MapError(f"{name}: {e}")


def environment_to_dict(env: Environment) -> dict:
    return {
        "format_version": MAP_FORMAT_VERSION,
        "bounds": [float(v) for v in env.bounds],
        "robot_radius": float(env.robot_radius),
        "obstacles": [[[float(x), float(y)] for x, y in poly.vertices] for poly in env.obstacles],
        "landmarks": [{"id": int(lm.id), "x": float(lm.x), "y": float(lm.y)}
                      for lm in env.landmarks],
        "regions": {k: [float(v) for v in rect] for k, rect in env.regions.items()},
    }


def save_map(env: Environment, path) -> None:
    with open(path, "w") as f:
        yaml.safe_dump(environment_to_dict(env), f, sort_keys=False)
