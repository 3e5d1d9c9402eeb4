"""Built-in environments: the eight-room symmetric maze and randomized
pen-grid worlds for disambiguation property checks.

The maze has 180-degree rotational symmetry.  Every room carries the same
interior marker layout (ids 10/11/12) and an identical door marker (id 20), so
a stationary robot cannot tell rooms apart.  Markers on the central island
walls (ids 31-34) pair up under the rotation, narrowing a belief to a
symmetric pair of hypotheses, and four globally unique markers (ids 61-64)
sit inside the narrow central passage, the only place the pair can be split.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .world import ConvexPolygon, Environment, Landmark, Pose

WALL = 0.2  # wall thickness, meters


def _rect(x0, y0, x1, y1) -> ConvexPolygon:
    return ConvexPolygon.rectangle(x0, y0, x1, y1)


def eight_room_maze(robot_radius: float = 0.15) -> Environment:
    """Two rows of four identical rooms around a central narrow passage.

    Rooms are numbered column-major (R1 top-left, R2 below it, ... R7
    top-right, R8 below it), so the 180-degree rotation pairs R1-R8, R2-R7,
    R3-R6 and R4-R5, and R7 is a corner room.
    """
    W, H = 16.0, 10.0
    t = WALL / 2.0
    obstacles: list[ConvexPolygon] = []

    # vertical dividers between rooms, top and bottom rows
    for cx in (4.0, 8.0, 12.0):
        obstacles.append(_rect(cx - t, 7.0, cx + t, H))
        obstacles.append(_rect(cx - t, 0.0, cx + t, 3.0))
    # corridor-facing room walls with centered 1.2 m doors
    for x0 in (0.0, 4.0, 8.0, 12.0):
        c = x0 + 2.0
        obstacles.append(_rect(x0, 6.8, c - 0.6, 7.0))
        obstacles.append(_rect(c + 0.6, 6.8, x0 + 4.0, 7.0))
        obstacles.append(_rect(x0, 3.0, c - 0.6, 3.2))
        obstacles.append(_rect(c + 0.6, 3.0, x0 + 4.0, 3.2))
    # central island enclosing the narrow passage (open at x=4 and x=12)
    obstacles.append(_rect(4.0, 5.5, 12.0, 5.7))
    obstacles.append(_rect(4.0, 4.3, 12.0, 4.5))

    landmarks: list[Landmark] = []
    # identical room interiors; bottom rooms carry the 180-degree rotated copy
    for x0 in (0.0, 4.0, 8.0, 12.0):
        c = x0 + 2.0
        landmarks += [
            Landmark(10, c, H - 0.15),
            Landmark(11, x0 + 0.15, 8.5),
            Landmark(12, x0 + 3.85, 8.5),
            Landmark(20, c, 6.7),
        ]
        landmarks += [
            Landmark(10, c, 0.15),
            Landmark(11, x0 + 3.85, 1.5),
            Landmark(12, x0 + 0.15, 1.5),
            Landmark(20, c, 3.3),
        ]
    # island face markers, paired under the rotation
    north = {5.0: 31, 7.0: 32, 9.0: 33, 11.0: 34}
    for x, sid in north.items():
        landmarks.append(Landmark(sid, x, 5.75))
        landmarks.append(Landmark(sid, W - x, 4.25))
    # unique passage markers (rotationally asymmetric on purpose)
    landmarks += [
        Landmark(61, 6.0, 5.45),
        Landmark(62, 10.0, 5.45),
        Landmark(63, 6.0, 4.55),
        Landmark(64, 10.0, 4.55),
    ]

    return Environment(
        bounds=(0.0, 0.0, W, H),
        obstacles=obstacles,
        landmarks=landmarks,
        robot_radius=robot_radius,
        regions={"passage": (4.0, 4.3, 12.0, 5.7)},
    )


ROOM_CENTERS = {
    "R1": (2.0, 8.5), "R2": (2.0, 1.5), "R3": (6.0, 8.5), "R4": (6.0, 1.5),
    "R5": (10.0, 8.5), "R6": (10.0, 1.5), "R7": (14.0, 8.5), "R8": (14.0, 1.5),
}


def maze_congruent_poses(true_pose: Pose) -> list[Pose]:
    """The eight indistinguishable copies of a pose placed in room R7.

    Top rooms are translations; bottom rooms are the 180-degree rotation.
    """
    dx = true_pose.x - ROOM_CENTERS["R7"][0]
    dy = true_pose.y - ROOM_CENTERS["R7"][1]
    out = []
    for room, (cx, cy) in sorted(ROOM_CENTERS.items()):
        if cy > 5.0:
            out.append(Pose(cx + dx, cy + dy, true_pose.theta))
        else:
            out.append(Pose(cx - dx, cy - dy, true_pose.theta + math.pi))
    return out


# -- randomized pen worlds ----------------------------------------------------


@dataclass(frozen=True)
class PenWorld:
    """A pen-grid environment plus the congruent hypothesis poses.

    Every pen looks identical from inside (shared interior ids), and each pen
    owns one globally unique marker a short drive outside its opening, so a
    distinctive reachable target always exists for every hypothesis.
    """

    env: Environment
    congruent_poses: list[Pose]
    pen_centers: list[tuple[float, float]]
    unique_ids: list[int]


def _rot(theta: float, p: tuple[float, float]) -> tuple[float, float]:
    c, s = math.cos(theta), math.sin(theta)
    return (c * p[0] - s * p[1], c * p[1] + s * p[0])


def pen_world(n_pens: int, rng: np.random.Generator,
              sensor_range: float = 2.0, robot_radius: float = 0.15) -> PenWorld:
    """n identical three-walled pens on a jittered row, rotated at random.

    The unique marker sits ``sensor_range + 1.2`` m out of each pen's opening:
    invisible from inside, seen only by actually driving out toward it.
    """
    if n_pens < 2:
        raise ValueError("need at least 2 pens")
    spacing = 9.0
    W = spacing * n_pens + 3.0
    H = 16.0
    half = 1.5                        # pen half-width
    stand_off = sensor_range + 1.2    # unique marker distance from pen center

    obstacles: list[ConvexPolygon] = []
    landmarks: list[Landmark] = []
    centers: list[tuple[float, float]] = []
    poses: list[Pose] = []
    unique_ids: list[int] = []

    # pen-local geometry: opening faces -y; three walls (N, E, W)
    wall_specs = [
        (-half, half - WALL, half, half),            # back (north)
        (-half, -half, -half + WALL, half - WALL),   # west
        (half - WALL, -half, half, half - WALL),     # east
    ]
    interior = [(5, (0.0, 0.8)), (6, (0.8, 0.2))]
    unique_local = (0.0, -stand_off)

    for k in range(n_pens):
        cx = 1.5 + spacing / 2.0 + spacing * k + rng.uniform(-0.5, 0.5)
        cy = H / 2.0 + rng.uniform(-1.5, 1.5)
        rot = rng.integers(0, 4) * math.pi / 2.0
        centers.append((cx, cy))
        for (x0, y0, x1, y1) in wall_specs:
            corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
            world = [(cx + px, cy + py) for px, py in (_rot(rot, c) for c in corners)]
            obstacles.append(ConvexPolygon(world))
        for sid, local in interior:
            wx, wy = _rot(rot, local)
            landmarks.append(Landmark(sid, cx + wx, cy + wy))
        ux, uy = _rot(rot, unique_local)
        uid = 100 + k
        landmarks.append(Landmark(uid, cx + ux, cy + uy))
        unique_ids.append(uid)
        poses.append(Pose(cx, cy, rot))

    env = Environment(
        bounds=(0.0, 0.0, W, H),
        obstacles=obstacles,
        landmarks=landmarks,
        robot_radius=robot_radius,
    )
    return PenWorld(env=env, congruent_poses=poses, pen_centers=centers,
                    unique_ids=unique_ids)
