"""Offline uniqueness graph over sampled free poses.

Nodes are collision-free samples annotated with the landmark signatures a
noise-free panoramic sensor would see there.  An undirected edge joins two
nodes when their signature sets overlap; its weight is the number of shared
signatures.  Nodes with no edge between them see distinctly different
information, which is exactly what the target picker looks for.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .models import ObsNoiseParams, visible_landmarks
from .world import Environment, Pose, sample_free_pose

UG_FORMAT_VERSION = 1


@dataclass(frozen=True)
class UGraphNode:
    pose: Pose
    signature_set: frozenset[int]


class UniquenessGraph:
    """Immutable node list plus a dense shared-signature weight matrix.

    Only strictly positive weights count as edges; there are no self-edges.
    """

    def __init__(self, nodes: list[UGraphNode], weights: np.ndarray) -> None:
        self.nodes = list(nodes)
        w = np.asarray(weights, dtype=np.int32)
        n = len(self.nodes)
        if w.shape != (n, n):
            raise ValueError(f"weight matrix shape {w.shape} does not match {n} nodes")
        np.fill_diagonal(w, 0)
        self.weights = w
        self.node_xy = np.array([[nd.pose.x, nd.pose.y] for nd in self.nodes]).reshape(-1, 2)

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return int(np.count_nonzero(np.triu(self.weights, k=1)))

    def edge_weight(self, a: int, b: int) -> int:
        return int(self.weights[a, b])

    def edges(self) -> list[tuple[int, int, int]]:
        ii, jj = np.nonzero(np.triu(self.weights, k=1))
        return [(int(i), int(j), int(self.weights[i, j])) for i, j in zip(ii, jj)]


def signature_set(env: Environment, pose: Pose, p: ObsNoiseParams,
                  use_fov: bool = False) -> frozenset[int]:
    """Signatures visible from a pose with a noise-free sensor.

    Panoramic by default: the graph describes places, not headings, so the
    node's own orientation only restricts visibility when ``use_fov`` is set.
    """
    fov = p.fov if use_fov else 2.0 * math.pi
    idx = visible_landmarks(env, pose, p, fov=fov)
    return frozenset(int(env.landmark_ids[i]) for i in idx)


def build(env: Environment, n: int, rng: np.random.Generator, p: ObsNoiseParams,
          use_fov: bool = False, clearance: float | None = None) -> UniquenessGraph:
    """Sample n free poses and connect every pair that shares signatures.

    ``clearance`` widens the sampling standoff from obstacles beyond the robot
    radius so every node stays reachable for a planner that keeps a safety
    margin.  The pairwise check is O(n^2); with signature sets encoded as
    boolean rows the whole weight matrix is one integer matrix product.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    sample_env = env
    if clearance is not None and clearance > env.robot_radius:
        sample_env = Environment(bounds=env.bounds, obstacles=env.obstacles,
                                 landmarks=env.landmarks, robot_radius=clearance,
                                 regions=env.regions)
    nodes = []
    sigs = []
    for _ in range(n):
        pose = sample_free_pose(sample_env, rng)
        s = signature_set(env, pose, p, use_fov=use_fov)
        nodes.append(UGraphNode(pose=pose, signature_set=s))
        sigs.append(s)
    all_ids = sorted(set().union(*sigs)) if sigs else []
    if all_ids:
        col = {sid: k for k, sid in enumerate(all_ids)}
        B = np.zeros((n, len(all_ids)), dtype=np.int32)
        for i, s in enumerate(sigs):
            for sid in s:
                B[i, col[sid]] = 1
        W = B @ B.T
    else:
        W = np.zeros((n, n), dtype=np.int32)
    return UniquenessGraph(nodes, W)


def nodes_in_neighborhood(g: UniquenessGraph, center, radius: float) -> list[int]:
    """Indices of nodes within Euclidean (x, y) distance ``radius`` of center,
    ascending, so callers iterate deterministically."""
    if radius <= 0:
        raise ValueError("radius must be > 0")
    c = np.asarray(center, dtype=float)[:2]
    d = np.linalg.norm(g.node_xy - c, axis=1)
    return [int(i) for i in np.flatnonzero(d <= radius)]


def save(g: UniquenessGraph, path) -> None:
    """Persist the graph as versioned JSON (nodes with cached signature sets,
    plus the positive-weight edge list)."""
    payload = {
        "format_version": UG_FORMAT_VERSION,
        "nodes": [
            {"pose": [nd.pose.x, nd.pose.y, nd.pose.theta],
             "signatures": sorted(nd.signature_set)}
            for nd in g.nodes
        ],
        "edges": g.edges(),
    }
    with open(path, "w") as f:
        json.dump(payload, f, separators=(",", ":"))


def load(path) -> UniquenessGraph:
    with open(path) as f:
        payload = json.load(f)
    version = payload.get("format_version")
    if version != UG_FORMAT_VERSION:
        raise ValueError(f"unsupported uniqueness-graph format_version {version!r}")
    nodes = [
        UGraphNode(pose=Pose(*nd["pose"]), signature_set=frozenset(nd["signatures"]))
        for nd in payload["nodes"]
    ]
    W = np.zeros((len(nodes), len(nodes)), dtype=np.int32)
    for i, j, w in payload["edges"]:
        W[i, j] = w
        W[j, i] = w
    return UniquenessGraph(nodes, W)
