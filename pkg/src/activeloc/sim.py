"""Closed-loop kidnapped-robot simulator.

A scenario runs in two phases: first the robot sits still while the filter
whittles the uniformly-sampled initial belief down to a stable set of
hypotheses; then the planning executive drives the robot until the belief is
unimodal.  Everything is derived from one master seed, so a rerun of the same
scenario is byte-identical.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import belief as bel
from . import models, planner, uniqueness
from .belief import Belief, FilterParams
from .config import ScenarioConfig
from .models import Control, Observation
from .world import Environment, Pose, is_free, load_map, sample_free_pose

TRACE_SCHEMA_VERSION = 1


class GroundTruthCollision(Exception):
    """The simulated robot hit an obstacle (a planner failure, not a filter one)."""


def step_truth(x: Pose, u: Control, Q: np.ndarray, dt: float,
               rng: np.random.Generator | None) -> Pose:
    """Propagate the ground-truth robot with sampled actuation noise."""
    if rng is None:
        w = (0.0, 0.0)
    else:
        L = np.linalg.cholesky(np.asarray(Q, float) + 1e-18 * np.eye(2))
        w = L @ rng.standard_normal(2)
    return models.propagate(x, u, w, dt)


class TraceLog:
    """Append-only, JSON-lines-serializable record of a run.

    An optional ``validator`` callable runs on every belief snapshot before it
    is recorded; tests use it to assert filter invariants throughout a run.
    """

    def __init__(self, meta: dict | None = None, validator=None):
        self.records: list[dict] = []
        self.validator = validator
        header = {"type": "meta", "schema_version": TRACE_SCHEMA_VERSION}
        if meta:
            header.update(meta)
        self.records.append(header)

    def step(self, t: float, truth: Pose, u: Control, z: list[Observation],
             b: Belief) -> None:
        if self.validator is not None:
            self.validator(b)
        self.records.append({
            "type": "step",
            "t": t,
            "truth": [truth.x, truth.y, truth.theta],
            "control": [u.v, u.omega],
            "obs": [[o.landmark_id, o.range, o.bearing] for o in z],
            "modes": [
                {"mu": [m.mean.x, m.mean.y, m.mean.theta],
                 "sigma_diag": [float(m.cov[0, 0]), float(m.cov[1, 1]), float(m.cov[2, 2])],
                 "w": m.weight, "beta": m.beta}
                for m in b.modes
            ],
        })

    def event(self, name: str, **fields) -> None:
        rec = {"type": "event", "event": name}
        rec.update(fields)
        self.records.append(rec)

    def steps(self) -> list[dict]:
        return [r for r in self.records if r["type"] == "step"]

    def events(self, name: str | None = None) -> list[dict]:
        evs = [r for r in self.records if r["type"] == "event"]
        return evs if name is None else [e for e in evs if e["event"] == name]

    def dumps(self) -> str:
        return "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in self.records)

    def save(self, path) -> None:
        with open(path, "w") as f:
            f.write(self.dumps())

    @staticmethod
    def load(path) -> "TraceLog":
        with open(path) as f:
            records = [json.loads(line) for line in f if line.strip()]
        if not records or records[0].get("type") != "meta":
            raise ValueError("trace file has no meta header")
        version = records[0].get("schema_version")
        if version != TRACE_SCHEMA_VERSION:
            raise ValueError(f"unsupported trace schema_version {version!r} "
                             f"(expected {TRACE_SCHEMA_VERSION})")
        log = TraceLog.__new__(TraceLog)
        log.records = records
        return log


class ClosedLoopSim:
    """Planner-facing hooks around the seeded ground-truth robot.

    ``noise_scale`` scales the noise actually injected (actuation and sensor)
    relative to what the filter models; below 1 the filter runs conservative.
    """

    def __init__(self, env: Environment, truth: Pose, fp: FilterParams, dt: float,
                 rng_truth: np.random.Generator | None,
                 rng_obs: np.random.Generator | None,
                 noiseless: bool = False, noise_scale: float = 1.0,
                 t0: float = 0.0, k0: int = 0):
        self.env = env
        self.truth = truth
        self.fp = fp
        self.dt = dt
        self.rng_truth = None if noiseless else rng_truth
        self.rng_obs = None if noiseless else rng_obs
        self.q_inject = np.asarray(fp.Q, float) * noise_scale ** 2
        self.obs_inject = fp.obs.scaled(noise_scale)
        self.k = k0
        self._t0 = t0

    @property
    def t(self) -> float:
        return self._t0 + self.k * self.dt

    def truth_pose(self) -> Pose:
        return self.truth

    def apply(self, u: Control) -> list[Observation]:
        nxt = step_truth(self.truth, u, self.q_inject, self.dt, self.rng_truth)
        if not is_free(self.env, nxt):
            raise GroundTruthCollision(
                f"ground truth hit an obstacle at ({nxt.x:.3f}, {nxt.y:.3f}), t={self.t:.2f}")
        self.truth = nxt
        self.k += 1
        return models.observe(self.env, self.truth, self.obs_inject, rng=self.rng_obs)


@dataclass
class ScenarioResult:
    trace: TraceLog
    final_belief: Belief
    converged: bool
    epochs: int
    truth: Pose
    phase1_steps: int
    collided: bool = False


def run_scenario(cfg: ScenarioConfig, env: Environment | None = None,
                 graph: uniqueness.UniquenessGraph | None = None,
                 check_invariants: bool = False) -> ScenarioResult:
    """Execute a full scenario from config: stationary initial filtering, then
    the receding-horizon disambiguation loop.  Deterministic under cfg.seed."""
    if env is None:
        env = load_map(cfg.map_path)
    fp = cfg.filter_params()
    pp = cfg.planner_params()
    seq = np.random.SeedSequence(cfg.seed)
    rng_init, rng_truth, rng_obs, rng_plan, rng_start, rng_ug = (
        np.random.default_rng(s) for s in seq.spawn(6))

    if graph is None:
        if cfg.ug_path is not None:
            graph = uniqueness.load(cfg.ug_path)
        else:
            graph = uniqueness.build(env, cfg.ug_build_n,
                                     np.random.default_rng(cfg.ug_build_seed)
                                     if cfg.ug_build_seed is not None else rng_ug,
                                     fp.obs, use_fov=cfg.ug_use_fov,
                                     clearance=cfg.ug_clearance)

    if cfg.start_pose == "random":
        truth = sample_free_pose(env, rng_start)
    else:
        truth = Pose(*cfg.start_pose)
    if not is_free(env, truth):
        raise ValueError(f"start pose {truth} is not collision-free")

    validator = (lambda belief_: belief_.validate()) if check_invariants else None
    log = TraceLog(meta={"seed": cfg.seed, "map": str(cfg.map_path),
                         "dt": cfg.dt, "n_samples": cfg.n_samples},
                   validator=validator)
    b = bel.init_belief(env, cfg.n_samples, cfg.sigma0, rng_init)
    noiseless = cfg.noiseless
    obs_rng = None if noiseless else rng_obs
    obs_inject = fp.obs.scaled(cfg.noise_scale)

    # phase 1: stationary filtering until the mode count holds still
    log.event("phase1_start", n_modes=len(b.modes))
    u0 = Control(0.0, 0.0)
    stable = 0
    k = 0
    while k < cfg.phase1_max_steps:
        z = models.observe(env, truth, obs_inject, rng=obs_rng)
        n_before = len(b.modes)
        b, _ = bel.step_belief(b, u0, z, env, fp, cfg.dt)
        k += 1
        log.step(k * cfg.dt, truth, u0, z, b)
        stable = stable + 1 if len(b.modes) == n_before else 0
        if stable >= cfg.phase1_dwell:
            break
    log.event("phase1_end", n_modes=len(b.modes), steps=k)

    # phase 2: receding-horizon disambiguation
    hooks = ClosedLoopSim(env, truth, fp, cfg.dt,
                          rng_truth=rng_truth, rng_obs=rng_obs,
                          noiseless=noiseless, noise_scale=cfg.noise_scale,
                          t0=k * cfg.dt)
    collided = False
    try:
        res = planner.m3p_run(b, env, graph, hooks, pp, fp, cfg.dt, rng_plan, log=log)
        b, converged, epochs = res.belief, res.converged, res.epochs
    except GroundTruthCollision as e:
        log.event("collision", detail=str(e))
        converged = False
        epochs = len(log.events("replan"))
        collided = True
    if check_invariants:
        b.validate()
    log.event("done", converged=converged, n_modes=len(b.modes),
              max_weight=float(b.weights.max()))
    return ScenarioResult(trace=log, final_belief=b, converged=converged,
                          epochs=epochs, truth=hooks.truth,
                          phase1_steps=k, collided=collided)
