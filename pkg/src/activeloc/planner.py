"""Online disambiguation planning.

Each planning epoch picks, per belief mode, a uniqueness-graph target whose
expected view overlaps least with every other mode's neighborhood, plans a
candidate trajectory to it, scores each candidate by the expected reduction in
mode count under a most-likely rollout (with a collision penalty), and executes
the best one until a replanning trigger fires: the mode count changes, a mode
is about to violate clearance, or the policy horizon runs out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import belief as bel
from . import models
from .belief import Belief, FilterParams, step_belief
from .models import Control
from .uniqueness import UGraphNode, UniquenessGraph, nodes_in_neighborhood
from .world import Environment, Pose, wrap_angle


class EmptyNeighborhood(Exception):
    """A mode has no uniqueness-graph nodes within the neighborhood radius."""

    def __init__(self, mode_index: int, radius: float):
        self.mode_index = mode_index
        self.radius = radius
        super().__init__(f"mode {mode_index} has no graph nodes within radius {radius}")


class PlanningTimeout(Exception):
    """Candidate trajectory search hit its iteration cap without reaching the goal."""


@dataclass(frozen=True)
class TrackingGains:
    """Proportional gains of the trajectory-tracking law (along-track,
    cross-track, heading)."""

    kx: float = 1.0
    ky: float = 4.0
    ktheta: float = 2.0


@dataclass(frozen=True)
class PlannerParams:
    neighborhood_radius: float = 3.5
    # candidate trajectory search
    rrt_step: float = 0.8
    rrt_iterations: int = 2000
    rrt_goal_tol: float = 0.4
    rrt_goal_bias: float = 0.15
    rrt_early_exit: int = 200
    collision_check_step: float = 0.05
    planning_margin_factor: float = 1.75   # clearance used while planning, x robot_radius
    safety_margin_factor: float = 1.5      # anticipated-violation margin, x robot_radius
    # reference trajectory + tracking
    v_cruise: float = 0.8
    turn_rate: float = 1.5
    v_max: float = 1.0
    omega_max: float = 2.0
    gains: TrackingGains = field(default_factory=TrackingGains)
    # scoring and executive
    c_fail: float = 1e6
    plan_stride: int = 5                   # rollout coarsening, in sim steps
    rhc_horizon_s: float = 60.0
    epoch_cap: int = 40
    w_loc: float = 0.99
    neighborhood_growth: float = 1.5       # retry factor when a neighborhood is empty
    neighborhood_retries: int = 3


@dataclass(frozen=True)
class PolicyStep:
    ref_pose: Pose
    ref_control: Control
    dt: float


@dataclass(frozen=True)
class Policy:
    """Open-loop reference trajectory plus tracking gains, planned for one mode."""

    mode_index: int
    steps: tuple[PolicyStep, ...]
    target_node: int
    gains: TrackingGains

    @property
    def duration(self) -> float:
        return sum(s.dt for s in self.steps)


@dataclass(frozen=True)
class GainReport:
    policy_index: int
    delta_i: float
    per_start: dict[int, float]
    collision_steps: dict[int, int]
    origin_weight: float

    @property
    def collision_step(self) -> int | None:
        return min(self.collision_steps.values()) if self.collision_steps else None


# -- target selection ---------------------------------------------------------


def select_targets(b: Belief, g: UniquenessGraph, radius: float) -> list[int]:
    """Per mode, the neighborhood node with the least signature overlap against
    every other mode's neighborhood (ties to the lowest node index)."""
    hoods = []
    for i, m in enumerate(b.modes):
        nodes = nodes_in_neighborhood(g, (m.mean.x, m.mean.y), radius)
        if not nodes:
            raise EmptyNeighborhood(i, radius)
        hoods.append(np.array(nodes, dtype=int))
    targets = []
    for i in range(len(b.modes)):
        others = [hoods[j] for j in range(len(b.modes)) if j != i]
        if others:
            other_nodes = np.concatenate(others)
            scores = g.weights[np.ix_(hoods[i], other_nodes)].sum(axis=1)
        else:
            scores = np.zeros(len(hoods[i]), dtype=int)
        best = int(np.argmin(scores))  # argmin returns the first (lowest index) tie
        targets.append(int(hoods[i][best]))
    return targets


# -- candidate trajectory search (RRT*) ----------------------------------------


def _segment_free(env: Environment, a: np.ndarray, b_: np.ndarray,
                  radius: float, step: float) -> bool:
    d = float(np.linalg.norm(b_ - a))
    n = max(2, int(math.ceil(d / step)) + 1)
    pts = np.linspace(a, b_, n)
    return bool(env.free_mask(pts, radius=radius).all())


def rrt_star(env: Environment, start: np.ndarray, goal: np.ndarray,
             rng: np.random.Generator, params: PlannerParams,
             radius: float | None = None) -> list[np.ndarray]:
    """Plan a collision-free 2D waypoint path from start to goal.

    Asymptotically-optimal tree search: new samples connect through the
    cheapest collision-free near parent and rewire their neighbors.  Runs
    ``rrt_early_exit`` extra iterations after the goal is first connected to
    polish the path, then extracts it.
    """
    margin = (params.planning_margin_factor * env.robot_radius
              if radius is None else radius)
    start = np.asarray(start, float)
    goal = np.asarray(goal, float)
    if np.linalg.norm(goal - start) <= params.rrt_goal_tol:
        return [start, goal] if np.linalg.norm(goal - start) > 1e-12 else [start]

    cap = params.rrt_iterations
    pts = np.empty((cap + 2, 2))
    parent = np.full(cap + 2, -1, dtype=int)
    cost = np.full(cap + 2, np.inf)
    pts[0] = start
    cost[0] = 0.0
    n = 1
    goal_idx = -1
    goal_found_at = None
    xmin, ymin, xmax, ymax = env.bounds
    check = lambda a, b_: _segment_free(env, a, b_, margin, params.collision_check_step)

    for it in range(cap):
        if goal_found_at is not None and it - goal_found_at >= params.rrt_early_exit:
            break
        if rng.uniform() < params.rrt_goal_bias and goal_idx < 0:
            sample = goal
        else:
            sample = rng.uniform([xmin, ymin], [xmax, ymax])
        d2 = np.einsum("ij,ij->i", pts[:n] - sample, pts[:n] - sample)
        nearest = int(np.argmin(d2))
        step_v = sample - pts[nearest]
        dist = float(np.linalg.norm(step_v))
        if dist < 1e-9:
            continue
        new = (pts[nearest] + step_v * min(1.0, params.rrt_step / dist)
               if dist > params.rrt_step else sample)
        if not env.free_mask(new[None, :], radius=margin)[0]:
            continue
        # near set for choosing a parent and rewiring
        r_near = min(2.5 * params.rrt_step,
                     max(params.rrt_step, 3.0 * math.sqrt(math.log(n + 1) / (n + 1)) * 4.0))
        dn = np.sqrt(np.einsum("ij,ij->i", pts[:n] - new, pts[:n] - new))
        near = np.flatnonzero(dn <= r_near)
        best_parent, best_cost = -1, np.inf
        for j in near[np.argsort(cost[near] + dn[near])]:
            c = cost[j] + dn[j]
            if c >= best_cost:
                break
            if check(pts[j], new):
                best_parent, best_cost = int(j), c
                break
        if best_parent < 0:
            if check(pts[nearest], new):
                best_parent = nearest
                best_cost = cost[nearest] + float(np.linalg.norm(new - pts[nearest]))
            else:
                continue
        idx = n
        pts[idx] = new
        parent[idx] = best_parent
        cost[idx] = best_cost
        n += 1
        # rewire neighbors through the new node
        for j in near:
            c_through = best_cost + dn[j]
            if c_through + 1e-12 < cost[j] and check(new, pts[j]):
                parent[j] = idx
                cost[j] = c_through
        # try to connect the goal
        dg = float(np.linalg.norm(goal - new))
        if dg <= params.rrt_goal_tol and check(new, goal):
            if goal_idx < 0:
                goal_idx = n
                pts[goal_idx] = goal
                parent[goal_idx] = idx
                cost[goal_idx] = best_cost + dg
                n += 1
                goal_found_at = it
            elif best_cost + dg < cost[goal_idx]:
                parent[goal_idx] = idx
                cost[goal_idx] = best_cost + dg

    if goal_idx < 0:
        raise PlanningTimeout(
            f"goal not reached within {params.rrt_iterations} iterations")
    path = []
    j = goal_idx
    while j >= 0:
        path.append(pts[j].copy())
        j = parent[j]
    path.reverse()
    return path


def path_to_policy(path: list[np.ndarray], start: Pose, mode_index: int,
                   target_node: int, params: PlannerParams, dt: float) -> Policy:
    """Time-parameterize a waypoint path as turn-in-place + drive segments.

    Controls are constant within each phase and chosen so each phase ends
    exactly on the dt grid; the reference poses are integrated through the
    motion model itself, so a noise-free robot starting on the reference
    follows it identically.  The result is truncated at the planning horizon.
    """
    max_steps = int(math.floor(params.rhc_horizon_s / dt + 1e-9))
    steps: list[PolicyStep] = []
    pose = start
    for wp in path[1:]:
        dx, dy = wp[0] - pose.x, wp[1] - pose.y
        seg_len = math.hypot(dx, dy)
        if seg_len < 1e-9:
            continue
        heading = math.atan2(dy, dx)
        dth = wrap_angle(heading - pose.theta)
        if abs(dth) > 1e-9:
            n_rot = max(1, int(math.ceil(abs(dth) / (params.turn_rate * dt))))
            omega = dth / (n_rot * dt)
            u = Control(0.0, omega)
            for _ in range(n_rot):
                if len(steps) >= max_steps:
                    return Policy(mode_index, tuple(steps), target_node, params.gains)
                steps.append(PolicyStep(pose, u, dt))
                pose = models.propagate(pose, u, (0.0, 0.0), dt)
        n_drive = max(1, int(math.ceil(seg_len / (params.v_cruise * dt))))
        v = seg_len / (n_drive * dt)
        u = Control(v, 0.0)
        for _ in range(n_drive):
            if len(steps) >= max_steps:
                return Policy(mode_index, tuple(steps), target_node, params.gains)
            steps.append(PolicyStep(pose, u, dt))
            pose = models.propagate(pose, u, (0.0, 0.0), dt)
    return Policy(mode_index, tuple(steps), target_node, params.gains)


def plan_candidate(env: Environment, start: Pose, goal: UGraphNode,
                   rng: np.random.Generator, params: PlannerParams, dt: float,
                   mode_index: int = 0, target_node: int = -1) -> Policy:
    """Candidate policy: tree-search a path from the mode mean to the target
    node's position, then attach the timed reference and tracking law."""
    path = rrt_star(env, np.array([start.x, start.y]),
                    np.array([goal.pose.x, goal.pose.y]), rng, params)
    return path_to_policy(path, start, mode_index, target_node, params, dt)


# -- trajectory tracking -------------------------------------------------------


def feedback_control(p: Policy, x_est: Pose, k: int) -> Control:
    """Reference control at step k plus proportional correction on along-track,
    cross-track and heading error, saturated to the control limits."""
    if not (0 <= k < len(p.steps)):
        raise IndexError(f"step {k} outside policy of {len(p.steps)} steps")
    ref = p.steps[k]
    c, s = math.cos(x_est.theta), math.sin(x_est.theta)
    ex_w = ref.ref_pose.x - x_est.x
    ey_w = ref.ref_pose.y - x_est.y
    ex = c * ex_w + s * ey_w           # along-track error, robot frame
    ey = -s * ex_w + c * ey_w          # cross-track error, robot frame
    eth = wrap_angle(ref.ref_pose.theta - x_est.theta)
    g = p.gains
    v_r, w_r = ref.ref_control.v, ref.ref_control.omega
    v = v_r * math.cos(eth) + g.kx * ex
    w = w_r + g.ky * v_r * ey + g.ktheta * math.sin(eth)
    # saturation limits ride along with the gains' parent params
    return Control(v, w)


def saturate(u: Control, params: PlannerParams) -> Control:
    return Control(
        float(np.clip(u.v, -params.v_max, params.v_max)),
        float(np.clip(u.omega, -params.omega_max, params.omega_max)),
    )


def _locate_mode(b: Belief, ref: Pose, max_dist: float = 2.0) -> int | None:
    """Index of the mode tracking a reference pose, or None if it was pruned.

    Modes of distinct hypotheses are far apart, so nearest-mean with a distance
    cap identifies the executing mode without threading identities through the
    immutable belief updates.
    """
    d = [m.mean.distance_to(ref) for m in b.modes]
    i = int(np.argmin(d))
    return i if d[i] <= max_dist else None


def _exec_estimate(b: Belief, p: Policy, k: int) -> Pose:
    ref = p.steps[k].ref_pose
    i = _locate_mode(b, ref)
    return b.modes[i].mean if i is not None else ref


# -- expected information gain -------------------------------------------------


def expected_information_gain(b: Belief, p: Policy, env: Environment,
                              params: PlannerParams, fp: FilterParams,
                              dt: float) -> GainReport:
    """Mode-count reduction expected from executing a candidate policy.

    For every start hypothesis, the belief is cloned, the world is assumed to
    sit on that mode's mean, and the policy is simulated with most-likely
    (noise-free) actions and observations while the full filter runs on the
    clone.  A predicted collision of any propagated mode at rollout step T
    contributes a penalty of -c_fail / T and ends that rollout.  Start
    contributions are combined weighted by the modes' current weights.
    """
    stride = max(1, params.plan_stride)
    n0 = len(b.modes)
    per_start: dict[int, float] = {}
    collision_steps: dict[int, int] = {}
    for j, start_mode in enumerate(b.modes):
        if len(p.steps) == 0:
            per_start[j] = 0.0
            continue
        clone = b
        truth = start_mode.mean
        gain = 0.0
        t_step = 0
        for k in range(0, len(p.steps), stride):
            t_step += 1
            dt_eff = sum(s.dt for s in p.steps[k:k + stride])
            x_est = _exec_estimate(clone, p, k)
            u = saturate(feedback_control(p, x_est, k), params)
            truth = models.propagate(truth, u, (0.0, 0.0), dt_eff)
            z = models.observe(env, truth, fp.obs, rng=None)
            clone, _ = step_belief(clone, u, z, env, fp, dt_eff)
            means = np.array([[m.mean.x, m.mean.y] for m in clone.modes])
            if not env.free_mask(means).all():
                gain -= params.c_fail / t_step
                collision_steps[j] = t_step
                break
            if len(clone.modes) == 1:
                break
        gain += n0 - len(clone.modes)
        per_start[j] = gain
    weights = b.weights
    delta_i = float(sum(weights[j] * per_start[j] for j in per_start))
    return GainReport(
        policy_index=p.mode_index,
        delta_i=delta_i,
        per_start=per_start,
        collision_steps=collision_steps,
        origin_weight=float(weights[p.mode_index]) if p.mode_index < len(weights) else 0.0,
    )


def choose_policy(reports: list[GainReport]) -> int:
    """Index of the gain-maximizing report; ties go to the candidate planned
    for the heavier mode, then to the lower index."""
    if not reports:
        raise ValueError("no gain reports to choose from")
    best = 0
    for i in range(1, len(reports)):
        a, cur = reports[i], reports[best]
        if (a.delta_i, a.origin_weight, -i) > (cur.delta_i, cur.origin_weight, -best):
            best = i
    return best


# -- receding-horizon executive -------------------------------------------------


@dataclass
class M3PResult:
    belief: Belief
    converged: bool
    epochs: int


def _anticipated_violation(b: Belief, u: Control, env: Environment,
                           params: PlannerParams, dt: float) -> bool:
    margin = params.safety_margin_factor * env.robot_radius
    nxt = [models.propagate(m.mean, u, (0.0, 0.0), dt) for m in b.modes]
    xy = np.array([[q.x, q.y] for q in nxt])
    return not bool(env.free_mask(xy, radius=margin).all())


def m3p_run(b0: Belief, env: Environment, g: UniquenessGraph, hooks,
            params: PlannerParams, fp: FilterParams, dt: float,
            rng: np.random.Generator, log=None) -> M3PResult:
    """Plan-execute-replan until the belief is unimodal or the epoch cap hits.

    ``hooks`` drives the (simulated or replayed) robot: ``hooks.apply(u)``
    advances one step of duration dt and returns the sensor scan; ``hooks.t``
    is the current time.  Execution of the chosen policy breaks on a change in
    mode count, an anticipated clearance violation of any mode over the next
    step, or policy/horizon exhaustion.
    """
    b = b0
    epochs = 0
    while not bel.is_unimodal(b, params.w_loc):
        if epochs >= params.epoch_cap:
            if log is not None:
                log.event("epoch_cap_exceeded", epochs=epochs)
            return M3PResult(belief=b, converged=False, epochs=epochs)
        epochs += 1

        # pick targets and candidates; when no candidate promises any gain at
        # the current neighborhood radius (all distinctive nodes out of reach),
        # widen the neighborhood and try again
        radius = params.neighborhood_radius
        candidates: list[Policy] = []
        reports: list[GainReport] = []
        for attempt in range(params.neighborhood_retries + 1):
            try:
                targets = select_targets(b, g, radius)
            except EmptyNeighborhood:
                radius *= params.neighborhood_growth
                continue
            candidates = []
            for i, m in enumerate(b.modes):
                try:
                    candidates.append(plan_candidate(
                        env, m.mean, g.nodes[targets[i]], rng, params, dt,
                        mode_index=i, target_node=targets[i]))
                except PlanningTimeout:
                    continue
            reports = [expected_information_gain(b, c, env, params, fp, dt)
                       for c in candidates]
            if reports and max(r.delta_i for r in reports) > 0:
                break
            radius *= params.neighborhood_growth
        if not candidates:
            if log is not None:
                log.event("no_candidates", epochs=epochs)
            return M3PResult(belief=b, converged=False, epochs=epochs)

        pick = choose_policy(reports)
        policy = candidates[pick]
        if log is not None:
            log.event("replan", epoch=epochs, targets=targets,
                      chosen_mode=policy.mode_index,
                      chosen_target=policy.target_node,
                      gains=[{"mode": r.policy_index,
                              "delta_i": r.delta_i,
                              "collision_step": r.collision_step}
                             for r in reports])

        reason = "horizon"
        for k in range(len(policy.steps)):
            x_est = _exec_estimate(b, policy, k)
            u = saturate(feedback_control(policy, x_est, k), params)
            n_before = len(b.modes)
            z = hooks.apply(u)
            b, merged = step_belief(b, u, z, env, fp, dt)
            if log is not None:
                log.step(hooks.t, hooks.truth_pose(), u, z, b)
            if merged:
                reason = "merge"
                break
            if len(b.modes) != n_before:
                reason = "mode_count_change"
                break
            if bel.is_unimodal(b, params.w_loc):
                break
            if k + 1 < len(policy.steps):
                u_next = saturate(feedback_control(
                    policy, _exec_estimate(b, policy, k + 1), k + 1), params)
                if _anticipated_violation(b, u_next, env, params, dt):
                    reason = "constraint_violation"
                    break
        if log is not None:
            log.event("epoch_end", epoch=epochs, reason=reason,
                      n_modes=len(b.modes))
    return M3PResult(belief=b, converged=True, epochs=epochs)
