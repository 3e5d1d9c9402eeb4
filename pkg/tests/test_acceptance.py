"""Acceptance suite: one test per acceptance criterion, each printing a
PASS/FAIL line.  Criteria 1/2/6/8 share one batch of twenty seeded runs of the
shipped eight-room scenario, executed in parallel workers.
"""

import hashlib
import math
import multiprocessing as mp
import time
from pathlib import Path

import numpy as np
import pytest

from activeloc import uniqueness
from activeloc.belief import (
    Belief,
    FilterParams,
    GaussianMode,
    ekf_update,
    matched_pairs,
    update_weights,
)
from activeloc.config import load_scenario
from activeloc.mazes import pen_world
from activeloc.models import (
    Control,
    Observation,
    ObsNoiseParams,
    associate,
    motion_jacobians,
    observation_jacobian,
    observation_noise_cov,
    observe,
    predict_observations,
    propagate,
)
from activeloc.planner import (
    PlannerParams,
    expected_information_gain,
    feedback_control,
    m3p_run,
    plan_candidate,
    saturate,
    select_targets,
)
from activeloc.sim import ClosedLoopSim, TraceLog, run_scenario
from activeloc.world import Environment, Landmark, Pose, load_map, wrap_angle

SCENARIO = Path(__file__).resolve().parent.parent / "scenarios" / "maze8.yaml"
N_SEEDS = 20
SEEDS = list(range(1, N_SEEDS + 1))


def report(criterion: int, ok: bool, detail: str) -> None:
    print(f"\nACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")


# -- shared twenty-run batch of the shipped maze scenario ---------------------

_G: dict = {}


def _init_worker(cfg_path, env, graph):
    _G["cfg_path"] = cfg_path
    _G["env"] = env
    _G["graph"] = graph


def _mirror(pose_vec):
    return (16.0 - pose_vec[0], 10.0 - pose_vec[1])


def _summarize(res, keep_trace: bool):
    steps = res.trace.steps()
    counts = [len(s["modes"]) for s in steps]
    uniq_ids = {61, 62, 63, 64}
    first_unique = next((i for i, s in enumerate(steps)
                         if uniq_ids & {o[0] for o in s["obs"]}), None)
    first_unimodal = next((i for i, s in enumerate(steps)
                           if max(m["w"] for m in s["modes"]) >= 0.99
                           and len(s["modes"]) == 1), None)
    # symmetric two-mode stretch: a step with exactly two modes that are
    # 180-degree images of each other
    two_sym_step = False
    for s in steps:
        if len(s["modes"]) != 2:
            continue
        a, b = s["modes"][0]["mu"], s["modes"][1]["mu"]
        mx, my = _mirror(a)
        if math.hypot(mx - b[0], my - b[1]) < 0.75 and \
           abs(wrap_angle(a[2] + math.pi - b[2])) < 0.6:
            two_sym_step = True
            break
    two_mode_epoch_end = any(e["n_modes"] == 2
                             for e in res.trace.events("epoch_end"))
    # final accuracy: Mahalanobis distance of the truth under the winning mode
    best = res.final_belief.modes[res.final_belief.argmax()]
    e = best.mean.as_array() - res.truth.as_array()
    e[2] = wrap_angle(e[2])
    try:
        d_maha = math.sqrt(max(float(e @ np.linalg.solve(best.cov, e)), 0.0))
    except np.linalg.LinAlgError:
        d_maha = math.inf
    env = _G["env"]
    x0, y0, x1, y1 = env.regions["passage"]
    margin = 1.0
    conv_truth = steps[first_unimodal]["truth"] if first_unimodal is not None else None
    gt_in_passage = (conv_truth is not None
                     and x0 - margin <= conv_truth[0] <= x1 + margin
                     and y0 - margin <= conv_truth[1] <= y1 + margin)
    phase1 = res.trace.events("phase1_end")[0]["n_modes"]
    return {
        "converged": res.converged,
        "epochs": res.epochs,
        "max_weight": float(res.final_belief.weights.max()),
        "d_maha": d_maha,
        "phase1_modes": phase1,
        "non_increasing": all(a >= b for a, b in zip(counts, counts[1:])),
        "two_sym": two_sym_step and two_mode_epoch_end,
        "unique_before_conv": (first_unique is not None
                               and first_unimodal is not None
                               and first_unique <= first_unimodal),
        "gt_in_passage": gt_in_passage,
        "trace_sha": hashlib.sha256(res.trace.dumps().encode()).hexdigest()
                     if keep_trace else None,
    }


def _run_seed(seed):
    cfg = load_scenario(_G["cfg_path"])
    cfg.seed = seed
    t0 = time.perf_counter()
    try:
        res = run_scenario(cfg, env=_G["env"], graph=_G["graph"],
                           check_invariants=True)
    except Exception as exc:  # any blow-up fails the seed, PSD check included
        return {"seed": seed, "error": f"{type(exc).__name__}: {exc}",
                "wall": time.perf_counter() - t0}
    out = _summarize(res, keep_trace=(seed == SEEDS[0]))
    out["seed"] = seed
    out["error"] = None
    out["wall"] = time.perf_counter() - t0
    return out


@pytest.fixture(scope="module")
def maze_batch():
    cfg = load_scenario(SCENARIO)
    env = load_map(cfg.map_path)
    graph = uniqueness.build(
        env, cfg.ug_build_n, np.random.default_rng(cfg.ug_build_seed),
        cfg.filter_params().obs, clearance=cfg.ug_clearance)
    t0 = time.perf_counter()
    with mp.Pool(2, initializer=_init_worker,
                 initargs=(SCENARIO, env, graph)) as pool:
        results = pool.map(_run_seed, SEEDS)
    wall = time.perf_counter() - t0
    _init_worker(SCENARIO, env, graph)  # for in-process reruns / summaries
    return {"results": results, "wall": wall, "env": env, "graph": graph,
            "cfg_path": SCENARIO}


class TestCriterion1EightRoomReconstruction:
    def test_converges_from_corner_room(self, maze_batch):
        rs = maze_batch["results"]
        ok_runs = [r for r in rs if not r["error"]
                   and r["converged"] and r["max_weight"] >= 0.99
                   and r["d_maha"] <= 3.0
                   and r["unique_before_conv"] and r["gt_in_passage"]]
        wall = maze_batch["wall"]
        ok = len(ok_runs) >= 18 and wall <= 300.0
        report(1, ok, f"{len(ok_runs)}/{N_SEEDS} seeds converged to the true "
                      f"room (w>=0.99, within 3 sigma, only after entering the "
                      f"passage); batch wall time {wall:.0f}s <= 300s")
        for r in rs:
            assert r["error"] is None, f"seed {r['seed']}: {r['error']}"
        assert len(ok_runs) >= 18
        assert wall <= 300.0


class TestCriterion2TraceShape:
    def test_phase1_modes_and_two_mode_epoch(self, maze_batch):
        rs = [r for r in maze_batch["results"] if not r["error"]]
        eight = [r for r in rs if r["phase1_modes"] == 8]
        shrinking = [r for r in rs if r["non_increasing"]]
        two_sym = [r for r in rs if r["two_sym"]]
        good = [r for r in rs if r["phase1_modes"] == 8 and r["non_increasing"]
                and r["two_sym"]]
        ok = len(good) >= 15
        report(2, ok, f"phase 1 ended with 8 modes in {len(eight)}/{N_SEEDS}, "
                      f"mode count non-increasing in {len(shrinking)}/{N_SEEDS}, "
                      f"a symmetric 2-mode epoch in {len(two_sym)}/{N_SEEDS}; "
                      f"all three in {len(good)}/{N_SEEDS} (need 15)")
        assert ok


# -- criterion 3: disambiguation property on randomized worlds ----------------


def _run_pen_map(map_seed):
    rng = np.random.default_rng(map_seed)
    n = int(rng.integers(2, 7))
    pw = pen_world(n, rng)
    obs = ObsNoiseParams(max_range=2.0, eta_r=0.03, eta_theta=0.01,
                         sigma_r=0.02, sigma_theta=0.01)
    fp = FilterParams(Q=np.diag([0.02**2, 0.02**2]), obs=obs, delta_w=0.01,
                      gamma_scale=1.0, gate_confidence=0.999,
                      merge_enabled=False, iekf_iterations=2)
    pp = PlannerParams(neighborhood_radius=4.5, rrt_iterations=800,
                       rrt_early_exit=60, rrt_goal_bias=0.25,
                       collision_check_step=0.08, plan_stride=5,
                       epoch_cap=n + 3)
    g = uniqueness.build(pw.env, 60 * n, np.random.default_rng(map_seed + 1000),
                         obs, clearance=0.30)
    truth_pen = map_seed % n
    truth = pw.congruent_poses[truth_pen]
    b0 = Belief(modes=tuple(
        GaussianMode(mean=q, cov=np.diag([0.05**2] * 3), weight=1.0 / n)
        for q in pw.congruent_poses))
    hooks = ClosedLoopSim(pw.env, truth, fp, 0.1, rng_truth=None, rng_obs=None,
                          noiseless=True)
    try:
        res = m3p_run(b0, pw.env, g, hooks, pp, fp, 0.1,
                      np.random.default_rng(map_seed + 2000))
    except Exception as exc:
        return (map_seed, n, False, -1, repr(exc))
    mu = res.belief.modes[res.belief.argmax()].mean
    err = math.hypot(mu.x - hooks.truth.x, mu.y - hooks.truth.y)
    ok = res.converged and res.epochs <= n - 1 and err < 0.3
    return (map_seed, n, ok, res.epochs, None)


class TestCriterion3TerminatingConvergence:
    def test_fifty_randomized_worlds(self):
        with mp.Pool(2) as pool:
            rows = pool.map(_run_pen_map, range(50))
        bad = [r for r in rows if not r[2]]
        ok = not bad
        report(3, ok, f"{50 - len(bad)}/50 zero-noise runs reached a unimodal "
                      f"belief within n-1 epochs" +
                      (f"; failures: {bad[:3]}" if bad else ""))
        assert ok, bad


# -- criterion 4: target-selection oracle equivalence -------------------------


class TestCriterion4TargetSelectionOracle:
    def test_hundred_random_graphs(self):
        from test_planner import belief_at, brute_force_targets, random_signature_graph
        rng = np.random.default_rng(404)
        checked = 0
        mismatches = []
        while checked < 100:
            g = random_signature_graph(rng, int(rng.integers(4, 31)))
            n_modes = int(rng.integers(1, 5))
            b = belief_at([(x, y, 0.0) for x, y in rng.uniform(0, 10, (n_modes, 2))])
            radius = float(rng.uniform(2.5, 9.0))
            try:
                got = select_targets(b, g, radius)
            except Exception:
                continue  # empty neighborhood: not a valid oracle case
            want = brute_force_targets(b, g, radius)
            if got != want:
                mismatches.append((checked, got, want))
            checked += 1
        ok = not mismatches
        report(4, ok, f"select_targets equals the brute-force double loop on "
                      f"{checked} random graphs (tie-break included)" +
                      (f"; mismatches: {mismatches[:3]}" if mismatches else ""))
        assert ok


# -- criterion 5: weight-update unit suite -------------------------------------


class TestCriterion5WeightUpdateSuite:
    def test_alpha_cases_normalization_and_overlap_example(self):
        failures = []

        # equal counts: gamma = 1, beta resets
        env1 = Environment(bounds=(-10, -10, 10, 10), obstacles=[],
                           landmarks=[Landmark(1, 1.0, 0.0)], robot_radius=0.1)
        obs = ObsNoiseParams(max_range=5.0)
        m = GaussianMode(mean=Pose(0, 0, 0), cov=0.01 * np.eye(3), weight=1.0,
                         beta=2.0)
        z = observe(env1, Pose(0, 0, 0), obs)
        out = update_weights(Belief(modes=(m,)), z, env1, obs, dt=0.1)
        if out.modes[0].beta != 0.0:
            failures.append("beta did not reset on matching counts")

        # n_z=3, n_pred=2, n_matched=2 -> alpha = 2 (observable through gamma)
        from activeloc.world import ConvexPolygon
        wall = ConvexPolygon.rectangle(-0.4, -3.5, 0.4, -3.0)
        env2 = Environment(bounds=(-10, -10, 10, 10), obstacles=[wall],
                           landmarks=[Landmark(1, 2.0, 0.0), Landmark(2, -2.0, 0.5),
                                      Landmark(3, 0.0, -2.0)], robot_radius=0.1)
        obs = ObsNoiseParams(max_range=8.0)
        z3 = observe(env2, Pose(0, 0, 0), obs)
        hypo = Pose(0.0, -5.0, 0.0)
        n_pred = len(predict_observations(env2, hypo, obs))
        if (len(z3), n_pred) != (3, 2):
            failures.append(f"alpha-2 scene wrong: n_z={len(z3)} n_pred={n_pred}")
        g_scale, dt = 0.5, 0.1
        b2 = Belief(modes=(GaussianMode(mean=hypo, cov=0.01 * np.eye(3),
                                        weight=1.0),))
        out2 = update_weights(b2, z3, env2, obs, dt=dt, gamma_scale=g_scale,
                              gate_confidence=1.0)
        # single-mode renormalization hides gamma; beta increment proves the
        # mismatch branch ran, and a two-mode run exposes the alpha=2 factor
        if out2.modes[0].beta != pytest.approx(dt):
            failures.append("beta did not accumulate on count mismatch")
        good = GaussianMode(mean=Pose(0, 0, 0), cov=0.01 * np.eye(3), weight=0.5)
        b3 = Belief(modes=(GaussianMode(mean=hypo, cov=0.01 * np.eye(3),
                                        weight=0.5), good))
        out3 = update_weights(b3, z3, env2, obs, dt=dt, gamma_scale=g_scale,
                              gate_confidence=1.0)
        # mismatched mode carries likelihood exp(-D^2/2) * gamma(alpha=2)
        from activeloc.belief import mahalanobis_sq
        zp = predict_observations(env2, hypo, obs)
        assoc = associate(z3, zp, obs, gate_confidence=1.0)
        d2 = mahalanobis_sq(matched_pairs(z3, zp, assoc), b3.modes[0], env2, obs)
        w_bad = 0.5 * math.exp(-0.5 * d2)
        w_good = 0.5
        s = w_bad + w_good
        w_bad, w_good = w_bad / s, w_good / s
        w_bad *= math.exp(-2 * dt * g_scale)
        s = w_bad + w_good
        expected = [w_bad / s, w_good / s]
        if not np.allclose(sorted(out3.weights), sorted(expected), rtol=1e-9):
            failures.append(f"alpha=2 weight factor wrong: {out3.weights} vs {expected}")

        # normalization after every update
        rng = np.random.default_rng(55)
        b4 = Belief(modes=tuple(
            GaussianMode(mean=Pose(*rng.uniform(-3, 3, 2), rng.uniform(-3, 3)),
                         cov=0.04 * np.eye(3), weight=0.25) for _ in range(4)))
        for _ in range(20):
            z4 = observe(env1, Pose(0, 0, 0), obs, rng=rng)
            b4 = update_weights(b4, z4, env1, obs, dt=0.1, gamma_scale=0.5)
            if abs(b4.weights.sum() - 1.0) > 1e-9:
                failures.append("weights not normalized to 1 +- 1e-9")
                break

        # worked overlap example: {s1,s2,s3} vs {s1,s2,s4} -> edge weight 2
        from activeloc.uniqueness import UGraphNode, UniquenessGraph
        na = UGraphNode(Pose(0, 0, 0), frozenset({1, 2, 3}))
        nb = UGraphNode(Pose(1, 0, 0), frozenset({1, 2, 4}))
        w = len(na.signature_set & nb.signature_set)
        if w != 2:
            failures.append("edge-weight example broken")
        g = UniquenessGraph([na, nb], np.array([[0, w], [w, 0]], dtype=np.int32))
        if g.edge_weight(0, 1) != 2:
            failures.append("graph edge weight mismatch")

        ok = not failures
        report(5, ok, "alpha formula cases, beta reset, weight normalization "
                      "and the shared-signature example all hold"
                      + ("" if ok else f"; failures: {failures}"))
        assert ok, failures


# -- criterion 6: filter numerics ----------------------------------------------


class TestCriterion6FilterNumerics:
    def test_linear_oracle_jacobians_and_psd(self, maze_batch):
        failures = []

        # EKF predict vs closed-form linear filter (pure rotation is linear)
        m = GaussianMode(mean=Pose(1.0, -2.0, 0.4), cov=np.diag([0.09, 0.04, 0.01]),
                         weight=1.0)
        from activeloc.belief import ekf_predict
        Q = np.diag([0.05**2, 0.02**2])
        dt = 0.25
        out = ekf_predict(m, Control(0.0, 0.8), Q, dt)
        G = np.array([[dt * math.cos(0.4), 0], [dt * math.sin(0.4), 0], [0, dt]])
        x_lin = m.mean.as_array() + np.array([0, 0, 0.8 * dt])
        P_lin = m.cov + G @ Q @ G.T
        if not (np.allclose(out.mean.as_array(), x_lin, atol=1e-9)
                and np.allclose(out.cov, P_lin, atol=1e-9)):
            failures.append("predict deviates from linear filter")

        # EKF update vs plain-formula Kalman update at the linearization point
        env = Environment(bounds=(-10, -10, 10, 10), obstacles=[],
                          landmarks=[Landmark(1, 3.0, 0.5), Landmark(2, -1.0, 2.0)],
                          robot_radius=0.1)
        obs = ObsNoiseParams(max_range=50)
        rng = np.random.default_rng(66)
        worst_upd = 0.0
        for _ in range(100):
            m = GaussianMode(mean=Pose(*rng.uniform(-1, 1, 2), rng.uniform(-2, 2)),
                             cov=np.diag(rng.uniform(0.01, 0.2, 3)), weight=1.0)
            truth = Pose(m.mean.x + rng.normal(0, 0.03),
                         m.mean.y + rng.normal(0, 0.03),
                         m.mean.theta + rng.normal(0, 0.03))
            z = observe(env, truth, obs)
            zp = predict_observations(env, m.mean, obs)
            assoc = associate(z, zp, obs, gate_confidence=1.0)
            matches = matched_pairs(z, zp, assoc)
            if not matches:
                continue
            got = ekf_update(m, matches, env, obs, iterations=1)
            y, H, Rb = [], [], []
            for o, lmi in matches:
                lm = env.landmarks[lmi]
                dx, dy = lm.x - m.mean.x, lm.y - m.mean.y
                rp = math.hypot(dx, dy)
                bp = math.atan2(dy, dx) - m.mean.theta
                y += [o.range - rp, math.remainder(o.bearing - bp, 2 * math.pi)]
                H.append(observation_jacobian(m.mean, lm.xy))
                Rb.append(observation_noise_cov(rp, obs))
            y = np.array(y)
            H = np.vstack(H)
            R = np.zeros((len(y), len(y)))
            for j, blk in enumerate(Rb):
                R[2 * j:2 * j + 2, 2 * j:2 * j + 2] = blk
            K = m.cov @ H.T @ np.linalg.inv(H @ m.cov @ H.T + R)
            x_kf = m.mean.as_array() + K @ y
            P_kf = (np.eye(3) - K @ H) @ m.cov
            worst_upd = max(worst_upd,
                            np.abs(got.mean.as_array() - x_kf).max(),
                            np.abs(got.cov - P_kf).max())
        if worst_upd > 1e-9:
            failures.append(f"update deviates from closed-form KF by {worst_upd:.2e}")

        # Jacobians vs central finite differences, 1000 random inputs
        rng = np.random.default_rng(2025)
        h = 1e-6
        worst = 0.0
        for _ in range(1000):
            x = Pose(*rng.uniform(-5, 5, 2), rng.uniform(-math.pi, math.pi))
            u = Control(*rng.uniform(-2, 2, 2))
            dtr = rng.uniform(0.01, 1.0)
            A, G = motion_jacobians(x, u, dtr)
            A_num = np.zeros((3, 3))
            for j in range(3):
                e = np.zeros(3)
                e[j] = h
                fp_ = propagate(Pose(*(x.as_array() + e)), u, (0, 0), dtr).as_array()
                fm = propagate(Pose(*(x.as_array() - e)), u, (0, 0), dtr).as_array()
                d = fp_ - fm
                d[2] = math.remainder(d[2], 2 * math.pi)
                A_num[:, j] = d / (2 * h)
            G_num = np.zeros((3, 2))
            for j in range(2):
                e = [0.0, 0.0]
                e[j] = h
                fp_ = propagate(x, u, tuple(e), dtr).as_array()
                fm = propagate(x, u, (-e[0], -e[1]), dtr).as_array()
                d = fp_ - fm
                d[2] = math.remainder(d[2], 2 * math.pi)
                G_num[:, j] = d / (2 * h)
            worst = max(worst,
                        np.abs(A - A_num).max() / max(1.0, np.abs(A).max()),
                        np.abs(G - G_num).max() / max(1.0, np.abs(G).max()))
        if worst > 1e-6:
            failures.append(f"jacobian FD error {worst:.2e}")

        # symmetric-PSD covariances throughout the criterion-1 batch: those
        # runs execute with per-step invariant validation enabled
        errs = [r["error"] for r in maze_batch["results"] if r["error"]]
        if errs:
            failures.append(f"invariant violations in criterion-1 runs: {errs[:2]}")

        ok = not failures
        report(6, ok, "EKF matches the closed-form filter to 1e-9, Jacobians "
                      "match finite differences to 1e-6, covariances stayed "
                      "symmetric PSD in all criterion-1 runs"
                      + ("" if ok else f"; failures: {failures}"))
        assert ok, failures


# -- criterion 7: gain-scoring oracle -------------------------------------------


class TestCriterion7GainOracle:
    def test_two_mode_toy_rollout_exact(self):
        from activeloc.belief import step_belief
        rng = np.random.default_rng(7)
        pw = pen_world(2, rng)
        obs = ObsNoiseParams(max_range=2.0, eta_r=0.03, eta_theta=0.01,
                             sigma_r=0.02, sigma_theta=0.01)
        fp = FilterParams(Q=np.diag([0.02**2, 0.02**2]), obs=obs, delta_w=0.01,
                          gamma_scale=1.0, gate_confidence=0.999,
                          merge_enabled=False, iekf_iterations=2)
        pp = PlannerParams(neighborhood_radius=4.5, rrt_iterations=800,
                           rrt_early_exit=60, rrt_goal_bias=0.25,
                           collision_check_step=0.08, plan_stride=5, c_fail=1e6)
        g = uniqueness.build(pw.env, 120, np.random.default_rng(8), obs,
                             clearance=0.30)
        b0 = Belief(modes=tuple(
            GaussianMode(mean=q, cov=np.diag([0.05**2] * 3), weight=w)
            for q, w in zip(pw.congruent_poses, (0.6, 0.4))))
        targets = select_targets(b0, g, pp.neighborhood_radius)
        pol = plan_candidate(pw.env, b0.modes[0].mean, g.nodes[targets[0]],
                             np.random.default_rng(1), pp, 0.1,
                             mode_index=0, target_node=targets[0])
        rep = expected_information_gain(b0, pol, pw.env, pp, fp, 0.1)

        mism = []
        n0 = len(b0.modes)
        for j, start in enumerate(b0.modes):
            clone, truth, gain, t_step = b0, start.mean, 0.0, 0
            for k in range(0, len(pol.steps), pp.plan_stride):
                t_step += 1
                dt_eff = sum(s.dt for s in pol.steps[k:k + pp.plan_stride])
                ref = pol.steps[k].ref_pose
                dists = [m.mean.distance_to(ref) for m in clone.modes]
                i_near = int(np.argmin(dists))
                x_est = clone.modes[i_near].mean if dists[i_near] <= 2.0 else ref
                u = saturate(feedback_control(pol, x_est, k), pp)
                truth = propagate(truth, u, (0, 0), dt_eff)
                z = observe(pw.env, truth, fp.obs, rng=None)
                clone, _ = step_belief(clone, u, z, pw.env, fp, dt_eff)
                xy = np.array([[m.mean.x, m.mean.y] for m in clone.modes])
                if not pw.env.free_mask(xy).all():
                    gain -= pp.c_fail / t_step    # penalty placement: -c_fail/T
                    break
                if len(clone.modes) == 1:
                    break
            gain += n0 - len(clone.modes)
            if rep.per_start[j] != gain:
                mism.append((j, rep.per_start[j], gain))
        want_total = sum(b0.weights[j] * rep.per_start[j] for j in rep.per_start)
        if rep.delta_i != want_total:
            mism.append(("total", rep.delta_i, want_total))

        ok = not mism
        report(7, ok, "expected information gain equals the hand-coded rollout "
                      "exactly (weighted combination and penalty placement)"
                      + ("" if ok else f"; mismatches: {mism}"))
        assert ok, mism


# -- criterion 8: determinism ----------------------------------------------------


class TestCriterion8Determinism:
    def test_byte_identical_rerun(self, maze_batch):
        first = next(r for r in maze_batch["results"] if r["seed"] == SEEDS[0])
        assert first["error"] is None, first
        cfg = load_scenario(maze_batch["cfg_path"])
        cfg.seed = SEEDS[0]
        res = run_scenario(cfg, env=maze_batch["env"], graph=maze_batch["graph"])
        sha = hashlib.sha256(res.trace.dumps().encode()).hexdigest()
        ok = sha == first["trace_sha"]
        report(8, ok, f"re-running seed {SEEDS[0]} reproduced the trace "
                      f"byte-for-byte (sha256 {sha[:12]}...)")
        assert ok
