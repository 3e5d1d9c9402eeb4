"""Gaussian-mixture belief over the robot pose.

A belief is a weighted list of Gaussian hypotheses (modes).  Each mode carries
its own EKF; the mixture weights are driven by measurement likelihood plus a
negative-information factor that decays hypotheses whose predicted landmark
set disagrees with what the robot actually sees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import models
from .models import Control, Observation, ObsNoiseParams
from .world import Environment, Pose, sample_free_pose, wrap_angle

WEIGHT_TOL = 1e-9


class FilterNumericsError(Exception):
    """Raised when an innovation covariance is not invertible."""


@dataclass(frozen=True)
class GaussianMode:
    """One pose hypothesis: mean, 3x3 covariance, mixture weight, and the
    accumulated seconds ``beta`` of observation-count disagreement."""

    mean: Pose
    cov: np.ndarray
    weight: float
    beta: float = 0.0

    def __post_init__(self):
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (3, 3):
            raise ValueError("covariance must be 3x3")
        object.__setattr__(self, "cov", cov)

    def validate(self) -> None:
        if not np.allclose(self.cov, self.cov.T, atol=1e-12):
            raise ValueError("covariance not symmetric")
        if np.linalg.eigvalsh(self.cov).min() < -1e-10:
            raise ValueError("covariance not PSD")
        if not (-WEIGHT_TOL <= self.weight <= 1.0 + WEIGHT_TOL):
            raise ValueError(f"weight {self.weight} outside [0, 1]")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")


@dataclass(frozen=True)
class Belief:
    """Normalized Gaussian mixture; modes is never empty."""

    modes: tuple[GaussianMode, ...]

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if len(self.modes) == 0:
            raise ValueError("belief must have at least one mode")

    @property
    def weights(self) -> np.ndarray:
        return np.array([m.weight for m in self.modes])

    def argmax(self) -> int:
        return int(np.argmax(self.weights))

    def validate(self) -> None:
        for m in self.modes:
            m.validate()
        if abs(float(self.weights.sum()) - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights sum to {self.weights.sum()}, not 1")


def init_belief(env: Environment, n_samples: int, sigma0: np.ndarray,
                rng: np.random.Generator) -> Belief:
    """Uniformly sampled free-space means with identical covariance and weight."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    sigma0 = np.asarray(sigma0, dtype=float)
    return Belief(modes=tuple(
        GaussianMode(mean=sample_free_pose(env, rng), cov=sigma0.copy(),
                     weight=1.0 / n_samples)
        for _ in range(n_samples)
    ))


def _symmetrize(S: np.ndarray) -> np.ndarray:
    return 0.5 * (S + S.T)


def ekf_predict(m: GaussianMode, u: Control, Q: np.ndarray, dt: float) -> GaussianMode:
    """Time update: propagate the mean at zero noise, inflate the covariance."""
    A, G = models.motion_jacobians(m.mean, u, dt)
    mean = models.propagate(m.mean, u, (0.0, 0.0), dt)
    cov = _symmetrize(A @ m.cov @ A.T + G @ np.asarray(Q, float) @ G.T)
    return replace(m, mean=mean, cov=cov)


Match = tuple[Observation, int]  # (sensor observation, landmark index in env)


def matched_pairs(z: list[Observation], z_pred: list[tuple[int, Observation]],
                  assoc: models.Association) -> list[Match]:
    """Resolve association index pairs into (observation, landmark index) pairs."""
    return [(z[zi], z_pred[pi][0]) for zi, pi in assoc.matches]


def _stacked_innovation(m: GaussianMode, matches: list[Match], env: Environment,
                        p: ObsNoiseParams):
    """Innovation vector, stacked Jacobian and block-diagonal R for the matches.

    R blocks are evaluated at the predicted ranges, matching the sensor model.
    """
    k = len(matches)
    y = np.zeros(2 * k)
    H = np.zeros((2 * k, 3))
    R = np.zeros((2 * k, 2 * k))
    for j, (obs, lm_idx) in enumerate(matches):
        lm = env.landmarks[lm_idx]
        dx, dy = lm.x - m.mean.x, lm.y - m.mean.y
        r_pred = math.hypot(dx, dy)
        b_pred = wrap_angle(math.atan2(dy, dx) - m.mean.theta)
        y[2 * j] = obs.range - r_pred
        y[2 * j + 1] = wrap_angle(obs.bearing - b_pred)
        H[2 * j:2 * j + 2] = models.observation_jacobian(m.mean, lm.xy)
        R[2 * j:2 * j + 2, 2 * j:2 * j + 2] = models.observation_noise_cov(r_pred, p)
    return y, H, R


def ekf_update(m: GaussianMode, matches: list[Match], env: Environment,
               p: ObsNoiseParams, iterations: int = 1) -> GaussianMode:
    """Measurement update over all matched landmarks at once (stacked innovation).

    With ``iterations`` > 1 the update is iterated (Gauss-Newton on the MAP
    objective, relinearizing each pass), which widens the convergence basin for
    coarse hypotheses; one iteration is the standard EKF and the extra passes
    are exact no-ops when the measurement is linear.  Uses the Joseph form and
    explicit symmetrization so the covariance stays symmetric PSD under
    roundoff.
    """
    if not matches:
        return m
    x_bar = m.mean.as_array()
    x_j = m.mean
    if iterations > 1:
        # initialize the iterated fit with the heading implied by the matched
        # bearings at the current position (every bearing shares the -theta
        # term, so their circular-mean residual is a direct heading estimate)
        sin_sum = cos_sum = 0.0
        for obs, lm_idx in matches:
            lm = env.landmarks[lm_idx]
            b_pred = math.atan2(lm.y - x_j.y, lm.x - x_j.x) - x_j.theta
            r = obs.bearing - b_pred
            sin_sum += math.sin(r)
            cos_sum += math.cos(r)
        x_j = Pose(x_j.x, x_j.y, x_j.theta - math.atan2(sin_sum, cos_sum))
    K = H = R = None
    for _ in range(max(1, iterations)):
        y, H, R = _stacked_innovation(replace(m, mean=x_j), matches, env, p)
        S = H @ m.cov @ H.T + R
        try:
            K = np.linalg.solve(S.T, (m.cov @ H.T).T).T
        except np.linalg.LinAlgError as e:
            raise FilterNumericsError(f"singular innovation covariance: {e}")
        d_prior = x_bar - x_j.as_array()
        d_prior[2] = wrap_angle(d_prior[2])
        x_new = x_bar + K @ (y - H @ d_prior)
        x_j = Pose.from_array(x_new)
    I_KH = np.eye(3) - K @ H
    cov = _symmetrize(I_KH @ m.cov @ I_KH.T + K @ R @ K.T)
    return replace(m, mean=x_j, cov=cov)


def mahalanobis_sq(matches: list[Match], m: GaussianMode, env: Environment,
                   p: ObsNoiseParams) -> float:
    """Squared Mahalanobis distance between matched readings and the mode's
    most-likely observation, weighted by the sensor covariance alone."""
    if not matches:
        raise ValueError("needs at least one match")
    y, _, R = _stacked_innovation(m, matches, env, p)
    try:
        return float(y @ np.linalg.solve(R, y))
    except np.linalg.LinAlgError as e:
        raise FilterNumericsError(f"singular measurement covariance: {e}")


def update_weights(b: Belief, z: list[Observation], env: Environment,
                   p: ObsNoiseParams, dt: float,
                   gamma_scale: float = 1e-4,
                   gate_confidence: float = 0.999) -> Belief:
    """Likelihood weight update with the negative-information factor.

    Per mode: predict the visible landmark set, associate it against the scan,
    apply the likelihood factor exp(-D^2/2) over matched pairs (D^2 = 0 with no
    matches) and normalize; then, when the observed / predicted / matched
    counts disagree, accumulate beta and decay by
    gamma = exp(-alpha * beta * gamma_scale); finally renormalize.
    """
    n = len(b.modes)
    log_like = np.zeros(n)
    alphas = np.zeros(n)
    mismatched = np.zeros(n, dtype=bool)
    betas = np.array([m.beta for m in b.modes])
    for i, m in enumerate(b.modes):
        z_pred = models.predict_observations(env, m.mean, p)
        assoc = models.associate(z, z_pred, p, gate_confidence)
        if assoc.n_matched > 0:
            d2 = mahalanobis_sq(matched_pairs(z, z_pred, assoc), m, env, p)
        else:
            d2 = 0.0
        log_like[i] = -0.5 * d2
        if assoc.n_pred != assoc.n_z or assoc.n_pred != assoc.n_matched:
            mismatched[i] = True
            alphas[i] = max(1 + assoc.n_z - assoc.n_matched,
                            1 + assoc.n_pred - assoc.n_matched)

    # likelihood reweight + normalize (log-space for underflow safety)
    logw = np.log(np.maximum(b.weights, 1e-300)) + log_like
    logw -= logw.max()
    w = np.exp(logw)
    w /= w.sum()

    # negative-information factor
    betas = np.where(mismatched, betas + dt, 0.0)
    gamma = np.where(mismatched, np.exp(-alphas * betas * gamma_scale), 1.0)
    w = w * gamma
    w /= w.sum()

    return Belief(modes=tuple(
        replace(m, weight=float(w[i]), beta=float(betas[i]))
        for i, m in enumerate(b.modes)
    ))


def prune(b: Belief, delta_w: float) -> Belief:
    """Drop modes with weight <= delta_w and renormalize.

    If every mode would be dropped, the highest-weight mode is kept instead so
    the belief never empties.
    """
    if not (0.0 <= delta_w < 1.0):
        raise ValueError("delta_w must lie in [0, 1)")
    keep = [m for m in b.modes if m.weight > delta_w]
    if not keep:
        keep = [b.modes[b.argmax()]]
    total = sum(m.weight for m in keep)
    return Belief(modes=tuple(replace(m, weight=m.weight / total) for m in keep))


def _sym_mahalanobis(a: GaussianMode, bm: GaussianMode) -> float:
    d = a.mean.as_array() - bm.mean.as_array()
    d[2] = wrap_angle(d[2])
    try:
        da = d @ np.linalg.solve(a.cov, d)
        db = d @ np.linalg.solve(bm.cov, d)
    except np.linalg.LinAlgError:
        return np.inf
    return math.sqrt(max(0.5 * (da + db), 0.0))


def _moment_match(a: GaussianMode, bm: GaussianMode) -> GaussianMode:
    w = a.weight + bm.weight
    wa, wb = a.weight / w, bm.weight / w
    ma = a.mean.as_array()
    mb = bm.mean.as_array()
    # wrap the second mean's heading next to the first before averaging
    mb[2] = ma[2] + wrap_angle(mb[2] - ma[2])
    mean = wa * ma + wb * mb
    da = ma - mean
    db = mb - mean
    cov = wa * (a.cov + np.outer(da, da)) + wb * (bm.cov + np.outer(db, db))
    return GaussianMode(mean=Pose.from_array(mean), cov=_symmetrize(cov),
                        weight=w, beta=min(a.beta, bm.beta))


def merge_similar(b: Belief, d_merge: float) -> Belief:
    """Merge mode pairs whose symmetric Mahalanobis distance is below d_merge.

    Pairs merge by mixture moment matching (weight sum, weighted mean, weighted
    covariance plus spread term), closest pair first, until no pair qualifies.
    A reduction in mode count is the caller's signal to replan.
    """
    if d_merge <= 0:
        raise ValueError("d_merge must be > 0")
    modes = list(b.modes)
    while len(modes) > 1:
        best = None
        for i in range(len(modes)):
            for j in range(i + 1, len(modes)):
                d = _sym_mahalanobis(modes[i], modes[j])
                if d < d_merge and (best is None or d < best[0]):
                    best = (d, i, j)
        if best is None:
            break
        _, i, j = best
        merged = _moment_match(modes[i], modes[j])
        modes = [m for k, m in enumerate(modes) if k not in (i, j)] + [merged]
    total = sum(m.weight for m in modes)
    return Belief(modes=tuple(replace(m, weight=m.weight / total) for m in modes))


def is_unimodal(b: Belief, w_loc: float = 0.99) -> bool:
    """Localized iff one mode holds at least w_loc of the probability mass."""
    return bool(b.weights.max() >= w_loc)


@dataclass(frozen=True)
class FilterParams:
    """Everything the per-step filter pipeline needs besides the belief itself."""

    Q: np.ndarray
    obs: ObsNoiseParams
    delta_w: float = 0.01
    gamma_scale: float = 1e-4
    gate_confidence: float = 0.999
    merge_enabled: bool = False
    d_merge: float = 0.5
    iekf_iterations: int = 1

    def __post_init__(self):
        object.__setattr__(self, "Q", np.asarray(self.Q, dtype=float))


def step_belief(b: Belief, u: Control, z: list[Observation], env: Environment,
                fp: FilterParams, dt: float) -> tuple[Belief, int]:
    """One filter step: per-mode EKF predict and update, then the weight update
    with pruning (and merging when enabled).

    Returns the new belief and the number of modes removed by merging, which
    the executive uses as a replanning trigger.
    """
    updated = []
    for m in b.modes:
        m = ekf_predict(m, u, fp.Q, dt)
        z_pred = models.predict_observations(env, m.mean, fp.obs)
        assoc = models.associate(z, z_pred, fp.obs, fp.gate_confidence)
        m = ekf_update(m, matched_pairs(z, z_pred, assoc), env, fp.obs,
                       iterations=fp.iekf_iterations)
        updated.append(m)
    out = Belief(modes=tuple(updated))
    out = update_weights(out, z, env, fp.obs, dt, fp.gamma_scale, fp.gate_confidence)
    out = prune(out, fp.delta_w)
    merged = 0
    if fp.merge_enabled:
        n0 = len(out.modes)
        out = merge_similar(out, fp.d_merge)
        merged = n0 - len(out.modes)
    return out, merged
