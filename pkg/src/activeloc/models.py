"""Unicycle motion model, range-bearing-signature observation model, their EKF
linearizations, and signature-gated data association.

All models are pure functions over immutable inputs; random streams are
caller-owned, so concurrent use with independent generators is safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2

from .world import Environment, Pose, wrap_angle, wrap_angles


@dataclass(frozen=True)
class Control:
    """Commanded linear (m/s) and angular (rad/s) velocity."""

    v: float
    omega: float

    def as_array(self) -> np.ndarray:
        return np.array([self.v, self.omega])


@dataclass(frozen=True)
class MotionNoiseParams:
    """Process noise covariance of the (n_v, n_omega) actuation disturbance."""

    Q: np.ndarray

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float)
        if Q.shape != (2, 2) or not np.allclose(Q, Q.T):
            raise ValueError("Q must be a symmetric 2x2 matrix")
        if np.linalg.eigvalsh(Q).min() < -1e-12:
            raise ValueError("Q must be positive semi-definite")
        object.__setattr__(self, "Q", Q)


@dataclass(frozen=True)
class ObsNoiseParams:
    """Range-bearing sensor model parameters.

    Measurement noise grows affinely with distance d:
    std_range = eta_r * d + sigma_r,  std_bearing = eta_theta * d + sigma_theta.
    Landmarks are visible within ``max_range``, inside the field of view
    (centered on the heading), and only with clear line of sight.
    """

    eta_r: float = 0.05
    eta_theta: float = 0.02
    sigma_r: float = 0.02
    sigma_theta: float = 0.01
    max_range: float = 3.5
    fov: float = 2.0 * math.pi

    def __post_init__(self):
        if min(self.eta_r, self.eta_theta, self.sigma_r, self.sigma_theta) < 0:
            raise ValueError("noise parameters must be non-negative")
        if not (0.0 < self.fov <= 2.0 * math.pi + 1e-12):
            raise ValueError("fov must lie in (0, 2*pi]")

    def scaled(self, s: float) -> "ObsNoiseParams":
        """Same sensor with all noise magnitudes scaled by s (range/fov kept).

        Simulators inject ``model.scaled(s)`` noise with s < 1 to run the
        filter conservatively."""
        return ObsNoiseParams(eta_r=self.eta_r * s, eta_theta=self.eta_theta * s,
                              sigma_r=self.sigma_r * s, sigma_theta=self.sigma_theta * s,
                              max_range=self.max_range, fov=self.fov)


@dataclass(frozen=True)
class Observation:
    """One landmark reading: signature id, range (m), bearing (rad, wrapped)."""

    landmark_id: int
    range: float
    bearing: float

    def __post_init__(self):
        if self.range < 0:
            raise ValueError("range must be >= 0")
        object.__setattr__(self, "bearing", wrap_angle(self.bearing))


def propagate(x: Pose, u: Control, w=(0.0, 0.0), dt: float = 0.1) -> Pose:
    """Unicycle kinematics step with additive actuation noise w = (n_v, n_omega)."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    v = u.v + w[0]
    om = u.omega + w[1]
    return Pose(
        x.x + v * dt * math.cos(x.theta),
        x.y + v * dt * math.sin(x.theta),
        x.theta + om * dt,
    )


def motion_jacobians(x: Pose, u: Control, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """State and noise Jacobians of :func:`propagate` at zero noise."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    s, c = math.sin(x.theta), math.cos(x.theta)
    A = np.array([
        [1.0, 0.0, -u.v * dt * s],
        [0.0, 1.0, u.v * dt * c],
        [0.0, 0.0, 1.0],
    ])
    G = np.array([
        [dt * c, 0.0],
        [dt * s, 0.0],
        [0.0, dt],
    ])
    return A, G


def observation_noise_cov(d: float, p: ObsNoiseParams) -> np.ndarray:
    """Diagonal 2x2 measurement covariance at range d."""
    if d < 0:
        raise ValueError("range must be >= 0")
    return np.diag([
        (p.eta_r * d + p.sigma_r) ** 2,
        (p.eta_theta * d + p.sigma_theta) ** 2,
    ])


def observation_jacobian(x: Pose, lm_xy: np.ndarray) -> np.ndarray:
    """2x3 Jacobian of the range-bearing measurement w.r.t. the pose."""
    dx = lm_xy[0] - x.x
    dy = lm_xy[1] - x.y
    q = dx * dx + dy * dy
    r = math.sqrt(q)
    if r < 1e-9:
        raise ValueError("landmark coincides with robot position")
    return np.array([
        [-dx / r, -dy / r, 0.0],
        [dy / q, -dx / q, -1.0],
    ])


def visible_landmarks(env: Environment, x: Pose, p: ObsNoiseParams,
                      fov: float | None = None) -> np.ndarray:
    """Indices of landmarks within range and field of view with clear sight lines."""
    if len(env.landmarks) == 0:
        return np.array([], dtype=int)
    d = env.landmark_xy - np.array([x.x, x.y])
    rng_ = np.linalg.norm(d, axis=1)
    eff_fov = p.fov if fov is None else fov
    mask = (rng_ <= p.max_range) & (rng_ > 1e-9)
    if eff_fov < 2.0 * math.pi - 1e-12:
        bearing = wrap_angles(np.arctan2(d[:, 1], d[:, 0]) - x.theta)
        mask &= np.abs(bearing) <= eff_fov / 2.0
    idx = np.flatnonzero(mask)
    if idx.size and env.obstacles:
        origin = np.tile([x.x, x.y], (idx.size, 1))
        blocked = env.segments_blocked(origin, env.landmark_xy[idx])
        idx = idx[~blocked]
    return idx


def observe(env: Environment, x: Pose, p: ObsNoiseParams,
            rng: np.random.Generator | None = None) -> list[Observation]:
    """Observations of all visible landmarks, in landmark-index order.

    With ``rng`` supplied, each reading carries zero-mean Gaussian noise with
    :func:`observation_noise_cov` at the true range; otherwise the most-likely
    (noise-free) reading is returned.
    """
    out = []
    for i in visible_landmarks(env, x, p):
        lm = env.landmarks[i]
        dx, dy = lm.x - x.x, lm.y - x.y
        r = math.hypot(dx, dy)
        b = wrap_angle(math.atan2(dy, dx) - x.theta)
        if rng is not None:
            std_r = p.eta_r * r + p.sigma_r
            std_b = p.eta_theta * r + p.sigma_theta
            r = max(0.0, r + std_r * rng.standard_normal())
            b = wrap_angle(b + std_b * rng.standard_normal())
        out.append(Observation(landmark_id=int(lm.id), range=r, bearing=b))
    return out


def predict_observations(env: Environment, x: Pose, p: ObsNoiseParams,
                         ) -> list[tuple[int, Observation]]:
    """(landmark index, most-likely observation) pairs for all visible landmarks."""
    out = []
    for i in visible_landmarks(env, x, p):
        lm = env.landmarks[i]
        dx, dy = lm.x - x.x, lm.y - x.y
        out.append((int(i), Observation(
            landmark_id=int(lm.id),
            range=math.hypot(dx, dy),
            bearing=wrap_angle(math.atan2(dy, dx) - x.theta),
        )))
    return out


@dataclass(frozen=True)
class Association:
    """Greedy gated signature matching between a scan and a prediction set.

    ``matches`` pairs indices into the observation list with indices into the
    prediction list; the three counts drive the negative-information weight
    update.
    """

    matches: tuple[tuple[int, int], ...]
    n_z: int
    n_pred: int
    n_matched: int


def pair_mahalanobis_sq(z: Observation, z_pred: Observation, p: ObsNoiseParams) -> float:
    """Squared Mahalanobis distance of one observation/prediction pair.

    Uses the sensor covariance evaluated at the predicted range; the bearing
    residual is wrapped.
    """
    R = observation_noise_cov(z_pred.range, p)
    dr = z.range - z_pred.range
    db = wrap_angle(z.bearing - z_pred.bearing)
    return dr * dr / R[0, 0] + db * db / R[1, 1]


def associate(z: list[Observation], z_pred: list[tuple[int, Observation]],
              p: ObsNoiseParams, gate_confidence: float = 0.999) -> Association:
    """Pair observations with predictions of the same signature.

    Candidates sharing a signature are taken greedily by smallest Mahalanobis
    distance under a chi-square(2) gate; every observation and prediction is
    used at most once.
    """
    gate = chi2.ppf(gate_confidence, df=2)
    cands = []
    for zi, obs in enumerate(z):
        for pi, (_, pred) in enumerate(z_pred):
            if obs.landmark_id != pred.landmark_id:
                continue
            d2 = pair_mahalanobis_sq(obs, pred, p)
            if d2 <= gate:
                cands.append((d2, zi, pi))
    cands.sort()
    used_z: set[int] = set()
    used_p: set[int] = set()
    matches = []
    for _, zi, pi in cands:
        if zi in used_z or pi in used_p:
            continue
        used_z.add(zi)
        used_p.add(pi)
        matches.append((zi, pi))
    matches.sort()
    return Association(
        matches=tuple(matches),
        n_z=len(z),
        n_pred=len(z_pred),
        n_matched=len(matches),
    )
