"""Active global localization for a 2D range-bearing robot.

The package keeps a Gaussian-mixture belief over the robot pose with one EKF
per hypothesis, and plans disambiguating motions: targets are picked from an
offline uniqueness graph so that each hypothesis expects to see information
the others do not, candidate trajectories are scored by expected hypothesis
reduction, and the best one is executed receding-horizon until the belief
collapses to a single mode.
"""

from .belief import (
    Belief,
    FilterParams,
    GaussianMode,
    ekf_predict,
    ekf_update,
    init_belief,
    is_unimodal,
    mahalanobis_sq,
    merge_similar,
    prune,
    step_belief,
    update_weights,
)
from .models import (
    Association,
    Control,
    MotionNoiseParams,
    Observation,
    ObsNoiseParams,
    associate,
    motion_jacobians,
    observation_noise_cov,
    observe,
    predict_observations,
    propagate,
)
from .planner import (
    GainReport,
    PlannerParams,
    Policy,
    choose_policy,
    expected_information_gain,
    feedback_control,
    m3p_run,
    plan_candidate,
    select_targets,
)
from .sim import ClosedLoopSim, ScenarioResult, TraceLog, run_scenario, step_truth
from .uniqueness import UGraphNode, UniquenessGraph, build, nodes_in_neighborhood
from .world import (
    ConvexPolygon,
    Environment,
    Landmark,
    MapError,
    Pose,
    SamplingExhausted,
    is_free,
    is_free_segment,
    load_map,
    sample_free_pose,
    save_map,
    wrap_angle,
)

__version__ = "0.1.0"
