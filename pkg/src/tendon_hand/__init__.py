"""Kinematics, tendon transmission and hybrid SMA-motor actuation of a 21-DOF tendon-driven hand."""

from .actuation import allocation_census, simulate_script, step_sequencer, stroke_sufficiency
from .hand_model import (
    CouplingRule,
    DHChain,
    DHRow,
    HandSpec,
    clamp_to_limits,
    default_hand_spec,
    load_spec,
    save_spec,
)
from .kinematics import (
    apply_coupling,
    fingertip,
    forward_kinematics,
    inverse_kinematics,
    joint_transform,
    sample_workspace,
)
from .posture import builtin_gesture_library, check_gesture, generate_grasp, kapandji_score
from .tendon import calibrate_geometry, excursion, fingertip_force, moment_arm, tendon_length

__version__ = "0.1.0"

__all__ = [
    "CouplingRule",
    "DHChain",
    "DHRow",
    "HandSpec",
    "allocation_census",
    "apply_coupling",
    "builtin_gesture_library",
    "calibrate_geometry",
    "check_gesture",
    "clamp_to_limits",
    "default_hand_spec",
    "excursion",
    "fingertip",
    "fingertip_force",
    "forward_kinematics",
    "generate_grasp",
    "inverse_kinematics",
    "joint_transform",
    "kapandji_score",
    "load_spec",
    "moment_arm",
    "sample_workspace",
    "save_spec",
    "simulate_script",
    "step_sequencer",
    "stroke_sufficiency",
    "tendon_length",
]
