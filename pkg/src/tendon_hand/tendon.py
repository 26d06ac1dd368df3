"""Tendon length, moment arm, excursion and force transmission at the joints.

Each joint crossing is a triangle: two chords L1, L2 from the joint centre
to the guide holes, enclosing

    alpha(theta) = pi - theta - atan(d2/R2) - atan(d1/R1)

so the tendon segment length is l = sqrt(L1^2 + L2^2 - 2 L1 L2 cos(alpha))
and its moment arm is h = L1 L2 sin(alpha) / l (twice the triangle area over
its base).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from . import _roots
from .errors import GeometryError, SingularConfigurationError
from .hand_model import (
    Crossing,
    DHChain,
    JointTendonGeometry,
    TendonMaterial,
    TendonRoute,
    validate_angles,
)
from .kinematics import jacobian

__all__ = [
    "Crossing",
    "JointTendonGeometry",
    "TendonMaterial",
    "TendonRoute",
    "FingertipForce",
    "calibrate_geometry",
    "check_geometry_range",
    "excursion",
    "fingertip_force",
    "joint_torque",
    "moment_arm",
    "route_excursion",
    "route_joint_torques",
    "tendon_length",
    "tendon_profile",
]


def enclosed_angle(geom: JointTendonGeometry, theta: float) -> float:
    """alpha in radians for joint angle ``theta`` in degrees."""
    return math.pi - math.radians(theta) - geom.offset


def _alpha_checked(geom, theta):
    a = enclosed_angle(geom, theta)
    if not 0.0 < a < math.pi:
        raise GeometryError(f"tendon geometry invalid at {theta:g}°: enclosed angle {math.degrees(a):.3f}° not in (0, 180)")
    return a


def check_geometry_range(geom: JointTendonGeometry, theta_min: float, theta_max: float):
    """alpha decreases with theta, so the range endpoints bound it."""
    _alpha_checked(geom, theta_min)
    _alpha_checked(geom, theta_max)


def tendon_length(geom: JointTendonGeometry, theta: float) -> float:
    a = _alpha_checked(geom, theta)
    return math.sqrt(geom.L1 ** 2 + geom.L2 ** 2 - 2.0 * geom.L1 * geom.L2 * math.cos(a))


def moment_arm(geom: JointTendonGeometry, theta: float) -> float:
    a = _alpha_checked(geom, theta)
    return geom.L1 * geom.L2 * math.sin(a) / tendon_length(geom, theta)


def excursion(geom: JointTendonGeometry, theta_from: float, theta_to: float) -> float:
    """l(from) - l(to); positive when the tendon shortens."""
    return tendon_length(geom, theta_from) - tendon_length(geom, theta_to)


def _crossing_excursion(route, c: Crossing, a, b):
    try:
        return c.sign * excursion(c.geometry, a, b)
    except GeometryError as exc:
        raise GeometryError(f"route {route.name}, joint {c.joint}: {exc}") from None


def route_excursion(route: TendonRoute, from_angles: Sequence[float], to_angles: Sequence[float]) -> float:
    """Signed sum of per-crossing excursions between two joint-angle sets."""
    return sum(_crossing_excursion(route, c, from_angles[c.joint], to_angles[c.joint]) for c in route.crossings)


def joint_torque(geom: JointTendonGeometry, theta: float, tension: float) -> float:
    """Torque (N*mm) from tendon tension (N) at joint angle theta."""
    if tension < 0:
        raise ValueError(f"tension must be >= 0 (got {tension})")
    return tension * moment_arm(geom, theta)


def route_joint_torques(
    route: TendonRoute,
    angles: Sequence[float],
    tension: float,
    spring_torque: float = 0.0,
) -> np.ndarray:
    """Per-joint torques from one tensioned route.

    Each crossing contributes sign * efficiency * tension * h.  A non-zero
    ``spring_torque`` is subtracted from the most distal joint (the pre-tensioned
    reset spring on the distal phalanx).
    """
    tau = np.zeros(len(angles))
    for c in route.crossings:
        tau[c.joint] += c.sign * c.efficiency * joint_torque(c.geometry, angles[c.joint], tension)
    if spring_torque:
        tau[-1] -= spring_torque
    return tau


@dataclass(frozen=True)
class FingertipForce:
    force: np.ndarray  # N, frame 0
    residual: float  # N*mm, |J^T F - tau| over the active joints
    condition_number: float

    @property
    def magnitude(self) -> float:
        return float(np.linalg.norm(self.force))


def fingertip_force(
    chain: DHChain,
    angles: Sequence[float],
    joint_torques: Sequence[float],
    locked: Sequence[int] = (),
    max_condition: float = 1e8,
) -> FingertipForce:
    """Static fingertip force balancing the joint torques, from J^T F = tau.

    J is differentiated numerically (central differences, 1e-5 rad).  Joints in
    ``locked`` are treated as rigid: their rows are dropped from the balance,
    so their torque entries are ignored.  The system is solved in the
    least-squares sense; ``residual`` reports how far tau is from the range of
    J^T.
    """
    angles = validate_angles(chain, angles)
    tau = np.asarray(joint_torques, dtype=float)
    if tau.shape != (len(angles),):
        raise ValueError(f"expected {len(angles)} joint torques, got {tau.shape}")
    if not np.all(np.isfinite(tau)):
        raise ValueError("joint torques must be finite")
    active = [i for i in range(len(angles)) if i not in set(locked)]
    J = jacobian(chain, angles)[:, active]
    sv = np.linalg.svd(J, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    if cond > max_condition:
        raise SingularConfigurationError(
            f"singular configuration: Jacobian condition number {cond:.3e} exceeds {max_condition:.0e}"
        )
    F, *_ = np.linalg.lstsq(J.T, tau[active], rcond=None)
    residual = float(np.linalg.norm(J.T @ F - tau[active]))
    return FingertipForce(F, residual, cond)


def calibrate_geometry(
    target_excursion: float,
    theta_range: Tuple[float, float],
    template: JointTendonGeometry,
) -> JointTendonGeometry:
    """Scale L1 and L2 together so the excursion over ``theta_range`` hits the target."""
    if target_excursion <= 0:
        raise ValueError("target excursion must be positive")
    t0, t1 = theta_range
    check_geometry_range(template, min(t0, t1), max(t0, t1))
    base = excursion(template, t0, t1)
    if base <= 0:
        raise GeometryError("no positive scale achieves the target: template excursion is not positive")

    def f(s):
        return excursion(template.scaled(s), t0, t1) - target_excursion

    if abs(f(1.0)) <= 1e-12 * target_excursion:
        return template
    hi = 1.0
    while f(hi) < 0:
        hi *= 2.0
    lo = hi / 2.0
    while f(lo) > 0:
        lo /= 2.0
    # excursion is linear in the common scale, so its slope is the unit-scale value
    s = _roots.bisect_newton(f, lambda _s: base, lo, hi, ftol=1e-12, bisect_width=hi)
    return template.scaled(s)


def tendon_profile(geom: JointTendonGeometry, theta_min: float, theta_max: float, step: float) -> List[Tuple[float, float, float]]:
    """(theta deg, l mm, h mm) rows from theta_min to theta_max inclusive."""
    if step <= 0:
        raise ValueError("theta step must be > 0")
    n = int(math.floor((theta_max - theta_min) / step + 1e-9))
    thetas = [theta_min + i * step for i in range(n + 1)]
    if thetas[-1] < theta_max - 1e-9:
        thetas.append(theta_max)
    return [(t, tendon_length(geom, t), moment_arm(geom, t)) for t in thetas]
