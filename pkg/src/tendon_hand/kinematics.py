"""Finger forward/inverse kinematics on D-H chains.

Link transform convention (one row, angles in degrees at the interface)::

    T = RotX(-alpha_prev) @ RotZ(theta) @ TransZ(d) @ TransX(a)

The twist is applied with a negative sign so that, with the tabulated
alpha = +90 deg on the MCP flexion row, flexion curls the finger toward -z.
That reproduces the fingertip coordinates x = [..] cos(t1), y = [..] sin(t1),
z = -(a4 s234 + a3 s23 + a2 s2) exactly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from . import _roots
from .errors import ArityError, IndeterminateError, UnreachableError
from .hand_model import CouplingRule, DHChain, DHRow, JointAngles, validate_angles

FingertipPoint = Tuple[float, float, float]

# joint-limit slack for values produced by the solver itself
_LIMIT_EPS = 1e-9


@dataclass(frozen=True)
class Pose:
    rotation: np.ndarray  # 3x3
    position: np.ndarray  # mm

    @property
    def matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.rotation
        T[:3, 3] = self.position
        return T

    @classmethod
    def from_matrix(cls, T) -> "Pose":
        T = np.asarray(T, dtype=float)
        return cls(T[:3, :3].copy(), T[:3, 3].copy())


def _link_matrix(alpha_deg, a, d, theta_rad):
    ca, sa = math.cos(alpha_deg * math.pi / 180.0), -math.sin(alpha_deg * math.pi / 180.0)
    ct, st = math.cos(theta_rad), math.sin(theta_rad)
    return np.array(
        [
            [ct, -st, 0.0, a * ct],
            [ca * st, ca * ct, -sa, ca * a * st - sa * d],
            [sa * st, sa * ct, ca, sa * a * st + ca * d],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def joint_transform(row: DHRow, theta: float) -> Pose:
    """Single-link homogeneous transform for joint angle ``theta`` (degrees)."""
    return Pose.from_matrix(_link_matrix(row.alpha_prev, row.a, row.d, math.radians(theta)))


def _chain_matrices(chain: DHChain, angles: Sequence[float]) -> List[np.ndarray]:
    T = np.eye(4)
    out = []
    for row, th in zip(chain.rows, angles):
        T = T @ _link_matrix(row.alpha_prev, row.a, row.d, math.radians(th))
        out.append(T)
    return out


def forward_kinematics(chain: DHChain, angles: Sequence[float], check: bool = True) -> Pose:
    """Fingertip pose in the finger's frame 0 (product of the link transforms).

    Raises JointLimitError for an out-of-range angle unless ``check`` is off.
    """
    if check:
        angles = validate_angles(chain, angles)
    elif len(angles) != len(chain.rows):
        raise ArityError(f"finger {chain.name} has {len(chain.rows)} joints, got {len(angles)} angles")
    return Pose.from_matrix(_chain_matrices(chain, angles)[-1])


def fingertip(chain: DHChain, angles: Sequence[float], check: bool = True) -> FingertipPoint:
    p = forward_kinematics(chain, angles, check).position
    return (float(p[0]), float(p[1]), float(p[2]))


def joint_origins(chain: DHChain, angles: Sequence[float], check: bool = True) -> np.ndarray:
    """Frame origins after each row, shape (n, 3); the last one is the fingertip.

    Because each row translates along its own x axis after rotating, origin i
    sits at the distal end of link i (for the universal finger: MCP, PIP, DIP,
    tip).
    """
    if check:
        angles = validate_angles(chain, angles)
    return np.array([T[:3, 3] for T in _chain_matrices(chain, angles)])


def to_hand_frame(chain: DHChain, point) -> np.ndarray:
    R = np.asarray(chain.base_rotation, dtype=float)
    return R @ np.asarray(point, dtype=float) + np.asarray(chain.base_position, dtype=float)


def fingertip_in_hand(chain: DHChain, angles: Sequence[float], check: bool = True) -> np.ndarray:
    return to_hand_frame(chain, fingertip(chain, angles, check))


def chain_midpoints(chain: DHChain) -> JointAngles:
    return tuple(r.midpoint for r in chain.rows)


# ----------------------------------------------------------------------------
# Coupling
# ----------------------------------------------------------------------------

def apply_coupling(rule: CouplingRule, angles: Sequence[float], chain: DHChain) -> JointAngles:
    """Set the driven joint to ``k * driver``, clamped into the driven joint's range."""
    out = [float(v) for v in angles]
    if len(out) != len(chain.rows):
        raise ValueError(f"expected {len(chain.rows)} angles, got {len(out)}")
    row = chain.rows[rule.driven_joint]
    v = rule.k * out[rule.driver_joint]
    out[rule.driven_joint] = min(max(v, row.theta_min), row.theta_max)
    return tuple(out)


def apply_couplings(rules: Sequence[CouplingRule], angles: Sequence[float], chain: DHChain) -> JointAngles:
    for r in rules:
        if r.finger == chain.name:
            angles = apply_coupling(r, angles, chain)
    return tuple(angles)


# ----------------------------------------------------------------------------
# Inverse kinematics (universal finger, coupled DIP)
# ----------------------------------------------------------------------------

def _check_universal(chain: DHChain, coupling: CouplingRule):
    if len(chain.rows) != 4:
        raise ValueError(f"coupled IK needs a 4-joint finger, {chain.name} has {len(chain.rows)}")
    if (coupling.driver_joint, coupling.driven_joint) != (2, 3):
        raise ValueError("coupled IK expects the DIP (row 3) driven by the PIP (row 2)")
    if chain.rows[0].a != 0.0 or any(r.d != 0.0 for r in chain.rows):
        raise ValueError("coupled IK expects a1 = 0 and zero link offsets")


def coupled_reach_residual(theta3: float, a2, a3, a4, k, rhs) -> float:
    """Left side minus right side of the squared-reach equation in theta3 (rad)."""
    return math.cos(k * theta3) / a2 + math.cos((1 + k) * theta3) / a3 + math.cos(theta3) / a4 - rhs


def inverse_kinematics(chain: DHChain, target, coupling: CouplingRule) -> JointAngles:
    """Joint angles (deg) placing the fingertip at ``target`` (mm, frame 0).

    theta1 comes from atan2(y, x) (or its flip when the tip lies behind the
    base axis); theta3 from the squared-reach equation
    with theta4 = k*theta3 substituted (smallest root on the PIP range);
    theta2 from Newton iteration on the x-equation, seeded at the planar
    two-vector angle and falling back to bisection on the z-equation.
    """
    _check_universal(chain, coupling)
    x, y, z = (float(v) for v in target)
    t = math.hypot(x, y)
    if t == 0.0:
        raise IndeterminateError("lateral angle indeterminate: target lies on the base z axis (x = y = 0)")

    r1, r2, r3, r4 = chain.rows
    a2, a3, a4 = r2.a, r3.a, r4.a
    k = coupling.k

    # a finger curled back past its base axis projects behind it, so the
    # flipped lateral angle (negative planar radius) is also a candidate
    cands = [math.degrees(math.atan2(y, x)), math.degrees(math.atan2(-y, -x))]
    fits = [c for c in cands if r1.theta_min - _LIMIT_EPS <= c <= r1.theta_max + _LIMIT_EPS]
    if not fits:
        raise UnreachableError(f"unreachable: lateral angle {cands[0]:.6f}° outside {r1.name} range")
    th1 = min(max(fits[0], r1.theta_min), r1.theta_max)

    reach = a2 + a3 + a4
    dist = math.sqrt(t * t + z * z)
    if dist > reach + 1e-9:
        raise UnreachableError(f"unreachable: |p| = {dist:.6f} mm exceeds reach {reach:g} mm")

    rhs = (z * z + t * t - a2 * a2 - a3 * a3 - a4 * a4) / (2.0 * a2 * a3 * a4)

    lo = math.radians(r3.theta_min)
    hi = math.radians(r3.theta_max)
    if k > 0:
        hi = min(hi, math.radians(r4.theta_max) / k)

    def f(th):
        return coupled_reach_residual(th, a2, a3, a4, k, rhs)

    def df(th):
        return -k * math.sin(k * th) / a2 - (1 + k) * math.sin((1 + k) * th) / a3 - math.sin(th) / a4

    br = _roots.first_bracket(f, lo, hi, n=220, atol=1e-13)
    if br is None:
        raise UnreachableError("unreachable: no solution of the coupled reach equation on the PIP range")
    th3 = _roots.bisect_newton(f, df, br[0], br[1], ftol=1e-10, maxiter=200)
    if abs(f(th3)) > 1e-10:
        raise UnreachableError(f"unreachable: reach residual {f(th3):.3e} above tolerance")
    th4 = k * th3

    A = a2 + a3 * math.cos(th3) + a4 * math.cos(th3 + th4)
    B = a3 * math.sin(th3) + a4 * math.sin(th3 + th4)
    c1, s1 = math.cos(math.radians(th1)), math.sin(math.radians(th1))
    planar = x * c1 + y * s1  # equals the bracket in the x-equation

    def g(th2):  # x-equation residual
        return A * math.cos(th2) - B * math.sin(th2) - planar

    def dg(th2):
        return -A * math.sin(th2) - B * math.cos(th2)

    def h(th2):  # z-equation residual
        return -(A * math.sin(th2) + B * math.cos(th2)) - z

    lo2, hi2 = math.radians(r2.theta_min), math.radians(r2.theta_max)
    th2 = math.atan2(-z, planar) - math.atan2(B, A)
    ok = True
    for _ in range(50):
        gv = g(th2)
        if abs(gv) <= 1e-12:
            break
        d = dg(th2)
        if abs(d) < 1e-12:
            ok = abs(gv) <= 1e-9
            break
        th2 -= gv / d
        if not (lo2 - 1e-6 <= th2 <= hi2 + 1e-6):
            ok = False
            break
    if ok and abs(h(th2)) > 1e-7:
        ok = False  # Newton landed on the mirror branch of the x-equation
    if not ok:
        hlo, hhi = h(lo2), h(hi2)
        if abs(hlo) <= 1e-12:
            th2 = lo2
        elif abs(hhi) <= 1e-12:
            th2 = hi2
        elif (hlo < 0) == (hhi < 0):
            raise UnreachableError("unreachable: no MCP flexion angle matches the target height")
        else:
            th2 = _roots.bisect(h, lo2, hi2, fa=hlo)

    angles = [th1, math.degrees(th2), math.degrees(th3), math.degrees(th4)]
    for i, row in enumerate(chain.rows):
        if not (row.theta_min - 1e-6 <= angles[i] <= row.theta_max + 1e-6):
            raise UnreachableError(f"unreachable: {row.name} = {angles[i]:.6f}° outside its range")
        angles[i] = min(max(angles[i], row.theta_min), row.theta_max)

    p = fingertip(chain, angles, check=False)
    err = math.dist(p, (x, y, z))
    if err > 1e-6:
        raise UnreachableError(f"unreachable: fingertip residual {err:.3e} mm above tolerance")
    return tuple(angles)


# ----------------------------------------------------------------------------
# Workspace, Jacobian, general numeric IK
# ----------------------------------------------------------------------------

def sample_workspace(chain: DHChain, coupling: CouplingRule, grid_steps: int) -> List[FingertipPoint]:
    """Fingertips on a regular grid over every uncoupled joint, driven joint coupled.

    Grid order is row-major in joint order (first joint outermost).
    """
    if grid_steps < 2:
        raise ValueError("grid_steps must be >= 2")
    free = [i for i in range(len(chain.rows)) if i != coupling.driven_joint]
    axes = [np.linspace(chain.rows[i].theta_min, chain.rows[i].theta_max, grid_steps) for i in free]
    out = []
    for combo in itertools.product(*axes):
        angles = [0.0] * len(chain.rows)
        for i, v in zip(free, combo):
            angles[i] = float(v)
        angles = apply_coupling(coupling, angles, chain)
        out.append(fingertip(chain, angles, check=False))
    return out


def jacobian(chain: DHChain, angles: Sequence[float], step: float = 1e-5) -> np.ndarray:
    """Positional Jacobian d(tip)/d(theta), mm/rad, by central differences."""
    base = np.radians(np.asarray(angles, dtype=float))
    J = np.empty((3, len(base)))
    for i in range(len(base)):
        up = base.copy()
        dn = base.copy()
        up[i] += step
        dn[i] -= step
        pu = np.asarray(fingertip(chain, np.degrees(up), check=False))
        pd = np.asarray(fingertip(chain, np.degrees(dn), check=False))
        J[:, i] = (pu - pd) / (2 * step)
    return J


def numeric_ik(chain: DHChain, target, hand_frame: bool = True, seeds=None):
    """Bounded least-squares position IK for any chain; returns (angles, residual mm).

    Used for the thumb, whose redundant chain has no closed-form solution.
    Deterministic: tries the supplied seeds, then the range midpoints and the
    quarter points, keeping the smallest residual.
    """
    from scipy.optimize import least_squares

    target = np.asarray(target, dtype=float)
    lo = np.array([r.theta_min for r in chain.rows])
    hi = np.array([r.theta_max for r in chain.rows])
    fixed = lo == hi

    def resid(q):
        q = np.where(fixed, lo, q)
        p = fingertip(chain, q, check=False)
        if hand_frame:
            p = to_hand_frame(chain, p)
        return np.asarray(p) - target

    cands = [np.asarray(s, dtype=float) for s in (seeds or [])]
    cands += [0.5 * (lo + hi), lo + 0.25 * (hi - lo), lo + 0.75 * (hi - lo)]
    best = None
    lo_b = np.where(fixed, lo - 1e-9, lo)
    hi_b = np.where(fixed, hi + 1e-9, hi)
    for s in cands:
        s = np.clip(s, lo, hi)
        sol = least_squares(resid, s, bounds=(lo_b, hi_b), xtol=1e-12, ftol=1e-12, gtol=1e-12, max_nfev=400)
        q = np.clip(np.where(fixed, lo, sol.x), lo, hi)
        err = float(np.linalg.norm(resid(q)))
        if best is None or err < best[1] - 1e-12:
            best = (tuple(float(v) for v in q), err)
        if err < 1e-9:
            break
    return best
