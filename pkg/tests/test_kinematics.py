import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from tendon_hand.errors import ArityError, IndeterminateError, JointLimitError, UnreachableError
from tendon_hand.hand_model import DHRow, default_hand_spec
from tendon_hand.kinematics import (
    apply_coupling,
    fingertip,
    forward_kinematics,
    inverse_kinematics,
    jacobian,
    joint_origins,
    joint_transform,
    numeric_ik,
    sample_workspace,
)

A2, A3, A4 = 47.0, 29.0, 23.5
SPEC = default_hand_spec()
INDEX = SPEC.chain("index")
RULE = SPEC.couplings_for("index")[0]


def scalar_tip(t1, t2, t3, t4):
    """Closed-form fingertip, written out term by term."""
    t1, t2, t3, t4 = (math.radians(v) for v in (t1, t2, t3, t4))
    reach = A4 * math.cos(t2 + t3 + t4) + A3 * math.cos(t2 + t3) + A2 * math.cos(t2)
    x = math.cos(t1) * reach
    y = math.sin(t1) * reach
    z = -(A4 * math.sin(t2 + t3 + t4) + A3 * math.sin(t2 + t3) + A2 * math.sin(t2))
    return np.array([x, y, z])


def sym_link(alpha_deg, a, d, theta):
    """Elementary-rotation product Rx(-alpha) Rz(theta) Tz(d) Tx(a), symbolic."""
    al = -sp.rad(alpha_deg)
    rx = sp.Matrix([[1, 0, 0, 0], [0, sp.cos(al), -sp.sin(al), 0], [0, sp.sin(al), sp.cos(al), 0], [0, 0, 0, 1]])
    rz = sp.Matrix([[sp.cos(theta), -sp.sin(theta), 0, 0], [sp.sin(theta), sp.cos(theta), 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    tz = sp.eye(4)
    tz[2, 3] = d
    tx = sp.eye(4)
    tx[0, 3] = a
    return rx * rz * tz * tx


# --------------------------------------------------------------- joint_transform

def test_identity_row():
    pose = joint_transform(DHRow("J", 0.0, 0.0, 0.0, -180, 180), 0.0)
    assert np.array_equal(pose.matrix, np.eye(4))


def test_pure_translation():
    pose = joint_transform(DHRow("J", 0.0, 47.0, 0.0, -180, 180), 0.0)
    assert np.allclose(pose.rotation, np.eye(3), atol=0)
    assert np.allclose(pose.position, [47.0, 0.0, 0.0], atol=0)


@pytest.mark.parametrize("alpha, a, d, theta", [(90.0, 47.0, 0.0, 30.0), (-90.0, 12.0, 3.0, -40.0), (0.0, 29.0, 0.0, 75.0)])
def test_joint_transform_matches_symbolic(alpha, a, d, theta):
    th = sp.Symbol("th")
    m = sym_link(alpha, a, d, th).subs(th, sp.rad(theta))
    expected = np.array(m.evalf(30), dtype=float)
    got = joint_transform(DHRow("J", alpha, a, d, -180, 180), theta).matrix
    assert np.allclose(got, expected, atol=1e-12)


def test_symbolic_chain_position_is_closed_form():
    t1, t2, t3, t4 = sp.symbols("t1:5")
    T = sym_link(0, 0, 0, t1) * sym_link(90, A2, 0, t2) * sym_link(0, A3, 0, t3) * sym_link(0, A4, 0, t4)
    reach = A4 * sp.cos(t2 + t3 + t4) + A3 * sp.cos(t2 + t3) + A2 * sp.cos(t2)
    z = -(A4 * sp.sin(t2 + t3 + t4) + A3 * sp.sin(t2 + t3) + A2 * sp.sin(t2))
    for got, want in zip(T[:3, 3], (sp.cos(t1) * reach, sp.sin(t1) * reach, z)):
        assert sp.simplify(sp.expand_trig(got - want)) == 0


# --------------------------------------------------------------- FK

def test_zero_pose():
    assert fingertip(INDEX, (0, 0, 0, 0)) == (99.5, 0.0, 0.0)


def test_mcp_at_ninety():
    assert np.allclose(fingertip(INDEX, (0, 90, 0, 0)), (0.0, 0.0, -99.5), atol=1e-12)


def test_lateral_rotation_of_zero_pose():
    c, s = math.cos(math.radians(15)), math.sin(math.radians(15))
    assert np.allclose(fingertip(INDEX, (15, 0, 0, 0)), (99.5 * c, 99.5 * s, 0.0), atol=1e-12)


@pytest.mark.parametrize("angles", [(15, 30, 45, 30), (0, 90, 110, 90), (-15, 10, 100, 5)])
def test_fk_matches_scalar(angles):
    assert np.allclose(fingertip(INDEX, angles), scalar_tip(*angles), atol=1e-9, rtol=0)


def test_fingertip_equals_pose_position():
    pose = forward_kinematics(INDEX, (5, 20, 30, 20))
    assert fingertip(INDEX, (5, 20, 30, 20)) == tuple(float(v) for v in pose.position)


def test_fk_rejects_out_of_limit():
    with pytest.raises(JointLimitError, match="PIP exceeds 110°"):
        forward_kinematics(INDEX, (0, 0, 120, 0))
    with pytest.raises(ArityError):
        forward_kinematics(INDEX, (0, 0, 0))


def test_joint_origins_last_is_tip():
    q = (3, 40, 50, 30)
    o = joint_origins(INDEX, q)
    assert o.shape == (4, 3)
    assert np.allclose(o[-1], fingertip(INDEX, q), atol=0)
    assert np.allclose(o[0], 0.0)
    assert np.linalg.norm(o[1] - o[0]) == pytest.approx(47.0)


def limited(chain):
    return st.tuples(*[st.floats(r.theta_min, r.theta_max, allow_nan=False) for r in chain.rows])


@settings(max_examples=300, deadline=None)
@given(limited(INDEX))
def test_fk_properties(angles):
    pose = forward_kinematics(INDEX, angles)
    R = pose.rotation
    assert np.allclose(pose.position, scalar_tip(*angles), atol=1e-9, rtol=0)
    assert np.allclose(R.T @ R, np.eye(3), atol=1e-9)
    assert np.linalg.det(R) == pytest.approx(1.0, abs=1e-9)
    assert np.linalg.norm(pose.position) <= 99.5 + 1e-9


@settings(max_examples=100, deadline=None)
@given(limited(INDEX))
def test_planarity_at_zero_lateral(angles):
    assert abs(fingertip(INDEX, (0.0,) + tuple(angles[1:]))[1]) <= 1e-12


# --------------------------------------------------------------- coupling

@pytest.mark.parametrize("pip, dip", [(90.0, 60.0), (0.0, 0.0), (110.0, 110.0 * 2 / 3)])
def test_apply_coupling_examples(pip, dip):
    out = apply_coupling(RULE, (1.0, 2.0, pip, 7.0), INDEX)
    assert out[3] == pytest.approx(dip, abs=1e-12)
    assert out[:3] == (1.0, 2.0, pip)
    assert 0.0 <= out[3] <= 90.0


def test_apply_coupling_clamps():
    from tendon_hand.hand_model import CouplingRule

    out = apply_coupling(CouplingRule("index", 2, 3, 1.0), (0, 0, 100, 0), INDEX)
    assert out[3] == 90.0


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 110, allow_nan=False))
def test_coupling_exact(pip):
    out = apply_coupling(RULE, (0, 0, pip, 0), INDEX)
    assert out[3] - RULE.k * pip == 0.0


# --------------------------------------------------------------- IK

def test_ik_zero_pose():
    assert inverse_kinematics(INDEX, (99.5, 0, 0), RULE) == pytest.approx((0, 0, 0, 0), abs=1e-9)


def test_ik_round_trip_example():
    q = (10.0, 40.0, 60.0, 40.0)
    got = inverse_kinematics(INDEX, fingertip(INDEX, q), RULE)
    assert np.allclose(got, q, atol=1e-6)


def test_ik_unreachable():
    with pytest.raises(UnreachableError):
        inverse_kinematics(INDEX, (200, 0, 0), RULE)
    with pytest.raises(UnreachableError):
        inverse_kinematics(INDEX, (10, 80, 0), RULE)  # lateral angle beyond 15°


def test_ik_indeterminate_on_axis():
    with pytest.raises(IndeterminateError, match="indeterminate"):
        inverse_kinematics(INDEX, (0, 0, -50), RULE)


def test_ik_curled_behind_base():
    q = apply_coupling(RULE, (5.0, 90.0, 100.0, 0.0), INDEX)
    p = fingertip(INDEX, q)
    assert p[0] < 0  # tip projects behind the base axis
    got = inverse_kinematics(INDEX, p, RULE)
    assert np.allclose(got, q, atol=1e-6)


@settings(max_examples=300, deadline=None)
@given(limited(INDEX))
def test_ik_round_trip_property(angles):
    q = apply_coupling(RULE, angles, INDEX)
    p = fingertip(INDEX, q)
    assume(math.hypot(p[0], p[1]) > 1.0)
    back = fingertip(INDEX, inverse_kinematics(INDEX, p, RULE))
    assert math.dist(back, p) < 1e-6


# --------------------------------------------------------------- workspace

def test_workspace_corners():
    pts = sample_workspace(INDEX, RULE, 2)
    assert len(pts) == 8
    assert all(np.linalg.norm(p) <= 99.5 + 1e-9 for p in pts)
    # theta1 = 0 is not a grid node; the straight corners sit at +-15 deg
    c, s = 99.5 * math.cos(math.radians(15)), 99.5 * math.sin(math.radians(15))
    assert any(np.allclose(p, (c, -s, 0), atol=1e-9) for p in pts)
    assert any(np.allclose(p, (c, s, 0), atol=1e-9) for p in pts)


def test_workspace_matches_brute_force():
    pts = sample_workspace(INDEX, RULE, 10)
    assert len(pts) == 1000
    axes = [np.linspace(r.theta_min, r.theta_max, 10) for r in INDEX.rows[:3]]
    i = 0
    for t1 in axes[0]:
        for t2 in axes[1]:
            for t3 in axes[2]:
                assert np.allclose(pts[i], scalar_tip(t1, t2, t3, RULE.k * t3), atol=1e-9)
                i += 1


def test_workspace_needs_two_steps():
    with pytest.raises(ValueError):
        sample_workspace(INDEX, RULE, 1)


# --------------------------------------------------------------- Jacobian, numeric IK

def analytic_jacobian(t1, t2, t3, t4):
    t1, t2, t3, t4 = (math.radians(v) for v in (t1, t2, t3, t4))
    s1, c1 = math.sin(t1), math.cos(t1)
    r = A4 * math.cos(t2 + t3 + t4) + A3 * math.cos(t2 + t3) + A2 * math.cos(t2)
    dz = [
        -(A4 * math.cos(t2 + t3 + t4) + A3 * math.cos(t2 + t3) + A2 * math.cos(t2)),
        -(A4 * math.cos(t2 + t3 + t4) + A3 * math.cos(t2 + t3)),
        -A4 * math.cos(t2 + t3 + t4),
    ]
    dr = [
        -(A4 * math.sin(t2 + t3 + t4) + A3 * math.sin(t2 + t3) + A2 * math.sin(t2)),
        -(A4 * math.sin(t2 + t3 + t4) + A3 * math.sin(t2 + t3)),
        -A4 * math.sin(t2 + t3 + t4),
    ]
    J = np.zeros((3, 4))
    J[:, 0] = [-s1 * r, c1 * r, 0.0]
    for j in range(3):
        J[:, j + 1] = [c1 * dr[j], s1 * dr[j], dz[j]]
    return J


@pytest.mark.parametrize("angles", [(0, 0, 0, 0), (10, 30, 60, 40), (-12, 80, 100, 70)])
def test_jacobian_matches_analytic(angles):
    assert np.allclose(jacobian(INDEX, angles), analytic_jacobian(*angles), atol=1e-6)


def test_numeric_ik_thumb_reaches_fk_point():
    thumb = SPEC.thumb_chain
    q = (20.0, 40.0, 5.0, 30.0, 20.0)
    from tendon_hand.kinematics import fingertip_in_hand

    target = fingertip_in_hand(thumb, q)
    angles, res = numeric_ik(thumb, target)
    assert res < 1e-6
    assert np.allclose(fingertip_in_hand(thumb, angles), target, atol=1e-6)
    assert numeric_ik(thumb, target) == (angles, res)  # deterministic
