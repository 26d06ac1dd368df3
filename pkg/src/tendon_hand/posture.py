"""Gesture feasibility, the Kapandji opposition score, and grasp generation.

Gestures are per-finger joint-angle targets.  The built-in library
enumerates every extended/flexed combination of the five fingers (2**5 = 32)
and ships as a versioned JSON asset.  Grasp classes follow the Schlesinger
(6) and Cutkosky (16, 9 implemented) taxonomies and are instantiated by a
1-D flexion search (power grasps) or thumb IK onto the opposing finger
(pinches).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from importlib import resources
from typing import List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import _roots
from .errors import GraspError
from .hand_model import FINGER_NAMES, HandSpec, JointAngles, clamp_to_limits, limit_violations
from .kinematics import apply_couplings, fingertip, joint_origins, numeric_ik, to_hand_frame

GESTURE_LIBRARY_VERSION = "1.0"

EXTENDED, FLEXED, HALF, ABDUCTED = "EXTENDED", "FLEXED", "HALF", "ABDUCTED"

COUPLING_TOLERANCE = 0.5  # deg


@dataclass(frozen=True)
class Gesture:
    name: str
    targets: Mapping[str, JointAngles]
    provenance: str = ""


@dataclass(frozen=True)
class GestureVerdict:
    feasible: bool
    violations: Tuple[str, ...] = ()


def _is_lateral(row_name: str) -> bool:
    return "ABD" in row_name.upper()


def finger_state(spec: HandSpec, finger: str, state: str) -> JointAngles:
    """Joint angles for a symbolic finger state, with couplings applied."""
    chain = spec.chain(finger)
    out = []
    for row in chain.rows:
        if _is_lateral(row.name):
            v = 0.0
            if state == ABDUCTED:
                v = row.theta_max if row.theta_max <= 15.0 else 15.0
        elif state == FLEXED:
            v = row.theta_max
        elif state == HALF:
            v = row.midpoint
        elif state in (EXTENDED, ABDUCTED):
            v = 0.0
        else:
            raise ValueError(f"unknown finger state {state!r}")
        out.append(v)
    angles = clamp_to_limits(chain, out)
    return apply_couplings(spec.couplings_for(finger), angles, chain)


def check_gesture(spec: HandSpec, gesture: Gesture) -> GestureVerdict:
    """Feasible iff every angle is in range and every coupled pair is within 0.5°."""
    problems: List[str] = []
    for finger, angles in gesture.targets.items():
        if finger not in spec.fingers:
            raise KeyError(f"gesture {gesture.name!r} references unknown finger {finger!r}")
        chain = spec.fingers[finger]
        for err in limit_violations(chain, angles):
            problems.append(f"{finger}: {err}")
        for rule in spec.couplings_for(finger):
            row = chain.rows[rule.driven_joint]
            expected = min(max(rule.k * angles[rule.driver_joint], row.theta_min), row.theta_max)
            got = angles[rule.driven_joint]
            if abs(got - expected) > COUPLING_TOLERANCE:
                drv = chain.rows[rule.driver_joint].name
                problems.append(
                    f"{finger}: {row.name} = {got:g}° violates coupling with {drv} (expected {expected:g}°)"
                )
    return GestureVerdict(not problems, tuple(problems))


# ----------------------------------------------------------------------------
# 32-gesture library
# ----------------------------------------------------------------------------

_COMMON_NAMES = {
    frozenset(FINGER_NAMES): "open_hand",
    frozenset(): "fist",
    frozenset({"thumb"}): "thumbs_up",
    frozenset({"index"}): "point",
    frozenset({"index", "middle"}): "victory",
    frozenset({"thumb", "index"}): "l_shape",
    frozenset({"thumb", "little"}): "shaka",
    frozenset({"index", "little"}): "horns",
    frozenset({"thumb", "index", "little"}): "love_you",
    frozenset({"index", "middle", "ring"}): "three",
    frozenset({"index", "middle", "ring", "little"}): "four",
    frozenset({"middle", "ring", "little"}): "ok_sign",
}


def gesture_name(extended: Sequence[str]) -> str:
    key = frozenset(extended)
    if key in _COMMON_NAMES:
        return _COMMON_NAMES[key]
    return "extend_" + "_".join(f for f in FINGER_NAMES if f in key)


def symbolic_gesture_library(spec: HandSpec) -> List[Gesture]:
    """Every extended/flexed combination of the five fingers, fist first."""
    out = []
    for bits in itertools.product((FLEXED, EXTENDED), repeat=len(FINGER_NAMES)):
        states = dict(zip(FINGER_NAMES, bits))
        extended = [f for f, s in states.items() if s == EXTENDED]
        targets = {f: finger_state(spec, f, s) for f, s in states.items()}
        out.append(Gesture(gesture_name(extended), targets, "five-finger extended/flexed combination"))
    return out


def gesture_library_to_dict(gestures: Sequence[Gesture]) -> dict:
    return {
        "meta": {"version": GESTURE_LIBRARY_VERSION, "count": len(gestures)},
        "gestures": [
            {"name": g.name, "provenance": g.provenance, "targets": {f: list(a) for f, a in g.targets.items()}}
            for g in gestures
        ],
    }


def load_gesture_library(document: str) -> List[Gesture]:
    doc = json.loads(document)
    if doc.get("meta", {}).get("version") != GESTURE_LIBRARY_VERSION:
        raise ValueError(f"unsupported gesture library version {doc.get('meta', {}).get('version')!r}")
    return [
        Gesture(g["name"], {f: tuple(float(v) for v in a) for f, a in g["targets"].items()}, g.get("provenance", ""))
        for g in doc["gestures"]
    ]


def builtin_gesture_library() -> List[Gesture]:
    text = resources.files("tendon_hand").joinpath("data/gestures.json").read_text()
    return load_gesture_library(text)


# ----------------------------------------------------------------------------
# Kapandji opposition test
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class KapandjiTarget:
    index: int
    description: str
    finger: str
    landmark: str  # "tip", "joint:<i>", "mid:<i>" or "palm"
    posture: Tuple[float, float]  # (MCP, PIP) of the owning finger, deg; DIP follows coupling


# Standard clinical sequence: radial index phalanges, the four fingertips, then
# down the little finger's palmar creases to the distal palmar crease.  The
# owning finger curls toward the thumb as far as the clinical test allows.
KAPANDJI_TARGETS: Tuple[KapandjiTarget, ...] = (
    KapandjiTarget(1, "index proximal phalanx (radial side)", "index", "mid:1", (45.0, 55.0)),
    KapandjiTarget(2, "index middle phalanx (radial side)", "index", "mid:2", (45.0, 55.0)),
    KapandjiTarget(3, "index fingertip", "index", "tip", (45.0, 55.0)),
    KapandjiTarget(4, "middle fingertip", "middle", "tip", (60.0, 100.0)),
    KapandjiTarget(5, "ring fingertip", "ring", "tip", (90.0, 110.0)),
    KapandjiTarget(6, "little fingertip", "little", "tip", (90.0, 90.0)),
    KapandjiTarget(7, "little finger DIP crease", "little", "joint:2", (90.0, 110.0)),
    KapandjiTarget(8, "little finger PIP crease", "little", "joint:1", (0.0, 0.0)),
    KapandjiTarget(9, "little finger MCP crease", "little", "joint:0", (0.0, 0.0)),
    KapandjiTarget(10, "distal palmar crease", "little", "palm", (0.0, 0.0)),
)


def landmark_point(spec: HandSpec, finger: str, landmark: str, angles: Sequence[float]) -> np.ndarray:
    """Hand-frame position of a named landmark on a posed finger."""
    chain = spec.chain(finger)
    origins = joint_origins(chain, angles, check=False)
    base = np.zeros(3)
    if landmark == "tip":
        p = origins[-1]
    elif landmark.startswith("joint:"):
        i = int(landmark.split(":")[1])
        p = origins[i]
    elif landmark.startswith("mid:"):
        i = int(landmark.split(":")[1])
        prev = origins[i - 1] if i > 0 else base
        p = 0.5 * (prev + origins[i])
    elif landmark == "palm":
        # between the ring and little MCPs, 15 mm toward the wrist
        ring = np.asarray(spec.chain("ring").base_position)
        little = np.asarray(chain.base_position)
        return 0.5 * (ring + little) + np.array([-15.0, 0.0, 0.0])
    else:
        raise ValueError(f"unknown landmark {landmark!r}")
    return to_hand_frame(chain, p)


@dataclass(frozen=True)
class KapandjiResult:
    target: KapandjiTarget
    point: Tuple[float, float, float]
    thumb_angles: JointAngles
    residual: float  # mm
    reached: bool


@dataclass(frozen=True)
class KapandjiReport:
    score: int
    results: Tuple[KapandjiResult, ...]
    tolerance: float


def _thumb_ik(spec: HandSpec, point, seeds=()):
    thumb = spec.thumb_chain
    return numeric_ik(thumb, point, hand_frame=True, seeds=list(seeds))


def kapandji_residuals(spec: HandSpec):
    """Per-target thumb-IK residuals (independent of any tolerance)."""
    out = []
    for tgt in KAPANDJI_TARGETS:
        pose = _flex(spec, tgt.finger, *tgt.posture)
        p = landmark_point(spec, tgt.finger, tgt.landmark, pose)
        angles, res = _thumb_ik(spec, p, seeds=_THUMB_SEEDS)
        out.append((tgt, tuple(float(v) for v in p), angles, res))
    return out


def kapandji_score(spec: HandSpec, tolerance: float, residuals=None) -> KapandjiReport:
    """Count of the ten opposition targets the thumb tip reaches within ``tolerance`` mm."""
    if not tolerance >= 0:
        raise ValueError(f"tolerance must be >= 0 mm (got {tolerance})")
    rows = residuals if residuals is not None else kapandji_residuals(spec)
    results = tuple(KapandjiResult(t, p, a, r, r <= tolerance) for t, p, a, r in rows)
    return KapandjiReport(sum(r.reached for r in results), results, tolerance)


# ----------------------------------------------------------------------------
# Grasp taxonomy
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class ObjectPrimitive:
    kind: str  # "cylinder" | "sphere" | "slab" | "none"
    size: float = 0.0  # radius for cylinder/sphere, thickness for slab, mm

    @property
    def diameter(self) -> float:
        if self.kind in ("cylinder", "sphere"):
            return 2.0 * self.size
        if self.kind == "slab":
            return self.size
        return 0.0


@dataclass(frozen=True)
class GraspClass:
    taxonomy: str  # "Schlesinger" | "Cutkosky"
    name: str
    object: ObjectPrimitive
    template: Gesture
    mode: str = "wrap"  # "wrap" | "pinch" | "hook"
    opposing: str = "index"
    landmark: str = "tip"
    demonstrated: bool = True


@dataclass(frozen=True)
class GraspResult:
    grasp: GraspClass
    gesture: Gesture
    aperture: Optional[float]  # mm, thumb tip to opposing landmark
    target_aperture: Optional[float]
    flexion: Mapping[str, float] = field(default_factory=dict)  # path fraction per searched finger

    @property
    def aperture_error(self) -> Optional[float]:
        if self.aperture is None or self.target_aperture is None:
            return None
        return abs(self.aperture - self.target_aperture)


APERTURE_TOLERANCE = 1.0  # mm

# thumb opposed across the palm, used to seed thumb IK
_OPPOSITION_SEED = (45.0, 30.0, 0.0, 20.0, 20.0)
_THUMB_SEEDS = (
    _OPPOSITION_SEED,
    (0.0, 90.0, -15.0, 60.0, 60.0),
    (25.0, 60.0, 0.0, 45.0, 45.0),
    (53.0, 60.0, 0.0, 45.0, 45.0),
    (10.0, 80.0, 10.0, 30.0, 60.0),
    (40.0, 20.0, 0.0, 60.0, 20.0),
)


def _flex(spec, finger, mcp, pip, lateral=0.0):
    chain = spec.chain(finger)
    angles = clamp_to_limits(chain, (lateral, mcp, pip, 0.0))
    return apply_couplings(spec.couplings_for(finger), angles, chain)


def _thumb(spec, *angles):
    return clamp_to_limits(spec.thumb_chain, angles)


def _template(spec, name, thumb, flex: Mapping[str, Tuple[float, float]]) -> Gesture:
    targets = {"thumb": _thumb(spec, *thumb)}
    for f in ("index", "middle", "ring", "little"):
        mcp, pip = flex.get(f, (0.0, 0.0))
        targets[f] = _flex(spec, f, mcp, pip)
    return Gesture(name, targets, "grasp template")


_WRAP_THUMB = (50.0, 20.0, 0.0, 10.0, 10.0)
_PINCH_THUMB = _OPPOSITION_SEED

_ALL4 = ("index", "middle", "ring", "little")


def _wrap(spec, taxonomy, name, obj, mcp=90.0, pip=110.0, fingers=_ALL4, opposing="index", demonstrated=True):
    tmpl = _template(spec, name, _WRAP_THUMB, {f: (mcp, pip) for f in fingers})
    return GraspClass(taxonomy, name, obj, tmpl, "wrap", opposing, "tip", demonstrated)


def _pinch(spec, taxonomy, name, obj, flex, opposing="index", landmark="tip", demonstrated=True):
    tmpl = _template(spec, name, _PINCH_THUMB, flex)
    return GraspClass(taxonomy, name, obj, tmpl, "pinch", opposing, landmark, demonstrated)


def schlesinger_classes(spec: HandSpec) -> List[GraspClass]:
    S = "Schlesinger"
    hook = _template(spec, "hook", (0.0, 0.0, 0.0, 0.0, 0.0), {f: (0.0, 110.0) for f in _ALL4})
    return [
        _wrap(spec, S, "cylindrical", ObjectPrimitive("cylinder", 32.5)),
        _wrap(spec, S, "spherical", ObjectPrimitive("sphere", 35.0), mcp=70.0, pip=80.0),
        _pinch(spec, S, "three_finger_pinch", ObjectPrimitive("none"), {"index": (45.0, 45.0), "middle": (45.0, 45.0)}),
        _pinch(spec, S, "side_pinch", ObjectPrimitive("slab", 3.0),
               {f: (60.0, 80.0) for f in _ALL4}, landmark="mid:2"),
        _pinch(spec, S, "two_finger_pinch", ObjectPrimitive("none"), {"index": (45.0, 45.0)}),
        GraspClass(S, "hook", ObjectPrimitive("none"), hook, "hook", "index", "tip", demonstrated=False),
    ]


# Cutkosky's 16 grasp types; the implemented ones carry a constructor.
CUTKOSKY_NAMES = (
    "large_diameter_heavy_wrap",
    "small_diameter_heavy_wrap",
    "medium_wrap",
    "adducted_thumb",
    "light_tool",
    "thumb_4_finger",
    "thumb_3_finger",
    "thumb_2_finger",
    "thumb_index_finger",
    "power_disk",
    "power_sphere",
    "precision_disk",
    "precision_sphere",
    "tripod",
    "lateral_pinch",
    "hook_platform_push",
)


def cutkosky_classes(spec: HandSpec) -> List[GraspClass]:
    C = "Cutkosky"
    return [
        _wrap(spec, C, "large_diameter_heavy_wrap", ObjectPrimitive("cylinder", 40.0)),
        _wrap(spec, C, "small_diameter_heavy_wrap", ObjectPrimitive("cylinder", 15.0)),
        _wrap(spec, C, "medium_wrap", ObjectPrimitive("cylinder", 27.5)),
        _wrap(spec, C, "power_sphere", ObjectPrimitive("sphere", 35.0), mcp=70.0, pip=80.0),
        _pinch(spec, C, "thumb_4_finger", ObjectPrimitive("slab", 30.0), {f: (40.0, 40.0) for f in _ALL4}),
        _pinch(spec, C, "thumb_3_finger", ObjectPrimitive("slab", 25.0), {f: (40.0, 40.0) for f in _ALL4[:3]}),
        _pinch(spec, C, "thumb_2_finger", ObjectPrimitive("slab", 20.0), {f: (40.0, 40.0) for f in _ALL4[:2]}),
        _pinch(spec, C, "thumb_index_finger", ObjectPrimitive("none"), {"index": (45.0, 45.0)}),
        _pinch(spec, C, "lateral_pinch", ObjectPrimitive("slab", 3.0),
               {f: (60.0, 80.0) for f in _ALL4}, landmark="mid:2"),
    ]


def _scaled(angles, s):
    return tuple(s * v for v in angles)


def _wrap_search(spec, finger, closed, thumb_tip, D):
    """Path fraction s in [0, 1] with |tip(s) - thumb| = D, or None if not bracketed."""
    chain = spec.chain(finger)

    def ap(s):
        return float(np.linalg.norm(to_hand_frame(chain, fingertip(chain, _scaled(closed, s), check=False)) - thumb_tip))

    br = _roots.first_bracket(lambda s: ap(s) - D, 0.0, 1.0, n=200, atol=1e-9)
    if br is None:
        return None, ap
    a, b, fa, _ = br
    s = a if a == b else _roots.bisect(lambda s: ap(s) - D, a, b, fa=fa, xtol=1e-12)
    return s, ap


def generate_grasp(spec: HandSpec, grasp: GraspClass) -> GraspResult:
    """Instantiate a grasp class for its object and report the aperture."""
    D = grasp.object.diameter
    if grasp.object.kind in ("cylinder", "sphere", "slab") and grasp.object.size <= 0:
        raise ValueError("object dimensions must be positive")
    targets = dict(grasp.template.targets)

    if grasp.mode == "hook":
        g = Gesture(grasp.name, targets, f"{grasp.taxonomy} {grasp.name}")
        return GraspResult(grasp, g, None, None, {})

    thumb_chain = spec.thumb_chain

    if grasp.mode == "wrap":
        thumb_tip = to_hand_frame(thumb_chain, fingertip(thumb_chain, targets["thumb"], check=False))
        flexion = {}
        aperture = None
        fingers = [f for f in _ALL4 if any(targets[f])]
        if grasp.opposing not in fingers:
            raise ValueError(f"opposing finger {grasp.opposing} does not take part in {grasp.name}")
        for f in [grasp.opposing] + [f for f in fingers if f != grasp.opposing]:
            closed = targets[f]
            s, ap = _wrap_search(spec, f, closed, thumb_tip, D)
            if f == grasp.opposing:
                if ap(0.0) < D - APERTURE_TOLERANCE:
                    raise GraspError(
                        f"object too large: open aperture {ap(0.0):.2f} mm < diameter {D:.2f} mm"
                    )
                if s is None:
                    raise GraspError(
                        f"object too small: fully flexed aperture {ap(1.0):.2f} mm > diameter {D:.2f} mm"
                    )
                aperture = ap(s)
            if s is None:
                grid = np.linspace(0.0, 1.0, 201)
                s = float(grid[int(np.argmin([abs(ap(v) - D) for v in grid]))])
            flexion[f] = s
            targets[f] = _scaled(closed, s)
        g = Gesture(grasp.name, targets, f"{grasp.taxonomy} {grasp.name}")
        return GraspResult(grasp, g, aperture, D, flexion)

    if grasp.mode == "pinch":
        f = grasp.opposing
        p = landmark_point(spec, f, grasp.landmark, targets[f])
        thumb_tip = to_hand_frame(thumb_chain, fingertip(thumb_chain, targets["thumb"], check=False))
        n = thumb_tip - p
        n = n / np.linalg.norm(n)
        goal = p + D * n
        angles, res = numeric_ik(thumb_chain, goal, hand_frame=True, seeds=[targets["thumb"]])
        tip = to_hand_frame(thumb_chain, fingertip(thumb_chain, angles, check=False))
        aperture = float(np.linalg.norm(tip - p))
        if abs(aperture - D) > APERTURE_TOLERANCE:
            raise GraspError(
                f"thumb cannot close to {D:.2f} mm on the {f} {grasp.landmark} (best {aperture:.2f} mm)"
            )
        targets["thumb"] = angles
        g = Gesture(grasp.name, targets, f"{grasp.taxonomy} {grasp.name}")
        return GraspResult(grasp, g, aperture, D, {})

    raise ValueError(f"unknown grasp mode {grasp.mode!r}")
