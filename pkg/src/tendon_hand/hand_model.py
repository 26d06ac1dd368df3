"""Structural description of the hand and its spec-file round trip.

Everything a simulation needs to know about the hardware lives in one
immutable :class:`HandSpec`: the five D-H chains with their joint limits,
the DIP-PIP coupling rules, tendon routing with per-crossing geometry, and
the actuator modules with their allocation to tendon routes.

Angles are in degrees, lengths in mm, forces in N at every interface.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, Iterable, Mapping, Sequence, Tuple

import jsonschema

from .errors import ArityError, JointLimitError, SpecParseError, SpecValidationError

SPEC_VERSION = "1.0"

FINGER_NAMES = ("thumb", "index", "middle", "ring", "little")
UNIVERSAL_FINGERS = ("index", "middle", "ring", "little")
ROUTE_KINDS = ("flexor", "extensor", "lateral")
ACTUATOR_KINDS = ("sma", "motor")

JointAngles = Tuple[float, ...]

IDENTITY3 = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))


# ----------------------------------------------------------------------------
# Kinematic chains
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class DHRow:
    """One link of a chain: twist about the previous x axis, length, offset, range."""

    name: str
    alpha_prev: float  # deg
    a: float  # mm
    d: float  # mm
    theta_min: float  # deg
    theta_max: float  # deg

    def __post_init__(self):
        if not self.theta_min <= self.theta_max:
            raise SpecValidationError(
                f"joint {self.name}: inverted range theta_min={self.theta_min} > theta_max={self.theta_max}"
            )
        if not (math.isfinite(self.a) and self.a >= 0):
            raise SpecValidationError(f"joint {self.name}: link length a must be finite and >= 0")
        if not math.isfinite(self.d):
            raise SpecValidationError(f"joint {self.name}: link offset d must be finite")
        if not math.isfinite(self.alpha_prev):
            raise SpecValidationError(f"joint {self.name}: twist must be finite")

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.theta_min + self.theta_max)


@dataclass(frozen=True)
class DHChain:
    """Ordered D-H rows of one finger plus its placement on the palm.

    ``base_position`` / ``base_rotation`` map the chain's frame 0 into the
    hand frame; they do not take part in the per-finger kinematics.
    """

    name: str
    rows: Tuple[DHRow, ...]
    base_position: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    base_rotation: Tuple[Tuple[float, ...], ...] = IDENTITY3
    return_spring_torque: float = 5.0  # N*mm, distal-phalanx reset spring

    def __post_init__(self):
        if not self.rows:
            raise SpecValidationError(f"finger {self.name}: chain has no rows")

    def __len__(self):
        return len(self.rows)

    @property
    def joint_names(self) -> Tuple[str, ...]:
        return tuple(r.name for r in self.rows)

    @property
    def reach(self) -> float:
        return sum(r.a for r in self.rows)

    def index_of(self, joint_name: str) -> int:
        for i, r in enumerate(self.rows):
            if r.name.lower() == joint_name.lower():
                return i
        raise KeyError(f"finger {self.name} has no joint {joint_name!r}")


@dataclass(frozen=True)
class CouplingRule:
    """``theta[driven] = k * theta[driver]`` on one finger."""

    finger: str
    driver_joint: int
    driven_joint: int
    k: float = 2.0 / 3.0

    def __post_init__(self):
        if self.driver_joint == self.driven_joint:
            raise SpecValidationError(
                f"coupling on {self.finger}: driven joint must differ from driver joint"
            )


# ----------------------------------------------------------------------------
# Tendons
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class JointTendonGeometry:
    """Law-of-cosines construction of a tendon passing one joint (mm).

    ``L1``/``L2`` are the chords from the joint centre to the two guide
    holes, ``d``/``R`` the hole offsets and radii that fix the angular
    offset of each chord.
    """

    L1: float
    L2: float
    d1: float
    d2: float
    R1: float
    R2: float

    def __post_init__(self):
        for k in ("L1", "L2", "d1", "d2", "R1", "R2"):
            v = getattr(self, k)
            if not (math.isfinite(v) and v > 0):
                raise SpecValidationError(f"tendon geometry {k} must be > 0 (got {v})")

    @property
    def offset(self) -> float:
        """Fixed angular offset atan(d2/R2) + atan(d1/R1), radians."""
        return math.atan(self.d2 / self.R2) + math.atan(self.d1 / self.R1)

    def scaled(self, s: float) -> "JointTendonGeometry":
        return JointTendonGeometry(self.L1 * s, self.L2 * s, self.d1, self.d2, self.R1, self.R2)


@dataclass(frozen=True)
class Crossing:
    joint: int
    geometry: JointTendonGeometry
    sign: int = 1
    efficiency: float = 1.0  # multiplicative tension loss at guide holes

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise SpecValidationError(f"crossing sign must be +1 or -1 (got {self.sign})")
        if not 0 < self.efficiency <= 1:
            raise SpecValidationError(f"crossing efficiency must be in (0, 1] (got {self.efficiency})")


@dataclass(frozen=True)
class TendonMaterial:
    description: str = "12-braid fishing line"
    diameter: float = 0.55  # mm
    nominal_pull_kgf: float = 40.0


@dataclass(frozen=True)
class TendonRoute:
    name: str
    kind: str
    finger: str
    crossings: Tuple[Crossing, ...]
    actuator: str
    material: TendonMaterial = field(default_factory=TendonMaterial)

    def __post_init__(self):
        if self.kind not in ROUTE_KINDS:
            raise SpecValidationError(f"route {self.name}: unknown kind {self.kind!r}")

    @property
    def joints(self) -> Tuple[int, ...]:
        return tuple(c.joint for c in self.crossings)


# ----------------------------------------------------------------------------
# Actuators
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class MotorModuleSpec:
    """Screw-nut DC motor linear module."""

    rated_voltage: float = 12.0  # V
    rated_current: float = 0.18  # A
    rated_speed: float = 100.0  # RPM
    rated_torque: float = 1.5  # kg*cm
    screw_pitch: float = 0.7  # mm
    stroke: float = 20.0  # mm
    rated_force: float = 400.0  # N
    linear_speed: float = 1.17  # mm/s
    mass: float = 40.0  # g

    def __post_init__(self):
        if self.stroke <= 0 or self.linear_speed <= 0:
            raise SpecValidationError("motor stroke and linear speed must be positive")

    @property
    def nominal_linear_speed(self) -> float:
        """Screw advance implied by speed and pitch, mm/s."""
        return self.rated_speed * self.screw_pitch / 60.0


@dataclass(frozen=True)
class SmaModuleSpec:
    """Ni-Ti wire linear module; wire and thermal-loss values are configurable."""

    max_displacement: float = 18.0  # mm
    max_force: float = 784.0  # N
    transition_temperature: float = 90.0  # degC
    density: float = 6.45  # g/cm^3
    specific_heat: float = 837.0  # J/(kg K)
    thermal_conductivity: float = 18.0  # W/(m K)
    wire_diameter: float = 0.31  # mm
    wire_length: float = 225.0  # mm
    resistance_per_length: float = 12.2  # ohm/m
    convection_coefficient: float = 0.0  # W/(m^2 K)


@dataclass(frozen=True)
class ActuatorUnit:
    id: str
    kind: str

    def __post_init__(self):
        if self.kind not in ACTUATOR_KINDS:
            raise SpecValidationError(f"actuator {self.id}: unknown kind {self.kind!r}")


@dataclass(frozen=True)
class AllocationEntry:
    actuator: str
    kind: str


@dataclass(frozen=True)
class ActuatorAllocation:
    """Tendon route name -> actuator unit driving it."""

    entries: Mapping[str, AllocationEntry]

    def count(self, kind=None) -> int:
        ids = {e.actuator for e in self.entries.values() if kind is None or e.kind == kind}
        return len(ids)

    @property
    def total(self) -> int:
        return self.count()


@dataclass(frozen=True)
class HandSpec:
    fingers: Mapping[str, DHChain]
    couplings: Tuple[CouplingRule, ...]
    tendon_routes: Tuple[TendonRoute, ...]
    motor: MotorModuleSpec
    sma: SmaModuleSpec
    actuator_units: Tuple[ActuatorUnit, ...]
    version: str = SPEC_VERSION
    notes: Tuple[str, ...] = ()

    @property
    def thumb_chain(self) -> DHChain:
        return self.fingers["thumb"]

    @property
    def dof(self) -> int:
        return sum(len(c) for c in self.fingers.values())

    @property
    def allocation(self) -> ActuatorAllocation:
        kinds = {u.id: u.kind for u in self.actuator_units}
        return ActuatorAllocation(
            {r.name: AllocationEntry(r.actuator, kinds.get(r.actuator, "?")) for r in self.tendon_routes}
        )

    def chain(self, finger: str) -> DHChain:
        try:
            return self.fingers[finger]
        except KeyError:
            raise KeyError(f"unknown finger {finger!r}; expected one of {sorted(self.fingers)}") from None

    def couplings_for(self, finger: str) -> Tuple[CouplingRule, ...]:
        return tuple(c for c in self.couplings if c.finger == finger)

    def routes_for(self, finger: str, kind=None) -> Tuple[TendonRoute, ...]:
        return tuple(
            r for r in self.tendon_routes if r.finger == finger and (kind is None or r.kind == kind)
        )

    def route(self, name: str) -> TendonRoute:
        for r in self.tendon_routes:
            if r.name == name:
                return r
        raise KeyError(f"unknown tendon route {name!r}")


# ----------------------------------------------------------------------------
# Joint limits
# ----------------------------------------------------------------------------

def _check_arity(chain: DHChain, angles: Sequence[float]):
    if len(angles) != len(chain.rows):
        raise ArityError(
            f"finger {chain.name} has {len(chain.rows)} joints, got {len(angles)} angles"
        )


def clamp_to_limits(chain: DHChain, angles: Sequence[float]) -> JointAngles:
    """Clamp each angle into its row's range; in-range values pass through untouched."""
    _check_arity(chain, angles)
    out = []
    for row, v in zip(chain.rows, angles):
        v = float(v)
        if v < row.theta_min:
            v = row.theta_min
        elif v > row.theta_max:
            v = row.theta_max
        out.append(v)
    return tuple(out)


def validate_angles(chain: DHChain, angles: Sequence[float], tol: float = 0.0) -> JointAngles:
    """Raise :class:`JointLimitError` naming the first joint outside its range."""
    _check_arity(chain, angles)
    for row, v in zip(chain.rows, angles):
        if not math.isfinite(v):
            raise JointLimitError(row.name, v, row.theta_max, "max")
        if v > row.theta_max + tol:
            raise JointLimitError(row.name, v, row.theta_max, "max")
        if v < row.theta_min - tol:
            raise JointLimitError(row.name, v, row.theta_min, "min")
    return tuple(float(v) for v in angles)


def limit_violations(chain: DHChain, angles: Sequence[float], tol: float = 0.0):
    """All out-of-range joints as JointLimitError instances (not raised)."""
    _check_arity(chain, angles)
    found = []
    for row, v in zip(chain.rows, angles):
        if v > row.theta_max + tol:
            found.append(JointLimitError(row.name, v, row.theta_max, "max"))
        elif v < row.theta_min - tol:
            found.append(JointLimitError(row.name, v, row.theta_min, "min"))
    return found


# ----------------------------------------------------------------------------
# Built-in hand
# ----------------------------------------------------------------------------

# Tendon template geometry before calibration against the measured excursion.
TENDON_TEMPLATE = JointTendonGeometry(L1=12.0, L2=12.0, d1=2.0, d2=2.0, R1=6.0, R2=6.0)
CALIBRATION_EXCURSION = 16.86  # mm over the PIP range
CALIBRATION_RANGE = (0.0, 110.0)

_ASSUMPTION_NOTES = (
    "thumb link lengths (0, 40, 0, 32, 25) mm and MCP/IP ranges are assumed defaults",
    "thumb MCP abduction row added so the hand totals 21 DOF",
    "little finger proximal phalanx length 38 mm is an assumed default",
    "finger base positions and the thumb base rotation are assumed defaults; "
    "finger base rotations are identity (palm concavity unquantified)",
    "tendon geometry is the template (L=12, d=2, R=6 mm) scaled to a 16.86 mm PIP excursion",
    "each flexor crosses every joint proximal to its insertion (assumption)",
    "per-route actuator table is a reconstruction consistent with 17 SMA + 15 motor",
    "SMA wire diameter, length, resistance and convection coefficient are assumed defaults",
    "motor/SMA allocation: hardware integrates 12 SMA modules in the arm, totals follow 17/15",
)


def universal_rows(proximal_length: float = 47.0) -> Tuple[DHRow, ...]:
    return (
        DHRow("MCP_ABD", 0.0, 0.0, 0.0, -15.0, 15.0),
        DHRow("MCP", 90.0, proximal_length, 0.0, 0.0, 90.0),
        DHRow("PIP", 0.0, 29.0, 0.0, 0.0, 110.0),
        DHRow("DIP", 0.0, 23.5, 0.0, 0.0, 90.0),
    )


def thumb_rows(lengths=(0.0, 40.0, 0.0, 32.0, 25.0)) -> Tuple[DHRow, ...]:
    return (
        DHRow("CMC_ABD", 0.0, lengths[0], 0.0, 0.0, 53.0),
        DHRow("CMC", 90.0, lengths[1], 0.0, 0.0, 107.0),
        DHRow("MCP_ABD", -90.0, lengths[2], 0.0, -15.0, 15.0),
        DHRow("MCP", 90.0, lengths[3], 0.0, 0.0, 90.0),
        DHRow("IP", 0.0, lengths[4], 0.0, 0.0, 90.0),
    )


def _rotation_from_axes(x_axis, y_hint):
    x = _unit(x_axis)
    z = _unit(_cross(x, y_hint))
    y = _cross(z, x)
    return tuple(tuple(float(round(v, 12)) for v in row) for row in zip(x, y, z))


def _unit(v):
    n = math.sqrt(sum(c * c for c in v))
    return tuple(c / n for c in v)


def _cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


# Hand frame: +x distal along the extended fingers, +y toward the thumb side,
# flexion curls the fingers toward -z (palm side).
_BASES = {
    "index": (0.0, 27.0, 0.0),
    "middle": (2.0, 7.0, 0.0),
    "ring": (0.0, -13.0, 0.0),
    "little": (-6.0, -31.0, 0.0),
}
_THUMB_BASE = (-42.0, 22.0, -14.0)
_THUMB_ROTATION = _rotation_from_axes((0.55, 0.835, 0.0), (0.0, 0.0, -1.0))


def _universal_routes(finger: str, geom: JointTendonGeometry):
    def cr(joints, sign):
        return tuple(Crossing(j, geom, sign) for j in joints)

    f = finger
    return (
        TendonRoute(f"{f}_flexor_proximal", "flexor", f, cr((1,), 1), f"{f}_motor_1"),
        TendonRoute(f"{f}_flexor_middle", "flexor", f, cr((1, 2), 1), f"{f}_motor_2"),
        TendonRoute(f"{f}_flexor_distal", "flexor", f, cr((1, 2, 3), 1), f"{f}_motor_3"),
        TendonRoute(f"{f}_extensor_proximal", "extensor", f, cr((1,), -1), f"{f}_sma_1"),
        TendonRoute(f"{f}_extensor_middle", "extensor", f, cr((1, 2), -1), f"{f}_sma_2"),
        TendonRoute(f"{f}_lateral_radial", "lateral", f, cr((0,), 1), f"{f}_sma_3"),
        TendonRoute(f"{f}_lateral_ulnar", "lateral", f, cr((0,), -1), f"{f}_sma_3"),
    )


def _thumb_routes(geom: JointTendonGeometry):
    def cr(joints, sign):
        return tuple(Crossing(j, geom, sign) for j in joints)

    return (
        TendonRoute("thumb_flexor_metacarpal", "flexor", "thumb", cr((1,), 1), "thumb_motor_1"),
        TendonRoute("thumb_flexor_proximal", "flexor", "thumb", cr((1, 3), 1), "thumb_motor_2"),
        TendonRoute("thumb_flexor_distal", "flexor", "thumb", cr((1, 3, 4), 1), "thumb_motor_3"),
        TendonRoute("thumb_extensor_metacarpal", "extensor", "thumb", cr((1,), -1), "thumb_sma_1"),
        TendonRoute("thumb_extensor_proximal", "extensor", "thumb", cr((1, 3), -1), "thumb_sma_2"),
        TendonRoute("thumb_lateral_abductor", "lateral", "thumb", cr((0,), 1), "thumb_sma_3"),
        TendonRoute("thumb_lateral_adductor", "lateral", "thumb", cr((0,), -1), "thumb_sma_4"),
        TendonRoute("thumb_lateral_mcp_radial", "lateral", "thumb", cr((2,), 1), "thumb_sma_5"),
        TendonRoute("thumb_lateral_mcp_ulnar", "lateral", "thumb", cr((2,), -1), "thumb_sma_5"),
    )


def default_hand_spec() -> HandSpec:
    """The built-in hand: four universal fingers, split-CMC thumb, 32 actuators."""
    from .tendon import calibrate_geometry

    geom = calibrate_geometry(CALIBRATION_EXCURSION, CALIBRATION_RANGE, TENDON_TEMPLATE)

    fingers: Dict[str, DHChain] = {
        "thumb": DHChain("thumb", thumb_rows(), _THUMB_BASE, _THUMB_ROTATION),
    }
    for f in UNIVERSAL_FINGERS:
        rows = universal_rows(38.0 if f == "little" else 47.0)
        fingers[f] = DHChain(f, rows, _BASES[f])

    couplings = tuple(CouplingRule(f, 2, 3, 2.0 / 3.0) for f in UNIVERSAL_FINGERS)

    routes = _thumb_routes(geom)
    for f in UNIVERSAL_FINGERS:
        routes += _universal_routes(f, geom)

    units = []
    seen = set()
    for r in routes:
        if r.actuator not in seen:
            seen.add(r.actuator)
            units.append(ActuatorUnit(r.actuator, "motor" if r.kind == "flexor" else "sma"))

    return HandSpec(
        fingers=fingers,
        couplings=couplings,
        tendon_routes=routes,
        motor=MotorModuleSpec(),
        sma=SmaModuleSpec(),
        actuator_units=tuple(units),
        version=SPEC_VERSION,
        notes=_ASSUMPTION_NOTES,
    )


# ----------------------------------------------------------------------------
# Validation
# ----------------------------------------------------------------------------

def validate_spec(spec: HandSpec) -> HandSpec:
    """Check the cross-object invariants; raises SpecValidationError."""
    from .tendon import check_geometry_range

    names = set(spec.fingers)
    if len(names) != 5:
        raise SpecValidationError(f"expected 5 fingers, got {len(names)}: {sorted(names)}")
    if names != set(FINGER_NAMES):
        raise SpecValidationError(f"expected fingers {list(FINGER_NAMES)}, got {sorted(names)}")

    for f in UNIVERSAL_FINGERS:
        if len(spec.fingers[f]) != 4:
            raise SpecValidationError(f"finger {f}: expected 4 joints, got {len(spec.fingers[f])}")
    idx = spec.fingers["index"].rows
    for f in ("middle", "ring"):
        if spec.fingers[f].rows != idx:
            raise SpecValidationError(f"finger {f}: chain must match the index finger chain")

    thumb = spec.thumb_chain
    if thumb.rows[0].theta_min != 0.0 or thumb.rows[0].theta_max != 53.0:
        raise SpecValidationError("thumb abduction range must be 0-53°")
    if len(thumb) < 2 or thumb.rows[1].theta_min != 0.0 or thumb.rows[1].theta_max != 107.0:
        raise SpecValidationError("thumb flexion range must be 0-107°")

    if spec.dof != 21:
        raise SpecValidationError(f"expected 21 DOF in total, got {spec.dof}")

    for c in spec.couplings:
        if c.finger not in spec.fingers:
            raise SpecValidationError(f"coupling references unknown finger {c.finger!r}")
        n = len(spec.fingers[c.finger])
        if not (0 <= c.driver_joint < n and 0 <= c.driven_joint < n):
            raise SpecValidationError(f"coupling on {c.finger}: joint index out of range")

    unit_kinds = {}
    for u in spec.actuator_units:
        if u.id in unit_kinds:
            raise SpecValidationError(f"duplicate actuator id {u.id!r}")
        unit_kinds[u.id] = u.kind

    route_names = set()
    for r in spec.tendon_routes:
        if r.name in route_names:
            raise SpecValidationError(f"duplicate tendon route {r.name!r}")
        route_names.add(r.name)
        if r.finger not in spec.fingers:
            raise SpecValidationError(f"route {r.name}: unknown finger {r.finger!r}")
        chain = spec.fingers[r.finger]
        for c in r.crossings:
            if not 0 <= c.joint < len(chain):
                raise SpecValidationError(f"route {r.name}: joint index {c.joint} out of range")
            row = chain.rows[c.joint]
            try:
                check_geometry_range(c.geometry, row.theta_min, row.theta_max)
            except ValueError as exc:
                raise SpecValidationError(f"route {r.name} at {row.name}: {exc}") from None
        if r.actuator not in unit_kinds:
            raise SpecValidationError(f"route {r.name}: unknown actuator {r.actuator!r}")
        want = "motor" if r.kind == "flexor" else "sma"
        if unit_kinds[r.actuator] != want:
            raise SpecValidationError(f"route {r.name}: {r.kind} routes must be driven by {want}")

    for f in UNIVERSAL_FINGERS:
        kinds = [r.kind for r in spec.routes_for(f)]
        counts = tuple(kinds.count(k) for k in ROUTE_KINDS)
        if counts != (3, 2, 2):
            raise SpecValidationError(
                f"finger {f}: expected 7 routes (3 flexor, 2 extensor, 2 lateral), got {counts}"
            )
    for f in FINGER_NAMES:
        _check_lateral_pairs(f, spec.routes_for(f, "lateral"))

    used = {r.actuator for r in spec.tendon_routes}
    unused = sorted(set(unit_kinds) - used)
    if unused:
        raise SpecValidationError(f"actuators not driving any route: {unused}")
    alloc = spec.allocation
    n_sma, n_motor = alloc.count("sma"), alloc.count("motor")
    if (alloc.total, n_sma, n_motor) != (32, 17, 15):
        raise SpecValidationError(
            f"expected 32 actuators (17 SMA, 15 motor), got {alloc.total} ({n_sma} SMA, {n_motor} motor)"
        )
    return spec


def _check_lateral_pairs(finger, laterals: Iterable[TendonRoute]):
    by_joint: Dict[int, list] = {}
    for r in laterals:
        for c in r.crossings:
            by_joint.setdefault(c.joint, []).append(c.sign)
    for joint, signs in by_joint.items():
        if signs.count(1) != signs.count(-1):
            raise SpecValidationError(
                f"finger {finger}: lateral routes on joint {joint} must come in antagonistic pairs"
            )


# ----------------------------------------------------------------------------
# Spec file (JSON)
# ----------------------------------------------------------------------------

def _schema():
    text = resources.files("tendon_hand").joinpath("data/hand_spec.schema.json").read_text()
    return json.loads(text)


def spec_to_dict(spec: HandSpec) -> dict:
    def row(r: DHRow):
        return {
            "name": r.name, "alpha_prev": r.alpha_prev, "a": r.a, "d": r.d,
            "theta_min": r.theta_min, "theta_max": r.theta_max,
        }

    def geom(g: JointTendonGeometry):
        return {k: getattr(g, k) for k in ("L1", "L2", "d1", "d2", "R1", "R2")}

    return {
        "meta": {"version": spec.version, "notes": list(spec.notes)},
        "fingers": {
            name: {
                "rows": [row(r) for r in c.rows],
                "base": {
                    "position": list(c.base_position),
                    "rotation": [list(r) for r in c.base_rotation],
                },
                "return_spring_torque": c.return_spring_torque,
            }
            for name, c in spec.fingers.items()
        },
        "couplings": [
            {"finger": c.finger, "driver": c.driver_joint, "driven": c.driven_joint, "k": c.k}
            for c in spec.couplings
        ],
        "tendon_routes": [
            {
                "name": r.name,
                "kind": r.kind,
                "finger": r.finger,
                "actuator": r.actuator,
                "material": {
                    "description": r.material.description,
                    "diameter": r.material.diameter,
                    "nominal_pull_kgf": r.material.nominal_pull_kgf,
                },
                "crossings": [
                    {"joint": c.joint, "sign": c.sign, "efficiency": c.efficiency, "geometry": geom(c.geometry)}
                    for c in r.crossings
                ],
            }
            for r in spec.tendon_routes
        ],
        "actuators": {
            "motor": dict(spec.motor.__dict__),
            "sma": dict(spec.sma.__dict__),
            "units": [{"id": u.id, "kind": u.kind} for u in spec.actuator_units],
        },
    }


def save_spec(spec: HandSpec) -> str:
    """Serialise to the JSON spec-file format (stable key order, 2-space indent)."""
    return json.dumps(spec_to_dict(spec), indent=2) + "\n"


def spec_from_dict(doc: dict) -> HandSpec:
    try:
        jsonschema.validate(doc, _schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SpecValidationError(f"schema violation at {where}: {exc.message}") from None

    if len(doc["fingers"]) != 5:
        raise SpecValidationError(f"expected 5 fingers, got {len(doc['fingers'])}")

    fingers = {}
    for name, f in doc["fingers"].items():
        rows = tuple(DHRow(**r) for r in f["rows"])
        base = f.get("base", {})
        fingers[name] = DHChain(
            name,
            rows,
            tuple(float(v) for v in base.get("position", (0.0, 0.0, 0.0))),
            tuple(tuple(float(v) for v in r) for r in base.get("rotation", IDENTITY3)),
            float(f.get("return_spring_torque", 5.0)),
        )

    couplings = tuple(
        CouplingRule(c["finger"], c["driver"], c["driven"], c.get("k", 2.0 / 3.0)) for c in doc["couplings"]
    )
    routes = tuple(
        TendonRoute(
            name=r["name"],
            kind=r["kind"],
            finger=r["finger"],
            crossings=tuple(
                Crossing(c["joint"], JointTendonGeometry(**c["geometry"]), c.get("sign", 1), c.get("efficiency", 1.0))
                for c in r["crossings"]
            ),
            actuator=r["actuator"],
            material=TendonMaterial(**r.get("material", {})),
        )
        for r in doc["tendon_routes"]
    )
    act = doc["actuators"]
    spec = HandSpec(
        fingers=fingers,
        couplings=couplings,
        tendon_routes=routes,
        motor=MotorModuleSpec(**act.get("motor", {})),
        sma=SmaModuleSpec(**act.get("sma", {})),
        actuator_units=tuple(ActuatorUnit(u["id"], u["kind"]) for u in act["units"]),
        version=doc["meta"]["version"],
        notes=tuple(doc["meta"].get("notes", ())),
    )
    return validate_spec(spec)


def load_spec(document: str) -> HandSpec:
    """Parse and validate a JSON spec document."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"malformed spec document: {exc}") from None
    if not isinstance(doc, dict):
        raise SpecParseError("spec document must be a JSON object")
    try:
        return spec_from_dict(doc)
    except TypeError as exc:
        raise SpecValidationError(str(exc)) from None
