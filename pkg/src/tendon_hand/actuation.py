"""Motor and SMA drive modules, actuator census, and the flex/extend sequencer.

Flexion is pulled by a self-locking screw-nut motor on the flexor tendon;
extension (and side swing) is pulled by a heated SMA module on the extensor
with help from the reset spring.  While flexing the SMA is unpowered; while
extending the motor backs the nut off and the SMA is energised; once the
finger is home the SMA is switched off.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

from . import _roots
from .errors import ScriptSyntaxError, StrokeError, ThermalError
from .hand_model import (
    ActuatorAllocation,
    DHChain,
    HandSpec,
    JointAngles,
    MotorModuleSpec,
    SmaModuleSpec,
    TendonRoute,
    clamp_to_limits,
)
from .tendon import moment_arm, route_excursion

__all__ = [
    "ActuatorAllocation",
    "Command",
    "FingerDriveState",
    "MotorModuleSpec",
    "Phase",
    "SmaModuleSpec",
    "StrokeReport",
    "allocation_census",
    "flexion_path",
    "flexion_trajectory",
    "motor_position_to_angle",
    "parse_script",
    "route_total_excursion",
    "simulate_script",
    "sma_heating_time",
    "step_sequencer",
    "stroke_sufficiency",
]


# ----------------------------------------------------------------------------
# Allocation
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class CensusReport:
    total: int
    sma: int
    motor: int
    violations: Tuple[str, ...]

    @property
    def ok(self) -> bool:
        return (self.total, self.sma, self.motor) == (32, 17, 15) and not self.violations

    def __str__(self):
        status = "OK" if self.ok else "FAIL"
        return f"{self.total} actuators: {self.sma} SMA, {self.motor} motor — {status}"


def allocation_census(spec: HandSpec) -> CensusReport:
    alloc = spec.allocation
    bad = []
    for route in spec.tendon_routes:
        kind = alloc.entries[route.name].kind
        want = "motor" if route.kind == "flexor" else "sma"
        if kind != want:
            bad.append(f"{route.name} ({route.kind}) driven by {kind}, expected {want}")
    return CensusReport(alloc.total, alloc.count("sma"), alloc.count("motor"), tuple(bad))


# ----------------------------------------------------------------------------
# Motor stroke -> joint angles
# ----------------------------------------------------------------------------

def flexion_path(route: TendonRoute, rest: Sequence[float], s: float, chain: DHChain) -> JointAngles:
    """Angles at fraction ``s`` of the way from ``rest`` to full flexion of the crossed joints."""
    out = list(rest)
    for c in route.crossings:
        hi = chain.rows[c.joint].theta_max
        out[c.joint] = rest[c.joint] + s * (hi - rest[c.joint])
    return tuple(out)


def route_total_excursion(route: TendonRoute, rest: Sequence[float], chain: DHChain) -> float:
    return route_excursion(route, rest, flexion_path(route, rest, 1.0, chain))


def motor_position_to_angle(
    route: TendonRoute,
    rest_angles: Sequence[float],
    reel_in: float,
    chain: DHChain,
) -> JointAngles:
    """Invert the route excursion along the proportional flexion path.

    The excursion grows monotonically along the path; its slope with respect
    to the path fraction is the moment-arm-weighted sum of the joint sweeps,
    which is what the Newton polish uses.
    """
    if route.kind != "flexor":
        raise ValueError(f"route {route.name} is a {route.kind}; motor mapping needs a flexor")
    if reel_in < 0:
        raise StrokeError(f"reel-in must be >= 0 (got {reel_in})")
    rest = tuple(float(v) for v in rest_angles)
    if reel_in == 0.0:
        return rest
    total = route_total_excursion(route, rest, chain)
    if reel_in > total + 1e-9:
        raise StrokeError(
            f"reel-in {reel_in:.6f} mm exceeds the available excursion {total:.6f} mm of route {route.name}"
        )
    if reel_in >= total:
        return flexion_path(route, rest, 1.0, chain)

    def f(s):
        return route_excursion(route, rest, flexion_path(route, rest, s, chain)) - reel_in

    def df(s):
        angles = flexion_path(route, rest, s, chain)
        return sum(
            c.sign * moment_arm(c.geometry, angles[c.joint])
            * math.radians(chain.rows[c.joint].theta_max - rest[c.joint])
            for c in route.crossings
        )

    s = _roots.bisect_newton(f, df, 0.0, 1.0, ftol=1e-12, bisect_width=1e-3)
    return flexion_path(route, rest, s, chain)


@dataclass(frozen=True)
class StrokeReport:
    required: float  # mm
    available: float  # mm
    sufficient: bool

    def __str__(self):
        verdict = "sufficient" if self.sufficient else "insufficient"
        return f"required {self.required:.6f} mm, available {self.available:.6f} mm: {verdict}"


def stroke_sufficiency(route: TendonRoute, motor: MotorModuleSpec, chain: DHChain) -> StrokeReport:
    zero = clamp_to_limits(chain, [0.0] * len(chain.rows))
    required = route_total_excursion(route, zero, chain) if route.crossings else 0.0
    return StrokeReport(required, motor.stroke, required <= motor.stroke)


def flexion_trajectory(
    route: TendonRoute,
    motor: MotorModuleSpec,
    rest: Sequence[float],
    dt: float,
    chain: DHChain,
) -> List[Tuple[float, JointAngles]]:
    """Sampled (t, angles) while the motor reels in at its linear speed.

    Stops at whichever comes first, the motor stroke or the route's full
    flexion; the final sample lands exactly on that end time.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    rest = tuple(float(v) for v in rest)
    total = route_total_excursion(route, rest, chain) if route.crossings else 0.0
    travel = min(motor.stroke, total)
    duration = travel / motor.linear_speed
    if duration == 0.0:
        return [(0.0, rest)]
    times = []
    i = 0
    while i * dt < duration - 1e-12:
        times.append(i * dt)
        i += 1
    times.append(duration)
    out = []
    for t in times:
        pos = min(motor.linear_speed * t, travel)
        out.append((t, motor_position_to_angle(route, rest, pos, chain)))
    return out


# ----------------------------------------------------------------------------
# SMA thermal timing
# ----------------------------------------------------------------------------

def _wire_props(spec: SmaModuleSpec):
    d = spec.wire_diameter * 1e-3
    L = spec.wire_length * 1e-3
    mass = spec.density * 1000.0 * math.pi * (d / 2) ** 2 * L  # kg
    resistance = spec.resistance_per_length * L
    area = math.pi * d * L
    return mass, resistance, area


def sma_heating_time(spec: SmaModuleSpec, current: float, ambient: float) -> float:
    """Seconds for a lumped wire to reach the transition temperature.

    Energy balance m c dT/dt = I^2 R - hA (T - T_amb); with h = 0 the time is
    m c dT / (I^2 R).
    """
    if current <= 0:
        raise ValueError("current must be > 0")
    if ambient > spec.transition_temperature:
        raise ValueError("ambient must be below the transition temperature")
    dT = spec.transition_temperature - ambient
    if dT == 0:
        return 0.0
    mass, resistance, area = _wire_props(spec)
    power = current ** 2 * resistance
    heat_cap = mass * spec.specific_heat
    hA = spec.convection_coefficient * area
    if hA == 0:
        return heat_cap * dT / power
    if hA * dT >= power:
        raise ThermalError(
            f"{power:.4g} W cannot hold the wire {dT:g} K above ambient against {hA:.4g} W/K of loss"
        )
    return -heat_cap / hA * math.log(1.0 - hA * dT / power)


def check_sma_command(spec: SmaModuleSpec, displacement: float, force: float = 0.0):
    if not 0 <= displacement <= spec.max_displacement:
        raise ValueError(f"SMA displacement {displacement} mm outside [0, {spec.max_displacement}]")
    if not 0 <= force <= spec.max_force:
        raise ValueError(f"SMA force {force} N outside [0, {spec.max_force}]")


def check_motor_load(motor: MotorModuleSpec, force: float) -> bool:
    """True when the tendon load is within the motor's rated output force."""
    return 0 <= force <= motor.rated_force


# ----------------------------------------------------------------------------
# Sequencer
# ----------------------------------------------------------------------------

class Phase(str, enum.Enum):
    IDLE = "IDLE"
    FLEXING = "FLEXING"
    HOLDING = "HOLDING"
    EXTENDING = "EXTENDING"


class Command(str, enum.Enum):
    FLEX = "FLEX"
    EXTEND = "EXTEND"
    HOLD = "HOLD"
    RELEASE = "RELEASE"


@dataclass(frozen=True)
class FingerDriveState:
    phase: Phase = Phase.IDLE
    motor_position: float = 0.0  # mm of reel-in along the stroke
    sma_powered: bool = False
    elapsed: float = 0.0  # s


_SNAP = 1e-12


def step_sequencer(state: FingerDriveState, command: Command, dt: float, motor: MotorModuleSpec) -> FingerDriveState:
    """Advance one time step under ``command``.

    FLEX: motor reels in (SMA off) until the stroke end, then HOLDING.
    EXTEND: motor backs off with the SMA powered until home, then IDLE, SMA off.
    HOLD: position frozen by the self-locking screw.
    RELEASE: drives de-energised, position frozen, IDLE.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    command = Command(command)
    pos = state.motor_position
    step = motor.linear_speed * dt
    t = state.elapsed + dt

    if command is Command.FLEX:
        pos = min(motor.stroke, pos + step)
        if motor.stroke - pos <= _SNAP:
            pos = motor.stroke
        phase = Phase.HOLDING if pos == motor.stroke else Phase.FLEXING
        return FingerDriveState(phase, pos, False, t)

    if command is Command.EXTEND:
        pos = max(0.0, pos - step)
        if pos <= _SNAP:
            return FingerDriveState(Phase.IDLE, 0.0, False, t)
        return FingerDriveState(Phase.EXTENDING, pos, True, t)

    if command is Command.HOLD:
        return FingerDriveState(Phase.HOLDING if pos > 0 else Phase.IDLE, pos, False, t)

    return FingerDriveState(Phase.IDLE, pos, False, t)


def _settled(state: FingerDriveState, command: Optional[Command], motor: MotorModuleSpec) -> bool:
    if command is Command.FLEX:
        return state.motor_position >= motor.stroke
    if command is Command.EXTEND:
        return state.motor_position <= 0.0 and not state.sma_powered
    return True


def parse_script(text: str) -> List[Tuple[float, Command]]:
    """Parse ``<t> <FLEX|EXTEND|HOLD|RELEASE>`` lines; '#' starts a comment."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ScriptSyntaxError(lineno, f"expected '<t> <command>', got {raw.strip()!r}")
        try:
            t = float(parts[0])
        except ValueError:
            raise ScriptSyntaxError(lineno, f"bad time {parts[0]!r}") from None
        if not math.isfinite(t) or t < 0:
            raise ScriptSyntaxError(lineno, f"time must be finite and >= 0 (got {parts[0]})")
        try:
            cmd = Command(parts[1].upper())
        except ValueError:
            raise ScriptSyntaxError(lineno, f"unknown command {parts[1]!r}") from None
        if out and t < out[-1][0]:
            raise ScriptSyntaxError(lineno, "command times must be non-decreasing")
        out.append((t, cmd))
    if not out:
        raise ScriptSyntaxError(0, "script contains no commands")
    return out


@dataclass(frozen=True)
class TrajectoryRow:
    t: float
    angles: JointAngles
    motor_position: float
    sma_powered: bool
    phase: Phase


def simulate_script(
    script: Sequence[Tuple[float, Command]],
    route: TendonRoute,
    motor: MotorModuleSpec,
    chain: DHChain,
    rest: Optional[Sequence[float]] = None,
    dt: float = 0.1,
) -> List[TrajectoryRow]:
    """Run a command script through the sequencer and map the motor to joint angles.

    Steps are at most ``dt`` long and are shortened to land exactly on command
    times and on the moment the stroke end (or home) is reached.  The run ends
    once the last command has settled.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    rest = clamp_to_limits(chain, rest if rest is not None else [0.0] * len(chain.rows))
    total = route_total_excursion(route, rest, chain) if route.crossings else 0.0

    def row(state):
        reel = min(state.motor_position, total)
        angles = motor_position_to_angle(route, rest, reel, chain) if route.crossings else rest
        return TrajectoryRow(state.elapsed, angles, state.motor_position, state.sma_powered, state.phase)

    state = FingerDriveState()
    rows = [row(state)]
    i = 0
    command = None
    guard = 0
    while True:
        while i < len(script) and script[i][0] <= state.elapsed + 1e-12:
            command = script[i][1]
            i += 1
        next_t = script[i][0] if i < len(script) else None
        if next_t is None and _settled(state, command, motor):
            break
        h = dt
        if next_t is not None:
            h = min(h, next_t - state.elapsed)
        if command is Command.FLEX and state.motor_position < motor.stroke:
            h = min(h, (motor.stroke - state.motor_position) / motor.linear_speed)
        elif command is Command.EXTEND and state.motor_position > 0:
            h = min(h, state.motor_position / motor.linear_speed)
        if h <= 0:
            h = 1e-12
        if command is None:
            state = replace(state, elapsed=state.elapsed + h)
        else:
            state = step_sequencer(state, command, h, motor)
        if next_t is not None and abs(state.elapsed - next_t) < 1e-9:
            state = replace(state, elapsed=next_t)
        rows.append(row(state))
        guard += 1
        if guard > 10_000_000:
            raise RuntimeError("simulation did not settle")
    return rows
