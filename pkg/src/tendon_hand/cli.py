"""Command-line front end: ``tendon-hand <command> ...``.

Exit codes: 0 ok, 1 a check failed, 2 invalid input, 3 unreachable,
4 singular or indeterminate input, 5 file or parse error.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import List, Optional, Sequence

import numpy as np

from . import actuation, kinematics, posture, tendon
from .errors import HandError, SpecParseError, UnreachableError
from .hand_model import HandSpec, default_hand_spec, load_spec, save_spec, validate_angles

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INVALID, EXIT_UNREACHABLE, EXIT_SINGULAR, EXIT_PARSE = 0, 1, 2, 3, 4, 5

# joint aliases for tendon-profile; the "proximal joint" is the proximal
# interphalangeal joint, the one calibrated to its 0-110 deg excursion
_JOINT_ALIASES = {"proximal": "PIP", "distal": "DIP", "abduction": "MCP_ABD"}


def fmt(v: float) -> str:
    """Fixed 6-decimal rendering; negative zero prints as zero."""
    s = f"{float(v) + 0.0:.6f}"
    return "0.000000" if s == "-0.000000" else s


def _table(header: Sequence[str], rows: List[Sequence[str]], fmt_name: str) -> str:
    if fmt_name == "csv":
        lines = [",".join(header)] + [",".join(r) for r in rows]
        return "\n".join(lines) + "\n"
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(header)]
    out = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    out += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join(out) + "\n"


class CheckFailed(Exception):
    pass


def _load(args) -> HandSpec:
    path = getattr(args, "spec", None)
    if not path:
        return default_hand_spec()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SpecParseError(f"cannot read spec file {path}: {exc.strerror}") from None
    return load_spec(text)


def _universal_coupling(spec: HandSpec, finger: str):
    rules = spec.couplings_for(finger)
    if not rules:
        raise ValueError(f"finger {finger!r} has no coupling rule; coupled IK needs one")
    return rules[0]


# ---------------------------------------------------------------- commands

def cmd_fk(args, spec: HandSpec) -> str:
    chain = spec.chain(args.finger)
    angles = validate_angles(chain, args.deg)
    pose = kinematics.forward_kinematics(chain, angles)
    p, R = pose.position, pose.rotation
    if args.hand_frame:
        p = kinematics.to_hand_frame(chain, p)
        R = np.asarray(chain.base_rotation, dtype=float) @ R
    if args.format == "csv":
        header = ["x", "y", "z"] + [f"r{i}{j}" for i in range(1, 4) for j in range(1, 4)]
        return _table(header, [[fmt(v) for v in list(p) + list(R.ravel())]], "csv")
    lines = [" ".join(fmt(v) for v in p)] + [" ".join(fmt(v) for v in row) for row in R]
    return "\n".join(lines) + "\n"


def cmd_ik(args, spec: HandSpec) -> str:
    chain = spec.chain(args.finger)
    if spec.couplings_for(args.finger):
        angles = kinematics.inverse_kinematics(chain, args.mm, _universal_coupling(spec, args.finger))
    else:
        angles, res = kinematics.numeric_ik(chain, args.mm, hand_frame=False)
        if res > 1e-6:
            raise UnreachableError(f"unreachable: target misses by {res:.6f} mm")
    if args.format == "csv":
        header = [f"theta{i + 1}" for i in range(len(angles))]
        return _table(header, [[fmt(v) for v in angles]], "csv")
    return " ".join(fmt(v) for v in angles) + "\n"


def _resolve_joint(chain, name: str) -> int:
    key = _JOINT_ALIASES.get(name.lower(), name).upper()
    for i, row in enumerate(chain.rows):
        if row.name.upper() == key:
            return i
    names = ", ".join(r.name.lower() for r in chain.rows)
    raise ValueError(f"invalid joint {name!r}: expected one of {names}, proximal, distal, abduction")


def cmd_tendon_profile(args, spec: HandSpec) -> str:
    chain = spec.chain(args.finger)
    j = _resolve_joint(chain, args.joint)
    geom = None
    for route in spec.routes_for(args.finger):
        for c in route.crossings:
            if c.joint == j:
                geom = c.geometry
                break
        if geom is not None:
            break
    if geom is None:
        raise ValueError(f"no tendon crosses {chain.rows[j].name} of {args.finger}")
    row = chain.rows[j]
    rows = tendon.tendon_profile(geom, row.theta_min, row.theta_max, args.step)
    return _table(["theta_deg", "length_mm", "moment_arm_mm"], [[fmt(v) for v in r] for r in rows], args.format)


def cmd_simulate(args, spec: HandSpec) -> str:
    try:
        with open(args.script, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SpecParseError(f"cannot read script {args.script}: {exc.strerror}") from None
    script = actuation.parse_script(text)
    chain = spec.chain(args.finger)
    route = spec.route(args.route or f"{args.finger}_flexor_distal")
    rows = actuation.simulate_script(script, route, spec.motor, chain, dt=args.dt)
    header = ["t"] + [f"theta{i + 1}" for i in range(len(chain.rows))] + ["motor_position", "sma_powered"]
    body = [
        [fmt(r.t)] + [fmt(a) for a in r.angles] + [fmt(r.motor_position), "1" if r.sma_powered else "0"]
        for r in rows
    ]
    return _table(header, body, args.format)


def _check_gestures(args, spec):
    lib = posture.builtin_gesture_library()
    ok = 0
    first = None
    for g in lib:
        v = posture.check_gesture(spec, g)
        if v.feasible:
            ok += 1
        elif first is None:
            first = f"{g.name}: {v.violations[0]}"
    line = f"{ok}/{len(lib)} feasible"
    if first:
        raise CheckFailed(f"{line}; first failure {first}")
    return line + "\n"


def _check_kapandji(args, spec):
    rep = posture.kapandji_score(spec, args.tolerance)
    rows = [
        [str(r.target.index), r.target.description, fmt(r.residual), "yes" if r.reached else "no"]
        for r in rep.results
    ]
    out = _table(["target", "landmark", "residual_mm", "reached"], rows, args.format)
    out += f"Kapandji score {rep.score}/10 at {fmt(args.tolerance)} mm\n"
    if rep.score < args.min_score:
        raise CheckFailed(out + f"score below required {args.min_score}")
    return out


def _check_grasps(args, spec):
    lines = []
    counts = {}
    first = None
    for classes, total in ((posture.schlesinger_classes(spec), 6), (posture.cutkosky_classes(spec), len(posture.CUTKOSKY_NAMES))):
        done = 0
        for cls in classes:
            try:
                res = posture.generate_grasp(spec, cls)
                verdict = posture.check_gesture(spec, res.gesture)
                good = verdict.feasible
                why = verdict.violations[0] if not good else ""
            except HandError as exc:
                good, why, res = False, str(exc), None
            if good and cls.demonstrated:
                done += 1
            elif not good and first is None:
                first = f"{cls.taxonomy} {cls.name}: {why}"
            ap = "-" if res is None or res.aperture is None else fmt(res.aperture)
            lines.append(f"{cls.taxonomy} {cls.name}: {'ok' if good else 'FAIL'} aperture {ap}")
        counts[classes[0].taxonomy] = (done, total)
    s_done, s_total = counts["Schlesinger"]
    c_done, c_total = counts["Cutkosky"]
    summary = f"Schlesinger {s_done}/{s_total} demonstrated (hook untested), Cutkosky {c_done}/{c_total}"
    if args.verbose:
        summary = "\n".join(lines) + "\n" + summary
    if first:
        raise CheckFailed(f"{summary}; first failure {first}")
    return summary + "\n"


def _check_allocation(args, spec):
    rep = actuation.allocation_census(spec)
    if rep.violations:
        raise CheckFailed(str(rep))
    return str(rep) + "\n"


_CHECKS = {
    "gestures": _check_gestures,
    "kapandji": _check_kapandji,
    "grasps": _check_grasps,
    "allocation": _check_allocation,
}


def cmd_check(args, spec: HandSpec) -> str:
    return _CHECKS[args.what](args, spec)


def cmd_sweep(args, spec: HandSpec) -> str:
    """Seeded FK -> IK -> FK round trip over random coupled configurations."""
    chain = spec.chain(args.finger)
    rule = _universal_coupling(spec, args.finger)
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    n = 0
    while n < args.samples:
        q = [rng.uniform(r.theta_min, r.theta_max) for r in chain.rows]
        q = kinematics.apply_coupling(rule, q, chain)
        p = np.asarray(kinematics.fingertip(chain, q))
        if math.hypot(p[0], p[1]) <= 1.0:
            continue
        back = np.asarray(kinematics.fingertip(chain, kinematics.inverse_kinematics(chain, p, rule)))
        worst = max(worst, float(np.linalg.norm(back - p)))
        n += 1
    return f"{n} samples, seed {args.seed}, max round-trip error {worst:.3e} mm\n"


def cmd_spec(args, spec: HandSpec) -> str:
    if args.action == "dump":
        return save_spec(spec)
    return f"spec OK: {spec.dof} DOF, {spec.allocation.total} actuators\n"


# ---------------------------------------------------------------- parser

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--spec", default=argparse.SUPPRESS, help="hand spec JSON (default: built-in)")
    p.add_argument("--format", choices=("csv", "text"), default=argparse.SUPPRESS)
    p.add_argument("--output", "-o", default=argparse.SUPPRESS, help="write to this file instead of stdout")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for randomized sweeps")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="tendon-hand", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fk", parents=[common], help="fingertip position and orientation")
    p.add_argument("--finger", default="index")
    p.add_argument("--deg", type=float, nargs="+", required=True, help="joint angles in degrees")
    p.add_argument("--hand-frame", action="store_true", help="report in the hand frame instead of the finger base")
    p.set_defaults(func=cmd_fk)

    p = sub.add_parser("ik", parents=[common], help="coupled inverse kinematics")
    p.add_argument("--finger", default="index")
    p.add_argument("--mm", type=float, nargs=3, required=True, metavar=("X", "Y", "Z"))
    p.set_defaults(func=cmd_ik)

    p = sub.add_parser("tendon-profile", parents=[common], help="tendon length and moment arm over a joint range")
    p.add_argument("--joint", default="proximal")
    p.add_argument("--finger", default="index")
    p.add_argument("--step", type=float, default=1.0, help="theta step in degrees")
    p.set_defaults(func=cmd_tendon_profile, default_format="csv")

    p = sub.add_parser("simulate", parents=[common], help="run a FLEX/EXTEND/HOLD/RELEASE script")
    p.add_argument("script")
    p.add_argument("--finger", default="index")
    p.add_argument("--route", default=None, help="flexor route (default <finger>_flexor_distal)")
    p.add_argument("--dt", type=float, default=0.1)
    p.set_defaults(func=cmd_simulate, default_format="csv")

    p = sub.add_parser("check", parents=[common], help="feasibility suites")
    p.add_argument("what", choices=sorted(_CHECKS))
    p.add_argument("--tolerance", type=float, default=5.0, help="Kapandji contact tolerance, mm")
    p.add_argument("--min-score", type=int, default=0, help="fail the Kapandji check below this score")
    p.add_argument("--verbose", "-v", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("sweep", parents=[common], help="seeded FK/IK round-trip sweep")
    p.add_argument("--finger", default="index")
    p.add_argument("--samples", type=int, default=1000)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("spec", parents=[common], help="dump or validate the hand spec")
    p.add_argument("action", choices=("dump", "validate"))
    p.set_defaults(func=cmd_spec)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.format = getattr(args, "format", None) or getattr(args, "default_format", "text")
    args.seed = getattr(args, "seed", 0)
    output = getattr(args, "output", None)
    try:
        spec = _load(args)
        text = args.func(args, spec)
    except CheckFailed as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CHECK_FAILED
    except HandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INVALID
    if output:
        try:
            with open(output, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write {output}: {exc.strerror}", file=sys.stderr)
            return EXIT_PARSE
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
