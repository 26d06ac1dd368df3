import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from tendon_hand.cli import fmt, main
from tendon_hand.hand_model import default_hand_spec, save_spec, spec_to_dict

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_fmt():
    assert fmt(-0.0) == "0.000000"
    assert fmt(-1e-9) == "0.000000"
    assert fmt(99.5) == "99.500000"
    assert fmt(-74.2111064) == "-74.211106"


def test_fk_zero(capsys):
    code, out, _ = run(capsys, "fk", "--finger", "index", "--deg", "0", "0", "0", "0")
    assert code == 0
    assert out.splitlines()[0] == "99.500000 0.000000 0.000000"
    assert len(out.splitlines()) == 4


def test_fk_mcp_ninety(capsys):
    _, out, _ = run(capsys, "fk", "--deg", "0", "90", "0", "0")
    assert out.splitlines()[0] == "0.000000 0.000000 -99.500000"


def test_fk_matches_scalar(capsys):
    _, out, _ = run(capsys, "fk", "--deg", "15", "30", "45", "30")
    t1, t2, t3, t4 = (math.radians(v) for v in (15, 30, 45, 30))
    r = 23.5 * math.cos(t2 + t3 + t4) + 29 * math.cos(t2 + t3) + 47 * math.cos(t2)
    z = -(23.5 * math.sin(t2 + t3 + t4) + 29 * math.sin(t2 + t3) + 47 * math.sin(t2))
    assert out.splitlines()[0] == " ".join(fmt(v) for v in (r * math.cos(t1), r * math.sin(t1), z))
    assert out == (GOLDEN / "fk_15_30_45_30.txt").read_text()


def test_fk_csv(capsys):
    _, out, _ = run(capsys, "fk", "--deg", "0", "0", "0", "0", "--format", "csv")
    header, row = out.splitlines()
    assert header.startswith("x,y,z,r11")
    assert row.startswith("99.500000,0.000000,0.000000,1.000000")


def test_fk_limit_exit_2(capsys):
    code, _, err = run(capsys, "fk", "--deg", "0", "0", "120", "0")
    assert code == 2
    assert "PIP exceeds 110°" in err


def test_fk_arity_exit_2(capsys):
    code, _, _ = run(capsys, "fk", "--deg", "0", "0", "0")
    assert code == 2


def test_ik_zero(capsys):
    code, out, _ = run(capsys, "ik", "--finger", "index", "--mm", "99.5", "0", "0")
    assert code == 0
    assert out == "0.000000 0.000000 0.000000 0.000000\n"


def test_ik_round_trip(capsys):
    _, out, _ = run(capsys, "fk", "--deg", "10", "40", "60", "40")
    xyz = out.splitlines()[0].split()
    _, out, _ = run(capsys, "ik", "--mm", *xyz)
    assert [float(v) for v in out.split()] == pytest.approx([10, 40, 60, 40], abs=1e-4)


def test_ik_exit_codes(capsys):
    assert run(capsys, "ik", "--mm", "200", "0", "0")[0] == 3
    code, _, err = run(capsys, "ik", "--mm", "0", "0", "50")
    assert code == 4
    assert "lateral angle indeterminate" in err


def test_ik_thumb_numeric(capsys):
    from tendon_hand.kinematics import fingertip

    p = fingertip(default_hand_spec().thumb_chain, (10, 30, 0, 20, 10))
    code, out, _ = run(capsys, "ik", "--finger", "thumb", "--mm", *(repr(v) for v in p))
    assert code == 0
    assert len(out.split()) == 5


def test_tendon_profile_golden(capsys):
    code, out, _ = run(capsys, "tendon-profile", "--joint", "proximal", "--step", "1")
    assert code == 0
    assert out == (GOLDEN / "profile_pip.csv").read_text()
    rows = [list(map(float, line.split(","))) for line in out.splitlines()[1:]]
    assert rows[-1][1] - rows[0][1] == pytest.approx(-16.86, abs=0.05)
    h = [r[2] for r in rows if r[0] <= 90]
    assert all(b > a for a, b in zip(h, h[1:]))


def test_tendon_profile_coarse_and_aliases(capsys):
    _, out, _ = run(capsys, "tendon-profile", "--step", "500")
    assert len(out.splitlines()) == 3
    _, a, _ = run(capsys, "tendon-profile", "--joint", "pip")
    _, b, _ = run(capsys, "tendon-profile", "--joint", "proximal")
    assert a == b
    code, _, _ = run(capsys, "tendon-profile", "--joint", "wrist")
    assert code == 2
    assert run(capsys, "tendon-profile", "--step", "0")[0] == 2


def test_tendon_profile_text(capsys):
    _, out, _ = run(capsys, "tendon-profile", "--format", "text", "--step", "55")
    assert out.splitlines()[0].split() == ["theta_deg", "length_mm", "moment_arm_mm"]


def test_simulate_golden(capsys):
    code, out, _ = run(capsys, "simulate", str(GOLDEN / "flex_extend.script"))
    assert code == 0
    assert out == (GOLDEN / "flex_extend.csv").read_text()
    lines = out.splitlines()
    assert lines[0] == "t,theta1,theta2,theta3,theta4,motor_position,sma_powered"
    rows = [line.split(",") for line in lines[1:]]
    for r in rows:
        if r[-1] == "1":
            assert float(r[0]) > 20.0
    flex = [r for r in rows if float(r[0]) <= 20 / 1.17]
    assert flex[-1][5] == "20.000000"
    assert float(flex[-1][0]) == pytest.approx(17.09, abs=0.01)


def test_simulate_bad_script(tmp_path, capsys):
    script = tmp_path / "bad.txt"
    script.write_text("0 FLEX\n3 SPIN\n")
    code, _, err = run(capsys, "simulate", str(script))
    assert code == 5
    assert "line 2" in err
    assert run(capsys, "simulate", str(tmp_path / "missing.txt"))[0] == 5


def test_check_allocation(capsys):
    code, out, _ = run(capsys, "check", "allocation")
    assert (code, out) == (0, "32 actuators: 17 SMA, 15 motor — OK\n")


def test_check_gestures(capsys):
    code, out, _ = run(capsys, "check", "gestures")
    assert (code, out) == (0, "32/32 feasible\n")


def test_check_grasps(capsys):
    code, out, _ = run(capsys, "check", "grasps")
    assert (code, out) == (0, "Schlesinger 5/6 demonstrated (hook untested), Cutkosky 9/16\n")


def test_check_kapandji(capsys):
    code, out, _ = run(capsys, "check", "kapandji", "--tolerance", "5")
    assert code == 0
    assert "Kapandji score" in out.splitlines()[-1]
    assert run(capsys, "check", "kapandji", "--min-score", "11")[0] == 1


def test_check_allocation_failure_named(tmp_path, capsys):
    doc = spec_to_dict(default_hand_spec())
    doc["actuators"]["units"] = [u for u in doc["actuators"]["units"] if u["id"] != "index_sma_3"] + [
        {"id": "index_sma_3", "kind": "motor"}
    ]
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(doc))
    code, _, err = run(capsys, "--spec", str(path), "check", "allocation")
    assert code != 0
    assert err


def test_spec_option_and_dump(tmp_path, capsys):
    path = tmp_path / "spec.json"
    assert run(capsys, "spec", "dump", "--output", str(path))[0] == 0
    assert path.read_text() == save_spec(default_hand_spec())
    code, out, _ = run(capsys, "--spec", str(path), "spec", "validate")
    assert code == 0 and "21 DOF" in out
    path.write_text("{broken")
    assert run(capsys, "--spec", str(path), "fk", "--deg", "0", "0", "0", "0")[0] == 5
    assert run(capsys, "--spec", str(tmp_path / "nope.json"), "check", "allocation")[0] == 5


def test_sweep_seeded(capsys):
    _, a, _ = run(capsys, "sweep", "--samples", "50", "--seed", "4")
    _, b, _ = run(capsys, "sweep", "--samples", "50", "--seed", "4")
    assert a == b
    assert "50 samples, seed 4" in a
    assert float(a.split()[-2]) < 1e-6


def test_output_file_byte_stable(tmp_path, capsys):
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, "tendon-profile", "-o", str(p1))
    run(capsys, "tendon-profile", "-o", str(p2))
    assert p1.read_bytes() == p2.read_bytes() == (GOLDEN / "profile_pip.csv").read_bytes()


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "tendon_hand.cli", "fk", "--deg", "0", "0", "0", "0"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("99.500000 0.000000 0.000000\n")
