import json
import math

import pytest

from lineising.cli import RunSpec, UsageError, main, parse_signature, read_fields


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_exact_cycle3(capsys):
    code, out, err = run(capsys, "exact", "--graph", "cycle:3", "--beta", "1")
    d = json.loads(out)
    assert code == 0 and set(d) == {"log_Z", "log_H0", "log_H2"}
    assert d["log_H0"] == pytest.approx(math.log(2 + 6 * math.e ** 2))
    assert d["log_Z"] == pytest.approx(d["log_H0"])
    assert "log_H0" in err


def test_exact_path2(capsys):
    code, out, _ = run(capsys, "exact", "--graph", "path:2", "--beta", "0", "--nu", "0")
    assert json.loads(out)["log_Z"] == pytest.approx(math.log(2))


def test_exact_cap_and_usage(capsys):
    assert run(capsys, "exact", "--graph", "hex:3", "--beta", "1")[0] == 2
    assert run(capsys, "exact")[0] == 2
    assert run(capsys, "exact", "--graph", "nosuch:3")[0] == 2
    assert run(capsys, "sample", "--graph", "cycle:4")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2


def test_fields_file(tmp_path, capsys):
    f = tmp_path / "nu.txt"
    f.write_text("0 1.0\n2 -0.5\n")
    assert read_fields(str(f), 3) == [1.0, 0.0, -0.5]
    code, out, _ = run(capsys, "exact", "--graph", "cycle:3", "--beta", "0", "--fields", str(f))
    ref = math.log1p(math.e) + math.log(2) + math.log1p(math.exp(-0.5))
    assert json.loads(out)["log_Z"] == pytest.approx(ref)
    f.write_text("7 1.0\n")
    assert run(capsys, "exact", "--graph", "cycle:3", "--fields", str(f))[0] == 2


def test_sample_deterministic(tmp_path, capsys):
    outs = []
    for k in range(2):
        path = tmp_path / f"s{k}.txt"
        code, _, _ = run(capsys, "sample", "--graph", "cycle:4", "--beta", "0.5", "--seed", "4",
                         "--samples", "300", "--chain", "half-edge", "--out", str(path))
        assert code == 0
        outs.append((path.read_bytes(), (tmp_path / f"s{k}.txt.json").read_text()))
    assert outs[0][0] == outs[1][0]
    lines = outs[0][0].decode().split()
    assert len(lines) == 300 and all(len(s) == 4 and set(s) <= {"0", "1"} for s in lines)
    side = json.loads(outs[0][1])
    assert side["samples"] == 300 and 0 < side["omega0_fraction"] <= 1


def test_sample_steps_mode(capsys):
    code, out, _ = run(capsys, "sample", "--graph", "star:3", "--beta", "1", "--seed", "1", "--steps", "640",
                       "--thin", "64")
    assert code == 0 and len(out.split()) <= 10


def test_estimate(capsys):
    code, out, _ = run(capsys, "estimate", "--graph", "cycle:4", "--beta", "0", "--nu", "0", "--seed", "1")
    assert code == 0 and json.loads(out)["log_Z"] == pytest.approx(4 * math.log(2))
    a = run(capsys, "estimate", "--graph", "cycle:4", "--beta", "0.5", "--seed", "2", "--epsilon", "0.3",
            "--replicas", "2", "--threads", "1")[1]
    b = run(capsys, "estimate", "--graph", "cycle:4", "--beta", "0.5", "--seed", "2", "--epsilon", "0.3",
            "--replicas", "2", "--threads", "2")[1]
    assert a == b


def test_windability_commands(capsys):
    code, out, _ = run(capsys, "windability", "--beta", "1", "--mu", "0", "--degree", "6")
    certs = [json.loads(line) for line in out.splitlines()]
    assert code == 0 and len(certs) == 21 and all(c["feasible"] for c in certs)
    assert run(capsys, "windability", "--signature", "[1,1,1,1]")[0] == 0
    code, out, _ = run(capsys, "windability", "--signature", "[1,0.5,0.5,1]")
    assert code == 1 and any(not json.loads(line)["feasible"] for line in out.splitlines())
    assert run(capsys, "windability")[0] == 2
    assert run(capsys, "windability", "--signature", "[1,x]")[0] == 2


def test_runspec_and_signature_parsing():
    with pytest.raises(UsageError):
        RunSpec("estimate", graph="cycle:4")
    assert RunSpec("sample", graph="cycle:4", seed=0, chain="half-edge").kind == "half_edge"
    from fractions import Fraction
    assert parse_signature("[1, 7/10, 0.70, 1]").values == (1, Fraction(7, 10), Fraction(7, 10), 1)


def test_sidecar_occupancy_matches_exact(tmp_path, capsys):
    from lineising.graph import star_graph
    from lineising.oracle import exact_summary
    from lineising.signatures import ModelParams
    from lineising.estimator import measure_omega_ratio
    path = tmp_path / "s.txt"
    code, _, _ = run(capsys, "sample", "--graph", "star:3", "--beta", "0.5", "--nu", "1", "--seed", "8",
                     "--chain", "half-edge", "--steps", "400000", "--burnin", "10000", "--thin", "1000",
                     "--out", str(path))
    side = json.loads((tmp_path / "s.txt.json").read_text())
    p = ModelParams(0.5, 1.0)
    exact = exact_summary(star_graph(3), p).omega_ratio
    se = measure_omega_ratio(star_graph(3), p, 400_000, seed=8).stderr
    assert code == 0 and abs(side["omega_ratio"] - exact) < 3 * se
