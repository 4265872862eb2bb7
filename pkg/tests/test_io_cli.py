import itertools
import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from pancake.cli import main
from pancake.geometry import OrthoCut, cut_at_slope
from pancake.io import (
    InstanceError,
    dumps,
    generate,
    parse_csv,
    parse_json,
    read_instance,
    resolve_seed,
    svg_plot,
    write_csv,
    write_json_instance,
)

DATA = Path(__file__).parent / "data"


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_csv_and_errors():
    inst = parse_csv("# comment\n1,2\n\n3,4\n")
    assert inst.points.tolist() == [[1, 2], [3, 4]]
    with pytest.raises(InstanceError) as e:
        parse_csv("1,2\n1,a\n")
    assert e.value.line == 2
    with pytest.raises(InstanceError) as e:
        parse_csv("1,2\n1,2,3\n")
    assert e.value.line == 2
    with pytest.raises(InstanceError):
        parse_csv("\n\n")
    with pytest.raises(InstanceError):
        parse_csv("1,inf\n")


def test_parse_json():
    inst = parse_json('{"dimension": 3, "points": [[1,2,3],[4,5,6]]}')
    assert inst.dimension == 3
    multi = parse_json('{"sets": [[[1,2]], [[3,4],[5,6]]]}')
    assert [len(s) for s in multi.sets] == [1, 2]
    with pytest.raises(InstanceError) as e:
        parse_json('{"points": [[1,2],\n [3,]]}')
    assert e.value.line == 2
    with pytest.raises(InstanceError):
        parse_json('{"dimension": 3, "points": [[1,2]]}')
    with pytest.raises(InstanceError):
        parse_json('{"other": 1}')


def test_instance_round_trip(tmp_path):
    pts = generate(50, "gaussian", 3)
    write_csv(tmp_path / "a.csv", pts)
    assert np.array_equal(read_instance(tmp_path / "a.csv").points, pts)
    write_json_instance(tmp_path / "a.json", pts)
    assert np.array_equal(read_instance(tmp_path / "a.json").points, pts)
    write_json_instance(tmp_path / "b.json", sets=[pts, pts[:10]])
    assert [len(s) for s in read_instance(tmp_path / "b.json").sets] == [50, 10]


def test_generate_deterministic():
    for dist in ("uniform", "gaussian", "grid"):
        assert np.array_equal(generate(100, dist, 7), generate(100, dist, 7))
    grid = generate(4, "grid", 0)
    assert grid.shape == (4, 2)
    assert np.all(grid == np.round(grid))
    assert len({tuple(p) for p in generate(30, "grid", 1)}) == 30
    with pytest.raises(ValueError):
        generate(0)
    with pytest.raises(ValueError):
        generate(5, "cauchy")


def test_dumps_17_digits():
    text = dumps({"x": 0.1, "y": [1.0, 2], "z": None})
    obj = json.loads(text)
    assert obj["x"] == 0.1
    assert "0.10000000000000001" in text


def test_resolve_seed(monkeypatch):
    monkeypatch.delenv("PANCAKE_SEED", raising=False)
    assert resolve_seed(None) == 0
    monkeypatch.setenv("PANCAKE_SEED", "41")
    assert resolve_seed(None) == 41
    assert resolve_seed(5) == 5


def test_gen_byte_identical(tmp_path, capsys):
    for name in ("a", "b"):
        assert run(["gen", 4, tmp_path / f"{name}.csv", "--dist", "grid", "--seed", 0], capsys)[0] == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    run(["gen", 100, tmp_path / "c.csv", "--seed", 7], capsys)
    run(["gen", 100, tmp_path / "d.csv", "--seed", 7], capsys)
    assert (tmp_path / "c.csv").read_bytes() == (tmp_path / "d.csv").read_bytes()


def test_solve2d_symmetric(capsys):
    code, out, _ = run(["solve2d", DATA / "sym4.csv"], capsys)
    rec = json.loads(out)
    assert code == 0 and rec["status"] == "ok"
    assert [rec["counts"][k] for k in ("q1", "q2", "q3", "q4")] == [1, 1, 1, 1]


def test_solve2d_nine_points(tmp_path, capsys):
    write_csv(tmp_path / "p.csv", generate(9, "gaussian", 11))
    code, out, _ = run(["solve2d", tmp_path / "p.csv"], capsys)
    rec = json.loads(out)
    assert code == 0 and max(rec["counts"][k] for k in ("q1", "q2", "q3", "q4")) <= 2


def test_solve2d_malformed(tmp_path, capsys):
    (tmp_path / "bad.csv").write_text("1,2\n1,a\n")
    code, _, err = run(["solve2d", tmp_path / "bad.csv"], capsys)
    assert code == 1 and "line 2" in err


def test_solve2d_too_few_points(tmp_path, capsys):
    (tmp_path / "few.csv").write_text("1,2\n3,4\n")
    assert run(["solve2d", tmp_path / "few.csv"], capsys)[0] == 1


@pytest.mark.parametrize("name", ["sym4", "gauss9", "grid40"])
def test_golden_records(name, capsys):
    code, out, _ = run(["solve2d", DATA / f"{name}.csv"], capsys)
    rec = json.loads(out)
    rec["stats"]["elapsed_ns"] = 0
    golden = json.loads((DATA / f"golden_{name}.json").read_text())
    assert code == 0
    assert rec == golden


def test_verify_examples(tmp_path, capsys):
    P = np.loadtxt(DATA / "sym4.csv", delimiter=",")
    good = cut_at_slope(P, 1.0)
    (tmp_path / "good.json").write_text(dumps(good.to_json()))
    assert run(["verify", DATA / "sym4.csv", tmp_path / "good.json"], capsys)[0] == 0
    moved = good.to_json()
    moved["line1"]["intercept"] = 10.0
    moved["line2"]["intercept"] = 20.0
    (tmp_path / "moved.json").write_text(dumps(moved))
    assert run(["verify", DATA / "sym4.csv", tmp_path / "moved.json"], capsys)[0] != 0
    (tmp_path / "junk.json").write_text('{"phi": 1}')
    assert run(["verify", DATA / "sym4.csv", tmp_path / "junk.json"], capsys)[0] == 1


def test_round_trip(tmp_path, capsys):
    for k, dist in enumerate(("gaussian", "uniform", "grid") * 3):
        inst = tmp_path / f"i{k}.csv"
        res = tmp_path / f"r{k}.json"
        assert run(["gen", 30 + 17 * k, inst, "--dist", dist, "--seed", k], capsys)[0] == 0
        code, out, _ = run(["solve2d", inst, "--seed", k], capsys)
        assert code == 0
        res.write_text(out)
        assert run(["verify", inst, res], capsys)[0] == 0


def test_svg(tmp_path, capsys):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    run(["solve2d", DATA / "gauss9.csv", "--svg", a], capsys)
    run(["solve2d", DATA / "gauss9.csv", "--svg", b], capsys)
    text = a.read_text()
    assert text == b.read_text()
    assert text.startswith("<svg") and text.count("<circle") == 9 and text.count("<line") == 2
    P = np.loadtxt(DATA / "sym4.csv", delimiter=",")
    assert "q1=1 q2=1 q3=1 q4=1" in svg_plot(P, OrthoCut.from_json(cut_at_slope(P, 1.0).to_json()))


def test_oracle2d(capsys):
    code, out, _ = run(["oracle2d", DATA / "gauss9.csv"], capsys)
    assert code == 0 and json.loads(out)["status"] == "ok"


def test_median_demo(capsys):
    code, out, _ = run(["median-demo", "5 1 3 9 7"], capsys)
    assert code == 0 and json.loads(out)["median"] == 5
    assert run(["median-demo", "1 2 3 4"], capsys)[0] == 1


def test_solve_a_cube(tmp_path, capsys):
    cube = np.array(list(itertools.product([-1, 1], repeat=3)), dtype=float)
    write_csv(tmp_path / "cube.csv", cube)
    code, out, _ = run(["solve-a", tmp_path / "cube.csv"], capsys)
    rec = json.loads(out)
    assert code == 0 and rec["status"] == "ok"
    assert np.allclose(np.abs(rec["cut"]["normals"]), np.eye(3))


def test_solve_a_cap(tmp_path, capsys):
    write_csv(tmp_path / "big.csv", generate(30, "gaussian", 0, d=3))
    code, _, err = run(["solve-a", tmp_path / "big.csv"], capsys)
    assert code == 3 and "--force" in err


def test_solve_b_random(tmp_path, capsys):
    for seed in range(3):
        sets = [generate(8, "gaussian", seed, d=4), generate(8, "gaussian", seed + 100, d=4)]
        write_json_instance(tmp_path / "s.json", sets=sets)
        code, out, _ = run(["solve-b", tmp_path / "s.json"], capsys)
        assert code in (0, 2)
        assert json.loads(out)["status"] in ("ok", "not_found")


def test_bench_cli(tmp_path, capsys):
    code, out, _ = run(["bench", "--ns", "1000,2000", "--trials", 1, "--csv", tmp_path / "b.csv"], capsys)
    assert code == 0
    assert (tmp_path / "b.csv").read_text().startswith("n,trials")


def test_console_entry_point(tmp_path):
    env = dict(os.environ, PANCAKE_SEED="3")
    out = subprocess.run([sys.executable, "-m", "pancake.cli", "gen", "12", str(tmp_path / "x.csv")],
                         env=env, capture_output=True, text=True)
    assert out.returncode == 0
    assert np.array_equal(np.loadtxt(tmp_path / "x.csv", delimiter=","), generate(12, "gaussian", 3))
