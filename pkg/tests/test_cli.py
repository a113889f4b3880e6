import json
import math

import numpy as np
import pytest

from xsect.cli import main, render_json


@pytest.fixture
def workdir(tmp_path):
    def write(name, obj):
        path = tmp_path / name
        path.write_text(json.dumps(obj))
        return str(path)

    return tmp_path, write


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_render_json_17_digits():
    text = render_json({"x": 1.0 / 3.0, "k": 2, "s": "a", "v": [1.5, None, True]})
    assert text == '{"k":2,"s":"a","v":[1.5,null,true],"x":0.33333333333333331}'


def test_classify_discrete_shear(workdir, capsys):
    _, write = workdir
    path = write("shear.json", {"n": 2, "rows": [[1.0, 1.0], [0.0, 1.0]]})
    code, out = run(capsys, ["classify", "--mode", "discrete", "--matrix", path])
    assert code == 0
    assert out["exists"] is True
    assert out["finite_measure"] is False
    assert out["bounded"] is False
    assert out["similar_to_unitary"] is False
    assert out["manifest"]["inputs"][path]


def test_build_rotation_nonexistence_exit_2(workdir, capsys):
    _, write = workdir
    path = write("rotgen.json", {"n": 2, "rows": [[0.0, 1.0], [-1.0, 0.0]]})
    code, out = run(capsys, ["build", "--mode", "continuous", "--matrix", path])
    assert code == 2
    assert out["code"] == "no_section"


def test_usage_error_exit_1(workdir, capsys):
    tmp, write = workdir
    path = write("two.json", {"n": 1, "rows": [[2.0]]})
    sec = str(tmp / "S.json")
    assert main(["build", "--mode", "discrete", "--matrix", path, "--out", sec]) == 0
    capsys.readouterr()
    code, out = run(capsys, ["verify", "--section", sec, "--mode", "discrete", "--samples", "0", "--seed", "1"])
    assert code == 1
    assert out["code"] == "usage"


def test_missing_seed_is_usage_error(workdir, capsys):
    tmp, write = workdir
    path = write("two.json", {"n": 1, "rows": [[2.0]]})
    sec = str(tmp / "S.json")
    main(["build", "--mode", "discrete", "--matrix", path, "--out", sec])
    capsys.readouterr()
    code, out = run(capsys, ["verify", "--section", sec, "--mode", "discrete", "--samples", "10"])
    assert code == 1
    assert out["code"] == "usage"


def test_build_solve_verify_roundtrip(workdir, capsys):
    tmp, write = workdir
    path = write("spiral.json", {"n": 2, "rows": [[0.0, 2.0], [-2.0, 0.0]]})
    sec = str(tmp / "S.json")
    code, out = run(capsys, ["build", "--mode", "discrete", "--matrix", path, "--out", sec])
    assert code == 0 and out["section"]["case"] == "complex_modulus_not_one"

    code, out = run(capsys, ["solve", "--section", sec, "--point", "0,5"])
    assert code == 0
    assert out["parameter"] == 1
    np.testing.assert_allclose(out["representative"], [2.5, 0.0], atol=1e-9)

    code, out = run(capsys, ["verify", "--section", sec, "--mode", "discrete", "--samples", "2000", "--seed", "7"])
    assert code == 0
    assert out["report"]["passed"] is True


def test_verify_deterministic_bytes(workdir, capsys):
    tmp, write = workdir
    path = write("two.json", {"n": 1, "rows": [[2.0]]})
    sec = str(tmp / "S.json")
    main(["build", "--mode", "discrete", "--matrix", path, "--out", sec])
    capsys.readouterr()
    main(["verify", "--section", sec, "--mode", "discrete", "--samples", "500", "--seed", "3"])
    first = capsys.readouterr().out
    main(["verify", "--section", sec, "--mode", "discrete", "--samples", "500", "--seed", "3"])
    second = capsys.readouterr().out
    assert first == second


def test_shape_det_one_exit_2(workdir, capsys):
    tmp, write = workdir
    path = write("m.json", {"n": 2, "rows": [[2.0, 0.0], [0.0, 0.5]]})
    sec = str(tmp / "S.json")
    main(["build", "--mode", "discrete", "--matrix", path, "--out", sec])
    capsys.readouterr()
    code, out = run(capsys, ["shape", "--section", sec, "--target", "finite"])
    assert code == 2 and out["code"] == "det_one"
    code, out = run(capsys, ["shape", "--section", sec, "--target", "bounded"])
    assert code == 2 and out["code"] == "mixed_moduli"


def test_shape_finite_with_measure(workdir, capsys):
    tmp, write = workdir
    path = write("m.json", {"n": 2, "rows": [[2.0, 0.0], [0.0, 1.0]]})
    sec = str(tmp / "S.json")
    main(["build", "--mode", "discrete", "--matrix", path, "--out", sec])
    capsys.readouterr()
    code, out = run(
        capsys,
        ["shape", "--section", sec, "--target", "finite", "--samples", "20000", "--seed", "5"],
    )
    assert code == 0
    assert out["shaped"]["shifts_prefix"]["1"] == -3
    assert out["measure"]["estimate"] <= 1.0 + out["measure"]["bound_3sigma"] + out["measure"]["tail_bound"]


def test_wavelet_check_and_partition(workdir, capsys):
    tmp, write = workdir
    mat = write("a.json", {"n": 1, "rows": [[2.0]]})
    lat = write("g.json", {"basis": {"n": 1, "rows": [[1.0]]}})
    region = write(
        "k.json",
        {"kind": "boxes", "boxes": [{"lo": [-2.0], "hi": [-1.0]}, {"lo": [1.0], "hi": [2.0]}]},
    )
    code, out = run(
        capsys,
        ["wavelet", "check", "--matrix", mat, "--lattice", lat, "--region", region,
         "--order", "2", "--samples", "300", "--seed", "2"],
    )
    assert code == 0 and out["report"]["passed"] is True
    code, out = run(
        capsys,
        ["wavelet", "partition", "--matrix", mat, "--lattice", lat, "--region", region, "--order", "2"],
    )
    assert code == 0
    assert out["pieces"][0]["boxes"] == [{"lo": [1.0], "hi": [2.0]}]
    assert out["pieces"][1]["boxes"] == [{"lo": [-2.0], "hi": [-1.0]}]


def test_wavelet_dimfn(workdir, capsys):
    _, write = workdir
    region = write("w.json", {"kind": "boxes", "boxes": [{"lo": [0.0], "hi": [1.5]}]})
    code, out = run(capsys, ["wavelet", "dimfn", "--region", region, "--point", "0.25"])
    assert code == 0 and out["dimension"] == 2


def test_wavelet_build_inf_and_nowavelet(workdir, capsys):
    tmp, write = workdir
    mat = write("a.json", {"n": 1, "rows": [[2.0]]})
    lat = write("g.json", {"basis": {"n": 1, "rows": [[1.0]]}})
    code, out = run(capsys, ["wavelet", "build-inf", "--matrix", mat, "--lattice", lat, "--pieces", "4"])
    assert code == 0
    assert out["region"]["pieces"] == 4

    rot = write("rot.json", {"n": 2, "rows": [[0.0, 1.0], [-1.0, 0.0]]})
    lat2 = write("g2.json", {"basis": {"n": 2, "rows": [[1.0, 0.0], [0.0, 1.0]]}})
    code, out = run(capsys, ["wavelet", "build-inf", "--matrix", rot, "--lattice", lat2])
    assert code == 2 and out["code"] == "no_wavelet"


def test_grid_export(workdir, capsys, tmp_path):
    tmp, write = workdir
    path = write("shear.json", {"n": 2, "rows": [[1.0, 1.0], [0.0, 1.0]]})
    dump = str(tmp / "grid.csv")
    code, out = run(
        capsys,
        ["build", "--mode", "discrete", "--matrix", path, "--dump", dump, "--grid", "200"],
    )
    assert code == 0
    lines = open(dump).read().strip().split("\n")
    assert len(lines) == 200 * 200 + 1
    # spot-check: emitted membership flags match re-evaluation
    import csv

    from xsect.sections import build_discrete_section

    section = build_discrete_section([[1.0, 1.0], [0.0, 1.0]])
    rows = list(csv.DictReader(open(dump)))
    pts = np.array([[float(r["x1"]), float(r["x2"])] for r in rows[:500]])
    member, exc = section.membership(pts)
    for r, m, e in zip(rows[:500], member, exc):
        assert r["member"] == ("" if e else str(int(m)))


def test_integrate_gaussian(workdir, capsys):
    tmp, write = workdir
    path = write("log2.json", {"n": 1, "rows": [[math.log(2.0)]]})
    sec = str(tmp / "S.json")
    main(["build", "--mode", "continuous", "--matrix", path, "--out", sec])
    capsys.readouterr()
    code, out = run(
        capsys,
        ["integrate", "--section", sec, "--radius", "6", "--jacobian-points", "20"],
    )
    assert code == 0
    assert abs(out["integral"] - 1.0) < 0.01
    assert out["jacobian_max_rel_dev"] <= 1e-6


def test_grid_export_rejects_high_dimension(workdir, capsys):
    _, write = workdir
    e = [[0.0, 1.0], [-1.0, 0.0]]
    rows = np.block([[np.asarray(e), np.eye(2)], [np.zeros((2, 2)), np.asarray(e)]]).tolist()
    path = write("a4.json", {"n": 4, "rows": rows})
    code, out = run(capsys, ["build", "--mode", "discrete", "--matrix", path, "--dump", "x.csv"])
    assert code == 1 and out["code"] == "dimension_too_high"
