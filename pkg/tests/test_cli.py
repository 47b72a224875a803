import json
from pathlib import Path

import numpy as np
import pytest

from finitegic.cli import main, parse_grid, UsageError
from finitegic.fixtures import example_1, example_1a, example_2
from finitegic.infotheory import gaussian_rate_tin
from finitegic.io import load_scenario, save_scenario


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, s in [("ex1", example_1(40)), ("ex1a", example_1a(20)), ("ex2", example_2(-2))]:
        out[name] = str(tmp_path / f"{name}.json")
        save_scenario(s, out[name])
    return out


def run(argv, capsys):
    code = main(argv)
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_eval_mc_example_1(files, capsys):
    code, out, _ = run(["eval", files["ex1"], "--samples", "300"], capsys)
    assert code == 0
    assert json.loads(out)["per_user"] == pytest.approx([2, 2, 2], abs=0.05)


def test_eval_gaussian_csv(files, capsys):
    code, out, _ = run(["eval", files["ex1"], "--method", "gaussian", "--format", "csv"], capsys)
    lines = out.splitlines()
    assert code == 0 and lines[0].startswith("# finitegic-csv v1") and lines[1].startswith("user,rate")
    s = example_1(40)
    for i, line in enumerate(lines[2:]):
        assert float(line.split(",")[1]) == pytest.approx(gaussian_rate_tin(s, i), rel=1e-5)


def test_parse_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"users": 3, "constellation": {"kind": "psk"}}')
    code, _, err = run(["eval", str(bad)], capsys)
    assert code == 2 and "constellation.order" in err
    bad.write_text("{not json")
    assert run(["eval", str(bad)], capsys)[0] == 2
    assert run(["eval", str(tmp_path / "missing.json")], capsys)[0] == 2
    with pytest.raises(SystemExit) as e:
        main(["eval"])
    assert e.value.code == 2


def test_capacity_exit_3(tmp_path, capsys):
    s = example_2(0)
    d = json.loads(Path(save_scenario(s, tmp_path / "a.json") or tmp_path / "a.json").read_text())
    d["constellation"] = {"kind": "psk", "order": 4}
    d["tx_antennas"] = d["rx_antennas"] = [5, 5, 5]
    d["streams"] = [5, 5, 5]
    eye = [[[1.0 if r == c else 0.0, 0.0] for c in range(5)] for r in range(5)]
    d["channels"] = [[eye] * 3 for _ in range(3)]
    d.pop("precoders")
    (tmp_path / "big.json").write_text(json.dumps(d))
    code, _, err = run(["eval", str(tmp_path / "big.json")], capsys)
    assert code == 3 and "cap" in err


def test_singular_ia_exit_3(tmp_path, capsys):
    s = example_2(0)
    ch = [list(r) for r in s.channels]
    ch[1][0] = np.array([[1, 2], [2, 4]], dtype=complex)
    save_scenario(s.with_channels(ch), tmp_path / "sing.json")
    assert run(["ia-precoder", str(tmp_path / "sing.json")], capsys)[0] == 3


def test_ccsc_command(files, capsys):
    code, out, _ = run(["ccsc", files["ex1"]], capsys)
    d = json.loads(out)
    assert code == 0 and d["all_optimal"] and d["limits_bits"] == [2.0, 2.0, 2.0]
    code, out, _ = run(["ccsc", files["ex1a"]], capsys)
    d = json.loads(out)
    assert not d["users"][0]["ccsc"]["optimal"]
    r2 = 2 ** 0.5
    assert any(v["differences"] == [[[pytest.approx(r2), pytest.approx(r2)]], [[pytest.approx(r2), 0.0]],
                                    [[0.0, 0.0]]] for v in d["users"][0]["ccsc"]["violations"])
    code, out, err = run(["ccsc", files["ex1"], "--tol", "1e30"], capsys)
    assert code == 0 and "not small" in err and not json.loads(out)["all_optimal"]


def test_optimize_command(files, tmp_path, capsys):
    tr, fin, csvp = tmp_path / "t.json", tmp_path / "v.json", tmp_path / "t.csv"
    argv = ["optimize", files["ex2"], "--init", "random", "--samples", "60", "--max-iter", "1", "--seed", "3",
            "--precoders-out", str(fin), "--trace-csv", str(csvp), "-o", str(tr)]
    assert main(argv) == 0
    d = json.loads(tr.read_text())
    assert len(d["iterations"]) == 1
    assert load_scenario(fin).K == 3
    assert csvp.read_text().startswith("n,f,t")
    first = tr.read_bytes()
    assert main(argv) == 0 and tr.read_bytes() == first
    assert main(["optimize", files["ex1"], "--init", "ia", "--samples", "10"]) == 2
    capsys.readouterr()


def test_sweep_command(files, capsys):
    code, out, _ = run(["sweep", files["ex1"], "--grid=-10:35:60", "--methods", "mc,gaussian",
                        "--samples", "200"], capsys)
    rows = [l.split(",") for l in out.splitlines()[2:]]
    assert code == 0 and [float(r[0]) for r in rows] == [-10, 25, 60]
    assert [float(x) for x in rows[-1][1:4]] == pytest.approx([2, 2, 2], abs=0.01)
    assert [float(x) for x in rows[-1][4:]] == pytest.approx([0.04, 1.02, 0.06], abs=0.01)
    assert run(["sweep", files["ex1"], "--grid", ""], capsys)[0] == 2
    assert run(["sweep", files["ex1"], "--grid", "5,1"], capsys)[0] == 2
    assert run(["sweep", files["ex1"], "--grid", "0", "--methods", "exact"], capsys)[0] == 2


def test_sweep_approx_tracks_mc(files, capsys):
    code, out, _ = run(["sweep", files["ex1a"], "--grid", "20:10:40", "--methods", "mc,approx",
                        "--samples", "500"], capsys)
    for line in out.splitlines()[2:]:
        v = [float(x) for x in line.split(",")]
        assert np.allclose(v[1:4], v[4:7], atol=0.1)


def test_parse_grid():
    assert parse_grid("-10:5:0") == [-10, -5, 0]
    assert parse_grid("1,2.5") == [1, 2.5]
    for bad in ("", "1:0:3", "a:b:c", "3,3"):
        with pytest.raises(UsageError):
            parse_grid(bad)


def test_ia_precoder_command(files, capsys):
    code, out, _ = run(["ia-precoder", files["ex2"]], capsys)
    assert code == 0
    from finitegic.io import loads_scenario
    from finitegic.baselines import verify_alignment
    s = loads_scenario(out)
    assert verify_alignment(s.channels, s.precoders).passed


@pytest.mark.parametrize("argv", [
    ["eval", "{ex1a}", "--samples", "50", "--seed", "9", "--format", "csv"],
    ["sweep", "{ex1a}", "--grid", "0:10:20", "--methods", "mc,approx,gaussian", "--samples", "50"],
    ["ccsc", "{ex1a}"],
])
def test_byte_identical_across_workers(argv, files, capsys):
    argv = [a.format(**files) for a in argv]
    outs = []
    for w in ([] if argv[0] == "ccsc" else ["--workers", "1"], ["--workers", "3"] if argv[0] != "ccsc" else []):
        main(argv + w)
        outs.append(capsys.readouterr().out)
    main(argv)
    outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1] == outs[2]


def test_ergodic_small(capsys):
    argv = ["ergodic", "--draws", "2", "--samples", "30", "--power-db-grid=-2,10", "--max-iter", "1",
            "--seed", "4"]
    code, out, _ = run(argv, capsys)
    lines = out.splitlines()
    assert code == 0 and lines[1] == "power_db,sum_rate_ia,sum_rate_optimized,gap" and len(lines) == 4
    _, again, _ = run(argv + ["--workers", "2"], capsys)
    assert again == out
    code, one, _ = run(["ergodic", "--draws", "1", "--samples", "30", "--power-db-grid", "0",
                        "--precoder", "ia", "--seed", "4"], capsys)
    assert code == 0 and one == run(["ergodic", "--draws", "1", "--samples", "30", "--power-db-grid", "0",
                                     "--precoder", "ia", "--seed", "4"], capsys)[1]
    assert run(["ergodic", "--users", "4"], capsys)[0] == 2


def test_ergodic_rate_selected_ia_baseline(capsys):
    argv = ["ergodic", "--draws", "1", "--samples", "30", "--power-db-grid", "0", "--precoder", "ia",
            "--ia-select", "rate", "--seed", "2"]
    code, out, _ = run(argv, capsys)
    assert code == 0 and "ia_select=rate" in out.splitlines()[0]
    _, eig, _ = run(argv[:-4] + ["--seed", "2"], capsys)
    assert float(out.splitlines()[2].split(",")[1]) > 0 and float(eig.splitlines()[2].split(",")[1]) > 0
