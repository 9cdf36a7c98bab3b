import csv
import io
import json

import numpy as np
import pytest

from pointerlab.cli import main, parse_args, parse_range
from pointerlab.errors import InputError
from pointerlab.parallel import ordered_map, worker_count


def _strip(text):
    data = json.loads(text)
    data.pop("provenance", None)
    return data


def _csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    assert len({len(r) for r in rows}) == 1, "column count varies within the file"
    return rows[0], rows[1:]


def test_model_info_qbm(capsys):
    assert main(["model-info", "--T", "1000"]) == 0
    out = capsys.readouterr().out
    assert "marginally stable" in out
    assert main(["model-info", "--T", "1000", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    eig = sorted(z[0] for z in data["eigenvalues_A"])
    assert eig == pytest.approx([-1.0, 0.0], abs=1e-12)
    assert data["hurwitz"] is False and data["D_psd"] is True


def test_model_info_stable_model_file(tmp_path, capsys):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"A": [[-1, 0.5], [0, -2]], "D": [[1, 0], [0, 1]]}))
    assert main(["model-info", "--model", str(path), "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["hurwitz"] is True and data["stability"] == "Hurwitz"


def test_malformed_model_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"A": [[0, 1],\n  [0, -1]]\n "D": }')
    assert main(["model-info", "--model", str(path)]) == 2
    assert "line" in capsys.readouterr().err
    assert main(["model-info", "--model", str(tmp_path / "missing.json")]) == 2


def test_parse_range():
    assert parse_range("0:20:41") == (0.0, 20.0, 41)
    assert parse_range([1, 2, 3]) == (1.0, 2.0, 3)
    for bad in ("1:0:5", "0:1:1", "a:b:c", "0:1"):
        with pytest.raises(InputError):
            parse_range(bad)


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"T": 500.0, "eps": 0.2, "beta-range": "0:5:6"}))
    args = parse_args(["feedback-sweep", "--config", str(cfg), "--eps", "0.3"])
    assert args.T == 500.0 and args.eps == 0.3 and args.beta_range == "0:5:6"
    cfg.write_text(json.dumps({"nonsense": 1}))
    with pytest.raises(InputError):
        parse_args(["feedback-sweep", "--config", str(cfg)])
    assert main(["feedback-sweep", "--config", str(cfg)]) == 2


def test_pointer_scan_small(tmp_path, capsys):
    argv = ["pointer-scan", "--T", "100", "--beta-range", "0:4:5", "--grid", "6",
            "--out", str(tmp_path)]
    assert main(argv) == 0
    summary = _strip(capsys.readouterr().out)
    header, rows = _csv((tmp_path / "pointer_scan.csv").read_text())
    assert header == ["beta", "gamma", "tau_mix", "tau_sur"]
    assert summary["outputs"]["rows"] == len(rows) > 0
    # the largest mixing time over the grid is outdone by the boundary optimum
    best = max(float(r[2]) for r in rows)
    assert summary["outputs"]["tau_mix_star"] >= best * (1 - 1e-9)
    # deterministic apart from provenance
    assert main(argv) == 0
    assert _strip(capsys.readouterr().out) == summary


def test_pointer_scan_mixing_time_drops_with_temperature(capsys):
    taus = []
    for T in ("1000", "5000"):
        assert main(["pointer-scan", "--T", T, "--beta-range", "0:4:5",
                     "--boundary-only"]) == 0
        err = capsys.readouterr()
        _, rows = _csv(err.out)
        taus.append(np.array([float(r[2]) for r in rows]))
    assert np.all(taus[1] < taus[0])


def test_degenerate_grid_rejected(capsys):
    assert main(["pointer-scan", "--grid", "1", "--beta-range", "0:1:2"]) == 2
    assert main(["pointer-scan", "--beta-range", "0:1:1"]) == 2
    assert main(["pointer-scan", "--beta-range", "0:100000:3"]) == 2
    assert main(["pointer-scan", "--eps", "1.5"]) == 2


def test_fit_powerlaw(capsys, tmp_path):
    argv = ["fit-powerlaw", "--T-range", "100:10000:5", "--json", "--out", str(tmp_path)]
    assert main(argv) == 0
    first = _strip(capsys.readouterr().out)
    assert -0.53 < first["outputs"]["b"] < -0.49
    assert (tmp_path / "fit_powerlaw.csv").exists()
    assert main(argv) == 0
    second = _strip(capsys.readouterr().out)
    assert abs(second["outputs"]["a"] - first["outputs"]["a"]) <= 1e-6


def test_feedback_sweep_rows_and_flags(capsys):
    assert main(["feedback-sweep", "--beta-range", "0.5:1.5:11"]) == 0
    cap = capsys.readouterr()
    header, rows = _csv(cap.out)
    assert header == ["beta", "gamma", "tau_mix", "infidelity_exact",
                      "infidelity_approx", "purity_exact"]
    assert len(rows) == 11
    summary = json.loads(cap.err)["outputs"]
    assert summary["coincide"] is True


def test_feedback_sweep_open_loop_sentinel(capsys):
    assert main(["feedback-sweep", "--k", "0", "--beta-range", "0:2:3"]) == 0
    cap = capsys.readouterr()
    _, rows = _csv(cap.out)
    assert all(r[3] == "NotHurwitz" for r in rows)
    assert "warning" in cap.err


def test_simulate_deterministic_and_path(tmp_path, capsys):
    path_csv = tmp_path / "path.csv"
    argv = ["simulate", "--steps", "2000", "--seed", "5", "--json",
            "--path-csv", str(path_csv)]
    assert main(argv) == 0
    first = capsys.readouterr().out
    text = path_csv.read_text()
    assert text.startswith("step,q,p\n")
    assert main(argv) == 0
    assert _strip(capsys.readouterr().out) == _strip(first)
    assert path_csv.read_text() == text
    data = json.loads(first)
    assert data["provenance"]["seed"] == 5
    assert data["outputs"]["warning_count"] == 0


def test_simulate_large_dt_warns(capsys):
    assert main(["simulate", "--steps", "200", "--dt", "6e-4", "--json"]) == 0
    cap = capsys.readouterr()
    assert json.loads(cap.out)["outputs"]["warning_count"] >= 1
    assert "warning" in cap.err
    assert main(["simulate", "--k", "0"]) == 2


def test_lqg_check(capsys):
    assert main(["lqg-check", "--json"]) == 0
    out = json.loads(capsys.readouterr().out)["outputs"]
    assert out["P_min_eigenvalue"] > 0 and out["Q_min_eigenvalue"] > 0
    assert out["care_residual"] < 1e-6
    assert main(["lqg-check", "--k", "1000", "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["outputs"]["deviation"] < out["deviation"]


@pytest.mark.slow
def test_figures_small(tmp_path, capsys):
    out = tmp_path / "figs"
    assert main(["figures", "--out", str(out), "--grid", "4", "--beta-points", "6",
                 "--T-points", "3"]) == 0
    names = sorted(p.name for p in out.iterdir())
    expected = ["fig4a.csv", "fig4b.csv", "fig4c.csv", "fig4d.csv", "fig5a.csv",
                "fig5b.csv", "fig6a.csv", "fig6b.csv", "fig6c.csv", "fig6d.csv",
                "fig7a.csv", "fig7b.csv"]
    assert names == expected
    header, rows = _csv((out / "fig6a.csv").read_text())
    assert header == ["beta", "gamma", "tau_mix", "tau_sur", "infidelity"]
    assert len(rows) == 6
    header, rows = _csv((out / "fig4a.csv").read_text())
    assert header == ["T", "eps", "beta_star", "gamma_star", "tau_mix_star", "omega_star"]


def test_worker_cap(monkeypatch):
    monkeypatch.setenv("POINTERLAB_THREADS", "1")
    assert worker_count(8) == 1
    monkeypatch.setenv("POINTERLAB_THREADS", "3")
    assert worker_count(8) == 3 and worker_count(2) == 2
    monkeypatch.delenv("POINTERLAB_THREADS")
    assert worker_count(4) == 4


def _square(x):
    return x * x


def test_ordered_map_preserves_order_with_workers(monkeypatch):
    monkeypatch.setenv("POINTERLAB_THREADS", "2")
    items = list(range(20))
    assert ordered_map(_square, items, workers=2) == [x * x for x in items]
    assert ordered_map(_square, items, workers=1) == [x * x for x in items]


def test_workers_do_not_change_output(capsys, monkeypatch):
    monkeypatch.setenv("POINTERLAB_THREADS", "2")
    argv = ["feedback-sweep", "--beta-range", "0:3:4"]
    assert main(argv + ["--workers", "1"]) == 0
    one = capsys.readouterr().out
    assert main(argv + ["--workers", "2"]) == 0
    assert capsys.readouterr().out == one
