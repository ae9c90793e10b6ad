"""Command line layer: parsing, config merge, exit codes, report bytes."""

import csv
import json

import pytest

from finsler_sharp import cli
from finsler_sharp.report import make_report


def run_cli(argv):
    return cli.main(argv)


# -- descriptor / grid parsing ----------------------------------------------


def test_parse_descriptor_types():
    d = cli.parse_descriptor("f_eps:n=3,eps=0.5,normalize=true,tag=abc")
    assert d == {"kind": "f_eps", "n": 3, "eps": 0.5, "normalize": True, "tag": "abc"}


def test_parse_descriptor_dict_passthrough_copies():
    src = {"kind": "euclidean", "n": 2}
    d = cli.parse_descriptor(src)
    assert d == src and d is not src


@pytest.mark.parametrize("bad", ["", "   ", None, 7])
def test_parse_descriptor_rejects_non_specs(bad):
    with pytest.raises(cli.ConfigError):
        cli.parse_descriptor(bad)


def test_parse_descriptor_rejects_bare_items():
    with pytest.raises(cli.ConfigError):
        cli.parse_descriptor("euclidean:n")


def test_lp_instance_shorthand():
    m = cli._instance_from_config("lp:n=2,p=4")
    assert m.dim == 2 and m.norm.normalized
    with pytest.raises(cli.ConfigError):
        cli._instance_from_config("lp:n=2,p=4,extra=1")


def test_sweep_grid_geometric():
    assert cli.parse_sweep_grid("R=1:8:geometric") == [1.0, 2.0, 4.0, 8.0]
    assert cli.parse_sweep_grid("R=1:9:geometric:3") == [1.0, 3.0, 9.0]


def test_sweep_grid_linear():
    grid = cli.parse_sweep_grid("R=0:1:linear:5")
    assert grid == [0.0, 0.25, 0.5, 0.75, 1.0]


@pytest.mark.parametrize("bad", [
    "Q=1:8:geometric", "R=1:8", "R=8:1:geometric", "R=1:8:geometric:0.5",
    "R=1:8:cubic", 17,
])
def test_sweep_grid_rejects(bad):
    with pytest.raises(cli.ConfigError):
        cli.parse_sweep_grid(bad)


# -- config merge -----------------------------------------------------------


def test_empty_config_is_usage_error(tmp_path, capsys):
    path = tmp_path / "empty.json"
    path.write_text("{}")
    rc = run_cli(["verify", "--config", str(path)])
    assert rc == 2
    assert "empty" in capsys.readouterr().err


def test_unknown_config_keys_rejected(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"task": "constants", "p": 4, "n": 2, "color": "red"}))
    rc = run_cli(["constants", "--config", str(path)])
    assert rc == 2
    assert "color" in capsys.readouterr().err


def test_config_task_must_match_subcommand(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"task": "constants", "p": 4, "n": 2}))
    rc = run_cli(["verify", "--config", str(path)])
    assert rc == 2
    assert "does not match" in capsys.readouterr().err


def test_config_document_drives_a_run(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({
        "task": "verify", "instance": "euclidean:n=2",
        "inequality": "morrey-support", "profile": "morrey_extremal:p=4",
    }))
    rc = run_cli(["verify", "--config", str(path)])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["schema"] == 1
    assert doc["passed"] is True
    assert doc["config"]["seed"] == 0  # defaults are materialized
    assert doc["timestamp"] is None


def test_flags_override_config(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({
        "task": "verify", "instance": "euclidean:n=2",
        "inequality": "morrey-support", "profile": "morrey_extremal:p=4",
        "p": 4.0,
    }))
    rc = run_cli(["verify", "--config", str(path), "--p", "5"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["config"]["p"] == 5.0
    assert doc["report"]["params"]["p"] == 5.0


def test_threads_env_fallback(monkeypatch, capsys):
    monkeypatch.setenv("FINSLER_SHARP_THREADS", "3")
    rc = run_cli(["verify", "--instance", "euclidean:n=2",
                  "--inequality", "morrey-support",
                  "--profile", "morrey_extremal:p=4"])
    assert rc == 0
    assert json.loads(capsys.readouterr().out)["threads"] == 3


# -- exit codes -------------------------------------------------------------


def test_single_check_passes_exit_0(capsys):
    rc = run_cli(["verify", "--instance", "euclidean:n=2",
                  "--inequality", "morrey-support",
                  "--profile", "morrey_extremal:p=4", "--p", "4"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["report"]["ratio"] == pytest.approx(1.0, rel=1e-8)


def test_missing_required_parameter_exit_2(capsys):
    rc = run_cli(["verify", "--instance", "euclidean:n=2"])
    assert rc == 2
    assert "inequality" in capsys.readouterr().err


def test_unknown_inequality_exit_2(capsys):
    rc = run_cli(["verify", "--instance", "euclidean:n=2",
                  "--inequality", "agmon", "--profile", "morrey_extremal:p=4"])
    assert rc == 2


def test_unknown_subcommand_exit_2(capsys):
    rc = run_cli(["frobnicate"])
    assert rc == 2
    capsys.readouterr()


def test_failed_check_exit_3(monkeypatch, capsys):
    bad = make_report("morrey_support", {"p": 4.0}, 2.0, 1.0,
                      direction="upper", rtol=0.0)
    monkeypatch.setattr(cli.V, "run_inequality", lambda *a, **k: bad)
    rc = run_cli(["verify", "--instance", "euclidean:n=2",
                  "--inequality", "morrey-support",
                  "--profile", "morrey_extremal:p=4"])
    assert rc == 3
    assert json.loads(capsys.readouterr().out)["passed"] is False


def test_failed_suite_exit_3(monkeypatch, capsys):
    bad = make_report("morrey_support", {"p": 4.0}, 2.0, 1.0,
                      direction="upper", rtol=0.0)
    monkeypatch.setattr(cli.V, "randomized_suite", lambda *a, **k: [bad])
    rc = run_cli(["verify", "--instance", "euclidean:n=2",
                  "--inequality", "morrey-support", "--suite", "1"])
    assert rc == 3
    capsys.readouterr()


def test_runtime_error_exit_3(monkeypatch, capsys):
    def boom(*a, **k):
        raise RuntimeError("volume comparison violated")

    monkeypatch.setattr(cli, "estimate_avr", boom)
    rc = run_cli(["avr", "--instance", "euclidean:n=2"])
    assert rc == 3
    assert "numerical failure" in capsys.readouterr().err


def test_run_rejects_unknown_task():
    with pytest.raises(cli.ConfigError):
        cli.run({"task": "nonsense"})


# -- emitted documents ------------------------------------------------------


def test_constants_prints_table_row(capsys):
    rc = run_cli(["constants", "--p", "4", "--n", "2"])
    assert rc == 0
    row = capsys.readouterr().out.strip()
    assert row.startswith("p=4")
    fields = dict(item.split("=", 1) for item in row.split())
    assert float(fields["morrey_support"]) == pytest.approx(0.6430370685787438)
    assert "hardy" not in fields  # p > n: no singular-weight constant


def test_constants_report_bytes_are_stable(tmp_path, capsys):
    out = tmp_path / "c.json"
    argv = ["constants", "--p", "4", "--n", "2", "--out", str(out)]
    assert run_cli(argv) == 0
    first = out.read_bytes()
    out.unlink()
    assert run_cli(argv) == 0
    assert out.read_bytes() == first
    capsys.readouterr()


def test_suite_stdout_is_reproducible(capsys):
    argv = ["verify", "--instance", "euclidean:n=2", "--inequality",
            "morrey-support", "--suite", "5", "--seed", "7"]
    assert run_cli(argv) == 0
    first = capsys.readouterr()
    assert run_cli(argv) == 0
    second = capsys.readouterr()
    assert first.out == second.out
    assert "5/5 draws passed" in first.err


def test_timestamp_flag_breaks_null_default(capsys):
    rc = run_cli(["verify", "--instance", "euclidean:n=2",
                  "--inequality", "morrey-support",
                  "--profile", "morrey_extremal:p=4", "--timestamp"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["timestamp"] is not None


def test_sweep_writes_csv_and_json(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    rc = run_cli(["sweep", "--kind", "support", "--instance", "lp:n=2,p=4",
                  "--p", "4", "--sweep", "R=1:8:geometric", "--out", str(out)])
    assert rc == 0
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["R", "lhs", "rhs", "ratio", "target"]
    assert len(rows) == 5
    for row in rows[1:]:
        assert float(row[3]) == pytest.approx(1.0, rel=1e-9)
    doc = json.loads((tmp_path / "sweep.json").read_text())
    assert doc["passed"] is True
    assert doc["sweep"]["limit"] == pytest.approx(doc["sweep"]["target"], rel=1e-9)
    capsys.readouterr()


def test_pde_eigensolver_csv(tmp_path, capsys):
    out = tmp_path / "ep.csv"
    rc = run_cli(["pde", "--problem", "ep", "--n", "2", "--out", str(out)])
    assert rc == 0
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["rho", "u", "du"]
    assert float(rows[-1][1]) == pytest.approx(0.0, abs=1e-12)  # boundary value
    doc = json.loads((tmp_path / "ep.json").read_text())
    assert doc["summary"]["lambda1"] == pytest.approx(5.7831859629467845, rel=1e-6)
    capsys.readouterr()


def test_avr_exact_path(capsys):
    rc = run_cli(["avr", "--instance", "euclidean:n=2", "--method", "exact"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["point"] == 1.0
    assert doc["passed"] is True


def test_out_dir_places_default_names(tmp_path, capsys):
    rc = run_cli(["verify", "--instance", "euclidean:n=2",
                  "--inequality", "morrey-support",
                  "--profile", "morrey_extremal:p=4",
                  "--out-dir", str(tmp_path)])
    assert rc == 0
    doc = json.loads((tmp_path / "verify_morrey_support.json").read_text())
    assert doc["passed"] is True
    # status line moves to stdout once the JSON goes to a file
    assert "PASS" in capsys.readouterr().out
