import json
import subprocess
import sys

from critfpp.cli import main


def run_cli(args):
    return main(args)


def test_classify_subcommand(tmp_path, capsys):
    rc = run_cli(["classify", "--f0", "0.5", "--ak", "constant:1"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    tags = [c["tag"] for c in out["report"]["conclusions"]]
    assert tags == ["Thm 1.1", "Thm 1.2(1)"]


def test_invalid_config_exit_2(capsys):
    assert run_cli(["classify", "--f0", "0.5", "--ak", "bogus:1"]) == 2
    err = capsys.readouterr().err
    assert "invalid-config" in err
    assert run_cli(["corrlen"]) == 2  # missing required --p


def test_budget_exceeded_exit_3(capsys):
    rc = run_cli(["crossing", "--p", "0.5", "--n", "64", "--samples", "100000", "--budget-cells", "1000"])
    assert rc == 3
    assert "budget-exceeded" in capsys.readouterr().err


def test_arm_small_estimate(tmp_path, capsys):
    rc = run_cli(
        ["arm", "--spec", "open1", "--m", "0", "--n", "1", "--p", "0.5", "--samples", "20000", "--seed", "4"]
    )
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert abs(out["estimate"] - 63 / 64) < 0.01


def test_outputs_and_round_trip(tmp_path, capsys):
    base = tmp_path / "run1"
    rc = run_cli(
        ["crossing", "--p", "0.5", "--n", "6", "--samples", "400", "--seed", "77", "--out", str(base)]
    )
    assert rc == 0
    csv1 = (tmp_path / "run1.csv").read_bytes()
    summary = json.loads((tmp_path / "run1.json").read_text())
    assert summary["seed"] == 77
    assert summary["resolved_config"]["params"]["n"] == 6
    # rerun from the emitted resolved config: byte-identical CSV body
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(summary["resolved_config"]))
    base2 = tmp_path / "run2"
    rc = run_cli(["crossing", "--config", str(cfg_path), "--out", str(base2)])
    assert rc == 0
    csv2 = (tmp_path / "run2.csv").read_bytes()
    assert csv1 == csv2
    capsys.readouterr()


def test_unknown_config_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"p": 0.5, "n": 4, "bogus_key": 1}))
    assert run_cli(["crossing", "--config", str(cfg)]) == 2
    capsys.readouterr()


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"p": 0.5, "n": 4, "seed": 5, "samples": 100}))
    rc = run_cli(["crossing", "--config", str(cfg), "--samples", "150"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["n_samples"] == 150
    assert out["seed"] == 5


def test_dyn_scan_csv(tmp_path, capsys):
    base = tmp_path / "scan"
    rc = run_cli(
        ["dyn-scan", "--dist", "bernoulli:0.5", "--n", "6", "--s", "0.5", "--seed", "3", "--out", str(base)]
    )
    assert rc == 0
    lines = (tmp_path / "scan.csv").read_text().splitlines()
    assert lines[0] == "t_start,t_end,value"
    assert len(lines) >= 2
    first = lines[1].split(",")
    assert float(first[0]) == 0.0
    capsys.readouterr()


def test_csv_format_stdout(capsys):
    rc = run_cli(["classify", "--f0", "0.5", "--ak", "geometric:1,0.5", "--format", "csv"])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "tag,statement"
    assert "Thm 1.3" in out


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "critfpp.cli", "classify", "--f0", "0.5", "--ak", "powerlog:1,1,1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    data = json.loads(proc.stdout)
    tags = [c["tag"] for c in data["report"]["conclusions"]]
    assert tags == ["Thm 1.1", "Thm 1.2(2)"]


def test_pn_grid_and_slope(capsys):
    rc = run_cli(["pn", "--n-grid", "8,16", "--samples", "400", "--seed", "2"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert "loglog_slope" in out
    assert out["loglog_slope"] < 0


def test_qm_parsing(capsys):
    rc = run_cli(["qm", "--k", "1", "--triples", "2:4:8", "--samples", "500", "--seed", "3"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["status"] == "ok"
    rc = run_cli(["qm", "--k", "1", "--triples", "2-4-8"])
    assert rc == 2
    capsys.readouterr()


def test_grid_syntax(capsys):
    rc = run_cli(
        ["dyn-dim", "--dist", "bernoulli:0.5", "--n", "3", "--x", "0", "--s", "0.25",
         "--eps", "2^-3..2^-5", "--samples", "5", "--seed", "8"]
    )
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert "slope" in out


def test_all_subcommands_smoke(tmp_path, capsys):
    cases = [
        ["corrlen", "--p", "0.8", "--seed", "2"],
        ["arm-exponent", "--spec", "open1", "--n-grid", "2,4,8,16", "--samples", "300", "--seed", "3"],
        ["growth", "--dist", "ak-geometric:1,0.5", "--exponents", "2,3", "--samples", "5", "--seed", "4"],
        ["tail-profile", "--dist", "bernoulli:0.5", "--n", "3", "--p", "0.7", "--samples", "30", "--seed", "5"],
        ["count-vn", "--n", "2", "--p", "0.6", "--lhat", "2", "--samples", "3", "--seed", "6"],
        ["covering-survey", "--dist", "bernoulli:0.5", "--n", "3", "--x", "0", "--s", "0.25",
         "--eps", "0.25,0.125", "--samples", "4", "--seed", "7"],
        ["interval-count", "--n", "2", "--M", "4", "--samples", "5", "--seed", "8"],
        ["hausdorff-cover", "--L", "3", "--n", "1", "--x", "0.5", "--samples", "30", "--seed", "9"],
        ["noise-decay", "--n", "3", "--t-grid", "0.01,0.1", "--samples", "100", "--seed", "10"],
    ]
    for args in cases:
        rc = run_cli(args)
        out = capsys.readouterr()
        assert rc == 0, (args, out.err)
        json.loads(out.out)
