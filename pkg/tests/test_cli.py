"""Command-line behavior: determinism, validation, exit codes, table shapes."""

import pytest

from switchsim.cli import main
from switchsim.metrics import CSV_HEADER

FAST = ["--duration", "60", "--set", "warmup_frac=0.02"]


def invoke(*argv):
    return main(list(argv))


# ------------------------------------------------------------------------ run

def test_run_writes_header_and_one_row(tmp_path):
    out = tmp_path / "run.csv"
    rc = invoke("run", "--policy", "QS", "--seed", "42", "--out", str(out), *FAST)
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 2
    assert lines[1].startswith("QS,ps,2,1,")


def test_run_is_byte_deterministic(tmp_path):
    args = ["run", "--policy", "FSDCH", "--seed", "7", *FAST]
    csv_a, trace_a = tmp_path / "a.csv", tmp_path / "a.trace"
    csv_b, trace_b = tmp_path / "b.csv", tmp_path / "b.trace"
    assert invoke(*args, "--out", str(csv_a), "--trace", str(trace_a)) == 0
    assert invoke(*args, "--out", str(csv_b), "--trace", str(trace_b)) == 0
    assert csv_a.read_bytes() == csv_b.read_bytes()
    assert trace_a.read_bytes() == trace_b.read_bytes()
    assert trace_a.stat().st_size > 0


def test_run_rejects_invalid_config(tmp_path, capsys):
    rc = invoke("run", "--set", "n_dch=0", "--out", str(tmp_path / "x.csv"))
    assert rc == 1
    assert "n_dch" in capsys.readouterr().err


def test_run_reads_config_file(tmp_path):
    cfgfile = tmp_path / "scenario.cfg"
    cfgfile.write_text("policy = FS\nseed = 3\nduration_s = 60\nwarmup_frac = 0.02\n")
    out = tmp_path / "run.csv"
    assert invoke("run", "--config", str(cfgfile), "--out", str(out)) == 0
    assert out.read_text().splitlines()[1].startswith("FS,ps,")


def test_flag_overrides_config_file(tmp_path):
    cfgfile = tmp_path / "scenario.cfg"
    cfgfile.write_text("seed = 3\nduration_s = 60\nwarmup_frac = 0.02\n")
    out = tmp_path / "run.csv"
    assert invoke("run", "--config", str(cfgfile), "--seed", "99",
                  "--out", str(out)) == 0
    row = out.read_text().splitlines()[1]
    assert ",99," in row


def test_unknown_set_key_rejected(tmp_path, capsys):
    rc = invoke("run", "--set", "bogus=1", "--out", str(tmp_path / "x.csv"))
    assert rc == 1
    assert "bogus" in capsys.readouterr().err


def test_empty_run_is_a_runtime_failure(tmp_path, capsys):
    rc = invoke("run", "--set", "traffic_enabled=false",
                "--out", str(tmp_path / "x.csv"), "--duration", "30")
    assert rc == 2
    assert "no completed bursts" in capsys.readouterr().err


# ---------------------------------------------------------------------- sweep

def test_sweep_row_counts(tmp_path):
    out = tmp_path / "sweep.csv"
    rc = invoke("sweep", "--param", "s", "--values", "2,5", "--policies",
                "FS,FSDCH", "--seeds", "1,2,3", "--jobs", "2",
                "--out", str(out), *FAST)
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    body = lines[1:]
    # 2 policies x 2 values x 3 seeds runs, plus mean and stderr per cell
    assert len(body) == 12 + 4 * 2
    assert sum(1 for l in body if ",mean," in l) == 4
    assert sum(1 for l in body if ",stderr," in l) == 4


def test_sweep_output_order_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", "--param", "t_h", "--values", "2,4", "--policies", "QS",
            "--seeds", "1,2", *FAST]
    assert invoke(*args, "--jobs", "2", "--out", str(a)) == 0
    assert invoke(*args, "--jobs", "1", "--out", str(b)) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_rejects_empty_seeds(tmp_path, capsys):
    rc = invoke("sweep", "--param", "s", "--seeds", ",", "--out",
                str(tmp_path / "x.csv"), *FAST)
    assert rc == 1
    assert "seeds" in capsys.readouterr().err


# -------------------------------------------------------------------- compare

def test_compare_table_shape(tmp_path):
    out = tmp_path / "cmp.csv"
    rc = invoke("compare", "--policies", "QS,FSDCH", "--values", "2,8",
                "--seeds", "1,2", "--jobs", "2", "--out", str(out), *FAST)
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("policy,param,best_value,mean_response_s")
    assert len([l for l in lines if not l.startswith("#")]) == 3   # header + 2 rows
    assert lines[-1].startswith("# best:")


def test_compare_single_seed_warns(tmp_path, capsys):
    rc = invoke("compare", "--policies", "QS,MT", "--values", "4",
                "--seeds", "5", "--out", str(tmp_path / "cmp.csv"), *FAST)
    assert rc == 0
    assert "single seed" in capsys.readouterr().err


def test_compare_needs_two_policies(tmp_path, capsys):
    rc = invoke("compare", "--policies", "QS", "--out", str(tmp_path / "x.csv"))
    assert rc == 1


# ------------------------------------------------------------------------ calc

def test_calc_reference_values(capsys):
    assert invoke("calc", "10", "1000") == 0
    out = capsys.readouterr().out
    lines = {l.split()[0]: l.split()[1] for l in out.splitlines() if " " in l
             and not l.startswith("burst")}
    assert float(lines["fach_cbr_s"]) == pytest.approx(8.888, abs=0.01)
    assert float(lines["fach_no_cbr_s"]) == pytest.approx(2.424, abs=0.01)
    assert float(lines["dch_setup_s"]) == pytest.approx(0.458, abs=0.001)
    assert float(lines["speedup_cbr"]) == pytest.approx(19.4, abs=0.1)


def test_calc_rejects_zero_packets(capsys):
    assert invoke("calc", "0", "1000") == 1
