import os

from zenoanneal.cli import main


def run(args):
    return main([str(a) for a in args])


def read_lines(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read().splitlines()


def test_zeno_onset_csv(tmp_path, capsys):
    out = tmp_path / "onset.csv"
    code = run(["zeno-onset", "--variant", "tpa", "--tpa-ratios", "0,5",
                "--tpa-truncation", "8", "--nt", "11", "--out", out])
    assert code == 0
    lines = read_lines(out)
    assert lines[0].startswith("# config: command=zeno-onset")
    assert lines[1] == "variant,gamma_over_c,t,p0,p1,p_higher"
    assert len(lines) == 2 + 2 * 11


def test_zeno_onset_deterministic(tmp_path):
    out = tmp_path / "a.csv"
    args = ["zeno-onset", "--variant", "sfg", "--sfg-ratios", "0,2",
            "--sfg-truncation", "5", "--nt", "7", "--out", out]
    assert run(args) == 0
    first = open(out, "rb").read()
    assert run(args) == 0
    assert open(out, "rb").read() == first


def test_out_dir_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("ZENOANNEAL_OUT", str(tmp_path / "sub"))
    code = run(["mitigate", "--n-copies", "1", "--out", "mit.csv"])
    assert code == 0
    assert os.path.exists(tmp_path / "sub" / "mit.csv")


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[zeno-onset]\nvariant = tpa\ntpa-ratios = 0\n"
                   "tpa-truncation = 6\nnt = 5\n")
    out = tmp_path / "o.csv"
    code = run(["zeno-onset", "--config", cfg, "--nt", "9", "--out", out])
    assert code == 0
    lines = read_lines(out)
    assert "nt=9" in lines[0]
    assert len(lines) == 2 + 9


def test_config_error_exit_code(tmp_path):
    assert run(["zeno-onset", "--config", tmp_path / "missing.ini"]) == 1
    assert run(["constraint-sweep", "--graph", tmp_path / "missing.txt"]) == 1
    assert run(["zeno-onset", "--variant", "bogus", "--out", tmp_path / "x.csv"]) == 1
    assert run(["zeno-onset", "--nt", "1", "--out", tmp_path / "x.csv"]) == 1


def test_wmis_command(tmp_path):
    out = tmp_path / "wmis.csv"
    code = run(["wmis", "--w0-grid", "0.5,1.5", "--n-cycle", "200",
                "--r-tot", "40pi", "--out", out])
    assert code == 0
    lines = read_lines(out)
    assert lines[1] == "w0,p00,p01,p10,p11,success"
    rows = [ln.split(",") for ln in lines[2:]]
    assert float(rows[0][2]) > 0.8   # w0 = 0.5 ends in 01
    assert float(rows[1][3]) > 0.8   # w0 = 1.5 ends in 10


def test_qubo_command_builtin(tmp_path):
    out = tmp_path / "qubo.csv"
    code = run(["qubo", "--n-cycle", "600", "--r-tot", "60pi", "--out", out])
    assert code == 0
    lines = read_lines(out)
    rows = {ln.split(",")[0]: ln.split(",") for ln in lines[2:]}
    assert float(rows["01"][3]) == 1 and float(rows["10"][3]) == 1
    assert float(rows["01"][4]) > 0.99


def test_qubo_command_from_file(tmp_path):
    qfile = tmp_path / "q.txt"
    qfile.write_text("-1 0\n0 -1\n")
    out = tmp_path / "qubo.csv"
    assert run(["qubo", "--qubo", qfile, "--n-cycle", "400",
                "--r-tot", "40pi", "--out", out]) == 0
    lines = read_lines(out)
    rows = {ln.split(",")[0]: ln.split(",") for ln in lines[2:]}
    assert float(rows["11"][2]) > 0.99


def test_mitigate_command(tmp_path):
    out = tmp_path / "mit.csv"
    assert run(["mitigate", "--n-copies", "1,2", "--out", out]) == 0
    lines = read_lines(out)
    assert lines[1].startswith("n_copy,pattern_index")
    # every decoded set independent
    assert all(ln.split(",")[4] == "1" for ln in lines[2:])


def test_timebin_command(tmp_path, capsys):
    out = tmp_path / "prog.txt"
    assert run(["timebin-compile", "--complete", "5", "--out", out]) == 0
    text = capsys.readouterr().out
    assert "verification: ok" in text
    assert "10/10 edges covered" in text


def test_timebin_command_graph_file(tmp_path):
    gfile = tmp_path / "g.txt"
    gfile.write_text("0 1\n1 2\n")
    out = tmp_path / "prog.txt"
    assert run(["timebin-compile", "--graph", gfile, "--out", out]) == 0
    lines = read_lines(out)
    assert lines[1] == "# time-bin switch program"


def test_oracle_check_command(tmp_path):
    out = tmp_path / "oc.csv"
    assert run(["oracle-check", "--gammas", "1.0", "--eta-ratios", "0,1",
                "--nt", "41", "--out", out]) == 0
    lines = read_lines(out)
    rows = [ln.split(",") for ln in lines[2:]]
    assert rows[0][2] == "underdamped" and rows[1][2] == "critical"
    assert all(float(r[3]) < 1e-8 for r in rows)


def test_constraint_sweep_command(tmp_path):
    out = tmp_path / "cs.csv"
    code = run(["constraint-sweep", "--gamma-ts",
                "lin:0.5553603672697958:1.1107207345395915:2",
                "--n-cycles", "16,64", "--r-tot", "20pi", "--out", out])
    assert code == 0
    lines = read_lines(out)
    assert lines[1].startswith("gamma_t,n_cycle,success")
    assert len(lines) == 2 + 4


def test_anneal_command(tmp_path, capsys):
    out = tmp_path / "anneal.csv"
    code = run(["anneal", "--n-cycles", "16,32", "--r-grid", "lin:2pi:12pi:4",
                "--out", out])
    assert code == 0
    text = capsys.readouterr().out
    assert "linear fit" in text
    lines = read_lines(out)
    kinds = {ln.split(",")[0] for ln in lines[2:]}
    assert kinds == {"point", "critical", "fit"}


def test_constraint_sweep_threads_deterministic(tmp_path):
    args = ["constraint-sweep", "--gamma-ts", "1.1107207345395915",
            "--n-cycles", "16,32", "--r-tot", "20pi"]
    a, b = tmp_path / "t1.csv", tmp_path / "t2.csv"
    assert run(args + ["--threads", "1", "--out", a]) == 0
    assert run(args + ["--threads", "2", "--out", b]) == 0
    # payload identical regardless of worker count (config line differs)
    assert read_lines(a)[1:] == read_lines(b)[1:]


def test_drive_sweep_command(tmp_path):
    out = tmp_path / "ds.csv"
    cfg = tmp_path / "ds.ini"
    cfg.write_text("[drive-sweep]\n"
                   "eta-ratios = 0\n"
                   "gammas = log:1:64:4\n"
                   "markov-ratios = 8\n"
                   "gamma-tpas = log:0.5:8:3\n"
                   "gamma99-lo = 1\ngamma99-hi = 64\ngamma99-iters = 8\n")
    assert run(["drive-sweep", "--config", cfg, "--out", out]) == 0
    lines = read_lines(out)
    kinds = {ln.split(",")[0] for ln in lines[2:]}
    assert {"sweep", "markov", "tpa_ref", "gamma99"} <= kinds
