from fppkit.cli import main
from fppkit.config import parse_config, read_csv, spec_from_config, write_csv


def test_parse_config():
    cfg = parse_config(
        """
        # a comment
        atoms = [(1.0, 0.5), (2.0, 0.5)]
        trials = 12
        pattern = av_edge
        pattern_params = {"M": 2.0}
        n_list = [8, 10]
        """
    )
    assert cfg["trials"] == 12
    assert cfg["pattern"] == "av_edge"
    spec = spec_from_config(cfg)
    assert spec.rho == 1.0 and spec.t_max == 2.0


def test_csv_round_trip(tmp_path):
    rows = [dict(a=1, b=2.5, c="x"), dict(a=2, b=1e-9, c="y")]
    path = str(tmp_path / "t.csv")
    write_csv(path, rows, "test")
    with open(path) as fh:
        assert fh.readline().startswith("# fppkit schema=test")
    back = read_csv(path)
    assert back[0]["a"] == 1 and back[1]["b"] == 1e-9


def _write(tmp_path, text):
    p = tmp_path / "cfg.txt"
    p.write_text(text)
    return str(p)


def test_cli_deficiency(tmp_path, capsys):
    cfg = _write(
        tmp_path,
        """
        atoms = [(1.0, 0.5), (2.0, 0.5)]
        pattern = av_edge
        pattern_params = {"M": 2.0}
        n_list = [8]
        trials = 5
        seed = 3
        """,
    )
    out = str(tmp_path / "out.csv")
    assert main(["deficiency", "--config", cfg, "--out", out]) == 0
    rows = read_csv(out)
    assert len(rows) == 5
    assert {"n", "trial", "seed", "min_count"} <= set(rows[0])


def test_cli_seed_and_trials_override(tmp_path):
    cfg = _write(
        tmp_path,
        """
        atoms = [(1.0, 0.5), (2.0, 0.5)]
        pattern = av_edge
        pattern_params = {"M": 2.0}
        n_list = [8]
        trials = 5
        seed = 3
        """,
    )
    out1, out2 = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    main(["deficiency", "--config", cfg, "--out", out1, "--seed", "9", "--trials", "3"])
    main(["deficiency", "--config", cfg, "--out", out2, "--seed", "9", "--trials", "3"])
    assert read_csv(out1) == read_csv(out2)
    assert len(read_csv(out1)) == 3


def test_cli_shift(tmp_path):
    cfg = _write(
        tmp_path,
        """
        atoms = [(1.0, 0.5), (2.0, 0.5)]
        n_list = [10]
        b_list = [0.1, 0.5]
        trials = 4
        seed = 1
        """,
    )
    out = str(tmp_path / "s.csv")
    assert main(["shift", "--config", cfg, "--out", out]) == 0
    rows = read_csv(out)
    assert len(rows) == 8
    assert all(r["holds"] == 1 for r in rows)


def test_cli_gap_and_shape(tmp_path):
    cfg = _write(
        tmp_path,
        """
        atoms = [(1.0, 0.5), (2.0, 0.5)]
        k = 4
        l = 2
        r = 1.0
        s = 2.0
        n_list = [10]
        trials = 4
        seed = 1
        directions = [(1, 0)]
        """,
    )
    assert main(["gap", "--config", cfg, "--out", str(tmp_path / "g.csv")]) == 0
    assert main(["shape", "--config", cfg, "--out", str(tmp_path / "sh.csv")]) == 0


def test_cli_calibrate(tmp_path, capsys):
    cfg = _write(tmp_path, "atoms = [(1.0, 0.5), (2.0, 0.5)]\ntrials = 40\nseed = 2\n")
    out = str(tmp_path / "cal.csv")
    assert main(["calibrate", "--config", cfg, "--out", out]) == 0
    row = read_csv(out)[0]
    assert 0 < row["delta"] < 1 and 0 < row["alpha"] <= 1
    text = capsys.readouterr().out
    assert "delta" in text and "alpha" in text


def test_cli_modify_demo(tmp_path):
    cfg = _write(
        tmp_path,
        """
        atoms = [(1.0, 0.05)]
        exptail = [(3.0, 0.5, 0.95)]
        pattern = av_edge
        pattern_params = {"M": 8.0}
        instances = 2
        seed = 11
        delta = 1.0
        """,
    )
    out = str(tmp_path / "demo.csv")
    assert main(["modify-demo", "--config", cfg, "--out", out]) == 0
    rows = read_csv(out)
    assert len(rows) == 2 and all(r["passed"] == 1 for r in rows)
    with open(out + ".reports.txt") as fh:
        text = fh.read()
    assert "rerouting wins" in text and "takes the pattern inside B2" in text


def test_cli_jobs_deterministic_merge(tmp_path):
    cfg = _write(
        tmp_path,
        """
        atoms = [(1.0, 0.5), (2.0, 0.5)]
        pattern = av_edge
        pattern_params = {"M": 2.0}
        n_list = [6, 8, 10]
        trials = 4
        seed = 5
        """,
    )
    seq, par = str(tmp_path / "seq.csv"), str(tmp_path / "par.csv")
    main(["deficiency", "--config", cfg, "--out", seq, "--jobs", "1"])
    main(["deficiency", "--config", cfg, "--out", par, "--jobs", "3"])
    assert read_csv(seq) == read_csv(par)


def test_cli_large_edges_and_typical_rate(tmp_path):
    cfg = _write(
        tmp_path,
        """
        atoms = [(1.0, 0.5), (2.0, 0.5)]
        M = 2.0
        n_list = [8]
        trials = 4
        seed = 2
        pattern = av_edge
        pattern_params = {"M": 2.0}
        delta = 0.25
        N_list = [2]
        radii = (2, 4, 8)
        boxes = 4
        c_mu = 1.0
        C_mu = 1.6
        """,
    )
    assert main(["large-edges", "--config", cfg, "--out", str(tmp_path / "le.csv")]) == 0
    assert main(["typical-rate", "--config", cfg, "--out", str(tmp_path / "tr.csv")]) == 0
    rows = read_csv(str(tmp_path / "tr.csv"))
    assert {"clause1", "clause2", "clause3", "typical"} <= set(rows[0])
