from ikep.cli import main


def test_gen_and_solve(tmp_path, capsys):
    inst = tmp_path / "i.kep"
    assert main(["gen", "--sizes", "6:6", "--seed", "3",
                 "--out", str(inst)]) == 0
    assert inst.read_text().startswith("kep 12 2")
    assert main(["solve", str(inst), "--bounds", "3:3"]) == 0
    out = capsys.readouterr().out
    assert "transplants:" in out


def test_solve_exports_lp(tmp_path):
    inst = tmp_path / "i.kep"
    main(["gen", "--sizes", "5:5", "--seed", "1", "--out", str(inst)])
    lp = tmp_path / "m.lp"
    assert main(["solve", str(inst), "--bounds", "3:3",
                 "--export-lp", str(lp)]) == 0
    text = lp.read_text()
    assert text.startswith("Maximize") and text.rstrip().endswith("End")


def test_edge_model_rejects_unbounded_cap(tmp_path, capsys):
    inst = tmp_path / "i.kep"
    main(["gen", "--sizes", "4:4", "--out", str(inst)])
    code = main(["solve", str(inst), "--bounds", "3:inf", "--model", "edge"])
    assert code == 2
    err = capsys.readouterr().err
    assert "atcz" in err and "mixed" in err


def test_missing_instance_gives_io_exit(capsys):
    assert main(["solve", "/nonexistent/file.kep"]) == 4


def test_bad_bounds_gives_config_exit(tmp_path, capsys):
    inst = tmp_path / "i.kep"
    main(["gen", "--sizes", "4:4", "--out", str(inst)])
    # three caps for a two-country instance
    assert main(["solve", str(inst), "--bounds", "3:3:3"]) == 2


def test_simulate_and_report(tmp_path, capsys):
    out = tmp_path / "sim"
    assert main(["simulate", "--pairs", "8", "--instances", "1",
                 "--stages", "3", "--out", str(out)]) == 0
    assert (out / "stage_report.csv").exists()
    assert (out / "run_report.csv").exists()
    assert (out / "stages_merged.svg").read_text().startswith("<svg")
    assert main(["report", str(out / "run_report.csv")]) == 0
    assert "merged" in capsys.readouterr().out


def test_sweep_writes_heatmaps(tmp_path):
    out = tmp_path / "sw"
    assert main(["sweep", "--pairs", "6", "--instances", "1", "--stages", "3",
                 "--bounds-grid", "2:2,3:3", "--out", str(out)]) == 0
    assert (out / "heatmap_merged.svg").exists()
    assert (out / "run_2-2_base.csv").exists()


def test_config_file_with_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "sim.cfg"
    cfg.write_text("stages = 3\npairs = 6\ninstances = 1\n# comment\n")
    out = tmp_path / "sim"
    assert main(["simulate", "--config", str(cfg), "--stages", "2",
                 "--out", str(out)]) == 0
    import csv
    with open(out / "stage_report.csv") as fh:
        stages = {int(r["stage"]) for r in csv.DictReader(fh)}
    assert stages == {0, 1}      # the explicit flag beat the config file
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense = 1\n")
    assert main(["simulate", "--config", str(bad)]) == 2
