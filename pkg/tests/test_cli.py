import numpy as np
import pytest

from halfcrack.cli import ConfigError, main, make_default_config, parse_config


@pytest.fixture()
def default_ini(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(make_default_config())
    return path


class TestParseConfig:
    def test_default_round_trip(self):
        cfg = parse_config(make_default_config())
        assert cfg.region.n1 == 9
        assert cfg.m.a == 0.2
        assert cfg.box.beta_dist == 0.5
        assert cfg.quad_order == 4
        # the resolved text parses back to the same setup
        cfg2 = parse_config(cfg.resolved_text())
        assert cfg2.m == cfg.m
        assert cfg2.region == cfg.region
        assert cfg2.multistart == cfg.multistart

    def test_unknown_key_is_line_anchored(self):
        text = "[region]\nx1_min = 0\nbogus = 1\n"
        with pytest.raises(ConfigError, match="line 3"):
            parse_config(text)

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError, match="unknown section"):
            parse_config("[nonsense]\nkey = 1\n")

    def test_incomplete_plane_rejected(self):
        with pytest.raises(ConfigError, match="plane needs all"):
            parse_config("[crack]\na = 0.1\n")

    def test_bad_number_reported(self):
        with pytest.raises(ConfigError, match="must be a number"):
            parse_config("[region]\nx1_min = abc\n")

    def test_box_depth_violation_rejected(self):
        text = (
            "[crack]\na_min = -0.1\na_max = 0.1\nb_min = -0.1\nb_max = 0.1\n"
            "d_min = -0.3\nd_max = -0.1\nbeta_dist = 0.5\n"
        )
        with pytest.raises(ConfigError, match="clearance"):
            parse_config(text)


class TestForwardCommand:
    def test_writes_outputs_and_passes_checks(self, default_ini, tmp_path):
        out = tmp_path / "fwd"
        assert main(["forward", "--config", str(default_ini), "--out", str(out)]) == 0
        files = {p.name for p in out.iterdir()}
        assert {"boundary_data.csv", "field_slice.csv", "checks_report.txt",
                "resolved_config.ini"} <= files
        report = (out / "checks_report.txt").read_text()
        assert "harmonic_pass = yes" in report
        assert "neumann_pass = yes" in report
        assert "decay_pass = yes" in report
        assert "jump_pass = yes" in report

    def test_deterministic_outputs(self, default_ini, tmp_path, monkeypatch):
        # identical config and (relative) out name: outputs must be
        # byte-identical across repeated runs
        for sub in ("a", "b"):
            d = tmp_path / sub
            d.mkdir()
            monkeypatch.chdir(d)
            assert main(["forward", "--config", str(default_ini), "--out", "run"]) == 0
        monkeypatch.chdir(tmp_path)
        for name in ("boundary_data.csv", "field_slice.csv", "checks_report.txt",
                     "resolved_config.ini"):
            assert (tmp_path / "a" / "run" / name).read_bytes() == (
                tmp_path / "b" / "run" / name
            ).read_bytes()

    def test_crack_above_surface_names_clearance(self, tmp_path, capsys):
        text = make_default_config().replace("d = -1.5", "d = -0.1")
        ini = tmp_path / "bad.ini"
        ini.write_text(text)
        code = main(["forward", "--config", str(ini), "--out", str(tmp_path / "o")])
        assert code == 2
        err = capsys.readouterr().err
        assert "clearance" in err

    def test_missing_config_is_io_error(self, tmp_path):
        assert main(["forward", "--config", str(tmp_path / "nope.ini"),
                     "--out", str(tmp_path / "o")]) == 4


class TestInvertCommand:
    def test_round_trip_from_forward_data(self, default_ini, tmp_path):
        fwd = tmp_path / "fwd"
        assert main(["forward", "--config", str(default_ini), "--out", str(fwd)]) == 0
        out = tmp_path / "inv"
        code = main(
            ["invert", "--config", str(default_ini), "--out", str(out),
             "--data", str(fwd / "boundary_data.csv")]
        )
        assert code == 0
        summary = dict(
            line.split(" = ") for line in (out / "result_summary.txt").read_text().splitlines()
        )
        assert abs(float(summary["a"]) - 0.2) <= 1e-3
        assert abs(float(summary["b"]) + 0.1) <= 1e-3
        assert abs(float(summary["d"]) + 1.5) <= 1e-3
        assert summary["converged"] == "yes"
        assert (out / "slip_recovered.csv").exists()

    def test_mismatched_data_grid_rejected(self, default_ini, tmp_path):
        data = tmp_path / "data.csv"
        data.write_text("x1,x2,value\n0.0,0.0,1.0\n")
        assert main(["invert", "--config", str(default_ini),
                     "--out", str(tmp_path / "o"), "--data", str(data)]) == 2

    def test_missing_data_is_io_error(self, default_ini, tmp_path):
        assert main(["invert", "--config", str(default_ini),
                     "--out", str(tmp_path / "o"), "--data", str(tmp_path / "no.csv")]) == 4


class TestStabilityCommand:
    def test_emits_spectra_and_positive_constant(self, tmp_path, default_ini):
        out = tmp_path / "stab"
        text = make_default_config().replace("num_pairs = 200", "num_pairs = 40")
        ini = tmp_path / "stab.ini"
        ini.write_text(text)
        assert main(["stability", "--config", str(ini), "--out", str(out)]) == 0
        summary = (out / "summary.txt").read_text()
        c_emp = float(summary.splitlines()[0].split(" = ")[1])
        assert c_emp > 0
        spectrum = np.genfromtxt(out / "spectrum.csv", delimiter=",", names=True)
        assert spectrum["sigma_rel"][0] == 1.0
        assert np.min(spectrum["sigma_rel"]) < 1e-6
        ray = np.genfromtxt(out / "inf_ray.csv", delimiter=",", names=True, dtype=None,
                            encoding="utf-8")
        assert np.all(ray["ratio"] > 0)

    def test_seed_override_changes_pairs(self, tmp_path):
        text = make_default_config().replace("num_pairs = 200", "num_pairs = 20")
        ini = tmp_path / "s.ini"
        ini.write_text(text)
        out1, out2 = tmp_path / "s1", tmp_path / "s2"
        assert main(["stability", "--config", str(ini), "--out", str(out1)]) == 0
        assert main(["stability", "--config", str(ini), "--out", str(out2),
                     "--seed", "123"]) == 0
        b1 = (out1 / "pair_scan.csv").read_bytes()
        b2 = (out2 / "pair_scan.csv").read_bytes()
        assert b1 != b2
        resolved = (out2 / "resolved_config.ini").read_text()
        assert "seed = 123" in resolved


class TestJumpsCommand:
    def test_emits_all_kinds_with_small_errors(self, tmp_path, default_ini):
        out = tmp_path / "jumps"
        assert main(["jumps", "--config", str(default_ini), "--out", str(out)]) == 0
        rows = np.genfromtxt(out / "jumps.csv", delimiter=",", names=True, dtype=None,
                             encoding="utf-8")
        kinds = set(rows["kind"])
        assert len(kinds) == 8
        assert len(rows) == 24  # 8 kinds x 3 offsets
        assert np.max(rows["rel_err"]) <= 1e-2


class TestCounterexampleCommand:
    def test_report_and_fields(self, tmp_path, default_ini):
        out = tmp_path / "ce"
        assert main(["counterexample", "--config", str(default_ini), "--out", str(out)]) == 0
        report = (out / "report.txt").read_text()
        fields = dict(
            line.split(" = ") for line in report.splitlines() if " = " in line
        )
        assert float(fields["max_rel_u_diff"]) <= 1e-3
        assert abs(float(fields["interior_probe_u_diff"]) + 3.0) <= 1e-3
        rows = np.genfromtxt(out / "fields.csv", delimiter=",", names=True)
        assert len(rows) == len(parse_config(make_default_config()).sensors)


class TestSlipCsvPath:
    def test_nodal_slip_round_trip(self, tmp_path):
        from halfcrack import SlipGrid, SourceRegion
        from halfcrack.cli import write_csv

        region = SourceRegion(-1.0, 1.0, -1.0, 1.0, 9, 9)
        slip = SlipGrid.from_family(region, "sine", amplitude=0.7, mode1=2, mode2=1)
        rows = []
        for i, x1 in enumerate(region.x1_nodes()):
            for j, x2 in enumerate(region.x2_nodes()):
                rows.append((x1, x2, slip.values[i, j]))
        slip_csv = tmp_path / "slip.csv"
        write_csv(slip_csv, ["x1", "x2", "value"], rows)
        text = make_default_config().replace(
            "family = bump", f"path = {slip_csv}"
        )
        for line in ("amplitude = 1.0", "center1 = 0.1", "center2 = -0.05", "radius = 0.8"):
            text = text.replace(line + "\n", "")
        cfg = parse_config(text)
        assert np.allclose(cfg.slip().values, slip.values)
