"""Config parsing, validation, registry, and exit-code contract."""

import glob
import os

import pytest

from wmcflab import cli
from wmcflab.errors import NumericError


def write(tmp_path, text, name="config.txt"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestParseConfig:
    def test_key_value_with_comments(self, tmp_path):
        path = write(tmp_path, """
# comment line
experiment=equipartition
grid.n=128   # trailing comment
eps=0.08,0.04
""")
        entries = cli.parse_config(path)
        assert entries["experiment"] == "equipartition"
        assert entries["grid.n"] == "128"
        cfg = cli.config_from_entries(entries)
        assert cfg.grid_n == 128
        assert cfg.eps_list == (0.08, 0.04)

    def test_malformed_line_raises(self, tmp_path):
        path = write(tmp_path, "this is not a key value pair\n")
        with pytest.raises(ValueError):
            cli.parse_config(path)

    def test_missing_experiment_raises(self, tmp_path):
        path = write(tmp_path, "grid.n=64\n")
        with pytest.raises(ValueError):
            cli.config_from_entries(cli.parse_config(path))


class TestValidateConfig:
    def test_valid_file_gives_empty_report(self, tmp_path):
        path = write(tmp_path, "experiment=equipartition\ngrid.n=512\n"
                               "eps=0.08,0.04,0.02,0.01\n")
        assert cli.validate_config(path) == []

    def test_underresolved_eps_flagged(self, tmp_path):
        path = write(tmp_path, "experiment=equipartition\ngrid.n=128\n"
                               "eps=0.02,0.01\n")
        problems = cli.validate_config(path)
        assert any("4*spacing" in p for p in problems)

    def test_unknown_well_names_registry(self, tmp_path):
        path = write(tmp_path, "experiment=equipartition\n"
                               "well.name=sextic\n")
        problems = cli.validate_config(path)
        assert any("sextic" in p and "quartic_constant" in p
                   for p in problems)

    def test_unknown_experiment_names_registry(self, tmp_path):
        path = write(tmp_path, "experiment=bogus\n")
        problems = cli.validate_config(path)
        assert any("bogus" in p and "equipartition" in p for p in problems)

    def test_unknown_namespace_flagged(self, tmp_path):
        path = write(tmp_path, "experiment=equipartition\nfoo.bar=1\n")
        assert any("foo.bar" in p for p in cli.validate_config(path))


class TestListExperiments:
    def test_registry_contents(self):
        text = cli.list_experiments()
        lines = text.splitlines()
        assert len(lines) >= 6
        assert any("first_variation" in ln and "Theorem 3.1" in ln
                   for ln in lines)
        assert any("weak_strong" in ln and "Theorem 5.2" in ln
                   for ln in lines)

    def test_main_list_exits_zero(self, capsys):
        assert cli.main(["list"]) == 0
        assert "gibbs_thomson" in capsys.readouterr().out


class TestRun:
    def test_malformed_config_exits_2(self, tmp_path, capsys):
        path = write(tmp_path, "no equals sign here\n")
        assert cli.main(["run", path]) == 2

    def test_invalid_config_exits_2(self, tmp_path):
        path = write(tmp_path, "experiment=nope\n")
        assert cli.main(["run", path]) == 2

    def test_successful_run_writes_artifacts(self, tmp_path, capsys):
        out = tmp_path / "results"
        path = write(tmp_path, f"experiment=surface_tension\n"
                               f"out_dir={out}\n")
        assert cli.main(["run", path]) == 0
        files = glob.glob(str(out / "surface_tension_*.csv"))
        assert len(files) == 1
        summary = (out / "summary.txt").read_text()
        assert summary.startswith("PASS")

    def test_numeric_failure_exits_3(self, tmp_path, monkeypatch):
        def exploding(**kw):
            raise NumericError("synthetic blow-up")
        monkeypatch.setitem(cli.REGISTRY, "surface_tension",
                            (exploding, "synthetic"))
        path = write(tmp_path, f"experiment=surface_tension\n"
                               f"out_dir={tmp_path}\n")
        assert cli.main(["run", path]) == 3

    def test_failed_check_exits_nonzero(self, tmp_path, monkeypatch):
        from wmcflab.experiments import ExperimentResult

        def failing(**kw):
            res = ExperimentResult("surface_tension", csv_header=["a"])
            res.add("synthetic check", False, "nope")
            return res
        monkeypatch.setitem(cli.REGISTRY, "surface_tension",
                            (failing, "synthetic"))
        path = write(tmp_path, f"experiment=surface_tension\n"
                               f"out_dir={tmp_path}\n")
        assert cli.main(["run", path]) == 1

    def test_deterministic_csv(self, tmp_path):
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        p1 = write(tmp_path, f"experiment=surface_tension\nout_dir={out1}\n",
                   "c1.txt")
        p2 = write(tmp_path, f"experiment=surface_tension\nout_dir={out2}\n",
                   "c2.txt")
        assert cli.main(["run", p1]) == 0
        assert cli.main(["run", p2]) == 0
        f1 = glob.glob(str(out1 / "*.csv"))[0]
        f2 = glob.glob(str(out2 / "*.csv"))[0]
        assert open(f1, "rb").read() == open(f2, "rb").read()

    def test_custom_well_for_equipartition(self, tmp_path):
        out = tmp_path / "res"
        path = write(tmp_path, "experiment=equipartition\n"
                               "grid.n=128\n"
                               "eps=0.08,0.05\n"
                               "well.name=quartic_moving\n"
                               "well.a_slope=0.5\n"
                               f"out_dir={out}\n")
        code = cli.main(["run", path])
        assert code in (0, 1)  # runs through; checks evaluated
        assert os.path.exists(out / "summary.txt")

    def test_pinned_well_experiment_rejects_override(self, tmp_path):
        path = write(tmp_path, "experiment=first_variation\n"
                               "well.name=quartic_exp\n"
                               f"out_dir={tmp_path}\n")
        assert cli.main(["run", path]) == 2


def test_validate_command_exit_codes(tmp_path, capsys):
    good = write(tmp_path, "experiment=calibration\n", "good.txt")
    bad = write(tmp_path, "experiment=calibration\nfoo=1\n", "bad.txt")
    assert cli.main(["validate", good]) == 0
    assert cli.main(["validate", bad]) == 2
