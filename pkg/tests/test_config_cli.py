"""INI configs, the scenario runner and the command line."""
from __future__ import annotations

import csv
import math

import numpy as np
import pytest

from dirichlet_lab.cli import main
from dirichlet_lab.config import (ConfigError, ScenarioConfig, SetConfig, option, parse_scenario,
                                  with_overrides)
from dirichlet_lab.scenarios import (BUNDLED, EXIT_HYPOTHESIS, EXIT_NUMERICAL, EXIT_OK, STEPS, bundled,
                                     run)


class TestParsing:
    def test_fractions_and_defaults(self):
        cfg = parse_scenario("[set]\nkind = cantor\nratio = 1/4\ndepth = 8\n")
        assert cfg.set.ratio == 0.25 and cfg.set.depth == 8
        assert cfg.weight.kind == "power" and cfg.pipeline == ["set_stats"]

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_scenario("[set]\nradius = 2\n")

    def test_unknown_section(self):
        with pytest.raises(ConfigError, match="unknown sections"):
            parse_scenario("[plot]\nx = 1\n")

    def test_not_a_number(self):
        with pytest.raises(ConfigError):
            parse_scenario("[set]\ndepth = deep\n")

    def test_roundtrip(self):
        cfg = bundled("cantor-alpha0.3")
        again = parse_scenario(cfg.to_ini())
        assert again == cfg

    def test_options(self):
        cfg = parse_scenario("[scenario]\nratios = 1/3, 1/4\nterms = 20\n")
        assert option(cfg, "ratios", [], list) == [1 / 3, 0.25]
        assert option(cfg, "terms", 40, int) == 20
        assert option(cfg, "missing", 7, int) == 7

    def test_overrides_skip_none(self):
        s = with_overrides(SetConfig(), kind="point", depth=None)
        assert s.kind == "point" and s.depth == SetConfig().depth

    def test_measure_atoms(self):
        cfg = parse_scenario("[measure]\nkind = atoms\natoms = 3.14159:1, 1:0.5\n")
        mu = cfg.measure.build(cfg.set.build(), cfg.weight.build())
        assert mu.total_mass() == pytest.approx(1.5)

    def test_bad_atom(self):
        cfg = parse_scenario("[measure]\nkind = atoms\natoms = 1-2\n")
        with pytest.raises(ConfigError):
            cfg.measure.parsed_atoms()

    def test_unknown_kinds(self):
        for text in ("[set]\nkind = spiral\n", "[weight]\nkind = wave\n"):
            cfg = parse_scenario(text)
            with pytest.raises(ConfigError):
                cfg.set.build() if "set" in text else cfg.weight.build()


class TestRunner:
    def test_bundled_resolve(self):
        for name in BUNDLED:
            cfg = bundled(name)
            assert all(step in STEPS for step in cfg.pipeline)

    def test_unknown_step(self, tmp_path):
        with pytest.raises(ConfigError):
            run(ScenarioConfig(pipeline=["nothing"]), tmp_path)

    def test_point_cyclic(self, tmp_path):
        res = run(bundled("point-cyclic"), tmp_path)
        assert res.status == EXIT_OK
        assert (tmp_path / "point-cyclic_summary.txt").exists()

    def test_csv_has_header(self, tmp_path):
        cfg = parse_scenario("[scenario]\nname = s\npipeline = set_stats\n[set]\nkind = point\n")
        res = run(cfg, tmp_path)
        csvs = [p for p in res.artifacts if p.suffix == ".csv"]
        assert csvs
        with open(csvs[0]) as fh:
            header = next(csv.reader(fh))
        assert all(isinstance(h, str) and h for h in header)

    def test_hypothesis_status(self, tmp_path):
        cfg = parse_scenario("[scenario]\npipeline = onebox\n[set]\nkind = point\n")
        assert run(cfg, tmp_path).status == EXIT_HYPOTHESIS

    def test_numerical_status(self, tmp_path):
        # a depth-4 Cantor set leaves no gap above the trust floor for the energy integral
        cfg = parse_scenario("[scenario]\npipeline = energy\n[set]\nkind = cantor\ndepth = 4\n")
        assert run(cfg, tmp_path).status == EXIT_NUMERICAL

    def test_rerun_identical(self, tmp_path):
        cfg = parse_scenario("[scenario]\nname = r\npipeline = local_ratio\n[set]\nkind = point\n"
                             "[weight]\nalpha = 0.3\n")
        a = run(cfg, tmp_path / "a")
        b = run(cfg, tmp_path / "b")
        assert (tmp_path / "a" / "r_local_ratio.csv").read_text() == \
            (tmp_path / "b" / "r_local_ratio.csv").read_text()
        assert a.status == b.status == EXIT_OK


class TestCommandLine:
    def test_list(self, capsys):
        assert main(["experiment", "list"]) == 0
        assert "cantor-threshold" in capsys.readouterr().out

    def test_set_build(self, tmp_path, capsys):
        assert main(["set", "build", "--set", "cantor", "--depth", "3", "--out-dir", str(tmp_path)]) == 0
        assert (tmp_path / "cantor_gaps.csv").exists()

    def test_fraction_flag(self, tmp_path, capsys):
        assert main(["set", "build", "--ratio", "1/4", "--depth", "2", "--out-dir", str(tmp_path)]) == 0
        lengths = np.loadtxt(tmp_path / "cantor_gaps.csv", delimiter=",", skiprows=1)[:, 1]
        # ratio 1/4: the first gap is half the circle, the next two a quarter of it
        assert sorted(lengths) == pytest.approx([math.pi / 4, math.pi / 4, math.pi])
        with pytest.raises(SystemExit) as exc:
            main(["set", "build", "--ratio", "1/0"])
        assert exc.value.code == 2

    def test_local_value(self, tmp_path, capsys):
        code = main(["dirichlet", "local", "--set", "point", "--alpha", "1", "--zeta", str(math.pi),
                     "--out-dir", str(tmp_path)])
        assert code == 0
        with open(tmp_path / "dirichlet-local_local_ratio.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert float(rows[0]["D_zeta"]) == pytest.approx(1.0, rel=1e-8)

    def test_unknown_scenario_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["experiment", "run", "no-such-scenario"])
        assert exc.value.code == 2

    def test_bad_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["set", "stats", "--set", "spiral"])
        assert exc.value.code == 2

    def test_unreadable_config(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["set", "stats", "--config", str(tmp_path / "missing.ini")])
        assert exc.value.code == 2

    def test_config_with_flag_override(self, tmp_path, capsys):
        ini = tmp_path / "s.ini"
        ini.write_text("[set]\nkind = cantor\ndepth = 5\n")
        assert main(["set", "stats", "--config", str(ini), "--set", "point", "--out-dir", str(tmp_path)]) == 0
        assert "point" in capsys.readouterr().out

    def test_capacity_series(self, tmp_path, capsys):
        assert main(["capacity", "series", "--doubly-exponential", "--out-dir", str(tmp_path)]) == 0
        assert "diverges" in capsys.readouterr().out

    def test_necessary_test_with_atom(self, tmp_path, capsys):
        main(["carleson", "cn", "--set", "point", "--measure", "atoms", "--atoms", "1:1",
              "--out-dir", str(tmp_path)])
        assert "fail" in capsys.readouterr().out
