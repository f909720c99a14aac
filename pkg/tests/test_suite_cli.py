import json

import numpy as np
import pytest

from wiener_gfft.cli import main
from wiener_gfft.files import ConfigError, KernelLibrary, load_functional_file, load_kernel_file
from wiener_gfft.kernels import Grid
from wiener_gfft.oracle import McConfig
from wiener_gfft.suite import (
    IDENTITIES,
    SuiteConfig,
    VerificationReport,
    list_families,
    mc_check,
    run_suite,
)

FAST = ["--grid-n", "64", "--trials", "2", "--paths", "4"]


def run_json(capsys, argv):
    code = main(argv + ["--format", "json"])
    return code, json.loads(capsys.readouterr().out)


def strip_volatile(d):
    d = dict(d)
    d.pop("generated_at", None)
    d["summary"] = {k: v for k, v in d["summary"].items() if k != "runtime_s"}
    d["entries"] = [{k: v for k, v in e.items() if k != "runtime_s"} for e in d["entries"]]
    return d


class TestConfig:
    def test_defaults_valid(self):
        cfg = SuiteConfig()
        assert cfg.grid.n_intervals == 1024 and set(cfg.identities) == set(IDENTITIES)

    @pytest.mark.parametrize("kw", [{"grid_n": 7}, {"q_values": [0.0]}, {"identities": ["nope"]},
                                    {"families": ["nope"]}, {"n_functionals": 0}])
    def test_invalid(self, kw):
        with pytest.raises(ConfigError):
            SuiteConfig(**kw)


class TestSuite:
    def test_small_run_passes(self):
        cfg = SuiteConfig(grid_n=64, n_functionals=2, n_paths=4, q_values=[1.0, -2.0])
        rep = run_suite(cfg)
        assert rep.exit_status == 0
        assert rep.summary["counts"]["fail"] == 0
        ids = {e["identity"] for e in rep.entries}
        assert ids == set(IDENTITIES)

    def test_report_roundtrip(self):
        cfg = SuiteConfig(grid_n=64, n_functionals=1, n_paths=2, q_values=[1.0],
                          identities=["inverse", "system"], families=["poly"])
        rep = run_suite(cfg)
        back = VerificationReport.from_dict(json.loads(rep.to_json()))
        assert back.entries == json.loads(rep.to_json())["entries"]
        assert "inverse" in rep.to_text()

    def test_deterministic(self):
        cfg = SuiteConfig(grid_n=64, n_functionals=2, n_paths=4, q_values=[0.5],
                          families=["trig1", "mixed-hyp-trig"])
        a, b = run_suite(cfg).to_dict(), run_suite(cfg).to_dict()
        assert strip_volatile(a) == strip_volatile(b)

    def test_mc_small(self):
        cfg = SuiteConfig(mc=McConfig(2000, 5, grid=Grid(1.0, 32)), mc_cells=6)
        rep = mc_check(cfg)
        kinds = [e["identity"] for e in rep.entries]
        assert kinds.count("mc-integral") == 6 and kinds.count("zs-variance") == 5
        assert rep.summary["per_lambda"]

    def test_mc_single_sample_well_formed(self):
        cfg = SuiteConfig(mc=McConfig(1, 5, grid=Grid(1.0, 32)), mc_cells=3)
        rep = mc_check(cfg)
        json.loads(rep.to_json())
        assert rep.exit_status in (0, 2)

    def test_family_rows(self):
        rows = list_families(None, Grid(1.0, 128))
        assert {r["name"] for r in rows} >= {"poly", "trig1", "trig2", "hyperbolic"}
        assert all(r["passed"] for r in rows)


class TestFiles:
    def write_custom(self, tmp_path, k2_scale=1.0):
        g = Grid(1.0, 64)
        t = g.nodes
        np.savetxt(tmp_path / "h.csv", np.ones_like(t), delimiter=",")
        np.savetxt(tmp_path / "k1.csv", 1 + t, delimiter=",")
        np.savetxt(tmp_path / "k2.csv", k2_scale / (1 + t), delimiter=",")
        path = tmp_path / "kernels.txt"
        path.write_text("# custom\nfamily poly\nsamples h.csv\nsamples k1.csv\nsamples k2.csv\n")
        return g, path

    def test_kernel_file(self, tmp_path):
        g, path = self.write_custom(tmp_path)
        lib = load_kernel_file(path, g)
        assert lib.families == ["poly"] and "poly.k2" in lib.kernels
        custom = lib.custom_system()
        assert custom is not None and np.allclose(custom.s1.values, np.sqrt(1 + (1 + g.nodes) ** 2))

    def test_bad_kernel_lines(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("wibble\n")
        with pytest.raises(ConfigError):
            load_kernel_file(p, Grid(1.0, 8))
        p.write_text("samples missing.csv\n")
        with pytest.raises(ConfigError):
            load_kernel_file(p, Grid(1.0, 8))
        p.write_text("family nope\n")
        with pytest.raises(ConfigError):
            load_kernel_file(p, Grid(1.0, 8))

    def test_functional_file(self, tmp_path):
        lib = KernelLibrary(Grid(1.0, 16))
        lib.add_family("trig1")
        p = tmp_path / "fns.txt"
        p.write_text("atom 1 0 one\nfunctional G\natom 0.5 -0.5 2*t\natom 1 1 trig1.k1\n")
        fns = load_functional_file(p, lib)
        assert list(fns) == ["F", "G"] and len(fns["G"]) == 2
        assert np.allclose(fns["G"].points[0], 2 * lib.grid.nodes)
        p.write_text("atom 1 0 nothing\n")
        with pytest.raises(ConfigError):
            load_functional_file(p, lib)

    def test_broken_custom_family_is_hypothesis_violated(self, tmp_path, capsys):
        _, path = self.write_custom(tmp_path, k2_scale=1.5)
        code, rep = run_json(capsys, ["verify", *FAST, "--kernels", str(path), "--families", "poly",
                                      "--q", "1", "--identities", "system,gcp-of-fft"])
        assert code == 0
        custom = [e for e in rep["entries"] if e["family"] == "custom"]
        assert custom and all(e["status"] == "hypothesis-violated" for e in custom)

    def test_good_custom_family_passes(self, tmp_path, capsys):
        _, path = self.write_custom(tmp_path)
        code, rep = run_json(capsys, ["verify", *FAST, "--kernels", str(path), "--families", "poly",
                                      "--q", "1", "--identities", "system,fft-of-gcp"])
        assert code == 0
        assert all(e["status"] == "pass" for e in rep["entries"])

    def test_functionals_flag(self, tmp_path, capsys):
        p = tmp_path / "fns.txt"
        p.write_text("atom 1 0 one\nfunctional G\natom 0 1 t\n")
        code, rep = run_json(capsys, ["verify", *FAST, "--functionals", str(p), "--families",
                                      "trig1", "--q", "2", "--identities", "gcp-of-fft"])
        assert code == 0 and len(rep["entries"]) == 1


class TestCLI:
    def test_single_cell(self, capsys):
        code, rep = run_json(capsys, ["verify", *FAST, "--families", "hyperbolic", "--q", "-1",
                                      "--identities", "gcp-of-fft"])
        assert code == 0 and len(rep["entries"]) == 1
        e = rep["entries"][0]
        assert e["status"] == "pass" and e["max_measure_discrepancy"] <= 1e-9

    def test_failure_exit_1(self, capsys):
        # a tolerance far below rounding forces deterministic failures
        code, rep = run_json(capsys, ["verify", *FAST, "--families", "trig1", "--q", "1",
                                      "--identities", "gcp-of-fft", "--tol", "1e-300"])
        assert code == 1 and rep["entries"][0]["status"] == "fail"

    def test_mc_exit_2(self, capsys):
        # three samples give unreliable error bars; this seed misses the 95% gate
        code = main(["mc-check", "--grid-n", "16", "--samples", "3", "--cells", "20",
                     "--format", "json", "--seed", "1"])
        rep = json.loads(capsys.readouterr().out)
        assert code == 2
        assert rep["summary"]["pass_rate"] < 0.95 or not rep["summary"]["variance_checks_passed"]

    def test_mc_pass(self, capsys):
        code = main(["mc-check", "--grid-n", "32", "--samples", "20000", "--cells", "6"])
        assert code == 0
        assert "mc-integral" in capsys.readouterr().out

    @pytest.mark.parametrize("argv", [["verify", "--grid-n", "7"], ["verify", "--q", "0"],
                                      ["verify", "--identities", "bogus"], ["bogus"],
                                      ["mc-check", "--samples", "0"],
                                      ["report", "/nonexistent/report.json"]])
    def test_config_errors_exit_3(self, argv, capsys):
        assert main(argv) == 3

    def test_env_seed(self, monkeypatch, capsys):
        argv = ["verify", *FAST, "--families", "poly", "--q", "1", "--identities", "inverse"]
        monkeypatch.setenv("WIENER_GFFT_SEED", "77")
        _, rep = run_json(capsys, argv)
        assert rep["config"]["seed"] == 77
        _, rep = run_json(capsys, argv + ["--seed", "5"])
        assert rep["config"]["seed"] == 5
        monkeypatch.setenv("WIENER_GFFT_SEED", "x")
        assert main(argv) == 3

    def test_out_csv_and_report(self, tmp_path, capsys):
        out, csv = tmp_path / "r.json", tmp_path / "r.csv"
        code = main(["verify", *FAST, "--families", "trig2", "--q", "0.5", "--identities",
                     "inverse,rescale", "--format", "json", "--out", str(out), "--csv", str(csv)])
        assert code == 0 and capsys.readouterr().out == ""
        assert len(csv.read_text().strip().splitlines()) == 3
        assert main(["report", str(out)]) == 0
        assert "rescale" in capsys.readouterr().out
        assert main(["report", str(out), "--format", "json"]) == 0
        assert json.loads(capsys.readouterr().out)["entries"]

    def test_families_verb(self, capsys):
        assert main(["families", "--grid-n", "128"]) == 0
        text = capsys.readouterr().out
        assert "sec-family" in text and "hyperbolic" in text
        assert main(["families", "--families", "poly", "--format", "json"]) == 0
        rows = json.loads(capsys.readouterr().out)
        assert len(rows) == 1 and rows[0]["passed"]
