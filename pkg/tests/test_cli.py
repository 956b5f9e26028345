"""Driver tests: option merging, deterministic artifacts, exit statuses,
plot extracts, and the documented summary lines."""

import json
import math
import os
from fractions import Fraction

import pytest

from limsuplab import cli
from limsuplab.errors import UsageError

GOLDEN_CHAIN = ",".join(["1"] * 120)


def run_main(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out.strip(), out.err.strip()


def run_env(argv):
    return cli.run(cli.parse_config(argv))


class TestSummaries:
    def test_classify_divergent_line(self, tmp_path, capsys):
        code, out, _ = run_main(
            ["classify", "--series", "r^1 * (r^-2)",
             "--output", str(tmp_path / "c.csv")], capsys)
        assert code == 0
        assert out == "Divergent ⇒ Khintchine divergence case: full measure"

    def test_classify_convergent_line(self, tmp_path, capsys):
        code, out, _ = run_main(
            ["classify", "--series", "r^1 * (r^-3)",
             "--output", str(tmp_path / "c.csv")], capsys)
        assert code == 0
        assert out == "Convergent ⇒ Khintchine convergence case: null set"

    def test_classify_gauge_discrimination(self, tmp_path, capsys):
        # same gauge, psi exponent moved from -3(1+0.1)/2 to -3(1+0.2)/2
        gauge = "r^(2/3) * log(1/r)^(1/10)"
        _, diverging, _ = run_main(
            ["classify", "--weight", "1", "--gauge", gauge,
             "--psi", "r^-3 * log(r)^(-33/20)",
             "--output", str(tmp_path / "a.csv")], capsys)
        _, converging, _ = run_main(
            ["classify", "--weight", "1", "--gauge", gauge,
             "--psi", "r^-3 * log(r)^(-9/5)",
             "--output", str(tmp_path / "b.csv")], capsys)
        assert diverging.startswith("Divergent ⇒ Hausdorff divergence")
        assert converging.startswith("Convergent ⇒ Hausdorff convergence")

    def test_critical_exponent_fraction(self, tmp_path, capsys):
        code, out, _ = run_main(
            ["critical-exponent", "--psi", "r^-3", "--weight", "1",
             "--output", str(tmp_path / "e.csv")], capsys)
        assert (code, out) == (0, "2/3")

    def test_critical_exponent_log_scale(self, tmp_path, capsys):
        code, out, _ = run_main(
            ["critical-exponent", "--omega", "2", "--ambient", "3",
             "--output", str(tmp_path / "e.csv")], capsys)
        assert (code, out) == (0, "3/2")


class TestExitStatuses:
    def test_unknown_command(self, tmp_path, capsys):
        code, _, err = run_main(["frobnicate"], capsys)
        assert code == 1
        assert "invalid choice" in err

    def test_missing_required_option(self, tmp_path, capsys):
        code, _, err = run_main(["schmidt", "--psi", "r^-2"], capsys)
        assert code == 1
        assert "--N" in err

    def test_bad_rational(self, tmp_path, capsys):
        code, _, _ = run_main(
            ["cf", "--x", "1/0", "--output", str(tmp_path / "x.csv")], capsys)
        assert code == 1

    def test_resource_cap_is_2(self, tmp_path, capsys):
        code, _, err = run_main(
            ["excursions", "--x", "1/2", "--T", "5", "--step", "1e-9",
             "--output", str(tmp_path / "x.csv")], capsys)
        assert code == 2
        assert "cap" in err

    def test_precision_exhausted_is_2(self, tmp_path, capsys):
        code, _, _ = run_main(
            ["loglaw", "--quotients", "1,1,1,1,1", "--T", "100",
             "--output", str(tmp_path / "x.csv")], capsys)
        assert code == 2

    def test_exclusive_direction_flags(self, tmp_path, capsys):
        code, _, _ = run_main(
            ["loglaw", "--x", "1/3", "--quotients", "1,2", "--T", "10",
             "--output", str(tmp_path / "x.csv")], capsys)
        assert code == 1

    def test_step_requires_x(self, tmp_path, capsys):
        code, _, _ = run_main(
            ["excursions", "--quotients", GOLDEN_CHAIN, "--T", "5",
             "--step", "0.01", "--output", str(tmp_path / "x.csv")], capsys)
        assert code == 1


class TestConfigMerging:
    def test_file_values_and_flag_override(self, tmp_path, capsys):
        ini = tmp_path / "run.ini"
        ini.write_text("[common]\nseed = 9\nformat = jsonl\n"
                       "[schmidt]\npsi = (1/4) * r^-1\nN = 3000\n"
                       "samples = 6\n")
        out_file = tmp_path / "s.jsonl"
        code, _, _ = run_main(
            ["schmidt", "--config", str(ini), "--samples", "4",
             "--output", str(out_file)], capsys)
        assert code == 0
        lines = out_file.read_text().splitlines()
        meta = json.loads(lines[0])["meta"]
        assert meta["config"]["options"]["N"] == "3000"       # from file
        assert meta["config"]["options"]["samples"] == "4"    # flag wins
        assert meta["config"]["options"]["seed"] == "9"
        assert len(lines) == 1 + 4

    def test_missing_config_file(self, tmp_path, capsys):
        code, _, _ = run_main(
            ["cf", "--x", "1/3", "--config", str(tmp_path / "nope.ini")],
            capsys)
        assert code == 1


class TestArtifacts:
    def test_payload_byte_reproducible_csv(self, tmp_path, capsys):
        argv = ["cf", "--x", "16/113", "--output", str(tmp_path / "r.csv")]
        run_main(argv, capsys)
        first = (tmp_path / "r.csv").read_bytes()
        run_main(argv, capsys)
        second = (tmp_path / "r.csv").read_bytes()
        strip = lambda b: [ln for ln in b.splitlines()
                           if not ln.startswith(b"# wall_clock_s")]
        assert strip(first) == strip(second)

    def test_payload_byte_reproducible_jsonl(self, tmp_path, capsys):
        argv = ["horoballs", "--points", "5", "--format", "jsonl",
                "--output", str(tmp_path / "h.jsonl")]
        run_main(argv, capsys)
        first = (tmp_path / "h.jsonl").read_text().splitlines()
        run_main(argv, capsys)
        second = (tmp_path / "h.jsonl").read_text().splitlines()
        assert first[1:] == second[1:]
        m1, m2 = (json.loads(ln)["meta"] for ln in (first[0], second[0]))
        m1.pop("wall_clock_s"), m2.pop("wall_clock_s")
        assert m1 == m2

    def test_workers_do_not_change_payload(self, tmp_path):
        base = ["schmidt", "--psi", "(1/4) * r^-1", "--N", "3000",
                "--samples", "6", "--seed", "9",
                "--output", str(tmp_path / "w.csv")]
        serial = run_env(base + ["--workers", "1"])
        fanned = run_env(base + ["--workers", "2"])
        assert serial.rows == fanned.rows
        assert serial.summary == fanned.summary

    def test_env_var_names_default_path(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path))
        code, _, _ = run_main(["cf", "--x", "1/3"], capsys)
        assert code == 0
        assert (tmp_path / "cf.csv").exists()

    def test_no_temp_files_left_behind(self, tmp_path, capsys):
        run_main(["cf", "--x", "1/3", "--output", str(tmp_path / "c.csv")],
                 capsys)
        leftovers = [p for p in os.listdir(tmp_path)
                     if p.startswith(".limsuplab-")]
        assert leftovers == []

    def test_csv_header_has_config_echo(self, tmp_path, capsys):
        run_main(["disjointness", "--q-max", "30",
                  "--output", str(tmp_path / "d.csv")], capsys)
        head = (tmp_path / "d.csv").read_text().splitlines()[:4]
        assert head[0].startswith("# limsuplab ")
        assert "command=disjointness" in head[1] and "q_max=30" in head[1]
        assert head[2].startswith("# wall_clock_s:")
        assert head[3].startswith("# summary: all 279 horoball interiors")


class TestRows:
    def test_cf_rows_align_quotients_convergents(self, tmp_path):
        env = run_env(["cf", "--x", "16/113",
                       "--output", str(tmp_path / "c.csv")])
        assert [(r["n"], r["a"], r["p"], r["q"]) for r in env.rows] == \
            [(1, 7, 1, 7), (2, 16, 16, 113)]
        assert env.rows[-1]["error"] == 0.0
        assert env.summary == "quotients [7, 16] (terminated)"

    def test_stage_scan_partial_sum_accumulates(self, tmp_path):
        env = run_env(["stage-scan", "--psi", "r^-3", "--k", "2",
                       "--n-lo", "1", "--n-hi", "6",
                       "--output", str(tmp_path / "s.csv")])
        partial = 0.0
        for row in env.rows:
            partial += row["measure"]
            assert row["partial_sum"] == pytest.approx(partial)
            assert row["lower"] <= row["measure"] <= row["upper"]
            assert not row["truncated"]

    def test_ubiquity_ratios_exact_and_high(self, tmp_path):
        env = run_env(["ubiquity", "--rho", "6 * r^-2", "--k", "6",
                       "--n-lo", "2", "--n-hi", "3", "--balls", "3",
                       "--seed", "11", "--output", str(tmp_path / "u.csv")])
        assert len(env.rows) == 6
        for row in env.rows:
            exact = Fraction(row["ratio_exact"])
            assert exact >= Fraction(1, 2)
            assert row["ratio"] == pytest.approx(float(exact))

    def test_horoball_band_is_flat(self, tmp_path):
        env = run_env(["horoballs", "--output", str(tmp_path / "h.csv")])
        ratios = [r["ratio"] for r in env.rows]
        assert len(ratios) == 13
        assert max(ratios) / min(ratios) < 2

    def test_excursions_exact_golden(self, tmp_path):
        env = run_env(["excursions", "--quotients", GOLDEN_CHAIN,
                       "--T", "20", "--output", str(tmp_path / "g.csv")])
        assert all(r["peak_pen"] == pytest.approx(math.log(math.sqrt(5) / 2))
                   for r in env.rows)

    def test_loglaw_running_max_monotone(self, tmp_path):
        env = run_env(["loglaw", "--quotients", GOLDEN_CHAIN, "--T", "50",
                       "--output", str(tmp_path / "l.csv")])
        maxes = [r["running_max"] for r in env.rows]
        assert maxes == sorted(maxes)
        assert "log-law statistic" in env.summary


class TestPlotData:
    def test_stage_measure_extract(self, tmp_path):
        env = run_env(["stage-scan", "--psi", "r^-3", "--k", "2",
                       "--n-lo", "1", "--n-hi", "5",
                       "--output", str(tmp_path / "s.csv")])
        out = tmp_path / "plot.csv"
        cli.emit_plot_data(env, "stage-measure", str(out))
        lines = out.read_text().splitlines()
        assert lines[0] == "n,measure,partial_sum"
        assert len(lines) == 1 + len(env.rows)

    def test_loglaw_extract_and_empty_payload(self, tmp_path):
        env = run_env(["loglaw", "--quotients", GOLDEN_CHAIN, "--T", "2.72",
                       "--output", str(tmp_path / "l.csv")])
        assert env.rows == []            # no peak past t = e yet
        out = tmp_path / "plot.csv"
        cli.emit_plot_data(env, "loglaw", str(out))
        assert out.read_text() == "log_t,running_max\n"

    def test_kind_mismatch(self, tmp_path):
        env = run_env(["cf", "--x", "1/3",
                       "--output", str(tmp_path / "c.csv")])
        with pytest.raises(UsageError):
            cli.emit_plot_data(env, "loglaw", str(tmp_path / "p.csv"))
        with pytest.raises(UsageError):
            cli.emit_plot_data(env, "no-such-kind", str(tmp_path / "p.csv"))

    def test_histogram_extract(self, tmp_path):
        env = run_env(["schmidt", "--psi", "(1/4) * r^-1", "--N", "2000",
                       "--samples", "10", "--seed", "3",
                       "--output", str(tmp_path / "s.csv")])
        out = tmp_path / "hist.csv"
        cli.emit_plot_data(env, "histogram", str(out))
        lines = out.read_text().splitlines()
        assert lines[0] == "bin_lo,bin_hi,count"
        counts = [int(ln.rsplit(",", 1)[1]) for ln in lines[1:]]
        assert sum(counts) == 10
