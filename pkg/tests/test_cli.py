"""Tests for configuration parsing and the command-line surface."""

import csv
import json
import math

import pytest

from witnesskit.cli import main
from witnesskit.config import (
    CACHE_ENV_VAR,
    Config,
    effective_cache_path,
    load_config,
    merge_config,
    report_envelope,
)
from witnesskit.core import UsageError


class TestConfig:
    def test_defaults_validate(self):
        cfg = Config()
        assert cfg.precision_digits == 30
        assert cfg.constant("C_B") == 1.0

    def test_positivity_enforced(self):
        with pytest.raises(UsageError):
            Config(H=-0.5)
        with pytest.raises(UsageError):
            Config(seed=0)
        with pytest.raises(UsageError):
            Config(constants=(("C_A", 0.0),))

    def test_unknown_constant_rejected(self):
        with pytest.raises(UsageError):
            Config(constants=(("c99", 1.0),))

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(
            "# sweep settings\n"
            "precision_digits = 40\n"
            "H=0.75\n"
            "C_B = 2.5   # theorem constant\n"
            "\n"
            "cache_path=zeros.tsv\n")
        cfg = load_config(str(path))
        assert cfg.precision_digits == 40
        assert cfg.H == 0.75
        assert cfg.constant("C_B") == 2.5
        assert cfg.cache_path == "zeros.tsv"
        assert cfg.delta == 0.1  # untouched default

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("c99=1.0\n")
        with pytest.raises(UsageError):
            load_config(str(path))

    def test_duplicate_key_rejected(self, tmp_path):
        path = tmp_path / "dup.cfg"
        path.write_text("H=0.5\nH=0.7\n")
        with pytest.raises(UsageError):
            load_config(str(path))

    def test_malformed_line_rejected(self, tmp_path):
        path = tmp_path / "noeq.cfg"
        path.write_text("just words\n")
        with pytest.raises(UsageError):
            load_config(str(path))

    def test_hash_tracks_content(self):
        base = Config()
        same = Config()
        other = merge_config(base, [("H", "0.75")])
        assert base.hash() == same.hash()
        assert base.hash() != other.hash()
        assert len(base.hash()) == 12

    def test_merge_keeps_unrelated_entries(self):
        cfg = Config(constants=(("C_A", 2.0),))
        merged = merge_config(cfg, [("seed", "9"), ("C_B", "3.0")])
        assert merged.seed == 9
        assert merged.constant("C_A") == 2.0
        assert merged.constant("C_B") == 3.0
        assert merged.H == cfg.H

    def test_cache_env_override(self, monkeypatch):
        cfg = Config(cache_path="from_config.tsv")
        monkeypatch.delenv(CACHE_ENV_VAR, raising=False)
        assert effective_cache_path(cfg) == "from_config.tsv"
        monkeypatch.setenv(CACHE_ENV_VAR, "from_env.tsv")
        assert effective_cache_path(cfg) == "from_env.tsv"

    def test_envelope_fields(self):
        env = report_envelope(Config(seed=5), "witness-char")
        assert env["seed"] == 5
        assert env["command"] == "witness-char"
        assert env["config_hash"] == Config(seed=5).hash()
        assert set(env) == {"command", "config_hash", "seed",
                            "precision_digits", "version"}


def run_cli(args, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main(args + ["--out", str(out)])
    return code, out


class TestWitnessCommands:
    def test_witness_char_report(self, tmp_path):
        code, out = run_cli(["witness-char", "--modulus", "4", "--char", "odd",
                             "--exclude", "3,7"], tmp_path)
        assert code == 0
        rep = json.loads(out.read_text())
        assert rep["witness_prime"] == 11
        assert rep["theorem_tag"] == "B"
        assert rep["bound_value"] == 84.0
        assert rep["seed"] == 1
        assert rep["version"]
        assert rep["config_hash"] == Config().hash()
        assert rep["config"]["witness_cap"] == 1000000

    def test_witness_pair_report(self, tmp_path):
        code, out = run_cli(["witness-pair", "--modulus", "4", "--char", "odd",
                             "--exclude", "3"], tmp_path)
        assert code == 0
        rep = json.loads(out.read_text())
        assert rep["witness_prime"] == 7
        assert rep["theorem_tag"] == "C"

    def test_witness_chebotarev_report(self, tmp_path):
        code, out = run_cli(["witness-chebotarev", "--conductor", "4",
                             "--subgroup", "1", "--target-class", "3",
                             "--exclude", "3,7"], tmp_path)
        assert code == 0
        rep = json.loads(out.read_text())
        assert rep["witness_prime"] == 11
        assert rep["theorem_tag"] == "A"

    def test_principal_character_is_usage_error(self, tmp_path):
        code, _ = run_cli(["witness-char", "--modulus", "4",
                           "--char", "principal"], tmp_path)
        assert code == 2

    def test_cap_exhaustion_is_certification_error(self, tmp_path):
        code, _ = run_cli(["witness-char", "--modulus", "4", "--char", "odd",
                           "--exclude", "2,3,5,7", "--cap", "10"], tmp_path)
        assert code == 3

    def test_config_file_flows_into_report(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("seed=17\nwitness_cap=500\n")
        code, out = run_cli(["witness-char", "--modulus", "4", "--char", "odd",
                             "--config", str(cfg)], tmp_path)
        assert code == 0
        rep = json.loads(out.read_text())
        assert rep["seed"] == 17
        assert rep["search_cap"] == 500

    def test_set_override(self, tmp_path):
        code, out = run_cli(["witness-char", "--modulus", "4", "--char", "odd",
                             "--set", "witness_cap=100"], tmp_path)
        assert code == 0
        assert json.loads(out.read_text())["search_cap"] == 100


class TestIdentityCommands:
    def test_explicit_formula_passes(self, tmp_path):
        code, out = run_cli(["explicit-formula", "--modulus", "1",
                             "--kernel", "K1", "--x", "2", "--y", "4"],
                            tmp_path)
        assert code == 0
        rep = json.loads(out.read_text())
        assert rep["identity_ok"] is True
        assert rep["abs_diff"] < 1e-6

    def test_explicit_formula_violation_exits_3(self, tmp_path):
        # an unattainable tolerance turns the residual into a reported failure
        code, out = run_cli(["explicit-formula", "--modulus", "1",
                             "--kernel", "K1", "--x", "2", "--y", "4",
                             "--tol", "1e-30"], tmp_path)
        assert code == 3
        # the report is still written, flagged as failing
        assert json.loads(out.read_text())["identity_ok"] is False

    def test_undersized_cutoff_is_usage_error(self, tmp_path):
        code, _ = run_cli(["explicit-formula", "--modulus", "1",
                           "--kernel", "K1", "--x", "2", "--y", "4",
                           "--cutoff", "3"], tmp_path)
        assert code == 2

    def test_zero_scan_builds_and_reuses_cache(self, tmp_path):
        cache = tmp_path / "zeros.tsv"
        args = ["zero-scan", "--modulus", "1", "--height", "15",
                "--cache", str(cache)]
        code, out = run_cli(args, tmp_path)
        assert code == 0
        rep = json.loads(out.read_text())
        assert rep["zero_count"] == 1
        assert rep["lowest_gamma"] == pytest.approx(14.134725, abs=1e-5)
        assert rep["rescanned"] is True
        code, out = run_cli(args, tmp_path, name="second.json")
        assert code == 0
        rep2 = json.loads(out.read_text())
        assert rep2["rescanned"] is False
        assert rep2["zero_count"] == 1
        assert rep2["lowest_gamma"] == rep["lowest_gamma"]


class TestTableCommands:
    def test_schur_check_csv(self, tmp_path):
        code, out = run_cli(["schur-check", "--d", "2", "--samples", "25",
                             "--seed", "7"], tmp_path, name="schur.csv")
        assert code == 0
        lines = out.read_text().splitlines()
        comments = [ln for ln in lines if ln.startswith("#")]
        assert "# seed=7" in comments
        assert any(ln.startswith("# config_hash=") for ln in comments)
        body = [ln for ln in lines if not ln.startswith("#")]
        rows = list(csv.DictReader(body))
        assert len(rows) == 25
        assert all(r["passed"] == "1" for r in rows)

    def test_schur_check_deterministic(self, tmp_path):
        a = run_cli(["schur-check", "--d", "3", "--samples", "40",
                     "--seed", "11"], tmp_path, name="a.csv")[1]
        b = run_cli(["schur-check", "--d", "3", "--samples", "40",
                     "--seed", "11"], tmp_path, name="b.csv")[1]
        assert a.read_bytes() == b.read_bytes()

    def test_bound_table(self, tmp_path):
        code, out = run_cli(["bound-table", "--theorem", "C",
                             "--q-list", "4", "--ns-list", "3"],
                            tmp_path, name="bounds.csv")
        assert code == 0
        body = [ln for ln in out.read_text().splitlines()
                if not ln.startswith("#")]
        rows = list(csv.DictReader(body))
        assert len(rows) == 1
        assert float(rows[0]["bound"]) == pytest.approx(4 ** 1.1 * 3 ** 0.1)

    def test_bound_table_missing_list_is_usage_error(self, tmp_path):
        code, _ = run_cli(["bound-table", "--theorem", "A"], tmp_path)
        assert code == 2

    def test_estimation_table(self, tmp_path):
        code, out = run_cli(["estimation-table", "--dl", "125", "--nl", "4",
                             "--ns", "2", "--beta0", "0.98", "--x", "40",
                             "--y", "1600", "--delta", "0.05"],
                            tmp_path, name="est.csv")
        assert code == 0
        body = [ln for ln in out.read_text().splitlines()
                if not ln.startswith("#")]
        rows = {r["term"]: r for r in csv.DictReader(body)}
        assert float(rows["leading"]["ratio"]) == 1.0
        assert "competitor_total" in rows and "dominates" in rows

    def test_fit_constants_single_point(self, tmp_path):
        sweep = tmp_path / "sweep.csv"
        sweep.write_text("witness_prime,bound_value\n11,84\n")
        code, out = run_cli(["fit-constants", "--input", str(sweep),
                             "--form", "B"], tmp_path)
        assert code == 0
        rep = json.loads(out.read_text())
        assert rep["max_ratio"] == pytest.approx(math.log(11) / math.log(84))

    def test_fit_constants_empty_is_usage_error(self, tmp_path):
        sweep = tmp_path / "empty.csv"
        sweep.write_text("witness_prime,bound_value\n")
        code, _ = run_cli(["fit-constants", "--input", str(sweep),
                           "--form", "B"], tmp_path)
        assert code == 2
