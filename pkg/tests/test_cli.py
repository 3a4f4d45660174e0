import json

import pytest

from tasterank import EngineConfig, generate_synthetic, parameter_sweep, train_bank
from tasterank.cli import BENCHMARK_SPEC, _parse_int_list, main
from tasterank.evaluation import sweep_to_csv


class TestParsing:
    def test_int_list_forms(self):
        assert _parse_int_list("5") == [5]
        assert _parse_int_list("5,10,15") == [5, 10, 15]
        assert _parse_int_list("1..5") == [1, 2, 3, 4, 5]

    def test_unknown_flag_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["simulate", "--bogus"])
        assert excinfo.value.code == 1

    def test_missing_subcommand_is_usage_error(self):
        with pytest.raises(SystemExit) as excinfo:
            main([])
        assert excinfo.value.code == 1


class TestIngest:
    def test_missing_file_is_data_error(self, capsys):
        code = main(["ingest", "/definitely/missing.jsonl"])
        assert code == 2
        assert "not found" in capsys.readouterr().err

    def test_ingest_reports_summary(self, tmp_path, capsys):
        catalog = generate_synthetic(30, 4, 2, seed=6)
        from tasterank import save_catalog

        path = tmp_path / "c.jsonl"
        save_catalog(catalog, path)
        code = main(["ingest", str(path)])
        assert code == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["items"] == 30
        assert summary["dim"] == 4

    def test_ingest_rejects_invalid_content(self, tmp_path, capsys):
        path = tmp_path / "broken.jsonl"
        path.write_text('{"id": "a", "features": [1.0, "oops"]}\n')
        assert main(["ingest", str(path)]) == 2


class TestGenerateAndTrain:
    def test_chain(self, tmp_path, capsys):
        catalog_path = tmp_path / "cat.jsonl"
        bank_path = tmp_path / "bank.json"
        assert (
            main(
                [
                    "gen-synthetic",
                    "--n",
                    "60",
                    "--dim",
                    "8",
                    "--clusters",
                    "4",
                    "--seed",
                    "3",
                    "--out",
                    str(catalog_path),
                ]
            )
            == 0
        )
        assert catalog_path.exists()
        assert main(["train-bank", "--catalog", str(catalog_path), "--out", str(bank_path)]) == 0
        payload = json.loads(bank_path.read_text())
        assert len(payload["attributes"]) == 4

    def test_infeasible_spec_is_data_error(self, tmp_path):
        code = main(
            ["gen-synthetic", "--n", "4", "--clusters", "4", "--out", str(tmp_path / "x.jsonl")]
        )
        assert code == 2


class TestSimulate:
    def test_deterministic_output(self, capsys):
        assert main(["simulate", "--seed", "7"]) == 0
        first = capsys.readouterr().out
        assert main(["simulate", "--seed", "7"]) == 0
        second = capsys.readouterr().out
        assert first == second
        record = json.loads(first)
        assert record["seed"] == 7
        assert -1.0 <= record["rho"] <= 1.0

    def test_different_seeds_differ(self, capsys):
        main(["simulate", "--seed", "1"])
        first = capsys.readouterr().out
        main(["simulate", "--seed", "2"])
        second = capsys.readouterr().out
        assert first != second


class TestSweep:
    def test_csv_matches_in_process_call(self, capsys):
        assert (
            main(
                [
                    "sweep",
                    "--m",
                    "5",
                    "--interactions",
                    "0,1",
                    "--reps",
                    "2",
                    "--seed",
                    "5",
                ]
            )
            == 0
        )
        cli_csv = capsys.readouterr().out
        catalog = generate_synthetic(**BENCHMARK_SPEC)
        bank = train_bank(catalog, EngineConfig(rng_seed=5))
        result = parameter_sweep(
            catalog, bank, EngineConfig(rng_seed=5), [5], [0, 1], repetitions=2
        )
        assert cli_csv == sweep_to_csv(result)

    def test_json_mirror(self, tmp_path, capsys):
        out = tmp_path / "sweep.json"
        main(
            [
                "sweep",
                "--m",
                "3",
                "--interactions",
                "0",
                "--reps",
                "1",
                "--json",
                str(out),
            ]
        )
        capsys.readouterr()
        payload = json.loads(out.read_text())
        assert payload["cells"][0]["m"] == 3


class TestScore:
    def test_score_pipeline(self, tmp_path, capsys):
        from tasterank import (
            EngineConfig,
            build_user_distribution,
            save_bank,
            save_catalog,
            save_usad,
            train_bank,
        )
        from tasterank.ranking import make_ranked_list

        catalog = generate_synthetic(40, 6, 4, seed=9)
        bank = train_bank(catalog, EngineConfig())
        usad = build_user_distribution(
            make_ranked_list(catalog.ids()[:4], [4, 3, 2, 1]), bank, catalog
        )
        catalog_path = tmp_path / "c.jsonl"
        bank_path = tmp_path / "b.json"
        usad_path = tmp_path / "u.json"
        save_catalog(catalog, catalog_path)
        save_bank(bank, bank_path)
        save_usad(usad, usad_path)
        code = main(
            [
                "score",
                str(catalog_path),
                str(usad_path),
                "--bank",
                str(bank_path),
                "--ids",
                ",".join(catalog.ids()[:6]),
            ]
        )
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "id,score,undefined_correlation"
        assert len(lines) == 7
        scores = [float(line.split(",")[1]) for line in lines[1:]]
        assert scores == sorted(scores, reverse=True)

    def test_score_without_bank_is_data_error(self, tmp_path, capsys):
        code = main(["score", str(tmp_path / "c.jsonl"), str(tmp_path / "u.json")])
        assert code == 2


class TestConfigFile:
    def test_json_config_supplies_defaults(self, tmp_path, capsys):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({"m": 3, "k": 3}))
        assert main(["--config", str(config), "simulate", "--seed", "2"]) == 0
        record = json.loads(capsys.readouterr().out)
        assert record["m"] == 3
        assert record["k"] == 3

    def test_toml_config(self, tmp_path, capsys):
        config = tmp_path / "cfg.toml"
        config.write_text("m = 4\nk = 2\n")
        assert main(["--config", str(config), "simulate", "--seed", "2"]) == 0
        record = json.loads(capsys.readouterr().out)
        assert record["m"] == 4

    def test_flag_overrides_config(self, tmp_path, capsys):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({"m": 3}))
        assert main(["--config", str(config), "simulate", "--seed", "2", "--m", "6"]) == 0
        record = json.loads(capsys.readouterr().out)
        assert record["m"] == 6

    def test_missing_config_is_data_error(self):
        assert main(["--config", "/no/cfg.json", "simulate"]) == 2
