import json

import pytest

from cleantable.cli import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestEnumerate:
    def test_counts_reported(self, capsys):
        code, out, _ = run_cli(capsys, "enumerate")
        assert code == EXIT_OK
        assert "states: 53" in out
        assert "dataset samples: 371" in out
        # one line per state plus two summary lines
        assert len(out.splitlines()) == 55


class TestFuse:
    def test_congruent_pair_is_certain(self, capsys, tmp_path):
        doc = {"audio": "go left", "gestures": ["go left"] * 5}
        path = tmp_path / "advice.jsonl"
        path.write_text(json.dumps(doc) + "\n")
        code, out, _ = run_cli(capsys, "fuse", str(path))
        assert code == EXIT_OK
        fields = out.strip().split("\t")
        assert fields[0] == "go left"
        assert float(fields[1]) == 1.0
        assert fields[-1] == "congruent=True"

    def test_noisy_audio_still_resolves(self, capsys, tmp_path):
        doc = {"audio": ["go lift", "zzzz"], "gestures": ["go left"] * 4 + ["wipe"]}
        path = tmp_path / "advice.jsonl"
        path.write_text(json.dumps(doc) + "\n")
        code, out, _ = run_cli(capsys, "fuse", str(path))
        assert code == EXIT_OK
        assert out.startswith("go left\t")

    def test_missing_file_is_runtime_error(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "fuse", str(tmp_path / "nope.jsonl"))
        assert code == EXIT_RUNTIME
        assert "error:" in err

    def test_bad_gesture_label_is_runtime_error(self, capsys, tmp_path):
        path = tmp_path / "advice.jsonl"
        path.write_text(json.dumps({"audio": "wipe", "gestures": ["fly"] * 5}) + "\n")
        code, *_ = run_cli(capsys, "fuse", str(path))
        assert code == EXIT_RUNTIME


class TestRun:
    def test_csv_deterministic_across_invocations(self, capsys, tmp_path):
        argv = [
            "run", "--condition", "rl", "--agents", "2", "--episodes", "5",
            "--seed", "3",
        ]
        a = tmp_path / "a"
        b = tmp_path / "b"
        assert run_cli(capsys, *argv, "--out", str(a))[0] == EXIT_OK
        assert run_cli(capsys, *argv, "--out", str(b))[0] == EXIT_OK
        name = "run_rl_seed3.csv"
        assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_output_dir_from_environment(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("CLEANTABLE_OUT", str(tmp_path))
        code, out, _ = run_cli(
            capsys, "run", "--agents", "1", "--episodes", "2", "--seed", "1"
        )
        assert code == EXIT_OK
        assert (tmp_path / "run_rl_seed1.csv").is_file()
        assert "mean cumulative reward" in out

    def test_config_file_supplies_defaults_flags_override(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"agents": 2, "episodes": 4, "seed": 9}))
        code, _, _ = run_cli(
            capsys, "run", "--config", str(cfg), "--episodes", "3",
            "--out", str(tmp_path),
        )
        assert code == EXIT_OK
        csv = (tmp_path / "run_rl_seed9.csv").read_text().splitlines()
        assert len(csv) == 1 + 3  # header + episodes from the explicit flag

    def test_invalid_learner_value_is_runtime_error(self, capsys, tmp_path):
        code, _, err = run_cli(
            capsys, "run", "--epsilon", "7", "--agents", "1", "--episodes", "1",
            "--out", str(tmp_path),
        )
        assert code == EXIT_RUNTIME
        assert "error:" in err


class TestSweep:
    def test_theta_sweep_with_explicit_values(self, capsys, tmp_path):
        code, out, _ = run_cli(
            capsys, "sweep", "--parameter", "theta", "--condition", "irl",
            "--values", "0.0", "0.5", "--agents", "2", "--episodes", "3",
            "--seed", "2", "--out", str(tmp_path),
        )
        assert code == EXIT_OK
        assert "theta=0:" in out and "theta=0.5:" in out
        csv = (tmp_path / "sweep_theta_irl_seed2.csv").read_text().splitlines()
        assert len(csv) == 1 + 2 * 3


class TestTrainAffordances:
    def test_short_training_writes_weights(self, capsys, tmp_path):
        code, out, _ = run_cli(
            capsys, "train-affordances", "--epochs", "3", "--seed", "0",
            "--out", str(tmp_path), "--dataset-csv",
        )
        assert code == EXIT_OK
        assert (tmp_path / "affordance_weights.json").is_file()
        assert (tmp_path / "affordance_dataset.csv").is_file()
        assert "decode accuracy" in out


class TestUsageErrors:
    @pytest.mark.parametrize(
        "argv",
        [[], ["bogus"], ["run", "--condition", "bogus"], ["sweep"],
         ["run", "--agents", "not-a-number"]],
    )
    def test_exit_code_one(self, capsys, argv):
        code, *_ = run_cli(capsys, *argv)
        assert code == EXIT_USAGE
