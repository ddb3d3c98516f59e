import io
import json

import numpy as np
import pytest

from entropic_causal import read_coupling
from entropic_causal.cli import main


def run_cli(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def marginals_file(tmp_path):
    path = tmp_path / "marginals.txt"
    path.write_text("0.6 0.4\n0.5 0.5\n")
    return path


@pytest.fixture
def joint_file(tmp_path):
    path = tmp_path / "joint.txt"
    path.write_text("0.63 0.03\n0.07 0.27\n")
    return path


class TestCouple:
    def test_writes_atoms_and_summary(self, tmp_path, marginals_file, capsys):
        out = tmp_path / "atoms.txt"
        code, stdout, _ = run_cli(
            ["couple", str(marginals_file), "--out", str(out)], capsys
        )
        assert code == 0
        assert "entropy_bits=1.360964047443681" in stdout
        coupling = read_coupling(io.StringIO(out.read_text()))
        assert coupling.marginal_dims == (2, 2)
        assert len(coupling.atoms) == 3

    def test_couple_identical_marginals(self, tmp_path, capsys):
        path = tmp_path / "m.txt"
        path.write_text("0.5 0.5\n0.5 0.5\n")
        code, stdout, _ = run_cli(["couple", str(path)], capsys)
        assert code == 0
        assert "entropy_bits=1.0" in stdout

    def test_non_stochastic_row_named(self, tmp_path, capsys):
        path = tmp_path / "bad.txt"
        path.write_text("0.6 0.5\n0.5 0.5\n")
        code, _, stderr = run_cli(["couple", str(path)], capsys)
        assert code == 2
        assert stderr.startswith("error: validation:")
        assert "line 1" in stderr

    def test_missing_file_is_io_error(self, tmp_path, capsys):
        code, _, stderr = run_cli(["couple", str(tmp_path / "absent.txt")], capsys)
        assert code == 3
        assert stderr.startswith("error: io:")

    def test_manifest_written(self, tmp_path, marginals_file, capsys):
        out = tmp_path / "atoms.txt"
        run_cli(["couple", str(marginals_file), "--out", str(out)], capsys)
        manifest = json.loads((tmp_path / "atoms.txt.manifest.json").read_text())
        assert manifest["command"] == "couple"
        assert manifest["version"]
        assert manifest["outputs"] == [str(out)]
        assert manifest["duration_seconds"] >= 0


class TestInfer:
    def test_decision_record(self, joint_file, capsys):
        code, stdout, _ = run_cli(["infer", str(joint_file), "--t", "0.1"], capsys)
        assert code == 0
        record = json.loads(stdout)
        assert record["decision"] == "X->Y"
        assert record["n_states"] == 2
        assert record["threshold_t"] == 0.1

    def test_undecided_on_diagonal(self, tmp_path, capsys):
        path = tmp_path / "diag.txt"
        path.write_text("0.5 0\n0 0.5\n")
        code, stdout, _ = run_cli(["infer", str(path), "--t", "0.1"], capsys)
        assert code == 0
        assert json.loads(stdout)["decision"] == "undecided"

    def test_negative_cell_rejected(self, tmp_path, capsys):
        path = tmp_path / "neg.txt"
        path.write_text("0.7 -0.1\n0.2 0.2\n")
        code, _, stderr = run_cli(["infer", str(path)], capsys)
        assert code == 2
        assert "negative" in stderr


class TestGreedyBench:
    def test_csv_and_reproducibility(self, tmp_path, capsys):
        out_a = tmp_path / "a.csv"
        out_b = tmp_path / "b.csv"
        args = ["greedy-bench", "--n", "2:5", "--trials", "10", "--seed", "7"]
        assert run_cli(args + ["--out", str(out_a)], capsys)[0] == 0
        assert run_cli(args + ["--out", str(out_b)], capsys)[0] == 0
        assert out_a.read_bytes() == out_b.read_bytes()
        lines = out_a.read_text().strip().split("\n")
        assert lines[0] == "n,trials,mean_excess,max_excess,min_excess"
        assert len(lines) == 5

    def test_jobs_flag_output_identical(self, tmp_path, capsys):
        out_a = tmp_path / "a.csv"
        out_b = tmp_path / "b.csv"
        base = ["greedy-bench", "--n", "2,4", "--trials", "5", "--seed", "3"]
        run_cli(base + ["--out", str(out_a)], capsys)
        run_cli(base + ["--jobs", "2", "--out", str(out_b)], capsys)
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_bad_range_rejected(self, capsys):
        code, _, stderr = run_cli(["greedy-bench", "--n", "5:2"], capsys)
        assert code == 2
        assert "error: validation:" in stderr


class TestSynthIdentifiability:
    def test_csv_rows_per_sigma(self, tmp_path, capsys):
        out = tmp_path / "ident.csv"
        code, _, _ = run_cli(
            [
                "synth-identifiability",
                "--n", "4",
                "--sigma", "3:5",
                "--trials", "5",
                "--seed", "1",
                "--out", str(out),
            ],
            capsys,
        )
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "n,sigma,trials_kept,success_rate"
        assert len(lines) == 4
        assert all(line.startswith("4,") for line in lines[1:])

    def test_multiple_n_values(self, tmp_path, capsys):
        out = tmp_path / "ident.csv"
        code, _, _ = run_cli(
            [
                "synth-identifiability",
                "--n", "4,6",
                "--sigma", "4",
                "--trials", "4",
                "--seed", "1",
                "--out", str(out),
            ],
            capsys,
        )
        assert code == 0
        rows = out.read_text().strip().split("\n")[1:]
        assert [r.split(",")[0] for r in rows] == ["4", "6"]

    def test_starvation_exit_code(self, tmp_path, capsys):
        out = tmp_path / "ident.csv"
        code, _, stderr = run_cli(
            [
                "synth-identifiability",
                "--n", "4",
                "--sigma", "2",
                "--trials", "2",
                "--seed", "1",
                "--entropy-cap", "0.0001",
                "--out", str(out),
            ],
            capsys,
        )
        assert code == 4
        assert "starved" in stderr
        assert out.exists()  # partial results still written


class TestEvalPairs:
    @pytest.fixture
    def pair_dir(self, tmp_path):
        rng = np.random.default_rng(60)
        root = tmp_path / "pairs"
        root.mkdir()
        meta = []
        for k in range(1, 4):
            x = rng.normal(size=300)
            y = np.round(2 * x) + rng.normal(scale=0.1, size=300)
            np.savetxt(root / f"pair{k:04d}.txt", np.column_stack([x, y]))
            meta.append(f"{k} -> 1.0")
        (root / "pairmeta.txt").write_text("\n".join(meta) + "\n")
        return root

    def test_curve_csv(self, tmp_path, pair_dir, capsys):
        out = tmp_path / "curve.csv"
        code, _, _ = run_cli(
            ["eval-pairs", "--path", str(pair_dir), "--t", "0:0.2:0.1",
             "--out", str(out)],
            capsys,
        )
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "t,decision_rate,accuracy,ci_low,ci_high,n_decided"
        assert len(lines) >= 2

    def test_alpha_env_override(self, tmp_path, pair_dir, capsys, monkeypatch):
        out_default = tmp_path / "d.csv"
        out_wide = tmp_path / "w.csv"
        args = ["eval-pairs", "--path", str(pair_dir), "--t", "0"]
        run_cli(args + ["--out", str(out_default)], capsys)
        monkeypatch.setenv("ENTROPIC_CI_ALPHA", "0.5")
        run_cli(args + ["--out", str(out_wide)], capsys)
        row_d = out_default.read_text().strip().split("\n")[1].split(",")
        row_w = out_wide.read_text().strip().split("\n")[1].split(",")
        # same accuracy, narrower interval at alpha=0.5
        assert row_d[2] == row_w[2]
        assert float(row_w[3]) >= float(row_d[3])
        assert float(row_w[4]) <= float(row_d[4])

    def test_explicit_alpha_beats_env(self, tmp_path, pair_dir, capsys, monkeypatch):
        out_a = tmp_path / "a.csv"
        out_b = tmp_path / "b.csv"
        monkeypatch.setenv("ENTROPIC_CI_ALPHA", "0.5")
        run_cli(
            ["eval-pairs", "--path", str(pair_dir), "--t", "0", "--alpha", "0.05",
             "--out", str(out_a)],
            capsys,
        )
        monkeypatch.delenv("ENTROPIC_CI_ALPHA")
        run_cli(
            ["eval-pairs", "--path", str(pair_dir), "--t", "0", "--out", str(out_b)],
            capsys,
        )
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_missing_directory_is_io(self, tmp_path, capsys):
        code, _, stderr = run_cli(
            ["eval-pairs", "--path", str(tmp_path / "nope")], capsys
        )
        assert code == 3
        assert stderr.startswith("error: io:")


class TestManifest:
    def test_stdout_mode_manifest_on_stderr(self, joint_file, capsys):
        code, _, stderr = run_cli(["infer", str(joint_file)], capsys)
        assert code == 0
        manifest = json.loads(stderr.strip().split("\n")[-1])
        assert manifest["command"] == "infer"
        assert manifest["outputs"] == []
