"""Command-line behavior: exit codes, artifact layout, determinism."""

import csv
import filecmp
import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest
from conftest import CONFIG_DIR

from carpenter import cli
from carpenter.serialization import load_result


def write_config(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def config_path(name):
    return str(CONFIG_DIR / f"{name}.json")


def read_rows(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.reader(fh))


class TestCheck:
    def test_valid_config_passes(self, capsys):
        assert cli.main(["check", "--config", config_path("identity")]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["ok"] is True
        assert doc["first_violation_index"] is None

    def test_majorization_failure_exits_two(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path, {"label": "bad", "lam": [1.0, 2.0], "d": [0.5, 1.0]}
        )
        assert cli.main(["check", "--config", str(cfg)]) == 2
        doc = json.loads(capsys.readouterr().out)
        assert doc["ok"] is False
        assert doc["first_violation_index"] == 1

    def test_regime_problem_exits_two(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {
                "label": "flat",
                "lam": [1.0, 1.0, 1.0],
                "d": [1.2, 1.3, 1.5],
                "regime": "conservation",
            },
        )
        assert cli.main(["check", "--config", str(cfg)]) == 2
        doc = json.loads(capsys.readouterr().out)
        assert doc["regime_problems"]

    def test_out_writes_profile(self, tmp_path, capsys):
        out = tmp_path / "prof"
        code = cli.main(
            ["check", "--config", config_path("zeros_paired"), "--out", str(out)]
        )
        assert code == 0
        capsys.readouterr()
        rows = read_rows(out / "delta_profile.csv")
        assert rows[0] == ["index", "eigenvalue", "target", "surplus"]
        assert len(rows) == 17
        verdict = json.loads((out / "verdict.json").read_text(encoding="utf-8"))
        assert verdict["ok"] is True

    def test_missing_config_exits_three(self, tmp_path, capsys):
        code = cli.main(["check", "--config", str(tmp_path / "absent.json")])
        assert code == 3
        assert "format error" in capsys.readouterr().err

    def test_malformed_config_exits_three(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json", encoding="utf-8")
        assert cli.main(["check", "--config", str(bad)]) == 3
        capsys.readouterr()


class TestConstruct:
    def test_artifact_directory_layout(self, tmp_path, capsys):
        out = tmp_path / "run"
        code = cli.main(
            ["construct", "--config", config_path("decay_geometric"), "--out", str(out)]
        )
        assert code == 0
        assert "pass=True" in capsys.readouterr().out
        for name in (
            "sequences.json",
            "ops.json",
            "transforms.json",
            "vectors.csv",
            "residuals.csv",
            "moves_chain_c1.csv",
            "report.json",
            "defect_table.csv",
        ):
            assert (out / name).exists(), name
        report = json.loads((out / "report.json").read_text(encoding="utf-8"))
        assert report["pass"] is True

    def test_loaded_result_round_trips(self, tmp_path, capsys):
        out = tmp_path / "run"
        assert (
            cli.main(
                [
                    "construct",
                    "--config",
                    config_path("zeros_paired"),
                    "--out",
                    str(out),
                ]
            )
            == 0
        )
        capsys.readouterr()
        result = load_result(out)
        assert result.route == "zeros"
        assert result.window == 16
        assert sorted(result.constructed) == list(range(1, 17))

    def test_steps_override(self, tmp_path, capsys):
        out = tmp_path / "run"
        code = cli.main(
            [
                "construct",
                "--config",
                config_path("decay_geometric"),
                "--steps",
                "50",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        capsys.readouterr()
        seq = json.loads((out / "sequences.json").read_text(encoding="utf-8"))
        assert seq["params"]["decay"]["steps"] == 50

    def test_domain_error_exits_two(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path, {"label": "thin", "lam": [1.0, 2.0], "d": [0.5, 1.0]}
        )
        out = tmp_path / "run"
        assert cli.main(["construct", "--config", str(cfg), "--out", str(out)]) == 2
        assert "error" in capsys.readouterr().err


class TestVerifyCommand:
    @pytest.fixture()
    def artifacts(self, tmp_path, capsys):
        out = tmp_path / "fresh"
        assert (
            cli.main(
                [
                    "construct",
                    "--config",
                    config_path("neumann_dirichlet"),
                    "--out",
                    str(out),
                ]
            )
            == 0
        )
        capsys.readouterr()
        return out

    def test_fresh_artifacts_pass(self, artifacts, capsys):
        assert cli.main(["verify", str(artifacts)]) == 0
        assert "pass=True" in capsys.readouterr().out

    def test_flipped_coefficient_detected(self, artifacts, tmp_path, capsys):
        bad = tmp_path / "bad_coeff"
        shutil.copytree(artifacts, bad)
        rows = read_rows(bad / "vectors.csv")
        target = next(i for i, r in enumerate(rows[1:], 1) if abs(float(r[2])) >= 1e-6)
        rows[target][2] = repr(-float(rows[target][2]))
        with open(bad / "vectors.csv", "w", encoding="utf-8", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
        assert cli.main(["verify", str(bad)]) == 2
        assert "pass=False" in capsys.readouterr().out

    def test_perturbed_alpha_detected(self, artifacts, tmp_path, capsys):
        bad = tmp_path / "bad_alpha"
        shutil.copytree(artifacts, bad)
        moves = sorted(bad.glob("moves_chain_*.csv"))[0]
        rows = read_rows(moves)
        alpha = min(float(rows[1][3]) + 1e-3, 1.0)
        rows[1][3] = repr(alpha)
        with open(moves, "w", encoding="utf-8", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
        assert cli.main(["verify", str(bad)]) == 2
        capsys.readouterr()

    def test_missing_report_exits_three(self, artifacts, tmp_path, capsys):
        bare = tmp_path / "no_report"
        shutil.copytree(artifacts, bare)
        (bare / "report.json").unlink()
        assert cli.main(["verify", str(bare)]) == 3
        assert "format error" in capsys.readouterr().err

    def test_corrupt_metadata_exits_three(self, artifacts, tmp_path, capsys):
        broken = tmp_path / "broken"
        shutil.copytree(artifacts, broken)
        (broken / "sequences.json").write_text("[1, 2", encoding="utf-8")
        assert cli.main(["verify", str(broken)]) == 3
        capsys.readouterr()

    def test_unknown_directory_exits_three(self, tmp_path, capsys):
        assert cli.main(["verify", str(tmp_path / "nowhere")]) == 3
        capsys.readouterr()


class TestDemo:
    def test_sine_cosine_table(self, tmp_path, capsys):
        out = tmp_path / "table"
        code = cli.main(
            ["demo", "--demo", "sine-cosine-table", "--out", str(out)]
        )
        assert code == 0
        assert "rows=" in capsys.readouterr().out
        rows = read_rows(out / "sine_cosine_table.csv")
        assert rows[0] == ["j", "k", "coefficient"]
        table = {(r[0], r[1]): r[2] for r in rows[1:]}
        assert table[("1", "0")] == "2.0"
        assert float(table[("2", "1")]) == pytest.approx(4.0 / 3.0)
        assert table[("2", "0")] == "0.0"

    def test_neumann_dirichlet_demo(self, tmp_path, capsys):
        out = tmp_path / "demo"
        code = cli.main(
            [
                "demo",
                "--config",
                config_path("neumann_dirichlet"),
                "--out",
                str(out),
            ]
        )
        assert code == 0
        assert "pass=True" in capsys.readouterr().out
        assert (out / "report.json").exists()
        sampled = sorted(out.glob("function_*.csv"))
        assert sampled
        header = read_rows(sampled[0])[0]
        assert header[0] == "x"

    def test_demo_requires_a_name(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"label": "noop", "lam": [0.0], "d": [0.0]})
        out = tmp_path / "x"
        assert cli.main(["demo", "--config", str(cfg), "--out", str(out)]) == 2
        capsys.readouterr()


class TestFigures:
    def test_construct_renders_png_set(self, tmp_path, capsys):
        out = tmp_path / "run"
        code = cli.main(
            [
                "construct",
                "--config",
                config_path("zeros_paired"),
                "--out",
                str(out),
                "--figures",
            ]
        )
        assert code == 0
        capsys.readouterr()
        for name in ("surplus_profile.png", "diagonal_fit.png", "defect_profile.png"):
            assert (out / name).stat().st_size > 0, name

    def test_demo_figures_include_sampled_functions(self, tmp_path, capsys):
        out = tmp_path / "demo"
        code = cli.main(
            [
                "demo",
                "--config",
                config_path("neumann_dirichlet"),
                "--window",
                "16",
                "--steps",
                "8",
                "--out",
                str(out),
                "--figures",
            ]
        )
        assert code == 0
        capsys.readouterr()
        assert (out / "functions.png").stat().st_size > 0


class TestExport:
    def test_bundle_contents(self, tmp_path, capsys):
        out = tmp_path / "run"
        assert (
            cli.main(
                [
                    "construct",
                    "--config",
                    config_path("conservation_wiggle"),
                    "--out",
                    str(out),
                ]
            )
            == 0
        )
        bundle_path = tmp_path / "bundle.json"
        assert cli.main(["export", str(out), "--out", str(bundle_path)]) == 0
        assert "exported" in capsys.readouterr().out
        bundle = json.loads(bundle_path.read_text(encoding="utf-8"))
        assert bundle["version"] == 1
        assert bundle["route"] == "conservation"
        assert bundle["report"]["pass"] is True
        assert set(bundle["moves"]) == {op["chain_id"] for op in bundle["ops"]}
        assert bundle["vectors"]

    def test_export_missing_directory_exits_three(self, tmp_path, capsys):
        target = tmp_path / "bundle.json"
        assert cli.main(["export", str(tmp_path / "gone"), "--out", str(target)]) == 3
        capsys.readouterr()


class TestDeterminism:
    def test_identical_runs_produce_identical_bytes(self, tmp_path, capsys):
        dirs = []
        for tag in ("a", "b"):
            out = tmp_path / tag
            assert (
                cli.main(
                    [
                        "construct",
                        "--config",
                        config_path("zeros_paired"),
                        "--out",
                        str(out),
                    ]
                )
                == 0
            )
            dirs.append(out)
        capsys.readouterr()
        names = sorted(p.name for p in dirs[0].iterdir())
        assert names == sorted(p.name for p in dirs[1].iterdir())
        match, mismatch, errors = filecmp.cmpfiles(
            dirs[0], dirs[1], names, shallow=False
        )
        assert mismatch == [] and errors == []
        assert match == names


class TestEntryPoint:
    def test_module_invocation(self, tmp_path):
        proc = subprocess.run(
            [
                sys.executable,
                "-m",
                "carpenter.cli",
                "check",
                "--config",
                config_path("identity"),
            ],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["ok"] is True

    def test_missing_command_is_usage_error(self):
        with pytest.raises(SystemExit):
            cli.main([])
