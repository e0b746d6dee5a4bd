import json

import pytest
from typer.testing import CliRunner

from app.cli import _suite_config, app
from app.config import settings
from app.models.suite import PolicyKind

runner = CliRunner()


@pytest.fixture
def worlds_dir(tmp_path):
    directory = tmp_path / "worlds"
    result = runner.invoke(app, ["gen", "--preset", "forced", "--out", str(directory)])
    assert result.exit_code == 0, result.output
    return directory


def test_gen_writes_worlds_and_manifest(worlds_dir):
    manifest = json.loads((worlds_dir / "manifest.json").read_text())
    assert len(manifest["entries"]) == 30
    assert all((worlds_dir / e["file"]).is_file() for e in manifest["entries"])


def test_run_replay_and_metrics(worlds_dir, tmp_path):
    out = tmp_path / "runs"
    result = runner.invoke(
        app, ["run", "--manifest", str(worlds_dir / "manifest.json"), "--out", str(out)]
    )
    assert result.exit_code == 0, result.output
    assert "Acc" in result.output

    logs = sorted(str(p) for p in (out / "trajectories").glob("*.jsonl"))
    result = runner.invoke(app, ["replay", *logs, "--worlds", str(worlds_dir)])
    assert result.exit_code == 0, result.output
    assert result.output.count("CLEAN") == 30

    result = runner.invoke(app, ["metrics", "--out", str(out)])
    assert result.exit_code == 0, result.output


def test_ablate_prints_every_configuration(worlds_dir, tmp_path):
    result = runner.invoke(
        app,
        ["ablate", "--manifest", str(worlds_dir / "manifest.json"), "--out", str(tmp_path / "ab")],
    )
    assert result.exit_code == 0, result.output
    for label in ("Full", "w/o Backtrack", "w/o Tracker"):
        assert label in result.output
    assert (tmp_path / "ab" / "ablation.json").is_file()


def test_tampered_log_exits_with_divergence(worlds_dir, tmp_path):
    out = tmp_path / "runs"
    runner.invoke(app, ["run", "--manifest", str(worlds_dir / "manifest.json"), "--out", str(out)])
    log = sorted((out / "trajectories").glob("*.jsonl"))[0]
    lines = [json.loads(line) for line in log.read_text().splitlines()]
    lines[0]["state_from"] = "0" * 64
    log.write_text("".join(json.dumps(line) + "\n" for line in lines))

    result = runner.invoke(app, ["replay", str(log), "--worlds", str(worlds_dir)])
    assert result.exit_code == 3
    assert "DIVERGED at line 1" in result.output


@pytest.mark.parametrize(
    "args",
    [
        ["run", "--manifest", "missing/manifest.json"],
        ["run", "--parallelism", "0"],
        ["gen", "--class", "B", "--detection-depth", "1"],
        ["gen", "--count", "0"],
        ["run", "--policy", "remote"],
    ],
)
def test_configuration_errors_exit_with_one(args, worlds_dir, tmp_path):
    if args[0] == "run" and "--manifest" not in args:
        args = args + ["--manifest", str(worlds_dir / "manifest.json")]
    args = args + ["--out", str(tmp_path / "out")]
    result = runner.invoke(app, args)
    assert result.exit_code == 1, result.output


def test_endpoint_from_the_environment_wins(worlds_dir, tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "BEAP_POLICY_ENDPOINT", "http://policy.internal:9000")
    config = _suite_config(
        worlds_dir / "manifest.json", 0, 50, 1, tmp_path, PolicyKind.REMOTE,
        "http://flag:1", False, False, False, 1.0, 1.0,
    )
    assert config.policy.endpoint == "http://policy.internal:9000"
