# app/cli.py

from enum import Enum
from pathlib import Path
from typing import Callable, List, Optional, TypeVar

import typer
from pydantic import ValidationError

from app.config import settings
from app.constants import (
    DEFAULT_DETECTION_DEPTH,
    DEFAULT_IRREVERSIBLE_FRACTION,
    DEFAULT_MAX_STEPS,
    EXIT_CONFIG_ERROR,
    EXIT_OK,
    EXIT_REPLAY_DIVERGENCE,
    EXIT_SUITE_FAILURE,
)
from app.database.repositories import TrajectoryRepository
from app.database.repositories.world_repository import MANIFEST_NAME
from app.models.episode import AblationConfig, EpisodeConfig
from app.models.suite import (
    PolicyKind,
    PolicySelection,
    ReplayVerdict,
    ScriptedPolicyParams,
    SuiteConfig,
)
from app.models.world import GenParams, ScenarioClass
from app.services.harness_service import HarnessService, write_worlds
from app.services.metrics_service import recompute, render_ablation, render_summary
from app.services.replay_service import replay as replay_log
from app.simulator.generator import preset_worlds
from app.utils.exceptions import (
    ConfigError,
    GenParamError,
    NotFoundError,
    ReplayWorldMismatch,
    StorageError,
)
from app.utils.logger import logger

app = typer.Typer(help="Depth-first backtracking simulator for GUI agents.", no_args_is_help=True)

T = TypeVar("T")


class Preset(str, Enum):
    FORCED = "forced"
    DECOY = "decoy"


def _configured(build: Callable[[], T]) -> T:
    """Run `build`, turning invalid knobs into exit code 1."""
    try:
        return build()
    except (ConfigError, GenParamError, NotFoundError, StorageError) as e:
        logger.error(f"Configuration error: {e}")
        raise typer.Exit(EXIT_CONFIG_ERROR)
    except ValidationError as e:
        logger.error(f"Configuration error: {e.error_count()} invalid field(s)\n{e}")
        raise typer.Exit(EXIT_CONFIG_ERROR)


def _suite_config(
    manifest: Path,
    seed: int,
    max_steps: int,
    parallelism: int,
    out: Path,
    policy: PolicyKind,
    endpoint: Optional[str],
    no_backtrack: bool,
    no_tracker: bool,
    single_step: bool,
    knowledge: float,
    bias: float,
) -> SuiteConfig:
    episode = EpisodeConfig(
        max_steps=max_steps,
        seed=seed,
        ablation=AblationConfig(enable_backtrack=not no_backtrack, enable_tracker=not no_tracker),
        max_backtrack_depth=1 if single_step else None,
    )
    selection = PolicySelection(
        kind=policy,
        scripted=ScriptedPolicyParams(knowledge=knowledge, wrong_branch_bias=bias, seed=seed),
        endpoint=settings.BEAP_POLICY_ENDPOINT or endpoint,
    )
    return SuiteConfig(
        manifest=manifest,
        episode=episode,
        policy=selection,
        parallelism=parallelism,
        output_dir=out,
    )


@app.command()
def gen(
    category: ScenarioClass = typer.Option(ScenarioClass.A, "--class", help="Scenario class"),
    count: int = typer.Option(10, help="Number of worlds"),
    seed: int = typer.Option(0, help="Seed of the first world"),
    depth: int = typer.Option(4),
    branching: int = typer.Option(1),
    traps: int = typer.Option(0),
    irreversible: float = typer.Option(DEFAULT_IRREVERSIBLE_FRACTION),
    detection_depth: int = typer.Option(DEFAULT_DETECTION_DEPTH),
    preset: Optional[Preset] = typer.Option(None, help="Named suite; overrides the other knobs"),
    out: Path = typer.Option(settings.WORLD_DIR, help="World directory"),
):
    """Generate worlds and their manifest."""

    def plan():
        if preset is not None:
            return preset_worlds(preset.value)
        if count < 1:
            raise ConfigError("--count must be at least 1", details={"count": count})
        return [
            (
                category,
                GenParams(
                    depth=depth,
                    branching=branching,
                    n_traps=traps,
                    irreversible_fraction=irreversible,
                    detection_depth=detection_depth,
                    seed=seed + n,
                ),
            )
            for n in range(count)
        ]

    requested = _configured(plan)
    path = _configured(lambda: write_worlds(requested, out))
    typer.echo(f"Wrote {len(requested)} worlds and {path}")


@app.command()
def run(
    manifest: Path = typer.Option(settings.WORLD_DIR / MANIFEST_NAME, help="World manifest"),
    seed: int = typer.Option(0),
    max_steps: int = typer.Option(DEFAULT_MAX_STEPS),
    parallelism: int = typer.Option(1),
    out: Path = typer.Option(settings.OUTPUT_DIR, help="Output directory"),
    policy: PolicyKind = typer.Option(PolicyKind.SCRIPTED),
    endpoint: Optional[str] = typer.Option(None, help="Remote policy base URL"),
    no_backtrack: bool = typer.Option(False, "--no-backtrack"),
    no_tracker: bool = typer.Option(False, "--no-tracker"),
    single_step: bool = typer.Option(False, "--single-step", help="Only undo the last action"),
    knowledge: float = typer.Option(1.0, help="Scripted planner knowledge"),
    bias: float = typer.Option(1.0, help="Scripted executor wrong-branch bias"),
):
    """Run every world in the manifest and write results."""
    config = _configured(
        lambda: _suite_config(
            manifest, seed, max_steps, parallelism, out, policy, endpoint,
            no_backtrack, no_tracker, single_step, knowledge, bias,
        )
    )
    report = _configured(HarnessService(config).run_suite)
    typer.echo(render_summary(report.metrics), nl=False)
    if report.crashed:
        logger.warning(f"{report.crashed} episode(s) crashed")
        raise typer.Exit(EXIT_SUITE_FAILURE)


@app.command()
def ablate(
    manifest: Path = typer.Option(settings.WORLD_DIR / MANIFEST_NAME, help="World manifest"),
    seed: int = typer.Option(0),
    max_steps: int = typer.Option(DEFAULT_MAX_STEPS),
    parallelism: int = typer.Option(1),
    out: Path = typer.Option(settings.OUTPUT_DIR, help="Output directory"),
    policy: PolicyKind = typer.Option(PolicyKind.SCRIPTED),
    endpoint: Optional[str] = typer.Option(None, help="Remote policy base URL"),
    single_step: bool = typer.Option(False, "--single-step", help="Add the single-step row"),
    knowledge: float = typer.Option(1.0),
    bias: float = typer.Option(1.0),
):
    """Run the full, w/o Backtrack and w/o Tracker configurations on the same seeds."""
    config = _configured(
        lambda: _suite_config(
            manifest, seed, max_steps, parallelism, out, policy, endpoint,
            False, False, False, knowledge, bias,
        )
    )
    harness = HarnessService(config)
    rows = _configured(lambda: harness.run_ablations(single_step=single_step))
    typer.echo(render_ablation(rows), nl=False)
    if any(row.crashed for row in rows):
        raise typer.Exit(EXIT_SUITE_FAILURE)


@app.command()
def replay(
    logs: List[Path] = typer.Argument(..., help="Trajectory JSONL files"),
    worlds: Path = typer.Option(settings.WORLD_DIR, help="World directory"),
):
    """Re-execute trajectory logs and report CLEAN or the first divergence."""
    diverged = 0
    for log in logs:
        try:
            report = replay_log(log, worlds)
        except ReplayWorldMismatch as e:
            logger.error(f"{log}: {e}")
            diverged += 1
            continue
        if report.verdict == ReplayVerdict.CLEAN:
            typer.echo(f"{log}: CLEAN ({report.lines_checked} lines)")
        else:
            d = report.divergence
            typer.echo(
                f"{log}: DIVERGED at line {d.line}: {d.reason} "
                f"(expected {d.expected}, got {d.actual})"
            )
            diverged += 1
    if diverged:
        raise typer.Exit(EXIT_REPLAY_DIVERGENCE)


@app.command()
def metrics(
    out: Path = typer.Option(settings.OUTPUT_DIR, help="Output directory of a run"),
):
    """Recompute metrics from results.jsonl and cross-check against the logs."""
    repository = TrajectoryRepository.at(out)
    summary, problems = _configured(lambda: recompute(repository))
    repository.save_summary(summary, render_summary(summary))
    typer.echo(render_summary(summary), nl=False)
    for problem in problems:
        typer.echo(f"mismatch: {problem}")
    raise typer.Exit(EXIT_SUITE_FAILURE if problems else EXIT_OK)


if __name__ == "__main__":
    app()
