# app/services/harness_service.py

from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from app.database.repositories import TrajectoryRepository, WorldRepository
from app.external.policy_endpoint import RemotePolicyClient
from app.models.episode import EpisodeConfig, EpisodeResult, Outcome
from app.models.suite import (
    AblationRow,
    EpisodeRecord,
    ManifestEntry,
    SuiteConfig,
    SuiteReport,
    WorldManifest,
)
from app.models.world import GenParams, ScenarioClass, WorldSpec
from app.policies import build_policies
from app.services.metrics_service import compute_metrics, render_ablation, render_summary
from app.services.orchestrator import run_episode
from app.simulator.environment import SimEnvironment
from app.simulator.generator import generate_world
from app.utils.logger import logger


def episode_id_for(index: int, world: WorldSpec) -> str:
    return f"{world.category.value}-{index:04d}-{world.digest}"


def write_worlds(
    requested: Sequence[Tuple[ScenarioClass, GenParams]], directory: Path
) -> Path:
    """Generate each (class, params) pair into `directory` and write the manifest."""
    repository = WorldRepository.at(directory)
    entries = []
    for index, (category, params) in enumerate(requested):
        world = generate_world(params, category)
        entries.append(
            ManifestEntry(
                index=index,
                seed=params.seed,
                category=category,
                params=params,
                digest=world.digest,
                file=repository.save_world(world),
            )
        )
    logger.info(f"Wrote {len(entries)} worlds to {directory}")
    return repository.save_manifest(WorldManifest(entries=entries))


def ablation_variants(
    episode: EpisodeConfig, single_step: bool = False
) -> List[Tuple[str, str, EpisodeConfig]]:
    """(label, slug, config) for each comparison row, full configuration first."""

    def variant(**ablation) -> EpisodeConfig:
        return episode.model_copy(
            update={"ablation": episode.ablation.model_copy(update=ablation)}
        )

    variants = [
        ("Full", "full", variant(enable_backtrack=True, enable_tracker=True)),
        ("w/o Backtrack", "no-backtrack", variant(enable_backtrack=False, enable_tracker=True)),
        ("w/o Tracker", "no-tracker", variant(enable_backtrack=True, enable_tracker=False)),
    ]
    if single_step:
        single = variant(enable_backtrack=True, enable_tracker=True)
        variants.append(
            ("Single-step", "single-step", single.model_copy(update={"max_backtrack_depth": 1}))
        )
    return variants


class HarnessService:
    def __init__(
        self,
        config: SuiteConfig,
        client: Optional[RemotePolicyClient] = None,
    ):
        self.config = config
        self.client = client
        self.worlds = WorldRepository.at(config.manifest.parent)
        self.results = TrajectoryRepository.at(config.output_dir)

    def run_one(self, index: int, entry: ManifestEntry, world: WorldSpec) -> EpisodeRecord:
        episode_id = episode_id_for(index, world)
        crashed = False
        try:
            env = SimEnvironment(world)
            env.reset()
            policies = build_policies(
                self.config.policy,
                world,
                episode_seed=self.config.episode.seed + index,
                client=self.client,
            )
            result = run_episode(
                env,
                policies.planner,
                policies.executor,
                policies.tracker,
                self.config.episode,
                episode_id,
            )
        except Exception as e:
            logger.warning(f"Episode {episode_id} crashed: {e.__class__.__name__}: {e}")
            crashed = True
            result = EpisodeResult(
                episode_id=episode_id,
                outcome=Outcome.FAIL,
                diagnostic=f"crash: {e.__class__.__name__}: {e}",
            )

        self.results.save_trajectory(episode_id, result.trajectory)
        return EpisodeRecord(
            episode_id=episode_id,
            world_digest=world.digest,
            category=entry.category,
            outcome=result.outcome,
            steps_used=result.steps_used,
            backtrack_attempts=result.backtrack_attempts,
            backtrack_successes=result.backtrack_successes,
            backtrack_steps_total=result.backtrack_steps_total,
            backtrack_retries=result.backtrack_retries,
            plan_revision=result.final_plan.revision,
            diagnostic=result.diagnostic,
            crashed=crashed,
        )

    def run_suite(self) -> SuiteReport:
        suite = self.worlds.load_suite(self.config.manifest.name)
        logger.info(
            f"Running {len(suite)} episodes from {self.config.manifest} "
            f"with {self.config.policy.kind.value} policies, parallelism={self.config.parallelism}"
        )

        with ThreadPoolExecutor(max_workers=self.config.parallelism) as pool:
            records = list(
                pool.map(
                    lambda item: self.run_one(item[0], *item[1]),
                    enumerate(suite),
                )
            )

        metrics = compute_metrics(records)
        self.results.save_results(records)
        self.results.save_summary(metrics, render_summary(metrics))
        logger.info(
            f"Suite finished: accuracy={metrics.accuracy} episodes={metrics.episodes} "
            f"output={self.config.output_dir}"
        )
        return SuiteReport(output_dir=self.config.output_dir, metrics=metrics, records=records)

    def run_ablations(self, single_step: bool = False) -> List[AblationRow]:
        rows = []
        for label, slug, episode in ablation_variants(self.config.episode, single_step):
            config = self.config.model_copy(
                update={"episode": episode, "output_dir": self.config.output_dir / slug}
            )
            report = HarnessService(config, self.client).run_suite()
            rows.append(
                AblationRow(
                    label=label,
                    slug=slug,
                    metrics=report.metrics,
                    outcomes=[r.outcome for r in report.records],
                    crashed=report.crashed,
                )
            )

        self.results.save_json(
            "ablation.json", {row.slug: row.metrics.model_dump(mode="json") for row in rows}
        )
        self.results.save_text("ablation.txt", render_ablation(rows))
        return rows
