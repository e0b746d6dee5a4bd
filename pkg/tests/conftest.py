from pathlib import Path
from typing import Callable, Optional

import pytest

from app.models.action import ActionKind
from app.models.episode import EpisodeConfig, EpisodeResult
from app.models.suite import PolicyKind, PolicySelection, ScriptedPolicyParams
from app.models.world import GenParams, GoalSpec, ScenarioClass, WorldSpec
from app.policies import build_policies
from app.services.harness_service import write_worlds
from app.services.orchestrator import EpisodeRunner
from app.simulator.builder import WorldBuilder
from app.simulator.environment import SimEnvironment
from app.simulator.generator import generate_world, preset_worlds


@pytest.fixture
def chain_world() -> Callable[..., WorldSpec]:
    def make(depth: int = 3, seed: int = 0, irreversible_fraction: float = 0.0) -> WorldSpec:
        params = GenParams(depth=depth, seed=seed, irreversible_fraction=irreversible_fraction)
        return generate_world(params, ScenarioClass.A)

    return make


@pytest.fixture
def decoy_world() -> Callable[..., WorldSpec]:
    def make(seed: int = 0, **overrides) -> WorldSpec:
        params = GenParams(**{"depth": 4, "detection_depth": 2, "seed": seed, **overrides})
        return generate_world(params, ScenarioClass.B)

    return make


@pytest.fixture
def drift_world() -> Callable[..., WorldSpec]:
    def make(seed: int = 0, depth: int = 4) -> WorldSpec:
        return generate_world(GenParams(depth=depth, seed=seed), ScenarioClass.C)

    return make


@pytest.fixture
def irreversible_middle_world() -> WorldSpec:
    """p0 -> g1 -> g2 (goal); decoy g1 -> d1 -> d2 -> d3 -> d4 whose d1 -> d2 edge has no inverse."""
    builder = WorldBuilder(ScenarioClass.B, GenParams(depth=2, detection_depth=3))
    builder.page("p0")
    builder.chain("p0", ["g1", "g2"], kind=ActionKind.CLICK, reversible=True)
    builder.link("g1", "d1", kind=ActionKind.CLICK, reversible=True, decoy=True)
    builder.link("d1", "d2", kind=ActionKind.CLICK, reversible=False)
    builder.chain("d2", ["d3", "d4"], kind=ActionKind.CLICK, reversible=True)
    return builder.build(root="p0", goal=GoalSpec(pages=["g2"]))


@pytest.fixture
def one_level_world() -> WorldSpec:
    """p0 -> g1 -> g2 (goal) with a reversible dead-end leaf d1 off g1."""
    builder = WorldBuilder(ScenarioClass.B, GenParams(depth=2, detection_depth=1))
    builder.page("p0")
    builder.chain("p0", ["g1", "g2"], kind=ActionKind.CLICK, reversible=True)
    builder.link("g1", "d1", kind=ActionKind.CLICK, reversible=True, decoy=True)
    return builder.build(root="p0", goal=GoalSpec(pages=["g2"]))


@pytest.fixture
def root_goal_world() -> WorldSpec:
    builder = WorldBuilder(ScenarioClass.A, GenParams(depth=1))
    builder.page("p0")
    return builder.build(root="p0", goal=GoalSpec(pages=["p0"]))


@pytest.fixture
def make_runner() -> Callable[..., EpisodeRunner]:
    def make(
        world: WorldSpec,
        config: Optional[EpisodeConfig] = None,
        selection: Optional[PolicySelection] = None,
        episode_seed: int = 0,
    ) -> EpisodeRunner:
        env = SimEnvironment(world)
        env.reset()
        policies = build_policies(selection or PolicySelection(), world, episode_seed=episode_seed)
        return EpisodeRunner(
            env,
            policies.planner,
            policies.executor,
            policies.tracker,
            config or EpisodeConfig(),
            episode_id=f"test-{world.digest[:8]}",
        )

    return make


@pytest.fixture
def run_scripted(make_runner) -> Callable[..., EpisodeResult]:
    def run(
        world: WorldSpec,
        config: Optional[EpisodeConfig] = None,
        params: Optional[ScriptedPolicyParams] = None,
        episode_seed: int = 0,
    ) -> EpisodeResult:
        selection = PolicySelection(kind=PolicyKind.SCRIPTED, scripted=params or ScriptedPolicyParams())
        return make_runner(world, config, selection, episode_seed).run()

    return run


@pytest.fixture
def run_oracle(make_runner) -> Callable[..., EpisodeResult]:
    def run(world: WorldSpec, config: Optional[EpisodeConfig] = None) -> EpisodeResult:
        return make_runner(world, config, PolicySelection(kind=PolicyKind.ORACLE)).run()

    return run


@pytest.fixture
def forced_manifest(tmp_path) -> Path:
    return write_worlds(preset_worlds("forced"), tmp_path / "worlds")

