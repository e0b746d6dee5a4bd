# app/policies/__init__.py

from typing import Optional

from app.external.policy_endpoint import RemotePolicyClient
from app.models.suite import PolicyKind, PolicySelection
from app.models.world import WorldSpec
from app.policies.base import Executor, Planner, PolicyBundle, Tracker
from app.policies.oracle import OracleExecutor, OraclePlanner, OracleTracker
from app.policies.remote import RemoteExecutor, RemotePlanner, RemoteSession, RemoteTracker
from app.policies.scripted import ScriptedExecutor, ScriptedPlanner, ScriptedTracker


def build_policies(
    selection: PolicySelection,
    world: WorldSpec,
    episode_seed: int = 0,
    client: Optional[RemotePolicyClient] = None,
) -> PolicyBundle:
    """Planner, executor and tracker for one episode on `world`."""
    if selection.kind == PolicyKind.ORACLE:
        return PolicyBundle(
            planner=OraclePlanner(world),
            executor=OracleExecutor(world),
            tracker=OracleTracker(world),
        )

    if selection.kind == PolicyKind.SCRIPTED:
        params = selection.scripted
        return PolicyBundle(
            planner=ScriptedPlanner(world, params),
            executor=ScriptedExecutor(world, params, episode_seed),
            tracker=ScriptedTracker(world, params),
        )

    session = RemoteSession(
        client or RemotePolicyClient(selection.endpoint), world.task(), seed=episode_seed
    )
    return PolicyBundle(
        planner=RemotePlanner(session),
        executor=RemoteExecutor(session),
        tracker=RemoteTracker(session),
    )


__all__ = ["Executor", "Planner", "PolicyBundle", "Tracker", "build_policies"]
