# app/services/replay_service.py

from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from app.database.local.filesystem import LocalFileStore
from app.database.repositories import WorldRepository
from app.models.action import ActionSpec
from app.models.suite import Divergence, ReplayReport, ReplayVerdict
from app.models.world import WorldSpec
from app.simulator.environment import SimEnvironment
from app.utils.exceptions import SimError, NotFoundError, ReplayWorldMismatch
from app.utils.logger import logger


def world_digest_of(episode_id: str) -> str:
    return episode_id.rsplit("-", 1)[-1]


def _load_world(episode_id: str, worlds_dir: Path) -> WorldSpec:
    digest = world_digest_of(episode_id)
    try:
        world = WorldRepository.at(worlds_dir).load_world(digest)
    except NotFoundError:
        raise ReplayWorldMismatch(
            "No world with the referenced digest", details={"digest": digest}
        )
    if world.digest != digest:
        raise ReplayWorldMismatch(
            "World file content does not match its digest",
            details={"expected": digest, "actual": world.digest},
        )
    return world


def _diverged(log: Path, episode_id: str, checked: int, **divergence) -> ReplayReport:
    report = ReplayReport(
        log=str(log),
        episode_id=episode_id,
        verdict=ReplayVerdict.DIVERGED,
        lines_checked=checked,
        divergence=Divergence(**divergence),
    )
    logger.info(f"Replay of {log.name}: DIVERGED at line {report.divergence.line}")
    return report


def replay(log: Path, worlds_dir: Path) -> ReplayReport:
    """Re-execute a trajectory log against its world and check every logged state.

    Lines are numbered from 1. A checkpoint is taken at reset and after every
    line, which reproduces every token the episode could have restored.
    """
    log = Path(log)
    records: List[Dict[str, Any]] = LocalFileStore(log.parent).read_jsonl(log.name)
    episode_id: Optional[str] = records[0].get("episode_id") if records else None
    episode_id = episode_id or log.stem

    world = _load_world(episode_id, worlds_dir)
    env = SimEnvironment(world)
    env.reset()
    env.checkpoint()

    for line, record in enumerate(records, start=1):
        if record.get("step") != line - 1:
            return _diverged(
                log, episode_id, line - 1, line=line,
                expected=str(line - 1), actual=str(record.get("step")),
                reason="step index is not contiguous",
            )
        current = env.current_fingerprint()
        if record.get("state_from") != current:
            return _diverged(
                log, episode_id, line - 1, line=line,
                expected=record.get("state_from"), actual=current,
                reason="state_from does not match the replayed state",
            )
        try:
            env.step(ActionSpec.model_validate(record.get("action")))
        except (SimError, ValidationError) as e:
            return _diverged(
                log, episode_id, line - 1, line=line,
                expected=record.get("state_to"), actual=None,
                reason=f"action rejected on replay: {e}",
            )
        reached = env.current_fingerprint()
        if record.get("state_to") != reached:
            return _diverged(
                log, episode_id, line - 1, line=line,
                expected=record.get("state_to"), actual=reached,
                reason="state_to does not match the replayed state",
            )
        env.checkpoint()

    logger.info(f"Replay of {log.name}: CLEAN ({len(records)} lines)")
    return ReplayReport(
        log=str(log),
        episode_id=episode_id,
        verdict=ReplayVerdict.CLEAN,
        lines_checked=len(records),
    )
