import json
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from app.models.action import ActionSpec
from app.models.plan import BackStatus, ExecStatus


class StepMode(str, Enum):
    NORMAL = "Normal"
    BACKTRACK = "Backtrack"


class TransitionEdge(BaseModel):
    """(s, a, s') with s and s' given as state identities."""

    source: str = Field(..., min_length=1)
    action: ActionSpec
    target: str = Field(..., min_length=1)

    model_config = ConfigDict(frozen=True)


class TrajectoryStep(BaseModel):
    index: int = Field(..., ge=0)
    mode: StepMode
    edge: TransitionEdge
    plan_revision: Optional[int] = None
    exec_status: Optional[ExecStatus] = None
    back_status: Optional[BackStatus] = None


# Order of keys in every trajectory log line; never reorder.
LOG_FIELDS = (
    "episode_id",
    "step",
    "mode",
    "state_from",
    "action",
    "state_to",
    "exec_status",
    "back_status",
    "plan_revision",
)


class Trajectory(BaseModel):
    steps: List[TrajectoryStep] = Field(default_factory=list)

    def append(
        self,
        mode: StepMode,
        edge: TransitionEdge,
        plan_revision: Optional[int] = None,
    ) -> TrajectoryStep:
        step = TrajectoryStep(
            index=len(self.steps), mode=mode, edge=edge, plan_revision=plan_revision
        )
        self.steps.append(step)
        return step

    @property
    def last(self) -> Optional[TrajectoryStep]:
        return self.steps[-1] if self.steps else None

    def tail(self, n: int) -> "Trajectory":
        return Trajectory(steps=self.steps[-n:] if n > 0 else [])

    def count(self, mode: StepMode) -> int:
        return sum(1 for s in self.steps if s.mode == mode)

    def to_records(self, episode_id: str) -> List[Dict[str, Any]]:
        records = []
        for step in self.steps:
            values = {
                "episode_id": episode_id,
                "step": step.index,
                "mode": step.mode.value,
                "state_from": step.edge.source,
                "action": step.edge.action.wire(),
                "state_to": step.edge.target,
                "exec_status": step.exec_status.value if step.exec_status else None,
                "back_status": step.back_status.value if step.back_status else None,
                "plan_revision": step.plan_revision,
            }
            records.append({field: values[field] for field in LOG_FIELDS})
        return records

    def to_jsonl(self, episode_id: str) -> str:
        return "".join(
            json.dumps(r, separators=(",", ":"), ensure_ascii=False) + "\n"
            for r in self.to_records(episode_id)
        )

    @classmethod
    def from_records(cls, records: List[Dict[str, Any]]) -> "Trajectory":
        steps = []
        for r in records:
            steps.append(
                TrajectoryStep(
                    index=r["step"],
                    mode=StepMode(r["mode"]),
                    edge=TransitionEdge(
                        source=r["state_from"],
                        action=ActionSpec.model_validate(r["action"]),
                        target=r["state_to"],
                    ),
                    plan_revision=r.get("plan_revision"),
                    exec_status=r.get("exec_status"),
                    back_status=r.get("back_status"),
                )
            )
        return cls(steps=steps)
