from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from app.constants import PROTOCOL_VERSION
from app.models.action import ActionSpec
from app.models.observation import Observation, TaskSpec
from app.models.plan import BackStatus, ExecStatus, Plan
from app.models.trajectory import StepMode, TrajectoryStep


class PolicyRole(str, Enum):
    PLANNER = "planner"
    EXECUTOR = "executor"
    TRACKER = "tracker"


class FailureRecord(BaseModel):
    """One failed edge as sent to remote policies: the state digest and the action."""

    state: str
    action: ActionSpec


def check_version(value: str) -> str:
    if value != PROTOCOL_VERSION:
        raise ValueError(f"unsupported protocol version {value!r}")
    return value


class PolicyRequest(BaseModel):
    version: str = PROTOCOL_VERSION
    role: PolicyRole
    mode: StepMode = StepMode.NORMAL
    task: TaskSpec
    state: str
    observation: Observation
    plan: Optional[Plan] = None
    trajectory_tail: List[TrajectoryStep] = Field(default_factory=list)
    failures: List[FailureRecord] = Field(default_factory=list)
    target: Optional[str] = None
    seed: int = 0

    @field_validator("version")
    @classmethod
    def _check_version(cls, value: str) -> str:
        return check_version(value)

    @model_validator(mode="after")
    def _check_target(self) -> "PolicyRequest":
        if self.mode == StepMode.BACKTRACK and not self.target:
            raise ValueError("Backtrack-mode requests need a target state")
        return self


class PolicyResponse(BaseModel):
    version: str = PROTOCOL_VERSION
    plan: Optional[Plan] = None
    action: Optional[ActionSpec] = None
    exec_status: Optional[ExecStatus] = None
    back_status: Optional[BackStatus] = None

    @field_validator("version")
    @classmethod
    def _check_version(cls, value: str) -> str:
        return check_version(value)
