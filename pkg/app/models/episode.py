from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.constants import (
    DEFAULT_MAX_BACKTRACK_RETRIES,
    DEFAULT_MAX_STEPS,
    DEFAULT_SNAPSHOT_WINDOW,
)
from app.models.plan import Plan
from app.models.trajectory import StepMode, Trajectory


class AblationConfig(BaseModel):
    enable_backtrack: bool = True
    enable_tracker: bool = True


class EpisodeConfig(BaseModel):
    max_steps: int = Field(DEFAULT_MAX_STEPS, ge=1)
    max_backtrack_retries: int = Field(DEFAULT_MAX_BACKTRACK_RETRIES, ge=0)
    snapshot_window: int = Field(DEFAULT_SNAPSHOT_WINDOW, ge=1)
    ablation: AblationConfig = Field(default_factory=AblationConfig)
    seed: int = 0
    # None = unlimited multi-level backtracking; 1 = single-step baseline
    max_backtrack_depth: Optional[int] = Field(None, ge=1)
    allow_reset_replay: bool = True


class Outcome(str, Enum):
    DONE = "DONE"
    FAIL = "FAIL"
    BUDGET_EXHAUSTED = "BUDGET_EXHAUSTED"


class LoopDirective(str, Enum):
    NEXT_STEP = "NEXT_STEP"
    ENTER_BACKTRACK = "ENTER_BACKTRACK"
    TERMINATE_DONE = "TERMINATE_DONE"
    TERMINATE_FAIL = "TERMINATE_FAIL"


class SnapshotEntry(BaseModel):
    state: str
    env_checkpoint: str
    step_index: int = Field(..., ge=0)

    model_config = ConfigDict(frozen=True)


class EpisodeResult(BaseModel):
    episode_id: str = ""
    outcome: Outcome
    steps_used: int = Field(0, ge=0)
    backtrack_attempts: int = Field(0, ge=0)
    backtrack_successes: int = Field(0, ge=0)
    backtrack_steps_total: int = Field(0, ge=0)
    backtrack_retries: int = Field(0, ge=0)
    trajectory: Trajectory = Field(default_factory=Trajectory)
    final_plan: Plan = Field(default_factory=Plan)
    diagnostic: Optional[str] = None

    @model_validator(mode="after")
    def _check_counters(self) -> "EpisodeResult":
        if self.backtrack_successes > self.backtrack_attempts:
            raise ValueError("backtrack_successes exceeds backtrack_attempts")
        if self.backtrack_steps_total > self.steps_used:
            raise ValueError("backtrack_steps_total exceeds steps_used")
        if self.steps_used != len(self.trajectory.steps):
            raise ValueError("steps_used must equal the number of logged steps")
        if self.backtrack_steps_total != self.trajectory.count(StepMode.BACKTRACK):
            raise ValueError("backtrack_steps_total must equal logged Backtrack steps")
        return self
