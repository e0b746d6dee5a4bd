from enum import Enum
from typing import List

from pydantic import BaseModel, Field


class SubtaskStatus(str, Enum):
    PENDING = "PENDING"
    COMPLETED = "COMPLETED"


class ExecStatus(str, Enum):
    CONTINUE = "CONTINUE"
    BACKTRACK = "BACKTRACK"
    FAIL = "FAIL"
    DONE = "DONE"


class BackStatus(str, Enum):
    RECOVERED = "RECOVERED"
    NOT_RECOVERED = "NOT_RECOVERED"


class Subtask(BaseModel):
    text: str = Field(..., min_length=1)
    status: SubtaskStatus = SubtaskStatus.PENDING

    @property
    def completed(self) -> bool:
        return self.status == SubtaskStatus.COMPLETED


class Plan(BaseModel):
    subtasks: List[Subtask] = Field(default_factory=list)
    revision: int = Field(0, ge=0)

    @classmethod
    def initial(cls, texts: List[str]) -> "Plan":
        return cls(subtasks=[Subtask(text=t) for t in texts], revision=0)

    def completed_texts(self) -> List[str]:
        return [s.text for s in self.subtasks if s.completed]

    def pending(self) -> List[Subtask]:
        return [s for s in self.subtasks if not s.completed]

    def as_pending(self) -> "Plan":
        return Plan(
            subtasks=[Subtask(text=s.text) for s in self.subtasks],
            revision=self.revision,
        )
