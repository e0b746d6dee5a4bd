from typing import Any, Dict, List

from pydantic import BaseModel, Field

from app.models.action import ActionSpec, canonical_order


class Observation(BaseModel):
    """What the agent sees of a page: no pixels, only symbolic structure.

    A pure function of the environment state (page + typed text), so two
    observations are equal exactly when the env states are.
    """

    page: str = ""
    elements: List[str] = Field(default_factory=list)
    actions: List[ActionSpec] = Field(default_factory=list)
    typed: List[str] = Field(default_factory=list)

    def canonical(self) -> Dict[str, Any]:
        return {
            "actions": [a.wire() for a in canonical_order(self.actions)],
            "elements": sorted(self.elements),
            "page": self.page,
            "typed": list(self.typed),
        }


class StateView(BaseModel):
    """A state as handed to policies: its identity plus what is visible."""

    fingerprint: str
    observation: Observation


class TaskSpec(BaseModel):
    world_digest: str
    category: str
    instruction: str
