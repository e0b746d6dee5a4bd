# app/simulator/environment.py

from typing import Dict, List, Optional

from pydantic import BaseModel

from app.models.action import ActionKind, ActionSpec, canonical_order
from app.models.observation import Observation, TaskSpec
from app.models.world import WorldSpec
from app.utils.exceptions import CheckpointError, IllegalAction, IrreversibleAction
from app.utils.logger import logger


class HistoryEntry(BaseModel):
    index: int
    action: ActionSpec
    before: str
    after: str
    reversible: bool = False


class SimEnvironment:
    """Single-owner runtime over one WorldSpec.

    The env state is the current page; typed text is a function of the page
    because worlds are page trees. Every accepted step, including Inverse,
    Restore and Reset, appends one history entry, so `clock` always equals
    the number of env-mutating actions since reset.
    """

    def __init__(self, spec: WorldSpec):
        self.spec = spec
        self.page = spec.root
        self.history: List[HistoryEntry] = []
        self._checkpoints: Dict[str, str] = {}

    # ==================== LIFECYCLE ====================
    def reset(self, spec: Optional[WorldSpec] = None) -> Observation:
        if spec is not None:
            self.spec = spec
        self.page = self.spec.root
        self.history = []
        self._checkpoints = {}
        logger.debug(f"Environment reset to {self.page}")
        return self.observe()

    @property
    def clock(self) -> int:
        return len(self.history)

    def observe(self) -> Observation:
        return self.spec.observation(self.spec.state_at(self.page))

    def current_fingerprint(self) -> str:
        return self.spec.fingerprint_at(self.page)

    def available_actions(self) -> List[ActionSpec]:
        return canonical_order(e.action for e in self.spec.edges_from(self.page))

    def goal_satisfied(self) -> bool:
        return self.spec.goal_holds(self.spec.state_at(self.page))

    def task(self) -> TaskSpec:
        return self.spec.task()

    # ==================== STEPPING ====================
    def step(self, action: ActionSpec) -> Observation:
        before = self.page
        reversible = False

        if action.kind == ActionKind.INVERSE:
            after = self._resolve_inverse(action.inverse_of)
        elif action.kind == ActionKind.RESTORE:
            if action.token is None:
                raise IllegalAction("Restore needs a checkpoint token")
            after = self._lookup(action.token)
        elif action.kind == ActionKind.RESET:
            after = self.spec.root
        else:
            edge = self.spec.edge(self.page, action)
            if edge is None:
                raise IllegalAction(
                    f"{action.label} is not available on page {self.page}",
                    details={"page": self.page, "action": action.label},
                )
            after = edge.target
            reversible = edge.reversible

        self.history.append(
            HistoryEntry(
                index=self.clock,
                action=action,
                before=before,
                after=after,
                reversible=reversible,
            )
        )
        self.page = after
        logger.debug(f"step {self.clock - 1}: {before} --{action.label}--> {after}")
        return self.observe()

    def _resolve_inverse(self, index: int) -> str:
        if index >= len(self.history):
            raise IllegalAction(f"Inverse@{index} references a future step")
        entry = self.history[index]
        if not entry.action.is_forward:
            raise IllegalAction(f"Inverse@{index} references a backtrack action")
        if entry.after != self.page:
            raise IllegalAction(
                f"Inverse@{index} does not start from the current page",
                details={"expected": entry.after, "current": self.page},
            )
        if not entry.reversible:
            raise IrreversibleAction(
                f"{entry.action.label} on {entry.before} has no inverse",
                details={"step": index, "action": entry.action.label},
            )
        return entry.before

    # ==================== CHECKPOINTS ====================
    def checkpoint(self) -> str:
        token = f"ckpt-{self.clock}-{self.current_fingerprint()[:12]}"
        self._checkpoints[token] = self.page
        return token

    def restore(self, token: str) -> Observation:
        return self.step(ActionSpec.restore(token))

    def discard(self, token: str) -> None:
        self._checkpoints.pop(token, None)

    def _lookup(self, token: str) -> str:
        if token not in self._checkpoints:
            raise CheckpointError(
                "Unknown or expired checkpoint token", details={"token": token}
            )
        return self._checkpoints[token]
