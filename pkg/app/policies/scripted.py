# app/policies/scripted.py

import math
import random
from typing import Optional

from app.models.action import ActionSpec
from app.models.observation import StateView, TaskSpec
from app.models.plan import Plan, Subtask
from app.models.suite import ScriptedPolicyParams
from app.models.trajectory import Trajectory
from app.models.world import WorldSpec
from app.policies.base import (
    canonical_untried,
    first_pending_available,
    next_index,
    pages_on_path,
    tried_actions,
)
from app.policies.oracle import OracleExecutor, OraclePlanner, OracleTracker
from app.services.search_tree import FailureLedger
from app.utils.exceptions import IllegalAction


class ScriptedPlanner(OraclePlanner):
    """Oracle plan degraded the way an imprecise planner would degrade it.

    Only the first ceil(knowledge * n) remaining steps are spelled out as
    actions; the rest are vague. Until the drift page is reached the plan
    names the stale action documented for it.
    """

    def __init__(self, world: WorldSpec, params: ScriptedPolicyParams):
        super().__init__(world)
        self.params = params

    def plan(self, state: StateView, task: TaskSpec, failures: FailureLedger) -> Plan:
        plan = super().plan(state, task, failures)
        page = state.observation.page
        drift = self.world.drift
        stale = drift is not None and drift.page not in pages_on_path(self.world, page)

        pending = [s.text for s in plan.pending()]
        revealed = math.ceil(self.params.knowledge * len(pending))
        texts = []
        for i, text in enumerate(pending):
            if i >= revealed:
                texts.append(f"Work toward the goal (remaining step {i + 1})")
            elif stale and text == drift.actual.label:
                texts.append(drift.stale.label)
            else:
                texts.append(text)

        completed = [s for s in plan.subtasks if s.completed]
        return Plan(subtasks=completed + [Subtask(text=t) for t in texts])


class ScriptedExecutor(OracleExecutor):
    """Follows the plan but is drawn to plausible wrong branches with probability `wrong_branch_bias`."""

    def __init__(self, world: WorldSpec, params: ScriptedPolicyParams, episode_seed: int = 0):
        super().__init__(world)
        self.params = params
        self.episode_seed = episode_seed

    def _rng(self, state: StateView, history: Trajectory) -> random.Random:
        return random.Random(
            f"{self.params.seed}:{self.episode_seed}:{state.fingerprint}:{next_index(history)}"
        )

    def act(
        self, state: StateView, task: TaskSpec, plan: Plan, history: Trajectory
    ) -> ActionSpec:
        page = state.observation.page
        rng = self._rng(state, history)
        tried = tried_actions(history, state.fingerprint)
        available = [edge.action for edge in self.world.edges_from(page)]

        decoys = [a for a in self.world.decoy_actions(page) if a not in tried]
        if decoys and rng.random() < self.params.wrong_branch_bias:
            return rng.choice(decoys)

        action: Optional[ActionSpec] = first_pending_available(plan, available, tried)
        if action is None:
            action = canonical_untried(available, tried)
        if action is None:
            raise IllegalAction(f"No action available on page {page}")
        return action


class ScriptedTracker(OracleTracker):
    """Oracle tracker whose dead-branch signal arrives k steps late."""

    def __init__(self, world: WorldSpec, params: ScriptedPolicyParams):
        super().__init__(world, detection_depth=params.detection_depth)
