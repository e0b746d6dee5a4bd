# app/policies/oracle.py

from collections import Counter
from typing import List, Optional, Tuple

from app.models.action import ActionSpec
from app.models.observation import StateView, TaskSpec
from app.models.plan import BackStatus, ExecStatus, Plan, Subtask, SubtaskStatus
from app.models.trajectory import Trajectory
from app.models.world import WorldSpec
from app.policies.base import (
    blocked_edges,
    canonical_untried,
    first_pending_available,
    inverse_for,
    pages_on_path,
    shortest_route,
    tried_actions,
)
from app.services.search_tree import FailureLedger
from app.utils.exceptions import IllegalAction


class OraclePlanner:
    """Reads the world's true structure: completed steps so far, then the shortest route left."""

    def __init__(self, world: WorldSpec):
        self.world = world

    def route_labels(self, page: str, failures: FailureLedger) -> List[str]:
        route = shortest_route(self.world, page, blocked_edges(self.world, failures))
        return [edge.action.label for edge in route or []]

    def plan(self, state: StateView, task: TaskSpec, failures: FailureLedger) -> Plan:
        page = state.observation.page
        done = [edge.action.label for edge in self.world.path_to(page)]
        pending = self.route_labels(page, failures)
        return Plan(
            subtasks=[Subtask(text=t, status=SubtaskStatus.COMPLETED) for t in done]
            + [Subtask(text=t) for t in pending]
        )


class OracleExecutor:
    def __init__(self, world: WorldSpec):
        self.world = world

    def act(
        self, state: StateView, task: TaskSpec, plan: Plan, history: Trajectory
    ) -> ActionSpec:
        page = state.observation.page
        available = [edge.action for edge in self.world.edges_from(page)]
        tried = tried_actions(history, state.fingerprint)

        action = first_pending_available(plan, available, tried)
        if action is not None:
            return action

        blocked = {(page, a) for a in tried}
        route = shortest_route(self.world, page, blocked)
        if route:
            return route[0].action

        action = canonical_untried(available, tried)
        if action is None:
            raise IllegalAction(f"No action available on page {page}")
        return action

    def backtrack_act(self, history: Trajectory, target: str) -> ActionSpec:
        last = history.last
        if last is None:
            return ActionSpec.restore()
        return inverse_for(history, last.edge.target)


class OracleTracker:
    """Judges progress from the viability oracle.

    A dead branch becomes visible `detection_depth` steps after the path
    left the last page from which the goal was still reachable; the world's
    own k unless overridden.
    """

    def __init__(self, world: WorldSpec, detection_depth: Optional[int] = None):
        self.world = world
        self.detection_depth = detection_depth or world.params.detection_depth

    def track(
        self,
        state: StateView,
        task: TaskSpec,
        plan: Plan,
        history: Trajectory,
        failures: FailureLedger,
    ) -> Tuple[Plan, ExecStatus]:
        page = state.observation.page
        if self.world.goal_holds(self.world.state_at(page)):
            done = [
                Subtask(text=s.text, status=SubtaskStatus.COMPLETED) for s in plan.subtasks
            ]
            return Plan(subtasks=done, revision=plan.revision), ExecStatus.DONE

        updated = self.promote(plan, page)
        if self.world.is_trap(page):
            return updated, ExecStatus.FAIL
        if self.world.steps_since_divergence(page) >= self.detection_depth:
            return updated, ExecStatus.BACKTRACK
        return updated, ExecStatus.CONTINUE

    def promote(self, plan: Plan, page: str) -> Plan:
        """Mark subtasks whose action lies on the path to `page`; rewrite a stale drift step."""
        walked = Counter(edge.action.label for edge in self.world.path_to(page))
        drift = self.world.drift
        drift_seen = drift is not None and drift.page in pages_on_path(self.world, page)

        subtasks = []
        for subtask in plan.subtasks:
            text, status = subtask.text, subtask.status
            if walked[text] > 0:
                walked[text] -= 1
                status = SubtaskStatus.COMPLETED
            elif drift_seen and not subtask.completed and text == drift.stale.label:
                text = drift.actual.label
            subtasks.append(Subtask(text=text, status=status))
        return Plan(subtasks=subtasks, revision=plan.revision)

    def verify_backtrack(
        self, state: StateView, target: str, history: Trajectory
    ) -> BackStatus:
        if state.fingerprint == target:
            return BackStatus.RECOVERED
        return BackStatus.NOT_RECOVERED
