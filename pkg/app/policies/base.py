# app/policies/base.py

from collections import deque
from dataclasses import dataclass
from typing import Iterable, List, Optional, Protocol, Set, Tuple, runtime_checkable

from app.models.action import ActionSpec, canonical_order
from app.models.observation import StateView, TaskSpec
from app.models.plan import BackStatus, ExecStatus, Plan
from app.models.trajectory import Trajectory
from app.models.world import WorldEdge, WorldSpec
from app.services.search_tree import FailureLedger

WorldBlock = Tuple[str, ActionSpec]


@runtime_checkable
class Planner(Protocol):
    def plan(self, state: StateView, task: TaskSpec, failures: FailureLedger) -> Plan: ...


@runtime_checkable
class Executor(Protocol):
    def act(
        self, state: StateView, task: TaskSpec, plan: Plan, history: Trajectory
    ) -> ActionSpec: ...

    def backtrack_act(self, history: Trajectory, target: str) -> ActionSpec: ...


@runtime_checkable
class Tracker(Protocol):
    def track(
        self,
        state: StateView,
        task: TaskSpec,
        plan: Plan,
        history: Trajectory,
        failures: FailureLedger,
    ) -> Tuple[Plan, ExecStatus]: ...

    def verify_backtrack(
        self, state: StateView, target: str, history: Trajectory
    ) -> BackStatus: ...


@dataclass
class PolicyBundle:
    planner: Planner
    executor: Executor
    tracker: Tracker


# ==================== SHARED HELPERS ====================
def inverse_for(history: Trajectory, current: str) -> ActionSpec:
    """Inverse of the latest forward step that entered `current`, else a restore request."""
    for step in reversed(history.steps):
        if step.edge.action.is_forward and step.edge.target == current:
            return ActionSpec.inverse(step.index)
    return ActionSpec.restore()


def tried_actions(history: Trajectory, state: str) -> Set[ActionSpec]:
    return {
        step.edge.action
        for step in history.steps
        if step.edge.source == state and step.edge.action.is_forward
    }


def next_index(history: Trajectory) -> int:
    last = history.last
    return last.index + 1 if last is not None else 0


def blocked_edges(world: WorldSpec, failures: FailureLedger) -> Set[WorldBlock]:
    """Failed edges translated to (page, action) pairs of the world."""
    blocked = set()
    for state, action in failures.failed_edges:
        page = world.page_for(state)
        if page is not None:
            blocked.add((page, action))
    return blocked


def shortest_route(
    world: WorldSpec, page: str, blocked: Iterable[WorldBlock] = ()
) -> Optional[List[WorldEdge]]:
    """Shortest forward route from `page` to a goal state avoiding blocked edges."""
    blocked = set(blocked)
    queue = deque([(page, [])])
    while queue:
        here, route = queue.popleft()
        if world.goal_holds(world.state_at(here)):
            return route
        for edge in world.edges_from(here):
            if (here, edge.action) not in blocked:
                queue.append((edge.target, route + [edge]))
    return None


def pages_on_path(world: WorldSpec, page: str) -> Set[str]:
    return {world.root, page} | {e.target for e in world.path_to(page)}


def first_pending_available(
    plan: Plan, available: Iterable[ActionSpec], tried: Set[ActionSpec]
) -> Optional[ActionSpec]:
    available = set(available)
    for subtask in plan.pending():
        action = ActionSpec.from_label(subtask.text)
        if action is not None and action in available and action not in tried:
            return action
    return None


def canonical_untried(
    available: Iterable[ActionSpec], tried: Set[ActionSpec]
) -> Optional[ActionSpec]:
    ordered = canonical_order(available)
    untried = [a for a in ordered if a not in tried]
    if untried:
        return untried[0]
    return ordered[0] if ordered else None
