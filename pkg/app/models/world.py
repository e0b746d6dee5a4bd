from collections import deque
from enum import Enum
from functools import cached_property
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.constants import (
    DEFAULT_DETECTION_DEPTH,
    DEFAULT_IRREVERSIBLE_FRACTION,
    MAX_WORLD_PAGES,
)
from app.models.action import ActionKind, ActionSpec, canonical_order
from app.models.observation import Observation, TaskSpec
from app.utils.fingerprint import digest, fingerprint


class ScenarioClass(str, Enum):
    A = "A"  # no wrong branch before the goal
    B = "B"  # decoy branch, multi-level backtrack required
    C = "C"  # plan drift, mid-course revision required
    U = "U"  # unsolvable
    R = "R"  # random page tree, for property suites


class GenParams(BaseModel):
    depth: int = Field(4, ge=1)
    branching: int = Field(1, ge=1)
    n_traps: int = Field(0, ge=0)
    irreversible_fraction: float = Field(DEFAULT_IRREVERSIBLE_FRACTION, ge=0.0, le=1.0)
    detection_depth: int = Field(DEFAULT_DETECTION_DEPTH, ge=1)
    seed: int = 0
    max_pages: int = Field(MAX_WORLD_PAGES, ge=1, le=MAX_WORLD_PAGES)


class EnvState(BaseModel):
    page: str
    typed: Tuple[str, ...] = ()

    model_config = ConfigDict(frozen=True)


class PageRecord(BaseModel):
    id: str
    elements: List[str] = Field(default_factory=list)


class WorldEdge(BaseModel):
    source: str
    action: ActionSpec
    target: str
    reversible: bool = True
    decoy: bool = False


class GoalSpec(BaseModel):
    """Hidden goal predicate: the page is a goal page and, optionally, some text was typed."""

    pages: List[str] = Field(default_factory=list)
    typed_contains: Optional[str] = None

    def holds(self, state: EnvState) -> bool:
        if state.page not in self.pages:
            return False
        return self.typed_contains is None or self.typed_contains in state.typed


class PlanDrift(BaseModel):
    """The documented action at `page` is stale; the environment expects `actual`."""

    page: str
    stale: ActionSpec
    actual: ActionSpec


class WorldGraph:
    """Lookup tables derived from a WorldSpec's declared pages and transitions."""

    def __init__(self, spec: "WorldSpec"):
        self.spec = spec
        self.page_records: Dict[str, PageRecord] = {p.id: p for p in spec.pages}
        self.out: Dict[str, List[WorldEdge]] = {}
        self.into: Dict[str, WorldEdge] = {}
        self.states: Dict[str, EnvState] = {}
        self.depths: Dict[str, int] = {}
        self.fingerprints: Dict[str, str] = {}
        self.pages_by_fingerprint: Dict[str, str] = {}
        self.viable: Dict[str, bool] = {}

        if spec.root not in self.page_records:
            raise ValueError(f"root {spec.root} is not a declared page")

        for edge in spec.transitions:
            if edge.source not in self.page_records or edge.target not in self.page_records:
                raise ValueError(f"edge {edge.source}->{edge.target} references unknown page")
            if not edge.action.is_forward:
                raise ValueError(f"edge {edge.source}->{edge.target} uses a backtrack-only action")
            if edge.target == spec.root or edge.target in self.into:
                raise ValueError(f"page {edge.target} has two parents; worlds are page trees")
            siblings = self.out.setdefault(edge.source, [])
            if any(s.action == edge.action for s in siblings):
                raise ValueError(f"duplicate action {edge.action.label} on {edge.source}")
            siblings.append(edge)
            self.into[edge.target] = edge

        for page_id, siblings in self.out.items():
            siblings.sort(key=lambda e: e.action.sort_key)
            declared = {e.action.target for e in siblings if e.action.target}
            if declared - set(self.page_records[page_id].elements):
                raise ValueError(f"page {page_id} acts on undeclared elements")

        queue = deque([(spec.root, EnvState(page=spec.root), 0)])
        while queue:
            page, state, depth = queue.popleft()
            self.states[page] = state
            self.depths[page] = depth
            for edge in self.out.get(page, []):
                typed = state.typed
                if edge.action.kind == ActionKind.TYPE:
                    typed = typed + (edge.action.payload,)
                queue.append((edge.target, EnvState(page=edge.target, typed=typed), depth + 1))

        for page, state in self.states.items():
            fp = fingerprint(self.observation(state))
            self.fingerprints[page] = fp
            self.pages_by_fingerprint[fp] = page

        for page in sorted(self.states, key=lambda p: -self.depths[p]):
            self.viable[page] = spec.goal.holds(self.states[page]) or any(
                self.viable[e.target] for e in self.out.get(page, [])
            )

    def observation(self, state: EnvState) -> Observation:
        edges = self.out.get(state.page, [])
        return Observation(
            page=state.page,
            elements=sorted(self.page_records[state.page].elements),
            actions=canonical_order(e.action for e in edges),
            typed=list(state.typed),
        )

    def path_to(self, page: str) -> List[WorldEdge]:
        path = []
        edge = self.into.get(page)
        while edge is not None:
            path.append(edge)
            edge = self.into.get(edge.source)
        return list(reversed(path))


class WorldSpec(BaseModel):
    category: ScenarioClass
    seed: int = 0
    params: GenParams = Field(default_factory=GenParams)
    root: str
    pages: List[PageRecord]
    transitions: List[WorldEdge]
    goal: GoalSpec
    traps: List[str] = Field(default_factory=list)
    solution_paths: List[List[ActionSpec]] = Field(default_factory=list)
    drift: Optional[PlanDrift] = None

    @model_validator(mode="after")
    def _check_consistency(self) -> "WorldSpec":
        graph = self.graph
        if set(self.traps) & set(self.goal.pages):
            raise ValueError("a page cannot be both trap and goal")
        if set(self.traps) - set(graph.page_records):
            raise ValueError("trap references unknown page")
        if self.solution_paths != self.compute_solution_paths():
            raise ValueError("solution_paths disagree with transitions")
        return self

    @cached_property
    def graph(self) -> WorldGraph:
        return WorldGraph(self)

    @cached_property
    def digest(self) -> str:
        return digest(self.model_dump(mode="json", exclude_none=True))

    # ==================== STRUCTURE ====================
    def edges_from(self, page: str) -> List[WorldEdge]:
        return list(self.graph.out.get(page, []))

    def edge(self, page: str, action: ActionSpec) -> Optional[WorldEdge]:
        return next((e for e in self.graph.out.get(page, []) if e.action == action), None)

    def parent_edge(self, page: str) -> Optional[WorldEdge]:
        return self.graph.into.get(page)

    def path_to(self, page: str) -> List[WorldEdge]:
        return self.graph.path_to(page)

    def depth_of(self, page: str) -> int:
        return self.graph.depths[page]

    def reachable_pages(self) -> List[str]:
        return list(self.graph.states)

    def decoy_actions(self, page: str) -> List[ActionSpec]:
        return [e.action for e in self.edges_from(page) if e.decoy]

    # ==================== STATES ====================
    def initial_state(self) -> EnvState:
        return EnvState(page=self.root)

    def state_at(self, page: str) -> EnvState:
        return self.graph.states[page]

    def observation(self, state: EnvState) -> Observation:
        return self.graph.observation(state)

    def fingerprint_at(self, page: str) -> str:
        return self.graph.fingerprints[page]

    def page_for(self, fingerprint: str) -> Optional[str]:
        return self.graph.pages_by_fingerprint.get(fingerprint)

    def goal_holds(self, state: EnvState) -> bool:
        return self.goal.holds(state)

    def is_trap(self, page: str) -> bool:
        return page in self.traps

    def viable(self, page: str) -> bool:
        """True iff some goal state is reachable from `page`."""
        return self.graph.viable.get(page, False)

    def steps_since_divergence(self, page: str) -> int:
        """Edges walked since the path last stood on a page from which the goal was reachable."""
        depth = self.graph.depths[page]
        for edge in reversed(self.path_to(page)):
            if self.graph.viable[edge.target]:
                return depth - self.graph.depths[edge.target]
        return depth

    def compute_solution_paths(self) -> List[List[ActionSpec]]:
        states = self.graph.states
        goal_pages = [p for p in states if self.goal.holds(states[p])]
        if not goal_pages:
            return []
        shortest = min(self.graph.depths[p] for p in goal_pages)
        paths = [
            [e.action for e in self.path_to(p)]
            for p in goal_pages
            if self.graph.depths[p] == shortest
        ]
        return sorted(paths, key=lambda path: [a.sort_key for a in path])

    def task(self) -> TaskSpec:
        goal = ", ".join(self.goal.pages) or "<none>"
        instruction = f"Reach page {goal}"
        if self.goal.typed_contains is not None:
            instruction += f" after typing '{self.goal.typed_contains}'"
        return TaskSpec(
            world_digest=self.digest,
            category=self.category.value,
            instruction=instruction,
        )
