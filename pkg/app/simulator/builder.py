import random
from collections import Counter
from typing import Dict, Iterable, List, Optional

from app.models.action import ActionKind, ActionSpec, FORWARD_KINDS, KIND_RANK
from app.models.world import (
    GenParams,
    GoalSpec,
    PageRecord,
    PlanDrift,
    ScenarioClass,
    WorldEdge,
    WorldSpec,
)

ELEMENT_PREFIX = {
    ActionKind.CLICK: "btn",
    ActionKind.DRAG: "handle",
    ActionKind.SCROLL: "pane",
    ActionKind.TYPE: "field",
}

KINDS = sorted(FORWARD_KINDS, key=KIND_RANK.get)


class WorldBuilder:
    """Accumulates pages and edges, then freezes them into a validated WorldSpec.

    Every random draw goes through one seeded generator, so the same
    (category, params) always yields the same world.
    """

    def __init__(self, category: ScenarioClass, params: GenParams):
        self.category = category
        self.params = params
        self.rng = random.Random(f"{category.value}:{params.seed}")
        self.pages: Dict[str, List[str]] = {}
        self.edges: List[WorldEdge] = []
        self._counters: Counter = Counter()

    def page(self, page_id: str) -> str:
        self.pages.setdefault(page_id, [])
        return page_id

    def _next(self, prefix: str) -> str:
        self._counters[prefix] += 1
        return f"{prefix}{self._counters[prefix]}"

    def link(
        self,
        source: str,
        target: str,
        kind: Optional[ActionKind] = None,
        reversible: Optional[bool] = None,
        decoy: bool = False,
    ) -> WorldEdge:
        kind = kind or self.rng.choice(KINDS)
        element = self._next(ELEMENT_PREFIX[kind])
        if kind == ActionKind.TYPE:
            action = ActionSpec.type_text(element, self._next("text"))
        else:
            action = ActionSpec(kind=kind, target=element)
        if reversible is None:
            reversible = self.rng.random() >= self.params.irreversible_fraction

        self.page(source)
        self.page(target)
        self.pages[source].append(element)
        edge = WorldEdge(
            source=source,
            action=action,
            target=target,
            reversible=reversible,
            decoy=decoy,
        )
        self.edges.append(edge)
        return edge

    def chain(self, source: str, names: Iterable[str], **link_kwargs) -> List[WorldEdge]:
        edges = []
        for name in names:
            edges.append(self.link(source, name, **link_kwargs))
            source = name
        return edges

    def build(
        self,
        root: str,
        goal: GoalSpec,
        traps: Iterable[str] = (),
        drift: Optional[PlanDrift] = None,
    ) -> WorldSpec:
        fields = dict(
            category=self.category,
            seed=self.params.seed,
            params=self.params,
            root=root,
            pages=[PageRecord(id=p, elements=sorted(e)) for p, e in self.pages.items()],
            transitions=list(self.edges),
            goal=goal,
            traps=sorted(traps),
            drift=drift,
        )
        draft = WorldSpec.model_construct(solution_paths=[], **fields)
        return WorldSpec.model_validate(
            {**fields, "solution_paths": draft.compute_solution_paths()}
        )
