from typing import List, Sequence, Set, Tuple

import networkx as nx

from app.models.action import ActionSpec
from app.models.episode import EpisodeResult
from app.models.plan import BackStatus
from app.models.trajectory import StepMode, TrajectoryStep
from app.models.world import WorldSpec
from app.services.search_tree import PathEdge


def world_digraph(world: WorldSpec) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(p.id for p in world.pages)
    graph.add_edges_from((e.source, e.target) for e in world.transitions)
    return graph


def reachable_pages(world: WorldSpec) -> set:
    return nx.descendants(world_digraph(world), world.root) | {world.root}


def goal_reachable(world: WorldSpec) -> bool:
    """Independent check: some page reachable from the root satisfies the goal."""
    return any(world.goal_holds(world.state_at(page)) for page in reachable_pages(world))


def edges_of(result: EpisodeResult) -> List[Tuple[str, ActionSpec, str]]:
    return [(s.edge.source, s.edge.action, s.edge.target) for s in result.trajectory.steps]


def failure_audit(steps: Sequence[TrajectoryStep]) -> Tuple[Set[PathEdge], List[int]]:
    """Failed edges rebuilt from a log, plus indices of Normal steps that take one again.

    Each RECOVERED backtrack step ends on an ancestor of the abandoned branch;
    the edge leaving that ancestor along the branch is the one that failed.
    """
    path: List[Tuple[str, ActionSpec, str]] = []
    failed: Set[PathEdge] = set()
    revisits: List[int] = []
    for step in steps:
        edge = step.edge
        if step.mode == StepMode.NORMAL:
            if (edge.source, edge.action) in failed:
                revisits.append(step.index)
            path.append((edge.source, edge.action, edge.target))
        elif step.back_status == BackStatus.RECOVERED:
            diverging = None
            while path and path[-1][2] != edge.target:
                diverging = path.pop()
            if diverging is not None:
                failed.add((diverging[0], diverging[1]))
    return failed, revisits
