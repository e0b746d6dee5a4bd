# app/services/search_tree.py

import hashlib
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from app.models.action import ActionSpec, canonical_order
from app.models.trajectory import StepMode, Trajectory, TransitionEdge
from app.utils.exceptions import (
    EmptyFailurePath,
    IllegalAction,
    NondeterminismDetected,
    StateNotInTree,
)

PathEdge = Tuple[str, ActionSpec]


@dataclass
class NodeRecord:
    key: str
    fingerprint: str
    depth: int
    available: FrozenSet[ActionSpec]
    parent: Optional[PathEdge] = None
    children: Dict[ActionSpec, str] = field(default_factory=dict)
    explored: Set[ActionSpec] = field(default_factory=set)


class SearchTree:
    """Explored part of the state space, rooted at the initial state.

    Node keys are state fingerprints. A configuration that recurs under a
    different parent gets a path-qualified key so the structure stays a tree.
    `add_transition` is the only mutator.
    """

    def __init__(self, root: str, available: Iterable[ActionSpec]):
        self.root = root
        self.nodes: Dict[str, NodeRecord] = {
            root: NodeRecord(key=root, fingerprint=root, depth=0, available=frozenset(available))
        }

    def node(self, key: str) -> NodeRecord:
        if key not in self.nodes:
            raise StateNotInTree(f"State {key[:12]} is not in the search tree", details={"state": key})
        return self.nodes[key]

    def __contains__(self, key: str) -> bool:
        return key in self.nodes

    def add_transition(
        self, edge: TransitionEdge, available: Iterable[ActionSpec] = ()
    ) -> str:
        """Record an explored edge and return the child's node key.

        `edge.source` is a node key, `edge.target` the observed fingerprint;
        `available` is the child's declared action set, used on first visit.
        """
        parent = self.node(edge.source)
        if edge.action not in parent.available:
            raise IllegalAction(
                f"{edge.action.label} is not available at {edge.source[:12]}",
                details={"state": edge.source, "action": edge.action.label},
            )

        existing = parent.children.get(edge.action)
        if existing is not None:
            if self.nodes[existing].fingerprint != edge.target:
                raise NondeterminismDetected(
                    f"{edge.action.label} from {edge.source[:12]} led to two different states",
                    details={
                        "state": edge.source,
                        "action": edge.action.label,
                        "recorded": self.nodes[existing].fingerprint,
                        "observed": edge.target,
                    },
                )
            return existing

        key = edge.target
        if key in self.nodes:
            key = hashlib.sha256(
                f"{edge.target}|{edge.source}|{edge.action.label}".encode("utf-8")
            ).hexdigest()

        self.nodes[key] = NodeRecord(
            key=key,
            fingerprint=edge.target,
            depth=parent.depth + 1,
            available=frozenset(available),
            parent=(edge.source, edge.action),
        )
        parent.explored.add(edge.action)
        parent.children[edge.action] = key
        assert parent.explored <= parent.available
        return key

    # ==================== QUERIES ====================
    def fingerprint_of(self, key: str) -> str:
        return self.node(key).fingerprint

    def depth(self, key: str) -> int:
        return self.node(key).depth

    def ancestors(self, key: str) -> List[str]:
        """Strict ancestors, nearest first."""
        result = []
        record = self.node(key)
        while record.parent is not None:
            result.append(record.parent[0])
            record = self.nodes[record.parent[0]]
        return result

    def path_from_root(self, key: str) -> List[PathEdge]:
        path = []
        record = self.node(key)
        while record.parent is not None:
            path.append(record.parent)
            record = self.nodes[record.parent[0]]
        return list(reversed(path))

    def explored_edge_count(self) -> int:
        return sum(len(n.explored) for n in self.nodes.values())

    @classmethod
    def from_trajectory(
        cls,
        root: str,
        trajectory: Trajectory,
        available: Dict[str, Iterable[ActionSpec]],
    ) -> "SearchTree":
        """Rebuild a tree by replaying the Normal-mode steps of a trajectory log."""
        tree = cls(root, available[root])
        for step in trajectory.steps:
            if step.mode == StepMode.NORMAL:
                tree.add_transition(step.edge, available.get(step.edge.target, ()))
        return tree


class FailureLedger:
    """Failed exploration paths and the edges at which they diverged."""

    def __init__(self):
        self.failed_paths: Set[Tuple[PathEdge, ...]] = set()
        self.failed_edges: Set[PathEdge] = set()

    def __len__(self) -> int:
        return len(self.failed_paths)

    def record_failure(
        self,
        path: Sequence[PathEdge],
        surviving: Optional[Sequence[PathEdge]] = None,
    ) -> PathEdge:
        """Insert a failed path; returns the edge that is pruned from now on.

        The pruned edge is the first edge of `path` that leaves `surviving`
        (the trajectory being kept), or the first edge when nothing survives.
        """
        path = tuple(path)
        shared = 0
        for mine, theirs in zip(path, surviving or ()):
            if mine != theirs:
                break
            shared += 1
        if shared >= len(path):
            raise EmptyFailurePath(
                "Failure path has no edge diverging from the surviving trajectory",
                details={"length": len(path)},
            )

        diverging = path[shared]
        self.failed_paths.add(path)
        self.failed_edges.add(diverging)
        return diverging

    def blocked_at(self, state: str) -> Set[ActionSpec]:
        return {action for s, action in self.failed_edges if s == state}


def unexplored_actions(
    tree: SearchTree, state: str, ledger: Optional[FailureLedger] = None
) -> FrozenSet[ActionSpec]:
    """U(s): available minus explored minus edges pruned by recorded failures."""
    record = tree.node(state)
    blocked = ledger.blocked_at(state) if ledger is not None else set()
    return frozenset(record.available - record.explored - blocked)


def first_unexplored(
    tree: SearchTree, state: str, ledger: Optional[FailureLedger] = None
) -> Optional[ActionSpec]:
    candidates = canonical_order(unexplored_actions(tree, state, ledger))
    return candidates[0] if candidates else None
