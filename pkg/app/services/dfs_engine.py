# app/services/dfs_engine.py

from typing import List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict

from app.models.action import ActionSpec
from app.models.trajectory import TransitionEdge
from app.services.search_tree import (
    FailureLedger,
    SearchTree,
    first_unexplored,
    unexplored_actions,
)
from app.utils.exceptions import NotAnAncestor


class Finish(BaseModel):
    model_config = ConfigDict(frozen=True)


class Descend(BaseModel):
    action: ActionSpec

    model_config = ConfigDict(frozen=True)


class Backtrack(BaseModel):
    target: str
    reverse_path: Tuple[TransitionEdge, ...] = ()

    model_config = ConfigDict(frozen=True)

    @property
    def distance(self) -> int:
        return len(self.reverse_path)


class Exhausted(BaseModel):
    model_config = ConfigDict(frozen=True)


DfsDecision = Union[Finish, Descend, Backtrack, Exhausted]


def dfs_decide(
    tree: SearchTree,
    ledger: FailureLedger,
    current: str,
    done: bool,
    preferred: Optional[ActionSpec] = None,
) -> DfsDecision:
    """One step of the DFS recurrence.

    A policy-suggested action wins when it is still unexplored; otherwise the
    canonically-first unexplored action is taken.
    """
    unexplored = unexplored_actions(tree, current, ledger)
    if done:
        return Finish()
    if unexplored:
        if preferred is not None and preferred in unexplored:
            return Descend(action=preferred)
        return Descend(action=first_unexplored(tree, current, ledger))
    return plan_backtrack(tree, ledger, current)


def backtrack_target(
    tree: SearchTree, ledger: FailureLedger, current: str
) -> Optional[str]:
    """Nearest strict ancestor of `current` that still has unexplored actions."""
    for ancestor in tree.ancestors(current):
        if unexplored_actions(tree, ancestor, ledger):
            return ancestor
    return None


def reverse_path(tree: SearchTree, current: str, target: str) -> List[TransitionEdge]:
    """Tree edges from `current` up to `target`, child-to-root order."""
    edges = []
    node = tree.node(current)
    tree.node(target)
    while node.key != target:
        if node.parent is None:
            raise NotAnAncestor(
                f"{target[:12]} is not an ancestor of {current[:12]}",
                details={"current": current, "target": target},
            )
        parent_key, action = node.parent
        edges.append(TransitionEdge(source=parent_key, action=action, target=node.key))
        node = tree.nodes[parent_key]
    return edges


def plan_backtrack(
    tree: SearchTree, ledger: FailureLedger, current: str
) -> Union[Backtrack, Exhausted]:
    target = backtrack_target(tree, ledger, current)
    if target is None:
        return Exhausted()
    return Backtrack(target=target, reverse_path=tuple(reverse_path(tree, current, target)))
