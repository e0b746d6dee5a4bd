import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.models.action import ActionSpec
from app.models.trajectory import TransitionEdge
from app.models.world import GenParams, ScenarioClass
from app.services.dfs_engine import (
    Backtrack,
    Descend,
    Exhausted,
    Finish,
    backtrack_target,
    dfs_decide,
    plan_backtrack,
    reverse_path,
)
from app.services.search_tree import FailureLedger, SearchTree, unexplored_actions
from app.simulator.environment import SimEnvironment
from app.simulator.generator import generate_world
from app.utils.exceptions import NotAnAncestor, StateNotInTree
from helpers import goal_reachable

a1, a2, a3 = ActionSpec.click("a1"), ActionSpec.click("a2"), ActionSpec.click("a3")
spare = ActionSpec.click("spare")


def edge(source, action, target):
    return TransitionEdge(source=source, action=action, target=target)


def chain_tree(root_spare: bool, s1_spare: bool) -> SearchTree:
    """r -> s1 -> s2, optionally with one unexplored action at r and/or s1."""
    tree = SearchTree("r", [a1] + ([spare] if root_spare else []))
    tree.add_transition(edge("r", a1, "s1"), [a2] + ([spare] if s1_spare else []))
    tree.add_transition(edge("s1", a2, "s2"), [])
    return tree


def random_tree(rng: random.Random, size: int):
    """Random explored tree plus a ledger blocking some spare actions."""
    spares = {}
    ledger = FailureLedger()
    children = {}
    parents = [None] + [rng.randrange(i) for i in range(1, size)]
    for i in range(1, size):
        children.setdefault(parents[i], []).append(i)

    available = {}
    for i in range(size):
        spares[i] = [ActionSpec.click(f"x{i}_{j}") for j in range(rng.randint(0, 2))]
        available[i] = [ActionSpec.click(f"c{c}") for c in children.get(i, [])] + spares[i]
    tree = SearchTree("n0", available[0])
    order = [0]
    while order:
        i = order.pop()
        for c in children.get(i, []):
            tree.add_transition(edge(f"n{i}", ActionSpec.click(f"c{c}"), f"n{c}"), available[c])
            order.append(c)
    for i in range(size):
        for action in spares[i]:
            if rng.random() < 0.3:
                ledger.record_failure([(f"n{i}", action)])
    return tree, ledger


def brute_force_target(tree, ledger, current):
    record = tree.nodes[current]
    while record.parent is not None:
        parent = tree.nodes[record.parent[0]]
        blocked = {a for s, a in ledger.failed_edges if s == parent.key}
        if parent.available - parent.explored - blocked:
            return parent.key
        record = parent
    return None


# ==================== dfs_decide ====================
def test_done_always_finishes():
    tree = chain_tree(root_spare=True, s1_spare=True)
    for key in tree.nodes:
        assert dfs_decide(tree, FailureLedger(), key, done=True) == Finish()


def test_descends_into_canonically_first_unexplored_action():
    tree = SearchTree("s", [a3, a2])
    assert dfs_decide(tree, FailureLedger(), "s", done=False) == Descend(action=a2)


def test_preferred_action_wins_when_unexplored():
    tree = SearchTree("s", [a3, a2])
    decision = dfs_decide(tree, FailureLedger(), "s", done=False, preferred=a3)
    assert decision == Descend(action=a3)


def test_preferred_action_is_ignored_once_explored():
    tree = SearchTree("s", [a1, a2, a3])
    tree.add_transition(edge("s", a1, "t"))
    decision = dfs_decide(tree, FailureLedger(), "s", done=False, preferred=a1)
    assert decision == Descend(action=a2)


def test_exhausted_root():
    tree = SearchTree("r", [a1, a2])
    t1 = tree.add_transition(edge("r", a1, "t1"), [])
    tree.add_transition(edge("r", a2, "t2"), [])
    assert dfs_decide(tree, FailureLedger(), t1, done=False) == Exhausted()
    assert dfs_decide(tree, FailureLedger(), "r", done=False) == Exhausted()


def test_failed_edges_count_as_exhausted():
    tree = SearchTree("r", [a1, a2])
    t1 = tree.add_transition(edge("r", a1, "t1"), [])
    ledger = FailureLedger()
    ledger.record_failure([("r", a2)])
    assert dfs_decide(tree, ledger, t1, done=False) == Exhausted()


def test_unknown_state_raises():
    with pytest.raises(StateNotInTree):
        dfs_decide(SearchTree("r", []), FailureLedger(), "nope", done=False)


def test_dead_end_backtracks_with_reverse_path():
    tree = chain_tree(root_spare=True, s1_spare=False)
    decision = dfs_decide(tree, FailureLedger(), "s2", done=False)
    assert isinstance(decision, Backtrack)
    assert decision.target == "r"
    assert decision.distance == 2
    assert list(decision.reverse_path) == [edge("s1", a2, "s2"), edge("r", a1, "s1")]


# ==================== backtrack_target ====================
def test_only_candidate_is_the_root():
    tree = chain_tree(root_spare=True, s1_spare=False)
    assert backtrack_target(tree, FailureLedger(), "s2") == "r"


def test_nearest_ancestor_wins():
    tree = chain_tree(root_spare=True, s1_spare=True)
    assert backtrack_target(tree, FailureLedger(), "s2") == "s1"


def test_no_candidate_gives_none():
    tree = chain_tree(root_spare=False, s1_spare=False)
    assert backtrack_target(tree, FailureLedger(), "s2") is None
    assert plan_backtrack(tree, FailureLedger(), "s2") == Exhausted()


def test_target_matches_brute_force_scan_on_random_trees():
    rng = random.Random(7)
    for _ in range(1000):
        tree, ledger = random_tree(rng, rng.randint(1, 100))
        current = rng.choice(list(tree.nodes))
        target = backtrack_target(tree, ledger, current)
        assert target == brute_force_target(tree, ledger, current)
        if target is not None:
            on_path = tree.ancestors(current)
            for nearer in on_path[: on_path.index(target)]:
                assert not unexplored_actions(tree, nearer, ledger)


# ==================== reverse_path ====================
def test_reverse_path_to_self_is_empty():
    tree = chain_tree(root_spare=False, s1_spare=False)
    assert reverse_path(tree, "s1", "s1") == []


def test_reverse_path_on_depth_three_chain():
    tree = SearchTree("r", [a1])
    tree.add_transition(edge("r", a1, "s1"), [a2])
    tree.add_transition(edge("s1", a2, "s2"), [a3])
    tree.add_transition(edge("s2", a3, "s3"), [])
    path = reverse_path(tree, "s3", "r")
    assert [(e.source, e.target) for e in path] == [("s2", "s3"), ("s1", "s2"), ("r", "s1")]


def test_reverse_path_to_non_ancestor_raises():
    tree = SearchTree("r", [a1, a2])
    tree.add_transition(edge("r", a1, "left"), [])
    tree.add_transition(edge("r", a2, "right"), [])
    with pytest.raises(NotAnAncestor):
        reverse_path(tree, "left", "right")


def test_reverse_path_inverts_the_downward_chain():
    tree, _ = random_tree(random.Random(3), 50)
    for node in tree.nodes:
        for ancestor in tree.ancestors(node):
            up = reverse_path(tree, node, ancestor)
            down = [(e.source, e.action) for e in reversed(up)]
            full = tree.path_from_root(node)
            assert full[len(full) - len(down):] == down
            assert up[0].target == node and up[-1].source == ancestor


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=1, max_value=60), st.integers(min_value=0, max_value=10_000))
def test_reverse_path_length_is_depth_difference(size, seed):
    tree, _ = random_tree(random.Random(seed), size)
    for node in tree.nodes:
        assert len(reverse_path(tree, node, tree.root)) == tree.depth(node)


# ==================== completeness ====================
def drive_by_dfs(world):
    """Explore `world` purely through dfs_decide; backtracks restore a checkpoint of the target."""
    env = SimEnvironment(world)
    env.reset()
    tree = SearchTree(env.current_fingerprint(), env.available_actions())
    ledger = FailureLedger()
    current = tree.root
    checkpoints = {tree.root: env.checkpoint()}
    descended = set()
    for _ in range(10 * len(world.pages) + 10):
        decision = dfs_decide(tree, ledger, current, done=env.goal_satisfied())
        if isinstance(decision, (Finish, Exhausted)):
            return decision, descended
        if isinstance(decision, Descend):
            assert (current, decision.action) not in descended
            descended.add((current, decision.action))
            env.step(decision.action)
            current = tree.add_transition(
                edge(current, decision.action, env.current_fingerprint()),
                env.available_actions(),
            )
            checkpoints[current] = env.checkpoint()
        else:
            env.restore(checkpoints[decision.target])
            current = decision.target
    raise AssertionError("dfs did not terminate")


def test_dfs_finishes_iff_goal_is_reachable():
    for seed in range(200):
        world = generate_world(
            GenParams(depth=5, branching=3, n_traps=0, seed=seed, max_pages=120), ScenarioClass.R
        )
        decision, descended = drive_by_dfs(world)
        assert isinstance(decision, Finish) == goal_reachable(world), seed
        assert len(descended) <= len(world.transitions)


def test_dfs_exhausts_unsolvable_worlds():
    for seed in range(20):
        world = generate_world(GenParams(depth=4, branching=2, seed=seed), ScenarioClass.U)
        decision, _ = drive_by_dfs(world)
        assert decision == Exhausted()
