from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.models.episode import (
    AblationConfig,
    EpisodeConfig,
    LoopDirective,
    Outcome,
    SnapshotEntry,
)
from app.models.plan import BackStatus, ExecStatus, Plan, Subtask, SubtaskStatus
from app.models.suite import PolicyKind, PolicySelection, ScriptedPolicyParams
from app.models.trajectory import StepMode
from app.models.world import GenParams, ScenarioClass
from app.policies.oracle import OracleExecutor, OraclePlanner, OracleTracker
from app.services.orchestrator import (
    apply_tracker_update,
    dispatch_status,
    merge_replan,
    run_episode,
)
from app.services.snapshot_stack import SnapshotStack
from app.simulator.environment import SimEnvironment
from app.simulator.generator import generate_world
from app.utils.exceptions import PlanMonotonicityViolation
from helpers import failure_audit, goal_reachable

PENDING, COMPLETED = SubtaskStatus.PENDING, SubtaskStatus.COMPLETED


def plan_of(*items, revision=0):
    return Plan(subtasks=[Subtask(text=t, status=s) for t, s in items], revision=revision)


# ==================== plan lifecycle ====================
def test_single_promotion_is_accepted():
    plan = plan_of(("t1", PENDING), ("t2", PENDING))
    updated = apply_tracker_update(plan, plan_of(("t1", COMPLETED), ("t2", PENDING)))
    assert updated.revision == 1
    assert updated.completed_texts() == ["t1"]


def test_reverting_a_completed_subtask_is_rejected():
    plan = plan_of(("t1", COMPLETED), ("t2", PENDING), revision=3)
    with pytest.raises(PlanMonotonicityViolation):
        apply_tracker_update(plan, plan_of(("t1", PENDING), ("t2", PENDING)))
    assert plan.completed_texts() == ["t1"]


def test_rewriting_pending_text_is_accepted():
    plan = plan_of(("t1", COMPLETED), ("t2", PENDING))
    updated = apply_tracker_update(plan, plan_of(("t1", COMPLETED), ("t2 revised", PENDING)))
    assert [s.text for s in updated.subtasks] == ["t1", "t2 revised"]
    assert updated.revision == 1


def test_identical_update_keeps_the_revision():
    plan = plan_of(("t1", COMPLETED), ("t2", PENDING), revision=2)
    assert apply_tracker_update(plan, plan.model_copy(deep=True)).revision == 2


def test_merge_replan_keeps_completed_prefix():
    plan = plan_of(("a", COMPLETED), ("b", PENDING), ("c", PENDING), revision=4)
    revised = plan_of(("a", COMPLETED), ("x", PENDING), ("y", PENDING))
    merged = merge_replan(plan, revised)
    assert [(s.text, s.status) for s in merged.subtasks] == [
        ("a", COMPLETED),
        ("x", PENDING),
        ("y", PENDING),
    ]
    assert merged.revision == 5


subtask_lists = st.lists(
    st.tuples(st.sampled_from(["t1", "t2", "t3", "t4"]), st.sampled_from([PENDING, COMPLETED])),
    max_size=5,
)


@settings(max_examples=2000)
@given(subtask_lists, subtask_lists)
def test_every_reversion_is_rejected(before, after):
    plan, updated = plan_of(*before), plan_of(*after)
    lost = Counter(plan.completed_texts()) - Counter(updated.completed_texts())
    if lost:
        with pytest.raises(PlanMonotonicityViolation):
            apply_tracker_update(plan, updated)
    else:
        accepted = apply_tracker_update(plan, updated)
        assert not Counter(plan.completed_texts()) - Counter(accepted.completed_texts())
        assert accepted.revision in (plan.revision, plan.revision + 1)


# ==================== dispatch ====================
@pytest.mark.parametrize(
    "status,ablation,directive",
    [
        (ExecStatus.DONE, AblationConfig(), LoopDirective.TERMINATE_DONE),
        (ExecStatus.CONTINUE, AblationConfig(), LoopDirective.NEXT_STEP),
        (ExecStatus.FAIL, AblationConfig(), LoopDirective.TERMINATE_FAIL),
        (ExecStatus.BACKTRACK, AblationConfig(), LoopDirective.ENTER_BACKTRACK),
        (ExecStatus.BACKTRACK, AblationConfig(enable_backtrack=False), LoopDirective.TERMINATE_FAIL),
    ],
)
def test_dispatch_status(status, ablation, directive):
    assert dispatch_status(status, ablation) == directive


# ==================== episodes ====================
def test_goal_at_initial_state_finishes_without_steps(root_goal_world, run_oracle):
    result = run_oracle(root_goal_world)
    assert result.outcome == Outcome.DONE
    assert result.steps_used == 0


def test_budget_clamps_a_sixty_step_world(chain_world, run_oracle):
    result = run_oracle(chain_world(depth=60), EpisodeConfig(max_steps=50))
    assert result.outcome == Outcome.BUDGET_EXHAUSTED
    assert result.steps_used == 50
    assert result.diagnostic


@pytest.mark.parametrize("seed", range(50))
def test_multi_level_backtracking_recovers_where_single_step_fails(seed, decoy_world, run_scripted):
    world = decoy_world(seed=seed)
    full = run_scripted(world)
    single = run_scripted(world, EpisodeConfig(max_backtrack_depth=1))
    assert full.outcome == Outcome.DONE
    assert full.backtrack_successes == full.backtrack_attempts >= 1
    assert single.outcome == Outcome.FAIL


def test_one_invertible_edge_recovers_on_first_round(one_level_world, run_scripted):
    result = run_scripted(one_level_world)
    assert result.outcome == Outcome.DONE
    assert result.backtrack_attempts == 1
    assert result.backtrack_successes == 1
    assert result.backtrack_steps_total == 1
    assert result.backtrack_retries == 0
    backtrack_steps = [s for s in result.trajectory.steps if s.mode == StepMode.BACKTRACK]
    assert backtrack_steps[0].edge.action.kind.value == "Inverse"
    assert backtrack_steps[0].back_status == BackStatus.RECOVERED


def test_irreversible_middle_edge_falls_back_to_checkpoint(irreversible_middle_world, run_scripted):
    result = run_scripted(
        irreversible_middle_world, params=ScriptedPolicyParams(detection_depth=3)
    )
    assert result.outcome == Outcome.DONE
    assert result.backtrack_attempts == 1
    assert result.backtrack_successes == 1
    assert result.backtrack_retries == 3
    assert result.backtrack_steps_total == 2
    kinds = [s.edge.action.kind.value for s in result.trajectory.steps if s.mode == StepMode.BACKTRACK]
    assert kinds == ["Inverse", "Restore"]
    assert result.steps_used == 7


def test_reset_replay_is_the_last_rung(irreversible_middle_world, run_scripted):
    result = run_scripted(
        irreversible_middle_world,
        EpisodeConfig(snapshot_window=1),
        ScriptedPolicyParams(detection_depth=3),
    )
    assert result.outcome == Outcome.DONE
    kinds = [s.edge.action.kind.value for s in result.trajectory.steps if s.mode == StepMode.BACKTRACK]
    assert kinds[0] == "Inverse"
    assert "Reset" in kinds and "Restore" not in kinds


def test_no_checkpoint_and_no_replay_is_irrecoverable(irreversible_middle_world, run_scripted):
    result = run_scripted(
        irreversible_middle_world,
        EpisodeConfig(snapshot_window=1, allow_reset_replay=False),
        ScriptedPolicyParams(detection_depth=3),
    )
    assert result.outcome == Outcome.FAIL
    assert result.backtrack_attempts == 1
    assert result.backtrack_successes == 0


def test_eighty_percent_suite(decoy_world, run_scripted):
    config = EpisodeConfig(snapshot_window=2, allow_reset_replay=False)
    worlds = [decoy_world(seed=s, irreversible_fraction=0.0) for s in range(4)]
    worlds.append(decoy_world(seed=4, irreversible_fraction=1.0))
    results = [run_scripted(w, config) for w in worlds]
    attempts = sum(r.backtrack_attempts for r in results)
    successes = sum(r.backtrack_successes for r in results)
    assert (successes, attempts) == (4, 5)
    assert [r.outcome for r in results] == [Outcome.DONE] * 4 + [Outcome.FAIL]


def test_without_tracker_the_plan_is_never_revised(chain_world, drift_world, run_scripted):
    config = EpisodeConfig(ablation=AblationConfig(enable_tracker=False))
    done = run_scripted(chain_world(depth=4), config)
    assert done.outcome == Outcome.DONE
    assert done.final_plan.revision == 0
    failed = run_scripted(drift_world(seed=2), config)
    assert failed.outcome == Outcome.FAIL
    assert failed.final_plan.revision == 0
    assert failed.diagnostic == "dead end reached with the tracker disabled"

    neither = EpisodeConfig(ablation=AblationConfig(enable_backtrack=False, enable_tracker=False))
    failed = run_scripted(drift_world(seed=2), neither)
    assert failed.diagnostic == "dead end reached with backtracking disabled"


def test_counters_agree_with_the_trajectory(decoy_world, run_scripted):
    for seed in range(10):
        result = run_scripted(decoy_world(seed=seed, branching=3))
        steps = result.trajectory.steps
        assert result.steps_used == len(steps)
        assert [s.index for s in steps] == list(range(len(steps)))
        assert result.backtrack_steps_total == result.trajectory.count(StepMode.BACKTRACK)
        assert result.backtrack_steps_total <= result.steps_used


def test_plan_revisions_only_grow(drift_world, run_scripted):
    result = run_scripted(drift_world(seed=1))
    revisions = [s.plan_revision for s in result.trajectory.steps]
    assert revisions == sorted(revisions)
    assert result.final_plan.revision >= revisions[-1]


def test_backtrack_mode_is_left_only_after_recovery(decoy_world, run_scripted):
    for seed in range(10):
        steps = run_scripted(decoy_world(seed=seed)).trajectory.steps
        for before, after in zip(steps, steps[1:]):
            if before.mode == StepMode.BACKTRACK and after.mode == StepMode.NORMAL:
                assert before.back_status == BackStatus.RECOVERED


def ledger_edges(runner):
    return {(runner.tree.fingerprint_of(s), a) for s, a in runner.ledger.failed_edges}


def test_failed_branch_is_never_descended_again(decoy_world, make_runner):
    runner = make_runner(decoy_world(seed=8))
    result = runner.run()
    assert result.outcome == Outcome.DONE
    assert len(runner.ledger) == 1
    normal = [(s.edge.source, s.edge.action) for s in result.trajectory.steps if s.mode == StepMode.NORMAL]
    assert len(normal) == len(set(normal))
    for failed in ledger_edges(runner):
        assert normal.count(failed) == 1

    failed, revisits = failure_audit(result.trajectory.steps)
    assert failed == ledger_edges(runner)
    assert revisits == []


def test_failed_branches_stay_abandoned_across_policies(make_runner):
    selections = [
        PolicySelection(kind=PolicyKind.SCRIPTED),
        PolicySelection(kind=PolicyKind.SCRIPTED, scripted=ScriptedPolicyParams(knowledge=0.5)),
    ]
    for seed in range(40):
        category = ScenarioClass.U if seed % 2 else ScenarioClass.R
        world = generate_world(GenParams(depth=4, branching=3, n_traps=1, seed=seed), category)
        for selection in selections:
            runner = make_runner(world, selection=selection, episode_seed=seed)
            result = runner.run()
            failed, revisits = failure_audit(result.trajectory.steps)
            assert failed == ledger_edges(runner), seed
            assert revisits == [], seed


class RevertingTracker(OracleTracker):
    def track(self, state, task, plan, history, failures):
        updated, status = super().track(state, task, plan, history, failures)
        if plan.completed_texts():
            return updated.as_pending(), status
        return updated, status


def test_reverting_tracker_updates_are_rejected_and_the_plan_kept(chain_world):
    world = chain_world(depth=3)
    env = SimEnvironment(world)
    env.reset()
    result = run_episode(
        env, OraclePlanner(world), OracleExecutor(world), RevertingTracker(world), EpisodeConfig()
    )
    assert result.outcome == Outcome.DONE
    assert result.final_plan.revision == 1
    assert len(result.final_plan.completed_texts()) == 1


class BrokenPlanner:
    def plan(self, state, task, failures):
        raise RuntimeError("model unavailable")


def test_policy_failure_ends_the_episode_with_a_diagnostic(chain_world):
    world = chain_world(depth=3)
    env = SimEnvironment(world)
    env.reset()
    result = run_episode(
        env, BrokenPlanner(), OracleExecutor(world), OracleTracker(world), EpisodeConfig()
    )
    assert result.outcome == Outcome.FAIL
    assert "planner" in result.diagnostic
    assert result.steps_used == 0


def test_oracle_policies_solve_every_solvable_random_world(make_runner):
    for seed in range(200):
        world = generate_world(
            GenParams(depth=5, branching=3, n_traps=2, seed=seed), ScenarioClass.R
        )
        runner = make_runner(world, selection=PolicySelection(kind=PolicyKind.ORACLE))
        result = runner.run()
        assert (result.outcome == Outcome.DONE) == goal_reachable(world), seed
        failed, revisits = failure_audit(result.trajectory.steps)
        assert failed == ledger_edges(runner), seed
        assert revisits == [], seed


# ==================== snapshot stack ====================
def entry(state, step):
    return SnapshotEntry(state=state, env_checkpoint=f"ckpt-{step}", step_index=step)


def test_snapshot_window_evicts_oldest():
    evicted = []
    stack = SnapshotStack(2, on_evict=evicted.append)
    for i, state in enumerate(["a", "b", "c"]):
        stack.push(entry(state, i))
    assert [e.state for e in stack.entries] == ["b", "c"]
    assert evicted == ["ckpt-0"]
    assert stack.find("a") is None
    assert stack.find("b").env_checkpoint == "ckpt-1"


def test_snapshot_unwind_stops_at_kept_state():
    stack = SnapshotStack(10)
    for i, state in enumerate(["r", "x", "y", "z"]):
        stack.push(entry(state, i))
    assert stack.unwind({"r", "x"}) == 2
    assert stack.top.state == "x"


def test_snapshot_stack_validation():
    with pytest.raises(ValueError):
        SnapshotStack(0)
    stack = SnapshotStack(3)
    stack.push(entry("a", 5))
    with pytest.raises(ValueError):
        stack.push(entry("b", 2))
