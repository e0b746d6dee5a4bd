# app/services/orchestrator.py

from collections import Counter
from typing import Optional, Tuple

from app.models.action import ActionKind, ActionSpec
from app.models.episode import (
    AblationConfig,
    EpisodeConfig,
    EpisodeResult,
    LoopDirective,
    Outcome,
    SnapshotEntry,
)
from app.models.observation import Observation, StateView
from app.models.plan import BackStatus, ExecStatus, Plan, Subtask
from app.models.trajectory import StepMode, Trajectory, TransitionEdge
from app.policies.base import Executor, Planner, Tracker
from app.services.dfs_engine import (
    Backtrack,
    Descend,
    Exhausted,
    dfs_decide,
    plan_backtrack,
)
from app.services.search_tree import FailureLedger, SearchTree, unexplored_actions
from app.services.snapshot_stack import SnapshotStack
from app.simulator.environment import SimEnvironment
from app.utils.decorators import policy_error_handler
from app.utils.exceptions import (
    BacktrackIrrecoverable,
    CheckpointError,
    EpisodePolicyError,
    IllegalAction,
    IrreversibleAction,
    PlanMonotonicityViolation,
)
from app.utils.fingerprint import fingerprint
from app.utils.logger import logger


class BudgetExhausted(Exception):
    pass


# ==================== PLAN LIFECYCLE ====================
def apply_tracker_update(plan: Plan, updated: Plan) -> Plan:
    """Accept a tracker's plan iff every completed subtask stays completed."""
    kept = Counter(updated.completed_texts())
    missing = Counter(plan.completed_texts()) - kept
    if missing:
        raise PlanMonotonicityViolation(
            "Plan update reverts completed subtasks",
            details={"reverted": sorted(missing.elements()), "revision": plan.revision},
        )
    if updated.subtasks == plan.subtasks:
        return plan
    return Plan(
        subtasks=[Subtask(text=s.text, status=s.status) for s in updated.subtasks],
        revision=plan.revision + 1,
    )


def merge_replan(plan: Plan, revised: Plan) -> Plan:
    """Completed subtasks of `plan` first, then whatever `revised` adds."""
    subtasks = [Subtask(text=s.text, status=s.status) for s in plan.subtasks if s.completed]
    already = Counter(plan.completed_texts())
    for subtask in revised.subtasks:
        if subtask.completed and already[subtask.text] > 0:
            already[subtask.text] -= 1
            continue
        subtasks.append(Subtask(text=subtask.text, status=subtask.status))
    return Plan(subtasks=subtasks, revision=plan.revision + 1)


def dispatch_status(status: ExecStatus, ablation: Optional[AblationConfig] = None) -> LoopDirective:
    ablation = ablation or AblationConfig()
    if status == ExecStatus.CONTINUE:
        return LoopDirective.NEXT_STEP
    if status == ExecStatus.BACKTRACK:
        if ablation.enable_backtrack:
            return LoopDirective.ENTER_BACKTRACK
        return LoopDirective.TERMINATE_FAIL
    if status == ExecStatus.DONE:
        return LoopDirective.TERMINATE_DONE
    return LoopDirective.TERMINATE_FAIL


# ==================== EPISODE ====================
class EpisodeRunner:
    """Drives one episode: plan, act, track, and backtrack when told to.

    Owns the search tree, failure ledger, trajectory and snapshot stack of
    the episode; none of them is shared with other episodes.
    """

    def __init__(
        self,
        env: SimEnvironment,
        planner: Planner,
        executor: Executor,
        tracker: Tracker,
        config: EpisodeConfig,
        episode_id: str = "",
    ):
        self.env = env
        self.planner = planner
        self.executor = executor
        self.tracker = tracker
        self.config = config
        self.episode_id = episode_id
        self.task = env.task()

        self.trajectory = Trajectory()
        self.ledger = FailureLedger()
        self.snapshots = SnapshotStack(config.snapshot_window, on_evict=env.discard)
        self.plan = Plan()
        self.mode = StepMode.NORMAL
        self.diagnostic: Optional[str] = None

        self.backtrack_attempts = 0
        self.backtrack_successes = 0
        self.backtrack_steps = 0
        self.backtrack_retries = 0

        observation = env.observe()
        self.env_fp = fingerprint(observation)
        self.tree = SearchTree(self.env_fp, observation.actions)
        self.current = self.env_fp

    # ==================== POLICY CALLS ====================
    def _view(self) -> StateView:
        return StateView(fingerprint=self.env_fp, observation=self.env.observe())

    @policy_error_handler("planner")
    def _call_planner(self) -> Plan:
        return Plan.model_validate(self.planner.plan(self._view(), self.task, self.ledger))

    @policy_error_handler("executor")
    def _call_executor(self) -> ActionSpec:
        action = self.executor.act(self._view(), self.task, self.plan, self.trajectory)
        return ActionSpec.model_validate(action)

    @policy_error_handler("executor")
    def _call_backtrack_executor(self, target_fp: str) -> ActionSpec:
        return ActionSpec.model_validate(self.executor.backtrack_act(self.trajectory, target_fp))

    @policy_error_handler("tracker")
    def _call_tracker(self) -> Tuple[Plan, ExecStatus]:
        plan, status = self.tracker.track(
            self._view(), self.task, self.plan, self.trajectory, self.ledger
        )
        return Plan.model_validate(plan), ExecStatus(status)

    @policy_error_handler("tracker")
    def _call_verifier(self, target_fp: str) -> BackStatus:
        return BackStatus(self.tracker.verify_backtrack(self._view(), target_fp, self.trajectory))

    # ==================== RUN ====================
    def run(self) -> EpisodeResult:
        logger.info(f"Episode {self.episode_id or '<anonymous>'} started")
        self._push_snapshot()
        try:
            initial = self._call_planner()
            self.plan = Plan(subtasks=initial.as_pending().subtasks, revision=0)
            outcome = self._loop()
        except BudgetExhausted:
            outcome = Outcome.BUDGET_EXHAUSTED
            self.diagnostic = f"step budget of {self.config.max_steps} exhausted"
        except EpisodePolicyError as e:
            outcome = Outcome.FAIL
            self.diagnostic = f"{e.message}: {e.details}"
        except BacktrackIrrecoverable as e:
            logger.error(f"Episode {self.episode_id}: {e}")
            outcome = Outcome.FAIL
            self.diagnostic = e.message

        result = EpisodeResult(
            episode_id=self.episode_id,
            outcome=outcome,
            steps_used=len(self.trajectory.steps),
            backtrack_attempts=self.backtrack_attempts,
            backtrack_successes=self.backtrack_successes,
            backtrack_steps_total=self.backtrack_steps,
            backtrack_retries=self.backtrack_retries,
            trajectory=self.trajectory,
            final_plan=self.plan,
            diagnostic=self.diagnostic if outcome != Outcome.DONE else None,
        )
        logger.info(
            f"Episode {self.episode_id or '<anonymous>'} finished {outcome.value} "
            f"steps={result.steps_used} backtracks={result.backtrack_successes}/{result.backtrack_attempts}"
        )
        return result

    def _loop(self) -> Outcome:
        ablation = self.config.ablation
        while True:
            status = self._assess()
            directive = dispatch_status(status, ablation)

            if directive == LoopDirective.TERMINATE_DONE:
                dfs_decide(self.tree, self.ledger, self.current, done=True)
                return Outcome.DONE
            if directive == LoopDirective.TERMINATE_FAIL:
                self.diagnostic = (
                    "tracker reported FAIL"
                    if status == ExecStatus.FAIL
                    else "dead branch detected with backtracking disabled"
                )
                return Outcome.FAIL

            if directive == LoopDirective.ENTER_BACKTRACK:
                decision = plan_backtrack(self.tree, self.ledger, self.current)
            elif unexplored_actions(self.tree, self.current, self.ledger):
                suggestion = self._call_executor()
                decision = dfs_decide(
                    self.tree, self.ledger, self.current, done=False, preferred=suggestion
                )
            else:
                decision = dfs_decide(self.tree, self.ledger, self.current, done=False)

            if isinstance(decision, Descend):
                self._descend(decision.action)
                continue
            if isinstance(decision, Exhausted):
                self.diagnostic = "search space exhausted"
                return Outcome.FAIL
            if not ablation.enable_backtrack:
                self.diagnostic = "dead end reached with backtracking disabled"
                return Outcome.FAIL
            if not ablation.enable_tracker:
                self.diagnostic = "dead end reached with the tracker disabled"
                return Outcome.FAIL
            self._backtrack(decision)

    def _assess(self) -> ExecStatus:
        if not self.config.ablation.enable_tracker:
            status = ExecStatus.DONE if self.env.goal_satisfied() else ExecStatus.CONTINUE
        else:
            updated, status = self._call_tracker()
            try:
                self.plan = apply_tracker_update(self.plan, updated)
            except PlanMonotonicityViolation as e:
                logger.warning(f"Rejected tracker plan update: {e}")

        if self.trajectory.last is not None:
            self.trajectory.last.exec_status = status
        logger.debug(f"assess {self.env_fp[:12]} -> {status.value}")
        return status

    # ==================== ENV ACTIONS ====================
    def _env_step(self, action: ActionSpec, mode: StepMode) -> Observation:
        if self.env.clock >= self.config.max_steps:
            raise BudgetExhausted()
        observation = self.env.step(action)
        target = fingerprint(observation)
        self.trajectory.append(
            mode,
            TransitionEdge(source=self.env_fp, action=action, target=target),
            plan_revision=self.plan.revision,
        )
        self.env_fp = target
        if mode == StepMode.BACKTRACK:
            self.backtrack_steps += 1
        assert self.env.clock == len(self.trajectory.steps)
        return observation

    def _descend(self, action: ActionSpec) -> None:
        observation = self._env_step(action, StepMode.NORMAL)
        self.current = self.tree.add_transition(
            TransitionEdge(source=self.current, action=action, target=self.env_fp),
            observation.actions,
        )
        self._push_snapshot()

    def _push_snapshot(self) -> None:
        top = self.snapshots.top
        if top is not None and top.state == self.current:
            return
        self.snapshots.push(
            SnapshotEntry(
                state=self.current,
                env_checkpoint=self.env.checkpoint(),
                step_index=self.env.clock,
            )
        )

    # ==================== BACKTRACKING ====================
    def _backtrack(self, decision: Backtrack) -> None:
        limit = self.config.max_backtrack_depth
        if limit is not None and decision.distance > limit:
            raise BacktrackIrrecoverable(
                f"Nearest viable ancestor is {decision.distance} levels up, limit is {limit}",
                details={"distance": decision.distance, "limit": limit},
            )

        self.mode = StepMode.BACKTRACK
        self.backtrack_attempts += 1
        target_fp = self.tree.fingerprint_of(decision.target)
        logger.debug(
            f"Backtrack mode: {self.env_fp[:12]} -> {target_fp[:12]} ({decision.distance} levels)"
        )

        recovered = False
        for _ in range(self.config.max_backtrack_retries):
            logged = len(self.trajectory.steps)
            self._inverse_round(target_fp, decision.distance)
            if self._verify(target_fp, logged) == BackStatus.RECOVERED:
                recovered = True
                break
            self.backtrack_retries += 1

        if not recovered:
            recovered = self._fallback(decision.target, target_fp)
        if not recovered:
            raise BacktrackIrrecoverable(
                "No inverse, checkpoint or replay returned to the backtrack target",
                details={"target": target_fp},
            )

        self.backtrack_successes += 1
        self._resume_at(decision.target)

    def _inverse_round(self, target_fp: str, max_moves: int) -> None:
        for _ in range(max_moves):
            if self.env_fp == target_fp:
                return
            action = self._call_backtrack_executor(target_fp)
            if action.kind == ActionKind.RESTORE and action.token is None:
                return
            if action.is_forward:
                logger.warning(f"Executor proposed forward {action.label} while backtracking")
                return
            try:
                self._env_step(action, StepMode.BACKTRACK)
            except (IrreversibleAction, IllegalAction, CheckpointError) as e:
                logger.warning(f"Backtrack action {action.label} rejected: {e.message}")
                return

    def _verify(self, target_fp: str, logged_before: int) -> BackStatus:
        status = self._call_verifier(target_fp)
        if len(self.trajectory.steps) > logged_before:
            self.trajectory.last.back_status = status
        return status

    def _fallback(self, target: str, target_fp: str) -> bool:
        entry = self.snapshots.find(target)
        if entry is not None:
            logger.warning(f"Restoring checkpoint {entry.env_checkpoint}")
            logged = len(self.trajectory.steps)
            self._env_step(ActionSpec.restore(entry.env_checkpoint), StepMode.BACKTRACK)
            if self._verify(target_fp, logged) == BackStatus.RECOVERED:
                return True
            self.backtrack_retries += 1

        if self.config.allow_reset_replay:
            logger.warning(f"Resetting and replaying {self.tree.depth(target)} steps")
            logged = len(self.trajectory.steps)
            self._env_step(ActionSpec.reset(), StepMode.BACKTRACK)
            for _, action in self.tree.path_from_root(target):
                self._env_step(action, StepMode.BACKTRACK)
            if self._verify(target_fp, logged) == BackStatus.RECOVERED:
                return True
            self.backtrack_retries += 1
        return False

    def _resume_at(self, target: str) -> None:
        self.ledger.record_failure(
            self.tree.path_from_root(self.current),
            surviving=self.tree.path_from_root(target),
        )
        self.current = target
        self.plan = merge_replan(self.plan, self._call_planner())

        keep = set(self.tree.ancestors(target)) | {target}
        self.snapshots.unwind(keep)
        self._push_snapshot()
        self.mode = StepMode.NORMAL
        logger.debug(f"Recovered at {target[:12]}; plan revision {self.plan.revision}")


def run_episode(
    env: SimEnvironment,
    planner: Planner,
    executor: Executor,
    tracker: Tracker,
    config: EpisodeConfig,
    episode_id: str = "",
) -> EpisodeResult:
    return EpisodeRunner(env, planner, executor, tracker, config, episode_id).run()
