# app/services/policy_service.py

import threading
from typing import Dict, Optional

from app.config import settings
from app.database.repositories import WorldRepository
from app.models.observation import StateView
from app.models.plan import Plan
from app.models.suite import PolicyKind, PolicySelection, ScriptedPolicyParams
from app.models.trajectory import StepMode, Trajectory
from app.models.wire import PolicyRequest, PolicyResponse, PolicyRole
from app.models.world import WorldSpec
from app.policies import build_policies
from app.services.search_tree import FailureLedger
from app.utils.logger import logger


class PolicyService:
    """Answers wire requests with the reference policies for worlds on disk."""

    def __init__(
        self,
        worlds: WorldRepository,
        kind: Optional[PolicyKind] = None,
        params: Optional[ScriptedPolicyParams] = None,
    ):
        self.worlds = worlds
        self.selection = PolicySelection(
            kind=kind or PolicyKind(settings.SERVER_POLICY),
            scripted=params or ScriptedPolicyParams(),
        )
        self._cache: Dict[str, WorldSpec] = {}
        self._lock = threading.Lock()

    def world(self, digest: str) -> WorldSpec:
        with self._lock:
            if digest not in self._cache:
                self._cache[digest] = self.worlds.load_world(digest)
            return self._cache[digest]

    @staticmethod
    def ledger_from(request: PolicyRequest) -> FailureLedger:
        ledger = FailureLedger()
        for record in request.failures:
            ledger.record_failure([(record.state, record.action)])
        return ledger

    def handle(self, request: PolicyRequest) -> PolicyResponse:
        world = self.world(request.task.world_digest)
        policies = build_policies(self.selection, world, episode_seed=request.seed)
        view = StateView(fingerprint=request.state, observation=request.observation)
        history = Trajectory(steps=request.trajectory_tail)
        backtracking = request.mode == StepMode.BACKTRACK
        logger.debug(
            f"{request.role.value} request ({request.mode.value}) for world {world.digest[:12]}"
        )

        if request.role == PolicyRole.PLANNER:
            plan = policies.planner.plan(view, request.task, self.ledger_from(request))
            return PolicyResponse(plan=plan)

        if request.role == PolicyRole.EXECUTOR:
            if backtracking:
                return PolicyResponse(
                    action=policies.executor.backtrack_act(history, request.target)
                )
            action = policies.executor.act(view, request.task, request.plan or Plan(), history)
            return PolicyResponse(action=action)

        if backtracking:
            return PolicyResponse(
                back_status=policies.tracker.verify_backtrack(view, request.target, history)
            )
        plan, status = policies.tracker.track(
            view, request.task, request.plan or Plan(), history, self.ledger_from(request)
        )
        return PolicyResponse(plan=plan, exec_status=status)
