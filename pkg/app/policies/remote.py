# app/policies/remote.py

from typing import List, Optional, Tuple

from app.config import settings
from app.external.policy_endpoint import RemotePolicyClient
from app.models.action import ActionSpec
from app.models.observation import Observation, StateView, TaskSpec
from app.models.plan import BackStatus, ExecStatus, Plan
from app.models.trajectory import StepMode, Trajectory
from app.models.wire import FailureRecord, PolicyRequest, PolicyResponse, PolicyRole
from app.services.search_tree import FailureLedger
from app.utils.exceptions import PolicyProtocolError


def failure_records(failures: Optional[FailureLedger]) -> List[FailureRecord]:
    if failures is None:
        return []
    records = [FailureRecord(state=s, action=a) for s, a in failures.failed_edges]
    return sorted(records, key=lambda r: (r.state, r.action.sort_key))


class RemoteSession:
    """Builds wire requests for one episode and checks each role's answer."""

    def __init__(
        self,
        client: RemotePolicyClient,
        task: TaskSpec,
        seed: int = 0,
        tail: Optional[int] = None,
    ):
        self.client = client
        self.task = task
        self.seed = seed
        self.tail = tail if tail is not None else settings.POLICY_TRAJECTORY_TAIL

    def request(
        self,
        role: PolicyRole,
        state: str,
        observation: Observation,
        history: Optional[Trajectory] = None,
        plan: Optional[Plan] = None,
        failures: Optional[FailureLedger] = None,
        mode: StepMode = StepMode.NORMAL,
        target: Optional[str] = None,
    ) -> PolicyResponse:
        payload = PolicyRequest(
            role=role,
            mode=mode,
            task=self.task,
            state=state,
            observation=observation,
            plan=plan,
            trajectory_tail=history.tail(self.tail).steps if history is not None else [],
            failures=failure_records(failures),
            target=target,
            seed=self.seed,
        )
        return self.client.call(role, payload)


def _require(response: PolicyResponse, field: str, role: PolicyRole):
    value = getattr(response, field)
    if value is None:
        raise PolicyProtocolError(
            f"{role.value} response is missing '{field}'", details={"role": role.value}
        )
    return value


class RemotePlanner:
    def __init__(self, session: RemoteSession):
        self.session = session

    def plan(self, state: StateView, task: TaskSpec, failures: FailureLedger) -> Plan:
        response = self.session.request(
            PolicyRole.PLANNER, state.fingerprint, state.observation, failures=failures
        )
        return _require(response, "plan", PolicyRole.PLANNER)


class RemoteExecutor:
    def __init__(self, session: RemoteSession):
        self.session = session

    def act(
        self, state: StateView, task: TaskSpec, plan: Plan, history: Trajectory
    ) -> ActionSpec:
        response = self.session.request(
            PolicyRole.EXECUTOR, state.fingerprint, state.observation, history, plan
        )
        return _require(response, "action", PolicyRole.EXECUTOR)

    def backtrack_act(self, history: Trajectory, target: str) -> ActionSpec:
        last = history.last
        state = last.edge.target if last is not None else target
        response = self.session.request(
            PolicyRole.EXECUTOR,
            state,
            Observation(),
            history,
            mode=StepMode.BACKTRACK,
            target=target,
        )
        return _require(response, "action", PolicyRole.EXECUTOR)


class RemoteTracker:
    def __init__(self, session: RemoteSession):
        self.session = session

    def track(
        self,
        state: StateView,
        task: TaskSpec,
        plan: Plan,
        history: Trajectory,
        failures: FailureLedger,
    ) -> Tuple[Plan, ExecStatus]:
        response = self.session.request(
            PolicyRole.TRACKER,
            state.fingerprint,
            state.observation,
            history,
            plan,
            failures,
        )
        return (
            _require(response, "plan", PolicyRole.TRACKER),
            _require(response, "exec_status", PolicyRole.TRACKER),
        )

    def verify_backtrack(
        self, state: StateView, target: str, history: Trajectory
    ) -> BackStatus:
        response = self.session.request(
            PolicyRole.TRACKER,
            state.fingerprint,
            state.observation,
            history,
            mode=StepMode.BACKTRACK,
            target=target,
        )
        return _require(response, "back_status", PolicyRole.TRACKER)
