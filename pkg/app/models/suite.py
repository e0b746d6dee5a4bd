from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, model_validator

from app.config import settings
from app.models.episode import EpisodeConfig, Outcome
from app.models.world import GenParams, ScenarioClass


class PolicyKind(str, Enum):
    ORACLE = "oracle"
    SCRIPTED = "scripted"
    REMOTE = "remote"


class ScriptedPolicyParams(BaseModel):
    knowledge: float = Field(1.0, ge=0.0, le=1.0)
    wrong_branch_bias: float = Field(1.0, ge=0.0, le=1.0)
    # None: use the detection depth the world was generated with
    detection_depth: Optional[int] = Field(None, ge=1)
    seed: int = 0


class PolicySelection(BaseModel):
    kind: PolicyKind = PolicyKind.SCRIPTED
    scripted: ScriptedPolicyParams = Field(default_factory=ScriptedPolicyParams)
    endpoint: Optional[str] = None

    @model_validator(mode="after")
    def _check_endpoint(self) -> "PolicySelection":
        if self.kind == PolicyKind.REMOTE and not self.endpoint:
            raise ValueError("remote policies need an endpoint")
        return self


class SuiteConfig(BaseModel):
    manifest: Path
    episode: EpisodeConfig = Field(default_factory=EpisodeConfig)
    policy: PolicySelection = Field(default_factory=PolicySelection)
    parallelism: int = Field(1, ge=1)
    output_dir: Path = Field(default_factory=lambda: settings.OUTPUT_DIR)

    @model_validator(mode="after")
    def _check_suite(self) -> "SuiteConfig":
        if not self.manifest.is_file():
            raise ValueError(f"world manifest {self.manifest} does not exist")
        if self.parallelism > settings.MAX_PARALLELISM:
            raise ValueError(
                f"parallelism {self.parallelism} exceeds MAX_PARALLELISM={settings.MAX_PARALLELISM}"
            )
        return self


# ==================== WORLD MANIFEST ====================
class ManifestEntry(BaseModel):
    index: int = Field(..., ge=0)
    seed: int
    category: ScenarioClass
    params: GenParams
    digest: str
    file: str


class WorldManifest(BaseModel):
    entries: List[ManifestEntry] = Field(default_factory=list)


# ==================== RESULTS ====================
class EpisodeRecord(BaseModel):
    """One line of results.jsonl; carries every counter the metrics need."""

    episode_id: str
    world_digest: str
    category: ScenarioClass
    outcome: Outcome
    steps_used: int = Field(0, ge=0)
    backtrack_attempts: int = Field(0, ge=0)
    backtrack_successes: int = Field(0, ge=0)
    backtrack_steps_total: int = Field(0, ge=0)
    backtrack_retries: int = Field(0, ge=0)
    plan_revision: int = Field(0, ge=0)
    diagnostic: Optional[str] = None
    crashed: bool = False


class Metrics(BaseModel):
    episodes: int = Field(0, ge=0)
    accuracy: Optional[float] = Field(None, ge=0.0, le=1.0)
    backtracking_task_rate: Optional[float] = Field(None, ge=0.0, le=1.0)
    backtrack_success_rate: Optional[float] = Field(None, ge=0.0, le=1.0)
    avg_backtrack_steps: Optional[float] = Field(None, ge=0.0)
    per_category: Dict[str, Optional[float]] = Field(default_factory=dict)


# ==================== REPLAY ====================
class ReplayVerdict(str, Enum):
    CLEAN = "CLEAN"
    DIVERGED = "DIVERGED"


class Divergence(BaseModel):
    line: int
    expected: Optional[str] = None
    actual: Optional[str] = None
    reason: str


class ReplayReport(BaseModel):
    log: str
    episode_id: Optional[str] = None
    verdict: ReplayVerdict
    lines_checked: int = 0
    divergence: Optional[Divergence] = None


# ==================== REPORTS ====================
class SuiteReport(BaseModel):
    output_dir: Path
    metrics: Metrics
    records: List[EpisodeRecord] = Field(default_factory=list)

    @property
    def crashed(self) -> int:
        return sum(1 for r in self.records if r.crashed)


class AblationRow(BaseModel):
    label: str
    slug: str
    metrics: Metrics
    outcomes: List[Outcome] = Field(default_factory=list)
    crashed: int = Field(0, ge=0)
