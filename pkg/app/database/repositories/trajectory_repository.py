from pathlib import Path
from typing import Any, Dict, Iterable, List

from app.database.local.filesystem import LocalFileStore
from app.models.suite import EpisodeRecord, Metrics
from app.models.trajectory import Trajectory
from app.utils.decorators import storage_error_handler

RESULTS_NAME = "results.jsonl"
SUMMARY_JSON = "summary.json"
SUMMARY_TXT = "summary.txt"
PER_CATEGORY_CSV = "per_category.csv"


class TrajectoryRepository:
    """Everything a suite run leaves in its output directory."""

    def __init__(self, store: LocalFileStore):
        self.store = store

    @classmethod
    def at(cls, directory: Path) -> "TrajectoryRepository":
        return cls(LocalFileStore(directory))

    @staticmethod
    def trajectory_name(episode_id: str) -> str:
        return f"trajectories/{episode_id}.jsonl"

    # ==================== TRAJECTORIES ====================
    @storage_error_handler
    def save_trajectory(self, episode_id: str, trajectory: Trajectory) -> Path:
        return self.store.write_text(
            self.trajectory_name(episode_id), trajectory.to_jsonl(episode_id)
        )

    @storage_error_handler
    def load_trajectory_records(self, episode_id: str) -> List[Dict[str, Any]]:
        return self.store.read_jsonl(self.trajectory_name(episode_id))

    # ==================== RESULTS ====================
    @storage_error_handler
    def save_results(self, records: Iterable[EpisodeRecord]) -> Path:
        return self.store.write_jsonl(
            RESULTS_NAME, (r.model_dump(mode="json") for r in records)
        )

    @storage_error_handler
    def load_results(self) -> List[EpisodeRecord]:
        return [EpisodeRecord.model_validate(r) for r in self.store.read_jsonl(RESULTS_NAME)]

    @storage_error_handler
    def save_summary(self, metrics: Metrics, table: str) -> None:
        self.store.write_json(SUMMARY_JSON, metrics.model_dump(mode="json"))
        self.store.write_text(SUMMARY_TXT, table)
        rows = [
            {"category": category, "accuracy": "" if acc is None else f"{acc:.4f}"}
            for category, acc in sorted(metrics.per_category.items())
        ]
        self.store.write_csv(PER_CATEGORY_CSV, ["category", "accuracy"], rows)

    @storage_error_handler
    def save_json(self, name: str, data: Any) -> Path:
        return self.store.write_json(name, data)

    @storage_error_handler
    def save_text(self, name: str, text: str) -> Path:
        return self.store.write_text(name, text)
