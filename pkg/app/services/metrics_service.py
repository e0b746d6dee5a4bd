# app/services/metrics_service.py

from collections import defaultdict
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from app.database.repositories.trajectory_repository import TrajectoryRepository
from app.models.episode import Outcome
from app.models.suite import AblationRow, EpisodeRecord, Metrics
from app.models.trajectory import StepMode
from app.utils.logger import logger

# Row names as used in published backtracking tables
ROW_NAMES = (
    ("accuracy", "Acc"),
    ("backtracking_task_rate", "Backtracking Task Rate"),
    ("backtrack_success_rate", "Backtrack Success Rate"),
    ("avg_backtrack_steps", "Average Backtrack Steps"),
)


def _ratio(numerator: int, denominator: int) -> Optional[float]:
    return None if denominator == 0 else numerator / denominator


def compute_metrics(records: Iterable[EpisodeRecord]) -> Metrics:
    """Suite metrics from per-episode counters; pure sums, so episode order never matters."""
    episodes = done = backtracking = attempts = successes = steps = 0
    per_category: Dict[str, List[int]] = defaultdict(lambda: [0, 0])

    for record in records:
        episodes += 1
        succeeded = record.outcome == Outcome.DONE
        done += succeeded
        backtracking += record.backtrack_attempts >= 1
        attempts += record.backtrack_attempts
        successes += record.backtrack_successes
        steps += record.backtrack_steps_total
        per_category[record.category.value][0] += succeeded
        per_category[record.category.value][1] += 1

    return Metrics(
        episodes=episodes,
        accuracy=_ratio(done, episodes),
        backtracking_task_rate=_ratio(backtracking, episodes),
        backtrack_success_rate=_ratio(successes, attempts),
        avg_backtrack_steps=_ratio(steps, attempts),
        per_category={c: _ratio(d, n) for c, (d, n) in sorted(per_category.items())},
    )


def format_value(field: str, value: Optional[float]) -> str:
    if value is None:
        return "n/a"
    if field == "avg_backtrack_steps":
        return f"{value:.2f}"
    return f"{value * 100:.1f}%"


def render_table(columns: Sequence[Tuple[str, Metrics]]) -> str:
    """Aligned plain-text table: one metric per row, one column per run."""
    header = ["Metric"] + [label for label, _ in columns]
    rows = [header]
    for field, name in ROW_NAMES:
        rows.append([name] + [format_value(field, getattr(m, field)) for _, m in columns])
    categories = sorted({c for _, m in columns for c in m.per_category})
    for category in categories:
        rows.append(
            [f"Acc ({category})"]
            + [format_value("accuracy", m.per_category.get(category)) for _, m in columns]
        )
    rows.append(["Episodes"] + [str(m.episodes) for _, m in columns])

    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = []
    for n, row in enumerate(rows):
        cells = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        lines.append("  ".join(cells).rstrip())
        if n == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def render_summary(metrics: Metrics) -> str:
    return render_table([("Value", metrics)])


def render_ablation(rows: Sequence[AblationRow]) -> str:
    return render_table([(row.label, row.metrics) for row in rows])


def cross_check(
    records: Iterable[EpisodeRecord], repository: TrajectoryRepository
) -> List[str]:
    """Compare each record's step counters with its trajectory file."""
    problems = []
    for record in records:
        lines = repository.load_trajectory_records(record.episode_id)
        backtrack_lines = sum(1 for line in lines if line.get("mode") == StepMode.BACKTRACK.value)
        if len(lines) != record.steps_used:
            problems.append(
                f"{record.episode_id}: steps_used={record.steps_used} but log has {len(lines)} lines"
            )
        if backtrack_lines != record.backtrack_steps_total:
            problems.append(
                f"{record.episode_id}: backtrack_steps_total={record.backtrack_steps_total} "
                f"but log has {backtrack_lines} Backtrack lines"
            )
    for problem in problems:
        logger.warning(problem)
    return problems


def recompute(repository: TrajectoryRepository) -> Tuple[Metrics, List[str]]:
    records = repository.load_results()
    return compute_metrics(records), cross_check(records, repository)
