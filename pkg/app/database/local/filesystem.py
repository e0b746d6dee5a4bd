# app/database/local/filesystem.py

import csv
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List

from app.utils.fingerprint import canonical_json


class LocalFileStore:
    """Plain files under one root directory: JSON, JSONL, text and CSV."""

    def __init__(self, root: Path):
        self.root = Path(root)

    def path(self, relative: str) -> Path:
        return self.root / relative

    def exists(self, relative: str) -> bool:
        return self.path(relative).exists()

    def _prepare(self, relative: str) -> Path:
        target = self.path(relative)
        target.parent.mkdir(parents=True, exist_ok=True)
        return target

    # ==================== JSON ====================
    def read_json(self, relative: str) -> Any:
        with self.path(relative).open("r", encoding="utf-8") as f:
            return json.load(f)

    def write_json(self, relative: str, data: Any) -> Path:
        target = self._prepare(relative)
        with target.open("w", encoding="utf-8") as f:
            json.dump(data, f, sort_keys=True, indent=2, ensure_ascii=False)
            f.write("\n")
        return target

    # ==================== JSONL ====================
    def read_jsonl(self, relative: str) -> List[Dict[str, Any]]:
        with self.path(relative).open("r", encoding="utf-8") as f:
            return [json.loads(line) for line in f if line.strip()]

    def write_jsonl(self, relative: str, records: Iterable[Dict[str, Any]]) -> Path:
        target = self._prepare(relative)
        with target.open("w", encoding="utf-8") as f:
            for record in records:
                f.write(canonical_json(record) + "\n")
        return target

    # ==================== TEXT / CSV ====================
    def write_text(self, relative: str, text: str) -> Path:
        target = self._prepare(relative)
        target.write_text(text, encoding="utf-8")
        return target

    def write_csv(
        self, relative: str, fieldnames: List[str], rows: Iterable[Dict[str, Any]]
    ) -> Path:
        target = self._prepare(relative)
        with target.open("w", encoding="utf-8", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=fieldnames)
            writer.writeheader()
            writer.writerows(rows)
        return target
