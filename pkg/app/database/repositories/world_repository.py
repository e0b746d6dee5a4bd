from pathlib import Path
from typing import List, Tuple

from app.database.local.filesystem import LocalFileStore
from app.models.suite import ManifestEntry, WorldManifest
from app.models.world import WorldSpec
from app.utils.decorators import storage_error_handler
from app.utils.exceptions import NotFoundError

MANIFEST_NAME = "manifest.json"


class WorldRepository:
    """World files are content-addressed: `<digest>.json` next to a manifest."""

    def __init__(self, store: LocalFileStore):
        self.store = store

    @classmethod
    def at(cls, directory: Path) -> "WorldRepository":
        return cls(LocalFileStore(directory))

    @staticmethod
    def file_name(digest: str) -> str:
        return f"{digest}.json"

    @storage_error_handler
    def save_world(self, world: WorldSpec) -> str:
        name = self.file_name(world.digest)
        self.store.write_json(name, world.model_dump(mode="json", exclude_none=True))
        return name

    @storage_error_handler
    def load_world(self, digest: str) -> WorldSpec:
        name = self.file_name(digest)
        if not self.store.exists(name):
            raise NotFoundError("World not found", details={"digest": digest})
        return WorldSpec.model_validate(self.store.read_json(name))

    @storage_error_handler
    def save_manifest(self, manifest: WorldManifest) -> Path:
        return self.store.write_json(MANIFEST_NAME, manifest.model_dump(mode="json"))

    @storage_error_handler
    def load_manifest(self, name: str = MANIFEST_NAME) -> WorldManifest:
        return WorldManifest.model_validate(self.store.read_json(name))

    def load_suite(self, name: str = MANIFEST_NAME) -> List[Tuple[ManifestEntry, WorldSpec]]:
        manifest = self.load_manifest(name)
        return [(entry, self.load_world(entry.digest)) for entry in manifest.entries]
