from app.database.repositories.trajectory_repository import TrajectoryRepository
from app.database.repositories.world_repository import WorldRepository

__all__ = ["TrajectoryRepository", "WorldRepository"]
