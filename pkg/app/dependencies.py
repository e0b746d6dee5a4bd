from typing import Annotated

from fastapi import Depends

from app.config import settings
from app.database.repositories import WorldRepository
from app.services.policy_service import PolicyService


def get_world_repository() -> WorldRepository:
    return WorldRepository.at(settings.WORLD_DIR)


def get_policy_service(
    worlds: WorldRepository = Depends(get_world_repository),
) -> PolicyService:
    return PolicyService(worlds)


# Dependency types for use in route handlers
PolicyServiceDep = Annotated[PolicyService, Depends(get_policy_service)]
