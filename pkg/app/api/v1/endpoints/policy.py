from fastapi import APIRouter, Response

from app.dependencies import PolicyServiceDep
from app.models.wire import PolicyRequest
from app.utils.fingerprint import canonical_json

router = APIRouter()


@router.post("/policy")
def policy(request: PolicyRequest, service: PolicyServiceDep) -> Response:
    answer = service.handle(request)
    return Response(
        content=canonical_json(answer.model_dump(mode="json")),
        media_type="application/json",
    )
