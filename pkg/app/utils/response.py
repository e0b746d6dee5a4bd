# app/utils/response.py

from typing import Any, Dict, Optional

from pydantic import BaseModel, Field


class ErrorBody(BaseModel):
    error_code: str
    details: Dict[str, Any] = Field(default_factory=dict)


class Envelope(BaseModel):
    """Wrapper for every non-protocol response of the policy server."""

    status: bool
    message: Optional[str] = None
    data: Optional[Any] = None

    def render(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


def success_response(message: str = "Success", data: Optional[Any] = None) -> Envelope:
    return Envelope(status=True, message=message, data=data)


def error_response(
    message: str, error_code: str, details: Optional[Dict[str, Any]] = None
) -> Envelope:
    body = ErrorBody(error_code=error_code, details=details or {})
    return Envelope(status=False, message=message, data=body.model_dump(mode="json"))
