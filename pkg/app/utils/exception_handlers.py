# app/utils/exception_handlers.py

from typing import Any, Dict

from fastapi import Request
from fastapi.exceptions import HTTPException, RequestValidationError
from fastapi.responses import JSONResponse

from app.utils.exceptions import SimError
from app.utils.logger import logger
from app.utils.response import error_response


def _reply(status_code: int, message: str, error_code: str, details: Dict[str, Any]):
    body = error_response(message, error_code, details)
    return JSONResponse(status_code=status_code, content=body.render())


async def validation_exception_handler(request: Request, exc: RequestValidationError):
    logger.error(f"Rejected request to {request.url.path}: {len(exc.errors())} invalid field(s)")
    errors = [
        {"loc": list(error.get("loc", ())), "msg": error.get("msg"), "type": error.get("type")}
        for error in exc.errors()
    ]
    return _reply(422, "Validation error", "VALIDATION_ERROR", {"errors": errors})


async def http_exception_handler(request: Request, exc: HTTPException):
    logger.error(f"HTTP {exc.status_code} on {request.url.path}: {exc.detail}")
    return _reply(exc.status_code, str(exc.detail), f"HTTP_{exc.status_code}", {})


async def sim_exception_handler(request: Request, exc: SimError):
    logger.error(f"{exc.__class__.__name__} on {request.url.path}: {exc}")
    return _reply(exc.status_code, exc.message, exc.error_code or "SIM_ERROR", exc.details)


async def global_exception_handler(request: Request, exc: Exception):
    logger.error(f"Unhandled {exc.__class__.__name__} on {request.url.path}: {exc}")
    return _reply(
        500, "An unexpected error occurred", "INTERNAL_SERVER_ERROR", {"type": exc.__class__.__name__}
    )


def register_exception_handlers(app):
    app.add_exception_handler(RequestValidationError, validation_exception_handler)
    app.add_exception_handler(HTTPException, http_exception_handler)
    app.add_exception_handler(SimError, sim_exception_handler)
    app.add_exception_handler(Exception, global_exception_handler)
