# app/main.py

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from app.api.v1.router import api_router as v1_api_router
from app.config import settings
from app.constants import PROTOCOL_VERSION
from app.utils.exception_handlers import register_exception_handlers
from app.utils.logger import logger
from app.utils.response import success_response


def create_app() -> FastAPI:
    app: FastAPI = FastAPI(title=settings.PROJECT_NAME)

    app.include_router(v1_api_router, prefix="/v1")
    register_exception_handlers(app)

    @app.get("/health")
    def health_check() -> JSONResponse:
        logger.info("Policy server is healthy")
        return JSONResponse(
            content=success_response(
                "Policy server is healthy",
                data={"protocol": PROTOCOL_VERSION, "policy": settings.SERVER_POLICY},
            ).render()
        )

    return app


# ========== FAST API APPLICATION ==========
app: FastAPI = create_app()
