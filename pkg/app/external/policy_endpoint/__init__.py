# app/external/policy_endpoint/__init__.py

import json
import threading
from functools import lru_cache
from typing import Optional

import httpx
from pydantic import ValidationError

from app.config import settings
from app.constants import POLICY_PATH
from app.models.wire import PolicyRequest, PolicyResponse, PolicyRole
from app.utils.exceptions import PolicyEndpointError, PolicyProtocolError, PolicyTimeout
from app.utils.fingerprint import canonical_json
from app.utils.logger import logger


@lru_cache()
def get_policy_http_client(endpoint: str) -> httpx.Client:
    """
    One pooled HTTP client per endpoint and process.
    Cached so every episode talking to the same endpoint shares connections.
    """
    client = httpx.Client(
        base_url=endpoint.rstrip("/"),
        timeout=settings.POLICY_TIMEOUT_SECONDS,
        headers={"Content-Type": "application/json"},
    )
    logger.info(f"Created policy client for {endpoint}")
    return client


@lru_cache()
def get_endpoint_semaphore(endpoint: str) -> threading.BoundedSemaphore:
    return threading.BoundedSemaphore(settings.POLICY_MAX_IN_FLIGHT)


class RemotePolicyClient:
    def __init__(
        self,
        endpoint: str,
        client: Optional[httpx.Client] = None,
        semaphore: Optional[threading.BoundedSemaphore] = None,
    ):
        self.endpoint = endpoint
        self.client = client or get_policy_http_client(endpoint)
        self.semaphore = semaphore or get_endpoint_semaphore(endpoint)

    def call(self, role: PolicyRole, payload: PolicyRequest) -> PolicyResponse:
        if payload.role != role:
            payload = payload.model_copy(update={"role": role})
        body = canonical_json(payload.model_dump(mode="json")).encode("utf-8")

        try:
            with self.semaphore:
                response = self.client.post(POLICY_PATH, content=body)
        except httpx.TimeoutException as e:
            logger.error(f"Policy endpoint {self.endpoint} timed out ({role.value})")
            raise PolicyTimeout(
                "Policy endpoint timed out",
                details={"endpoint": self.endpoint, "role": role.value, "error": str(e)},
            )
        except httpx.HTTPError as e:
            logger.error(f"Policy endpoint {self.endpoint} unreachable: {str(e)}")
            raise PolicyEndpointError(
                "Policy endpoint request failed",
                details={"endpoint": self.endpoint, "role": role.value, "error": str(e)},
            )

        if not response.is_success:
            raise PolicyEndpointError(
                f"Policy endpoint answered {response.status_code}",
                details={
                    "endpoint": self.endpoint,
                    "status_code": response.status_code,
                    "body": response.text[:200],
                },
            )

        try:
            data = json.loads(response.content)
        except json.JSONDecodeError as e:
            raise PolicyProtocolError(
                f"Malformed JSON from policy endpoint at byte {e.pos}",
                details={"offset": e.pos, "error": e.msg},
            )
        except UnicodeDecodeError as e:
            raise PolicyProtocolError(
                f"Undecodable body from policy endpoint at byte {e.start}",
                details={"offset": e.start},
            )

        try:
            return PolicyResponse.model_validate(data)
        except ValidationError as e:
            raise PolicyProtocolError(
                "Policy response does not match the wire schema",
                details={"errors": e.errors(include_url=False, include_context=False)},
            )
