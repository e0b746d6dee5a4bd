# app/utils/fingerprint.py

import hashlib
import json
from typing import Any, Mapping, Union

from pydantic import ValidationError

from app.models.observation import Observation
from app.utils.exceptions import FingerprintError


def canonical_json(data: Any) -> str:
    """Key-sorted, whitespace-free JSON; the only serialization we ever hash."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def digest(data: Any) -> str:
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()


def fingerprint(observation: Union[Observation, Mapping[str, Any], str, bytes]) -> str:
    """Digest of an observation's canonical serialization.

    Accepts a parsed Observation, its dict form, or serialized JSON; any
    input that does not validate as an Observation raises FingerprintError.
    """
    try:
        if isinstance(observation, Observation):
            parsed = observation
        elif isinstance(observation, (str, bytes)):
            parsed = Observation.model_validate_json(observation)
        elif isinstance(observation, Mapping):
            parsed = Observation.model_validate(observation)
        else:
            raise FingerprintError(
                "Unsupported observation type",
                details={"type": type(observation).__name__},
            )
    except ValidationError as e:
        raise FingerprintError(
            "Malformed observation", details={"errors": e.errors(include_url=False)}
        )

    return digest(parsed.canonical())
