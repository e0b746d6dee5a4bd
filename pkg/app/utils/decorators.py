# app/utils/decorators.py

from functools import wraps
from typing import Any, Callable, TypeVar

from app.utils.exceptions import SimError, EpisodePolicyError, StorageError
from app.utils.logger import logger

T = TypeVar("T")


def policy_error_handler(role: str) -> Callable[[Callable[..., T]], Callable[..., T]]:
    """Turn any failure raised inside a policy call into EpisodePolicyError."""

    def decorator(func: Callable[..., T]) -> Callable[..., T]:
        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> T:
            try:
                return func(*args, **kwargs)
            except EpisodePolicyError:
                raise
            except SimError as e:
                logger.error(f"{role} policy failed in {func.__name__}: {e}")
                raise EpisodePolicyError(
                    f"{role} policy call failed",
                    details={"error_code": e.error_code, "error": e.message, **e.details},
                )
            except Exception as e:
                logger.error(f"{role} policy crashed in {func.__name__}: {str(e)}")
                raise EpisodePolicyError(
                    f"{role} policy call failed",
                    details={"error": str(e), "type": e.__class__.__name__},
                )

        return wrapper

    return decorator


def storage_error_handler(func: Callable[..., T]) -> Callable[..., T]:
    @wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> T:
        try:
            return func(*args, **kwargs)
        except SimError:
            raise
        except Exception as e:
            logger.error(f"Error in {func.__name__}: {str(e)}")
            raise StorageError(
                f"Storage operation failed in {func.__name__}",
                details={"error": str(e)},
            )

    return wrapper
