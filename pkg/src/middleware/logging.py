"""Request/response logging middleware.

Every request is logged on entry and exit with its duration; the duration is
also returned to clients in ``X-Process-Time-Ms``.
"""

import logging
import time
from collections.abc import Awaitable, Callable

from fastapi import Request, Response
from starlette.middleware.base import BaseHTTPMiddleware

logger = logging.getLogger(__name__)

PROCESS_TIME_HEADER = "X-Process-Time-Ms"


class LoggingMiddleware(BaseHTTPMiddleware):
    """Logs each HTTP request with method, path, status and timing."""

    async def dispatch(
        self, request: Request, call_next: Callable[[Request], Awaitable[Response]]
    ) -> Response:
        started = time.perf_counter()
        method, path = request.method, request.url.path
        logger.info(
            f"Request started: {method} {path}",
            extra={
                "method": method,
                "path": path,
                "client_host": request.client.host if request.client else None,
            },
        )
        try:
            response = await call_next(request)
        except Exception as exc:
            elapsed_ms = round((time.perf_counter() - started) * 1000, 2)
            logger.error(
                f"Request failed: {method} {path} - {type(exc).__name__}",
                extra={"method": method, "path": path, "duration_ms": elapsed_ms},
                exc_info=True,
            )
            raise

        elapsed_ms = round((time.perf_counter() - started) * 1000, 2)
        logger.info(
            f"Request completed: {method} {path} - {response.status_code}",
            extra={
                "method": method,
                "path": path,
                "status_code": response.status_code,
                "duration_ms": elapsed_ms,
            },
        )
        response.headers[PROCESS_TIME_HEADER] = str(elapsed_ms)
        return response
