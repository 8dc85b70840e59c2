"""HTTP plumbing shared by the embedding and completion clients.

One JSON POST with bounded retries: after the first failure the call is
retried ``retries`` times with exponentially growing pauses.  All failure
modes end in :class:`EndpointError` (or its :class:`Timeout` subclass when
the last attempt timed out).
"""

from __future__ import annotations

import time

import requests

from .errors import EndpointError, Timeout

DEFAULT_TIMEOUT = 30.0
DEFAULT_RETRIES = 2
DEFAULT_BACKOFF = 0.5


def post_json(
    url: str,
    payload: dict,
    timeout: float = DEFAULT_TIMEOUT,
    retries: int = DEFAULT_RETRIES,
    backoff: float = DEFAULT_BACKOFF,
) -> dict:
    """POST ``payload`` as JSON and return the decoded JSON response."""
    delay = backoff
    failure: EndpointError | None = None
    for attempt in range(retries + 1):
        try:
            response = requests.post(url, json=payload, timeout=timeout)
            response.raise_for_status()
            body = response.json()
            if not isinstance(body, dict):
                raise EndpointError(f"{url}: expected a JSON object response")
            return body
        except requests.Timeout as exc:
            failure = Timeout(f"{url}: no answer within {timeout}s")
            failure.__cause__ = exc
        except (requests.RequestException, ValueError) as exc:
            failure = EndpointError(f"{url}: {exc}")
            failure.__cause__ = exc
        if attempt < retries:
            time.sleep(delay)
            delay *= 2
    assert failure is not None
    raise failure
