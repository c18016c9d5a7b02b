"""Chat-completion backend over HTTP."""

from __future__ import annotations

import os
import time

import httpx

from ..errors import BackendUnavailable, ConfigError
from .base import DecisionRequest, Reasoner

ENV_URL = "SAIL_REASONER_URL"
ENV_KEY = "SAIL_REASONER_API_KEY"
ENV_MODEL = "SAIL_REASONER_MODEL"

RETRYABLE_STATUS = {408, 409, 425, 429, 500, 502, 503, 504}


def split_prompt(prompt: str) -> tuple[str, str]:
    """The preamble paragraph becomes the system message, the rest the user message."""
    head, sep, tail = prompt.partition("\n\n")
    return (head, tail) if sep else ("", prompt)


class RemoteReasoner(Reasoner):
    name = "remote"

    def __init__(self, base_url: str | None = None, model: str | None = None,
                 api_key: str | None = None, *, timeout: float = 60.0, attempts: int = 3,
                 backoff: float = 0.5, client: httpx.Client | None = None):
        super().__init__()
        self.base_url = (base_url or os.environ.get(ENV_URL) or "").rstrip("/")
        self.model = model or os.environ.get(ENV_MODEL) or "default"
        self.api_key = api_key if api_key is not None else os.environ.get(ENV_KEY)
        if not self.base_url:
            raise ConfigError(f"remote reasoner needs a base URL (flag or {ENV_URL})")
        if attempts < 1:
            raise ConfigError("attempts must be at least 1")
        self.attempts = attempts
        self.backoff = backoff
        self._client = client or httpx.Client(timeout=timeout)

    def close(self) -> None:
        self._client.close()

    def body(self, prompt: str) -> dict:
        system, user = split_prompt(prompt)
        messages = [{"role": "system", "content": system}] if system else []
        messages.append({"role": "user", "content": user})
        return {"model": self.model, "temperature": 0, "messages": messages}

    def _post(self, body: dict) -> dict:
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        url = f"{self.base_url}/v1/chat/completions"
        problem = "no attempt made"
        for attempt in range(self.attempts):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                resp = self._client.post(url, json=body, headers=headers)
            except httpx.HTTPError as exc:
                problem = f"{type(exc).__name__}: {exc}"
                continue
            if resp.status_code in RETRYABLE_STATUS:
                problem = f"HTTP {resp.status_code}"
                continue
            if resp.status_code != 200:
                raise BackendUnavailable(f"HTTP {resp.status_code} from {url}: {resp.text[:200]}")
            try:
                return resp.json()
            except ValueError:
                problem = "response is not JSON"
        raise BackendUnavailable(f"{url} failed after {self.attempts} attempt(s): {problem}")

    def _complete(self, request: DecisionRequest, prompt: str) -> tuple[str, dict | None]:
        payload = self._post(self.body(prompt))
        try:
            content = payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise BackendUnavailable("response lacks choices[0].message.content") from None
        usage = payload.get("usage")
        tokens = None
        if isinstance(usage, dict):
            tokens = {k: usage[k] for k in ("prompt_tokens", "completion_tokens", "total_tokens")
                      if k in usage}
        return str(content), tokens
