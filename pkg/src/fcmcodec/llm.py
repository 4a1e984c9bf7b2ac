"""Client for a remote text-generation service with a replayable transcript cache.

Every completion is keyed by a platform-stable fingerprint of the prompt plus
the sampling-relevant config. Responses are stored one file per entry in a
human-inspectable cache directory, so transcripts double as test fixtures and
a pipeline replayed over a complete cache is bit-reproducible.
"""

import hashlib
import json
import os
import tempfile
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import jsonschema
import requests

from .errors import ContractError, RemoteServiceError, ReplayMissError, SchemaError

DEFAULT_CREDENTIAL_ENV = "FCMCODEC_API_KEY"


@dataclass(frozen=True)
class LlmConfig:
    """Connection and sampling settings. Defaults pin deterministic sampling."""

    endpoint: str = ""
    model: str = "gemini-2.5-pro"
    temperature: float = 0.0
    top_p: float = 0.95
    max_retries: int = 2
    timeout_s: float = 120.0
    credential_env: str = DEFAULT_CREDENTIAL_ENV

    def __post_init__(self):
        if self.temperature < 0:
            raise ContractError("temperature must be >= 0")
        if not (0.0 < self.top_p <= 1.0):
            raise ContractError("top_p must lie in (0, 1]")
        if self.max_retries < 0:
            raise ContractError("max_retries must be >= 0")


@dataclass(frozen=True)
class TranscriptEntry:
    """One cached completion: fingerprint-keyed prompt and response."""

    fingerprint: str
    prompt: str
    response: str
    created_at: str


def fingerprint(prompt: str, config: LlmConfig) -> str:
    """Stable key over the prompt and the sampling-relevant config fields."""
    payload = json.dumps(
        {
            "prompt": prompt,
            "endpoint": config.endpoint,
            "model": config.model,
            "temperature": config.temperature,
            "top_p": config.top_p,
        },
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=True,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class ChatCompletionsAdapter:
    """Request/response shapes for an OpenAI-style chat-completions endpoint.

    This is the single provider seam: swap the adapter to speak another wire
    API without touching the client, cache, or pipeline code.
    """

    def build_request(self, prompt: str, config: LlmConfig, api_key: str):
        url = config.endpoint
        headers = {
            "Content-Type": "application/json",
            "Authorization": f"Bearer {api_key}",
        }
        body = {
            "model": config.model,
            "temperature": config.temperature,
            "top_p": config.top_p,
            "messages": [{"role": "user", "content": prompt}],
        }
        return url, headers, body

    def parse_response(self, data: dict) -> str:
        try:
            return data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise RemoteServiceError(f"malformed service response: {exc}") from exc


def _default_transport(url, headers, body, timeout_s):
    response = requests.post(url, headers=headers, json=body, timeout=timeout_s)
    response.raise_for_status()
    return response.json()


class TranscriptCache:
    """Append-only directory of one JSON file per completion."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, key: str):
        path = self._path(key)
        if not path.exists():
            return None
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        return TranscriptEntry(
            fingerprint=data["fingerprint"],
            prompt=data.get("prompt", ""),
            response=data["response"],
            created_at=data.get("created_at", ""),
        )

    def put(self, entry: TranscriptEntry):
        payload = json.dumps(
            {
                "fingerprint": entry.fingerprint,
                "prompt": entry.prompt,
                "response": entry.response,
                "created_at": entry.created_at,
            },
            indent=2,
        )
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(payload)
                fh.write("\n")
            os.replace(tmp, self._path(entry.fingerprint))
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)


class LlmClient:
    """Completions with caching, replay, retries, and schema-validated JSON."""

    def __init__(
        self,
        config: LlmConfig,
        cache_dir=None,
        replay_only: bool = False,
        transport=None,
        adapter=None,
    ):
        self.config = config
        self.cache = TranscriptCache(cache_dir) if cache_dir else None
        self.replay_only = bool(replay_only)
        self.transport = transport or _default_transport
        self.adapter = adapter or ChatCompletionsAdapter()
        if self.replay_only and self.cache is None:
            raise ContractError("replay-only mode needs a cache directory")

    def fingerprint(self, prompt: str) -> str:
        return fingerprint(prompt, self.config)

    def complete(self, prompt: str) -> str:
        """Cached completion; a cache hit never touches the network."""
        key = self.fingerprint(prompt)
        if self.cache is not None:
            entry = self.cache.get(key)
            if entry is not None:
                return entry.response
        if self.replay_only:
            raise ReplayMissError(
                f"no transcript for fingerprint {key} in replay-only mode"
            )
        response = self._call_service(prompt)
        if self.cache is not None:
            self.cache.put(
                TranscriptEntry(
                    fingerprint=key,
                    prompt=prompt,
                    response=response,
                    created_at=datetime.now(timezone.utc).isoformat(),
                )
            )
        return response

    def _call_service(self, prompt: str) -> str:
        if not self.config.endpoint:
            raise RemoteServiceError("no endpoint configured for live completion")
        api_key = os.environ.get(self.config.credential_env, "")
        if not api_key:
            raise RemoteServiceError(
                f"credential environment variable {self.config.credential_env!r} "
                "is not set"
            )
        url, headers, body = self.adapter.build_request(prompt, self.config, api_key)
        last_error = None
        for attempt in range(self.config.max_retries + 1):
            try:
                data = self.transport(url, headers, body, self.config.timeout_s)
                return self.adapter.parse_response(data)
            except (requests.RequestException, RemoteServiceError) as exc:
                last_error = exc
                if attempt < self.config.max_retries:
                    time.sleep(min(2.0**attempt * 0.5, 8.0))
        raise RemoteServiceError(
            f"service call failed after {self.config.max_retries + 1} attempts: "
            f"{last_error}"
        )

    def complete_structured(self, prompt: str, schema: dict):
        """JSON completion validated against ``schema``.

        One repair retry: the validation error is appended to the prompt and
        the service is asked again. A second failure raises SchemaError
        naming the offending fields.
        """
        try:
            jsonschema.Draft202012Validator.check_schema(schema)
        except jsonschema.SchemaError as exc:
            raise ContractError(f"malformed schema descriptor: {exc.message}") from exc
        response = self.complete(prompt)
        payload, error = _parse_and_validate(response, schema)
        if error is None:
            return payload
        repair_prompt = (
            f"{prompt}\n\nYour previous reply was rejected: {error}\n"
            "Reply again with only valid JSON for the requested shape."
        )
        response = self.complete(repair_prompt)
        payload, error = _parse_and_validate(response, schema)
        if error is None:
            return payload
        raise SchemaError(
            f"response failed schema validation after repair retry: {error}",
            fields=_error_fields(response, schema),
        )


def _strip_fences(text: str) -> str:
    text = text.strip()
    if text.startswith("```"):
        first_newline = text.find("\n")
        if first_newline != -1:
            text = text[first_newline + 1 :]
        if text.rstrip().endswith("```"):
            text = text.rstrip()[:-3]
    return text.strip()


def _parse_and_validate(response: str, schema: dict):
    try:
        payload = json.loads(_strip_fences(response))
    except json.JSONDecodeError as exc:
        return None, f"not valid JSON ({exc})"
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(payload), key=lambda e: e.json_path)
    if errors:
        summary = "; ".join(f"{e.json_path}: {e.message}" for e in errors[:5])
        return None, summary
    return payload, None


def _error_fields(response: str, schema: dict):
    try:
        payload = json.loads(_strip_fences(response))
    except json.JSONDecodeError:
        return ("<unparseable>",)
    validator = jsonschema.Draft202012Validator(schema)
    return tuple(e.json_path for e in validator.iter_errors(payload))
