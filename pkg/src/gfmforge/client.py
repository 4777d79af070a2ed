"""Chat-completions client that turns a corpus split into a predictions file."""

from __future__ import annotations

import json
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Mapping, Sequence

import httpx

from gfmforge.textualize.lang import InstructionSample

RETRYABLE_STATUS = {408, 409, 425, 429, 500, 502, 503, 504}


class ClientError(Exception):
    pass


class AuthError(ClientError):
    pass


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str
    model: str
    api_key_env: str | None = None
    max_concurrent: int = 4
    timeout: float = 60.0
    max_attempts: int = 3
    backoff_base: float = 0.5
    temperature: float = 0.0
    max_tokens: int = 512

    def __post_init__(self) -> None:
        if self.max_concurrent < 1:
            raise ValueError("max_concurrent must be >= 1")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_attempts < 1:
            raise ValueError("retry.max_attempts must be >= 1")
        if self.timeout <= 0 or self.backoff_base < 0:
            raise ValueError("timeout must be > 0 and retry.backoff_base >= 0")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "EndpointConfig":
        data = dict(data)
        if "api_key" in data:
            raise ValueError("put the key in an environment variable and name it in 'api_key_env'")
        retry = data.pop("retry", {}) or {}
        sampling = data.pop("sampling", {}) or {}
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"endpoint config: unknown keys {sorted(unknown)}")
        for key in ("base_url", "model"):
            if key not in data:
                raise ValueError(f"endpoint config: missing {key!r}")
        return cls(**data, **retry, **sampling)

    @classmethod
    def load(cls, path: str | Path) -> "EndpointConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text("utf-8")))
        except (OSError, json.JSONDecodeError, TypeError) as exc:
            raise ValueError(f"{path}: {exc}") from None

    def api_key(self) -> str | None:
        if not self.api_key_env:
            return None
        key = os.environ.get(self.api_key_env)
        if not key:
            raise AuthError(f"environment variable {self.api_key_env} is not set")
        return key

    def decoding(self) -> dict[str, Any]:
        return {"model": self.model, "temperature": self.temperature, "max_tokens": self.max_tokens}


def request_payload(sample: InstructionSample, cfg: EndpointConfig) -> dict[str, Any]:
    return {
        "model": cfg.model,
        "messages": [{"role": "user", "content": sample.input}],
        "temperature": cfg.temperature,
        "max_tokens": cfg.max_tokens,
    }


@dataclass
class InferenceResult:
    requested: int
    succeeded: int
    failed: int
    skipped: int


class _Log:
    def __init__(self, path: Path | None):
        self._fh = open(path, "a", encoding="utf-8") if path else None
        self._lock = threading.Lock()

    def write(self, record: dict[str, Any]) -> None:
        if self._fh is None:
            return
        record = {"time": datetime.now(timezone.utc).isoformat(), **record}
        with self._lock:
            self._fh.write(json.dumps(record, ensure_ascii=False) + "\n")
            self._fh.flush()

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()


def _read_existing(path: Path) -> dict[str, dict[str, Any]]:
    done: dict[str, dict[str, Any]] = {}
    if not path.exists():
        return done
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                continue  # torn write from an interrupted run
            if "id" in rec:
                done[rec["id"]] = rec
    return done


def _ask(client: httpx.Client, sample: InstructionSample, cfg: EndpointConfig, headers: dict, log: _Log,
         abort: threading.Event) -> dict[str, Any]:
    payload = request_payload(sample, cfg)
    error = "not attempted"
    for attempt in range(1, cfg.max_attempts + 1):
        if abort.is_set():
            return {"id": sample.id, "prediction": None, "error": "aborted"}
        try:
            resp = client.post("/chat/completions", json=payload, headers=headers)
        except httpx.HTTPError as exc:
            error = f"{type(exc).__name__}: {exc}"
            log.write({"id": sample.id, "attempt": attempt, "request": payload, "error": error})
        else:
            body = resp.text
            log.write({"id": sample.id, "attempt": attempt, "request": payload,
                       "status": resp.status_code, "response": body})
            if resp.status_code in (401, 403):
                abort.set()
                raise AuthError(f"endpoint rejected credentials (HTTP {resp.status_code})")
            if resp.status_code == 200:
                try:
                    content = resp.json()["choices"][0]["message"]["content"]
                except (ValueError, KeyError, IndexError, TypeError):
                    error = "malformed response body"
                else:
                    return {"id": sample.id, "prediction": content}
            else:
                error = f"HTTP {resp.status_code}"
                if resp.status_code not in RETRYABLE_STATUS:
                    break
        if attempt < cfg.max_attempts:
            time.sleep(cfg.backoff_base * 2 ** (attempt - 1))
    return {"id": sample.id, "prediction": None, "error": error}


def run_inference(
    samples: Sequence[InstructionSample],
    cfg: EndpointConfig,
    out_path: str | Path,
    log_path: str | Path | None = None,
    split: str = "",
    transport: httpx.BaseTransport | None = None,
) -> InferenceResult:
    """Query the endpoint for every sample not already answered in ``out_path``.

    Completed records are appended as they arrive so an interrupted run can
    resume; the file is then rewritten in corpus order under a header line
    recording the decoding settings. Failed samples keep an ``error`` field
    and are retried on the next run.
    """
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    existing = _read_existing(out)
    ids = [s.id for s in samples]
    if len(set(ids)) != len(ids):
        raise ClientError("sample ids are not unique")
    answered = {i for i, r in existing.items() if r.get("error") is None and r.get("prediction") is not None}
    pending = [s for s in samples if s.id not in answered]
    headers = {"Content-Type": "application/json"}
    key = cfg.api_key() if pending else None
    if key:
        headers["Authorization"] = f"Bearer {key}"
    log = _Log(Path(log_path) if log_path else out.with_name(out.name + ".log"))
    results = dict(existing)
    lock = threading.Lock()
    abort = threading.Event()
    auth_error: AuthError | None = None
    limits = httpx.Limits(max_connections=cfg.max_concurrent, max_keepalive_connections=cfg.max_concurrent)
    try:
        with httpx.Client(base_url=cfg.base_url.rstrip("/"), timeout=cfg.timeout, limits=limits,
                          transport=transport) as client, \
                open(out, "a", encoding="utf-8") as partial, \
                ThreadPoolExecutor(max_workers=cfg.max_concurrent) as pool:
            futures = [pool.submit(_ask, client, s, cfg, headers, log, abort) for s in pending]
            for fut in as_completed(futures):
                try:
                    rec = fut.result()
                except AuthError as exc:
                    auth_error = auth_error or exc
                    continue
                if rec.get("error") == "aborted":
                    continue
                with lock:
                    results[rec["id"]] = rec
                    partial.write(json.dumps(rec, ensure_ascii=False) + "\n")
                    partial.flush()
    finally:
        log.close()
    _rewrite(out, samples, results, cfg, split)
    if auth_error is not None:
        raise auth_error
    new = [results[s.id] for s in pending if s.id in results]
    failed = sum(1 for r in new if r.get("error"))
    return InferenceResult(len(pending), len(new) - failed, failed, len(samples) - len(pending))


def _rewrite(out: Path, samples: Sequence[InstructionSample], results: Mapping[str, dict], cfg: EndpointConfig,
             split: str) -> None:
    tmp = out.with_name(out.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        if samples:
            header = {"header": {"split": split, **cfg.decoding(), "endpoint": cfg.base_url}}
            fh.write(json.dumps(header) + "\n")
        for s in samples:
            if s.id in results:
                fh.write(json.dumps(results[s.id], ensure_ascii=False) + "\n")
    os.replace(tmp, out)
