"""Chat and embedding backends.

Real services are reached through an OpenAI-compatible HTTP API; every
response is cached on disk, keyed by content, so warm reruns are offline
and byte-identical.  Offline doubles (transcripts, hash embeddings) share
the same interfaces.
"""
from __future__ import annotations

import hashlib
import json
import os
import random
import re
import tempfile
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Protocol, Sequence, TypeVar, Union

import httpx
import numpy as np

Message = Mapping[str, str]
T = TypeVar("T")
R = TypeVar("R")


class BackendError(RuntimeError):
    """A request failed after all retries, or the service answered with an
    unusable payload."""


class AuthError(BackendError):
    pass


class ConfigError(ValueError):
    pass


class CacheCorruption(RuntimeError):
    pass


class DimensionMismatch(BackendError):
    pass


@dataclass(frozen=True)
class BackendConfig:
    base_url: str = "https://api.openai.com/v1"
    api_key_env: str = "OPENAI_API_KEY"
    chat_model: str = "gpt-4"
    embed_model: str = "text-embedding-3-small"
    temperature: float = 0.0
    max_tokens: int = 1024
    timeout: float = 60.0
    max_retries: int = 3
    backoff_base: float = 1.0
    backoff_ceiling: float = 60.0
    cache_dir: Optional[str] = None
    max_concurrency: int = 4

    def __post_init__(self):
        if not 0 <= self.temperature <= 2:
            raise ConfigError(f"temperature must lie in [0, 2], got {self.temperature}")
        if self.max_retries < 0:
            raise ConfigError("max_retries must be >= 0")
        if self.max_concurrency < 1:
            raise ConfigError("max_concurrency must be >= 1")
        if self.max_tokens < 1:
            raise ConfigError("max_tokens must be >= 1")

    @classmethod
    def from_mapping(cls, values: Mapping[str, object]) -> "BackendConfig":
        """Build from string-valued settings, ignoring unknown keys."""
        kw = {}
        for f in fields(cls):
            if f.name in values and values[f.name] is not None:
                v = values[f.name]
                if f.type in ("float",):
                    v = float(v)
                elif f.type in ("int",):
                    v = int(v)
                kw[f.name] = v
        return cls(**kw)

    def snapshot(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ChatExchange:
    messages: tuple[tuple[str, str], ...]
    response: str
    model: str
    temperature: float
    sample_index: int = 0
    cache_hit: bool = False


# --------------------------------------------------------------------------
# cache


def _safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", name) or "model"


def _digest(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True, ensure_ascii=False).encode("utf-8")).hexdigest()


def chat_key(model: str, messages: Sequence[Message], temperature: float, sample_index: int) -> str:
    msgs = [[m["role"], m["content"]] for m in messages]
    return _digest({"model": model, "messages": _digest(msgs), "temperature": float(temperature), "sample_index": int(sample_index)})


def embed_key(model: str, text: str) -> str:
    return _digest({"model": model, "text": hashlib.sha256(text.encode("utf-8")).hexdigest()})


class ResponseCache:
    """Content-addressed JSON-lines cache, one file per (kind, model).

    Writes rewrite the whole file through a temporary file and an atomic
    rename, so readers never see a torn file."""

    def __init__(self, directory: Union[str, Path]):
        self.dir = Path(directory)
        self._data: dict[Path, dict[str, object]] = {}
        self._lock = threading.Lock()

    def _path(self, kind: str, model: str) -> Path:
        return self.dir / f"{_safe(model)}.{kind}.jsonl"

    def _load(self, path: Path) -> dict[str, object]:
        if path in self._data:
            return self._data[path]
        table: dict[str, object] = {}
        if path.exists():
            with open(path, encoding="utf-8") as fh:
                for n, line in enumerate(fh, start=1):
                    if not line.strip():
                        continue
                    try:
                        row = json.loads(line)
                        table[row["key"]] = row["value"]
                    except (ValueError, KeyError, TypeError):
                        raise CacheCorruption(f"{path}:{n}: unreadable cache line") from None
        self._data[path] = table
        return table

    def get(self, kind: str, model: str, key: str):
        with self._lock:
            return self._load(self._path(kind, model)).get(key)

    def put(self, kind: str, model: str, key: str, value) -> None:
        with self._lock:
            path = self._path(kind, model)
            table = self._load(path)
            table[key] = value
            self.dir.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=self.dir, prefix=path.name, suffix=".tmp")
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                for k in sorted(table):
                    fh.write(json.dumps({"key": k, "value": table[k]}, sort_keys=True) + "\n")
            os.replace(tmp, path)


# --------------------------------------------------------------------------
# backend protocols


class ChatBackend(Protocol):
    model: str

    def complete(self, messages: Sequence[Message], temperature: float, sample_index: int) -> str: ...


class EmbeddingBackend(Protocol):
    model: str

    def embed(self, texts: Sequence[str]) -> list[list[float]]: ...


def prompt_sha256(messages: Union[str, Sequence[Message]]) -> str:
    """Hash identifying a prompt in mock transcripts: the message contents
    joined by blank lines (just the text for a single user message)."""
    if isinstance(messages, str):
        text = messages
    else:
        text = "\n\n".join(m["content"] for m in messages)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# --------------------------------------------------------------------------
# HTTP


class _Http:
    def __init__(self, config: BackendConfig, transport: Optional[httpx.BaseTransport] = None, sleep: Callable[[float], None] = time.sleep):
        key = os.environ.get(config.api_key_env)
        if not key:
            raise AuthError(f"environment variable {config.api_key_env} is not set")
        self.config = config
        self._sleep = sleep
        self._client = httpx.Client(
            base_url=config.base_url.rstrip("/"),
            timeout=config.timeout,
            transport=transport,
            headers={"Authorization": f"Bearer {key}"},
        )

    def post(self, path: str, body: dict) -> dict:
        cfg = self.config
        waited = 0.0
        last = "no attempt made"
        for attempt in range(cfg.max_retries + 1):
            try:
                r = self._client.post(path, json=body)
            except httpx.HTTPError as exc:
                last = f"{type(exc).__name__}: {exc}"
            else:
                if r.status_code in (401, 403):
                    raise AuthError(f"service refused credentials ({r.status_code})")
                if r.status_code == 429 or r.status_code >= 500:
                    last = f"HTTP {r.status_code}"
                elif r.status_code >= 400:
                    raise BackendError(f"HTTP {r.status_code}: {r.text[:200]}")
                else:
                    try:
                        return r.json()
                    except ValueError:
                        raise BackendError("response is not JSON") from None
            if attempt == cfg.max_retries:
                break
            delay = min(cfg.backoff_base * 2**attempt, cfg.backoff_ceiling - waited)
            if delay <= 0:
                break
            self._sleep(delay)
            waited += delay
        raise BackendError(f"request to {path} failed after {cfg.max_retries + 1} attempt(s): {last}")

    def close(self) -> None:
        self._client.close()


class OpenAIChat:
    """Chat completions over an OpenAI-compatible endpoint."""

    def __init__(self, config: BackendConfig, transport: Optional[httpx.BaseTransport] = None, sleep=time.sleep):
        self.model = config.chat_model
        self._http = _Http(config, transport, sleep)
        self._max_tokens = config.max_tokens

    def complete(self, messages: Sequence[Message], temperature: float, sample_index: int) -> str:
        body = {
            "model": self.model,
            "messages": [{"role": m["role"], "content": m["content"]} for m in messages],
            "temperature": temperature,
            "max_tokens": self._max_tokens,
        }
        data = self._http.post("/chat/completions", body)
        try:
            return data["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError):
            raise BackendError("malformed chat completion payload") from None


class OpenAIEmbedder:
    """Embeddings over an OpenAI-compatible endpoint."""

    def __init__(self, config: BackendConfig, transport: Optional[httpx.BaseTransport] = None, sleep=time.sleep):
        self.model = config.embed_model
        self._http = _Http(config, transport, sleep)

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        data = self._http.post("/embeddings", {"model": self.model, "input": list(texts)})
        try:
            rows = sorted(data["data"], key=lambda d: d["index"])
            out = [list(map(float, d["embedding"])) for d in rows]
        except (KeyError, TypeError, ValueError):
            raise BackendError("malformed embedding payload") from None
        if len(out) != len(texts):
            raise BackendError(f"asked for {len(texts)} embeddings, got {len(out)}")
        return out


# --------------------------------------------------------------------------
# offline doubles


class TranscriptChat:
    """Replays responses keyed by :func:`prompt_sha256`."""

    def __init__(self, transcript: Mapping[str, str], default: Optional[str] = None, model: str = "transcript"):
        self.transcript = dict(transcript)
        self.default = default
        self.model = model

    @classmethod
    def load(cls, path: Union[str, Path], **kw) -> "TranscriptChat":
        table = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    row = json.loads(line)
                    table[row["prompt_sha256"]] = row["response"]
        return cls(table, **kw)

    def complete(self, messages, temperature, sample_index) -> str:
        h = prompt_sha256(messages)
        if h in self.transcript:
            return self.transcript[h]
        if self.default is not None:
            return self.default
        raise BackendError(f"no scripted response for prompt {h[:12]}")


class CallableChat:
    """Wraps ``fn(prompt_text, sample_index) -> str`` as a chat backend."""

    def __init__(self, fn: Callable[[str, int], str], model: str = "callable"):
        self.fn = fn
        self.model = model

    def complete(self, messages, temperature, sample_index) -> str:
        return self.fn("\n\n".join(m["content"] for m in messages), sample_index)


class HashEmbedder:
    """Deterministic pseudo-embeddings seeded by the text's hash: equal
    texts give equal unit vectors, distinct texts near-orthogonal ones."""

    def __init__(self, dim: int = 256, model: str = "hash-embedder"):
        self.dim = dim
        self.model = f"{model}-{dim}"

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        out = []
        for t in texts:
            seed = int.from_bytes(hashlib.sha256(t.encode("utf-8")).digest()[:8], "little")
            v = np.random.default_rng(seed).standard_normal(self.dim)
            out.append((v / np.linalg.norm(v)).tolist())
        return out


class TableEmbedder:
    """Fixed text-to-vector table, for hand-built retrieval fixtures."""

    def __init__(self, table: Mapping[str, Sequence[float]], model: str = "table"):
        self.table = {k: list(map(float, v)) for k, v in table.items()}
        self.model = model

    def embed(self, texts):
        try:
            return [self.table[t] for t in texts]
        except KeyError as exc:
            raise BackendError(f"no vector for text {exc}") from None


# --------------------------------------------------------------------------
# clients


def map_ordered(fn: Callable[[T], R], items: Sequence[T], max_concurrency: int = 4) -> list[R]:
    """``[fn(x) for x in items]`` with bounded parallelism, input order kept."""
    if max_concurrency <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=max_concurrency) as pool:
        return list(pool.map(fn, items))


class ChatClient:
    """Cached front end over a :class:`ChatBackend`."""

    def __init__(self, backend: ChatBackend, cache: Optional[ResponseCache] = None, temperature: float = 0.0, max_concurrency: int = 4):
        self.backend = backend
        self.cache = cache
        self.temperature = temperature
        self.max_concurrency = max_concurrency

    @property
    def model(self) -> str:
        return self.backend.model

    def exchange(self, messages: Sequence[Message], sample_index: int = 0, temperature: Optional[float] = None) -> ChatExchange:
        if sample_index < 0:
            raise ValueError("sample_index must be >= 0")
        temp = self.temperature if temperature is None else temperature
        msgs = tuple((m["role"], m["content"]) for m in messages)
        key = chat_key(self.model, messages, temp, sample_index)
        if self.cache is not None:
            hit = self.cache.get("chat", self.model, key)
            if hit is not None:
                return ChatExchange(msgs, str(hit), self.model, temp, sample_index, True)
        text = self.backend.complete(messages, temp, sample_index)
        if self.cache is not None:
            self.cache.put("chat", self.model, key, text)
        return ChatExchange(msgs, text, self.model, temp, sample_index, False)

    def chat(self, messages: Union[str, Sequence[Message]], sample_index: int = 0, temperature: Optional[float] = None) -> str:
        if isinstance(messages, str):
            messages = [{"role": "user", "content": messages}]
        return self.exchange(messages, sample_index, temperature).response


class EmbeddingClient:
    """Cached, order-preserving batch embedding."""

    def __init__(self, backend: EmbeddingBackend, cache: Optional[ResponseCache] = None, batch_size: int = 64):
        self.backend = backend
        self.cache = cache
        self.batch_size = batch_size
        self.dim: Optional[int] = None

    @property
    def model(self) -> str:
        return self.backend.model

    def _check(self, v: Sequence[float]) -> None:
        if self.dim is None:
            self.dim = len(v)
        elif len(v) != self.dim:
            raise DimensionMismatch(f"expected dimension {self.dim}, got {len(v)}")

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            raise ValueError("texts must be non-empty")
        out: list[Optional[list[float]]] = [None] * len(texts)
        todo: dict[str, list[int]] = {}
        for i, t in enumerate(texts):
            hit = self.cache.get("embed", self.model, embed_key(self.model, t)) if self.cache else None
            if hit is not None:
                out[i] = hit
            else:
                todo.setdefault(t, []).append(i)
        pending = list(todo)
        for s in range(0, len(pending), self.batch_size):
            chunk = pending[s : s + self.batch_size]
            vecs = self.backend.embed(chunk)
            for t, v in zip(chunk, vecs):
                if self.cache is not None:
                    self.cache.put("embed", self.model, embed_key(self.model, t), v)
                for i in todo[t]:
                    out[i] = v
        for v in out:
            self._check(v)
        return np.asarray(out, dtype=float)


def chat(config: BackendConfig, messages: Sequence[Message], sample_index: int = 0, transport=None) -> str:
    """One cached chat call against the configured HTTP service."""
    cache = ResponseCache(config.cache_dir) if config.cache_dir else None
    client = ChatClient(_LazyChat(config, transport), cache, config.temperature)
    return client.chat(messages, sample_index)


def embed_batch(config: BackendConfig, texts: Sequence[str], transport=None) -> np.ndarray:
    """Cached embeddings from the configured HTTP service."""
    cache = ResponseCache(config.cache_dir) if config.cache_dir else None
    return EmbeddingClient(_LazyEmbed(config, transport), cache).embed_batch(texts)


class _LazyChat:
    """Defers building the HTTP client (and the key lookup) until a cache
    miss actually needs the network."""

    def __init__(self, config: BackendConfig, transport=None):
        self.model = config.chat_model
        self._config, self._transport, self._inner = config, transport, None

    def complete(self, messages, temperature, sample_index):
        if self._inner is None:
            self._inner = OpenAIChat(self._config, self._transport)
        return self._inner.complete(messages, temperature, sample_index)


class _LazyEmbed:
    def __init__(self, config: BackendConfig, transport=None):
        self.model = config.embed_model
        self._config, self._transport, self._inner = config, transport, None

    def embed(self, texts):
        if self._inner is None:
            self._inner = OpenAIEmbedder(self._config, self._transport)
        return self._inner.embed(texts)


def http_chat_backend(config: BackendConfig, transport=None) -> ChatBackend:
    return _LazyChat(config, transport)


def http_embed_backend(config: BackendConfig, transport=None) -> EmbeddingBackend:
    return _LazyEmbed(config, transport)
