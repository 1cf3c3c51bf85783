"""Token-level embedding providers for the BERT-score style similarity.

A provider is any object with a ``provider_id`` string and an
``embed(text) -> TokenEmbeddings`` method. Three are shipped: a remote
HTTP client, a deterministic stub (the test oracle, and the engine behind
``--stub-embeddings``), and a cache wrapper that works over any of them.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
from dataclasses import dataclass

import numpy as np

from .endpoints import Endpoint, EndpointConfig
from .errors import ProtocolError
from .textnorm import normalize_attribute, tokenize

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TokenEmbeddings:
    """One vector per token, all of the same dimension."""

    tokens: tuple[str, ...]
    vectors: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.vectors, dtype=np.float64)
        if vec.ndim != 2:
            raise ValueError(f"vectors must be 2-D (tokens x dim), got shape {vec.shape}")
        if vec.shape[0] != len(self.tokens):
            raise ValueError(
                f"{len(self.tokens)} tokens but {vec.shape[0]} vectors"
            )
        object.__setattr__(self, "vectors", vec)

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])


def _stable_bucket(token: str, dim: int) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") % dim


class StubEmbeddings:
    """Deterministic embeddings with no model behind them.

    Tokens found in ``table`` get the prescribed vector; everything else gets
    a one-hot vector on a stable hash bucket, so unknown tokens are identical
    across calls and distinct tokens in distinct buckets are orthogonal.
    """

    def __init__(self, table: dict[str, list[float]] | None = None, dim: int = 8):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self.table: dict[str, np.ndarray] = {}
        for word, vec in (table or {}).items():
            arr = np.asarray(vec, dtype=np.float64)
            if arr.shape != (dim,):
                raise ValueError(
                    f"table vector for {word!r} has shape {arr.shape}, expected ({dim},)"
                )
            self.table[normalize_attribute(word)] = arr
        fingerprint = hashlib.sha256(
            json.dumps(
                {"dim": dim, "table": {k: v.tolist() for k, v in sorted(self.table.items())}},
                sort_keys=True,
            ).encode()
        ).hexdigest()[:12]
        self.provider_id = f"stub:{fingerprint}"

    def embed(self, text: str) -> TokenEmbeddings:
        tokens = tokenize(text).tokens
        rows = []
        for token in tokens:
            hit = self.table.get(token)
            if hit is not None:
                rows.append(hit)
            else:
                onehot = np.zeros(self.dim)
                onehot[_stable_bucket(token, self.dim)] = 1.0
                rows.append(onehot)
        vectors = np.stack(rows) if rows else np.zeros((0, self.dim))
        return TokenEmbeddings(tokens=tokens, vectors=vectors)


class RemoteEmbeddings:
    """Client for the embedding endpoint.

    Wire format: POST {"texts": [string]} ->
    {"model": str, "dim": int, "results": [{"tokens": [...], "vectors": [[...]]}]}.
    The dimension must stay consistent within a session.
    """

    def __init__(self, cfg: EndpointConfig, transport=None, **endpoint_kwargs):
        self.cfg = cfg
        self._endpoint = Endpoint(cfg, transport=transport, **endpoint_kwargs)
        self._dim: int | None = None
        self.provider_id = f"remote:{cfg.model or cfg.base_url}"

    def embed(self, text: str) -> TokenEmbeddings:
        if not text.strip():
            raise ValueError("cannot embed an empty string")
        body = self._endpoint.post_json({"texts": [text]}, context=f"embed({text[:40]!r})")
        try:
            dim = int(body["dim"])
            results = body["results"]
            tokens = tuple(str(t) for t in results[0]["tokens"])
            vectors = np.asarray(results[0]["vectors"], dtype=np.float64)
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise ProtocolError(
                f"malformed embedding response ({json.dumps(body)[:200]})"
            ) from exc
        if vectors.ndim != 2 or vectors.shape != (len(tokens), dim) or not tokens:
            raise ProtocolError(
                f"embedding shape mismatch: {len(tokens)} tokens, "
                f"vectors {vectors.shape}, dim {dim}"
            )
        if self._dim is None:
            self._dim = dim
        elif dim != self._dim:
            raise ProtocolError(f"dim changed mid-session: {self._dim} -> {dim}")
        return TokenEmbeddings(tokens=tokens, vectors=vectors)


class MemoryStore:
    """In-process cache store; thread-safe."""

    def __init__(self):
        self._data: dict[str, TokenEmbeddings] = {}
        self._lock = threading.Lock()

    def get(self, key: str) -> TokenEmbeddings | None:
        with self._lock:
            return self._data.get(key)

    def put(self, key: str, value: TokenEmbeddings) -> None:
        with self._lock:
            self._data[key] = value


class DiskStore:
    """One JSON file per key under a directory; atomic writes via rename.

    A corrupt entry is treated as a miss (with a warning) and overwritten:
    the cache may do extra work but never serves wrong vectors.
    """

    def __init__(self, directory: str | os.PathLike):
        self.directory = str(directory)
        os.makedirs(self.directory, exist_ok=True)

    def _path(self, key: str) -> str:
        name = hashlib.sha256(key.encode("utf-8")).hexdigest()
        return os.path.join(self.directory, name + ".json")

    def get(self, key: str) -> TokenEmbeddings | None:
        path = self._path(key)
        if not os.path.exists(path):
            return None
        try:
            with open(path, encoding="utf-8") as handle:
                payload = json.load(handle)
            return TokenEmbeddings(
                tokens=tuple(payload["tokens"]),
                vectors=np.asarray(payload["vectors"], dtype=np.float64),
            )
        except (OSError, ValueError, KeyError, TypeError) as exc:
            log.warning("cache entry %s unreadable (%s); bypassing", path, exc)
            return None

    def put(self, key: str, value: TokenEmbeddings) -> None:
        path = self._path(key)
        tmp = path + ".tmp"
        payload = {"tokens": list(value.tokens), "vectors": value.vectors.tolist()}
        with open(tmp, "w", encoding="utf-8") as handle:
            json.dump(payload, handle)
        os.replace(tmp, path)


class CachedEmbeddings:
    """Cache wrapper; keys on (inner provider id, normalized text).

    Keying on the normalized text lets attribute variants that differ only
    in case or whitespace share one entry. Observationally identical to the
    wrapped provider.
    """

    def __init__(self, inner, store=None):
        self.inner = inner
        self.store = store if store is not None else MemoryStore()
        self.provider_id = inner.provider_id
        self.misses = 0
        self.hits = 0

    def embed(self, text: str) -> TokenEmbeddings:
        key = f"{self.provider_id}\x00{normalize_attribute(text)}"
        cached = self.store.get(key)
        if cached is not None:
            self.hits += 1
            return cached
        self.misses += 1
        result = self.inner.embed(text)
        self.store.put(key, result)
        return result
