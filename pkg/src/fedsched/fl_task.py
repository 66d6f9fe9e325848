"""Federated-learning task model: server, clients, model and per-client timing."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import UnknownClientError, ZeroBandwidthError

BITS_PER_MB = 8.0  # megabits per megabyte, 1 MB = 10**6 bytes


@dataclass(frozen=True)
class ModelSpec:
    name: str
    size_mb: float
    training_time_s: float

    def __post_init__(self):
        if not self.size_mb > 0:
            raise ValueError(f"model {self.name!r}: size_mb must be positive")
        if not self.training_time_s > 0:
            raise ValueError(f"model {self.name!r}: training_time_s must be positive")

    @property
    def size_mbit(self) -> float:
        return self.size_mb * BITS_PER_MB


_CATALOG = (
    ModelSpec("LeNet-5", 0.3, 25.0),
    ModelSpec("MobileNetV2", 13.4, 180.0),
    ModelSpec("EfficientNet-B0", 20.3, 300.0),
    ModelSpec("ResNet-18", 44.7, 480.0),
    ModelSpec("ResNet-34", 83.6, 950.0),
)


def model_catalog() -> list[ModelSpec]:
    """The five reference models, in ascending order of size."""
    return list(_CATALOG)


def lookup_model(name: str) -> ModelSpec:
    for spec in _CATALOG:
        if spec.name.lower() == name.lower():
            return spec
    raise KeyError(f"unknown model {name!r}; known: {', '.join(m.name for m in _CATALOG)}")


@dataclass(frozen=True)
class Client:
    client_id: str
    site: str  # node identifier of the client's ground site
    training_multiplier: float = 1.0

    def __post_init__(self):
        if self.training_multiplier < 0:
            raise ValueError(f"client {self.client_id!r}: training_multiplier must be >= 0")


@dataclass(frozen=True)
class FLTask:
    server: str
    clients: tuple[Client, ...]
    model: ModelSpec
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "clients", tuple(self.clients))
        if not self.clients:
            raise ValueError("task needs at least one client")
        index = {}
        for c in self.clients:
            if c.client_id in index:
                raise ValueError(f"duplicate client id {c.client_id!r}")
            if c.client_id == self.server or c.site == self.server:
                raise ValueError(f"client {c.client_id!r} coincides with the server")
            index[c.client_id] = c
        object.__setattr__(self, "_index", index)

    @property
    def client_ids(self) -> list[str]:
        return [c.client_id for c in self.clients]

    def client(self, client_id: str) -> Client:
        try:
            return self._index[client_id]
        except KeyError:
            raise UnknownClientError(client_id) from None

    def upload_size_mb(self, client_id: str) -> float:
        # uploaded update has the same size as the downloaded model
        self.client(client_id)
        return self.model.size_mb

    def download_size_mb(self, client_id: str) -> float:
        self.client(client_id)
        return self.model.size_mb


def transmission_time(size_mb: float, bottleneck_mbps: float) -> float:
    """Seconds to push ``size_mb`` megabytes through a path of ``bottleneck_mbps``."""
    if not bottleneck_mbps > 0:
        raise ZeroBandwidthError(f"bottleneck bandwidth must be positive, got {bottleneck_mbps}")
    if size_mb < 0:
        raise ValueError("size_mb must be non-negative")
    return size_mb * BITS_PER_MB / bottleneck_mbps


def training_time(task: FLTask, client_id: str) -> float:
    return task.model.training_time_s * task.client(client_id).training_multiplier


def with_training_jitter(task: FLTask, jitter: float, seed: int) -> FLTask:
    """Copy of ``task`` with each multiplier scaled by an independent U[1 - jitter, 1 + jitter] factor.

    Draws come from a generator seeded by ``seed`` in client order, so the
    result is reproducible. ``jitter = 0`` returns an equal task.
    """
    if not 0.0 <= jitter < 1.0:
        raise ValueError("jitter must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    factors = rng.uniform(1.0 - jitter, 1.0 + jitter, size=len(task.clients))
    clients = [replace(c, training_multiplier=c.training_multiplier * float(f))
               for c, f in zip(task.clients, factors)]
    return FLTask(task.server, clients, task.model)
