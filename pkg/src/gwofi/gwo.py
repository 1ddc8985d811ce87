"""Grey Wolf Optimizer over mixed binary + continuous search spaces.

Continuous coordinates follow the usual encircling update around the three
best-so-far wolves (alpha, beta, delta) with the exploration coefficient
``a`` decaying linearly from 2 to 0.  Binary coordinates take the same
update and are then resampled through a sigmoid transfer function.

Every random draw comes from a Philox stream keyed by (seed, stage,
iteration, wolf id), so results do not depend on the order in which fitness
values are computed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import expit

from .errors import ConfigError, FitnessDomainError

_INIT, _MOVE = 0, 1


@dataclass(frozen=True)
class ContinuousDim:
    lower: float
    upper: float
    scale: str = "linear"

    def __post_init__(self):
        if self.scale not in ("linear", "log10"):
            raise ConfigError(f"unknown scale {self.scale!r}")
        if not self.lower < self.upper:
            raise ConfigError(f"bounds must satisfy lower < upper, got {self.lower}, {self.upper}")
        if self.scale == "log10" and self.lower <= 0:
            raise ConfigError("log10 dimensions need positive bounds")

    @property
    def internal_bounds(self) -> tuple[float, float]:
        if self.scale == "log10":
            return math.log10(self.lower), math.log10(self.upper)
        return self.lower, self.upper


@dataclass(frozen=True)
class SearchSpace:
    binary_dims: int = 0
    continuous: tuple[ContinuousDim, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "continuous", tuple(self.continuous))
        if self.binary_dims < 0:
            raise ConfigError("binary_dims must be non-negative")
        if self.dim == 0:
            raise ConfigError("search space has no dimensions")

    @property
    def dim(self) -> int:
        return self.binary_dims + len(self.continuous)

    @property
    def lower(self) -> np.ndarray:
        return np.array([0.0] * self.binary_dims + [c.internal_bounds[0] for c in self.continuous])

    @property
    def upper(self) -> np.ndarray:
        return np.array([1.0] * self.binary_dims + [c.internal_bounds[1] for c in self.continuous])

    def decode(self, internal: np.ndarray) -> np.ndarray:
        """Internal coordinates -> user coordinates (log dims exponentiated)."""
        out = np.array(internal, dtype=float)
        for j, c in enumerate(self.continuous, start=self.binary_dims):
            if c.scale == "log10":
                out[j] = 10.0 ** out[j]
        return out

    def encode(self, position: np.ndarray) -> np.ndarray:
        out = np.array(position, dtype=float)
        for j, c in enumerate(self.continuous, start=self.binary_dims):
            if c.scale == "log10":
                out[j] = math.log10(out[j])
        return out

    def split(self, position: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(binary mask as int array, continuous values) of a decoded position."""
        position = np.asarray(position)
        return position[: self.binary_dims].astype(int), position[self.binary_dims:]


@dataclass(frozen=True)
class GwoConfig:
    pack_size: int = 20
    max_iter: int = 100
    seed: int = 0
    transfer_steepness: float = 10.0

    def __post_init__(self):
        if self.pack_size < 3:
            raise ConfigError(f"pack_size must be >= 3, got {self.pack_size}")
        if self.max_iter < 1:
            raise ConfigError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")


@dataclass
class Wolf:
    position: np.ndarray
    fitness: float
    id: int


def coefficient_a(t: float, T: float) -> float:
    return 2.0 * (1.0 - t / T)


def transfer(v, steepness: float = 10.0):
    """Sigmoid transfer centred on 0.5."""
    return expit(steepness * (np.asarray(v, dtype=float) - 0.5))


def binarize_dim(v: float, draw: float, steepness: float = 10.0) -> int:
    return int(draw < transfer(v, steepness))


def leader_guided_position(
    x: np.ndarray,
    leaders: Sequence[np.ndarray],
    a: float,
    draws,
    lower: np.ndarray | None = None,
    upper: np.ndarray | None = None,
) -> np.ndarray:
    """Average of the three leader-encircling moves.

    ``draws`` is either a ``numpy.random.Generator`` or an array of shape
    (3, 2, d) holding (r1, r2) per leader and dimension.  With bounds given
    the result is clipped into them.
    """
    x = np.asarray(x, dtype=float)
    if isinstance(draws, np.random.Generator):
        r = draws.random((3, 2, x.size))
    else:
        r = np.asarray(draws, dtype=float).reshape(3, 2, x.size)
    total = np.zeros_like(x)
    for k, leader in enumerate(leaders):
        leader = np.asarray(leader, dtype=float)
        A = 2.0 * a * r[k, 0] - a
        C = 2.0 * r[k, 1]
        total += leader - A * np.abs(C * leader - x)
    out = total / 3.0
    if lower is not None:
        out = np.clip(out, lower, upper)
    return out


def _stream(seed: int, stage: int, t: int, wolf: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(stage, t, wolf))
    return np.random.Generator(np.random.Philox(ss))


@dataclass
class _Leader:
    position: np.ndarray
    fitness: float
    id: int


class Pack:
    """Wolf positions (internal coordinates) plus best-so-far leaders."""

    def __init__(self, space: SearchSpace, cfg: GwoConfig):
        self.space = space
        self.cfg = cfg
        self.iteration = 0
        self.history: list[float] = []
        self.leaders: list[_Leader] = []
        db = space.binary_dims
        lo, hi = space.lower, space.upper
        rows = []
        for i in range(cfg.pack_size):
            u = _stream(cfg.seed, _INIT, 0, i).random(space.dim)
            pos = lo + u * (hi - lo)
            pos[:db] = (u[:db] < 0.5).astype(float)
            rows.append(pos)
        self.positions = np.array(rows)
        self.fitness = np.full(cfg.pack_size, np.inf)
        # binary dims are never clipped; the transfer step handles them
        self._clip_lo = np.where(np.arange(space.dim) < db, -np.inf, lo)
        self._clip_hi = np.where(np.arange(space.dim) < db, np.inf, hi)

    @property
    def alpha(self) -> _Leader:
        return self.leaders[0]

    @property
    def beta(self) -> _Leader:
        return self.leaders[1]

    @property
    def delta(self) -> _Leader:
        return self.leaders[2]

    @property
    def wolves(self) -> list[Wolf]:
        return [
            Wolf(self.space.decode(p), float(f), i)
            for i, (p, f) in enumerate(zip(self.positions, self.fitness))
        ]

    def _offer(self, pos: np.ndarray, f: float, wolf_id: int):
        cand = _Leader(pos.copy(), f, wolf_id)
        for k, lead in enumerate(self.leaders):
            if f < lead.fitness:
                self.leaders.insert(k, cand)
                del self.leaders[3:]
                return
        if len(self.leaders) < 3:
            self.leaders.append(cand)

    def evaluate(self, fitness: Callable[[np.ndarray], float], executor=None):
        decoded = [self.space.decode(p) for p in self.positions]
        mapper = map if executor is None else executor.map
        values = list(mapper(fitness, decoded))
        for i, v in enumerate(values):
            v = float(v)
            if not math.isfinite(v):
                raise FitnessDomainError(f"fitness returned {v} at position {decoded[i].tolist()}")
            self.fitness[i] = v
            self._offer(self.positions[i], v, i)
        self.history.append(self.alpha.fitness)

    def move(self):
        cfg, space = self.cfg, self.space
        a = coefficient_a(self.iteration, cfg.max_iter)
        leaders = [lead.position for lead in self.leaders]
        db = space.binary_dims
        for i in range(cfg.pack_size):
            g = _stream(cfg.seed, _MOVE, self.iteration, i)
            r = g.random((3, 2, space.dim))
            flips = g.random(space.dim)
            new = leader_guided_position(
                self.positions[i], leaders, a, r, self._clip_lo, self._clip_hi
            )
            if db:
                new[:db] = (flips[:db] < transfer(new[:db], cfg.transfer_steepness)).astype(float)
            self.positions[i] = new
        self.iteration += 1

    def best(self) -> Wolf:
        lead = self.alpha
        return Wolf(self.space.decode(lead.position), lead.fitness, lead.id)


def optimize(
    space: SearchSpace,
    fitness: Callable[[np.ndarray], float],
    cfg: GwoConfig,
    executor=None,
    trace: Callable[[str], object] | None = None,
    callback: Callable[[Pack], object] | None = None,
) -> tuple[Wolf, list[float]]:
    """Minimize ``fitness`` over ``space``.

    ``fitness`` receives decoded positions.  ``executor`` (anything with an
    ordered ``map``) may evaluate the pack concurrently.  ``trace`` receives
    one ``iter<TAB>alpha_fitness<TAB>selected_count`` line per iteration.
    """
    pack = Pack(space, cfg)
    for t in range(cfg.max_iter):
        pack.evaluate(fitness, executor)
        if trace is not None:
            selected = int(pack.alpha.position[: space.binary_dims].sum())
            trace(f"{t}\t{pack.alpha.fitness:.12g}\t{selected}")
        if callback is not None:
            callback(pack)
        pack.move()
    return pack.best(), list(pack.history)
