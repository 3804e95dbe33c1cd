"""Elo arithmetic: expected scores, paired updates and rating initialization."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, ValidationError

# Seed-sequence tag so initialization draws never collide with scheduler/judge streams.
_INIT_STREAM = 0x1A17


@dataclass
class Rating:
    instance_id: str
    elo: float


@dataclass(frozen=True)
class EloConfig:
    k_factor: float = 32.0
    init_center: float = 1000.0
    init_spread: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.k_factor) and self.k_factor > 0):
            raise ValidationError(f"k_factor must be a positive finite number, got {self.k_factor}")
        if not (math.isfinite(self.init_spread) and self.init_spread >= 0):
            raise ValidationError(f"init_spread must be >= 0, got {self.init_spread}")
        if not math.isfinite(self.init_center):
            raise ValidationError(f"init_center must be finite, got {self.init_center}")
        if not (0 <= int(self.seed) < 2**64):
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


def _check_finite(*values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise DomainError(f"rating inputs must be finite, got {v!r}")


def expected_score(e_a: float, e_b: float) -> float:
    """Probability that a player rated ``e_a`` beats one rated ``e_b``.

    Logistic in base 10 with a 400-point scale, so a 400 point advantage
    gives odds of 10 to 1.

    >>> expected_score(1000, 1000)
    0.5
    """
    _check_finite(e_a, e_b)
    return 1.0 / (1.0 + 10.0 ** ((e_b - e_a) / 400.0))


def update_pair(e_a: float, e_b: float, a_won: bool, k: float = 32.0) -> tuple[float, float]:
    """Return both players' ratings after one decisive game.

    The loser gives up exactly what the winner gains, so the pair's total
    rating is conserved.
    """
    _check_finite(e_a, e_b, k)
    if k <= 0:
        raise DomainError(f"k must be positive, got {k}")
    delta = k * ((1.0 if a_won else 0.0) - expected_score(e_a, e_b))
    return e_a + delta, e_b - delta


def init_ratings(instance_ids: Sequence[str], cfg: EloConfig) -> list[Rating]:
    """Draw one initial rating per id, uniform on ``center +/- spread``.

    Exact collisions are redrawn so that every rating is distinct whenever
    the spread is positive; this keeps rank-based schedulers free of ties.
    """
    ids = list(instance_ids)
    if len(set(ids)) != len(ids):
        seen, dupes = set(), []
        for i in ids:
            if i in seen:
                dupes.append(i)
            seen.add(i)
        raise ValidationError(f"duplicate instance ids: {sorted(set(dupes))[:5]}")
    rng = np.random.default_rng(np.random.SeedSequence([int(cfg.seed), _INIT_STREAM]))
    lo = cfg.init_center - cfg.init_spread
    hi = cfg.init_center + cfg.init_spread
    elos: list[float] = []
    used: set[float] = set()
    for _ in ids:
        value = float(rng.uniform(lo, hi))
        while cfg.init_spread > 0 and value in used:
            value = float(rng.uniform(lo, hi))
        used.add(value)
        elos.append(value)
    return [Rating(i, e) for i, e in zip(ids, elos)]


def rating_to_score(e: float, anchor: float = 1000.0) -> float:
    """Map a rating into (0, 1): the chance of beating a player rated ``anchor``."""
    return expected_score(e, anchor)
