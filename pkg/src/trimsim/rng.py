"""Deterministic stream derivation for all randomness in the package.

Every sampling routine takes an explicit SeedSpec; independent replicate
streams are derived by spawn keys, so results are identical across runs
and across any parallel schedule.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus a stream id identifying one derived substream."""

    master_seed: int
    stream_id: tuple[int, ...] = field(default=())

    def __post_init__(self):
        sid = self.stream_id
        if isinstance(sid, int):
            object.__setattr__(self, "stream_id", (sid,))
        elif not isinstance(sid, tuple):
            object.__setattr__(self, "stream_id", tuple(int(k) for k in sid))

    def derive(self, k: int) -> "SeedSpec":
        """Child stream k; (master_seed, stream_id) fully determines the draws."""
        return SeedSpec(self.master_seed, self.stream_id + (int(k),))

    def sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.master_seed, spawn_key=self.stream_id)

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.sequence()))
