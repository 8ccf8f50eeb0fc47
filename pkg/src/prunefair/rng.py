"""Reproducible random streams.

Every stochastic component in the toolkit (weight init, shuffling,
augmentation, random pruning, synthetic data) draws from an RngState.
The generator is Philox, a counter-based algorithm whose output for a
given key is identical across platforms and numpy versions, so a run is
fully determined by its seed. Child streams are derived by hashing the
parent seed together with a label, which keeps independent parts of an
experiment (base training vs. each pruning trajectory) statistically
independent without any shared mutable state.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

ALGORITHM = "philox4x64"


def _derive_seed(seed: int, label: str) -> int:
    digest = hashlib.blake2b(f"{seed}:{label}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


@dataclass
class RngState:
    """Seeded, splittable random stream."""

    seed: int
    algorithm: str = ALGORITHM
    _generator: np.random.Generator | None = field(
        default=None, repr=False, compare=False
    )

    @property
    def generator(self) -> np.random.Generator:
        if self._generator is None:
            self._generator = np.random.Generator(np.random.Philox(key=self.seed))
        return self._generator

    def split(self, label: str) -> "RngState":
        """Derive an independent child stream keyed by `label`."""
        return RngState(_derive_seed(self.seed, label))
