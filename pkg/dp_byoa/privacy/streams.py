"""Labelled random streams split from one root seed."""

import zlib
from typing import Union

import numpy as np

Label = Union[str, int]


def _spawn_key(labels: tuple[Label, ...]) -> tuple[int, ...]:
    return tuple(zlib.crc32(str(label).encode("utf-8")) for label in labels)


class RandomStreams:
    """
    Deterministic family of independent generators keyed by labels.

    A stream depends only on the root seed and its own label path, so adding a new
    consumer never shifts the draws of existing ones.
    """

    def __init__(self, root_seed: int):
        if root_seed < 0:
            raise ValueError(f"Root seed must be non-negative, got {root_seed}")
        self.root_seed = int(root_seed)

    def _sequence(self, labels: tuple[Label, ...]) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.root_seed, spawn_key=_spawn_key(labels))

    def stream(self, *labels: Label) -> np.random.Generator:
        """Counter-based Philox generator for the label path."""
        return np.random.Generator(np.random.Philox(self._sequence(labels)))

    def seed(self, *labels: Label) -> int:
        """A 64-bit integer seed for consumers that take a seed instead of a generator."""
        state = self._sequence(labels).generate_state(1, dtype=np.uint64)
        return int(state[0])

    def child(self, label: Label) -> "RandomStreams":
        """Independent sub-family, e.g. for one half of a composed algorithm."""
        return RandomStreams(self.seed("child", label))
