"""Counter-based random streams.

Every stream is keyed by (seed, stream_id, *path). Derivation goes through
SeedSequence, so draws are bit-identical for identical keys and independent
across distinct keys, regardless of scheduling or draw order elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0
    path: tuple[int, ...] = ()
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id, *self.path))
        object.__setattr__(self, "_gen", np.random.Generator(np.random.Philox(ss)))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def substream(self, *path: int) -> "RngStream":
        """Independent stream keyed by (seed, stream_id, *self.path, *path)."""
        return RngStream(self.seed, self.stream_id, (*self.path, *path))

    def normals(self, shape: int | tuple[int, ...]) -> np.ndarray:
        return self._gen.standard_normal(shape)

    def uniforms(self, shape: int | tuple[int, ...]) -> np.ndarray:
        return self._gen.random(shape)
