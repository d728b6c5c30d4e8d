"""Time-domain audio container used throughout the package."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True, eq=False)
class AudioClip:
    """Multichannel PCM audio held as float64, shape (channels, samples).

    Samples are dimensionless amplitudes, nominally within [-1, 1] but not
    clipped; mixtures of several stems may exceed full scale.  The array is
    marked read-only after construction so clips can be shared freely
    between threads and processes.
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[np.newaxis, :]
        if arr.ndim != 2:
            raise InvalidInputError(
                f"samples must be 1-D or (channels, samples), got shape {arr.shape}"
            )
        if not isinstance(self.sample_rate, (int, np.integer)) or self.sample_rate <= 0:
            raise InvalidInputError(f"sample_rate must be a positive integer, got {self.sample_rate!r}")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate

    def rms(self) -> float:
        """Root-mean-square amplitude over all channels and samples."""
        if self.samples.size == 0:
            return 0.0
        return float(np.sqrt(np.mean(np.square(self.samples))))

    def scaled(self, gain: float) -> "AudioClip":
        return AudioClip(self.samples * float(gain), self.sample_rate)

    def window(self, start: int, stop: int) -> "AudioClip":
        """Return the sample range [start, stop) as a new clip."""
        if not (0 <= start <= stop <= self.n_samples):
            raise InvalidInputError(
                f"window [{start}, {stop}) outside clip of {self.n_samples} samples"
            )
        return AudioClip(self.samples[:, start:stop], self.sample_rate)
