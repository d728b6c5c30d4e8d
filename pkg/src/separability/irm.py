"""Ideal-ratio-mask oracle separation.

Given the spectrograms of the true stems, each source's mask is its own
magnitude (raised to an exponent) divided by the sum over all stems.
Applying the masks to the mixture spectrogram and inverting yields the
best separation this mask family can deliver, independent of any trained
model.  Mask quality therefore reflects how much the stems overlap in
time-frequency, which is the quantity this package measures.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .audio import AudioClip
from .errors import ConfigurationError, InvalidInputError
from .stft import Spectrogram, StftConfig, istft, stft

ZERO_BIN_POLICIES = ("uniform", "zero")


@dataclass(frozen=True)
class OracleConfig:
    """Mask family parameters.

    alpha is the magnitude exponent: 1 gives magnitude-ratio masks, 2
    power-ratio masks.  Power masks are the default; they correspond to a
    Wiener-style local SNR weighting and separate overlapping content
    more aggressively.

    zero_bin_policy controls bins where every stem is exactly silent:
    "uniform" spreads the mixture evenly over the sources (masks then sum
    to one everywhere), "zero" suppresses such bins in every estimate.
    """

    alpha: float = 2.0
    zero_bin_policy: str = "uniform"

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigurationError(f"alpha must be > 0, got {self.alpha}")
        if self.zero_bin_policy not in ZERO_BIN_POLICIES:
            raise ConfigurationError(
                f"unknown zero_bin_policy {self.zero_bin_policy!r}; "
                f"expected one of {ZERO_BIN_POLICIES}"
            )


@dataclass(frozen=True, eq=False)
class MaskSet:
    """Per-source ratio masks over one TF grid.

    masks has shape (sources, channels, frames, freqs), entries in [0, 1].
    Where at least one source is active the masks sum to one.
    """

    masks: np.ndarray
    source_ids: tuple[str, ...]
    config: OracleConfig

    def __post_init__(self):
        arr = np.asarray(self.masks, dtype=np.float64)
        if arr.ndim != 4:
            raise InvalidInputError(
                f"masks must be (sources, channels, frames, freqs), got shape {arr.shape}"
            )
        if arr.shape[0] != len(self.source_ids):
            raise InvalidInputError(
                f"{arr.shape[0]} masks for {len(self.source_ids)} source ids"
            )
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "masks", arr)
        object.__setattr__(self, "source_ids", tuple(self.source_ids))

    @property
    def n_sources(self) -> int:
        return self.masks.shape[0]

    def mask_for(self, source_id: str) -> np.ndarray:
        try:
            idx = self.source_ids.index(source_id)
        except ValueError:
            raise InvalidInputError(f"no mask for source {source_id!r}") from None
        return self.masks[idx]


def compute_irm(
    source_specs: Sequence[Spectrogram],
    config: OracleConfig = OracleConfig(),
    source_ids: Sequence[str] | None = None,
) -> MaskSet:
    """Ratio masks from the stem spectrograms.

    All spectrograms must share one shape and framing configuration.
    """
    if len(source_specs) == 0:
        raise InvalidInputError("need at least one source spectrogram")
    first = source_specs[0]
    for spec in source_specs[1:]:
        if spec.bins.shape != first.bins.shape or spec.config != first.config:
            raise InvalidInputError("source spectrograms must share shape and configuration")
    if source_ids is None:
        source_ids = tuple(f"source_{i}" for i in range(len(source_specs)))
    elif len(source_ids) != len(source_specs):
        raise InvalidInputError(
            f"{len(source_ids)} source ids for {len(source_specs)} spectrograms"
        )

    energies = np.stack([np.abs(spec.bins) ** config.alpha for spec in source_specs])
    denom = energies.sum(axis=0)
    silent = denom == 0.0
    n = len(source_specs)
    with np.errstate(invalid="ignore", divide="ignore"):
        masks = energies / denom
    if config.zero_bin_policy == "uniform":
        masks[:, silent] = 1.0 / n
    else:
        masks[:, silent] = 0.0
    return MaskSet(masks, tuple(source_ids), config)


def apply_masks(mask_set: MaskSet, mixture_spec: Spectrogram) -> list[Spectrogram]:
    """Masked copies of the mixture spectrogram, one per source."""
    if mask_set.masks.shape[1:] != mixture_spec.bins.shape:
        raise InvalidInputError(
            f"mask shape {mask_set.masks.shape[1:]} does not match mixture "
            f"shape {mixture_spec.bins.shape}"
        )
    return [
        Spectrogram(
            mask * mixture_spec.bins,
            mixture_spec.config,
            mixture_spec.original_length,
            mixture_spec.sample_rate,
        )
        for mask in mask_set.masks
    ]


def oracle_separate(
    mixture: AudioClip,
    stems: Sequence[AudioClip],
    stft_config: StftConfig = StftConfig(),
    oracle_config: OracleConfig = OracleConfig(),
    source_ids: Sequence[str] | None = None,
) -> list[AudioClip]:
    """Separate a mixture using masks derived from its true stems.

    Returns one estimate per stem, time-aligned with the inputs.
    """
    if any(s.n_samples != mixture.n_samples or s.n_channels != mixture.n_channels for s in stems):
        raise InvalidInputError("stems must match the mixture in channels and length")
    mix_spec = stft(mixture, stft_config)
    stem_specs = [stft(s, stft_config) for s in stems]
    mask_set = compute_irm(stem_specs, oracle_config, source_ids)
    return [istft(spec) for spec in apply_masks(mask_set, mix_spec)]
