"""Short-time Fourier transform with exact overlap-add inversion.

The analysis and synthesis stages share one window.  Synthesis multiplies
each inverse-transformed frame by the window again and divides the
overlap-added result by the accumulated squared window, which makes the
round trip exact (to rounding) for every configuration whose squared
window tiles the time axis at the chosen hop.  That tiling property is
enforced up front by :func:`check_cola`.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .audio import AudioClip
from .errors import ConfigurationError, InvalidInputError

WINDOW_KINDS = ("hann", "rect")

# Relative deviation above which the squared-window overlap sum is no
# longer considered constant.
COLA_TOLERANCE = 1e-10


@dataclass(frozen=True)
class StftConfig:
    """Framing parameters for the forward and inverse transform.

    The default 4096/1024 periodic-Hann configuration is the usual choice
    for 44.1 kHz separation work; nothing in the package depends on it
    beyond being a valid overlap-add pair.
    """

    window_size: int = 4096
    hop_size: int = 1024
    window_kind: str = "hann"
    center: bool = True

    def __post_init__(self):
        if self.window_size < 2:
            raise ConfigurationError(f"window_size must be >= 2, got {self.window_size}")
        if not 0 < self.hop_size <= self.window_size:
            raise ConfigurationError(
                f"hop_size must satisfy 0 < hop <= window_size, got hop={self.hop_size} "
                f"window={self.window_size}"
            )
        if self.window_kind not in WINDOW_KINDS:
            raise ConfigurationError(
                f"unknown window_kind {self.window_kind!r}; expected one of {WINDOW_KINDS}"
            )

    @property
    def n_bins(self) -> int:
        """One-sided bin count of the real-input transform."""
        return self.window_size // 2 + 1

    @property
    def pad(self) -> int:
        return self.window_size // 2 if self.center else 0


@dataclass(frozen=True, eq=False)
class Spectrogram:
    """Complex TF representation, bins indexed [channel, frame, frequency]."""

    bins: np.ndarray
    config: StftConfig
    original_length: int
    sample_rate: int

    def __post_init__(self):
        arr = np.asarray(self.bins, dtype=np.complex128)
        if arr.ndim != 3:
            raise InvalidInputError(f"bins must be (channels, frames, freqs), got shape {arr.shape}")
        if arr.shape[2] != self.config.n_bins:
            raise InvalidInputError(
                f"frequency count {arr.shape[2]} does not match config ({self.config.n_bins} bins)"
            )
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "bins", arr)

    @property
    def n_channels(self) -> int:
        return self.bins.shape[0]

    @property
    def n_frames(self) -> int:
        return self.bins.shape[1]

    @property
    def n_bins(self) -> int:
        return self.bins.shape[2]

    def magnitudes(self) -> np.ndarray:
        return np.abs(self.bins)


@dataclass(frozen=True)
class ColaReport:
    """Outcome of the overlap-add tiling check for one configuration."""

    passed: bool
    max_deviation: float
    overlap_gain: float


@functools.lru_cache(maxsize=64)
def _window_values(kind: str, size: int) -> np.ndarray:
    if kind == "hann":
        # Periodic form: tiles exactly at hop = size/m for integer m >= 3.
        n = np.arange(size)
        win = 0.5 - 0.5 * np.cos(2.0 * np.pi * n / size)
    elif kind == "rect":
        win = np.ones(size)
    else:  # pragma: no cover - rejected by StftConfig
        raise ConfigurationError(f"unknown window kind {kind!r}")
    win.setflags(write=False)
    return win


def window_values(config: StftConfig) -> np.ndarray:
    """Window taper for the given configuration (read-only array)."""
    return _window_values(config.window_kind, config.window_size)


@functools.lru_cache(maxsize=64)
def _cola_report(kind: str, size: int, hop: int) -> ColaReport:
    wsq = _window_values(kind, size) ** 2
    # Lay enough frames that positions [size, size + hop) see every frame
    # that can touch them; those positions are representative of the
    # infinite interior.
    n_frames = size // hop + 3
    cover = np.zeros((n_frames - 1) * hop + size)
    for t in range(n_frames):
        cover[t * hop : t * hop + size] += wsq
    interior = cover[size : size + hop]
    mean = float(interior.mean())
    deviation = float(interior.max() - interior.min()) / mean if mean > 0 else math.inf
    return ColaReport(passed=deviation <= COLA_TOLERANCE, max_deviation=deviation, overlap_gain=mean)


def check_cola(config: StftConfig) -> ColaReport:
    """Check that the squared window sums to a constant at the config's hop."""
    return _cola_report(config.window_kind, config.window_size, config.hop_size)


def _require_cola(config: StftConfig) -> None:
    report = check_cola(config)
    if not report.passed:
        raise ConfigurationError(
            f"window {config.window_kind!r} size {config.window_size} does not satisfy "
            f"constant overlap-add at hop {config.hop_size} "
            f"(relative deviation {report.max_deviation:.3e})"
        )


def _reflect_pad(x: np.ndarray, pad: int) -> np.ndarray:
    """Center padding by reflection, degrading to zeros for very short input."""
    if pad == 0:
        return x
    n = x.shape[-1]
    k = min(pad, n - 1)
    if k > 0:
        x = np.pad(x, [(0, 0)] * (x.ndim - 1) + [(k, k)], mode="reflect")
    if k < pad:
        x = np.pad(x, [(0, 0)] * (x.ndim - 1) + [(pad - k, pad - k)], mode="constant")
    return x


def _frame_count(padded_length: int, config: StftConfig) -> int:
    reach = max(padded_length - config.window_size, 0)
    return -(-reach // config.hop_size) + 1


def stft(clip: AudioClip, config: StftConfig = StftConfig()) -> Spectrogram:
    """Forward transform of a clip under the given framing configuration.

    Raises
    ------
    InvalidInputError
        If the clip holds no samples.
    ConfigurationError
        If the configuration violates the overlap-add condition.
    """
    if clip.n_samples == 0:
        raise InvalidInputError("cannot transform an empty clip")
    _require_cola(config)

    win = window_values(config)
    ws, hop = config.window_size, config.hop_size
    x = _reflect_pad(clip.samples, config.pad)
    n_frames = _frame_count(x.shape[-1], config)
    total = (n_frames - 1) * hop + ws
    if total > x.shape[-1]:
        x = np.pad(x, [(0, 0), (0, total - x.shape[-1])], mode="constant")
    frames = np.lib.stride_tricks.sliding_window_view(x, ws, axis=-1)[:, ::hop, :]
    bins = np.fft.rfft(frames * win, axis=-1)
    return Spectrogram(bins, config, clip.n_samples, clip.sample_rate)


def istft(spec: Spectrogram, target_length: int | None = None) -> AudioClip:
    """Inverse transform, trimmed or zero-extended to ``target_length`` samples.

    ``target_length`` defaults to the length recorded at analysis time.
    Requesting more samples than the frame count can represent raises
    :class:`InvalidInputError`.
    """
    config = spec.config
    _require_cola(config)
    if target_length is None:
        target_length = spec.original_length
    if target_length < 0:
        raise InvalidInputError(f"target_length must be >= 0, got {target_length}")

    win = window_values(config)
    ws, hop = config.window_size, config.hop_size
    n_channels, n_frames = spec.n_channels, spec.n_frames
    total = (n_frames - 1) * hop + ws
    if config.pad + target_length > total:
        raise InvalidInputError(
            f"target_length {target_length} exceeds the {total - config.pad} samples "
            f"representable by {n_frames} frames"
        )

    frames = np.fft.irfft(spec.bins, n=ws, axis=-1) * win
    out = np.zeros((n_channels, total))
    wsq = np.zeros(total)
    wsq_frame = win**2
    for t in range(n_frames):
        sl = slice(t * hop, t * hop + ws)
        out[:, sl] += frames[:, t, :]
        wsq[sl] += wsq_frame
    # Per-sample normalization by the squared-window sum; samples with no
    # effective window coverage are zeroed rather than amplified.
    covered = wsq > wsq.max() * 1e-12
    out[:, covered] /= wsq[covered]
    out[:, ~covered] = 0.0
    start = config.pad
    return AudioClip(out[:, start : start + target_length], spec.sample_rate)
