"""Multitrack dataset loading, loudness equalization, and mixture synthesis.

A dataset is a directory of song folders, each holding one WAV per
instrument ( <root>/<song_id>/<instrument>.wav ), plus a line-oriented
manifest assigning every song to a train/valid/test split.  Audio is
44.1 kHz WAV only; other sample rates are rejected rather than
resampled, so no hidden DSP runs on the data being measured.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import scipy.io.wavfile

from .audio import AudioClip
from .errors import AlignmentError, DatasetError, MissingStemError

log = logging.getLogger(__name__)

SAMPLE_RATE = 44100
SPLITS = ("train", "valid", "test")
MIXTURE_NAME = "mixture"

# Integer PCM is mapped onto [-1, 1) by the width of its sample type;
# 24-bit WAVs arrive from the reader already shifted into int32.
_PCM_SCALES = {np.dtype(np.int16): 2.0**15, np.dtype(np.int32): 2.0**31}


def read_wav(path: Path | str, expected_rate: int = SAMPLE_RATE) -> AudioClip:
    path = Path(path)
    try:
        rate, data = scipy.io.wavfile.read(path)
    except FileNotFoundError:
        raise DatasetError(f"audio file not found: {path}") from None
    except ValueError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    if expected_rate is not None and rate != expected_rate:
        raise DatasetError(f"{path}: sample rate {rate} Hz, expected {expected_rate} Hz")
    if data.dtype in _PCM_SCALES:
        samples = data.astype(np.float64) / _PCM_SCALES[data.dtype]
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise DatasetError(f"{path}: unsupported sample format {data.dtype}")
    if samples.ndim == 1:
        samples = samples[np.newaxis, :]
    else:
        samples = samples.T
    return AudioClip(samples, int(rate))


def write_wav(path: Path | str, clip: AudioClip) -> None:
    """Store a clip as 32-bit float WAV (lossless for fixture audio)."""
    data = np.ascontiguousarray(clip.samples.T, dtype=np.float32)
    if data.shape[1] == 1:
        data = data[:, 0]
    scipy.io.wavfile.write(Path(path), clip.sample_rate, data)


@dataclass(frozen=True)
class MultitrackSong:
    """One song: aligned per-instrument stems plus an optional mixture."""

    song_id: str
    stems: Mapping[str, AudioClip]
    mixture: AudioClip | None = None

    def __post_init__(self):
        stems = dict(self.stems)
        if len(stems) < 2:
            raise DatasetError(f"song {self.song_id!r} needs at least 2 stems, got {len(stems)}")
        clips = list(stems.values())
        if self.mixture is not None:
            clips.append(self.mixture)
        first = clips[0]
        for clip in clips[1:]:
            if (
                clip.n_samples != first.n_samples
                or clip.n_channels != first.n_channels
                or clip.sample_rate != first.sample_rate
            ):
                raise AlignmentError(
                    f"song {self.song_id!r} has misaligned tracks: " + self.describe_tracks(stems)
                )
        object.__setattr__(self, "stems", stems)

    def describe_tracks(self, stems: Mapping[str, AudioClip] | None = None) -> str:
        stems = self.stems if stems is None else stems
        parts = [
            f"{name}: {clip.n_samples} samples, {clip.n_channels} ch, {clip.sample_rate} Hz"
            for name, clip in stems.items()
        ]
        if self.mixture is not None:
            parts.append(
                f"mixture: {self.mixture.n_samples} samples, "
                f"{self.mixture.n_channels} ch, {self.mixture.sample_rate} Hz"
            )
        return "; ".join(parts)

    @property
    def instruments(self) -> tuple[str, ...]:
        return tuple(self.stems)

    @property
    def n_samples(self) -> int:
        return next(iter(self.stems.values())).n_samples


def load_song(song_dir: Path | str, expected_instruments: Sequence[str]) -> MultitrackSong:
    """Load a song directory, requiring one WAV per expected instrument.

    Filename matching is case-insensitive on the stem part.  Unexpected
    audio files are skipped with a warning; a present mixture.wav is
    loaded alongside the stems.
    """
    song_dir = Path(song_dir)
    if not song_dir.is_dir():
        raise DatasetError(f"song directory not found: {song_dir}")
    wavs = {p.stem.lower(): p for p in sorted(song_dir.glob("*.wav"))}
    expected = [inst.lower() for inst in expected_instruments]

    stems: dict[str, AudioClip] = {}
    for label, key in zip(expected_instruments, expected):
        path = wavs.get(key)
        if path is None:
            raise MissingStemError(f"song {song_dir.name!r} is missing stem {label!r}")
        stems[label] = read_wav(path)
    for key, path in wavs.items():
        if key not in expected and key != MIXTURE_NAME:
            log.warning("song %r: ignoring unexpected file %s", song_dir.name, path.name)

    mixture = None
    if MIXTURE_NAME in wavs:
        mixture = read_wav(wavs[MIXTURE_NAME])

    return MultitrackSong(song_dir.name, stems, mixture)


def normalize_loudness(song: MultitrackSong) -> MultitrackSong:
    """Rescale every non-silent stem to the mean RMS of the originals.

    Silent stems (exactly zero) pass through untouched and do not move
    the mean.  Any previously attached mixture is dropped because it no
    longer equals the sum of the rescaled stems.
    """
    levels = {name: clip.rms() for name, clip in song.stems.items()}
    active = [v for v in levels.values() if v > 0.0]
    if not active:
        return MultitrackSong(song.song_id, dict(song.stems), None)
    target = sum(active) / len(active)
    stems = {
        name: clip if levels[name] == 0.0 else clip.scaled(target / levels[name])
        for name, clip in song.stems.items()
    }
    return MultitrackSong(song.song_id, stems, None)


def make_mixture(song: MultitrackSong) -> MultitrackSong:
    """Attach the sample-wise sum of the stems as the song's mixture.

    No headroom normalization: the sum may exceed full scale and stays
    float, so separation sees exactly the sum of what it is asked to
    recover.
    """
    stacked = np.stack([clip.samples for clip in song.stems.values()])
    mixture = AudioClip(stacked.sum(axis=0), next(iter(song.stems.values())).sample_rate)
    return MultitrackSong(song.song_id, dict(song.stems), mixture)


@dataclass(frozen=True)
class DatasetManifest:
    """Dataset bookkeeping: root, song/split assignments, instrument labels."""

    root: Path
    entries: tuple[tuple[str, str], ...]
    instruments: tuple[str, ...]

    def __post_init__(self):
        seen = set()
        for song_id, split in self.entries:
            if split not in SPLITS:
                raise DatasetError(
                    f"song {song_id!r}: unknown split {split!r}, expected one of {SPLITS}"
                )
            if song_id in seen:
                raise DatasetError(f"song {song_id!r} listed twice in manifest")
            seen.add(song_id)
        if not self.instruments:
            raise DatasetError("manifest declares no instruments")

    def song_ids(self, split: str | None = None) -> tuple[str, ...]:
        if split is not None and split not in SPLITS:
            raise DatasetError(f"unknown split {split!r}")
        return tuple(s for s, sp in self.entries if split is None or sp == split)

    def split_of(self, song_id: str) -> str:
        for s, sp in self.entries:
            if s == song_id:
                return sp
        raise DatasetError(f"song {song_id!r} not in manifest")

    def song_dir(self, song_id: str) -> Path:
        return self.root / song_id

    def load(self, song_id: str) -> MultitrackSong:
        return load_song(self.song_dir(song_id), self.instruments)


def _discover_instruments(root: Path, song_ids: Sequence[str]) -> tuple[str, ...]:
    # Instruments common to every song; per-song extras are reported at
    # load time instead of silently shrinking the label set further.
    common: set[str] | None = None
    for song_id in song_ids:
        song_dir = root / song_id
        if not song_dir.is_dir():
            raise DatasetError(f"manifest lists {song_id!r} but {song_dir} does not exist")
        names = {p.stem.lower() for p in song_dir.glob("*.wav")} - {MIXTURE_NAME}
        common = names if common is None else common & names
    if not common:
        raise DatasetError("no instrument stems shared by every listed song")
    return tuple(sorted(common))


def load_manifest(
    manifest_path: Path | str,
    root: Path | str | None = None,
    instruments: Sequence[str] | None = None,
) -> DatasetManifest:
    """Parse a song_id<TAB>split manifest file.

    The dataset root defaults to the manifest's directory.  When no
    instrument list is given, the labels are discovered as the WAV names
    present in every listed song directory (mixture excluded).  Each
    song directory is then checked to contain every declared stem.
    """
    manifest_path = Path(manifest_path)
    root = Path(root) if root is not None else manifest_path.parent
    if not manifest_path.is_file():
        raise DatasetError(f"manifest not found: {manifest_path}")

    entries: list[tuple[str, str]] = []
    for lineno, raw in enumerate(manifest_path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise DatasetError(
                f"{manifest_path}:{lineno}: expected song_id<TAB>split, got {line!r}"
            )
        entries.append((parts[0].strip(), parts[1].strip()))
    if not entries:
        raise DatasetError(f"{manifest_path}: no songs listed")

    song_ids = [song_id for song_id, _ in entries]
    if instruments is None:
        instruments = _discover_instruments(root, song_ids)

    for song_id in song_ids:
        song_dir = root / song_id
        if not song_dir.is_dir():
            raise DatasetError(f"manifest lists {song_id!r} but {song_dir} does not exist")
        present = {p.stem.lower() for p in song_dir.glob("*.wav")}
        for inst in instruments:
            if inst.lower() not in present:
                raise MissingStemError(f"song {song_id!r} is missing stem {inst!r}")

    return DatasetManifest(root, tuple(entries), tuple(instruments))
