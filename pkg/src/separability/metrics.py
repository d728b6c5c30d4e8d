"""Separation quality metrics over least-squares error decompositions.

An estimate of one stem is split into the true image plus three error
terms: spatial distortion (what a short filter applied to the target
could still explain), interference (what filters on the other stems
explain on top of that), and artifacts (the remainder).  The split is a
pair of least-squares projections onto delayed copies of the reference
channels, so the three terms partition the estimate exactly.

SDR, ISR, SIR and SAR are energy ratios over that split.  SI-SDR skips
the decomposition and compares against the best scalar rescaling of the
reference.  All five are evaluated on short windows and reduced by
medians, which keeps a few degenerate windows from dominating a song.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy.signal import fftconvolve

from .audio import AudioClip
from .errors import ConfigurationError, InvalidInputError, SilentReferenceError

# Column order used everywhere scores are reported.
METRICS = ("si_sdr", "sdr", "sir", "isr", "sar")


@dataclass(frozen=True)
class MetricConfig:
    window_length: float = 1.0
    window_hop: float = 1.0
    filter_length: int = 512
    silence_threshold: float = 1e-12
    db_cap: float = 300.0

    def __post_init__(self):
        if not self.window_length > 0:
            raise ConfigurationError(f"window_length must be > 0, got {self.window_length}")
        if not self.window_hop > 0:
            raise ConfigurationError(f"window_hop must be > 0, got {self.window_hop}")
        if self.filter_length < 1:
            raise ConfigurationError(f"filter_length must be >= 1, got {self.filter_length}")
        if not self.silence_threshold >= 0:
            raise ConfigurationError(
                f"silence_threshold must be >= 0, got {self.silence_threshold}"
            )
        if not self.db_cap > 0:
            raise ConfigurationError(f"db_cap must be > 0, got {self.db_cap}")


@dataclass(frozen=True, eq=False)
class ErrorComponents:
    """Additive error split of one estimate against its reference set.

    All three arrays live on the padded domain of length N + L - 1 (the
    reach of an L-tap filter over an N-sample window), channels first.
    reference + e_spat + e_interf + e_artif reproduces the zero-padded
    estimate exactly, and e_artif is orthogonal to every delayed copy of
    every reference channel.

    used_ridge records whether the normal equations needed diagonal
    regularization, which happens when near-silent regressors make the
    Gram matrix numerically singular.
    """

    e_spat: np.ndarray
    e_interf: np.ndarray
    e_artif: np.ndarray
    used_ridge: bool = False

    def __post_init__(self):
        shapes = {self.e_spat.shape, self.e_interf.shape, self.e_artif.shape}
        if len(shapes) != 1 or self.e_spat.ndim != 2:
            raise InvalidInputError(f"component shapes disagree: {shapes}")

    @property
    def total_error(self) -> np.ndarray:
        return self.e_spat + self.e_interf + self.e_artif


def _mean_square(x: np.ndarray) -> float:
    return float(np.mean(x**2)) if x.size else 0.0


def _next_pow2(n: int) -> int:
    return 1 << max(n - 1, 0).bit_length()


class _Projector:
    """Least-squares projection onto L-tap filtered copies of fixed signals.

    Building one is the expensive part (Gram assembly plus a Cholesky
    factorization), so callers evaluating several estimates against the
    same references construct the projector once and reuse it.
    """

    def __init__(self, regressors: np.ndarray, filter_length: int):
        regressors = np.atleast_2d(np.asarray(regressors, dtype=np.float64))
        # Silent rows span nothing; dropping them keeps the Gram matrix
        # from being structurally singular.
        keep = [i for i in range(regressors.shape[0]) if np.any(regressors[i])]
        self._regressors = regressors[keep]
        self._flen = filter_length
        self._n = regressors.shape[1]
        self._out_len = self._n + filter_length - 1
        self._nfft = _next_pow2(self._out_len)
        self.used_ridge = False

        m = self._regressors.shape[0]
        if m == 0:
            self._solve = None
            self._sf = None
            return
        flen = filter_length
        self._sf = np.fft.rfft(self._regressors, self._nfft, axis=-1)
        gram = np.empty((m * flen, m * flen))
        for i in range(m):
            for j in range(i, m):
                corr = np.fft.irfft(self._sf[i] * np.conj(self._sf[j]), self._nfft)
                block = scipy.linalg.toeplitz(
                    np.concatenate(([corr[0]], corr[-1 : -flen : -1])), corr[:flen]
                )
                gram[i * flen : (i + 1) * flen, j * flen : (j + 1) * flen] = block
                if i != j:
                    gram[j * flen : (j + 1) * flen, i * flen : (i + 1) * flen] = block.T
        self._solve = self._factor(gram)

    def _factor(self, gram: np.ndarray):
        try:
            factor = scipy.linalg.cho_factor(gram, lower=True)
            return lambda rhs: scipy.linalg.cho_solve(factor, rhs)
        except scipy.linalg.LinAlgError:
            pass
        self.used_ridge = True
        ridge = 1e-10 * np.trace(gram) / gram.shape[0]
        regularized = gram + ridge * np.eye(gram.shape[0])
        try:
            factor = scipy.linalg.cho_factor(regularized, lower=True)
            return lambda rhs: scipy.linalg.cho_solve(factor, rhs)
        except scipy.linalg.LinAlgError:
            return lambda rhs: np.linalg.lstsq(regularized, rhs, rcond=None)[0]

    def project(self, estimate: np.ndarray) -> np.ndarray:
        """Closest point to ``estimate`` in the filtered span, per channel.

        estimate has shape (channels, N); the result (channels, N + L - 1).
        """
        estimate = np.atleast_2d(np.asarray(estimate, dtype=np.float64))
        if estimate.shape[1] != self._n:
            raise InvalidInputError(
                f"estimate length {estimate.shape[1]} does not match regressors ({self._n})"
            )
        n_channels = estimate.shape[0]
        out = np.zeros((n_channels, self._out_len))
        if self._solve is None:
            return out
        m, flen = self._regressors.shape[0], self._flen
        ef = np.fft.rfft(estimate, self._nfft, axis=-1)
        rhs = np.empty((m * flen, n_channels))
        for i in range(m):
            for c in range(n_channels):
                corr = np.fft.irfft(self._sf[i] * np.conj(ef[c]), self._nfft)
                rhs[i * flen : (i + 1) * flen, c] = np.concatenate(
                    ([corr[0]], corr[-1 : -flen : -1])
                )
        coeffs = self._solve(rhs)
        for i in range(m):
            filters = coeffs[i * flen : (i + 1) * flen]
            for c in range(n_channels):
                out[c] += fftconvolve(filters[:, c], self._regressors[i])[: self._out_len]
        return out


def _stacked(references: Sequence[AudioClip], estimate: AudioClip) -> np.ndarray:
    if len(references) == 0:
        raise InvalidInputError("need at least one reference")
    for ref in references:
        if ref.n_samples != estimate.n_samples or ref.n_channels != estimate.n_channels:
            raise InvalidInputError("references and estimate must share length and channel count")
    return np.stack([ref.samples for ref in references])


def _components(
    refs: np.ndarray,
    estimate: np.ndarray,
    target_index: int,
    filter_length: int,
    projector_all: _Projector | None = None,
) -> ErrorComponents:
    n = refs.shape[-1]
    total = n + filter_length - 1
    target = refs[target_index]

    projector_target = _Projector(target, filter_length)
    if projector_all is None:
        projector_all = _Projector(refs.reshape(-1, n), filter_length)

    p_target = projector_target.project(estimate)
    p_all = projector_all.project(estimate)

    s_true = np.zeros((refs.shape[1], total))
    s_true[:, :n] = target
    est_pad = np.zeros_like(s_true)
    est_pad[:, :n] = estimate

    return ErrorComponents(
        e_spat=p_target - s_true,
        e_interf=p_all - p_target,
        e_artif=est_pad - p_all,
        used_ridge=projector_target.used_ridge or projector_all.used_ridge,
    )


def decompose(
    references: Sequence[AudioClip],
    estimate: AudioClip,
    target_index: int,
    config: MetricConfig = MetricConfig(),
) -> ErrorComponents:
    """Split ``estimate`` into spatial, interference and artifact errors.

    ``references`` holds every true stem; ``target_index`` names the one
    the estimate is supposed to reconstruct.

    Raises
    ------
    SilentReferenceError
        If the target reference falls below the silence threshold; the
        caller should record a missing score for this window.
    """
    refs = _stacked(references, estimate)
    if not 0 <= target_index < len(references):
        raise InvalidInputError(f"target_index {target_index} out of range")
    if _mean_square(refs[target_index]) < config.silence_threshold:
        raise SilentReferenceError(f"reference {target_index} is silent in this window")
    return _components(refs, estimate.samples, target_index, config.filter_length)


def _db_ratio(num: float, den: float, cap: float) -> float:
    if num == 0.0:
        return -cap
    if den == 0.0:
        return cap
    return float(min(max(10.0 * math.log10(num / den), -cap), cap))


def _padded_target(components: ErrorComponents, reference: AudioClip) -> np.ndarray:
    total = components.e_spat.shape[-1]
    if reference.n_channels != components.e_spat.shape[0] or reference.n_samples > total:
        raise InvalidInputError("reference does not match the decomposition domain")
    s = np.zeros_like(components.e_spat)
    s[:, : reference.n_samples] = reference.samples
    return s


def _energy(x: np.ndarray) -> float:
    return float(np.sum(x**2))


def sdr(components: ErrorComponents, reference: AudioClip, db_cap: float = 300.0) -> float:
    """Ratio of target energy to total error energy, in dB."""
    s = _padded_target(components, reference)
    num = _energy(s)
    if num == 0.0:
        return math.nan
    return _db_ratio(num, _energy(components.total_error), db_cap)


def isr(components: ErrorComponents, reference: AudioClip, db_cap: float = 300.0) -> float:
    """Ratio of target energy to spatial-distortion energy, in dB."""
    s = _padded_target(components, reference)
    num = _energy(s)
    if num == 0.0:
        return math.nan
    return _db_ratio(num, _energy(components.e_spat), db_cap)


def sir(components: ErrorComponents, reference: AudioClip, db_cap: float = 300.0) -> float:
    """Ratio of spatially-distorted target energy to interference energy, in dB."""
    s = _padded_target(components, reference)
    if _energy(s) == 0.0:
        return math.nan
    return _db_ratio(_energy(s + components.e_spat), _energy(components.e_interf), db_cap)


def sar(components: ErrorComponents, reference: AudioClip, db_cap: float = 300.0) -> float:
    """Ratio of artifact-free estimate energy to artifact energy, in dB."""
    s = _padded_target(components, reference)
    if _energy(s) == 0.0:
        return math.nan
    num = _energy(s + components.e_spat + components.e_interf)
    return _db_ratio(num, _energy(components.e_artif), db_cap)


def si_sdr(estimate: AudioClip, reference: AudioClip, db_cap: float = 300.0) -> float:
    """Scale-invariant SDR: SDR against the best scalar rescaling of the reference.

    Channels are concatenated into one vector before the inner products.
    Returns NaN (missing) for a zero reference and -db_cap for a zero
    estimate.
    """
    if estimate.n_samples != reference.n_samples or estimate.n_channels != reference.n_channels:
        raise InvalidInputError("estimate and reference must share length and channel count")
    s = reference.samples.ravel()
    e = estimate.samples.ravel()
    s_energy = float(np.dot(s, s))
    if s_energy == 0.0:
        return math.nan
    if not np.any(e):
        return -db_cap
    alpha = float(np.dot(e, s)) / s_energy
    target = alpha * s
    return _db_ratio(float(np.dot(target, target)), _energy(target - e), db_cap)


@dataclass(frozen=True, eq=False)
class FrameScores:
    """Per-window metric values for one instrument; NaN marks missing windows."""

    si_sdr: np.ndarray
    sdr: np.ndarray
    sir: np.ndarray
    isr: np.ndarray
    sar: np.ndarray

    def __post_init__(self):
        lengths = {getattr(self, name).shape for name in METRICS}
        if len(lengths) != 1 or self.si_sdr.ndim != 1:
            raise InvalidInputError(f"metric arrays disagree in shape: {lengths}")

    @property
    def n_windows(self) -> int:
        return self.si_sdr.shape[0]

    def values(self, metric: str) -> np.ndarray:
        if metric not in METRICS:
            raise InvalidInputError(f"unknown metric {metric!r}")
        return getattr(self, metric)


def _window_bounds(n_samples: int, sample_rate: int, config: MetricConfig) -> list[tuple[int, int]]:
    win = int(round(config.window_length * sample_rate))
    hop = int(round(config.window_hop * sample_rate))
    if win < 1 or hop < 1:
        raise ConfigurationError("window and hop must span at least one sample")
    if n_samples < win:
        # Too short to fill one window: score the whole signal at once.
        return [(0, n_samples)]
    n_windows = (n_samples - win) // hop + 1
    return [(k * hop, k * hop + win) for k in range(n_windows)]


def framewise_scores(
    references: Sequence[AudioClip],
    estimates: Sequence[AudioClip],
    config: MetricConfig = MetricConfig(),
) -> list[FrameScores]:
    """All five metrics on every evaluation window, one FrameScores per stem.

    Windows where a stem's reference is silent are missing (NaN) for that
    stem.  references[j] and estimates[j] describe the same instrument.
    """
    if len(references) != len(estimates):
        raise InvalidInputError(
            f"{len(references)} references for {len(estimates)} estimates"
        )
    if len(references) == 0:
        raise InvalidInputError("need at least one reference/estimate pair")
    first = references[0]
    for clip in list(references) + list(estimates):
        if clip.n_samples != first.n_samples or clip.n_channels != first.n_channels:
            raise InvalidInputError("all clips must share length and channel count")

    n_sources = len(references)
    bounds = _window_bounds(first.n_samples, first.sample_rate, config)
    columns: dict[str, np.ndarray] = {
        name: np.full((n_sources, len(bounds)), math.nan) for name in METRICS
    }

    for w, (start, stop) in enumerate(bounds):
        ref_windows = [ref.window(start, stop) for ref in references]
        est_windows = [est.window(start, stop) for est in estimates]
        active = [
            j
            for j in range(n_sources)
            if _mean_square(ref_windows[j].samples) >= config.silence_threshold
        ]
        if not active:
            continue
        refs = np.stack([r.samples for r in ref_windows])
        # The full-reference projector is shared by every target in this
        # window; it dominates the cost at realistic filter lengths.
        projector_all = _Projector(refs.reshape(-1, refs.shape[-1]), config.filter_length)
        for j in active:
            comp = _components(
                refs, est_windows[j].samples, j, config.filter_length, projector_all
            )
            columns["si_sdr"][j, w] = si_sdr(est_windows[j], ref_windows[j], config.db_cap)
            columns["sdr"][j, w] = sdr(comp, ref_windows[j], config.db_cap)
            columns["sir"][j, w] = sir(comp, ref_windows[j], config.db_cap)
            columns["isr"][j, w] = isr(comp, ref_windows[j], config.db_cap)
            columns["sar"][j, w] = sar(comp, ref_windows[j], config.db_cap)

    return [
        FrameScores(**{name: columns[name][j] for name in METRICS})
        for j in range(n_sources)
    ]


def median_ignoring_missing(values: np.ndarray) -> float:
    """Median over non-missing entries; NaN when everything is missing.

    Even counts take the mean of the two middle values.
    """
    values = np.asarray(values, dtype=np.float64)
    kept = values[~np.isnan(values)]
    if kept.size == 0:
        return math.nan
    return float(np.median(kept))


def aggregate_song(frames: FrameScores) -> dict[str, float]:
    """Median over windows for each metric, skipping missing windows."""
    return {name: median_ignoring_missing(frames.values(name)) for name in METRICS}
