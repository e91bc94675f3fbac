import logging
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
import scipy.signal

from .Signal import Signal
from .utils import hanning_window

log = logging.getLogger(__name__)

GCI_POLARITIES = ("negative", "positive", "absolute")

# frames quieter than this RMS are unvoiced whatever the utterance level
ABSOLUTE_SILENCE_RMS = 1e-5

COG_DENOMINATOR_FLOOR = 1e-12


class F0Config:
    """Settings of the autocorrelation F0 tracker.

    Args:
        f0_min: lowest accepted F0 in Hz.
        f0_max: highest accepted F0 in Hz.
        hop_ms: spacing of the F0 records in milliseconds.
        frame_ms: analysis frame length in milliseconds.
        voicing_threshold: minimum normalized autocorrelation peak of a voiced
            frame.
        silence_db: frames whose RMS is this many dB below the loudest frame
            are unvoiced.
        median_width: width of the median filter smoothing the raw track.
    """

    def __init__(
        self,
        f0_min: float = 50.0,
        f0_max: float = 400.0,
        hop_ms: float = 5.0,
        frame_ms: float = 40.0,
        voicing_threshold: float = 0.3,
        silence_db: float = -35.0,
        median_width: int = 5,
    ):
        if not 0 < f0_min < f0_max:
            raise ValueError(
                f"F0 bounds must satisfy 0 < f0_min < f0_max, got {f0_min} "
                f"and {f0_max}"
            )
        self.f0_min = float(f0_min)
        self.f0_max = float(f0_max)
        self.hop_ms = hop_ms
        self.frame_ms = frame_ms
        self.voicing_threshold = voicing_threshold
        self.silence_db = float(silence_db)
        self.median_width = median_width

    @property
    def hop_ms(self):
        return self._hop_ms

    @hop_ms.setter
    def hop_ms(self, value):
        if value <= 0:
            raise ValueError(f"F0Config.hop_ms must be positive, not {value}")
        self._hop_ms = float(value)

    @property
    def frame_ms(self):
        return self._frame_ms

    @frame_ms.setter
    def frame_ms(self, value):
        if value <= 0:
            raise ValueError(f"F0Config.frame_ms must be positive, not {value}")
        self._frame_ms = float(value)

    @property
    def voicing_threshold(self):
        return self._voicing_threshold

    @voicing_threshold.setter
    def voicing_threshold(self, value):
        if not 0 < value < 1:
            raise ValueError(
                f"F0Config.voicing_threshold must be in (0, 1), not {value}")
        self._voicing_threshold = float(value)

    @property
    def median_width(self):
        return self._median_width

    @median_width.setter
    def median_width(self, value):
        if int(value) < 1 or int(value) % 2 == 0:
            raise ValueError(
                f"F0Config.median_width must be a positive odd int, not {value}")
        self._median_width = int(value)

    def hop_samples(self, sample_rate: int) -> int:
        return max(1, int(round(self.hop_ms * sample_rate / 1000)))

    def frame_samples(self, sample_rate: int) -> int:
        return int(round(self.frame_ms * sample_rate / 1000))


class F0Track:
    """Per-hop F0 records, 0 Hz marking unvoiced records.

    Args:
        times: the record times in seconds.
        f0: the F0 of each record in Hz, 0 when unvoiced.
        hop: the record spacing in seconds.
    """

    def __init__(self, times, f0, hop: float):
        self.times = np.asarray(times, dtype=float).reshape(-1)
        self.f0 = np.asarray(f0, dtype=float).reshape(-1)
        if len(self.times) != len(self.f0):
            raise ValueError(
                f"F0Track has {len(self.times)} times but {len(self.f0)} values")
        if np.any(self.f0 < 0):
            raise ValueError("F0Track values must not be negative")
        if hop <= 0:
            raise ValueError(f"F0Track.hop must be positive, not {hop}")
        self.hop = float(hop)

    @property
    def voiced(self) -> np.ndarray:
        return self.f0 > 0

    def __len__(self):
        return len(self.f0)

    def record_index(self, time):
        """Index of the record nearest to each time (seconds)"""
        index = np.round(np.asarray(time, dtype=float) / self.hop).astype(int)
        return np.clip(index, 0, len(self) - 1)

    def f0_at(self, time):
        return self.f0[self.record_index(time)]

    def voiced_mask(self, n_samples: int, sample_rate: int) -> np.ndarray:
        """Per-sample voicing, each sample taking the nearest record"""
        if len(self) == 0:
            return np.zeros(n_samples, dtype=bool)
        return self.voiced[self.record_index(np.arange(n_samples) / sample_rate)]


def track_f0(signal: Signal, cfg: F0Config = None) -> F0Track:
    """Normalized autocorrelation F0 tracker. Each frame picks the first local
    autocorrelation peak reaching 90% of the best peak, refines it by parabolic
    interpolation and declares the frame voiced when the peak exceeds the
    voicing threshold and the frame is above the noise floor. The raw track is
    median filtered.

    Args:
        signal: the speech signal.
        cfg: the tracker settings, defaults to F0Config().

    Returns:
        the F0 track, one record per hop starting at time 0
    """

    cfg = cfg or F0Config()
    fs = signal.sample_rate
    if fs < 8 * cfg.f0_max:
        raise ValueError(
            f"sample rate {fs} Hz is too low for f0_max {cfg.f0_max} Hz")

    hop = cfg.hop_samples(fs)
    frame_len = cfg.frame_samples(fs)
    lag_min = max(2, int(np.floor(fs / cfg.f0_max)))
    lag_max = min(frame_len - 2, int(np.ceil(fs / cfg.f0_min)))
    if lag_max <= lag_min:
        raise ValueError(
            f"frame of {cfg.frame_ms} ms is too short for f0_min {cfg.f0_min} Hz")

    x = signal.samples
    n_records = len(x) // hop + 1
    padded = np.concatenate(
        [np.zeros(frame_len // 2), x, np.zeros(n_records * hop + frame_len)])
    frames = np.lib.stride_tricks.sliding_window_view(padded, frame_len)[::hop][:n_records]

    rms = np.sqrt(np.mean(frames ** 2, axis=1))
    floor = max(ABSOLUTE_SILENCE_RMS, rms.max(initial=0.0) * 10 ** (cfg.silence_db / 20))

    raw = np.zeros(n_records)
    n_fft = int(2 ** np.ceil(np.log2(2 * frame_len)))
    block = 256
    for first in range(0, n_records, block):
        chunk = frames[first:first + block]
        chunk = chunk - chunk.mean(axis=1, keepdims=True)
        correlation = _normalized_autocorrelation(chunk, n_fft, lag_max + 2)
        for row, r in enumerate(correlation):
            index = first + row
            if rms[index] <= floor:
                continue
            lag, peak = _pick_period(r, lag_min, lag_max)
            if lag is not None and peak > cfg.voicing_threshold:
                raw[index] = np.clip(fs / lag, cfg.f0_min, cfg.f0_max)

    f0 = scipy.signal.medfilt(raw, kernel_size=cfg.median_width)
    times = np.arange(n_records) * hop / fs
    log.debug("tracked %s F0 records, %s voiced", n_records, np.count_nonzero(f0))
    return F0Track(times, f0, hop / fs)


def _normalized_autocorrelation(frames: np.ndarray, n_fft: int, n_lags: int) -> np.ndarray:
    """r(t) = sum x[n] x[n+t] / sqrt(sum x[n]^2 sum x[n+t]^2) over the
    overlapping part of each frame, for lags 0 to n_lags - 1."""
    length = frames.shape[1]
    spectrum = np.fft.rfft(frames, n_fft, axis=1)
    numerator = np.fft.irfft(np.abs(spectrum) ** 2, n_fft, axis=1)[:, :n_lags]

    cumulative = np.concatenate(
        [np.zeros((len(frames), 1)), np.cumsum(frames ** 2, axis=1)], axis=1)
    lags = np.arange(n_lags)
    head = cumulative[:, length - lags]
    tail = cumulative[:, [length]] - cumulative[:, lags]
    denominator = np.sqrt(np.maximum(head * tail, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(denominator > 0, numerator / denominator, 0.0)


def _pick_period(r: np.ndarray, lag_min: int, lag_max: int) -> Tuple[float, float]:
    lags = np.arange(lag_min, lag_max + 1)
    centre = r[lags]
    peaks = lags[(centre > r[lags - 1]) & (centre >= r[lags + 1])]
    if len(peaks) == 0:
        return None, 0.0

    best = r[peaks].max()
    lag = peaks[np.argmax(r[peaks] >= 0.9 * best)]

    below, at, above = r[lag - 1], r[lag], r[lag + 1]
    curvature = below - 2 * at + above
    shift = 0.5 * (below - above) / curvature if curvature < 0 else 0.0
    return lag + shift, at


class PitchHistogram:
    """Histogram of the voiced F0 values of a speaker, P(F0).

    Args:
        edges: the bin edges in Hz.
        counts: the number of voiced records in each bin.
        f0_range: the lowest and highest voiced F0 counted.
    """

    def __init__(self, edges, counts, f0_range: Tuple[float, float]):
        self.edges = np.asarray(edges, dtype=float)
        self.counts = np.asarray(counts, dtype=float)
        if len(self.edges) != len(self.counts) + 1:
            raise ValueError("PitchHistogram needs one more edge than counts")
        if np.any(self.counts < 0):
            raise ValueError("PitchHistogram counts must not be negative")
        if self.counts.sum() <= 0:
            raise ValueError("PitchHistogram is empty")
        self.f0_range = (float(f0_range[0]), float(f0_range[1]))

    @property
    def mass(self) -> np.ndarray:
        return self.counts / self.counts.sum()

    def mass_above(self, f0: float) -> float:
        """Mass strictly above f0, spreading each bin uniformly over its width"""
        low, high = self.edges[:-1], self.edges[1:]
        fraction = np.clip((high - f0) / (high - low), 0.0, 1.0)
        return float(np.sum(self.mass * fraction))

    def quantile(self, q: float) -> float:
        """F0 below which a fraction q of the mass lies, interpolated linearly
        inside the bin. When a single bin is occupied the result is kept
        within the observed F0 range."""
        cumulative = np.concatenate([[0.0], np.cumsum(self.mass)])
        index = int(np.searchsorted(cumulative, q, side="left"))
        bin_index = min(max(index - 1, 0), len(self.counts) - 1)
        mass = self.mass[bin_index]
        fraction = (q - cumulative[bin_index]) / mass if mass > 0 else 0.0
        width = self.edges[bin_index + 1] - self.edges[bin_index]
        value = self.edges[bin_index] + np.clip(fraction, 0.0, 1.0) * width
        if np.count_nonzero(self.counts) == 1:
            value = np.clip(value, *self.f0_range)
        return float(value)

    def to_csv(self, path: Union[str, Path]):
        table = np.column_stack(
            [self.edges[:-1], self.edges[1:], self.counts, self.mass])
        np.savetxt(path, table, delimiter=",", header="f0_low,f0_high,count,mass",
                   comments="", fmt=["%.6f", "%.6f", "%d", "%.9f"])


def build_histogram(track: Union[F0Track, List[F0Track]], bin_width_hz: float = 2.0) -> PitchHistogram:
    """Histogram of the voiced records of one or several F0 tracks.

    Args:
        track: an F0Track or a list of them (a whole corpus).
        bin_width_hz: the bin width.

    Returns:
        the pitch histogram
    """

    if bin_width_hz <= 0:
        raise ValueError(f"bin_width_hz must be positive, not {bin_width_hz}")
    tracks = track if isinstance(track, (list, tuple)) else [track]
    values = np.concatenate([t.f0[t.voiced] for t in tracks] + [np.zeros(0)])
    if len(values) == 0:
        raise ValueError("cannot build a pitch histogram without voiced frames")

    low = np.floor(values.min() / bin_width_hz) * bin_width_hz
    n_bins = int(np.floor((values.max() - low) / bin_width_hz)) + 1
    edges = low + bin_width_hz * np.arange(n_bins + 1)
    counts, _ = np.histogram(values, edges)
    return PitchHistogram(edges, counts, (values.min(), values.max()))


def normalized_pitch(hist: PitchHistogram, upper_mass: float = 0.8) -> float:
    """Normalized pitch F0* such that a mass upper_mass of the voiced frames
    lies above it, so that only the remaining frames get upsampled when
    synthesized from frames normalized at F0*.

    Args:
        hist: the speaker pitch histogram.
        upper_mass: the mass wanted above F0*.

    Returns:
        F0* in Hz
    """

    if not 0 <= upper_mass <= 1:
        raise ValueError(f"upper_mass must be in [0, 1], not {upper_mass}")
    return hist.quantile(1.0 - upper_mass)


def compute_cog(signal, center: int, window_len: int) -> float:
    """Centre of gravity of the energy around a sample, in samples relative to
    the centre, using a Hanning weighting. Windows running over the signal
    ends are shortened symmetrically.

    Args:
        signal: a Signal or an array of samples.
        center: the sample index the window is centred on.
        window_len: the window length in samples.

    Returns:
        the energy centre of gravity, 0 for a silent window
    """

    samples = signal.samples if isinstance(signal, Signal) else np.asarray(signal, dtype=float)
    half = min(int(window_len) // 2, center, len(samples) - 1 - center)
    if half < 0:
        return 0.0
    offsets = np.arange(-half, half + 1)
    weights = hanning_window(2 * half + 1)
    energy = weights * samples[center - half:center + half + 1] ** 2
    denominator = energy.sum()
    if denominator < COG_DENOMINATOR_FLOOR:
        return 0.0
    return float(np.dot(offsets, energy) / denominator)


class GciConfig:
    """Settings of the centre of gravity GCI detector.

    Args:
        polarity: which residual peak marks a closure, "negative" for the
            negative-going peaks of modal voice, "positive" for inverted
            recordings, "absolute" for the largest magnitude.
        cog_periods: CoG window length in local periods.
        refine_periods: peak search radius around a CoG crossing, in periods.
        merge_periods: candidates closer than this, in periods, are merged.
    """

    def __init__(
        self,
        polarity: str = "negative",
        cog_periods: float = 1.1,
        refine_periods: float = 0.25,
        merge_periods: float = 0.5,
    ):
        self.polarity = polarity
        for name, value in (("cog_periods", cog_periods),
                            ("refine_periods", refine_periods),
                            ("merge_periods", merge_periods)):
            if value <= 0:
                raise ValueError(f"GciConfig.{name} must be positive, not {value}")
        self.cog_periods = float(cog_periods)
        self.refine_periods = float(refine_periods)
        self.merge_periods = float(merge_periods)

    @property
    def polarity(self):
        return self._polarity

    @polarity.setter
    def polarity(self, value):
        if value not in GCI_POLARITIES:
            raise ValueError(
                f"GCI polarity {value} not allowed, the following options are "
                f"supported {GCI_POLARITIES}"
            )
        self._polarity = value

    def peak_score(self, samples: np.ndarray) -> np.ndarray:
        if self.polarity == "negative":
            return -samples
        if self.polarity == "positive":
            return samples
        return np.abs(samples)


class GciList:
    """Glottal closure instants as sample indices with the local period (in
    samples) at each of them.

    Args:
        indices: strictly increasing sample indices.
        periods: the local period of each instant in samples.
        sample_rate: the sample rate of the analysed signal.
    """

    def __init__(self, indices, periods, sample_rate: int):
        self.indices = np.asarray(indices, dtype=int).reshape(-1)
        self.periods = np.asarray(periods, dtype=float).reshape(-1)
        self.sample_rate = int(sample_rate)
        if len(self.indices) != len(self.periods):
            raise ValueError(
                f"GciList has {len(self.indices)} instants but "
                f"{len(self.periods)} periods"
            )
        if np.any(np.diff(self.indices) <= 0):
            raise ValueError("GciList indices must be strictly increasing")

    def __len__(self):
        return len(self.indices)

    @property
    def times(self) -> np.ndarray:
        return self.indices / self.sample_rate

    def to_text(self, path: Union[str, Path]):
        """Writes one instant per line in seconds with 6 decimals"""
        np.savetxt(path, self.times, fmt="%.6f")

    @classmethod
    def from_text(cls, path: Union[str, Path], sample_rate: int):
        """Reads a pitch mark file, local periods are taken from the spacing"""
        times = np.atleast_1d(np.loadtxt(path, ndmin=1))
        indices = np.round(times * sample_rate).astype(int)
        if len(indices) > 1:
            spacing = np.diff(indices).astype(float)
            periods = np.concatenate([spacing[:1], spacing])
        else:
            periods = np.zeros(len(indices))
        return cls(indices, periods, sample_rate)


def _runs(mask: np.ndarray) -> List[Tuple[int, int]]:
    """Start and stop indices of the runs of True in a boolean mask"""
    edges = np.diff(np.concatenate([[0], mask.astype(np.int8), [0]]))
    return list(zip(np.flatnonzero(edges == 1), np.flatnonzero(edges == -1)))


def _cog_track(samples: np.ndarray, energy: np.ndarray, start: int, stop: int, half_lengths: np.ndarray) -> np.ndarray:
    """CoG at every sample of [start, stop), sample t using a window of half
    length half_lengths[t - start]."""
    cog = np.zeros(stop - start)
    n = len(energy)
    for half in np.unique(half_lengths):
        positions = np.flatnonzero(half_lengths == half) + start
        lo, hi = positions[0], positions[-1] + 1
        fits = (positions - half >= 0) & (positions + half < n)

        seg_lo, seg_hi = max(lo - half, 0), min(hi + half, n)
        segment = energy[seg_lo:seg_hi]
        weights = hanning_window(2 * half + 1)
        offsets = np.arange(-half, half + 1)
        # correlation with the window, output k is centred on seg_lo + half + k
        denominator = scipy.signal.fftconvolve(segment, weights[::-1], mode="valid")
        numerator = scipy.signal.fftconvolve(segment, (offsets * weights)[::-1], mode="valid")

        inside = positions[fits]
        k = inside - seg_lo - half
        with np.errstate(divide="ignore", invalid="ignore"):
            values = np.where(denominator[k] >= COG_DENOMINATOR_FLOOR,
                              numerator[k] / denominator[k], 0.0)
        cog[inside - start] = values

        for t in positions[~fits]:
            cog[t - start] = compute_cog(samples, t, 2 * half + 1)
    return cog


def detect_gci(residual: Signal, f0_track: F0Track, cfg: GciConfig = None) -> GciList:
    """Locates glottal closure instants in the voiced parts of a residual.
    The energy centre of gravity is evaluated at every voiced sample with a
    window of about 1.1 local periods; its positive to negative zero crossings
    are candidates, each moved to the strongest residual peak within a
    quarter period. Candidates closer than half a period keep the stronger
    peak.

    Args:
        residual: the LPC residual.
        f0_track: the F0 track of the same utterance.
        cfg: the detector settings, defaults to GciConfig().

    Returns:
        the detected instants, empty when nothing is voiced
    """

    cfg = cfg or GciConfig()
    fs = residual.sample_rate
    x = residual.samples
    voiced = f0_track.voiced_mask(len(x), fs)
    if not np.any(voiced):
        return GciList([], [], fs)

    f0 = f0_track.f0_at(np.arange(len(x)) / fs)
    period = np.where(voiced, fs / np.where(f0 > 0, f0, 1.0), 0.0)
    energy = x ** 2
    score = cfg.peak_score(x)

    candidates = []
    for start, stop in _runs(voiced):
        half_lengths = np.maximum(
            1, np.round(cfg.cog_periods * period[start:stop] / 2).astype(int))
        cog = _cog_track(x, energy, start, stop, half_lengths)
        crossing = np.flatnonzero((cog[:-1] > 0) & (cog[1:] <= 0))
        for i in crossing:
            t = start + i + (1 if abs(cog[i + 1]) < abs(cog[i]) else 0)
            radius = max(1, int(round(cfg.refine_periods * period[t])))
            lo, hi = max(t - radius, 0), min(t + radius + 1, len(x))
            candidates.append((lo + int(np.argmax(score[lo:hi])), period[t]))

    # a refined peak may lie outside its voiced run, keep the crossing period
    merged = []
    for candidate, local_period in sorted(candidates):
        if merged:
            last, last_period = merged[-1]
            limit = cfg.merge_periods * max(local_period, last_period)
            if candidate - last < limit or candidate == last:
                if score[candidate] > score[last]:
                    merged[-1] = (candidate, local_period)
                continue
        merged.append((candidate, local_period))

    log.debug("detected %s GCIs from %s candidates", len(merged), len(candidates))
    return GciList([c for c, _ in merged], [p for _, p in merged], fs)
