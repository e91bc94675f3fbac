import logging
from typing import Tuple

import numpy as np
import scipy.signal

from .Signal import Signal

log = logging.getLogger(__name__)

ENVELOPE_KINDS = ("lpc",)

# white noise correction applied to the zero lag before the recursion
LAG_ZERO_CORRECTION = 1e-9


class EnvelopeConfig:
    """Settings of the spectral envelope analysis. The envelope is an all-pole
    LPC model; envelope_kind is recorded so that other envelope models can be
    added later without changing the file formats.

    Args:
        order: the all-pole model order.
        frame_len_ms: the analysis window length in milliseconds.
        hop_ms: the distance between analysis frames in milliseconds.
        pre_emphasis: first order pre-emphasis applied before analysis only,
            0 disables it.
        envelope_kind: the envelope model, only "lpc" is available.
    """

    def __init__(
        self,
        order: int = 24,
        frame_len_ms: float = 25.0,
        hop_ms: float = 5.0,
        pre_emphasis: float = 0.0,
        envelope_kind: str = "lpc",
    ):
        self.order = order
        self.frame_len_ms = frame_len_ms
        self.hop_ms = hop_ms
        self.pre_emphasis = pre_emphasis
        self.envelope_kind = envelope_kind

    @property
    def order(self):
        return self._order

    @order.setter
    def order(self, value):
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            raise TypeError(f"EnvelopeConfig.order must be an int, not {type(value)}")
        if value < 0:
            raise ValueError(f"EnvelopeConfig.order must not be negative, not {value}")
        self._order = int(value)

    @property
    def frame_len_ms(self):
        return self._frame_len_ms

    @frame_len_ms.setter
    def frame_len_ms(self, value):
        if value <= 0:
            raise ValueError(
                f"EnvelopeConfig.frame_len_ms must be positive, not {value}")
        self._frame_len_ms = float(value)

    @property
    def hop_ms(self):
        return self._hop_ms

    @hop_ms.setter
    def hop_ms(self, value):
        if value <= 0:
            raise ValueError(f"EnvelopeConfig.hop_ms must be positive, not {value}")
        self._hop_ms = float(value)

    @property
    def pre_emphasis(self):
        return self._pre_emphasis

    @pre_emphasis.setter
    def pre_emphasis(self, value):
        if not 0 <= value < 1:
            raise ValueError(
                f"EnvelopeConfig.pre_emphasis must be in [0, 1), not {value}")
        self._pre_emphasis = float(value)

    @property
    def envelope_kind(self):
        return self._envelope_kind

    @envelope_kind.setter
    def envelope_kind(self, value):
        if value not in ENVELOPE_KINDS:
            raise ValueError(
                f"envelope_kind {value} is not supported, the following "
                f"options are available {ENVELOPE_KINDS}"
            )
        self._envelope_kind = value

    def frame_samples(self, sample_rate: int) -> int:
        return int(round(self.frame_len_ms * sample_rate / 1000))

    def hop_samples(self, sample_rate: int) -> int:
        return max(1, int(round(self.hop_ms * sample_rate / 1000)))

    def check(self, sample_rate: int):
        """Checks the config makes sense at the given sample rate"""
        frame = self.frame_samples(sample_rate)
        if not 0 < self.order < frame:
            raise ValueError(
                f"envelope order {self.order} must be between 0 and the frame "
                f"length of {frame} samples"
            )
        if self.hop_samples(sample_rate) > frame:
            raise ValueError(
                f"envelope hop {self.hop_ms} ms is longer than the frame "
                f"{self.frame_len_ms} ms"
            )


class EnvelopeTrack:
    """Per-hop all-pole envelope records. Record j describes the filter
    A(z) = 1 + a_1 z^-1 + ... + a_p z^-p centred on sample j * hop_size.

    Args:
        coefficients: array of shape (records, order + 1) with a_0 = 1.
        gains: the prediction error gain of each record.
        hop_size: the record spacing in samples.
    """

    def __init__(self, coefficients, gains, hop_size: int):
        self.coefficients = coefficients
        self.gains = gains
        self.hop_size = hop_size
        if len(self.gains) != len(self.coefficients):
            raise ValueError(
                f"EnvelopeTrack has {len(self.coefficients)} coefficient "
                f"records but {len(self.gains)} gains"
            )

    @property
    def coefficients(self):
        return self._coefficients

    @coefficients.setter
    def coefficients(self, value):
        value = np.atleast_2d(np.asarray(value, dtype=float))
        if value.shape[0] == 0:
            raise ValueError("EnvelopeTrack needs at least one record")
        if not np.allclose(value[:, 0], 1.0):
            raise ValueError("EnvelopeTrack coefficients must start with a_0 = 1")
        for index, record in enumerate(value):
            if not is_stable(record):
                raise RuntimeError(
                    f"EnvelopeTrack record {index} is not a stable all-pole filter")
        self._coefficients = value

    @property
    def gains(self):
        return self._gains

    @gains.setter
    def gains(self, value):
        value = np.asarray(value, dtype=float).reshape(-1)
        if np.any(value < 0):
            raise ValueError("EnvelopeTrack gains must not be negative")
        self._gains = value

    @property
    def hop_size(self):
        return self._hop_size

    @hop_size.setter
    def hop_size(self, value):
        if int(value) < 1:
            raise ValueError(f"EnvelopeTrack.hop_size must be positive, not {value}")
        self._hop_size = int(value)

    @property
    def order(self) -> int:
        return self._coefficients.shape[1] - 1

    def __len__(self):
        return len(self._coefficients)

    def check_covers(self, n_samples: int):
        """Raises a ValueError unless the track describes n_samples samples,
        either with one record per hop or with a single constant record."""
        expected = n_samples // self.hop_size + 1
        if len(self) not in (1, expected):
            raise ValueError(
                f"track/signal length mismatch, {n_samples} samples at hop "
                f"{self.hop_size} need {expected} envelope records but the "
                f"track has {len(self)}"
            )


def is_stable(coefficients) -> bool:
    """True when all roots of A(z) lie strictly inside the unit circle"""
    coefficients = np.trim_zeros(np.asarray(coefficients, dtype=float), "b")
    if len(coefficients) <= 1:
        return True
    return bool(np.max(np.abs(np.roots(coefficients))) < 1.0)


def levinson_durbin(autocorrelation, order: int) -> Tuple[np.ndarray, float, np.ndarray]:
    """Solves the normal equations of the autocorrelation method.

    Args:
        autocorrelation: lags 0 to order of the autocorrelation.
        order: the predictor order.

    Returns:
        the A(z) coefficients (a_0 = 1), the final prediction error energy and
        the reflection coefficients
    """

    r = np.asarray(autocorrelation, dtype=float)
    a = np.zeros(order + 1)
    a[0] = 1.0
    reflection = np.zeros(order)
    error = r[0]

    for i in range(1, order + 1):
        acc = r[i] + np.dot(a[1:i], r[i - 1:0:-1])
        k = -acc / error
        reflection[i - 1] = k
        a[1:i] = a[1:i] + k * a[i - 1:0:-1]
        a[i] = k
        error *= 1.0 - k * k

    return a, error, reflection


def lpc_analyze(frame, order: int) -> Tuple[np.ndarray, float]:
    """Autocorrelation method LPC of an already windowed frame.

    Args:
        frame: the windowed frame, longer than the order.
        order: the all-pole model order.

    Returns:
        the coefficients a_0..a_p of A(z) and the residual gain, the square
        root of the prediction error energy. A silent frame returns A(z) = 1
        and a zero gain.
    """

    frame = np.asarray(frame, dtype=float)
    if len(frame) <= order:
        raise ValueError(
            f"frame of {len(frame)} samples is too short for order {order}")

    spectrum = np.fft.rfft(frame, 2 * len(frame))
    autocorrelation = np.fft.irfft(np.abs(spectrum) ** 2)[: order + 1]

    if autocorrelation[0] <= 0.0:
        log.debug("silent frame, returning a flat envelope")
        coefficients = np.zeros(order + 1)
        coefficients[0] = 1.0
        return coefficients, 0.0

    if order > 0:
        autocorrelation[0] *= 1.0 + LAG_ZERO_CORRECTION
    coefficients, error, reflection = levinson_durbin(autocorrelation, order)

    if np.any(np.abs(reflection) >= 1.0):
        raise RuntimeError(
            "LPC analysis produced a non minimum-phase filter, reflection "
            f"coefficients {reflection}"
        )
    return coefficients, float(np.sqrt(max(error, 0.0)))


def analyze_envelope(signal: Signal, cfg: EnvelopeConfig = None) -> EnvelopeTrack:
    """Frame-by-frame LPC analysis. Frame j is centred on sample j * hop with
    zeros beyond the signal ends, so n // hop + 1 records cover n samples.

    Args:
        signal: the speech signal.
        cfg: the envelope settings, defaults to EnvelopeConfig().

    Returns:
        the envelope track of the signal
    """

    cfg = cfg or EnvelopeConfig()
    cfg.check(signal.sample_rate)
    hop = cfg.hop_samples(signal.sample_rate)
    frame_len = cfg.frame_samples(signal.sample_rate)
    window = scipy.signal.get_window("hamming", frame_len, fftbins=False)

    samples = signal.samples
    if cfg.pre_emphasis > 0:
        samples = scipy.signal.lfilter([1.0, -cfg.pre_emphasis], 1.0, samples)

    n_records = len(samples) // hop + 1
    half = frame_len // 2
    padded = np.concatenate(
        [np.zeros(half), samples, np.zeros(n_records * hop + frame_len)])

    coefficients = np.zeros((n_records, cfg.order + 1))
    gains = np.zeros(n_records)
    for j in range(n_records):
        start = j * hop
        coefficients[j], gains[j] = lpc_analyze(
            padded[start:start + frame_len] * window, cfg.order)

    return EnvelopeTrack(coefficients, gains, hop)


def _record_pairs(track: EnvelopeTrack, n_samples: int):
    """Yields (start, stop, a_left, a_right) per hop, where the filter used on
    [start, stop) fades linearly from the left to the right record."""
    hop = track.hop_size
    last = len(track) - 1
    for j in range(n_samples // hop + 1):
        start = j * hop
        stop = min(start + hop, n_samples)
        if stop <= start:
            break
        left = track.coefficients[min(j, last)]
        right = track.coefficients[min(j + 1, last)]
        yield start, stop, left, right


def inverse_filter(signal: Signal, track: EnvelopeTrack, cfg: EnvelopeConfig = None) -> Signal:
    """Applies A(z) hop by hop, cross-fading the outputs of the two records
    around each hop with triangular weights. The residual keeps its natural
    energy, the envelope gain is not divided out.

    Args:
        signal: the speech signal.
        track: the envelope track covering the signal.
        cfg: unused apart from validation, kept for symmetry with analysis.

    Returns:
        the residual signal, same length as the input
    """

    track.check_covers(len(signal))
    x = signal.samples
    order = track.order
    history = np.concatenate([np.zeros(order), x])
    residual = np.zeros(len(x))

    for start, stop, left, right in _record_pairs(track, len(x)):
        segment = history[start:stop + order]
        out_left = scipy.signal.lfilter(left, 1.0, segment)[order:]
        if np.array_equal(left, right):
            residual[start:stop] = out_left
            continue
        out_right = scipy.signal.lfilter(right, 1.0, segment)[order:]
        fade = np.arange(stop - start) / track.hop_size
        residual[start:stop] = (1.0 - fade) * out_left + fade * out_right

    return Signal(residual, signal.sample_rate)


def synth_filter(excitation: Signal, track: EnvelopeTrack, cfg: EnvelopeConfig = None) -> Signal:
    """Applies 1 / A(z) with the same per-hop interpolation as inverse_filter,
    so that synth_filter(inverse_filter(x)) reproduces x.

    Args:
        excitation: the excitation signal.
        track: the envelope track covering the excitation.
        cfg: unused apart from validation, kept for symmetry with analysis.

    Returns:
        the synthesized signal
    """

    track.check_covers(len(excitation))
    e = excitation.samples
    order = track.order
    # y[order + t] holds output sample t, the leading zeros are the initial state
    y = np.zeros(len(e) + order)

    for index, record in enumerate(track.coefficients):
        if not is_stable(record):
            raise RuntimeError(f"unstable envelope record {index}")

    for start, stop, left, right in _record_pairs(track, len(e)):
        if np.array_equal(left, right):
            past = y[start:start + order][::-1]
            zi = scipy.signal.lfiltic([1.0], left, past)
            y[start + order:stop + order] = scipy.signal.lfilter(
                [1.0], left, e[start:stop], zi=zi)[0]
            continue

        for t in range(start, stop):
            fade = (t - start) / track.hop_size
            a = (1.0 - fade) * left[1:] + fade * right[1:]
            y[t + order] = e[t] - np.dot(a, y[t + order - 1:t - 1 if t else None:-1])

    return Signal(y[order:], excitation.sample_rate)
