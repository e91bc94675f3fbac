import logging
import struct
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
import scipy.signal

from .EigenModel import EigenModel, extract_frames, reconstruct
from .Envelope import (
    EnvelopeConfig,
    EnvelopeTrack,
    analyze_envelope,
    inverse_filter,
    synth_filter,
)
from .Pitch import F0Config, GciConfig, detect_gci, track_f0
from .Signal import Signal
from .utils import frame_length, overlap_add, resample_frame, white_noise

log = logging.getLogger(__name__)

EXCITATION_KINDS = ("eigen", "pulse")
UNVOICED_GAIN_MODES = ("analysis", "unit")
GCI_PLACEMENTS = ("analysis", "integrate")

TRACK_MAGIC = b"EGTK"
TRACK_VERSION = 1
# magic, version, sample_rate, k, envelope order, hop_ms
TRACK_HEADER = struct.Struct("<4sHIIHf")
# n_samples, envelope records, excitation records, unvoiced segments
TRACK_COUNTS = struct.Struct("<IIII")

PEAK_LEVEL = 0.9
# a new voiced run starts when pitch marks are further apart than this, in periods
RUN_BREAK_PERIODS = 1.5

LSD_FRAME_MS = 25.0
LSD_HOP_MS = 10.0
LSD_MAX_HZ = 5000.0
LSD_POWER_FLOOR = 1e-8


class UnvoicedSegment:
    """Samples [start, end) excited by noise, with one gain per envelope hop"""

    def __init__(self, start: int, end: int, gains):
        if not 0 <= start < end:
            raise ValueError(f"UnvoicedSegment needs 0 <= start < end, got {start} and {end}")
        self.start = int(start)
        self.end = int(end)
        self.gains = np.asarray(gains, dtype=float).reshape(-1)
        if np.any(self.gains < 0):
            raise ValueError("UnvoicedSegment gains must not be negative")

    def __eq__(self, other):
        return (isinstance(other, UnvoicedSegment) and self.start == other.start
                and self.end == other.end and np.array_equal(self.gains, other.gains))

    def __repr__(self):
        return f"UnvoicedSegment(start={self.start}, end={self.end})"


class ParameterTrack:
    """Everything the vocoder needs to rebuild an utterance: the envelope
    track, one excitation record per voiced period and the unvoiced segments.

    Args:
        sample_rate: the sample rate in Hz.
        n_samples: the length of the utterance.
        envelope_cfg: the envelope settings the track was analysed with.
        envelope: the envelope track, one record per hop.
        gci_times: the GCI time of each excitation record in seconds.
        f0: the F0 of each excitation record in Hz.
        gains: the frame gain of each excitation record.
        coefficients: the PCA coefficients, shape (records, k).
        unvoiced: the unvoiced segments in time order.
    """

    def __init__(
        self,
        sample_rate: int,
        n_samples: int,
        envelope_cfg: EnvelopeConfig,
        envelope: EnvelopeTrack,
        gci_times,
        f0,
        gains,
        coefficients,
        unvoiced: List[UnvoicedSegment] = (),
    ):
        self.sample_rate = int(sample_rate)
        self.n_samples = int(n_samples)
        self.envelope_cfg = envelope_cfg
        self.envelope = envelope
        self.gci_times = np.asarray(gci_times, dtype=float).reshape(-1)
        self.f0 = np.asarray(f0, dtype=float).reshape(-1)
        self.gains = np.asarray(gains, dtype=float).reshape(-1)
        self.coefficients = np.asarray(coefficients, dtype=float)
        self.unvoiced = list(unvoiced)

        if self.coefficients.ndim != 2 or len(self.coefficients) != len(self.gci_times):
            raise ValueError(
                "ParameterTrack coefficients must have shape (records, k), not "
                f"{self.coefficients.shape}")
        if not len(self.gci_times) == len(self.f0) == len(self.gains):
            raise ValueError("ParameterTrack records need one time, f0 and gain each")
        if np.any(np.diff(self.gci_times) <= 0):
            raise ValueError("ParameterTrack gci_times must be strictly increasing")
        if np.any(self.f0 <= 0):
            raise ValueError("ParameterTrack f0 values must be positive")
        if np.any(self.gains < 0):
            raise ValueError("ParameterTrack gains must not be negative")
        if any(s.end > self.n_samples for s in self.unvoiced):
            raise ValueError("ParameterTrack unvoiced segments run past the utterance end")
        envelope.check_covers(self.n_samples)

    @property
    def k(self) -> int:
        return self.coefficients.shape[1]

    @property
    def hop_size(self) -> int:
        return self.envelope.hop_size

    def __len__(self):
        return len(self.gci_times)

    def voiced_mask(self) -> np.ndarray:
        """Per-sample flag, True outside the unvoiced segments"""
        mask = np.ones(self.n_samples, dtype=bool)
        for segment in self.unvoiced:
            mask[segment.start:segment.end] = False
        return mask


class SynthConfig:
    """Synthesis settings.

    Args:
        noise_seed: seed of the unvoiced white noise.
        unvoiced_gain_mode: "analysis" scales the noise by the analysed
            per-hop gains, "unit" uses unit variance noise.
        excitation_kind: "eigen" or "pulse".
        gci_placement: "analysis" puts frames at the stored GCI times,
            "integrate" derives pitch marks from the F0 values.
        crossfade_ms: length of the voiced/unvoiced cross-fade.
    """

    def __init__(
        self,
        noise_seed: int = 0,
        unvoiced_gain_mode: str = "analysis",
        excitation_kind: str = "eigen",
        gci_placement: str = "analysis",
        crossfade_ms: float = 2.0,
    ):
        self.noise_seed = noise_seed
        self.unvoiced_gain_mode = unvoiced_gain_mode
        self.excitation_kind = excitation_kind
        self.gci_placement = gci_placement
        if crossfade_ms < 0:
            raise ValueError(f"SynthConfig.crossfade_ms must not be negative, not {crossfade_ms}")
        self.crossfade_ms = float(crossfade_ms)

    @property
    def noise_seed(self):
        return self._noise_seed

    @noise_seed.setter
    def noise_seed(self, value):
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            raise TypeError(f"SynthConfig.noise_seed must be an int, not {type(value)}")
        if value < 0:
            raise ValueError(f"SynthConfig.noise_seed must not be negative, not {value}")
        self._noise_seed = int(value)

    @property
    def unvoiced_gain_mode(self):
        return self._unvoiced_gain_mode

    @unvoiced_gain_mode.setter
    def unvoiced_gain_mode(self, value):
        if value not in UNVOICED_GAIN_MODES:
            raise ValueError(
                f"SynthConfig.unvoiced_gain_mode {value} not allowed, the "
                f"following options are supported {UNVOICED_GAIN_MODES}")
        self._unvoiced_gain_mode = value

    @property
    def excitation_kind(self):
        return self._excitation_kind

    @excitation_kind.setter
    def excitation_kind(self, value):
        if value not in EXCITATION_KINDS:
            raise ValueError(
                f"SynthConfig.excitation_kind {value} not allowed, the "
                f"following options are supported {EXCITATION_KINDS}")
        self._excitation_kind = value

    @property
    def gci_placement(self):
        return self._gci_placement

    @gci_placement.setter
    def gci_placement(self, value):
        if value not in GCI_PLACEMENTS:
            raise ValueError(
                f"SynthConfig.gci_placement {value} not allowed, the "
                f"following options are supported {GCI_PLACEMENTS}")
        self._gci_placement = value


def _runs(mask: np.ndarray) -> List[Tuple[int, int]]:
    edges = np.diff(np.concatenate([[0], mask.astype(np.int8), [0]]))
    return list(zip(np.flatnonzero(edges == 1), np.flatnonzero(edges == -1)))


def _segment_gains(residual: np.ndarray, start: int, end: int, hop: int) -> np.ndarray:
    bounds = np.arange(start, end, hop)
    return np.array([np.sqrt(np.mean(residual[b:min(b + hop, end)] ** 2)) for b in bounds])


def analyze_utterance(
    signal: Signal,
    model: EigenModel,
    envelope_cfg: EnvelopeConfig = None,
    f0_cfg: F0Config = None,
    gci_cfg: GciConfig = None,
) -> ParameterTrack:
    """Analyses an utterance into a ParameterTrack: envelope analysis, inverse
    filtering, F0 tracking, GCI detection, frame extraction and projection on
    the model's first k_default eigenresiduals. Unvoiced stretches keep the
    residual RMS of every envelope hop.

    Args:
        signal: the speech signal, at the model's sample rate.
        model: the eigen model.
        envelope_cfg: envelope analysis settings.
        f0_cfg: F0 tracker settings.
        gci_cfg: GCI detector settings.

    Returns:
        the parameter track
    """

    if signal.sample_rate != model.sample_rate:
        raise ValueError(
            f"sample rate mismatch, the signal is at {signal.sample_rate} Hz "
            f"and the model at {model.sample_rate} Hz"
        )
    envelope_cfg = envelope_cfg or EnvelopeConfig()
    fs = signal.sample_rate

    envelope = analyze_envelope(signal, envelope_cfg)
    residual = inverse_filter(signal, envelope)
    f0_track = track_f0(signal, f0_cfg)
    gcis = detect_gci(residual, f0_track, gci_cfg)
    frames = extract_frames(residual, gcis, model.f0_star, model.m)

    k = model.k_default
    coefficients = (frames.frames - model.mean) @ model.eigenresiduals[:k].T

    unvoiced_mask = ~f0_track.voiced_mask(len(signal), fs)
    unvoiced = [
        UnvoicedSegment(start, end, _segment_gains(residual.samples, start, end, envelope.hop_size))
        for start, end in _runs(unvoiced_mask)
    ]
    log.debug("analysed %s excitation records and %s unvoiced segments",
              len(frames), len(unvoiced))

    return ParameterTrack(
        fs, len(signal), envelope_cfg, envelope,
        frames.gci_indices / fs, fs / frames.periods, frames.gains,
        coefficients.reshape(len(frames), k), unvoiced,
    )


def pitch_marks(track: ParameterTrack, cfg: SynthConfig) -> List[Tuple[int, int]]:
    """Sample position of every voiced frame with the excitation record that
    supplies its f0, gain and coefficients.

    With analysis placement the stored GCI times are used. With integrate
    placement marks are laid every Fs / f0 samples from the first record of
    each voiced run, f0 interpolated linearly between records and the other
    parameters taken from the nearest record.
    """

    fs = track.sample_rate
    if cfg.gci_placement == "analysis":
        positions = np.round(track.gci_times * fs).astype(int)
        return [(p, i) for i, p in enumerate(positions) if 0 <= p < track.n_samples]

    marks = []
    times = track.gci_times * fs
    breaks = np.flatnonzero(np.diff(times) > RUN_BREAK_PERIODS * fs / track.f0[:-1]) + 1
    for run in np.split(np.arange(len(track)), breaks):
        if len(run) == 0:
            continue
        run_times, run_f0 = times[run], track.f0[run]
        position = run_times[0]
        end = run_times[-1] + 0.5 * fs / run_f0[-1]
        while position <= end and position < track.n_samples:
            f0 = np.interp(position, run_times, run_f0)
            nearest = run[np.argmin(np.abs(run_times - position))]
            marks.append((int(round(position)), nearest))
            position += fs / f0
    return marks


def _unvoiced_weight(track: ParameterTrack, cfg: SynthConfig) -> np.ndarray:
    """1 inside unvoiced segments and 0 elsewhere, with linear ramps of
    crossfade_ms centred on every boundary."""
    indicator = (~track.voiced_mask()).astype(float)
    width = int(round(cfg.crossfade_ms * track.sample_rate / 1000))
    if width < 2 or not len(indicator):
        return indicator
    return np.clip(np.convolve(indicator, np.ones(width) / width, mode="same"), 0.0, 1.0)


def unvoiced_excitation(track: ParameterTrack, cfg: SynthConfig) -> np.ndarray:
    """Seeded white noise scaled by the unvoiced gains and faded in and out at
    the segment boundaries. Identical for both excitation kinds."""
    gain = np.zeros(track.n_samples)
    for segment in track.unvoiced:
        if cfg.unvoiced_gain_mode == "unit":
            gain[segment.start:segment.end] = 1.0
            continue
        hops = (np.arange(segment.start, segment.end) - segment.start) // track.hop_size
        gain[segment.start:segment.end] = segment.gains[np.minimum(hops, len(segment.gains) - 1)]

    # the fade-out past a segment edge keeps the gain of that edge
    width = int(round(cfg.crossfade_ms * track.sample_rate / 1000))
    for segment in track.unvoiced:
        lo, hi = max(segment.start - width, 0), min(segment.end + width, track.n_samples)
        gain[lo:segment.start] = np.maximum(gain[lo:segment.start], gain[segment.start])
        gain[segment.end:hi] = np.maximum(gain[segment.end:hi], gain[segment.end - 1])

    noise = white_noise(track.n_samples, cfg.noise_seed)
    return noise * gain * _unvoiced_weight(track, cfg)


def _voiced_weight(track: ParameterTrack, cfg: SynthConfig) -> np.ndarray:
    return 1.0 - _unvoiced_weight(track, cfg)


def build_excitation_eigen(track: ParameterTrack, model: EigenModel, cfg: SynthConfig = None) -> Signal:
    """Eigenresidual excitation. Every voiced frame is rebuilt from its PCA
    coefficients, resampled from m to two target periods 2 round(Fs / f0),
    brought back to unit energy, scaled by its gain and overlap-added at its
    pitch mark; unvoiced segments get white noise.

    Args:
        track: the parameter track.
        model: the eigen model the coefficients refer to.
        cfg: synthesis settings, defaults to SynthConfig().

    Returns:
        the excitation signal
    """

    cfg = cfg or SynthConfig()
    if track.k > model.r:
        raise ValueError(
            f"track has {track.k} PCA coefficients but the model only {model.r} eigenresiduals")
    if track.sample_rate != model.sample_rate:
        raise ValueError(
            f"sample rate mismatch, the track is at {track.sample_rate} Hz and "
            f"the model at {model.sample_rate} Hz"
        )
    if track.n_samples == 0:
        return Signal(np.zeros(0), track.sample_rate)

    fs = track.sample_rate
    frames, centers = [], []
    clamped = 0
    for position, record in pitch_marks(track, cfg):
        length = frame_length(fs, track.f0[record])
        if length > 2 * model.m:
            clamped += 1
            length = 2 * model.m
        frame = resample_frame(reconstruct(track.coefficients[record], model), length)
        # unit energy at every period so that a frame carries gain^2
        norm = np.linalg.norm(frame)
        if norm > 0:
            frame = frame / norm
        frames.append(frame * track.gains[record])
        centers.append(position)
    if clamped:
        log.warning("%s frames had f0 below F0*/2 and were clamped to a period of %s samples",
                    clamped, model.m)

    voiced = overlap_add(frames, centers, track.n_samples)
    excitation = voiced * _voiced_weight(track, cfg) + unvoiced_excitation(track, cfg)
    return Signal(excitation, fs)


def build_excitation_pulse(track: ParameterTrack, cfg: SynthConfig = None) -> Signal:
    """Pulse train baseline: an impulse of amplitude gain at every pitch mark,
    unvoiced segments as for the eigen excitation."""
    cfg = cfg or SynthConfig()
    voiced = np.zeros(track.n_samples)
    for position, record in pitch_marks(track, cfg):
        voiced[position] += track.gains[record]
    excitation = voiced * _voiced_weight(track, cfg) + unvoiced_excitation(track, cfg)
    return Signal(excitation, track.sample_rate)


def synthesize(track: ParameterTrack, model: EigenModel = None, cfg: SynthConfig = None) -> Signal:
    """Builds the excitation of the configured kind and filters it through the
    envelope. Output that would clip is scaled to a peak of 0.9.

    Args:
        track: the parameter track.
        model: the eigen model, required by the eigen excitation.
        cfg: synthesis settings, defaults to SynthConfig().

    Returns:
        the synthesized speech
    """

    cfg = cfg or SynthConfig()
    if cfg.excitation_kind == "eigen":
        if model is None:
            raise ValueError("eigen excitation needs a model")
        excitation = build_excitation_eigen(track, model, cfg)
    else:
        excitation = build_excitation_pulse(track, cfg)

    speech = synth_filter(excitation, track.envelope, track.envelope_cfg)
    peak = np.max(np.abs(speech.samples), initial=0.0)
    if peak >= 1.0:
        log.warning("synthesized speech peaks at %.3f, normalizing to %s", peak, PEAK_LEVEL)
        speech = Signal(speech.samples * (PEAK_LEVEL / peak), speech.sample_rate)
    return speech


def log_spectral_distortion(a: Signal, b: Signal, voiced_mask=None) -> float:
    """Mean over 25 ms frames of the RMS difference, over 0 to 5 kHz, between
    the dB power spectra of two signals. The power of each frame of b is
    scaled to that of a, and powers are floored at -80 dB.

    Args:
        a: the reference signal.
        b: the signal compared, same length and sample rate.
        voiced_mask: per-sample flags, only frames whose centre is flagged are
            used; all frames when None.

    Returns:
        the distortion in dB
    """

    if len(a) != len(b):
        raise ValueError(f"length mismatch, {len(a)} and {len(b)} samples")
    if a.sample_rate != b.sample_rate:
        raise ValueError(
            f"sample rate mismatch, {a.sample_rate} Hz and {b.sample_rate} Hz")

    fs = a.sample_rate
    frame_len = int(round(LSD_FRAME_MS * fs / 1000))
    hop = int(round(LSD_HOP_MS * fs / 1000))
    if len(a) < frame_len:
        log.warning("signals shorter than one %s ms frame, distortion is 0", LSD_FRAME_MS)
        return 0.0

    starts = np.arange(0, len(a) - frame_len + 1, hop)
    centers = starts + frame_len // 2
    if voiced_mask is not None:
        voiced_mask = np.asarray(voiced_mask, dtype=bool)
        if len(voiced_mask) != len(a):
            raise ValueError("voiced_mask must have one flag per sample")
        starts = starts[voiced_mask[centers]]
    if len(starts) == 0:
        log.warning("no voiced frames to compare, distortion is 0")
        return 0.0

    window = scipy.signal.get_window("hann", frame_len)
    n_fft = int(2 ** np.ceil(np.log2(frame_len)))
    bins = np.fft.rfftfreq(n_fft, 1.0 / fs) <= LSD_MAX_HZ
    taps = starts[:, None] + np.arange(frame_len)

    power_a = np.abs(np.fft.rfft(a.samples[taps] * window, n_fft, axis=1)[:, bins]) ** 2
    power_b = np.abs(np.fft.rfft(b.samples[taps] * window, n_fft, axis=1)[:, bins]) ** 2
    total_a = power_a.sum(axis=1, keepdims=True)
    total_b = power_b.sum(axis=1, keepdims=True)
    scale = np.divide(total_a, total_b, out=np.ones_like(total_a), where=(total_a > 0) & (total_b > 0))
    power_b = power_b * scale

    level_a = 10 * np.log10(np.maximum(power_a, LSD_POWER_FLOOR))
    level_b = 10 * np.log10(np.maximum(power_b, LSD_POWER_FLOOR))
    per_frame = np.sqrt(np.mean((level_a - level_b) ** 2, axis=1))
    return float(per_frame.mean())


def copy_synthesis(
    signal: Signal,
    model: EigenModel,
    envelope_cfg: EnvelopeConfig = None,
    f0_cfg: F0Config = None,
    gci_cfg: GciConfig = None,
    cfg: SynthConfig = None,
):
    """Analyses an utterance and resynthesizes it with both excitations.

    Returns:
        the track, the eigen and pulse syntheses, and their distortions from
        the original over the voiced frames
    """

    cfg = cfg or SynthConfig()
    track = analyze_utterance(signal, model, envelope_cfg, f0_cfg, gci_cfg)
    outputs = {}
    for kind in EXCITATION_KINDS:
        kind_cfg = SynthConfig(cfg.noise_seed, cfg.unvoiced_gain_mode, kind,
                               cfg.gci_placement, cfg.crossfade_ms)
        outputs[kind] = synthesize(track, model, kind_cfg)
    mask = track.voiced_mask()
    lsd_eigen = log_spectral_distortion(signal, outputs["eigen"], mask)
    lsd_pulse = log_spectral_distortion(signal, outputs["pulse"], mask)
    return track, outputs["eigen"], outputs["pulse"], lsd_eigen, lsd_pulse


def save_track(track: ParameterTrack, path: Union[str, Path]):
    """Writes the little-endian binary track file. After the header and the
    counts come, all as f64: the envelope coefficients and gains, the GCI
    times, f0 values, gains and PCA coefficients of the excitation records,
    the (start, end) pairs of the unvoiced segments and their gains."""
    segments = np.array([[s.start, s.end] for s in track.unvoiced], dtype=float).reshape(-1, 2)
    unvoiced_gains = np.concatenate([s.gains for s in track.unvoiced] + [np.zeros(0)])
    with open(path, "wb") as stream:
        stream.write(TRACK_HEADER.pack(
            TRACK_MAGIC, TRACK_VERSION, track.sample_rate, track.k,
            track.envelope.order, track.envelope_cfg.hop_ms))
        stream.write(TRACK_COUNTS.pack(
            track.n_samples, len(track.envelope), len(track), len(track.unvoiced)))
        for values in (track.envelope.coefficients, track.envelope.gains, track.gci_times,
                       track.f0, track.gains, track.coefficients, segments, unvoiced_gains):
            stream.write(np.ascontiguousarray(values, dtype="<f8").tobytes())


def load_track(path: Union[str, Path]) -> ParameterTrack:
    """Reads a track file written by save_track"""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"track file {path} was not found")
    data = path.read_bytes()
    if data[:4] != TRACK_MAGIC:
        raise ValueError(f"{path} is not a parameter track file")
    if len(data) < TRACK_HEADER.size + TRACK_COUNTS.size:
        raise ValueError(f"parameter track file {path} is truncated")
    _, version, sample_rate, k, order, hop_ms = TRACK_HEADER.unpack_from(data)
    if version != TRACK_VERSION:
        raise ValueError(
            f"unsupported parameter track version {version} in {path}, this "
            f"reader supports version {TRACK_VERSION}"
        )
    n_samples, n_envelope, n_records, n_segments = TRACK_COUNTS.unpack_from(data, TRACK_HEADER.size)
    offset = TRACK_HEADER.size + TRACK_COUNTS.size

    def take(count):
        nonlocal offset
        if offset + 8 * count > len(data):
            raise ValueError(f"parameter track file {path} is truncated")
        values = np.frombuffer(data, dtype="<f8", count=count, offset=offset).astype(float)
        offset += 8 * count
        if not np.all(np.isfinite(values)):
            raise ValueError(f"parameter track file {path} contains NaN values")
        return values

    envelope_coefficients = take(n_envelope * (order + 1)).reshape(n_envelope, order + 1)
    envelope_gains = take(n_envelope)
    gci_times = take(n_records)
    f0 = take(n_records)
    gains = take(n_records)
    coefficients = take(n_records * k).reshape(n_records, k)
    segments = take(2 * n_segments).reshape(n_segments, 2).astype(int)

    envelope_cfg = EnvelopeConfig(order=order, hop_ms=float(hop_ms))
    envelope = EnvelopeTrack(envelope_coefficients, envelope_gains,
                             envelope_cfg.hop_samples(sample_rate))
    unvoiced = []
    for start, end in segments:
        n_gains = -(-(end - start) // envelope.hop_size)
        unvoiced.append(UnvoicedSegment(start, end, take(n_gains)))
    if offset != len(data):
        raise ValueError(f"parameter track file {path} has unexpected trailing bytes")

    return ParameterTrack(sample_rate, n_samples, envelope_cfg, envelope, gci_times,
                          f0, gains, coefficients, unvoiced)


def _regression_deltas(values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """First and second order regression deltas along the records, windows
    [-1, 0, 1] / 2 and [1, -2, 1] with the edge records repeated."""
    padded = np.pad(values, [(1, 1)] + [(0, 0)] * (values.ndim - 1), mode="edge")
    delta = 0.5 * (padded[2:] - padded[:-2])
    delta2 = padded[2:] - 2 * padded[1:-1] + padded[:-2]
    return delta, delta2


def write_track_csv(track: ParameterTrack, path: Union[str, Path], deltas: bool = False):
    """CSV with one row per excitation record: time, f0, gain and the PCA
    coefficients, plus log-F0 and delta features when deltas is True."""
    names = ["time", "f0", "gain"] + [f"c{i + 1}" for i in range(track.k)]
    columns = [track.gci_times[:, None], track.f0[:, None], track.gains[:, None], track.coefficients]
    if deltas:
        log_f0 = np.log(track.f0)[:, None]
        d_lf0, dd_lf0 = _regression_deltas(log_f0)
        d_c, dd_c = _regression_deltas(track.coefficients)
        names += ["lf0", "d_lf0", "dd_lf0"]
        names += [f"d_c{i + 1}" for i in range(track.k)] + [f"dd_c{i + 1}" for i in range(track.k)]
        columns += [log_f0, d_lf0, dd_lf0, d_c, dd_c]
    table = np.hstack(columns).reshape(len(track), len(names))
    np.savetxt(path, table, delimiter=",", header=",".join(names), comments="", fmt="%.9g")
