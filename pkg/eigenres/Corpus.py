import logging
from multiprocessing import Pool
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .EigenModel import (
    EigenModel,
    ResidualFrameSet,
    compute_pca,
    extract_frames,
    information_curve,
    normalized_frame_length,
)
from .Envelope import EnvelopeConfig, analyze_envelope, inverse_filter
from .Pitch import (
    F0Config,
    F0Track,
    GciConfig,
    GciList,
    PitchHistogram,
    build_histogram,
    detect_gci,
    normalized_pitch,
    track_f0,
)
from .Signal import Signal, read_wav

log = logging.getLogger(__name__)


class UtteranceAnalysis:
    """Residual, F0 track and GCIs of one corpus file"""

    def __init__(self, name: str, residual: Signal, f0_track: F0Track, gcis: GciList):
        self.name = name
        self.residual = residual
        self.f0_track = f0_track
        self.gcis = gcis


class TrainingReport:
    """Summary of a training run, printed by the train command"""

    def __init__(self, model: EigenModel, histogram: PitchHistogram, n_files: int,
                 skipped_files: int, skipped_frames: int):
        self.model = model
        self.histogram = histogram
        self.n_files = n_files
        self.skipped_files = skipped_files
        self.skipped_frames = skipped_frames

    def lines(self) -> List[str]:
        model = self.model
        lines = [
            f"files={self.n_files} skipped_files={self.skipped_files} "
            f"skipped_frames={self.skipped_frames}",
            f"N={model.n_frames} m={model.m} r={model.r} "
            f"f0_star={model.f0_star:.3f} k={model.k_default}",
        ]
        for k, value in enumerate(information_curve(model)):
            if k:
                lines.append(f"ik k={k} I={value:.6f}")
        return lines


def list_corpus(corpus_dir: Union[str, Path]) -> List[Path]:
    """The wav files of a corpus directory in sorted order"""
    corpus_dir = Path(corpus_dir)
    if not corpus_dir.is_dir():
        raise FileNotFoundError(f"corpus directory {corpus_dir} was not found")
    return sorted(p for p in corpus_dir.iterdir() if p.suffix.lower() == ".wav" and p.is_file())


def analyze_file(
    path: Union[str, Path],
    envelope_cfg: EnvelopeConfig = None,
    f0_cfg: F0Config = None,
    gci_cfg: GciConfig = None,
) -> Optional[UtteranceAnalysis]:
    """Envelope analysis, inverse filtering, F0 tracking and GCI detection of
    one file. Unreadable or unusable files give None and a warning."""
    path = Path(path)
    try:
        signal = read_wav(path)
        envelope = analyze_envelope(signal, envelope_cfg)
        residual = inverse_filter(signal, envelope)
        f0_track = track_f0(signal, f0_cfg)
        gcis = detect_gci(residual, f0_track, gci_cfg)
    except (ValueError, RuntimeError, OSError) as error:
        log.warning("skipping %s: %s", path.name, error)
        return None
    return UtteranceAnalysis(path.name, residual, f0_track, gcis)


def _analyze_job(job):
    return analyze_file(*job)


def train_model(
    paths: Sequence[Union[str, Path]],
    envelope_cfg: EnvelopeConfig = None,
    f0_cfg: F0Config = None,
    gci_cfg: GciConfig = None,
    bin_width_hz: float = 2.0,
    upper_mass: float = 0.8,
    threshold: float = 0.75,
    k: Union[int, str] = "auto",
    jobs: int = 1,
) -> Tuple[EigenModel, TrainingReport]:
    """Builds an eigen model from a speech corpus. Every file is analysed into
    a residual with its F0 track and GCIs; the pitch histogram of the whole
    corpus fixes F0* and the frame length m; then frames are cut around every
    GCI and their PCA is computed.

    Args:
        paths: the wav files of the corpus, all at the same sample rate.
        envelope_cfg: envelope analysis settings.
        f0_cfg: F0 tracker settings.
        gci_cfg: GCI detector settings.
        bin_width_hz: pitch histogram bin width.
        upper_mass: histogram mass wanted above F0*.
        threshold: information rate used to select k.
        k: "auto" to select k by the threshold, "all" for k = r or an int.
        jobs: number of worker processes analysing files, results are merged
            in the order of paths.

    Returns:
        the eigen model and the training report
    """

    paths = [Path(p) for p in paths]
    job_list = [(p, envelope_cfg, f0_cfg, gci_cfg) for p in paths]
    if jobs > 1 and len(paths) > 1:
        with Pool(min(jobs, len(paths))) as pool:
            analyses = pool.map(_analyze_job, job_list)
    else:
        analyses = [_analyze_job(job) for job in job_list]

    usable = [a for a in analyses if a is not None]
    if usable:
        sample_rate = usable[0].residual.sample_rate
        for analysis in usable:
            if analysis.residual.sample_rate != sample_rate:
                log.warning("skipping %s: sample rate %s Hz differs from %s Hz",
                            analysis.name, analysis.residual.sample_rate, sample_rate)
        usable = [a for a in usable if a.residual.sample_rate == sample_rate]
    skipped_files = len(paths) - len(usable)

    voiced_tracks = [a.f0_track for a in usable if np.any(a.f0_track.voiced)]
    if not voiced_tracks:
        raise ValueError("no usable frames, the corpus has no voiced speech")

    histogram = build_histogram(voiced_tracks, bin_width_hz)
    f0_star = normalized_pitch(histogram, upper_mass)
    m = normalized_frame_length(sample_rate, f0_star)
    log.info("F0*=%.2f Hz, m=%s", f0_star, m)

    frame_sets = [extract_frames(a.residual, a.gcis, f0_star, m, a.name) for a in usable]
    frame_set = ResidualFrameSet.concatenate(frame_sets)
    if len(frame_set) < 2:
        raise ValueError(f"no usable frames, only {len(frame_set)} residual frames extracted")

    model = compute_pca(frame_set, threshold)
    if k == "all":
        model.k_default = model.r
    elif k != "auto":
        model.k_default = k

    report = TrainingReport(model, histogram, len(paths), skipped_files, frame_set.skipped)
    return model, report
