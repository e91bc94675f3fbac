from .utils import frame_length, hanning_window, overlap_add, resample_frame, white_noise

from .Signal import Signal, read_wav, write_wav
from .Envelope import (
    EnvelopeConfig,
    EnvelopeTrack,
    analyze_envelope,
    inverse_filter,
    levinson_durbin,
    lpc_analyze,
    synth_filter,
)
from .Pitch import (
    F0Config,
    F0Track,
    GciConfig,
    GciList,
    PitchHistogram,
    build_histogram,
    compute_cog,
    detect_gci,
    normalized_pitch,
    track_f0,
)
from .EigenModel import (
    EigenModel,
    ResidualFrameSet,
    compute_pca,
    extract_frames,
    information_curve,
    information_rate,
    load_model,
    normalized_frame_length,
    project,
    reconstruct,
    save_model,
    select_k,
    write_eigenresidual,
    write_ik_curve,
)
from .Corpus import TrainingReport, analyze_file, list_corpus, train_model
from .Vocoder import (
    ParameterTrack,
    SynthConfig,
    UnvoicedSegment,
    analyze_utterance,
    build_excitation_eigen,
    build_excitation_pulse,
    copy_synthesis,
    load_track,
    log_spectral_distortion,
    pitch_marks,
    save_track,
    synthesize,
    write_track_csv,
)
from .Settings import RunConfig
