import logging
import struct
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np

from .Pitch import GciList
from .Signal import Signal
from .utils import frame_length, hanning_window, resample_frame

log = logging.getLogger(__name__)

MODEL_MAGIC = b"EGRS"
MODEL_VERSION = 1
# magic, version, sample_rate, m, r, k_default, f0_star
MODEL_HEADER = struct.Struct("<4sHIIIId")
MODEL_TRAILER = struct.Struct("<I")

MIN_FRAME_GAIN = 1e-6
ORTHONORMALITY_TOLERANCE = 1e-8


class ResidualFrameSet:
    """The PCA input: N pitch-synchronous residual frames of m samples, each
    normalized to unit energy, with the provenance of every frame.

    Args:
        frames: array of shape (N, m).
        sample_rate: the sample rate of the residuals the frames come from.
        f0_star: the normalized pitch that fixed m.
        utterance_ids: the utterance each frame was cut from.
        gci_indices: the GCI sample each frame is centred on.
        periods: the local period of each frame in samples.
        gains: the L2 norm of each frame before normalization.
    """

    def __init__(
        self,
        frames,
        sample_rate: int,
        f0_star: float,
        utterance_ids: Sequence[str] = None,
        gci_indices=None,
        periods=None,
        gains=None,
    ):
        frames = np.asarray(frames, dtype=float)
        if frames.ndim != 2:
            raise ValueError(
                f"ResidualFrameSet.frames must be two dimensional, not shape {frames.shape}")
        n_frames, m = frames.shape
        if m < 2 or m % 2:
            raise ValueError(f"frame length m must be even and at least 2, not {m}")
        if not np.all(np.isfinite(frames)):
            raise ValueError("ResidualFrameSet.frames must be finite")
        norms = np.linalg.norm(frames, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise ValueError("every frame of a ResidualFrameSet must have unit L2 norm")

        self.frames = frames
        self.sample_rate = int(sample_rate)
        self.f0_star = float(f0_star)
        self.utterance_ids = list(utterance_ids) if utterance_ids is not None else [""] * n_frames
        self.gci_indices = np.zeros(n_frames, dtype=int) if gci_indices is None else np.asarray(gci_indices, dtype=int)
        self.periods = np.zeros(n_frames) if periods is None else np.asarray(periods, dtype=float)
        self.gains = np.ones(n_frames) if gains is None else np.asarray(gains, dtype=float)
        for name in ("utterance_ids", "gci_indices", "periods", "gains"):
            if len(getattr(self, name)) != n_frames:
                raise ValueError(
                    f"ResidualFrameSet.{name} must have one entry per frame")
        self.skipped = 0

    @property
    def m(self) -> int:
        return self.frames.shape[1]

    def __len__(self):
        return self.frames.shape[0]

    @classmethod
    def concatenate(cls, sets: List["ResidualFrameSet"]):
        """Joins frame sets of the same m, keeping their order"""
        if not sets:
            raise ValueError("no frame sets to concatenate")
        m_values = {s.m for s in sets}
        if len(m_values) != 1:
            raise ValueError(f"cannot join frame sets of lengths {sorted(m_values)}")
        joined = cls(
            np.concatenate([s.frames for s in sets]),
            sets[0].sample_rate,
            sets[0].f0_star,
            [i for s in sets for i in s.utterance_ids],
            np.concatenate([s.gci_indices for s in sets]),
            np.concatenate([s.periods for s in sets]),
            np.concatenate([s.gains for s in sets]),
        )
        joined.skipped = sum(s.skipped for s in sets)
        return joined


def normalized_frame_length(sample_rate: int, f0_star: float) -> int:
    """m = 2 round(Fs / F0*), 280 samples for 16 kHz and F0* = 114 Hz"""
    if f0_star <= 0:
        raise ValueError(f"f0_star must be positive, not {f0_star}")
    return frame_length(sample_rate, f0_star)


def cut_frame(samples: np.ndarray, gci: int, period: float):
    """Two-period Hanning windowed frame centred on a GCI, None when the window
    runs over either end of the signal."""
    half = int(round(period))
    if half < 1 or gci - half < 0 or gci + half > len(samples):
        return None
    return samples[gci - half:gci + half] * hanning_window(2 * half)


def extract_frames(
    residual: Signal,
    gcis: GciList,
    f0_star: float,
    m: int,
    utterance_id: str = "",
) -> ResidualFrameSet:
    """Cuts a two-period Hanning windowed frame around every GCI, resamples it
    onto m points and normalizes it to unit energy.

    Args:
        residual: the LPC residual.
        gcis: the GCIs of the residual with their local periods.
        f0_star: the normalized pitch.
        m: the normalized frame length, even.
        utterance_id: recorded in the provenance of every frame.

    Returns:
        the frames, whose gains are their norms before normalization. The
        number of GCIs without a frame is stored in the skipped attribute.
    """

    if m < 2 or m % 2:
        raise ValueError(f"frame length m must be even and at least 2, not {m}")

    frames, kept, gains = [], [], []
    skipped = 0
    for position, (gci, period) in enumerate(zip(gcis.indices, gcis.periods)):
        frame = cut_frame(residual.samples, gci, period)
        if frame is None:
            skipped += 1
            continue
        frame = resample_frame(frame, m)
        gain = float(np.linalg.norm(frame))
        if gain < MIN_FRAME_GAIN:
            skipped += 1
            continue
        frames.append(frame / gain)
        kept.append(position)
        gains.append(gain)

    if skipped:
        log.info("skipped %s of %s GCIs of %s", skipped, len(gcis), utterance_id or "utterance")

    kept = np.array(kept, dtype=int)
    frame_set = ResidualFrameSet(
        np.array(frames).reshape(len(frames), m),
        residual.sample_rate,
        f0_star,
        [utterance_id] * len(frames),
        gcis.indices[kept],
        gcis.periods[kept],
        gains,
    )
    frame_set.skipped = skipped
    return frame_set


class EigenModel:
    """Mean frame and eigenresiduals of a set of normalized residual frames.

    Args:
        mean: the mean frame, m samples.
        eigenresiduals: orthonormal rows of shape (r, m), ordered by
            decreasing eigenvalue.
        eigenvalues: the r eigenvalues, non-increasing.
        f0_star: the normalized pitch in Hz.
        sample_rate: the sample rate in Hz.
        k_default: the number of eigenresiduals used by default.
        n_frames: the number of training frames, 0 when unknown.
    """

    def __init__(
        self,
        mean,
        eigenresiduals,
        eigenvalues,
        f0_star: float,
        sample_rate: int,
        k_default: int = None,
        n_frames: int = 0,
    ):
        self.mean = np.asarray(mean, dtype=float).reshape(-1)
        self.eigenresiduals = np.asarray(eigenresiduals, dtype=float).reshape(-1, len(self.mean))
        eigenvalues = np.asarray(eigenvalues, dtype=float).reshape(-1)
        if len(eigenvalues) != len(self.eigenresiduals):
            raise ValueError(
                f"EigenModel has {len(self.eigenresiduals)} eigenresiduals but "
                f"{len(eigenvalues)} eigenvalues"
            )
        if np.any(eigenvalues < -1e-12):
            raise ValueError("EigenModel eigenvalues must not be negative")
        eigenvalues = np.maximum(eigenvalues, 0.0)
        if np.any(np.diff(eigenvalues) > 1e-12 * max(1.0, eigenvalues.max(initial=0.0))):
            raise ValueError("EigenModel eigenvalues must be non-increasing")
        self.eigenvalues = eigenvalues

        gram = self.eigenresiduals @ self.eigenresiduals.T
        if np.any(np.abs(gram - np.eye(self.r)) > ORTHONORMALITY_TOLERANCE):
            raise ValueError("EigenModel eigenresiduals must be orthonormal")
        for name, values in (("mean", self.mean), ("eigenvalues", self.eigenvalues),
                             ("eigenresiduals", self.eigenresiduals)):
            if not np.all(np.isfinite(values)):
                raise ValueError(f"EigenModel {name} contain NaN or Inf")

        if f0_star <= 0:
            raise ValueError(f"EigenModel.f0_star must be positive, not {f0_star}")
        self.f0_star = float(f0_star)
        self.sample_rate = int(sample_rate)
        self.k_default = self.r if k_default is None else k_default
        self.n_frames = int(n_frames)

    @property
    def m(self) -> int:
        return len(self.mean)

    @property
    def r(self) -> int:
        return len(self.eigenresiduals)

    @property
    def k_default(self):
        return self._k_default

    @k_default.setter
    def k_default(self, value):
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            raise TypeError(f"EigenModel.k_default must be an int, not {type(value)}")
        if not 0 <= value <= self.r:
            raise ValueError(
                f"EigenModel.k_default must be in [0, {self.r}], not {value}")
        self._k_default = int(value)

    def __repr__(self):
        return (f"EigenModel(m={self.m}, r={self.r}, k_default={self.k_default}, "
                f"f0_star={self.f0_star:.3f})")


def compute_pca(frame_set: ResidualFrameSet, threshold: float = 0.75) -> EigenModel:
    """PCA of the frame set. The covariance of the mean-centred frames is
    diagonalized through the SVD of the centred data matrix, which keeps
    r = min(N - 1, m) components. Each eigenresidual is signed so that its
    largest magnitude sample is positive.

    Args:
        frame_set: at least two frames.
        threshold: information rate used to pick the default order k.

    Returns:
        the eigen model
    """

    data = frame_set.frames
    n_frames = len(data)
    if n_frames < 2:
        raise ValueError(f"PCA needs at least 2 frames, got {n_frames}")
    if not np.all(np.isfinite(data)):
        raise ValueError("PCA input contains NaN or Inf")

    mean = data.mean(axis=0)
    _, singular_values, vt = np.linalg.svd(data - mean, full_matrices=False)
    r = min(n_frames - 1, data.shape[1])
    eigenresiduals = vt[:r].copy()
    eigenvalues = singular_values[:r] ** 2 / (n_frames - 1)

    peaks = np.argmax(np.abs(eigenresiduals), axis=1)
    signs = np.sign(eigenresiduals[np.arange(r), peaks])
    eigenresiduals *= np.where(signs == 0, 1.0, signs)[:, None]

    model = EigenModel(mean, eigenresiduals, eigenvalues, frame_set.f0_star,
                       frame_set.sample_rate, n_frames=n_frames)
    model.k_default = select_k(model, threshold)
    log.info("PCA of %s frames of %s samples, r=%s k=%s",
             n_frames, model.m, model.r, model.k_default)
    return model


def information_curve(model: EigenModel) -> np.ndarray:
    """I(k) for k = 0..r, the dispersion along the first k eigenresiduals
    over the total dispersion."""
    cumulative = np.concatenate([[0.0], np.cumsum(model.eigenvalues)])
    total = cumulative[-1]
    if total <= 0:
        curve = np.ones(len(cumulative))
        curve[0] = 0.0
        return curve
    return cumulative / total


def information_rate(model: EigenModel, k: int) -> float:
    """Information rate I(k) of the first k eigenresiduals.

    Args:
        model: the eigen model.
        k: the number of eigenresiduals, 0 to r.

    Returns:
        I(k) in [0, 1]
    """

    if not 0 <= k <= model.r:
        raise ValueError(f"k must be in [0, {model.r}], not {k}")
    return float(information_curve(model)[k])


def select_k(model: EigenModel, threshold: float = 0.75) -> int:
    """Smallest k with I(k) >= threshold"""
    if not 0 < threshold <= 1:
        raise ValueError(f"threshold must be in (0, 1], not {threshold}")
    return int(np.argmax(information_curve(model) >= threshold))


def project(frame, model: EigenModel, k: int = None) -> np.ndarray:
    """PCA coefficients c_i = <frame - mean, mu_i> for i = 1..k.

    Args:
        frame: a normalized frame of m samples.
        model: the eigen model.
        k: the number of coefficients, defaults to model.k_default.

    Returns:
        the k coefficients
    """

    frame = np.asarray(frame, dtype=float)
    if len(frame) != model.m:
        raise ValueError(
            f"frame of {len(frame)} samples does not match model length {model.m}")
    k = model.k_default if k is None else k
    if not 0 <= k <= model.r:
        raise ValueError(f"k must be in [0, {model.r}], not {k}")
    return model.eigenresiduals[:k] @ (frame - model.mean)


def reconstruct(coefficients, model: EigenModel, normalize: bool = True) -> np.ndarray:
    """Frame mean + sum c_i mu_i, renormalized to unit energy unless
    normalize is False.

    Args:
        coefficients: at most r PCA coefficients.
        model: the eigen model.
        normalize: scale the frame to unit L2 norm.

    Returns:
        the m samples of the frame
    """

    coefficients = np.asarray(coefficients, dtype=float).reshape(-1)
    if len(coefficients) > model.r:
        raise ValueError(
            f"got {len(coefficients)} coefficients but the model has {model.r} "
            "eigenresiduals"
        )
    frame = model.mean + coefficients @ model.eigenresiduals[:len(coefficients)]
    if normalize:
        norm = np.linalg.norm(frame)
        if norm > 0:
            frame = frame / norm
    return frame


def save_model(model: EigenModel, path: Union[str, Path]):
    """Writes the little-endian binary model file: header, mean, eigenvalues,
    eigenresiduals (row-major) and the number of training frames."""
    header = MODEL_HEADER.pack(
        MODEL_MAGIC, MODEL_VERSION, model.sample_rate, model.m, model.r,
        model.k_default, model.f0_star)
    with open(path, "wb") as stream:
        stream.write(header)
        for values in (model.mean, model.eigenvalues, model.eigenresiduals):
            stream.write(np.ascontiguousarray(values, dtype="<f8").tobytes())
        stream.write(MODEL_TRAILER.pack(model.n_frames))


def load_model(path: Union[str, Path]) -> EigenModel:
    """Reads a model file written by save_model.

    Args:
        path: the filename of the model.

    Returns:
        the eigen model, n_frames is 0 for files without the trailer
    """

    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"model file {path} was not found")
    data = path.read_bytes()

    if data[:4] != MODEL_MAGIC:
        raise ValueError(f"{path} is not an eigenmodel file")
    if len(data) < MODEL_HEADER.size:
        raise ValueError(f"eigenmodel file {path} is truncated")
    _, version, sample_rate, m, r, k_default, f0_star = MODEL_HEADER.unpack_from(data)
    if version != MODEL_VERSION:
        raise ValueError(
            f"unsupported eigenmodel version {version} in {path}, this reader "
            f"supports version {MODEL_VERSION}"
        )

    counts = (m, r, r * m)
    payload_size = 8 * sum(counts)
    end = MODEL_HEADER.size + payload_size
    if len(data) < end:
        raise ValueError(f"eigenmodel file {path} is truncated")
    arrays = []
    offset = MODEL_HEADER.size
    for count in counts:
        arrays.append(np.frombuffer(data, dtype="<f8", count=count, offset=offset).astype(float))
        offset += 8 * count
    mean, eigenvalues, eigenresiduals = arrays
    if not all(np.all(np.isfinite(a)) for a in arrays) or not np.isfinite(f0_star):
        raise ValueError(f"eigenmodel file {path} contains NaN values")

    trailer = data[end:]
    if len(trailer) not in (0, MODEL_TRAILER.size):
        raise ValueError(f"eigenmodel file {path} has {len(trailer)} unexpected trailing bytes")
    n_frames = MODEL_TRAILER.unpack(trailer)[0] if trailer else 0

    return EigenModel(mean, eigenresiduals.reshape(r, m), eigenvalues, f0_star,
                      sample_rate, k_default, n_frames)


def write_ik_curve(model: EigenModel, path: Union[str, Path]):
    """CSV of the information rate, one row per k from 0 to r"""
    curve = information_curve(model)
    table = np.column_stack([np.arange(len(curve)), curve])
    np.savetxt(path, table, delimiter=",", header="k,I", comments="", fmt=["%d", "%.12f"])


def write_eigenresidual(model: EigenModel, index: int, path: Union[str, Path]):
    """Waveform of eigenresidual index (1-based), one sample per line"""
    if not 1 <= index <= model.r:
        raise ValueError(f"eigenresidual index must be in [1, {model.r}], not {index}")
    np.savetxt(path, model.eigenresiduals[index - 1], fmt="%.12e")
