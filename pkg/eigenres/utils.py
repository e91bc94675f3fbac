from functools import lru_cache
from typing import Sequence

import numpy as np


# zero crossings of the sinc kernel kept on each side of the output point
RESAMPLER_ZERO_CROSSINGS = 32
RESAMPLER_KAISER_BETA = 8.6


def hanning_window(n: int) -> np.ndarray:
    """Symmetric Hanning window w(j) = 0.5 (1 - cos(2 pi j / (n - 1))).

    Args:
        n: the window length, at least 1.

    Returns:
        the window samples. The second half mirrors the first exactly.
    """

    if n < 1:
        raise ValueError(f"window length must be at least 1, not {n}")
    if n == 1:
        return np.ones(1)

    j = np.arange(n)
    window = 0.5 - 0.5 * np.cos(2.0 * np.pi * j / (n - 1))
    return np.where(j <= (n - 1) / 2, window, window[::-1])


def frame_length(sample_rate: int, f0: float) -> int:
    """Two-period frame length 2 round(Fs / f0), always even."""

    if f0 <= 0:
        raise ValueError(f"f0 must be positive, not {f0}")
    return 2 * max(1, int(round(sample_rate / f0)))


def resample_frame(frame: Sequence[float], target_len: int) -> np.ndarray:
    """Band-limited resampling of a frame onto a new number of points. The
    index axis [0, len - 1] is mapped onto [0, target_len - 1] and each output
    point is interpolated with a Kaiser windowed sinc. When shortening the
    frame the kernel is widened so that it also acts as the anti-aliasing
    lowpass. The energy of the frame is not renormalized.

    Args:
        frame: the frame samples, at least 2 of them.
        target_len: the number of output samples, at least 2.

    Returns:
        the resampled frame of exactly target_len samples
    """

    frame = np.asarray(frame, dtype=float)
    target_len = int(target_len)
    if len(frame) < 2 or target_len < 2:
        raise ValueError(
            f"cannot resample a frame of {len(frame)} samples onto "
            f"{target_len} samples, both lengths must be at least 2"
        )
    if target_len == len(frame):
        return frame.copy()

    pad, taps, weights = _resampling_kernel(len(frame), target_len)
    # odd reflection continues the waveform smoothly across both ends
    padded = np.pad(frame, pad, mode="reflect", reflect_type="odd")
    return np.sum(weights * padded[taps], axis=1)


@lru_cache(maxsize=128)
def _resampling_kernel(source_len: int, target_len: int):
    """Banded windowed-sinc weights mapping source_len points onto target_len
    points, returned as (padding, tap indices, weights)."""

    step = (source_len - 1) / (target_len - 1)
    cutoff = min(1.0, 1.0 / step)
    half_width = RESAMPLER_ZERO_CROSSINGS / cutoff
    pad = int(np.ceil(half_width)) + 2

    positions = np.arange(target_len) * step + pad
    first = np.ceil(positions - half_width).astype(int)
    taps = first[:, None] + np.arange(int(np.floor(2 * half_width)) + 1)
    distance = positions[:, None] - taps

    ratio = np.clip(distance / half_width, -1.0, 1.0)
    taper = np.i0(RESAMPLER_KAISER_BETA * np.sqrt(1.0 - ratio ** 2))
    weights = cutoff * np.sinc(cutoff * distance) * taper / np.i0(
        RESAMPLER_KAISER_BETA)
    weights[np.abs(distance) > half_width] = 0.0

    taps.setflags(write=False)
    weights.setflags(write=False)
    return pad, taps, weights


def white_noise(n: int, seed: int) -> np.ndarray:
    """Gaussian white noise with zero mean and unit variance. Samples come
    from numpy's PCG64 generator through its ziggurat normal sampler, so the
    output is a pure function of (n, seed) on every platform.

    Args:
        n: the number of samples.
        seed: the generator seed.

    Returns:
        the noise samples
    """

    if n < 0:
        raise ValueError(f"noise length must not be negative, not {n}")
    return np.random.default_rng(seed).standard_normal(n)


def overlap_add(
    frames: Sequence[Sequence[float]],
    centers: Sequence[int],
    total_len: int,
) -> np.ndarray:
    """Overlap-adds frames at their centre sample positions. Frame sample j
    lands on output sample center - len // 2 + j and anything falling outside
    [0, total_len) is discarded.

    Args:
        frames: the frames to add.
        centers: the output sample at which each frame centre is placed,
            sorted ascending.
        total_len: the length of the output.

    Returns:
        the overlap-added samples
    """

    if len(frames) != len(centers):
        raise ValueError(
            f"got {len(frames)} frames but {len(centers)} centres")

    output = np.zeros(int(total_len))
    # accumulation in list order keeps the result bit-reproducible
    for frame, center in zip(frames, centers):
        frame = np.asarray(frame, dtype=float)
        start = int(center) - len(frame) // 2
        lo = max(start, 0)
        hi = min(start + len(frame), len(output))
        if hi <= lo:
            continue
        output[lo:hi] += frame[lo - start:hi - start]
    return output
