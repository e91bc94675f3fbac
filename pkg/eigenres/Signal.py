import logging
from pathlib import Path
from typing import Union

import numpy as np
from scipy.io import wavfile

log = logging.getLogger(__name__)

PCM16_SCALE = 32768.0


class Signal:
    """Mono audio samples at a known sample rate. This is the carrier passed
    between every analysis and synthesis stage.

    Args:
        samples: the sample amplitudes, nominally within [-1, 1].
        sample_rate: the sample rate in Hz.
    """

    def __init__(self, samples, sample_rate: int):
        self.samples = samples
        self.sample_rate = sample_rate

    @property
    def samples(self):
        return self._samples

    @samples.setter
    def samples(self, value):
        value = np.asarray(value, dtype=float)
        if value.ndim != 1:
            raise ValueError(
                f"Signal.samples must be one dimensional, not shape {value.shape}"
            )
        if not np.all(np.isfinite(value)):
            raise ValueError("Signal.samples must not contain NaN or Inf")
        self._samples = value

    @property
    def sample_rate(self):
        return self._sample_rate

    @sample_rate.setter
    def sample_rate(self, value):
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            raise TypeError(
                f"Signal.sample_rate must be an int, not {type(value)}")
        if value <= 0:
            raise ValueError(
                f"Signal.sample_rate must be positive, not {value}")
        self._sample_rate = int(value)

    @property
    def duration(self) -> float:
        """Length of the signal in seconds"""
        return len(self._samples) / self._sample_rate

    def __len__(self):
        return len(self._samples)

    def __repr__(self):
        return f"Signal(n={len(self)}, sample_rate={self.sample_rate})"


def read_wav(path: Union[str, Path]) -> Signal:
    """Reads a 16-bit PCM mono RIFF/WAVE file. Samples are scaled to [-1, 1)
    by dividing by 32768.

    Args:
        path: the filename of the wav file.

    Returns:
        the Signal held in the file
    """

    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"wav file {path} was not found")

    sample_rate, data = wavfile.read(path)

    if data.ndim > 1 and data.shape[1] != 1:
        raise ValueError(
            f"unsupported channel count {data.shape[1]} in {path}, only mono "
            "files are accepted"
        )
    if data.dtype != np.int16:
        raise ValueError(
            f"unsupported encoding {data.dtype} in {path}, only 16-bit PCM "
            "files are accepted"
        )

    return Signal(data.reshape(-1).astype(float) / PCM16_SCALE, int(sample_rate))


def write_wav(signal: Signal, path: Union[str, Path]):
    """Writes a Signal as a 16-bit PCM mono wav file. Values are clamped to
    [-1, 32767/32768] before quantization.

    Args:
        signal: the Signal to write.
        path: the filename of the wav file to create.
    """

    clamped = np.clip(signal.samples, -1.0, (PCM16_SCALE - 1) / PCM16_SCALE)
    if np.any(clamped != signal.samples):
        log.debug("clamped %s samples while writing %s",
                  np.count_nonzero(clamped != signal.samples), path)
    quantized = np.round(clamped * PCM16_SCALE).astype(np.int16)
    wavfile.write(Path(path), signal.sample_rate, quantized)
