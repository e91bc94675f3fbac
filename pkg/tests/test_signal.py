import tempfile
import unittest
from pathlib import Path

import numpy as np
from scipy.io import wavfile

import eigenres as er


class TestSignal(unittest.TestCase):
    """Tests the Signal class and the wav reader and writer"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.folder = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_signal_attributes(self):
        signal = er.Signal([0.0, 0.5, -0.5, 0.25], 16000)
        assert len(signal) == 4
        assert signal.sample_rate == 16000
        assert signal.duration == 4 / 16000
        assert signal.samples.dtype == float

    def test_incorrect_sample_rate_type(self):
        """Sets the sample rate as a float which should raise an error"""

        def incorrect_sample_rate_type():
            er.Signal([0.0, 1.0], 16000.0)

        self.assertRaises(TypeError, incorrect_sample_rate_type)

    def test_incorrect_sample_rate_value(self):
        """Sets a negative sample rate which should raise an error"""

        def incorrect_sample_rate_value():
            er.Signal([0.0, 1.0], -8000)

        self.assertRaises(ValueError, incorrect_sample_rate_value)

    def test_non_finite_samples(self):
        """Puts a NaN in the samples which should raise an error"""

        def non_finite_samples():
            er.Signal([0.0, np.nan], 16000)

        self.assertRaises(ValueError, non_finite_samples)

    def test_two_dimensional_samples(self):
        def two_dimensional_samples():
            er.Signal(np.zeros((10, 2)), 16000)

        self.assertRaises(ValueError, two_dimensional_samples)

    def test_read_wav_scaling(self):
        wavfile.write(self.folder / "three.wav", 16000, np.array([0, 16384, -32768], dtype=np.int16))
        signal = er.read_wav(self.folder / "three.wav")
        assert signal.sample_rate == 16000
        assert signal.samples.tolist() == [0.0, 0.5, -1.0]

    def test_read_wav_rejects_stereo(self):
        wavfile.write(self.folder / "stereo.wav", 16000, np.zeros((10, 2), dtype=np.int16))
        with self.assertRaisesRegex(ValueError, "unsupported channel count"):
            er.read_wav(self.folder / "stereo.wav")

    def test_read_wav_rejects_float_encoding(self):
        wavfile.write(self.folder / "float.wav", 16000, np.zeros(10, dtype=np.float32))
        with self.assertRaisesRegex(ValueError, "unsupported encoding"):
            er.read_wav(self.folder / "float.wav")

    def test_read_missing_wav(self):
        def read_missing_wav():
            er.read_wav(self.folder / "missing.wav")

        self.assertRaises(FileNotFoundError, read_missing_wav)

    def test_write_then_read_within_one_step(self):
        signal = er.Signal(np.linspace(-1, 0.99, 1001), 16000)
        er.write_wav(signal, self.folder / "ramp.wav")
        back = er.read_wav(self.folder / "ramp.wav")
        assert back.sample_rate == 16000
        assert np.max(np.abs(back.samples - signal.samples)) < 1 / 32768

    def test_write_clamps_to_largest_code(self):
        er.write_wav(er.Signal([2.0, -3.0], 16000), self.folder / "loud.wav")
        back = er.read_wav(self.folder / "loud.wav")
        assert back.samples.tolist() == [32767 / 32768, -1.0]

    def test_write_empty_signal(self):
        er.write_wav(er.Signal([], 8000), self.folder / "empty.wav")
        back = er.read_wav(self.folder / "empty.wav")
        assert len(back) == 0
        assert back.sample_rate == 8000


if __name__ == "__main__":
    unittest.main()
