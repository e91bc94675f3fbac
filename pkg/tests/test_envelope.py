import unittest

import numpy as np
import scipy.signal

import eigenres as er
from tests.synthetic import SAMPLE_RATE, VOWEL_ENVELOPE, ar_noise


class TestEnvelopeConfig(unittest.TestCase):
    """Tests the validation of the envelope settings"""

    def test_default_attributes(self):
        cfg = er.EnvelopeConfig()
        assert cfg.order == 24
        assert cfg.frame_samples(16000) == 400
        assert cfg.hop_samples(16000) == 80
        assert cfg.pre_emphasis == 0.0
        assert cfg.envelope_kind == "lpc"

    def test_incorrect_order_type(self):
        def incorrect_order_type():
            er.EnvelopeConfig(order=24.5)

        self.assertRaises(TypeError, incorrect_order_type)

    def test_order_not_below_frame_length(self):
        def order_too_large():
            er.EnvelopeConfig(order=400, frame_len_ms=25).check(16000)

        self.assertRaises(ValueError, order_too_large)

    def test_hop_longer_than_frame(self):
        def hop_too_long():
            er.EnvelopeConfig(frame_len_ms=10, hop_ms=20).check(16000)

        self.assertRaises(ValueError, hop_too_long)

    def test_pre_emphasis_range(self):
        def pre_emphasis_of_one():
            er.EnvelopeConfig(pre_emphasis=1.0)

        self.assertRaises(ValueError, pre_emphasis_of_one)

    def test_unknown_envelope_kind(self):
        def unknown_envelope_kind():
            er.EnvelopeConfig(envelope_kind="mgc")

        self.assertRaises(ValueError, unknown_envelope_kind)


class TestLpcAnalyze(unittest.TestCase):
    """Tests the autocorrelation LPC analysis"""

    def test_ar2_coefficients_are_recovered(self):
        signal, _ = ar_noise([1.0, -1.3, 0.4], 100000)
        coefficients, gain = er.lpc_analyze(signal.samples, 2)
        assert coefficients[0] == 1.0
        # A(z) holds the negated predictor coefficients
        assert abs(-coefficients[1] - 1.3) < 0.02
        assert abs(-coefficients[2] + 0.4) < 0.02
        assert gain > 0

    def test_order_zero_gain_is_frame_norm(self):
        frame = er.white_noise(500, seed=9)
        coefficients, gain = er.lpc_analyze(frame, 0)
        assert coefficients.tolist() == [1.0]
        rms = np.sqrt(np.mean(frame ** 2))
        assert abs(gain - rms * np.sqrt(len(frame))) < 1e-9

    def test_white_noise_has_small_predictors(self):
        frame = er.white_noise(4096, seed=10)
        coefficients, _ = er.lpc_analyze(frame, 24)
        assert np.all(np.abs(coefficients[1:]) < 0.15)

    def test_silent_frame(self):
        coefficients, gain = er.lpc_analyze(np.zeros(400), 24)
        assert coefficients[0] == 1.0
        assert np.all(coefficients[1:] == 0)
        assert gain == 0.0

    def test_frame_shorter_than_order(self):
        def frame_shorter_than_order():
            er.lpc_analyze(np.ones(10), 24)

        self.assertRaises(ValueError, frame_shorter_than_order)

    def test_reflection_coefficients_below_one(self):
        signal, _ = ar_noise(VOWEL_ENVELOPE, 4000)
        window = scipy.signal.get_window("hamming", 400, fftbins=False)
        r = np.correlate(signal.samples[:400] * window, signal.samples[:400] * window, "full")[399:]
        _, error, reflection = er.levinson_durbin(r, 24)
        assert np.all(np.abs(reflection) < 1)
        assert error > 0


class TestEnvelopeFilters(unittest.TestCase):
    """Tests envelope analysis, inverse filtering and synthesis filtering"""

    def setUp(self):
        self.signal, self.excitation = ar_noise([1.0, -0.5, 0.2], SAMPLE_RATE)

    def test_track_covers_the_signal(self):
        track = er.analyze_envelope(self.signal)
        assert len(track) == len(self.signal) // 80 + 1
        assert track.order == 24
        assert track.hop_size == 80

    def test_length_mismatch(self):
        track = er.analyze_envelope(self.signal)

        def length_mismatch():
            er.inverse_filter(er.Signal(np.zeros(100), SAMPLE_RATE), track)

        self.assertRaisesRegex(ValueError, "length mismatch", length_mismatch)

    def test_unstable_record_is_rejected(self):
        def unstable_record():
            er.EnvelopeTrack([[1.0, -2.0]], [1.0], 80)

        self.assertRaises(RuntimeError, unstable_record)

    def test_true_envelope_gives_the_excitation(self):
        track = er.EnvelopeTrack([[1.0, -0.5, 0.2]], [1.0], 80)
        residual = er.inverse_filter(self.signal, track)
        assert np.allclose(residual.samples, self.excitation, atol=1e-9)

    def test_analysed_envelope_residual_matches_the_excitation(self):
        cfg = er.EnvelopeConfig(order=2, frame_len_ms=400)
        residual = er.inverse_filter(self.signal, er.analyze_envelope(self.signal, cfg))
        warm_up = int(0.05 * SAMPLE_RATE)
        error = residual.samples[warm_up:] - self.excitation[warm_up:]
        assert np.linalg.norm(error) / np.linalg.norm(self.excitation[warm_up:]) < 0.05

    def test_zero_signal_gives_zero_residual(self):
        silence = er.Signal(np.zeros(1600), SAMPLE_RATE)
        residual = er.inverse_filter(silence, er.analyze_envelope(silence))
        assert np.all(residual.samples == 0)

    def test_flat_envelope_is_identity(self):
        track = er.EnvelopeTrack(np.eye(1, 25).repeat(len(self.signal) // 80 + 1, axis=0),
                                 np.ones(len(self.signal) // 80 + 1), 80)
        residual = er.inverse_filter(self.signal, track)
        assert np.array_equal(residual.samples, self.signal.samples)

    def test_synthesis_inverts_the_analysis(self):
        signal, _ = ar_noise(VOWEL_ENVELOPE, SAMPLE_RATE, seed=12)
        track = er.analyze_envelope(signal)
        rebuilt = er.synth_filter(er.inverse_filter(signal, track), track)
        warm_up = track.order
        error = rebuilt.samples[warm_up:] - signal.samples[warm_up:]
        assert np.linalg.norm(error) / np.linalg.norm(signal.samples[warm_up:]) < 0.02
        assert np.max(np.abs(error)) < 1e-6

    def test_constant_envelope_filters_are_exact_inverses(self):
        track = er.EnvelopeTrack([[1.0, -1.3, 0.4]], [1.0], 80)
        rebuilt = er.synth_filter(er.inverse_filter(self.signal, track), track)
        assert np.max(np.abs(rebuilt.samples - self.signal.samples)[2:]) < 1e-9

    def test_zero_excitation_gives_zero_output(self):
        track = er.analyze_envelope(self.signal)
        output = er.synth_filter(er.Signal(np.zeros(len(self.signal)), SAMPLE_RATE), track)
        assert np.all(output.samples == 0)

    def test_impulse_response_of_one_pole(self):
        impulse = np.zeros(200)
        impulse[0] = 1.0
        track = er.EnvelopeTrack([[1.0, -0.9]], [1.0], 80)
        output = er.synth_filter(er.Signal(impulse, SAMPLE_RATE), track)
        assert np.max(np.abs(output.samples - 0.9 ** np.arange(200))) < 1e-9

    def test_analysis_is_shift_consistent(self):
        hop = 80
        delayed = er.Signal(np.concatenate([np.zeros(hop), self.signal.samples]), SAMPLE_RATE)
        original = er.analyze_envelope(self.signal)
        shifted = er.analyze_envelope(delayed)
        assert np.allclose(shifted.coefficients[1:len(original) + 1], original.coefficients,
                           atol=1e-12)

    def test_pre_emphasis_changes_the_envelope(self):
        plain = er.analyze_envelope(self.signal)
        emphasized = er.analyze_envelope(self.signal, er.EnvelopeConfig(pre_emphasis=0.97))
        assert not np.allclose(plain.coefficients, emphasized.coefficients)


if __name__ == "__main__":
    unittest.main()
