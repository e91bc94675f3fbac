import tempfile
import unittest
from pathlib import Path

import numpy as np
import scipy.signal

import eigenres as er
from tests.synthetic import SAMPLE_RATE, glottal_vowel, pulse_vowel


def flat_envelope():
    return er.EnvelopeTrack([[1.0, 0.0]], [1.0], 80)


def noise_model(f0_star=100.0, n_frames=40, seed=0):
    m = er.normalized_frame_length(SAMPLE_RATE, f0_star)
    frames = er.white_noise(n_frames * m, seed).reshape(n_frames, m)
    frames /= np.linalg.norm(frames, axis=1, keepdims=True)
    return er.compute_pca(er.ResidualFrameSet(frames, SAMPLE_RATE, f0_star))


def impulse_model(f0_star=120.0, n_pairs=20, seed=5):
    """Model whose mean frame is a negative impulse at the frame centre: the
    frames come in pairs -delta + n and -delta - n with n zero at the centre"""
    m = er.normalized_frame_length(SAMPLE_RATE, f0_star)
    spike = np.zeros(m)
    spike[m // 2] = -1.0
    frames = []
    for pair in range(n_pairs):
        noise = er.white_noise(m, seed + pair)
        noise[m // 2] = 0.0
        noise /= np.linalg.norm(noise)
        for sign in (1.0, -1.0):
            frame = spike + sign * noise
            frames.append(frame / np.linalg.norm(frame))
    return er.compute_pca(er.ResidualFrameSet(np.array(frames), SAMPLE_RATE, f0_star))


def make_track(times, f0=100.0, gains=1.0, k=0, n_samples=SAMPLE_RATE, unvoiced=(),
               sample_rate=SAMPLE_RATE):
    times = np.asarray(times, dtype=float)
    return er.ParameterTrack(
        sample_rate, n_samples, er.EnvelopeConfig(order=1), flat_envelope(), times,
        np.broadcast_to(float(f0), times.shape) if np.ndim(f0) == 0 else f0,
        np.broadcast_to(float(gains), times.shape) if np.ndim(gains) == 0 else gains,
        np.zeros((len(times), k)), unvoiced)


def autocorrelation_peak(samples, lag_min, lag_max):
    """Lag and value of the largest normalized autocorrelation in the range"""
    values = []
    for lag in range(lag_min, lag_max + 1):
        head, tail = samples[:-lag], samples[lag:]
        values.append(np.dot(head, tail) / np.sqrt(np.dot(head, head) * np.dot(tail, tail)))
    best = int(np.argmax(values))
    return lag_min + best, values[best]


class TestParameterTrack(unittest.TestCase):
    """Tests the validation of the parameter track"""

    def test_track_attributes(self):
        track = make_track([0.01, 0.02], k=3)
        assert len(track) == 2
        assert track.k == 3
        assert track.hop_size == 80
        assert np.all(track.voiced_mask())

    def test_times_must_increase(self):
        def times_must_increase():
            make_track([0.02, 0.01])

        self.assertRaises(ValueError, times_must_increase)

    def test_segment_past_the_end(self):
        def segment_past_the_end():
            make_track([0.01], n_samples=1000, unvoiced=[er.UnvoicedSegment(900, 1100, [1.0] * 3)])

        self.assertRaises(ValueError, segment_past_the_end)

    def test_empty_segment(self):
        def empty_segment():
            er.UnvoicedSegment(100, 100, [])

        self.assertRaises(ValueError, empty_segment)

    def test_unknown_excitation_kind(self):
        def unknown_excitation_kind():
            er.SynthConfig(excitation_kind="lf")

        self.assertRaises(ValueError, unknown_excitation_kind)

    def test_incorrect_seed_type(self):
        def incorrect_seed_type():
            er.SynthConfig(noise_seed=1.5)

        self.assertRaises(TypeError, incorrect_seed_type)


class TestPitchMarks(unittest.TestCase):
    """Tests the placement of the voiced frames"""

    def test_analysis_placement_uses_the_gci_times(self):
        track = make_track([0.01, 0.02, 0.03])
        marks = er.pitch_marks(track, er.SynthConfig())
        assert marks == [(160, 0), (320, 1), (480, 2)]

    def test_integrated_marks_match_a_constant_pitch(self):
        track = make_track(np.arange(1, 11) * 0.01)
        analysis = er.pitch_marks(track, er.SynthConfig())
        integrated = er.pitch_marks(track, er.SynthConfig(gci_placement="integrate"))
        assert [p for p, _ in integrated] == [p for p, _ in analysis]

    def test_integrated_marks_follow_the_f0(self):
        track = make_track(np.arange(1, 11) * 0.01, f0=125.0)
        integrated = er.pitch_marks(track, er.SynthConfig(gci_placement="integrate"))
        spacing = np.diff([p for p, _ in integrated])
        assert np.all(spacing == 128)

    def test_integrated_marks_stop_between_voiced_runs(self):
        times = np.concatenate([np.arange(1, 6), np.arange(50, 56)]) * 0.01
        track = make_track(times)
        integrated = er.pitch_marks(track, er.SynthConfig(gci_placement="integrate"))
        positions = np.array([p for p, _ in integrated])
        assert not np.any((positions > 1000) & (positions < 7900))


class TestExcitation(unittest.TestCase):
    """Tests the eigenresidual and pulse train excitations"""

    def setUp(self):
        self.model = noise_model()

    def test_pulse_excitation_places_scaled_impulses(self):
        track = make_track([0.01, 0.02, 0.03], gains=np.array([1.0, 2.0, 0.5]), n_samples=800)
        excitation = er.build_excitation_pulse(track).samples
        assert np.flatnonzero(excitation).tolist() == [160, 320, 480]
        assert excitation[[160, 320, 480]].tolist() == [1.0, 2.0, 0.5]

    def test_pulse_train_at_one_hundred_hertz(self):
        track = make_track(np.arange(1, 99) * 0.01)
        excitation = er.build_excitation_pulse(track).samples
        assert np.all(np.diff(np.flatnonzero(excitation)) == 160)

    def test_single_record_is_the_resampled_mean(self):
        track = make_track([0.05], gains=3.0, k=2, n_samples=1600)
        excitation = er.build_excitation_eigen(track, self.model).samples
        mean = er.resample_frame(self.model.mean / np.linalg.norm(self.model.mean), 320)
        expected = 3.0 * mean / np.linalg.norm(mean)
        assert np.allclose(excitation[640:960], expected, atol=1e-12)
        assert abs(np.sum(excitation ** 2) - 9.0) < 1e-9
        assert np.all(excitation[:640] == 0)
        assert np.all(excitation[960:] == 0)

    def test_excitation_is_linear_in_the_gains(self):
        single = make_track(np.arange(1, 20) * 0.01, gains=1.0, k=2, n_samples=4000)
        double = make_track(np.arange(1, 20) * 0.01, gains=2.0, k=2, n_samples=4000)
        once = er.build_excitation_eigen(single, self.model).samples
        twice = er.build_excitation_eigen(double, self.model).samples
        assert np.allclose(twice, 2 * once, atol=1e-12)

    def test_eigen_excitation_is_periodic(self):
        track = make_track(np.arange(1, 100) * 0.01, k=3)
        excitation = er.build_excitation_eigen(track, self.model).samples
        lag, value = autocorrelation_peak(excitation[2000:14000], 100, 220)
        assert abs(lag - 160) <= 1
        assert value > 0.9

    def test_voiced_energy_does_not_depend_on_the_pitch(self):
        model = impulse_model(f0_star=120.0)
        for f0 in (120.0, 0.75 * 120.0, 1.5 * 120.0):
            period = int(round(SAMPLE_RATE / f0))
            times = np.arange(1, SAMPLE_RATE // period) * period / SAMPLE_RATE
            track = make_track(times, f0=f0, gains=2.0, k=3)
            eigen = er.build_excitation_eigen(track, model).samples
            pulse = er.build_excitation_pulse(track).samples
            marks = np.array([p for p, _ in er.pitch_marks(track, er.SynthConfig())])
            inside = marks[(marks >= 4000) & (marks < 12000)]
            expected = 4.0 * len(inside)
            assert abs(np.sum(eigen[4000:12000] ** 2) / expected - 1.0) < 0.05
            assert abs(np.sum(pulse[4000:12000] ** 2) / expected - 1.0) < 1e-9

    def test_low_f0_frames_are_clamped(self):
        track = make_track([0.1], f0=40.0, k=2, n_samples=4000)
        excitation = er.build_excitation_eigen(track, self.model).samples
        assert np.count_nonzero(excitation) <= 2 * self.model.m

    def test_empty_track(self):
        track = make_track([], k=2, n_samples=0)
        assert len(er.build_excitation_eigen(track, self.model)) == 0
        assert len(er.synthesize(track, self.model)) == 0

    def test_more_coefficients_than_eigenresiduals(self):
        def too_many_coefficients():
            er.build_excitation_eigen(make_track([0.01], k=self.model.r + 1), self.model)

        self.assertRaises(ValueError, too_many_coefficients)

    def test_sample_rate_mismatch(self):
        def sample_rate_mismatch():
            track = make_track([0.01], n_samples=8000, sample_rate=8000)
            er.build_excitation_eigen(track, self.model)

        self.assertRaises(ValueError, sample_rate_mismatch)


class TestUnvoicedExcitation(unittest.TestCase):
    """Tests the noise excitation of the unvoiced segments"""

    def setUp(self):
        self.model = noise_model()
        segment = er.UnvoicedSegment(4000, 8000, np.full(50, 0.1))
        times = np.concatenate([np.arange(1, 21), np.arange(60, 96)]) * 0.01
        self.track = make_track(times, k=2, unvoiced=[segment])

    def test_both_excitations_share_the_noise(self):
        cfg = er.SynthConfig(noise_seed=5)
        eigen = er.build_excitation_eigen(self.track, self.model, cfg).samples
        pulse = er.build_excitation_pulse(self.track, cfg).samples
        interior = slice(4100, 7900)
        assert np.array_equal(eigen[interior], pulse[interior])
        noise = 0.1 * er.white_noise(SAMPLE_RATE, 5)
        assert np.allclose(eigen[interior], noise[interior], atol=1e-15)

    def test_unit_gain_mode(self):
        cfg = er.SynthConfig(noise_seed=5, unvoiced_gain_mode="unit")
        pulse = er.build_excitation_pulse(self.track, cfg).samples
        noise = er.white_noise(SAMPLE_RATE, 5)
        assert np.allclose(pulse[4100:7900], noise[4100:7900], atol=1e-15)

    def test_synthesis_is_deterministic(self):
        cfg = er.SynthConfig(noise_seed=7)
        first = er.synthesize(self.track, self.model, cfg)
        second = er.synthesize(self.track, self.model, cfg)
        other = er.synthesize(self.track, self.model, er.SynthConfig(noise_seed=8))
        assert np.array_equal(first.samples, second.samples)
        assert not np.array_equal(first.samples, other.samples)

    def test_eigen_synthesis_needs_a_model(self):
        def eigen_without_model():
            er.synthesize(self.track)

        self.assertRaises(ValueError, eigen_without_model)

    def test_loud_output_is_normalized(self):
        track = make_track(np.arange(1, 50) * 0.01, gains=100.0)
        speech = er.synthesize(track, cfg=er.SynthConfig(excitation_kind="pulse"))
        assert abs(np.max(np.abs(speech.samples)) - 0.9) < 1e-12


class TestLogSpectralDistortion(unittest.TestCase):
    """Tests the log-spectral distortion between two signals"""

    def setUp(self):
        self.noise = er.Signal(er.white_noise(SAMPLE_RATE, seed=13), SAMPLE_RATE)

    def test_identical_signals(self):
        assert er.log_spectral_distortion(self.noise, self.noise) == 0.0

    def test_distortion_ignores_the_level(self):
        louder = er.Signal(2 * self.noise.samples, SAMPLE_RATE)
        assert er.log_spectral_distortion(self.noise, louder) < 1e-9

    def test_first_order_tilt(self):
        tilted = er.Signal(scipy.signal.lfilter([1.0, -0.9], [1.0], self.noise.samples), SAMPLE_RATE)
        freqs = np.fft.rfftfreq(512, 1 / SAMPLE_RATE)
        freqs = freqs[freqs <= 5000]
        response = np.abs(1 - 0.9 * np.exp(-2j * np.pi * freqs / SAMPLE_RATE)) ** 2
        offset = 10 * np.log10(response.mean())
        expected = np.sqrt(np.mean((10 * np.log10(response) - offset) ** 2))
        lsd = er.log_spectral_distortion(self.noise, tilted)
        assert abs(lsd - expected) < 0.5

    def test_stronger_tilt_distorts_more(self):
        mild = scipy.signal.lfilter([1.0, -0.3], [1.0], self.noise.samples)
        strong = scipy.signal.lfilter([1.0, -0.9], [1.0], self.noise.samples)
        lsd_mild = er.log_spectral_distortion(self.noise, er.Signal(mild, SAMPLE_RATE))
        lsd_strong = er.log_spectral_distortion(self.noise, er.Signal(strong, SAMPLE_RATE))
        assert 0 < lsd_mild < lsd_strong

    def test_no_voiced_frames(self):
        other = er.Signal(er.white_noise(SAMPLE_RATE, seed=14), SAMPLE_RATE)
        mask = np.zeros(SAMPLE_RATE, dtype=bool)
        assert er.log_spectral_distortion(self.noise, other, mask) == 0.0

    def test_length_mismatch(self):
        def length_mismatch():
            er.log_spectral_distortion(self.noise, er.Signal(np.zeros(100), SAMPLE_RATE))

        self.assertRaises(ValueError, length_mismatch)


class TestTrackFiles(unittest.TestCase):
    """Tests the binary track file and the CSV export"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.folder = Path(self.tmp.name)
        segment = er.UnvoicedSegment(4000, 4170, [0.1, 0.2, 0.3])
        times = np.array([0.01, 0.02, 0.03])
        self.track = er.ParameterTrack(
            SAMPLE_RATE, 8000, er.EnvelopeConfig(order=1), flat_envelope(), times,
            [100.0, 110.0, 121.0], [1.0, 0.5, 0.25], np.arange(6.0).reshape(3, 2), [segment])

    def tearDown(self):
        self.tmp.cleanup()

    def test_save_then_load(self):
        path = self.folder / "utt.egtk"
        er.save_track(self.track, path)
        assert path.read_bytes()[:4] == b"EGTK"
        back = er.load_track(path)
        assert back.sample_rate == SAMPLE_RATE
        assert back.n_samples == 8000
        assert back.envelope.order == 1
        assert np.array_equal(back.envelope.coefficients, self.track.envelope.coefficients)
        assert np.array_equal(back.gci_times, self.track.gci_times)
        assert np.array_equal(back.f0, self.track.f0)
        assert np.array_equal(back.gains, self.track.gains)
        assert np.array_equal(back.coefficients, self.track.coefficients)
        assert back.unvoiced == self.track.unvoiced

    def test_not_a_track_file(self):
        path = self.folder / "utt.egtk"
        path.write_bytes(b"EGRS" + bytes(40))
        with self.assertRaisesRegex(ValueError, "not a parameter track file"):
            er.load_track(path)

    def test_truncated_track_file(self):
        path = self.folder / "utt.egtk"
        er.save_track(self.track, path)
        path.write_bytes(path.read_bytes()[:-16])
        with self.assertRaisesRegex(ValueError, "truncated"):
            er.load_track(path)

    def test_csv_columns(self):
        path = self.folder / "utt.csv"
        er.write_track_csv(self.track, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "time,f0,gain,c1,c2"
        assert len(lines) == 4
        assert lines[1] == "0.01,100,1,0,1"

    def test_csv_with_deltas(self):
        path = self.folder / "utt.csv"
        er.write_track_csv(self.track, path, deltas=True)
        header = path.read_text().splitlines()[0].split(",")
        assert header == ["time", "f0", "gain", "c1", "c2", "lf0", "d_lf0", "dd_lf0",
                          "d_c1", "d_c2", "dd_c1", "dd_c2"]
        table = np.loadtxt(path, delimiter=",", skiprows=1)
        # coefficients grow by 2 per record, the edge records see half the slope
        assert np.allclose(table[:, 8], [1.0, 2.0, 1.0])
        assert np.allclose(table[1, 10], 0.0)


class TestAnalyzeUtterance(unittest.TestCase):
    """Tests the analysis of an utterance into a parameter track"""

    def setUp(self):
        self.model = noise_model(f0_star=120.0)

    def test_sample_rate_mismatch(self):
        def sample_rate_mismatch():
            er.analyze_utterance(er.Signal(np.zeros(8000), 8000), self.model)

        self.assertRaisesRegex(ValueError, "sample rate mismatch", sample_rate_mismatch)

    def test_white_noise_has_no_excitation_records(self):
        noise = er.Signal(0.1 * er.white_noise(SAMPLE_RATE, seed=15), SAMPLE_RATE)
        track = er.analyze_utterance(noise, self.model)
        assert len(track) == 0
        assert len(track.unvoiced) >= 1

    def test_vowel_from_the_mean_frame(self):
        model = impulse_model(f0_star=120.0)
        period = model.m // 2
        signal, _ = pulse_vowel(model.mean / np.linalg.norm(model.mean), period, SAMPLE_RATE)
        track = er.analyze_utterance(signal, model, er.EnvelopeConfig(order=2))
        assert len(track) > 80
        assert track.k == model.k_default
        assert abs(np.median(track.f0) - 120.0) < 2.0
        assert np.max(np.abs(track.coefficients)) < 0.25

    def test_vowel_gives_one_record_per_period(self):
        track = er.analyze_utterance(glottal_vowel(120.0), self.model)
        assert track.k == self.model.k_default
        assert 95 <= len(track) <= 125
        assert abs(np.median(track.f0) - 120.0) < 4.0
        assert track.voiced_mask().mean() > 0.9

    def test_vowel_resynthesis(self):
        signal = glottal_vowel(120.0)
        track = er.analyze_utterance(signal, self.model)
        speech = er.synthesize(track, self.model)
        assert len(speech) == len(signal)
        assert np.all(np.isfinite(speech.samples))
        assert np.max(np.abs(speech.samples)) < 1.0


if __name__ == "__main__":
    unittest.main()
