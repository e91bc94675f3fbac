import re
import tempfile
import unittest
from pathlib import Path

import numpy as np

import eigenres as er
from tests.synthetic import SAMPLE_RATE, glottal_vowel, write_corpus
from tests.test_cli import run


class TestTrainAnalyzeSynthesize(unittest.TestCase):
    """Trains a model on a synthetic vowel corpus with the command line, then
    analyses, resynthesizes and copy-synthesizes utterances with it"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.folder = Path(self.tmp.name)
        self.corpus = self.folder / "corpus"
        self.corpus.mkdir()
        write_corpus(self.corpus, [
            glottal_vowel(105.0, vibrato=0.04, seed=1),
            glottal_vowel(118.0, vibrato=0.04, seed=2),
            glottal_vowel(132.0, vibrato=0.04, seed=3),
        ])
        self.model_path = self.folder / "model.egrs"

    def tearDown(self):
        self.tmp.cleanup()

    def train(self, *options):
        code, out, _ = run(["train", self.corpus, self.model_path, *options])
        assert code == 0
        return out.splitlines()

    def test_train_reports_the_model(self):
        lines = self.train("--histogram", self.folder / "histogram.csv", "--plot")
        assert re.fullmatch(r"files=3 skipped_files=0 skipped_frames=\d+", lines[0])
        fields = dict(item.split("=") for item in lines[1].split())
        model = er.load_model(self.model_path)
        assert int(fields["N"]) == model.n_frames
        assert int(fields["m"]) == model.m
        assert abs(float(fields["f0_star"]) - model.f0_star) < 6e-4
        assert int(fields["k"]) == model.k_default
        assert all(line.startswith("ik k=") for line in lines[2:])
        header = (self.folder / "histogram.csv").read_text().splitlines()[0]
        assert header == "f0_low,f0_high,count,mass"
        assert (self.folder / "histogram.png").is_file()

    def test_train_with_a_config(self):
        config = self.folder / "run.cfg"
        config.write_text("envelope.order=16\npca.k=all\n")
        code, _, _ = run(["--config", config, "train", self.corpus, self.model_path])
        assert code == 0
        model = er.load_model(self.model_path)
        assert model.k_default == model.r

    def test_parallel_training_writes_the_same_model(self):
        self.train()
        serial = self.model_path.read_bytes()
        self.train("--jobs", 2)
        assert self.model_path.read_bytes() == serial

    def test_analysis_resynthesis_round_trip(self):
        self.train()
        wav = self.folder / "test.wav"
        original = glottal_vowel(115.0, vibrato=0.02, seed=9)
        er.write_wav(original, wav)
        track_path = self.folder / "test.egtk"
        code, out, _ = run(["analyze", wav, self.model_path, track_path])
        assert code == 0
        records = int(re.match(r"records=(\d+)", out).group(1))
        assert records > 80

        track = er.load_track(track_path)
        model = er.load_model(self.model_path)
        assert track.k == model.k_default
        speech = er.synthesize(track, model, er.SynthConfig(noise_seed=1))
        assert len(speech) == len(original)
        lsd = er.log_spectral_distortion(er.read_wav(wav), speech, track.voiced_mask())
        assert np.isfinite(lsd)

        before = er.track_f0(er.read_wav(wav))
        after = er.track_f0(speech)
        both = before.voiced & after.voiced
        assert both.sum() > 100
        error = np.abs(after.f0[both] / before.f0[both] - 1.0)
        assert np.mean(error <= 0.05) >= 0.9

    def test_copysynth_of_a_directory(self):
        self.train()
        out_dir = self.folder / "copy"
        code, out, _ = run(["copysynth", self.corpus, self.model_path, out_dir, "--seed", 2])
        assert code == 0
        lines = out.splitlines()
        assert len(lines) == 4
        for line in lines[:3]:
            assert re.fullmatch(
                r"file=utt_\d\d\.wav lsd_eigen=[\d.]+ lsd_pulse=[\d.]+ winner=(eigen|pulse)", line)
            fields = dict(item.split("=") for item in line.split())
            assert float(fields["lsd_eigen"]) < float(fields["lsd_pulse"])
            assert fields["winner"] == "eigen"
        summary = dict(item.split("=") for item in lines[3].split())
        assert int(summary["files"]) == 3
        assert int(summary["eigen_wins"]) == 3
        assert float(summary["mean_improvement_db"]) > 0
        assert len(list(out_dir.glob("*_eigen.wav"))) == 3
        assert len(list(out_dir.glob("*_pulse.wav"))) == 3

    def test_inspect_after_training(self):
        self.train()
        code, out, _ = run(["inspect", self.model_path, self.folder / "inspect"])
        assert code == 0
        model = er.load_model(self.model_path)
        assert out.splitlines()[0] == f"m={model.m} r={model.r} f0_star={model.f0_star:.3f}"
        curve = np.loadtxt(self.folder / "inspect" / "ik_curve.csv", delimiter=",", skiprows=1)
        assert curve[0, 1] == 0.0
        assert abs(curve[-1, 1] - 1.0) < 1e-9
        assert np.all(np.diff(curve[:, 1]) >= 0)
        assert model.sample_rate == SAMPLE_RATE


if __name__ == "__main__":
    unittest.main()
