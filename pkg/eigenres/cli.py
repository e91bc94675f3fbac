import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .Corpus import list_corpus, train_model
from .EigenModel import load_model, save_model, write_eigenresidual, write_ik_curve
from .Settings import RunConfig
from .Signal import read_wav, write_wav
from .Vocoder import (
    analyze_utterance,
    copy_synthesis,
    load_track,
    save_track,
    synthesize,
    write_track_csv,
)

log = logging.getLogger(__name__)

USAGE_ERRORS = (ValueError, TypeError, FileNotFoundError)


def cmd_train(args, config: RunConfig) -> int:
    paths = list_corpus(args.corpus_dir)
    jobs = args.jobs if args.jobs is not None else config["train.jobs"]
    model, report = train_model(
        paths,
        config.envelope_config(),
        config.f0_config(),
        config.gci_config(),
        bin_width_hz=config["histogram.bin_width_hz"],
        upper_mass=config["histogram.upper_mass"],
        threshold=config["pca.threshold"],
        k=config["pca.k"],
        jobs=jobs,
    )
    save_model(model, args.out_model)
    if args.histogram:
        report.histogram.to_csv(args.histogram)
        if args.plot:
            from .plotting import plot_pitch_histogram

            plot_pitch_histogram(report.histogram, Path(args.histogram).with_suffix(".png"),
                                 model.f0_star)
    for line in report.lines():
        print(line)
    return 0


def cmd_analyze(args, config: RunConfig) -> int:
    signal = read_wav(args.wav)
    model = load_model(args.model)
    track = analyze_utterance(signal, model, config.envelope_config(), config.f0_config(),
                              config.gci_config())
    save_track(track, args.out_track)
    if args.csv or args.deltas:
        write_track_csv(track, Path(args.out_track).with_suffix(".csv"), deltas=args.deltas)
    print(f"records={len(track)} unvoiced_segments={len(track.unvoiced)}")
    return 0


def cmd_synth(args, config: RunConfig) -> int:
    excitation = args.excitation or config["synth.excitation"]
    if excitation == "eigen" and args.model is None:
        raise ValueError("eigen excitation needs a model, pass --model")
    track = load_track(args.track)
    model = load_model(args.model) if args.model is not None else None
    speech = synthesize(track, model, config.synth_config(args.seed, excitation))
    write_wav(speech, args.out_wav)
    print(f"samples={len(speech)}")
    return 0


def _copysynth_file(path: Path, model, config: RunConfig, seed, out_dir: Path) -> float:
    signal = read_wav(path)
    _, eigen, pulse, lsd_eigen, lsd_pulse = copy_synthesis(
        signal, model, config.envelope_config(), config.f0_config(), config.gci_config(),
        config.synth_config(seed))
    write_wav(eigen, out_dir / f"{path.stem}_eigen.wav")
    write_wav(pulse, out_dir / f"{path.stem}_pulse.wav")
    winner = "eigen" if lsd_eigen < lsd_pulse else "pulse"
    print(f"file={path.name} lsd_eigen={lsd_eigen:.4f} lsd_pulse={lsd_pulse:.4f} winner={winner}")
    return lsd_pulse - lsd_eigen


def cmd_copysynth(args, config: RunConfig) -> int:
    model = load_model(args.model)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    source = Path(args.wav)

    if not source.is_dir():
        _copysynth_file(source, model, config, args.seed, out_dir)
        return 0

    improvements = []
    for path in list_corpus(source):
        try:
            improvements.append(_copysynth_file(path, model, config, args.seed, out_dir))
        except USAGE_ERRORS + (RuntimeError,) as error:
            log.warning("skipping %s: %s", path.name, error)
    if not improvements:
        raise ValueError(f"no utterance of {source} could be copy-synthesized")
    improvements = np.array(improvements)
    print(f"files={len(improvements)} eigen_wins={np.count_nonzero(improvements > 0)} "
          f"mean_improvement_db={improvements.mean():.4f}")
    return 0


def cmd_inspect(args, config: RunConfig) -> int:
    model = load_model(args.model)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    write_ik_curve(model, out_dir / "ik_curve.csv")
    for index in range(1, model.k_default + 1):
        write_eigenresidual(model, index, out_dir / f"eigenresidual_{index}.csv")
    summary = [f"m={model.m} r={model.r} f0_star={model.f0_star:.3f}",
               f"N={model.n_frames} k={model.k_default} sample_rate={model.sample_rate}"]
    (out_dir / "summary.txt").write_text("\n".join(summary) + "\n")

    if args.plot:
        from .plotting import plot_eigenresiduals, plot_information_rate

        plot_information_rate(model, out_dir / "ik_curve.png", config["pca.threshold"])
        plot_eigenresiduals(model, out_dir / "eigenresiduals.png")
    for line in summary:
        print(line)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eigenres",
        description="Eigenresidual excitation modelling: train a model on a "
                    "speech corpus, analyse and resynthesize utterances.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("--config", help="key=value configuration file")
    parser.add_argument("--dump-config", help="write the effective configuration to this file")
    commands = parser.add_subparsers(dest="command", required=True)

    train = commands.add_parser("train", help="train an eigen model on a directory of wav files")
    train.add_argument("corpus_dir")
    train.add_argument("out_model")
    train.add_argument("--histogram", help="write the pooled pitch histogram as CSV")
    train.add_argument("--plot", action="store_true", help="also render the histogram")
    train.add_argument("--jobs", type=int, help="worker processes, overrides train.jobs")
    train.set_defaults(func=cmd_train)

    analyze = commands.add_parser("analyze", help="analyse a wav file into a parameter track")
    analyze.add_argument("wav")
    analyze.add_argument("model")
    analyze.add_argument("out_track")
    analyze.add_argument("--csv", action="store_true", help="also write the records as CSV")
    analyze.add_argument("--deltas", action="store_true",
                         help="add log-F0 and delta features to the CSV")
    analyze.set_defaults(func=cmd_analyze)

    synth = commands.add_parser("synth", help="synthesize a wav file from a parameter track")
    synth.add_argument("track")
    synth.add_argument("out_wav")
    synth.add_argument("--model", help="eigen model, required by the eigen excitation")
    synth.add_argument("--excitation", choices=["eigen", "pulse"])
    synth.add_argument("--seed", type=int)
    synth.set_defaults(func=cmd_synth)

    copysynth = commands.add_parser(
        "copysynth", help="analyse and resynthesize with both excitations, report distortions")
    copysynth.add_argument("wav", help="a wav file or a directory of them")
    copysynth.add_argument("model")
    copysynth.add_argument("out_dir")
    copysynth.add_argument("--seed", type=int)
    copysynth.set_defaults(func=cmd_copysynth)

    inspect = commands.add_parser("inspect", help="export the information rate and eigenresiduals")
    inspect.add_argument("model")
    inspect.add_argument("out_dir")
    inspect.add_argument("--plot", action="store_true", help="also render PNG figures")
    inspect.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        config = RunConfig.from_file(args.config) if args.config else RunConfig()
        if args.dump_config:
            Path(args.dump_config).write_text(config.dump())
        return args.func(args, config)
    except USAGE_ERRORS as error:
        return _report(error, 2)
    except Exception as error:  # noqa: BLE001
        log.debug("unexpected failure", exc_info=True)
        return _report(error, 1)


def _report(error: Exception, code: int) -> int:
    """Prints the single line error reason and returns the exit code"""
    reason = " ".join(str(error).split()) or type(error).__name__
    print(f"error: {reason}", file=sys.stderr)
    return code
