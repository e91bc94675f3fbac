import os
from pathlib import Path
from typing import Union

from .Envelope import ENVELOPE_KINDS, EnvelopeConfig
from .Pitch import GCI_POLARITIES, F0Config, GciConfig
from .Vocoder import EXCITATION_KINDS, GCI_PLACEMENTS, UNVOICED_GAIN_MODES, SynthConfig

SEED_ENVIRONMENT_VARIABLE = "EIGENRES_SEED"

# key: (type, default, allowed values)
RUN_CONFIG_KEYS = {
    "envelope.order": (int, 24, None),
    "envelope.frame_len_ms": (float, 25.0, None),
    "envelope.hop_ms": (float, 5.0, None),
    "envelope.pre_emphasis": (float, 0.0, None),
    "envelope.kind": (str, "lpc", ENVELOPE_KINDS),
    "pitch.f0_min": (float, 50.0, None),
    "pitch.f0_max": (float, 400.0, None),
    "pitch.hop_ms": (float, 5.0, None),
    "pitch.frame_ms": (float, 40.0, None),
    "pitch.voicing_threshold": (float, 0.3, None),
    "pitch.silence_db": (float, -35.0, None),
    "pitch.median_width": (int, 5, None),
    "gci.polarity": (str, "negative", GCI_POLARITIES),
    "gci.cog_periods": (float, 1.1, None),
    "gci.refine_periods": (float, 0.25, None),
    "gci.merge_periods": (float, 0.5, None),
    "histogram.bin_width_hz": (float, 2.0, None),
    "histogram.upper_mass": (float, 0.8, None),
    "pca.threshold": (float, 0.75, None),
    "pca.k": ("k", "auto", None),
    "synth.seed": (int, 0, None),
    "synth.excitation": (str, "eigen", EXCITATION_KINDS),
    "synth.unvoiced_gain_mode": (str, "analysis", UNVOICED_GAIN_MODES),
    "synth.gci_placement": (str, "analysis", GCI_PLACEMENTS),
    "synth.crossfade_ms": (float, 2.0, None),
    "train.jobs": (int, 1, None),
}


def _parse_value(key: str, value):
    kind, _, allowed = RUN_CONFIG_KEYS[key]
    text = str(value).strip()
    try:
        if kind == "k":
            parsed = text if text in ("auto", "all") else int(text)
        elif kind is int:
            parsed = int(text)
        elif kind is float:
            parsed = float(text)
        else:
            parsed = text
    except ValueError:
        raise ValueError(f"config key {key} expects {getattr(kind, '__name__', kind)}, not {text!r}")
    if allowed is not None and parsed not in allowed:
        raise ValueError(
            f"config key {key} value {parsed} not allowed, the following "
            f"options are supported {allowed}")
    if kind == "k" and isinstance(parsed, int) and parsed < 0:
        raise ValueError(f"config key {key} must not be negative, not {parsed}")
    return parsed


class RunConfig:
    """All tunable settings of a run as dotted section.key entries. Text
    configs hold one key=value per line, blank lines and text after # are
    ignored. Unknown keys are rejected and values are type checked when set.

    Args:
        values: a dictionary of keys to set over the defaults.
    """

    def __init__(self, values: dict = None):
        self._values = {key: entry[1] for key, entry in RUN_CONFIG_KEYS.items()}
        self.explicit = set()
        for key, value in (values or {}).items():
            self[key] = value

    def __getitem__(self, key: str):
        if key not in RUN_CONFIG_KEYS:
            raise KeyError(key)
        return self._values[key]

    def __setitem__(self, key: str, value):
        if key not in RUN_CONFIG_KEYS:
            raise ValueError(f"unknown config key {key}")
        self._values[key] = _parse_value(key, value)
        self.explicit.add(key)

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self._values == other._values

    @classmethod
    def from_text(cls, text: str):
        config = cls()
        for number, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line {number} is not key=value: {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            config[key] = value
        return config

    @classmethod
    def from_file(cls, path: Union[str, Path]):
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"config file {path} was not found")
        return cls.from_text(path.read_text())

    def dump(self) -> str:
        """The effective configuration as key=value text, reloadable with
        from_text"""
        lines = []
        for key, value in self._values.items():
            if key == "synth.seed":
                value = self.seed()
            lines.append(f"{key}={value!r}" if isinstance(value, float) else f"{key}={value}")
        return "\n".join(lines) + "\n"

    def seed(self, flag: int = None) -> int:
        """The noise seed: the command line flag, else a seed set in the
        config, else the EIGENRES_SEED environment variable, else 0."""
        if flag is not None:
            return int(flag)
        if "synth.seed" in self.explicit:
            return self["synth.seed"]
        environment = os.environ.get(SEED_ENVIRONMENT_VARIABLE)
        if environment is not None:
            try:
                return int(environment)
            except ValueError:
                raise ValueError(
                    f"{SEED_ENVIRONMENT_VARIABLE} must be an int, not {environment!r}")
        return self["synth.seed"]

    def envelope_config(self) -> EnvelopeConfig:
        return EnvelopeConfig(
            order=self["envelope.order"],
            frame_len_ms=self["envelope.frame_len_ms"],
            hop_ms=self["envelope.hop_ms"],
            pre_emphasis=self["envelope.pre_emphasis"],
            envelope_kind=self["envelope.kind"],
        )

    def f0_config(self) -> F0Config:
        return F0Config(
            f0_min=self["pitch.f0_min"],
            f0_max=self["pitch.f0_max"],
            hop_ms=self["pitch.hop_ms"],
            frame_ms=self["pitch.frame_ms"],
            voicing_threshold=self["pitch.voicing_threshold"],
            silence_db=self["pitch.silence_db"],
            median_width=self["pitch.median_width"],
        )

    def gci_config(self) -> GciConfig:
        return GciConfig(
            polarity=self["gci.polarity"],
            cog_periods=self["gci.cog_periods"],
            refine_periods=self["gci.refine_periods"],
            merge_periods=self["gci.merge_periods"],
        )

    def synth_config(self, seed: int = None, excitation: str = None) -> SynthConfig:
        return SynthConfig(
            noise_seed=self.seed(seed),
            unvoiced_gain_mode=self["synth.unvoiced_gain_mode"],
            excitation_kind=excitation or self["synth.excitation"],
            gci_placement=self["synth.gci_placement"],
            crossfade_ms=self["synth.crossfade_ms"],
        )
