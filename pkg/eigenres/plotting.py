from pathlib import Path
from typing import Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .EigenModel import EigenModel, information_curve  # noqa: E402
from .Pitch import PitchHistogram  # noqa: E402


def plot_information_rate(model: EigenModel, filename: Union[str, Path], threshold: float = 0.75):
    """Plots I(k) against the number of eigenresiduals k"""
    curve = information_curve(model)
    fig, ax = plt.subplots()
    ax.plot(np.arange(len(curve)), curve)
    ax.axhline(threshold, linestyle="--", color="grey")
    ax.axvline(model.k_default, linestyle=":", color="grey")
    ax.set_xlabel("number of eigenresiduals k")
    ax.set_ylabel("information rate I(k)")
    ax.set_ylim(0, 1.02)
    fig.savefig(filename)
    plt.close(fig)


def plot_eigenresiduals(model: EigenModel, filename: Union[str, Path], count: int = 3):
    """Plots the mean frame and the first eigenresiduals"""
    fig, ax = plt.subplots()
    samples = np.arange(model.m) - model.m // 2
    ax.plot(samples, model.mean, label="mean")
    for index in range(min(count, model.r)):
        ax.plot(samples, model.eigenresiduals[index], label=f"eigenresidual {index + 1}")
    ax.set_xlabel("samples from the GCI")
    ax.legend()
    fig.savefig(filename)
    plt.close(fig)


def plot_pitch_histogram(histogram: PitchHistogram, filename: Union[str, Path], f0_star: float = None):
    """Plots P(F0), marking the normalized pitch when given"""
    fig, ax = plt.subplots()
    widths = np.diff(histogram.edges)
    ax.bar(histogram.edges[:-1], histogram.mass, width=widths, align="edge")
    if f0_star is not None:
        ax.axvline(f0_star, color="red", label=f"F0* = {f0_star:.1f} Hz")
        ax.legend()
    ax.set_xlabel("F0 (Hz)")
    ax.set_ylabel("P(F0)")
    fig.savefig(filename)
    plt.close(fig)
