"""EEG feature pipeline: band filtering, power, differential entropy,
hemispheric asymmetry, and lateralization summaries.

Epochs are (channels x samples) arrays in microvolts with 10-20 channel
labels. All features are computed per band after a zero-phase Butterworth
bandpass. Differential entropy follows the Gaussian closed form
``0.5 * ln(2 * pi * e * var)`` commonly applied to band-passed EEG.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import butter, filtfilt


@dataclass(frozen=True)
class Band:
    name: str
    low: float
    high: float

    def __post_init__(self):
        if not 0 < self.low < self.high:
            raise ValueError(f"bad band edges [{self.low}, {self.high}]")


BANDS = {
    "theta": Band("theta", 4.0, 7.0),
    "alpha": Band("alpha", 8.0, 13.0),
    "beta": Band("beta", 14.0, 29.0),
    "gamma": Band("gamma", 30.0, 47.0),
}

# Symmetric left/right pairs covering every electrode reported in the
# correlation analysis; odd suffix = left hemisphere, even = right.
DEFAULT_PAIRS = [
    ("Fp1", "Fp2"), ("AF3", "AF4"), ("F7", "F8"), ("F3", "F4"),
    ("FC5", "FC6"), ("FC1", "FC2"), ("T7", "T8"), ("C3", "C4"),
    ("CP5", "CP6"), ("CP1", "CP2"), ("P7", "P8"), ("P3", "P4"),
    ("O1", "O2"),
]

# 32-channel 10-20 layout (DEAP order); used by the synthetic generator.
DEFAULT_CHANNELS = [
    "Fp1", "AF3", "F3", "F7", "FC5", "FC1", "C3", "T7", "CP5", "CP1",
    "P3", "P7", "PO3", "O1", "Oz", "Pz", "Fp2", "AF4", "Fz", "F4",
    "F8", "FC6", "FC2", "Cz", "C4", "T8", "CP6", "CP2", "P4", "P8",
    "PO4", "O2",
]

DEFAULT_SAMPLE_RATE = 128.0
ARTIFACT_THRESHOLD_UV = 100.0


@dataclass
class Montage:
    pairs: list[tuple[str, str]] = field(default_factory=lambda: list(DEFAULT_PAIRS))

    def __post_init__(self):
        for left, right in self.pairs:
            if left == right:
                raise ValueError(f"pair ({left}, {right}) must name two electrodes")


@dataclass
class EegEpoch:
    samples: np.ndarray  # (channels, time), microvolts
    sample_rate: float = DEFAULT_SAMPLE_RATE
    channel_names: list[str] = field(default_factory=lambda: list(DEFAULT_CHANNELS))
    trial_id: int = 0

    def __post_init__(self):
        self.samples = np.atleast_2d(np.asarray(self.samples, dtype=np.float64))
        if self.samples.shape[0] != len(self.channel_names):
            raise ValueError(f"{self.samples.shape[0]} rows for "
                             f"{len(self.channel_names)} channel names")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    def channel_index(self, name: str) -> int:
        lowered = [c.lower() for c in self.channel_names]
        try:
            return lowered.index(name.lower())
        except ValueError:
            raise KeyError(f"channel {name!r} not in epoch") from None

    def channel(self, name: str) -> np.ndarray:
        return self.samples[self.channel_index(name)]


def bandpass(epoch: EegEpoch, band: Band, order: int = 4) -> EegEpoch:
    """Zero-phase Butterworth bandpass (applied forward-backward) per channel."""
    nyquist = epoch.sample_rate / 2.0
    if band.high >= nyquist:
        raise ValueError(
            f"band edge {band.high} Hz >= Nyquist {nyquist} Hz")
    b, a = butter(order, [band.low, band.high], btype="bandpass",
                  fs=epoch.sample_rate)
    filtered = filtfilt(b, a, epoch.samples, axis=1)
    return EegEpoch(samples=filtered, sample_rate=epoch.sample_rate,
                    channel_names=list(epoch.channel_names),
                    trial_id=epoch.trial_id)


def band_power(epoch: EegEpoch, channel: str) -> float:
    """Mean squared amplitude of one (already filtered) channel."""
    if epoch.n_samples == 0:
        raise ValueError("empty epoch")
    if epoch.n_samples < epoch.sample_rate:
        raise ValueError("need at least one second of samples")
    x = epoch.channel(channel)
    return float(np.mean(x * x))


def differential_entropy(epoch: EegEpoch, channel: str) -> float:
    """0.5 * ln(2 pi e var) of one (already filtered) channel."""
    x = epoch.channel(channel)
    var = float(np.var(x))
    if var <= 0.0:
        raise ValueError(f"channel {channel} has zero variance")
    return 0.5 * float(np.log(2.0 * np.pi * np.e * var))


def hasym(power_left: float, power_right: float, variant: str = "log") -> float:
    """Hemispheric asymmetry of a left/right power pair.

    "log" gives ln(L) - ln(R) (scale invariant); "rational" gives
    (L - R) / (L + R).
    """
    if variant == "log":
        if power_left <= 0 or power_right <= 0:
            raise ValueError("log asymmetry needs positive powers")
        return float(np.log(power_left) - np.log(power_right))
    if variant == "rational":
        if power_left <= 0 or power_right <= 0:
            raise ValueError("rational asymmetry needs positive powers")
        return float((power_left - power_right) / (power_left + power_right))
    raise ValueError(f"unknown variant {variant!r}")


def ade(de_left: float, de_right: float) -> float:
    """Asymmetric differential entropy: DE(left) - DE(right)."""
    if not (np.isfinite(de_left) and np.isfinite(de_right)):
        raise ValueError("differential entropies must be finite")
    return float(de_left - de_right)


def reject_artifacts(epoch: EegEpoch, threshold_uv: float = ARTIFACT_THRESHOLD_UV,
                     window_s: float = 1.0) -> EegEpoch:
    """Drop whole windows containing any sample beyond the amplitude bound."""
    win = max(1, int(round(window_s * epoch.sample_rate)))
    keep_cols = []
    for start in range(0, epoch.n_samples, win):
        chunk = epoch.samples[:, start:start + win]
        if np.all(np.abs(chunk) <= threshold_uv):
            keep_cols.append(np.arange(start, min(start + win, epoch.n_samples)))
    cols = np.concatenate(keep_cols) if keep_cols else np.array([], dtype=int)
    return EegEpoch(samples=epoch.samples[:, cols], sample_rate=epoch.sample_rate,
                    channel_names=list(epoch.channel_names), trial_id=epoch.trial_id)


@dataclass
class TrialFeatures:
    """Per-trial feature tables keyed by (band, electrode) or (band, pair)."""

    trial_id: int
    power: dict[tuple[str, str], float]
    de: dict[tuple[str, str], float]
    hasym: dict[tuple[str, str], float]   # keyed (band, left_electrode)
    ade: dict[tuple[str, str], float]

    def vector(self, kind: str, band: str) -> np.ndarray:
        table = {"power": self.power, "de": self.de,
                 "hasym": self.hasym, "ade": self.ade}[kind]
        keys = sorted(k for k in table if k[0] == band)
        return np.array([table[k] for k in keys])


def trial_features(epoch: EegEpoch, montage: Montage | None = None,
                   bands: dict[str, Band] | None = None,
                   hasym_variant: str = "log") -> TrialFeatures:
    """All band features for one epoch; pairs missing a channel are skipped."""
    montage = montage or Montage()
    bands = bands or BANDS
    power: dict[tuple[str, str], float] = {}
    de: dict[tuple[str, str], float] = {}
    hasym_t: dict[tuple[str, str], float] = {}
    ade_t: dict[tuple[str, str], float] = {}
    for band in bands.values():
        filtered = bandpass(epoch, band)
        for name in epoch.channel_names:
            power[(band.name, name)] = band_power(filtered, name)
            de[(band.name, name)] = differential_entropy(filtered, name)
        for left, right in montage.pairs:
            try:
                epoch.channel_index(left), epoch.channel_index(right)
            except KeyError:
                warnings.warn(f"montage pair ({left}, {right}) missing; skipped")
                continue
            hasym_t[(band.name, left)] = hasym(power[(band.name, left)],
                                               power[(band.name, right)],
                                               variant=hasym_variant)
            ade_t[(band.name, left)] = ade(de[(band.name, left)],
                                           de[(band.name, right)])
    return TrialFeatures(trial_id=epoch.trial_id, power=power, de=de,
                         hasym=hasym_t, ade=ade_t)


def lateralization(epoch: EegEpoch, band: Band, montage: Montage | None = None,
                   variant: str = "log") -> float:
    """Mean hemispheric asymmetry over montage pairs for one band."""
    montage = montage or Montage()
    filtered = bandpass(epoch, band)
    values = []
    for left, right in montage.pairs:
        try:
            pl = band_power(filtered, left)
            pr = band_power(filtered, right)
        except KeyError:
            warnings.warn(f"montage pair ({left}, {right}) missing; skipped")
            continue
        values.append(hasym(pl, pr, variant=variant))
    if not values:
        raise ValueError("no usable montage pairs")
    return float(np.mean(values))


def lateralized_power_change(epochs: list[EegEpoch], band: Band,
                             montage: Montage | None = None,
                             variant: str = "log") -> float:
    """Mean lateralization of the last half of trials minus the first half."""
    if len(epochs) < 2:
        raise ValueError("need at least two trials")
    series = [lateralization(e, band, montage, variant) for e in epochs]
    half = len(series) // 2
    return float(np.mean(series[-half:]) - np.mean(series[:half]))


def load_session_eeg(csv_path: str | Path, sidecar_path: str | Path):
    """Read one session's EEG CSV plus sidecar JSON into per-trial epochs.

    CSV: first column time in seconds, remaining columns named channels,
    values in microvolts. Sidecar: {"sample_rate": .., "montage": [[L, R],
    ..], "trial_boundaries": [{"trial": t, "start_s": .., "end_s": ..}]}.
    """
    meta = json.loads(Path(sidecar_path).read_text())
    sample_rate = float(meta["sample_rate"])
    montage = Montage(pairs=[tuple(p) for p in meta["montage"]]) \
        if meta.get("montage") else Montage()

    with Path(csv_path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[0].lower() not in ("time", "time_s", "t"):
            raise ValueError(f"{csv_path}: first column must be time-seconds")
        channels = header[1:]
        rows = [[float(v) for v in row] for row in reader]
    data = np.array(rows, dtype=np.float64)
    times, samples = data[:, 0], data[:, 1:].T

    epochs = []
    for bound in meta["trial_boundaries"]:
        mask = (times >= bound["start_s"]) & (times < bound["end_s"])
        epochs.append(EegEpoch(samples=samples[:, mask], sample_rate=sample_rate,
                               channel_names=list(channels),
                               trial_id=int(bound["trial"])))
    return epochs, montage


def save_session_eeg(csv_path: str | Path, sidecar_path: str | Path,
                     epochs: list[EegEpoch], montage: Montage | None = None,
                     gap_s: float = 0.0) -> None:
    """Write per-trial epochs back out in the CSV + sidecar layout."""
    if not epochs:
        raise ValueError("no epochs to save")
    montage = montage or Montage()
    sample_rate = epochs[0].sample_rate
    channels = epochs[0].channel_names
    boundaries = []
    t0 = 0.0
    blocks = []
    for epoch in epochs:
        dur = epoch.n_samples / sample_rate
        boundaries.append({"trial": epoch.trial_id, "start_s": t0,
                           "end_s": t0 + dur})
        times = t0 + np.arange(epoch.n_samples) / sample_rate
        blocks.append(np.column_stack([times, epoch.samples.T]))
        t0 += dur + gap_s
    table = np.vstack(blocks)

    with Path(csv_path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_s"] + list(channels))
        writer.writerows(table.tolist())
    Path(sidecar_path).write_text(json.dumps({
        "sample_rate": sample_rate,
        "montage": [list(p) for p in montage.pairs],
        "trial_boundaries": boundaries,
    }, indent=1))
