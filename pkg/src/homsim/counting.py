"""Single-photon-regime simulation: threshold detectors, time tags, coincidences.

Each clock slot carries one interference shot.  Attenuated coherent pulses on
threshold detectors click with probability 1 - exp(-efficiency * mu * i); the
click timestamp combines the slot clock, a draw from the pulse's temporal
intensity profile, and detector timing jitter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .montecarlo import ScenarioConfig, _TAG_COUNTING, event_stream, sample_offsets
from .interference import overlap_envelope

_CHUNK = 1 << 21  # slots per simulation chunk; fixed so streams are stable

MAX_CLICK_PROBABILITY = 0.1
DEFAULT_HISTOGRAM_HALF_BINS = 15


@dataclass(frozen=True)
class DetectorSpec:
    """A threshold (non-number-resolving) single-photon detector."""

    efficiency: float = 0.05
    timing_jitter_fwhm: float = 65.0  # ps; calibrated to a ~112 ps peak FWHM
    dark_rate: float = 0.0  # Hz
    dead_time: float = 0.0  # ps

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError(
                f"efficiency must be in [0, 1], got {self.efficiency}")
        if self.timing_jitter_fwhm < 0 or self.dark_rate < 0 or self.dead_time < 0:
            raise ValueError("detector parameters must be non-negative")


@dataclass(frozen=True)
class CountingConfig:
    """Parameters of a photon-counting HOM measurement."""

    scenario: ScenarioConfig
    mu_port: float  # mean photon number per output port per pulse
    n_pulses: int
    clock_period: float = 1000.0  # ps
    splitter_ratio: float = 0.507  # transmission fraction of the splitter
    detectors: tuple = (DetectorSpec(), DetectorSpec())
    gate_window: float | None = None  # ps, or None for ungated
    interference: bool = True  # False forces the modulation term to zero

    def __post_init__(self):
        if not 0.0 < self.splitter_ratio < 1.0:
            raise ValueError(
                f"splitter ratio must be in (0, 1), got {self.splitter_ratio}")
        if self.mu_port < 0:
            raise ValueError(f"mu_port must be non-negative, got {self.mu_port}")
        if self.n_pulses < 1:
            raise ValueError(f"n_pulses must be positive, got {self.n_pulses}")
        worst = max(d.efficiency for d in self.detectors) * self.mu_port * 2.0
        if -math.expm1(-worst) >= MAX_CLICK_PROBABILITY:
            raise ValueError(
                f"mu_port {self.mu_port} violates the small-signal regime: "
                f"worst-case click probability {-math.expm1(-worst):.3g} "
                f">= {MAX_CLICK_PROBABILITY}")


@dataclass(frozen=True)
class ClickStreams:
    """Sorted click timestamps (ps) on the two detectors."""

    times_c: np.ndarray
    times_d: np.ndarray
    n_pulses: int
    clock_period: float


@dataclass(frozen=True)
class CoincidenceHistogram:
    """Binned counts of click time differences t_c - t_d.

    counts[i] holds the bin centered at (i - half_bins) * bin_width.
    """

    bin_width: float
    counts: np.ndarray
    total_pulses: int
    gate_window: float | None = None

    @property
    def half_bins(self) -> int:
        return len(self.counts) // 2

    def count_at(self, bin_index: int) -> int:
        return int(self.counts[bin_index + self.half_bins])


def _apply_dead_time(times: np.ndarray, dead_time: float) -> np.ndarray:
    if dead_time <= 0 or len(times) == 0:
        return times
    keep = [0]
    last = times[0]
    for i in range(1, len(times)):
        if times[i] - last >= dead_time:
            keep.append(i)
            last = times[i]
    return times[np.array(keep)]


def simulate_clicks(config: CountingConfig) -> ClickStreams:
    """Simulate the time-tagged click streams for the full pulse train."""
    scenario = config.scenario
    pulse = scenario.pulse
    det_c, det_d = config.detectors
    cross = 2.0 * math.sqrt(config.splitter_ratio * (1.0 - config.splitter_ratio))
    seed = scenario.rng_seed
    clicks_c, clicks_d = [], []
    for chunk_index, start in enumerate(range(0, config.n_pulses, _CHUNK)):
        n = min(_CHUNK, config.n_pulses - start)
        rng = event_stream(seed, _TAG_COUNTING, chunk_index)
        dphi0, dt = sample_offsets(rng, scenario, n)
        if config.interference:
            modulation = cross * np.cos(dphi0) * overlap_envelope(dt, pulse)
        else:
            modulation = np.zeros(n)
        slots = (start + np.arange(n)) * config.clock_period
        for detector, sign, out in ((det_c, 1.0, clicks_c),
                                    (det_d, -1.0, clicks_d)):
            intensity = 1.0 + sign * modulation
            p_click = -np.expm1(-detector.efficiency * config.mu_port * intensity)
            clicked = rng.uniform(0.0, 1.0, size=n) < p_click
            n_clicked = int(clicked.sum())
            times = slots[clicked]
            times = times + rng.normal(0.0, pulse.tau_p, size=n_clicked)
            jitter_sigma = detector.timing_jitter_fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0)))
            times = times + rng.normal(0.0, jitter_sigma, size=n_clicked)
            out.append(times)
    duration_s = config.n_pulses * config.clock_period * 1e-12
    streams = []
    for detector, parts in ((det_c, clicks_c), (det_d, clicks_d)):
        times = np.concatenate(parts) if parts else np.empty(0)
        if detector.dark_rate > 0:
            rng = event_stream(seed, _TAG_COUNTING, 0xDA1C,
                               0 if detector is det_c else 1)
            n_dark = rng.poisson(detector.dark_rate * duration_s)
            dark = rng.uniform(0.0, config.n_pulses * config.clock_period,
                               size=n_dark)
            times = np.concatenate([times, dark])
        times = np.sort(times)
        times = _apply_dead_time(times, detector.dead_time)
        streams.append(times)
    return ClickStreams(times_c=streams[0], times_d=streams[1],
                        n_pulses=config.n_pulses,
                        clock_period=config.clock_period)


def build_histogram(streams: ClickStreams, bin_width: float = 1000.0,
                    gate_window: float | None = None,
                    half_bins: int = DEFAULT_HISTOGRAM_HALF_BINS) -> CoincidenceHistogram:
    """Histogram click time differences t_c - t_d over +-half_bins bins.

    With a gate window, a pair contributes only when both timestamps fall
    within +-gate/2 of their own clock-slot centers.
    """
    times_c = np.asarray(streams.times_c, dtype=float)
    times_d = np.asarray(streams.times_d, dtype=float)
    if np.any(np.diff(times_c) < 0) or np.any(np.diff(times_d) < 0):
        raise ValueError("click streams must be sorted")
    if gate_window is not None:
        times_c = _gated(times_c, streams.clock_period, gate_window)
        times_d = _gated(times_d, streams.clock_period, gate_window)
    counts = np.zeros(2 * half_bins + 1, dtype=np.int64)
    if len(times_c) == 0 or len(times_d) == 0:
        return CoincidenceHistogram(bin_width=bin_width, counts=counts,
                                    total_pulses=streams.n_pulses,
                                    gate_window=gate_window)
    reach = (half_bins + 0.5) * bin_width
    lo = np.searchsorted(times_d, times_c - reach, side="left")
    hi = np.searchsorted(times_d, times_c + reach, side="right")
    pairs_per_click = hi - lo
    total = int(pairs_per_click.sum())
    if total > 0:
        starts = np.cumsum(pairs_per_click) - pairs_per_click
        offsets = np.arange(total) - np.repeat(starts, pairs_per_click)
        d_index = np.repeat(lo, pairs_per_click) + offsets
        diffs = np.repeat(times_c, pairs_per_click) - times_d[d_index]
        bins = np.rint(diffs / bin_width).astype(np.int64) + half_bins
        in_range = (bins >= 0) & (bins < len(counts))
        np.add.at(counts, bins[in_range], 1)
    return CoincidenceHistogram(bin_width=bin_width, counts=counts,
                                total_pulses=streams.n_pulses,
                                gate_window=gate_window)


def _gated(times: np.ndarray, clock_period: float, gate_window: float):
    offsets = times - np.rint(times / clock_period) * clock_period
    return times[np.abs(offsets) <= gate_window / 2.0]


def vhom_from_histogram(hist: CoincidenceHistogram,
                        n_side_bins: int = 10) -> tuple[float, float]:
    """HOM visibility from the zero-delay bin against adjacent side bins.

    Uses n_side_bins/2 bins on each side of (and excluding) bin zero; the
    error combines the Poisson fluctuations of the center and side counts.
    """
    half = n_side_bins // 2
    if hist.half_bins < half:
        raise ValueError("histogram does not span enough side bins")
    side = np.array([hist.count_at(m) for m in range(-half, half + 1) if m != 0],
                    dtype=float)
    if np.all(side == 0):
        raise ValueError("side bins are empty; cannot normalize the dip")
    c0 = float(hist.count_at(0))
    side_mean = float(side.mean())
    v = 1.0 - c0 / side_mean
    var_side_mean = float(side.sum()) / len(side)**2
    err = math.sqrt(c0 / side_mean**2 + (c0 / side_mean**2)**2 * var_side_mean)
    return v, err


def write_timetags(path, streams: ClickStreams) -> None:
    """Text export: one integer timestamp (ps) per line with channel prefix."""
    with open(path, "w") as handle:
        for prefix, times in (("C", streams.times_c), ("D", streams.times_d)):
            for t in times:
                handle.write(f"{prefix},{int(round(t))}\n")


def read_timetags(path, n_pulses: int = 0,
                  clock_period: float = 1000.0) -> ClickStreams:
    """Read a time-tag text file back into sorted click streams."""
    channels = {"C": [], "D": []}
    with open(path) as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                channel, value = line.split(",")
                channels[channel].append(float(value))
            except (ValueError, KeyError) as exc:
                raise ValueError(f"{path}:{lineno}: bad time tag {line!r}") from exc
    return ClickStreams(times_c=np.sort(np.array(channels["C"])),
                        times_d=np.sort(np.array(channels["D"])),
                        n_pulses=n_pulses, clock_period=clock_period)


def write_histogram_csv(path, hist: CoincidenceHistogram) -> None:
    """CSV export: bin_center_ps,count."""
    with open(path, "w") as handle:
        handle.write("bin_center_ps,count\n")
        for i, count in enumerate(hist.counts):
            center = (i - hist.half_bins) * hist.bin_width
            handle.write(f"{center:g},{int(count)}\n")
