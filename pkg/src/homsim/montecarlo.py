"""Monte-Carlo engine: event sampling, g2/visibility estimation, delay scans.

Reproducibility contract: every random draw comes from a counter-based
Philox stream keyed by (seed, structured stream id), so results are
bit-identical for a given seed regardless of how repeats are scheduled
across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .interference import EventSample, analytic_g2, overlap_envelope
from .pulses import PulseShape, SourceSpec, fwhm_to_sigma

JITTER_MODES = ("per_source", "combined")

# Fixed stream-id tags; keeps independent uses of one seed from colliding.
_TAG_RUN = 1
_TAG_TRACE = 2
_TAG_COUNTING = 3


@dataclass(frozen=True)
class ScenarioConfig:
    """Parameters of one interference scenario.

    jitter_mode selects how the quoted jitter maps onto the arrival-time
    offset: "per_source" draws an independent Gaussian emission time per
    source and takes the difference; "combined" applies source_a's jitter
    FWHM directly to the offset.
    """

    source_a: SourceSpec
    source_b: SourceSpec
    systematic_delay: float = 0.0
    n_samples: int = 1_000_000
    n_repeats: int = 100
    rng_seed: int = 0
    jitter_mode: str = "per_source"

    def __post_init__(self):
        if self.n_samples < 1_000:
            raise ValueError(
                f"n_samples must be at least 1000, got {self.n_samples}")
        if self.n_repeats < 1:
            raise ValueError(f"n_repeats must be positive, got {self.n_repeats}")
        if self.source_a.pulse != self.source_b.pulse:
            raise ValueError("both sources must share one pulse shape")
        if self.jitter_mode not in JITTER_MODES:
            raise ValueError(f"jitter_mode must be one of {JITTER_MODES}, "
                             f"got {self.jitter_mode!r}")

    @property
    def pulse(self) -> PulseShape:
        return self.source_a.pulse

    @property
    def combined_sigma(self) -> float:
        """R.m.s. width of the arrival-time offset distribution (ps)."""
        if self.jitter_mode == "combined":
            return self.source_a.jitter_sigma
        return math.hypot(self.source_a.jitter_sigma, self.source_b.jitter_sigma)


@dataclass(frozen=True)
class RunResult:
    g2: float
    vhom: float
    stderr: float
    n_samples: int
    n_repeats: int
    rng_seed: int


@dataclass(frozen=True)
class ScanResult:
    delays: list = field(default_factory=list)
    g2_values: list = field(default_factory=list)
    vhom_values: list = field(default_factory=list)
    stderr: list = field(default_factory=list)

    def __post_init__(self):
        n = len(self.delays)
        if not (len(self.g2_values) == len(self.vhom_values)
                == len(self.stderr) == n):
            raise ValueError("scan result columns must have equal length")


def event_stream(seed: int, *path: int) -> np.random.Generator:
    """Counter-based RNG stream for a structured id under one seed."""
    sub = np.uint64(0)
    for part in path:
        sub = sub * np.uint64(1_000_003) + np.uint64(part)
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), sub], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_offsets(rng: np.random.Generator, config: ScenarioConfig,
                   n: int, delay: float | None = None):
    """Vectorized draw of (dphi0, dt) arrays for n interference shots."""
    delay = config.systematic_delay if delay is None else delay
    dphi0 = rng.uniform(0.0, 2.0 * np.pi, size=n)
    if config.jitter_mode == "combined":
        dt = delay + rng.normal(0.0, 1.0, size=n) * config.source_a.jitter_sigma
    else:
        j_a = rng.normal(0.0, 1.0, size=n) * config.source_a.jitter_sigma
        j_b = rng.normal(0.0, 1.0, size=n) * config.source_b.jitter_sigma
        dt = delay + j_a - j_b
    return dphi0, dt


def sample_event(rng: np.random.Generator, config: ScenarioConfig) -> EventSample:
    """Draw a single interference shot."""
    dphi0, dt = sample_offsets(rng, config, 1)
    return EventSample(dphi0=float(dphi0[0]), dt=float(dt[0]))


def port_intensities(dphi0, dt, pulse: PulseShape):
    """Vectorized single-shot intensity at port c (i_d = 2*i0 - i_c)."""
    modulation = np.cos(dphi0) * overlap_envelope(dt, pulse)
    return pulse.i0 * (1.0 + modulation)


def estimate_g2_samples(samples) -> float:
    samples = np.asarray(samples, dtype=float)
    mean = samples.mean()
    return float((samples**2).mean() / mean**2)


def _repeat_g2(config: ScenarioConfig, repeat: int,
               delay: float | None = None) -> float:
    rng = event_stream(config.rng_seed, _TAG_RUN, repeat)
    dphi0, dt = sample_offsets(rng, config, config.n_samples, delay=delay)
    return estimate_g2_samples(port_intensities(dphi0, dt, config.pulse))


def run(config: ScenarioConfig, threads: int = 1,
        delay: float | None = None) -> RunResult:
    """Estimate g2 and V_HOM; mean and spread over n_repeats repeats.

    Each repeat uses its own counter-based stream, so the result does not
    depend on the thread count.
    """
    repeats = range(config.n_repeats)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(
                lambda r: _repeat_g2(config, r, delay=delay), repeats))
    else:
        values = [_repeat_g2(config, r, delay=delay) for r in repeats]
    values = np.array(values)
    g2 = float(values.mean())
    stderr = float(values.std(ddof=1)) if config.n_repeats > 1 else 0.0
    return RunResult(g2=g2, vhom=g2 - 1.0, stderr=stderr,
                     n_samples=config.n_samples, n_repeats=config.n_repeats,
                     rng_seed=config.rng_seed)


def scan_delay(config: ScenarioConfig, delay_min: float, delay_max: float,
               step: float, threads: int = 1) -> ScanResult:
    """Run the estimator over a grid of systematic delays."""
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    delays = []
    d = delay_min
    while d <= delay_max + 1e-9 * step:
        delays.append(round(d, 12))
        d += step
    g2s, vhoms, errs = [], [], []
    for d in delays:
        result = run(config, threads=threads, delay=d)
        g2s.append(result.g2)
        vhoms.append(result.vhom)
        errs.append(result.stderr)
    return ScanResult(delays=delays, g2_values=g2s, vhom_values=vhoms,
                      stderr=errs)


def simulate_trace(config: ScenarioConfig, n: int, repeat: int = 0):
    """One sequence of single-port interference intensities (1 per clock)."""
    rng = event_stream(config.rng_seed, _TAG_TRACE, repeat)
    dphi0, dt = sample_offsets(rng, config, n)
    return port_intensities(dphi0, dt, config.pulse)


def jitter_tolerance(pulse_after_filter: PulseShape, combined_sigma: float,
                     v_target: float) -> float:
    """Systematic delay at which the expected visibility drops to v_target.

    The visibility analytic_g2(mu) - 1 is monotone decreasing in |mu|, so a
    bisection brackets the crossing; returns the positive tolerance (the
    acceptable delay range is +-tolerance).
    """
    if not 0.0 < v_target < 0.5:
        raise ValueError(f"v_target must be in (0, 0.5), got {v_target}")
    if analytic_g2(0.0, combined_sigma, pulse_after_filter) - 1.0 < v_target:
        raise ValueError(
            f"visibility target {v_target} is unreachable even at zero "
            "delay: the source is too jittery or too chirped")
    lo, hi = 0.0, pulse_after_filter.tau_p
    while analytic_g2(hi, combined_sigma, pulse_after_filter) - 1.0 > v_target:
        hi *= 2.0
        if hi > 1e9:
            raise ValueError("failed to bracket the visibility crossing")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if analytic_g2(mid, combined_sigma, pulse_after_filter) - 1.0 > v_target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
