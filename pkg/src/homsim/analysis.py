"""Estimators and data interchange for intensity traces.

The second-order correlation g2 = <I^2>/<I>^2 is estimated directly from a
sampled intensity sequence; its uncertainty comes from batch means so the
estimate stays honest on correlated (e.g. ingested oscilloscope) data.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

MIN_TRACE_LENGTH = 100
DEFAULT_BATCHES = 20


@dataclass(frozen=True)
class IntensityTrace:
    """A sequence of non-negative intensities at a fixed sampling period."""

    samples: np.ndarray
    sample_period: float = 1000.0  # ps
    metadata: str = ""

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", samples)
        if np.any(samples < 0):
            raise ValueError("intensity samples must be non-negative")

    def __len__(self):
        return len(self.samples)


def estimate_g2(trace: IntensityTrace,
                n_batches: int = DEFAULT_BATCHES) -> tuple[float, float]:
    """Estimate g2 and its standard error from an intensity trace."""
    samples = trace.samples
    if len(samples) < MIN_TRACE_LENGTH:
        raise ValueError(
            f"trace too short for estimation: {len(samples)} < {MIN_TRACE_LENGTH}")
    mean = samples.mean()
    if mean <= 0:
        raise ValueError("trace mean must be positive")
    g2 = float((samples**2).mean() / mean**2)
    batch_size = len(samples) // n_batches
    batches = samples[:batch_size * n_batches].reshape(n_batches, batch_size)
    batch_g2 = batches.var(axis=1) / batches.mean(axis=1)**2 + 1.0
    stderr = float(batch_g2.std(ddof=1) / math.sqrt(n_batches))
    return g2, stderr


def vhom_from_g2(g2: float) -> float:
    """HOM dip visibility implied by a second-order correlation value."""
    return g2 - 1.0


def quantize_8bit(samples: np.ndarray) -> np.ndarray:
    """Re-quantize to 256 levels spanning [0, max], emulating an 8-bit scope."""
    samples = np.asarray(samples, dtype=float)
    top = samples.max()
    if top <= 0:
        return samples.copy()
    step = top / 255.0
    return np.rint(samples / step) * step


def ingest_trace(path, sample_period: float = 1000.0,
                 quantize: bool = False) -> IntensityTrace:
    """Read a trace CSV: one intensity per line, or time,intensity pairs."""
    values = []
    n_rows = 0
    with open(path) as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split(",")
            if n_rows == 0 and not _is_number(fields[-1]):
                continue  # header row
            try:
                value = float(fields[-1])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad row {line!r}") from exc
            if value < 0:
                raise ValueError(
                    f"{path}:{lineno}: negative intensity {value}")
            values.append(value)
            n_rows += 1
    if not values:
        raise ValueError(f"{path}: no intensity samples found")
    samples = np.array(values)
    metadata = f"ingested from {path}"
    if quantize:
        samples = quantize_8bit(samples)
        metadata += ", re-quantized to 8 bits"
    return IntensityTrace(samples=samples, sample_period=sample_period,
                          metadata=metadata)


def _is_number(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def write_trace(path, trace: IntensityTrace) -> None:
    """Write a trace as one intensity per line."""
    with open(path, "w") as handle:
        for value in trace.samples:
            handle.write(f"{float(value)!r}\n")


def result_payload(scenario_name: str, g2: float, g2_stderr: float,
                   n_samples: int, seed: int,
                   decisions: list[str]) -> dict:
    """Result object for JSON export; records every modeling toggle used."""
    return {
        "scenario": scenario_name,
        "g2": g2,
        "g2_stderr": g2_stderr,
        "vhom": vhom_from_g2(g2),
        "n_samples": n_samples,
        "seed": seed,
        "decisions": list(decisions),
    }


def write_result(path, payload: dict) -> None:
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
