"""Scenario configuration files: flat key=value text with sections.

Unknown sections or keys are hard errors; a silent typo here would corrupt
physics parameters.  Parsing resolves measured quantities (FWHM widths,
bandwidths) into model parameters and records every modeling decision taken
along the way for provenance.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field

from .counting import CountingConfig, DetectorSpec
from .errors import ConfigError
from .montecarlo import JITTER_MODES, ScenarioConfig
from .pulses import (FW_TENTH_OVER_FWHM, FilterShape, FilterSpec, PulseShape,
                     SourceSpec, apply_spectral_filter, chirp_from_bandwidth,
                     fw_tenth_to_fwhm, fwhm_to_sigma,
                     wavelength_width_to_bandwidth)

_ALLOWED_KEYS = {
    "pulse": {"width_fwhm_ps", "bandwidth_fwhm_ghz", "bandwidth_fw_tenth_nm",
              "center_wavelength_nm", "center_frequency_ghz"},
    "source_a": {"jitter_fwhm_ps"},
    "source_b": {"jitter_fwhm_ps"},
    "run": {"seed", "samples", "repeats", "systematic_delay_ps", "jitter_mode"},
    "filter": {"shape", "fwhm_bandwidth_ghz"},
    "counting": {"mean_photons_per_port", "pulses", "clock_period_ps",
                 "splitter_transmission", "gate_ps"},
    "detectors": {"efficiency", "timing_jitter_fwhm_ps", "dark_rate_hz",
                  "dead_time_ps"},
}
_REQUIRED_SECTIONS = ("pulse", "source_a", "source_b")


@dataclass
class ResolvedConfig:
    """A fully resolved scenario plus provenance of every derived value."""

    name: str
    scenario: ScenarioConfig
    counting: CountingConfig | None = None
    decisions: list = field(default_factory=list)


def load_config(path, seed: int | None = None, samples: int | None = None,
                repeats: int | None = None) -> ResolvedConfig:
    """Parse and resolve a scenario file; CLI overrides take precedence."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",),
                                       interpolation=None)
    try:
        read = parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not read:
        raise ConfigError(f"config file not found: {path}")
    _validate_keys(parser, path)
    decisions: list[str] = []

    pulse = _resolve_pulse(parser["pulse"], decisions)
    if parser.has_section("filter"):
        filt = _resolve_filter(parser["filter"])
        pulse = apply_spectral_filter(pulse, filt)
        decisions.append(
            f"pulse propagated through {filt.shape.value} filter "
            f"({filt.fwhm_bandwidth:g} GHz): model-derived output "
            f"tau_p={pulse.tau_p:.4g} ps, beta={pulse.beta:.4g} ps^-2 "
            "(not measured values)")

    source_a = SourceSpec(pulse=pulse,
                          jitter_fwhm=_get_float(parser, "source_a",
                                                 "jitter_fwhm_ps", 0.0))
    source_b = SourceSpec(pulse=pulse,
                          jitter_fwhm=_get_float(parser, "source_b",
                                                 "jitter_fwhm_ps", 0.0))
    run = parser["run"] if parser.has_section("run") else {}
    jitter_mode = run.get("jitter_mode", "per_source")
    if jitter_mode not in JITTER_MODES:
        raise ConfigError(f"{path}: jitter_mode must be one of {JITTER_MODES}")
    decisions.append(f"jitter_mode={jitter_mode}")
    try:
        scenario = ScenarioConfig(
            source_a=source_a,
            source_b=source_b,
            systematic_delay=float(run.get("systematic_delay_ps", 0.0)),
            n_samples=samples if samples is not None
            else int(run.get("samples", 1_000_000)),
            n_repeats=repeats if repeats is not None
            else int(run.get("repeats", 100)),
            rng_seed=seed if seed is not None else int(run.get("seed", 0)),
            jitter_mode=jitter_mode,
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    counting = None
    if parser.has_section("counting"):
        counting = _resolve_counting(parser, scenario, path)
    name = os.path.splitext(os.path.basename(str(path)))[0]
    return ResolvedConfig(name=name, scenario=scenario, counting=counting,
                          decisions=decisions)


def _validate_keys(parser: configparser.ConfigParser, path) -> None:
    for section in parser.sections():
        if section not in _ALLOWED_KEYS:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key in parser[section]:
            if key not in _ALLOWED_KEYS[section]:
                raise ConfigError(
                    f"{path}: unknown key '{key}' in section [{section}]")
    for section in _REQUIRED_SECTIONS:
        if not parser.has_section(section):
            raise ConfigError(f"{path}: missing required section [{section}]")


def _resolve_pulse(section, decisions: list) -> PulseShape:
    try:
        width = float(section["width_fwhm_ps"])
    except KeyError as exc:
        raise ConfigError("pulse section requires width_fwhm_ps") from exc
    tau_p = fwhm_to_sigma(width)
    if "bandwidth_fwhm_ghz" in section:
        bandwidth = float(section["bandwidth_fwhm_ghz"])
    elif "bandwidth_fw_tenth_nm" in section:
        if "center_wavelength_nm" not in section:
            raise ConfigError(
                "bandwidth_fw_tenth_nm requires center_wavelength_nm")
        fw_tenth_nm = float(section["bandwidth_fw_tenth_nm"])
        center_nm = float(section["center_wavelength_nm"])
        fw_tenth_ghz = wavelength_width_to_bandwidth(fw_tenth_nm, center_nm)
        bandwidth = fw_tenth_to_fwhm(fw_tenth_ghz)
        decisions.append(
            f"bandwidth converted from {fw_tenth_nm:g} nm full width at 1/10 "
            f"maximum at {center_nm:g} nm using the Gaussian ratio "
            f"FW(1/10)/FWHM={FW_TENTH_OVER_FWHM:.4g}: {bandwidth:.4g} GHz FWHM")
    else:
        raise ConfigError(
            "pulse section requires bandwidth_fwhm_ghz or bandwidth_fw_tenth_nm")
    try:
        beta = chirp_from_bandwidth(bandwidth, tau_p)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    decisions.append(
        f"chirp derived from width {width:g} ps and bandwidth "
        f"{bandwidth:.4g} GHz: beta={beta:.4g} ps^-2")
    nu0 = float(section.get("center_frequency_ghz", 0.0))
    return PulseShape(tau_p=tau_p, beta=beta, nu0=nu0)


def _resolve_filter(section) -> FilterSpec:
    shape_name = section.get("shape", "flat_top")
    try:
        shape = FilterShape(shape_name)
    except ValueError as exc:
        raise ConfigError(f"unknown filter shape {shape_name!r}") from exc
    try:
        return FilterSpec(shape=shape,
                          fwhm_bandwidth=float(section["fwhm_bandwidth_ghz"]))
    except KeyError as exc:
        raise ConfigError("filter section requires fwhm_bandwidth_ghz") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _resolve_counting(parser, scenario: ScenarioConfig, path) -> CountingConfig:
    section = parser["counting"]
    det = parser["detectors"] if parser.has_section("detectors") else {}
    detector = DetectorSpec(
        efficiency=float(det.get("efficiency", 0.05)),
        timing_jitter_fwhm=float(det.get("timing_jitter_fwhm_ps", 65.0)),
        dark_rate=float(det.get("dark_rate_hz", 0.0)),
        dead_time=float(det.get("dead_time_ps", 0.0)),
    )
    gate = section.get("gate_ps")
    try:
        return CountingConfig(
            scenario=scenario,
            mu_port=float(section["mean_photons_per_port"]),
            n_pulses=int(section.get("pulses", 10_000_000)),
            clock_period=float(section.get("clock_period_ps", 1000.0)),
            splitter_ratio=float(section.get("splitter_transmission", 0.507)),
            detectors=(detector, detector),
            gate_window=float(gate) if gate is not None else None,
        )
    except KeyError as exc:
        raise ConfigError(
            f"{path}: counting section requires mean_photons_per_port") from exc
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _get_float(parser, section: str, key: str, default: float) -> float:
    if not parser.has_section(section):
        return default
    return float(parser[section].get(key, default))
