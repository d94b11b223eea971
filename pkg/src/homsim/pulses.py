"""Chirped Gaussian pulse shapes, pulsed sources, and spectral filtering.

Conventions: times in picoseconds, frequencies in gigahertz
(1 GHz = 1e-3 ps^-1).  The complex field envelope of a pulse is
``E(t) = sqrt(I(t)) * exp(i*beta*t**2)`` with a Gaussian intensity profile
``I(t) = i0/(tau_p*sqrt(2*pi)) * exp(-t**2/(2*tau_p**2))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import NumericalGuardError

# FWHM of a Gaussian intensity profile over its r.m.s. width.
FWHM_OVER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))  # ~2.35482

# Minimum duration-bandwidth product (both intensity FWHM) of a Gaussian pulse.
TIME_BANDWIDTH_LIMIT = 2.0 * math.log(2.0) / math.pi  # ~0.44127

# Gaussian ratio between the full width at 1/10 maximum and the FWHM.
FW_TENTH_OVER_FWHM = math.sqrt(math.log(10.0) / math.log(2.0))  # ~1.82262

SPEED_OF_LIGHT_NM_GHZ = 2.99792458e8  # c in nm * GHz


def fwhm_to_sigma(fwhm: float) -> float:
    """Convert a Gaussian FWHM (time or frequency) to the r.m.s. width."""
    if fwhm < 0:
        raise ValueError(f"FWHM must be non-negative, got {fwhm}")
    return fwhm / FWHM_OVER_SIGMA


def sigma_to_fwhm(sigma: float) -> float:
    """Convert a Gaussian r.m.s. width to the FWHM."""
    if sigma < 0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    return sigma * FWHM_OVER_SIGMA


def fw_tenth_to_fwhm(fw_tenth: float) -> float:
    """Convert a Gaussian full width at 1/10 maximum to the FWHM."""
    if fw_tenth < 0:
        raise ValueError(f"width must be non-negative, got {fw_tenth}")
    return fw_tenth / FW_TENTH_OVER_FWHM


def wavelength_width_to_bandwidth(delta_lambda_nm: float, center_nm: float) -> float:
    """Spectral width in nm around a center wavelength -> width in GHz."""
    if center_nm <= 0:
        raise ValueError(f"center wavelength must be positive, got {center_nm}")
    return SPEED_OF_LIGHT_NM_GHZ * delta_lambda_nm / center_nm**2


@dataclass(frozen=True)
class PulseShape:
    """A frequency-chirped Gaussian pulse.

    tau_p : r.m.s. width of the intensity profile (ps)
    beta  : chirp coefficient (ps^-2); 0 means transform-limited
    nu0   : central optical frequency (GHz)
    i0    : total pulse intensity (dimensionless)
    """

    tau_p: float
    beta: float = 0.0
    nu0: float = 0.0
    i0: float = 1.0

    def __post_init__(self):
        if not self.tau_p > 0:
            raise ValueError(f"tau_p must be positive, got {self.tau_p}")
        if not self.i0 > 0:
            raise ValueError(f"i0 must be positive, got {self.i0}")

    @classmethod
    def from_fwhm(cls, fwhm: float, beta: float = 0.0, nu0: float = 0.0,
                  i0: float = 1.0) -> "PulseShape":
        """Build from the intensity-profile FWHM duration (ps)."""
        if not fwhm > 0:
            raise ValueError(f"FWHM must be positive, got {fwhm}")
        return cls(tau_p=fwhm_to_sigma(fwhm), beta=beta, nu0=nu0, i0=i0)

    @property
    def fwhm(self) -> float:
        """Intensity-profile FWHM duration (ps)."""
        return sigma_to_fwhm(self.tau_p)

    @property
    def transform_limited_bandwidth(self) -> float:
        """Intensity FWHM bandwidth (GHz) at zero chirp for this duration."""
        return 1e3 * TIME_BANDWIDTH_LIMIT / self.fwhm

    @property
    def bandwidth(self) -> float:
        """Intensity FWHM bandwidth (GHz) including chirp broadening."""
        return self.transform_limited_bandwidth * math.sqrt(
            1.0 + 16.0 * self.beta**2 * self.tau_p**4)

    def intensity(self, t):
        """Temporal intensity profile I(t)."""
        return (self.i0 / (self.tau_p * math.sqrt(2.0 * math.pi))
                * np.exp(-np.asarray(t, dtype=float)**2 / (2.0 * self.tau_p**2)))

    def field_envelope(self, t):
        """Complex field envelope sqrt(I(t)) * exp(i*beta*t^2)."""
        t = np.asarray(t, dtype=float)
        return np.sqrt(self.intensity(t)) * np.exp(1j * self.beta * t**2)


@dataclass(frozen=True)
class SourceSpec:
    """A pulsed light source: pulse shape plus emission statistics.

    jitter_fwhm  : FWHM of the Gaussian emission-time jitter (ps)
    phase_random : each emitted pulse carries an independent phase
                   uniform on [0, 2*pi)
    """

    pulse: PulseShape
    jitter_fwhm: float = 0.0
    phase_random: bool = True

    def __post_init__(self):
        if self.jitter_fwhm < 0:
            raise ValueError(f"jitter FWHM must be non-negative, got {self.jitter_fwhm}")

    @property
    def jitter_sigma(self) -> float:
        return fwhm_to_sigma(self.jitter_fwhm)


class FilterShape(Enum):
    GAUSSIAN = "gaussian"
    FLAT_TOP = "flat_top"


@dataclass(frozen=True)
class FilterSpec:
    """A spectral filter, centered on the pulse spectrum (zero detuning).

    fwhm_bandwidth : intensity-transmission FWHM in GHz; for a flat-top
                     filter this is the full width of the rectangular window
    """

    shape: FilterShape
    fwhm_bandwidth: float
    center_frequency: float = 0.0

    def __post_init__(self):
        if not self.fwhm_bandwidth > 0:
            raise ValueError(
                f"filter bandwidth must be positive, got {self.fwhm_bandwidth}")


def chirp_from_bandwidth(measured_fwhm_bandwidth: float, tau_p: float) -> float:
    """Chirp coefficient (ps^-2) from measured bandwidth (GHz) and tau_p (ps).

    Inverts the Gaussian chirp-broadening relation
    ``bw = bw_limit * sqrt(1 + 16*beta^2*tau_p^4)``.
    """
    if not tau_p > 0:
        raise ValueError(f"tau_p must be positive, got {tau_p}")
    limit = 1e3 * TIME_BANDWIDTH_LIMIT / sigma_to_fwhm(tau_p)
    ratio = measured_fwhm_bandwidth / limit
    if ratio < 1.0 - 1e-12:
        raise ValueError(
            f"measured bandwidth {measured_fwhm_bandwidth} GHz is below the "
            f"transform limit {limit:.4g} GHz for tau_p = {tau_p} ps; "
            "the width and bandwidth measurements are inconsistent")
    return math.sqrt(max(ratio**2 - 1.0, 0.0)) / (4.0 * tau_p**2)


def _gaussian_parameter(pulse: PulseShape) -> complex:
    """Complex Gaussian parameter G of the field envelope exp(-G*t^2)."""
    return 1.0 / (4.0 * pulse.tau_p**2) - 1j * pulse.beta


def _pulse_from_parameter(gamma: complex, nu0: float, i0: float) -> PulseShape:
    tau_p = math.sqrt(1.0 / (4.0 * gamma.real))
    return PulseShape(tau_p=tau_p, beta=-gamma.imag, nu0=nu0, i0=i0)


def _gaussian_filter_parameter(fwhm_bandwidth_ghz: float) -> float:
    """Spectral Gaussian parameter Gf of an amplitude filter exp(-w^2/(4*Gf)).

    The intensity transmission exp(-w^2/(2*Gf)) has the requested FWHM in
    linear frequency.
    """
    bw = 1e-3 * fwhm_bandwidth_ghz  # ps^-1
    return (math.pi * bw)**2 / (2.0 * math.log(2.0))


def apply_spectral_filter(pulse: PulseShape, filt: FilterSpec,
                          n_points: int = 1 << 14,
                          window_factor: float = 32.0) -> PulseShape:
    """Propagate a pulse through a spectral filter at zero detuning.

    Gaussian filters use the closed-form composition of complex Gaussian
    parameters in the spectral domain; flat-top filters go through the
    numeric FFT path.  Returns the chirped-Gaussian parameters of the
    filtered pulse.
    """
    if math.isinf(filt.fwhm_bandwidth):
        return pulse
    if filt.shape is FilterShape.GAUSSIAN:
        gamma = _gaussian_parameter(pulse)
        gamma_f = _gaussian_filter_parameter(filt.fwhm_bandwidth)
        inv = 1.0 / (4.0 * gamma) + 1.0 / (4.0 * gamma_f)
        gamma_out = 1.0 / (4.0 * inv)
        # Spectral intensity is exp(-a*w^2); transmitted energy ~ 1/sqrt(a).
        a_in = 2.0 * (1.0 / (4.0 * gamma)).real
        a_out = a_in + 1.0 / (2.0 * gamma_f)
        i0_out = pulse.i0 * math.sqrt(a_in / a_out)
        return _pulse_from_parameter(gamma_out, pulse.nu0, i0_out)
    return apply_spectral_filter_numeric(pulse, filt, n_points=n_points,
                                         window_factor=window_factor)


def apply_spectral_filter_numeric(pulse: PulseShape, filt: FilterSpec,
                                  n_points: int = 1 << 14,
                                  window_factor: float = 32.0) -> PulseShape:
    """FFT route: filter the field envelope and refit Gaussian parameters.

    Works for any filter shape; also serves as the independent check of the
    Gaussian closed form.  tau_p is refit from the half-maximum crossings of
    the output intensity and beta from the quadratic phase of the envelope
    across the bright region.  (The second temporal moment is not usable
    here: ideal flat-top edges produce 1/t^2 ringing tails whose second
    moment grows with the grid span.)
    """
    # The output can be as long as the transform limit of the filter allows.
    filter_limit_fwhm = 1e3 * TIME_BANDWIDTH_LIMIT / filt.fwhm_bandwidth
    span = window_factor * max(pulse.fwhm, filter_limit_fwhm)
    if n_points < 1024 or span < 8.0 * pulse.fwhm:
        raise NumericalGuardError(
            f"FFT grid too coarse: span {span:.3g} ps at {n_points} points "
            f"cannot resolve a {pulse.fwhm:.3g} ps pulse")
    t = (np.arange(n_points) - n_points // 2) * (span / n_points)
    dt = span / n_points
    field = pulse.field_envelope(t)
    spectrum = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(field)))
    nu = np.fft.fftshift(np.fft.fftfreq(n_points, d=dt))  # ps^-1
    bw = 1e-3 * filt.fwhm_bandwidth
    if filt.shape is FilterShape.FLAT_TOP:
        transmission = (np.abs(nu) <= bw / 2.0).astype(float)
    elif filt.shape is FilterShape.GAUSSIAN:
        gamma_f = _gaussian_filter_parameter(filt.fwhm_bandwidth)
        transmission = np.exp(-(2.0 * np.pi * nu)**2 / (4.0 * gamma_f))
    else:
        raise ValueError(f"unknown filter shape {filt.shape}")
    energy_in = float(np.sum(np.abs(spectrum)**2))
    spectrum = spectrum * transmission
    energy_out = float(np.sum(np.abs(spectrum)**2))
    if energy_out <= 0.0:
        raise NumericalGuardError("filter removed all pulse energy")
    out = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(spectrum)))
    intensity = np.abs(out)**2
    fwhm_out = _half_max_width(t, intensity)
    tau_out = fwhm_to_sigma(fwhm_out)
    beta_out = _fit_quadratic_phase(t, out, intensity)
    i0_out = pulse.i0 * energy_out / energy_in
    return PulseShape(tau_p=tau_out, beta=beta_out, nu0=pulse.nu0, i0=i0_out)


def _half_max_width(t, intensity):
    """FWHM of a sampled profile, linearly interpolated at the crossings."""
    peak = int(np.argmax(intensity))
    half = intensity[peak] / 2.0
    lo = peak
    while lo > 0 and intensity[lo - 1] >= half:
        lo -= 1
    hi = peak
    while hi < len(t) - 1 and intensity[hi + 1] >= half:
        hi += 1
    if lo == 0 or hi == len(t) - 1:
        raise NumericalGuardError("pulse does not fit in the FFT window")

    def crossing(inner, outer):
        f = (half - intensity[inner]) / (intensity[outer] - intensity[inner])
        return t[inner] + f * (t[outer] - t[inner])

    return crossing(hi, hi + 1) - crossing(lo, lo - 1)


def _fit_quadratic_phase(t, field, intensity):
    """Intensity-weighted quadratic fit of the unwrapped envelope phase.

    Restricted to the contiguous above-half-maximum region so the fit sees
    the same part of the pulse the duration fit does and stays clear of the
    phase jumps at ringing zeros.
    """
    peak = int(np.argmax(intensity))
    threshold = intensity[peak] / 2.0
    lo = peak
    while lo > 0 and intensity[lo - 1] >= threshold:
        lo -= 1
    hi = peak
    while hi < len(t) - 1 and intensity[hi + 1] >= threshold:
        hi += 1
    sel = slice(lo, hi + 1)
    phase = np.unwrap(np.angle(field[sel]))
    weights = np.sqrt(intensity[sel])
    coeffs = np.polynomial.polynomial.polyfit(t[sel], phase, 2, w=weights)
    return float(coeffs[2])
