"""Simulator and analysis toolkit for first-order interference between
independent, phase-randomized, frequency-chirped Gaussian laser pulses."""

from .errors import ConfigError, NumericalGuardError
from .pulses import (FilterShape, FilterSpec, PulseShape, SourceSpec,
                     apply_spectral_filter, chirp_from_bandwidth,
                     fwhm_to_sigma, sigma_to_fwhm)
from .interference import (EventSample, PortPair, analytic_g2,
                           detector_averaged_intensity,
                           instantaneous_intensity, single_shot_outputs)
from .montecarlo import (RunResult, ScanResult, ScenarioConfig, event_stream,
                         jitter_tolerance, run, sample_event, scan_delay,
                         simulate_trace)
from .counting import (ClickStreams, CoincidenceHistogram, CountingConfig,
                       DetectorSpec, build_histogram, simulate_clicks,
                       vhom_from_histogram)
from .analysis import (IntensityTrace, estimate_g2, ingest_trace, vhom_from_g2,
                       write_trace)
from .config import ResolvedConfig, load_config

__version__ = "0.1.0"
