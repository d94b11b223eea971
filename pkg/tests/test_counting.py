import math

import numpy as np
import pytest
from scipy import stats

from homsim.counting import (ClickStreams, CoincidenceHistogram, CountingConfig,
                             DetectorSpec, build_histogram, read_timetags,
                             simulate_clicks, vhom_from_histogram,
                             write_histogram_csv, write_timetags)
from homsim.montecarlo import ScenarioConfig
from homsim.pulses import PulseShape, SourceSpec

PULSE = PulseShape(tau_p=12.74, beta=5.0e-3)


def make_scenario(seed=101, jitter=(3.6, 3.8)):
    return ScenarioConfig(
        source_a=SourceSpec(pulse=PULSE, jitter_fwhm=jitter[0]),
        source_b=SourceSpec(pulse=PULSE, jitter_fwhm=jitter[1]),
        n_samples=1_000, n_repeats=1, rng_seed=seed)


def make_counting(n_pulses=200_000, **overrides):
    defaults = dict(scenario=make_scenario(), mu_port=0.05, n_pulses=n_pulses)
    defaults.update(overrides)
    return CountingConfig(**defaults)


class TestConfigValidation:
    def test_small_signal_guard(self):
        with pytest.raises(ValueError, match="small-signal"):
            make_counting(mu_port=2.0,
                          detectors=(DetectorSpec(efficiency=0.9),
                                     DetectorSpec(efficiency=0.9)))

    def test_bad_splitter(self):
        with pytest.raises(ValueError):
            make_counting(splitter_ratio=1.0)

    def test_bad_efficiency(self):
        with pytest.raises(ValueError):
            DetectorSpec(efficiency=1.5)


class TestClickSimulation:
    def test_zero_efficiency_means_no_clicks(self):
        config = make_counting(detectors=(DetectorSpec(efficiency=0.0),
                                          DetectorSpec(efficiency=0.0)))
        streams = simulate_clicks(config)
        assert len(streams.times_c) == 0 and len(streams.times_d) == 0

    def test_singles_rates_match_expectation(self):
        config = make_counting(n_pulses=2_000_000)
        streams = simulate_clicks(config)
        # Phase randomization averages the +-modulation away, so the click
        # rate sits at 1 - exp(-eta*mu) up to Poisson fluctuations (~1.4%).
        p0 = -math.expm1(-0.05 * config.mu_port)
        for times in (streams.times_c, streams.times_d):
            rate = len(times) / config.n_pulses
            assert rate == pytest.approx(p0, rel=0.06)

    def test_streams_sorted_and_deterministic(self):
        config = make_counting()
        s1 = simulate_clicks(config)
        s2 = simulate_clicks(config)
        np.testing.assert_array_equal(s1.times_c, s2.times_c)
        np.testing.assert_array_equal(s1.times_d, s2.times_d)
        assert np.all(np.diff(s1.times_c) >= 0)

    def test_chunking_invisible_in_totals(self):
        # Totals over a train longer than one chunk stay near expectation.
        config = make_counting(n_pulses=(1 << 21) + 50_000)
        streams = simulate_clicks(config)
        expected = -math.expm1(-0.05 * config.mu_port) * config.n_pulses
        assert len(streams.times_c) == pytest.approx(expected, rel=0.02)

    def test_dead_time_enforces_minimum_spacing(self):
        config = make_counting(
            detectors=(DetectorSpec(dead_time=5_000.0), DetectorSpec()))
        streams = simulate_clicks(config)
        assert np.all(np.diff(streams.times_c) >= 5_000.0)

    def test_dark_counts_add_background(self):
        quiet = simulate_clicks(make_counting())
        noisy = simulate_clicks(make_counting(
            detectors=(DetectorSpec(dark_rate=1e6), DetectorSpec())))
        added = len(noisy.times_c) - len(quiet.times_c)
        # 1 MHz over n_pulses * 1 ns of acquisition
        expected = 1e6 * make_counting().n_pulses * 1e-9
        assert added == pytest.approx(expected, rel=0.1)
        assert len(noisy.times_d) == len(quiet.times_d)


class TestHistogram:
    def test_unsorted_stream_rejected(self):
        streams = ClickStreams(times_c=np.array([3.0, 1.0]),
                               times_d=np.array([0.0]),
                               n_pulses=10, clock_period=1000.0)
        with pytest.raises(ValueError, match="sorted"):
            build_histogram(streams)

    def test_empty_streams_give_empty_histogram(self):
        streams = ClickStreams(times_c=np.empty(0), times_d=np.empty(0),
                               n_pulses=10, clock_period=1000.0)
        hist = build_histogram(streams)
        assert hist.counts.sum() == 0

    def test_hand_built_pairs(self):
        # Clicks in the same slot -> bin 0; adjacent slots -> bins +-1.
        streams = ClickStreams(
            times_c=np.array([1000.0, 5000.0, 9000.0]),
            times_d=np.array([1000.0, 4000.0, 50_000.0]),
            n_pulses=100, clock_period=1000.0)
        hist = build_histogram(streams, bin_width=1000.0, half_bins=15)
        assert hist.count_at(0) == 1
        assert hist.count_at(1) == 1  # 5000 - 4000
        assert hist.count_at(5) == 1  # 9000 - 4000
        assert hist.count_at(-3) == 1  # 1000 - 4000
        assert hist.count_at(4) == 1 and hist.count_at(8) == 1
        assert hist.counts.sum() == 6  # the 50 us click falls out of range

    def test_gating_drops_off_center_clicks(self):
        streams = ClickStreams(
            times_c=np.array([1000.0, 2300.0]),
            times_d=np.array([1010.0]),
            n_pulses=100, clock_period=1000.0)
        hist = build_histogram(streams, gate_window=112.0)
        assert hist.counts.sum() == 1  # the 2300 ps click sits outside the gate
        assert hist.count_at(0) == 1

    def test_side_bins_flat_without_interference(self):
        config = make_counting(n_pulses=500_000, interference=False)
        hist = build_histogram(simulate_clicks(config))
        side = np.array([hist.count_at(m) for m in range(-7, 8) if m != 0])
        chi2 = float(((side - side.mean())**2 / side.mean()).sum())
        assert stats.chi2.sf(chi2, df=len(side) - 1) > 0.01

    def test_no_interference_center_matches_sides(self):
        # With the modulation forced off, the same-slot coincidence rate
        # equals the accidental rate, so the dip disappears.
        config = make_counting(n_pulses=1_000_000, interference=False)
        hist = build_histogram(simulate_clicks(config))
        v, err = vhom_from_histogram(hist)
        assert abs(v) < 4.0 * err

    def test_interference_digs_a_dip(self):
        config = make_counting(n_pulses=1_000_000)
        hist = build_histogram(simulate_clicks(config))
        v, err = vhom_from_histogram(hist)
        assert v > 0.25  # well clear of zero for chirped 50 GHz sources


class TestVisibilityEstimator:
    @staticmethod
    def flat_histogram(center, side):
        counts = np.full(31, side, dtype=np.int64)
        counts[15] = center
        return CoincidenceHistogram(bin_width=1000.0, counts=counts,
                                    total_pulses=1_000)

    def test_no_dip(self):
        v, _ = vhom_from_histogram(self.flat_histogram(400, 400))
        assert v == pytest.approx(0.0, abs=1e-12)

    def test_half_dip(self):
        v, _ = vhom_from_histogram(self.flat_histogram(200, 400))
        assert v == pytest.approx(0.5, abs=1e-12)

    def test_error_shrinks_with_counts(self):
        _, small = vhom_from_histogram(self.flat_histogram(100, 200))
        _, large = vhom_from_histogram(self.flat_histogram(10_000, 20_000))
        assert large < small

    def test_empty_side_bins_rejected(self):
        with pytest.raises(ValueError, match="side bins"):
            vhom_from_histogram(self.flat_histogram(5, 0))


class TestInputOutput:
    def test_timetag_round_trip(self, tmp_path):
        streams = simulate_clicks(make_counting(n_pulses=20_000))
        path = tmp_path / "tags.txt"
        write_timetags(path, streams)
        loaded = read_timetags(path, n_pulses=20_000)
        assert len(loaded.times_c) == len(streams.times_c)
        np.testing.assert_allclose(loaded.times_c, streams.times_c, atol=0.5)
        first = path.read_text().splitlines()[0]
        channel, value = first.split(",")
        assert channel == "C" and value == str(int(value))

    def test_bad_timetag_line_reports_position(self, tmp_path):
        path = tmp_path / "tags.txt"
        path.write_text("C,1000\nE,2000\n")
        with pytest.raises(ValueError, match="tags.txt:2"):
            read_timetags(path)

    def test_histogram_csv(self, tmp_path):
        hist = TestVisibilityEstimator.flat_histogram(7, 3)
        path = tmp_path / "hist.csv"
        write_histogram_csv(path, hist)
        lines = path.read_text().splitlines()
        assert lines[0] == "bin_center_ps,count"
        assert lines[1] == "-15000,3"
        assert lines[16] == "0,7"
        assert len(lines) == 32
