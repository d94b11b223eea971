import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from homsim.analysis import (IntensityTrace, estimate_g2, ingest_trace,
                             quantize_8bit, result_payload, vhom_from_g2,
                             write_result, write_trace)
from homsim.interference import analytic_g2
from homsim.montecarlo import ScenarioConfig, simulate_trace
from homsim.pulses import PulseShape, SourceSpec

PULSE = PulseShape(tau_p=12.74, beta=5.0e-3)


def make_trace(samples):
    return IntensityTrace(samples=np.asarray(samples, dtype=float))


class TestEstimator:
    def test_constant_trace(self):
        g2, stderr = estimate_g2(make_trace(np.full(2_000, 3.7)))
        assert g2 == pytest.approx(1.0, rel=1e-12)
        assert stderr == pytest.approx(0.0, abs=1e-12)

    def test_alternating_trace(self):
        samples = np.tile([0.0, 2.0], 1_000)
        g2, _ = estimate_g2(make_trace(samples))
        assert g2 == pytest.approx(2.0, rel=1e-12)

    def test_too_short(self):
        with pytest.raises(ValueError, match="too short"):
            estimate_g2(make_trace(np.ones(50)))

    def test_zero_mean(self):
        with pytest.raises(ValueError, match="mean"):
            estimate_g2(make_trace(np.zeros(500)))

    def test_negative_samples_rejected_at_construction(self):
        with pytest.raises(ValueError):
            make_trace([1.0, -0.5, 2.0])

    @given(st.floats(min_value=1e-3, max_value=1e3))
    def test_scale_invariance(self, scale):
        rng = np.random.default_rng(0)
        samples = rng.gamma(2.0, 1.0, size=1_000)
        base, _ = estimate_g2(make_trace(samples))
        scaled, _ = estimate_g2(make_trace(samples * scale))
        assert scaled == pytest.approx(base, rel=1e-9)

    def test_simulated_trace_consistency(self):
        config = ScenarioConfig(
            source_a=SourceSpec(pulse=PULSE, jitter_fwhm=3.6),
            source_b=SourceSpec(pulse=PULSE, jitter_fwhm=3.8),
            n_samples=1_000, n_repeats=1, rng_seed=5)
        trace = make_trace(simulate_trace(config, 100_000))
        g2, stderr = estimate_g2(trace)
        expected = analytic_g2(0.0, config.combined_sigma, PULSE)
        assert abs(g2 - expected) < 3.0 * stderr

    def test_vhom_mapping(self):
        assert vhom_from_g2(1.5) == pytest.approx(0.5)
        assert vhom_from_g2(1.0) == pytest.approx(0.0)


class TestQuantization:
    def test_preserves_extremes(self):
        samples = np.array([0.0, 1.0, 2.0])
        quantized = quantize_8bit(samples)
        assert quantized[0] == 0.0
        assert quantized[-1] == pytest.approx(2.0, rel=1e-12)

    def test_step_size(self):
        samples = np.linspace(0.0, 2.55, 1_000)
        quantized = quantize_8bit(samples)
        levels = np.unique(quantized)
        assert len(levels) <= 256
        assert np.diff(levels).min() == pytest.approx(2.55 / 255.0, rel=1e-9)

    def test_all_zero(self):
        np.testing.assert_array_equal(quantize_8bit(np.zeros(10)), np.zeros(10))

    def test_g2_shift_is_small(self):
        rng = np.random.default_rng(3)
        phases = rng.uniform(0.0, 2.0 * np.pi, size=200_000)
        samples = 1.0 + np.cos(phases)
        raw, _ = estimate_g2(make_trace(samples))
        digitized, _ = estimate_g2(make_trace(quantize_8bit(samples)))
        assert abs(digitized - raw) < 0.01


class TestIngestion:
    def test_round_trip(self, tmp_path):
        trace = make_trace(np.random.default_rng(1).gamma(2.0, 1.0, 500))
        path = tmp_path / "trace.csv"
        write_trace(path, trace)
        loaded = ingest_trace(path)
        np.testing.assert_allclose(loaded.samples, trace.samples, rtol=1e-15)

    def test_two_column_with_header(self, tmp_path):
        path = tmp_path / "scope.csv"
        path.write_text("time_ps,intensity\n0,1.5\n1000,0.5\n2000,2.0\n")
        loaded = ingest_trace(path)
        np.testing.assert_allclose(loaded.samples, [1.5, 0.5, 2.0])

    def test_comments_and_blanks_skipped(self, tmp_path):
        path = tmp_path / "trace.csv"
        path.write_text("# scope export\n1.0\n\n2.0\n")
        assert len(ingest_trace(path)) == 2

    def test_bad_row_reports_line_number(self, tmp_path):
        path = tmp_path / "trace.csv"
        path.write_text("1.0\n2.0\noops\n")
        with pytest.raises(ValueError, match=r"trace\.csv:3"):
            ingest_trace(path)

    def test_negative_value_reports_line_number(self, tmp_path):
        path = tmp_path / "trace.csv"
        path.write_text("1.0\n-2.0\n")
        with pytest.raises(ValueError, match=r"trace\.csv:2"):
            ingest_trace(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "trace.csv"
        path.write_text("")
        with pytest.raises(ValueError, match="no intensity samples"):
            ingest_trace(path)

    def test_quantize_flag(self, tmp_path):
        path = tmp_path / "trace.csv"
        write_trace(path, make_trace(np.linspace(0.0, 2.0, 300)))
        loaded = ingest_trace(path, quantize=True)
        assert len(np.unique(loaded.samples)) <= 256
        assert "8 bits" in loaded.metadata


class TestResultExport:
    def test_payload_fields(self):
        payload = result_payload("demo", 1.46, 0.001, 10_000, 42,
                                 ["model-derived pulse"])
        assert payload["vhom"] == pytest.approx(0.46)
        assert payload["decisions"] == ["model-derived pulse"]

    def test_written_json_is_sorted_and_loadable(self, tmp_path):
        import json
        path = tmp_path / "result.json"
        write_result(path, result_payload("demo", 1.5, 0.0, 1_000, 1, []))
        text = path.read_text()
        loaded = json.loads(text)
        assert loaded["g2"] == 1.5
        assert list(loaded) == sorted(loaded)
        assert text.endswith("\n")
