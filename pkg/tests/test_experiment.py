from __future__ import annotations

import numpy as np
import pytest

from splatctl.confidence import ScoringConfig
from splatctl.density_control import DensityPolicyConfig, Modulation
from splatctl.errors import PolicyCollapse
from splatctl.quality_mask import MaskConfig
from splatctl.splat_sim.experiment import ExperimentConfig, run_experiment
from splatctl.splat_sim.sequence import SequenceConfig, synthesize_sequence


def small_config(**kwargs) -> ExperimentConfig:
    defaults = dict(iterations_per_frame=20, densify_interval=10, anchors_per_axis=3)
    defaults.update(kwargs)
    return ExperimentConfig(**defaults)


@pytest.fixture(scope="module")
def small_seq():
    return synthesize_sequence(SequenceConfig(frames=3, width=32, height=32, gop=4))


class TestRunExperiment:
    def test_deterministic_reports(self, small_seq):
        cfg = small_config()
        a = run_experiment(small_seq, cfg)
        b = run_experiment(small_seq, cfg)
        assert a.to_json_text() == b.to_json_text()
        assert a.traces_csv_text() == b.traces_csv_text()
        assert all(np.array_equal(x, y) for x, y in zip(a.snapshots, b.snapshots))

    def test_fixed_modulation_keeps_base_thresholds(self, small_seq):
        cfg = small_config(
            density=DensityPolicyConfig(modulation=Modulation.FIXED, scale_pruning=False),
            mask=MaskConfig(eta=0.0),
        )
        report = run_experiment(small_seq, cfg)
        for ft in report.frames:
            assert ft.theta == cfg.density.theta0
            assert ft.omega_prime == cfg.density.omega0
            assert ft.drop_rate == 0.0

    def test_threshold_sign_tracks_confidence_gap(self):
        seq = synthesize_sequence(SequenceConfig(frames=9, width=32, height=32, gop=4))
        report = run_experiment(seq, small_config(iterations_per_frame=8, densify_interval=8))
        for ft in report.frames:
            assert np.sign(ft.theta - 2e-4) == np.sign(ft.q_bar - ft.q)

    def test_masking_active_by_default(self, small_seq):
        report = run_experiment(small_seq, small_config())
        assert all(ft.drop_rate > 0 for ft in report.frames)

    def test_collapse_on_aggressive_pruning(self, small_seq):
        # theta too high to densify, and one optimization step cannot push
        # any opacity from 0.5 past 0.9, so the first policy application
        # prunes the whole population
        cfg = small_config(
            iterations_per_frame=2,
            densify_interval=1,
            density=DensityPolicyConfig(
                theta0=10.0, omega0=0.9, modulation=Modulation.FIXED, scale_pruning=False
            ),
        )
        with pytest.raises(PolicyCollapse):
            run_experiment(small_seq, cfg)

    def test_population_curve_lengths(self, small_seq):
        cfg = small_config()
        report = run_experiment(small_seq, cfg)
        applications = len(small_seq.ground_truth) * (cfg.iterations_per_frame // cfg.densify_interval)
        assert len(report.population_curve) == 1 + applications
        assert report.population_curve[0] == (0, 0, 36)
        assert report.final_primitive_count == report.frames[-1].primitives

    def test_psnr_improves_over_init(self, small_seq):
        # a fitted frame should beat the trivial gray canvas by a wide margin
        report = run_experiment(small_seq, small_config(iterations_per_frame=60))
        assert report.frames[0].psnr > 14.0

    def test_policy_responsiveness(self):
        # gop=4 over 12 frames puts several frames on each side of the EMA
        seq = synthesize_sequence(SequenceConfig(frames=12, width=32, height=32, gop=4))
        report = run_experiment(seq, small_config(iterations_per_frame=30, densify_interval=10))
        above = [ft for ft in report.frames if ft.q > ft.q_bar]
        below = [ft for ft in report.frames if ft.q < ft.q_bar]
        assert above and below
        assert report.totals["densified"] > 0
        rate_above = sum(ft.densified for ft in above) / len(above)
        rate_below = sum(ft.densified for ft in below) / len(below)
        assert rate_above >= rate_below

    def test_growth_guard(self, small_seq):
        cfg = small_config(
            max_primitives=36,
            density=DensityPolicyConfig(theta0=1e-9, omega0=0.001, scale_pruning=False),
        )
        report = run_experiment(small_seq, cfg)
        assert report.final_primitive_count <= 36

    def test_report_json_shape(self, small_seq):
        report = run_experiment(small_seq, small_config())
        doc = report.to_json_dict()
        assert set(doc) == {"frames", "population_curve", "totals", "final_primitive_count"}
        assert len(doc["frames"]) == 3
        row = doc["frames"][0]
        assert {"frame", "qp", "q", "q_bar", "theta", "omega_prime", "psnr", "primitives"} <= set(row)

    def test_traces_csv_shape(self, small_seq):
        text = run_experiment(small_seq, small_config()).traces_csv_text()
        lines = text.strip().splitlines()
        assert lines[0] == "t,q,q_bar,theta,omega_prime"
        assert len(lines) == 4


class TestConfigValidation:
    def test_rejects_bad_rates(self):
        with pytest.raises(ValueError):
            ExperimentConfig(lr_mean=0.0)

    def test_rejects_bad_intervals(self):
        with pytest.raises(ValueError):
            ExperimentConfig(densify_interval=0)

    def test_scoring_defaults_embedded(self):
        cfg = ExperimentConfig()
        assert cfg.scoring == ScoringConfig()
