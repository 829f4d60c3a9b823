from __future__ import annotations

import numpy as np
import pytest

from splatctl.codec_log import FrameType, LogSource, validate
from splatctl.quality_mask import validate_match_stats
from splatctl.splat_sim.sequence import (
    SequenceConfig,
    SyntheticSequence,
    gop_frame_types,
    sawtooth_qp_schedule,
    synthesize_sequence,
)


class TestFrameTypes:
    def test_gop_pattern(self):
        types = gop_frame_types(10, gop=4)
        assert types[0] is FrameType.I and types[4] is FrameType.I and types[8] is FrameType.I
        assert types[1] is FrameType.B and types[2] is FrameType.P


class TestSchedule:
    def test_type_driven_levels(self):
        cfg = SequenceConfig(frames=6, gop=4, base_qp=37.0, i_qp_drop=4.0, b_qp_rise=2.0)
        schedule = sawtooth_qp_schedule(cfg)
        assert schedule[0] == 33.0 and schedule[4] == 33.0
        assert schedule[1] == 39.0 and schedule[2] == 37.0

    def test_iframes_get_lowest_qp(self):
        cfg = SequenceConfig(frames=16, gop=8)
        schedule = sawtooth_qp_schedule(cfg)
        assert min(schedule) == schedule[0] == schedule[8]


@pytest.fixture(scope="module")
def seq():
    return synthesize_sequence(SequenceConfig(frames=6, width=32, height=32, gop=4))


class TestSynthesize:
    def test_lengths_consistent(self, seq):
        assert len(seq.ground_truth) == len(seq.degraded) == len(seq.qp_schedule) == len(seq.log) == 6
        assert len(seq.match_stats) == 6

    def test_log_is_valid_and_synthetic(self, seq):
        assert seq.log.source is LogSource.SYNTHETIC
        report = validate(seq.log)
        assert report.ok, report.errors

    def test_match_stats_valid(self, seq):
        assert validate_match_stats(seq.match_stats) == []

    def test_bits_positive_and_content_driven(self, seq):
        bits = seq.log.bits()
        assert all(b > 0 for b in bits)
        assert len(set(bits)) > 1

    def test_images_in_unit_range(self, seq):
        for img in seq.ground_truth + seq.degraded:
            assert img.min() >= 0.0 and img.max() <= 1.0

    def test_determinism(self):
        cfg = SequenceConfig(frames=3, width=24, height=24, seed=9)
        a = synthesize_sequence(cfg)
        b = synthesize_sequence(cfg)
        assert all(np.array_equal(x, y) for x, y in zip(a.ground_truth, b.ground_truth))
        assert a.log == b.log
        assert a.match_stats == b.match_stats

    def test_seed_changes_content(self):
        a = synthesize_sequence(SequenceConfig(frames=2, width=24, height=24, seed=0))
        b = synthesize_sequence(SequenceConfig(frames=2, width=24, height=24, seed=1))
        assert not np.array_equal(a.ground_truth[0], b.ground_truth[0])

    def test_length_mismatch_rejected(self, seq):
        with pytest.raises(ValueError):
            SyntheticSequence(
                ground_truth=seq.ground_truth[:-1],
                degraded=seq.degraded,
                qp_schedule=seq.qp_schedule,
                log=seq.log,
            )
