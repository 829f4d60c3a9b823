from __future__ import annotations

import pytest

from splatctl.codec_log import (
    FrameLogSeries,
    FrameRecord,
    FrameType,
    LogSource,
    parse_generic_json,
    parse_x265_csv,
    serialize_generic_json,
    validate,
)
from splatctl.errors import EmptyLog, MalformedRow, MissingColumn, SchemaError

from .conftest import make_series


class TestParseX265Csv:
    def test_single_row_fields(self):
        text = "Encode Order, Type, POC, QP, Bits\n0, I, 0, 27.00, 185000\n"
        series = parse_x265_csv(text)
        assert len(series) == 1
        record = series.records[0]
        assert record.display_index == 0
        assert record.encode_order == 0
        assert record.frame_type is FrameType.I
        assert record.qp == 27.0
        assert record.bits == 185000.0
        assert series.source is LogSource.X265_CSV

    def test_full_fixture(self, sample_csv):
        series = parse_x265_csv(sample_csv)
        assert [r.display_index for r in series] == [0, 1, 2, 3]
        assert [r.encode_order for r in series] == [0, 3, 1, 2]
        assert series.records[0].psnr_y == 41.20
        assert series.records[0].psnr_yuv == 41.90
        assert series.records[0].ssim == 0.981
        # unrecognized column preserved but outside equality
        assert series.records[0].extras == {"RateFactor": "25.1"}

    def test_bytes_input_and_bom(self, sample_csv):
        assert parse_x265_csv(sample_csv.encode()) == parse_x265_csv(b"\xef\xbb\xbf" + sample_csv.encode())

    def test_empty_file(self):
        with pytest.raises(EmptyLog):
            parse_x265_csv("")

    def test_header_only(self):
        with pytest.raises(EmptyLog):
            parse_x265_csv("POC, Type, QP, Bits\n")

    def test_malformed_qp(self):
        text = "POC, Type, QP, Bits\n0, I, 27.0, 1000\n1, P, abc, 900\n"
        with pytest.raises(MalformedRow) as excinfo:
            parse_x265_csv(text)
        assert excinfo.value.line == 3
        assert "qp" in str(excinfo.value)

    def test_missing_required_column(self):
        with pytest.raises(MissingColumn) as excinfo:
            parse_x265_csv("POC, Type, Bits\n0, I, 1000\n")
        assert excinfo.value.column == "qp"

    def test_sorts_by_display_order(self, sample_csv):
        series = parse_x265_csv(sample_csv)
        indices = [r.display_index for r in series]
        assert indices == sorted(indices)

    def test_row_order_irrelevant(self, sample_csv):
        lines = sample_csv.strip().splitlines()
        shuffled = "\n".join([lines[0]] + lines[1:][::-1])
        assert parse_x265_csv(shuffled) == parse_x265_csv(sample_csv)

    def test_header_aliases(self):
        text = "display index, FRAME TYPE, Avg QP, number of bits\n0, i, 30, 500\n"
        record = parse_x265_csv(text).records[0]
        assert record.frame_type is FrameType.I
        assert record.qp == 30.0
        assert record.bits == 500.0

    def test_duplicate_poc_rejected(self):
        with pytest.raises(SchemaError):
            parse_x265_csv("POC, Type, QP, Bits\n0, I, 27, 100\n0, P, 30, 50\n")

    def test_gap_rejected(self):
        with pytest.raises(SchemaError):
            parse_x265_csv("POC, Type, QP, Bits\n0, I, 27, 100\n2, P, 30, 50\n")

    def test_determinism(self, sample_csv):
        assert parse_x265_csv(sample_csv) == parse_x265_csv(sample_csv)


class TestParseGenericJson:
    def test_minimal_document(self):
        series = parse_generic_json('[{"display_index":0,"frame_type":"I","qp":37,"bits":1000}]')
        assert len(series) == 1
        assert series.records[0].qp == 37.0
        assert series.records[0].encode_order == 0

    def test_duplicate_display_index(self):
        doc = (
            '[{"display_index":0,"frame_type":"I","qp":37,"bits":1000},'
            '{"display_index":0,"frame_type":"P","qp":38,"bits":900}]'
        )
        with pytest.raises(SchemaError):
            parse_generic_json(doc)

    def test_schema_error_paths(self):
        with pytest.raises(SchemaError) as excinfo:
            parse_generic_json('[{"display_index":0,"frame_type":"I","qp":"x","bits":1}]')
        assert "$[0].qp" in str(excinfo.value)
        with pytest.raises(SchemaError):
            parse_generic_json('{"not":"an array"}')
        with pytest.raises(SchemaError):
            parse_generic_json("[")

    def test_empty_array(self):
        with pytest.raises(EmptyLog):
            parse_generic_json("[]")

    def test_round_trip_identity(self, sample_csv):
        series = parse_x265_csv(sample_csv)
        assert parse_generic_json(serialize_generic_json(series)) == series

    def test_csv_json_agreement(self):
        csv_text = "POC, Type, QP, Bits\n0, I, 27.5, 1500\n1, B, 31.0, 400\n"
        json_text = (
            '[{"display_index":0,"frame_type":"I","qp":27.5,"bits":1500},'
            '{"display_index":1,"frame_type":"B","qp":31.0,"bits":400}]'
        )
        assert parse_x265_csv(csv_text) == parse_generic_json(json_text)


class TestSeriesInvariants:
    def test_non_empty(self):
        with pytest.raises(EmptyLog):
            FrameLogSeries(())

    def test_source_not_compared(self):
        a = make_series([30], [100], source=LogSource.X265_CSV)
        b = make_series([30], [100], source=LogSource.GENERIC_JSON)
        assert a == b


class TestValidate:
    def test_clean_series(self):
        series = make_series([27, 31, 29], [5000, 1000, 2000], types=[FrameType.I, FrameType.B, FrameType.P])
        report = validate(series)
        assert report.ok
        assert report.errors == []

    def test_qp_out_of_range(self):
        series = make_series([27, 31, 70], [500, 400, 300])
        report = validate(series)
        assert not report.ok
        assert (2, "qp") in [(row, field) for row, field, _ in report.errors]

    def test_nonpositive_bits(self):
        record = FrameRecord(display_index=0, frame_type=FrameType.I, qp=30.0, bits=0.0)
        report = validate(FrameLogSeries((record,)))
        assert [(row, field) for row, field, _ in report.errors] == [(0, "bits")]

    def test_bad_psnr_and_ssim(self):
        record = FrameRecord(
            display_index=0, frame_type=FrameType.I, qp=30.0, bits=10.0, psnr_y=-3.0, ssim=1.2
        )
        report = validate(FrameLogSeries((record,)))
        fields = {field for _, field, _ in report.errors}
        assert fields == {"psnr_y", "ssim"}

    def test_small_iframe_warning(self):
        series = make_series(
            [27, 31], [500, 5000], types=[FrameType.I, FrameType.B]
        )
        report = validate(series)
        assert report.ok
        assert report.warnings and report.warnings[0][0] == 0
