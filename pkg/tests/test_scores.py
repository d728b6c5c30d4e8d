import json
import math

import pytest

from separability import InvalidInputError, ScoreTable, aggregate_dataset
from separability.scores import CSV_HEADER, format_score, summary_to_csv


def _table(rows, metadata=None):
    table = ScoreTable(metadata)
    for song_id, instrument, si in rows:
        table.add_row(
            song_id,
            instrument,
            {"si_sdr": si, "sdr": si + 1, "sir": si + 2, "isr": si + 3, "sar": si + 4},
        )
    return table


class TestFormatting:
    def test_six_decimals(self):
        assert format_score(1.5) == "1.500000"
        assert format_score(-3.0) == "-3.000000"

    def test_round_half_even(self):
        # Exact dyadic ties at the 6th decimal go to the even neighbour:
        # 0.0078125 = 2^-7 sits exactly between 0.007812 and 0.007813.
        assert format_score(0.0078125) == "0.007812"
        assert format_score(0.0234375) == "0.023438"

    def test_missing_is_empty(self):
        assert format_score(math.nan) == ""

    def test_no_negative_zero(self):
        assert format_score(-0.0) == "0.000000"
        assert format_score(-1e-9) == "0.000000"


class TestTable:
    def test_duplicate_row_rejected(self):
        table = _table([("a", "bass", 1.0)])
        with pytest.raises(InvalidInputError):
            table.add_row("a", "bass", {"si_sdr": 2.0})

    def test_unknown_metric_rejected(self):
        table = ScoreTable()
        with pytest.raises(InvalidInputError):
            table.add_row("a", "bass", {"volume": 11.0})

    def test_missing_row_reads_as_missing(self):
        table = _table([("a", "bass", 1.0)])
        assert math.isnan(table.value("zzz", "bass", "si_sdr"))

    def test_orders_preserved(self):
        table = _table([("b", "drums", 1.0), ("a", "bass", 2.0), ("b", "bass", 3.0)])
        assert table.song_ids() == ("b", "a")
        assert table.instruments() == ("drums", "bass")


class TestCsv:
    def test_round_trip_with_missing(self):
        table = _table([("a", "bass", 1.25)], {"alpha": "2.0"})
        table.add_row("b", "bass", {"si_sdr": math.nan, "sdr": 2.0})
        text = table.to_csv()
        assert text.startswith("# alpha=2.0\n# format_version=1\n")
        assert CSV_HEADER in text
        back = ScoreTable.from_csv(text)
        assert back.metadata["alpha"] == "2.0"
        assert back.value("a", "bass", "si_sdr") == 1.25
        assert math.isnan(back.value("b", "bass", "si_sdr"))
        assert back.value("b", "bass", "sdr") == 2.0
        assert math.isnan(back.value("b", "bass", "sar"))

    def test_missing_cells_are_empty(self):
        table = ScoreTable()
        table.add_row("a", "bass", {"si_sdr": 1.0})
        line = table.to_csv().splitlines()[-1]
        assert line == "a,bass,1.000000,,,,"

    def test_header_enforced(self):
        with pytest.raises(InvalidInputError):
            ScoreTable.from_csv("song,inst,foo\n")

    def test_bad_cell_count(self):
        text = CSV_HEADER + "\na,bass,1.0\n"
        with pytest.raises(InvalidInputError):
            ScoreTable.from_csv(text)

    def test_serialization_is_stable(self):
        table = _table([("a", "bass", 1.0), ("a", "drums", -2.5)], {"seed": "0"})
        assert table.to_csv() == table.to_csv()
        assert ScoreTable.from_csv(table.to_csv()).to_csv() == table.to_csv()


class TestJson:
    def test_round_trip(self):
        table = _table([("a", "bass", 1.25), ("b", "bass", math.nan)], {"alpha": "2.0"})
        text = table.to_json()
        payload = json.loads(text)
        assert payload["format_version"] == "1"
        assert payload["config"]["alpha"] == "2.0"
        assert payload["rows"][1]["si_sdr"] is None
        back = ScoreTable.from_json(text)
        assert back.value("a", "bass", "si_sdr") == 1.25
        assert math.isnan(back.value("b", "bass", "si_sdr"))

    def test_values_rounded_to_six_decimals(self):
        table = ScoreTable()
        table.add_row("a", "bass", {"si_sdr": 1.23456789})
        payload = json.loads(table.to_json())
        assert payload["rows"][0]["si_sdr"] == 1.234568


class TestAggregateDataset:
    def test_median_per_instrument(self):
        table = _table(
            [("a", "bass", 1.0), ("b", "bass", 2.0), ("c", "bass", 100.0), ("a", "drums", 5.0)]
        )
        summary = aggregate_dataset(table)
        assert summary["bass"]["si_sdr"] == 2.0
        assert summary["drums"]["si_sdr"] == 5.0

    def test_even_count_mean_of_middle(self):
        table = _table([(s, "bass", v) for s, v in zip("abcd", [1.0, 2.0, 3.0, 4.0])])
        assert aggregate_dataset(table)["bass"]["si_sdr"] == 2.5

    def test_missing_songs_skipped(self):
        table = _table([("a", "bass", 1.0), ("b", "bass", math.nan), ("c", "bass", 3.0)])
        assert aggregate_dataset(table)["bass"]["si_sdr"] == 2.0

    def test_single_song(self):
        table = _table([("a", "bass", 7.5)])
        assert aggregate_dataset(table)["bass"]["si_sdr"] == 7.5

    def test_summary_csv_shape(self):
        table = _table([("a", "bass", 1.0)])
        text = summary_to_csv(aggregate_dataset(table), {"command": "analyze"})
        lines = text.splitlines()
        assert lines[0] == "# command=analyze"
        assert lines[-2] == "instrument,si_sdr,sdr,sir,isr,sar"
        assert lines[-1].startswith("bass,1.000000,2.000000")
