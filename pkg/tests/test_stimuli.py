import json

import pytest

from fuzzprobe.errors import DataError
from fuzzprobe.stimuli import (
    StimulusConfig,
    StimulusPair,
    Unit,
    generate_dataset,
    read_pairs,
    render_hypothesis,
    render_premise,
    write_pairs,
)


class TestRenderPremise:
    def test_no_unit_with_location(self):
        assert render_premise(0, Unit.NONE, "in the bedroom") == "It is 0 degrees in the bedroom."

    def test_no_unit_living_room(self):
        assert (
            render_premise(70, Unit.NONE, "in the living room")
            == "It is 70 degrees in the living room."
        )

    def test_celsius_without_location(self):
        assert render_premise(-10, Unit.CELSIUS, "") == "It is -10 degrees Celsius."

    def test_fahrenheit_with_location(self):
        assert (
            render_premise(40, Unit.FAHRENHEIT, "outside")
            == "It is 40 degrees Fahrenheit outside."
        )

    def test_no_unit_no_location(self):
        assert render_premise(40, Unit.NONE, "") == "It is 40 degrees."

    def test_no_doubled_spaces(self):
        for unit in Unit:
            for location in ("", "inside"):
                assert "  " not in render_premise(-5, unit, location)

    def test_negative_word_override(self):
        assert (
            render_premise(-10, Unit.CELSIUS, "", negative_word="minus")
            == "It is minus 10 degrees Celsius."
        )

    def test_unit_label_override(self):
        labels = {Unit.NONE: "", Unit.FAHRENHEIT: "F", Unit.CELSIUS: "C"}
        assert render_premise(3, Unit.CELSIUS, "", unit_labels=labels) == "It is 3 degrees C."


class TestRenderHypothesis:
    def test_with_location(self):
        assert render_hypothesis("freezing", "in the bedroom") == "It is freezing in the bedroom."

    def test_hot_living_room(self):
        assert render_hypothesis("hot", "in the living room") == "It is hot in the living room."

    def test_without_location(self):
        assert render_hypothesis("cool", "") == "It is cool."

    def test_basement(self):
        assert render_hypothesis("warm", "in the basement") == "It is warm in the basement."


class TestGenerateDataset:
    def test_default_counts_per_unit(self):
        pairs = generate_dataset()
        by_unit = {}
        for pair in pairs:
            by_unit[pair.unit] = by_unit.get(pair.unit, 0) + 1
        assert by_unit[Unit.NONE] == 5190
        assert by_unit[Unit.FAHRENHEIT] == 5190
        assert by_unit[Unit.CELSIUS] == 3030
        assert len(pairs) == 13410

    def test_count_identity(self):
        """|pairs| matches the closed-form width x locations x categories sum."""
        config = StimulusConfig(
            units=(Unit.NONE, Unit.CELSIUS),
            ranges={Unit.NONE: (0, 9), Unit.CELSIUS: (-3, 3)},
            locations=("", "outside"),
            categories=("cold", "hot"),
        )
        pairs = generate_dataset(config)
        assert len(pairs) == config.expected_count() == (10 * 2 * 2) + (7 * 2 * 2)

    def test_deterministic_order(self):
        a = generate_dataset()
        b = generate_dataset()
        assert a == b
        # unit-major, then ascending single-degree steps
        assert a[0].unit == Unit.NONE and a[0].temperature == -50
        temps = [p.temperature for p in a if p.unit == Unit.NONE and p.location == "" and p.category == "freezing"]
        assert temps == list(range(-50, 123))

    def test_hypothesis_shares_premise_location(self):
        for pair in generate_dataset():
            if pair.location:
                assert pair.premise.endswith(f"{pair.location}.")
                assert pair.hypothesis.endswith(f"{pair.location}.")

    def test_metadata_roundtrip_reproduces_texts(self):
        config = StimulusConfig()
        for pair in generate_dataset(config):
            assert pair.premise == render_premise(
                pair.temperature, pair.unit, pair.location,
                unit_labels=config.unit_labels, negative_word=config.negative_word,
            )
            assert pair.hypothesis == render_hypothesis(pair.category, pair.location)

    def test_descending_range_rejected(self):
        with pytest.raises(ValueError, match="min"):
            StimulusConfig(ranges={u: (50, -50) for u in Unit})

    def test_missing_range_rejected(self):
        with pytest.raises(ValueError, match="range"):
            StimulusConfig(units=(Unit.NONE,), ranges={Unit.CELSIUS: (0, 1)})


class TestPairValidation:
    def test_rejects_unterminated_sentence(self):
        with pytest.raises(ValueError, match="period-terminated"):
            StimulusPair("It is 5 degrees", "It is hot.", 5, Unit.NONE, "", "hot")

    def test_rejects_multi_sentence(self):
        with pytest.raises(ValueError):
            StimulusPair("It is 5 degrees. Warm.", "It is hot.", 5, Unit.NONE, "", "hot")


class TestPairIO:
    def test_write_read_roundtrip(self, tmp_path):
        pairs = generate_dataset(
            StimulusConfig(
                units=(Unit.FAHRENHEIT,), ranges={Unit.FAHRENHEIT: (-2, 2)}
            )
        )
        path = tmp_path / "pairs.jsonl"
        write_pairs(pairs, path)
        assert read_pairs(path) == pairs

    def test_two_generations_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        write_pairs(generate_dataset(), a)
        write_pairs(generate_dataset(), b)
        assert a.read_bytes() == b.read_bytes()

    def test_record_fields(self, tmp_path):
        path = tmp_path / "pairs.jsonl"
        write_pairs(generate_dataset(StimulusConfig(units=(Unit.NONE,), ranges={Unit.NONE: (0, 0)})), path)
        record = json.loads(path.read_text().splitlines()[0])
        assert set(record) == {"premise", "hypothesis", "temperature", "unit", "location", "category"}

    def test_bad_line_reports_number(self, tmp_path):
        path = tmp_path / "pairs.jsonl"
        good = json.dumps(
            {"premise": "It is 1 degrees.", "hypothesis": "It is hot.",
             "temperature": 1, "unit": "none", "location": "", "category": "hot"}
        )
        path.write_text(good + "\n" + "{broken\n")
        with pytest.raises(DataError, match="line 2"):
            read_pairs(path)
