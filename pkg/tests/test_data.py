from __future__ import annotations

import itertools
import json

import numpy as np
import pytest

from actbench.data import (
    ActivityFrame,
    Dataset,
    LabelSpace,
    ObservationCodec,
    SequenceInstance,
    build_observation_codec,
    decode_array,
    decode_combined,
    encode_array,
    encode_combined,
    load_canonical,
    write_canonical,
)
from actbench.errors import ConfigurationError, DataFormatError, DomainError


class TestCombinedIndex:
    def test_zero_frame(self):
        assert encode_combined(ActivityFrame((0, 0)), LabelSpace((15, 15))) == 0

    def test_mixed_radix(self):
        space = LabelSpace((3, 5))
        assert encode_combined(ActivityFrame((2, 4)), space) == 14
        assert decode_combined(14, space) == ActivityFrame((2, 4))

    def test_single_resident_identity(self):
        assert decode_combined(1, LabelSpace((2,))) == ActivityFrame((1,))

    def test_decode_inverts_encode_for_every_frame(self):
        space = LabelSpace((3, 4))
        for frame in itertools.product(range(3), range(4)):
            f = ActivityFrame(frame)
            assert decode_combined(encode_combined(f, space), space) == f

    def test_encode_inverts_decode_for_every_index(self):
        space = LabelSpace((4, 3, 2))
        for j in range(space.combined_size):
            assert encode_combined(decode_combined(j, space), space) == j

    def test_array_forms_agree_with_scalar_forms(self):
        space = LabelSpace((4, 3, 2))
        labels = space.components()
        np.testing.assert_array_equal(encode_array(labels, space), np.arange(24))
        np.testing.assert_array_equal(decode_array(np.arange(24), space), labels)
        for j in (0, 7, 23):
            assert tuple(labels[j]) == decode_combined(j, space).labels

    def test_out_of_range_label(self):
        with pytest.raises(DomainError):
            encode_combined(ActivityFrame((3, 0)), LabelSpace((3, 5)))

    def test_wrong_resident_count(self):
        with pytest.raises(DomainError):
            encode_combined(ActivityFrame((0,)), LabelSpace((3, 5)))

    def test_out_of_range_index(self):
        with pytest.raises(DomainError):
            decode_combined(15, LabelSpace((3, 5)))
        with pytest.raises(DomainError):
            decode_array(np.array([0, -1]), LabelSpace((3, 5)))


class TestLabelSpace:
    def test_rejects_empty_alphabet(self):
        with pytest.raises(ConfigurationError):
            LabelSpace((3, 0))

    def test_rejects_no_residents(self):
        with pytest.raises(ConfigurationError):
            LabelSpace(())

    def test_extra_activity(self):
        space = LabelSpace((2, 3)).with_extra_activity("Idle")
        assert space.sizes == (3, 4)
        assert space.activity_names[1][-1] == "Idle"

    def test_dict_round_trip(self):
        space = LabelSpace((2, 3), (("a", "b"), ("x", "y", "z")))
        assert LabelSpace.from_dict(space.to_dict()) == space


class TestObservationCodec:
    def test_first_appearance_order(self):
        codec = build_observation_codec([(0, 1), (1, 0), (0, 1)])
        assert codec.size == 2
        assert codec.lookup((0, 1)) == 0
        assert codec.lookup((1, 0)) == 1

    def test_unseen_state_maps_to_unk(self):
        codec = build_observation_codec([(0, 1), (1, 0), (0, 1)])
        assert codec.unk_id == 2
        assert codec.lookup((1, 1)) == 2

    def test_array_input_matches_list_input(self):
        rows = np.array([[1, 0, 1], [0, 0, 0], [1, 0, 1], [0, 1, 0]], dtype=float)
        from_list = build_observation_codec(rows.tolist())
        assert build_observation_codec(rows).symbols == from_list.symbols

    def test_encode(self):
        codec = build_observation_codec([(0, 1), (1, 0)])
        np.testing.assert_array_equal(codec.encode(np.array([[1, 0], [1, 1], [0, 1]])), [1, 2, 0])

    def test_ragged_rows(self):
        with pytest.raises(DataFormatError):
            build_observation_codec([(0, 1), (1,)])

    def test_empty_rows(self):
        with pytest.raises(ConfigurationError):
            build_observation_codec([])

    def test_dict_round_trip(self):
        codec = build_observation_codec([(0.5, 1), (1, 0)], sensor_names=("a", "b"))
        again = ObservationCodec.from_dict(json.loads(json.dumps(codec.to_dict())))
        assert again == codec
        assert again.unk_id == codec.unk_id

    def test_inconsistent_unk_id(self):
        data = build_observation_codec([(0, 1)]).to_dict()
        data["unk_id"] = 5
        with pytest.raises(DataFormatError):
            ObservationCodec.from_dict(data)


class TestDataset:
    def test_symbols_filled_from_codec(self, make_dataset, rng):
        data = make_dataset(rng)
        for inst in data:
            np.testing.assert_array_equal(inst.symbols, data.codec.encode(inst.features))
            assert inst.observations[0].symbol == inst.symbols[0]

    def test_recode_maps_unseen_to_unk(self):
        space = LabelSpace((2,))
        day = SequenceInstance("d1", np.array([[0.0], [1.0]]), np.array([[0], [1]]))
        codec = build_observation_codec([(0.0,)])
        data = Dataset.from_instances([day], space).recode(codec)
        np.testing.assert_array_equal(data.instances[0].symbols, [0, 1])
        assert codec.unk_id == 1

    def test_duplicate_day_ids(self):
        space = LabelSpace((2,))
        day = SequenceInstance("d1", np.zeros((2, 1)), np.zeros((2, 1)))
        with pytest.raises(ConfigurationError):
            Dataset.from_instances([day, day], space)

    def test_misaligned_instance(self):
        with pytest.raises(DomainError):
            SequenceInstance("d1", np.zeros((3, 1)), np.zeros((2, 1)))

    def test_labels_outside_alphabet(self):
        day = SequenceInstance("d1", np.zeros((2, 1)), np.array([[0], [2]]))
        with pytest.raises(DomainError):
            Dataset.from_instances([day], LabelSpace((2,)))

    def test_arrays_are_read_only(self, make_dataset, rng):
        inst = make_dataset(rng).instances[0]
        with pytest.raises(ValueError):
            inst.labels[0, 0] = 1


class TestCanonicalFormat:
    def test_round_trip(self, make_dataset, rng, tmp_path):
        data = make_dataset(rng, sizes=(3, 2), n_features=4, days=3, steps=5)
        write_canonical(data, tmp_path)
        again = load_canonical(tmp_path)
        assert again.day_ids == data.day_ids
        assert again.label_space == data.label_space
        assert again.codec == data.codec
        for a, b in zip(again, data):
            np.testing.assert_array_equal(a.features, b.features)
            np.testing.assert_array_equal(a.labels, b.labels)
            np.testing.assert_array_equal(a.symbols, b.symbols)

    def test_fractional_features_survive(self, tmp_path):
        space = LabelSpace((2,))
        day = SequenceInstance("d1", np.array([[0.1, 1.0], [2 / 3, 0.0]]), np.array([[0], [1]]))
        write_canonical(Dataset.from_instances([day], space), tmp_path)
        np.testing.assert_array_equal(load_canonical(tmp_path).instances[0].features, day.features)

    def test_missing_sidecar(self, tmp_path):
        with pytest.raises(DataFormatError):
            load_canonical(tmp_path)

    def test_malformed_day_line_names_the_line(self, make_dataset, rng, tmp_path):
        data = make_dataset(rng, days=1)
        written = write_canonical(data, tmp_path)
        day_file = written[0]
        lines = day_file.read_text().splitlines()
        lines[2] = "1\t0,1"
        day_file.write_text("\n".join(lines) + "\n")
        with pytest.raises(DataFormatError) as err:
            load_canonical(tmp_path)
        assert err.value.line == 3
