from __future__ import annotations

import json

import numpy as np
import pytest

from actbench.data import LabelSpace
from actbench.errors import DataFormatError
from actbench.models import (
    CrfParams,
    FcrfParams,
    RnnConfig,
    count_parameters,
    init_rnn_params,
    load_model,
    save_model,
    train_fhmm,
    train_hmm,
)


def _bundles(data, rng):
    space, D = data.label_space, data.n_features
    crf_size = CrfParams.zeros(space, D).to_vector().size
    fcrf_size = FcrfParams.zeros(space, D).to_vector().size
    return [
        train_hmm(data, alpha=0.01),
        train_fhmm(data, alpha=0.01),
        CrfParams.from_vector(space, D, rng.normal(size=crf_size)),
        FcrfParams.from_vector(space, D, rng.normal(size=fcrf_size)),
        init_rnn_params(RnnConfig(cell="lstm", head="separate", hidden=4, seed=3), D, space, rng),
        init_rnn_params(RnnConfig(cell="gru", hidden=2), D, space, rng),
    ]


class TestModelFiles:
    def test_round_trip_every_kind(self, make_dataset, rng, tmp_path):
        data = make_dataset(rng, sizes=(2, 3))
        for i, params in enumerate(_bundles(data, rng)):
            path = save_model(params, tmp_path / f"m{i}.npz", codec=data.codec, metadata={"i": i})
            loaded = load_model(path)
            assert type(loaded.params) is type(params)
            assert loaded.params.label_space == params.label_space
            assert loaded.codec == data.codec
            assert loaded.header["metadata"] == {"i": i}
            assert loaded.header["parameters"] == count_parameters(params)
            saved, again = params.to_arrays(), loaded.params.to_arrays()
            assert saved.keys() == again.keys()
            for name in saved:
                np.testing.assert_array_equal(again[name], saved[name])

    def test_rnn_header_fields(self, make_dataset, rng, tmp_path):
        data = make_dataset(rng)
        cfg = RnnConfig(cell="lstm", head="separate", hidden=4, seed=9)
        params = init_rnn_params(cfg, data.n_features, data.label_space, rng)
        loaded = load_model(save_model(params, tmp_path / "rnn.npz")).params
        assert (loaded.cell, loaded.head, loaded.hidden, loaded.seed) == ("lstm", "separate", 4, 9)

    def test_codec_is_optional(self, make_dataset, rng, tmp_path):
        data = make_dataset(rng)
        assert load_model(save_model(train_hmm(data, 0.1), tmp_path / "h.npz")).codec is None

    def test_parameter_counts(self):
        space = LabelSpace((2, 3))
        assert count_parameters(CrfParams.zeros(space, 4)) == 4 * 6 + 36 + 6 + 6
        assert count_parameters(FcrfParams.zeros(space, 4)) == (8 + 12) + (4 + 9) + 5 + 5 + 6

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataFormatError):
            load_model(tmp_path / "absent.npz")

    def test_not_an_archive(self, tmp_path):
        path = tmp_path / "junk.npz"
        path.write_bytes(b"definitely not numpy")
        with pytest.raises(DataFormatError):
            load_model(path)

    def test_foreign_archive(self, tmp_path):
        path = tmp_path / "other.npz"
        np.savez(path, header=np.array(json.dumps({"format": "something-else"})))
        with pytest.raises(DataFormatError):
            load_model(path)

    def test_unknown_kind(self, tmp_path):
        path = tmp_path / "odd.npz"
        np.savez(path, header=np.array(json.dumps({"format": "actbench-model", "kind": "svm"})))
        with pytest.raises(DataFormatError):
            load_model(path)

    def test_missing_weights(self, make_dataset, rng, tmp_path):
        data = make_dataset(rng)
        params = train_hmm(data, 0.1)
        header = {
            "format": "actbench-model",
            "kind": "hmm",
            "label_space": data.label_space.to_dict(),
            **params.header(),
        }
        path = tmp_path / "partial.npz"
        np.savez(path, header=np.array(json.dumps(header)), prior=params.prior)
        with pytest.raises(DataFormatError):
            load_model(path)
