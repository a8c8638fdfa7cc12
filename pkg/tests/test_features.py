import json
import random

import numpy as np
import pytest

from slamaudit.errors import DataError
from slamaudit.features import (
    NAMESPACES,
    NUMERIC_FEATURES,
    FeatureVector,
    Vocabulary,
    build_vocab,
    encode,
    encode_dataset,
    labels_array,
    to_dense,
)
from slamaudit.slam_format import (
    Client,
    Dataset,
    ExerciseFormat,
    ExerciseMeta,
    Session,
    Split,
    TokenInstance,
    Track,
)

from gen_slam import random_dataset


def make_instance(
    instance_id="abcd123401",
    token="Yo",
    pos="PRON",
    morph=("Person=1",),
    dep="nsubj",
    user="userA",
    days=1.5,
    time=9,
    client=Client.WEB,
    label=0,
):
    meta = ExerciseMeta(
        user_id=user,
        countries=("US",),
        days=days,
        client=client,
        session=Session.LESSON,
        format=ExerciseFormat.REVERSE_TRANSLATE,
        time=time,
        prompt=None,
        extras=(),
    )
    return TokenInstance(
        instance_id=instance_id,
        token=token,
        part_of_speech=pos,
        morph_features=morph,
        dep_label=dep,
        dep_head=2,
        label=label,
        meta=meta,
        track=Track.EN_ES,
    )


def single_instance_dataset():
    return Dataset(track=Track.EN_ES, instances=(make_instance(),), split=Split.TRAIN)


class TestBuildVocab:
    def test_single_instance_every_namespace_has_entry_and_oov(self):
        vocab = build_vocab(single_instance_dataset(), min_count=1)
        for ns in NAMESPACES:
            assert vocab.sizes[ns] >= 2  # at least one real entry plus OOV
            assert len(vocab.maps[ns]) >= 1

    def test_min_count_two_sends_singleton_token_to_oov(self):
        ds = single_instance_dataset()
        vocab = build_vocab(ds, min_count=2)
        assert vocab.maps["token"] == {}
        fv = encode(ds.instances[0], vocab)
        assert vocab.oov_index("token") in fv.indices

    def test_rebuild_is_identical(self):
        rng = random.Random(41)
        ds = random_dataset(rng, n_exercises=20)
        a = build_vocab(ds)
        b = build_vocab(ds)
        assert a == b
        assert a.sha256() == b.sha256()

    def test_token_lowercased(self):
        vocab = build_vocab(single_instance_dataset())
        assert "yo" in vocab.maps["token"]
        assert "Yo" not in vocab.maps["token"]

    def test_empty_dataset_rejected(self):
        empty = Dataset(track=Track.EN_ES, instances=(), split=Split.TRAIN)
        with pytest.raises(DataError, match="empty"):
            build_vocab(empty)

    def test_min_count_below_one_rejected(self):
        with pytest.raises(DataError, match="min_count"):
            build_vocab(single_instance_dataset(), min_count=0)

    def test_multiple_datasets_pool_counts(self):
        ds = single_instance_dataset()
        # the token appears once per dataset; pooling across both reaches 2
        vocab = build_vocab([ds, ds], min_count=2)
        assert "yo" in vocab.maps["token"]

    def test_namespace_ranges_disjoint_and_cover_binary_block(self):
        rng = random.Random(42)
        vocab = build_vocab(random_dataset(rng, n_exercises=10))
        spans = sorted(
            (vocab.offsets[ns], vocab.offsets[ns] + vocab.sizes[ns]) for ns in NAMESPACES
        )
        assert spans[0][0] == 0
        for (_, end), (start, _) in zip(spans, spans[1:]):
            assert end == start
        assert spans[-1][1] == vocab.total_dims - len(NUMERIC_FEATURES)


class TestEncode:
    def test_unseen_token_maps_to_oov(self):
        vocab = build_vocab(single_instance_dataset())
        unseen = make_instance(instance_id="abcd123402", token="zebra")
        fv = encode(unseen, vocab)
        assert vocab.oov_index("token") in fv.indices

    def test_one_index_per_single_valued_namespace(self):
        ds = single_instance_dataset()
        vocab = build_vocab(ds)
        fv = encode(ds.instances[0], vocab)
        # 7 single-valued namespaces + 1 morph feature
        assert len(fv.indices) == 8

    def test_morph_features_each_active_and_deduped(self):
        inst = make_instance(morph=("Person=1", "Number=Sing", "Person=1"))
        ds = Dataset(track=Track.EN_ES, instances=(inst,), split=Split.TRAIN)
        vocab = build_vocab(ds)
        fv = encode(inst, vocab)
        morph_hits = [
            i
            for i in fv.indices
            if vocab.offsets["morph"] <= i < vocab.offsets["morph"] + vocab.sizes["morph"]
        ]
        assert len(morph_hits) == 2

    def test_days_zero_encodes_to_zero(self):
        inst = make_instance(days=0.0)
        ds = Dataset(track=Track.EN_ES, instances=(inst,), split=Split.TRAIN)
        vocab = build_vocab(ds)
        fv = encode(inst, vocab)
        assert dict(fv.numeric)[vocab.numeric_index("days")] == 0.0

    def test_time_clamped_to_sixty_seconds(self):
        inst = make_instance(time=600)
        ds = Dataset(track=Track.EN_ES, instances=(inst,), split=Split.TRAIN)
        vocab = build_vocab(ds)
        fv = encode(inst, vocab)
        numeric = dict(fv.numeric)
        assert numeric[vocab.numeric_index("time")] == 1.0
        assert numeric[vocab.numeric_index("time_present")] == 1.0

    def test_missing_time_sets_presence_indicator_only(self):
        inst = make_instance(time=None)
        ds = Dataset(track=Track.EN_ES, instances=(inst,), split=Split.TRAIN)
        vocab = build_vocab(ds)
        numeric = dict(encode(inst, vocab).numeric)
        assert numeric[vocab.numeric_index("time")] == 0.0
        assert numeric[vocab.numeric_index("time_present")] == 0.0

    def test_identical_instances_encode_identically(self):
        a = make_instance(instance_id="abcd123401")
        b = make_instance(instance_id="abcd123402")
        ds = Dataset(track=Track.EN_ES, instances=(a, b), split=Split.TRAIN)
        vocab = build_vocab(ds)
        assert encode(a, vocab) == encode(b, vocab)

    def test_encode_is_pure(self):
        ds = single_instance_dataset()
        vocab = build_vocab(ds)
        first = encode(ds.instances[0], vocab)
        second = encode(ds.instances[0], vocab)
        assert first == second

    def test_indices_strictly_increasing_on_random_data(self):
        rng = random.Random(43)
        ds = random_dataset(rng, n_exercises=30)
        vocab = build_vocab(ds)
        for fv in encode_dataset(ds, vocab):
            assert all(b > a for a, b in zip(fv.indices, fv.indices[1:]))
            assert fv.indices[-1] < vocab.total_dims

    def test_feature_vector_rejects_unsorted_indices(self):
        with pytest.raises(DataError, match="strictly increasing"):
            FeatureVector(indices=(3, 3), numeric=())


class TestSerialization:
    def test_round_trip_preserves_vocabulary(self):
        rng = random.Random(44)
        vocab = build_vocab(random_dataset(rng, n_exercises=15))
        restored = Vocabulary.from_dict(json.loads(json.dumps(vocab.to_dict())))
        assert restored == vocab
        assert restored.sha256() == vocab.sha256()

    def test_unknown_format_version_rejected(self):
        vocab = build_vocab(single_instance_dataset())
        payload = vocab.to_dict()
        payload["format_version"] = 99
        with pytest.raises(DataError, match="format version"):
            Vocabulary.from_dict(payload)


class TestDense:
    def test_dense_matrix_matches_sparse(self):
        rng = random.Random(45)
        ds = random_dataset(rng, n_exercises=10)
        vocab = build_vocab(ds)
        fvs = encode_dataset(ds, vocab)
        X = to_dense(fvs, vocab)
        assert X.shape == (len(ds), vocab.total_dims)
        for row, fv in zip(X, fvs):
            numeric_dims = {dim for dim, _ in fv.numeric}
            for j, value in enumerate(row):
                if j in numeric_dims:
                    assert value == dict(fv.numeric)[j]
                elif j in fv.indices:
                    assert value == 1.0
                else:
                    assert value == 0.0

    def test_labels_array(self):
        rng = random.Random(46)
        ds = random_dataset(rng, n_exercises=5)
        y = labels_array(ds)
        assert y.dtype == np.float64
        assert set(np.unique(y)) <= {0.0, 1.0}

    def test_labels_array_rejects_unlabeled(self):
        rng = random.Random(47)
        ds = random_dataset(rng, n_exercises=3, labeled=False)
        with pytest.raises(DataError, match="unlabeled"):
            labels_array(ds)
