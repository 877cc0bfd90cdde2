import random
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from manifest_ig.errors import DuplicateSample, NameCollisionAcrossCategories, PoolTooSmall
from manifest_ig.features import ManifestFeatures
from manifest_ig.model import (
    Category,
    ClassLabel,
    SplitMix64,
    assemble_dataset,
    build_vocabulary,
    sample_balanced,
    vectorize,
)

M, B = ClassLabel.MALWARE, ClassLabel.BENIGN
INTERNET = "android.permission.INTERNET"
SEND_SMS = "android.permission.SEND_SMS"


def mf(perms=(), intents=(), app_id="a"):
    return ManifestFeatures(app_id, frozenset(perms), frozenset(intents))


def test_vocabulary_union_sorted():
    vocab = build_vocabulary([mf([SEND_SMS, INTERNET]), mf([INTERNET])])
    assert vocab.entries == ((INTERNET, Category.PERMISSION), (SEND_SMS, Category.PERMISSION))
    assert vocab.index == {INTERNET: 0, SEND_SMS: 1}


def test_vocabulary_categories():
    vocab = build_vocabulary([mf(["p.X"], ["i.Y"])])
    assert dict(vocab.entries) == {"p.X": Category.PERMISSION, "i.Y": Category.INTENT}


def test_vocabulary_collision():
    with pytest.raises(NameCollisionAcrossCategories):
        build_vocabulary([mf(["x.y"]), mf([], ["x.y"])])


def test_vocabulary_collision_namespaced():
    vocab = build_vocabulary([mf(["x.y"]), mf([], ["x.y"])], namespace_categories=True)
    assert vocab.names == ["intent:x.y", "permission:x.y"]


def test_vectorize_examples():
    vocab = build_vocabulary([mf([INTERNET, SEND_SMS])])
    assert vectorize(mf([INTERNET]), vocab, M).vector.tolist() == [1, 0]
    assert vectorize(mf(), vocab, M).vector.tolist() == [0, 0]
    small = build_vocabulary([mf([INTERNET])])
    inst = vectorize(mf([INTERNET, "UNKNOWN.PERM"]), small, B)
    assert inst.vector.tolist() == [1]
    assert inst.oov_count == 1


def test_vectorize_category_mismatch_counts_as_oov():
    vocab = build_vocabulary([mf(["x.y"])])
    inst = vectorize(mf([], ["x.y"]), vocab, M)
    assert inst.vector.tolist() == [0] and inst.oov_count == 1


def test_assemble_counts():
    recs = [(mf([INTERNET]), M, "m1"), (mf([INTERNET, SEND_SMS]), M, "m2"), (mf(), B, "b1"), (mf([SEND_SMS]), B, "b2")]
    ds = assemble_dataset(recs)
    assert ds.class_counts == {M: 2, B: 2}
    assert ds.matrix.tolist() == [[1, 0], [1, 1], [0, 0], [0, 1]]
    assert [i.label for i in ds.instances] == [M, M, B, B]
    assert ds.column(1).values.tolist() == [0, 1, 0, 1]


def test_assemble_duplicate():
    with pytest.raises(DuplicateSample) as info:
        assemble_dataset([(mf(), M, "s"), (mf([INTERNET]), B, "s")])
    assert info.value.sha256 == "s"


def test_assemble_single_record():
    ds = assemble_dataset([(mf([INTERNET]), M, "only")])
    assert len(ds) == 1 and ds.class_counts == {M: 1, B: 0}


def test_dataset_is_immutable():
    ds = assemble_dataset([(mf([INTERNET]), M, "a")])
    with pytest.raises(ValueError):
        ds.matrix[0, 0] = 0


def test_min_support_and_category_filters():
    recs = [(mf([INTERNET], ["i.A"]), M, "1"), (mf([INTERNET]), B, "2"), (mf([SEND_SMS]), B, "3")]
    ds = assemble_dataset(recs)
    assert ds.with_min_support(2).vocabulary.names == [INTERNET]
    assert ds.with_category(Category.INTENT).vocabulary.names == ["i.A"]
    assert ds.with_min_support(0) is ds


def test_extra_vocabulary_adds_zero_columns():
    ds = assemble_dataset([(mf([INTERNET]), M, "1")], extra_vocabulary=[("z.NEVER", Category.INTENT)])
    assert ds.vocabulary.names == [INTERNET, "z.NEVER"]
    assert ds.matrix[:, 1].sum() == 0


records_strategy = st.lists(
    st.tuples(
        st.frozensets(st.sampled_from([f"p.{c}" for c in "ABCDEFG"]), max_size=5),
        st.frozensets(st.sampled_from([f"i.{c}" for c in "ABCDE"]), max_size=3),
        st.sampled_from([M, B]),
    ),
    min_size=1,
    max_size=12,
)


@settings(max_examples=80, deadline=None)
@given(records_strategy, st.randoms(use_true_random=False))
def test_vocabulary_determinism_and_row_column_consistency(raw, rnd):
    recs = [(ManifestFeatures("", p, i), lab, f"{k:064x}") for k, (p, i, lab) in enumerate(raw)]
    ds = assemble_dataset(recs)
    shuffled = list(recs)
    rnd.shuffle(shuffled)
    ds2 = assemble_dataset(shuffled)
    assert ds.vocabulary == ds2.vocabulary
    rows1 = dict(zip(ds.sha256s, map(tuple, ds.matrix)))
    rows2 = dict(zip(ds2.sha256s, map(tuple, ds2.matrix)))
    assert rows1 == rows2
    assert ds.matrix.sum(axis=0).sum() == sum(int(r.sum()) for r in ds.matrix)
    counts = ds.class_counts
    assert sum(counts.values()) == len(ds)
    assert counts[M] == sum(1 for *_, lab in raw if lab is M)


# -- SplitMix64 / sampling ----------------------------------------------------


def test_splitmix64_reference_vector():
    # Known-answer outputs for seed 1234567, as used by rand_xoshiro's tests.
    rng = SplitMix64(1234567)
    assert [rng.next() for _ in range(5)] == [
        6457827717110365317,
        3203168211198807973,
        9817491932198370423,
        4593380528125082431,
        16408922859458223821,
    ]


def pool(prefix, n):
    return [SimpleNamespace(sha256=f"{prefix}{k:03d}") for k in range(n)]


def test_sample_exhaustive():
    m, b = pool("m", 3), pool("b", 3)
    for seed in (0, 1, 2**63, -1):
        sm, sb = sample_balanced(m, b, 3, seed)
        assert {x.sha256 for x in sm} == {x.sha256 for x in m}
        assert {x.sha256 for x in sb} == {x.sha256 for x in b}


def test_sample_deterministic():
    m, b = pool("m", 50), pool("b", 40)
    first = sample_balanced(m, b, 10, 42)
    second = sample_balanced(m, b, 10, 42)
    assert [x.sha256 for x in first[0]] == [x.sha256 for x in second[0]]
    assert [x.sha256 for x in first[1]] == [x.sha256 for x in second[1]]
    other = sample_balanced(m, b, 10, 43)
    assert [x.sha256 for x in other[0]] != [x.sha256 for x in first[0]]


def test_sample_pool_too_small():
    with pytest.raises(PoolTooSmall) as info:
        sample_balanced(pool("m", 2), pool("b", 5), 3, 0)
    assert (info.value.label, info.value.have, info.value.need) == (M, 2, 3)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**64 - 1), st.integers(1, 20), st.randoms(use_true_random=False))
def test_sample_invariant_under_pool_order(seed, n, rnd):
    m, b = pool("m", 25), pool("b", 30)
    m2, b2 = list(m), list(b)
    rnd.shuffle(m2)
    rnd.shuffle(b2)
    a = sample_balanced(m, b, n, seed)
    c = sample_balanced(m2, b2, n, seed)
    assert [x.sha256 for x in a[0]] == [x.sha256 for x in c[0]]
    assert [x.sha256 for x in a[1]] == [x.sha256 for x in c[1]]
    assert len(a[0]) == len(a[1]) == n
    assert len({x.sha256 for x in a[0]}) == n


def test_shuffle_is_roughly_uniform():
    counts = np.zeros((4, 4), dtype=int)
    rng = SplitMix64(7)
    for _ in range(4000):
        items = [0, 1, 2, 3]
        rng.shuffle(items)
        for pos, item in enumerate(items):
            counts[pos, item] += 1
    assert np.all(np.abs(counts - 1000) < 150)
