from __future__ import annotations

import json
import random

import pytest

from carnotfas.framekit import (BlockIndexing, FrameError, MetricPairFrame, block_frame_json,
                                build_quasi_normal, check_first_divi, check_roundtrip, ck_violations,
                                ck_zero_set, default_alpha2, frame_from_algebras, frame_from_json,
                                is_quasi_normal, load_frame, perturb_frame, product_frame,
                                random_first_divi_frame, tanaka_violations, target2_violations,
                                three_distinct_violations)
from carnotfas.ngla import (abelian, free_step2, heisenberg, make_algebra,
                            random_step2_algebra, is_ad_surjective)


def test_block_indexing():
    idx = BlockIndexing((2, 3), (1, 2))
    assert (idx.k, idx.m, idx.n) == (2, 5, 8)
    assert idx.I1(1) == [1, 2] and idx.I1(2) == [3, 4, 5]
    assert idx.I2(1) == [6] and idx.I2(2) == [7, 8]
    assert [idx.block_of(j) for j in range(1, 9)] == [1, 1, 2, 2, 2, 1, 2, 2]
    with pytest.raises(FrameError):
        idx.block_of(9)
    with pytest.raises(FrameError):
        BlockIndexing((2,), (1, 1))


def test_two_heisenberg_blocks(h3xh3):
    f = h3xh3
    assert f.n == 6
    assert f.coef(1, 2, 5) == 1 and f.coef(3, 4, 6) == 1
    assert f.c == {(1, 2, 5): 1, (3, 4, 6): 1}
    assert f.is_product() and is_quasi_normal(f)


def test_free2_block_matches_heisenberg(h3_frame):
    f = frame_from_algebras([free_step2(2)], alpha2=[1])
    assert {k: abs(v) for k, v in f.c.items()} == {k: abs(v) for k, v in h3_frame.c.items()}


def test_witness_must_be_ad_generating():
    with pytest.raises(FrameError):
        build_quasi_normal([(heisenberg(3), [0, 0])])
    hr = make_algebra([3, 1], [(1, 2, 4, 1)])
    with pytest.raises(FrameError):
        build_quasi_normal([(hr, [0, 0, 1])])


def test_witness_is_moved_first():
    f = build_quasi_normal([(heisenberg(3), [0, 1])])
    assert is_quasi_normal(f)
    assert f.basis_changes[0].horizontal[0] == [0, 1]


def test_product_frame_examples(h3xh3, h3_frame):
    p = product_frame([h3_frame, h3_frame], alpha2=[1, 4])
    assert p == h3xh3
    assert product_frame([h3_frame]) == h3_frame
    p3 = product_frame([h3_frame] * 3, alpha2=[1, 4, 9])
    assert p3.k == 3 and not check_first_divi(p3) and not tanaka_violations(p3)


def test_default_alpha2():
    assert default_alpha2(3) == (1, 4, 9)


def test_eigenvalues_must_be_positive_and_distinct(h3xh3):
    with pytest.raises(FrameError):
        MetricPairFrame(h3xh3.idx, (1, -4), h3xh3.c)
    same = MetricPairFrame(h3xh3.idx, (1, 1), h3xh3.c)
    with pytest.raises(FrameError):
        check_first_divi(same)


def test_first_divi_item1_violation(h3xh3):
    f = perturb_frame(h3xh3, [(3, 1, 3, 1)])
    items = {v["item"] for v in check_first_divi(f)}
    assert 1 in items


def test_first_divi_item2_violation(h3xh3):
    f = perturb_frame(h3xh3, [(1, 4, 3, 1), (1, 3, 4, 1)])
    assert 2 in {v["item"] for v in check_first_divi(f)}
    ok = perturb_frame(h3xh3, [(1, 4, 3, 1), (1, 3, 4, -1)])
    assert 2 not in {v["item"] for v in check_first_divi(ok)}


def test_perturb_examples(h3xh3):
    assert perturb_frame(h3xh3, []) == h3xh3
    with pytest.raises(FrameError):
        perturb_frame(h3xh3, [(1, 2, 5, 1), (2, 1, 5, 1)])
    g = perturb_frame(h3xh3, [(2, 1, 5, 3)])
    assert g.coef(1, 2, 5) == -3


def test_step1_fixture_passes_every_check(step1_fixture):
    f = perturb_frame(step1_fixture, [(1, 3, 4, 5)])
    assert not check_first_divi(f)
    assert is_quasi_normal(f) and not tanaka_violations(f)
    assert ck_violations(f, 1) == [(1, 3, 4)]


def test_literal_injection_breaks_quasi_normality(h3xh3):
    # in an H3 block the constant c^s_{1,2} is pinned by the normalization
    f = perturb_frame(h3xh3, [(1, 2, 3, 7)])
    assert not is_quasi_normal(f)


def test_roundtrip_reproduces_input_algebras():
    rng = random.Random(4)
    for _ in range(15):
        algs = []
        for _ in range(rng.randint(1, 3)):
            m = rng.randint(2, 4)
            a = random_step2_algebra(rng, m, rng.randint(1, min(2, m - 1)))
            if a is not None and is_ad_surjective(a)[0]:
                algs.append(a)
        if not algs:
            continue
        f = frame_from_algebras(algs)
        assert is_quasi_normal(f)
        assert check_roundtrip(f, algs)
        assert not check_first_divi(f) and not tanaka_violations(f)


def test_abelian_block():
    f = frame_from_algebras([abelian(2), heisenberg(3)], alpha2=[2, 3])
    assert f.idx.ds == (0, 1) and is_quasi_normal(f)


def test_json_forms(tmp_path, h3xh3, fixtures_dir):
    data = block_frame_json([heisenberg(3)] * 2, [[1, 0], [1, 0]], [1, 4])
    assert frame_from_json(data) == h3xh3
    table = json.loads(json.dumps(h3xh3.to_json()))
    assert frame_from_json(table) == h3xh3
    assert load_frame(fixtures_dir / "h3xh3.json") == h3xh3
    with pytest.raises(FrameError):
        frame_from_json({"alpha2": [1]})


def test_json_perturb_extension(step1_fixture, fixtures_dir):
    f = load_frame(fixtures_dir / "step1_injected.json")
    assert f == perturb_frame(step1_fixture, [(1, 3, 4, 5)])


@pytest.mark.parametrize("seed", range(20))
def test_random_frames_satisfy_first_divi(seed):
    f = random_first_divi_frame(random.Random(seed))
    assert not check_first_divi(f)
    assert is_quasi_normal(f) and not tanaka_violations(f)


def test_zero_sets_are_honoured():
    rng = random.Random(9)
    sizes = [(3, 1), (3, 1), (2, 1)]
    idx = BlockIndexing((3, 3, 2), (1, 1, 1))
    for _ in range(10):
        f = random_first_divi_frame(rng, sizes=sizes, zero=ck_zero_set(idx, 1))
        assert not ck_violations(f, 1)


def test_violation_helpers(h3x3):
    assert not three_distinct_violations(h3x3)
    assert not target2_violations(h3x3, 1)
    f = perturb_frame(h3x3, [(1, 3, 5, 1)])
    assert (1, 3, 5) in three_distinct_violations(f)
