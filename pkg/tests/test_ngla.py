from __future__ import annotations

import itertools
import json
import random
from fractions import Fraction

import pytest

from carnotfas.exactpoly import Poly
from carnotfas.ngla import (AlgebraError, abelian, ad_matrix_at, ad_matrix_parametric, algebra_from_json,
                            algebra_to_json, center, check_codim3_hypotheses, counterexample, direct_sum,
                            find_coordinate_decomposition, find_witness, free_step2, generic_rank,
                            generic_rank_random, generic_rank_symbolic, heisenberg, is_ad_surjective,
                            kernel_and_image_of_ad, load_algebra, make_algebra, random_codim3_instance,
                            random_step2_algebra, rank_at, sample_every_x_ad_generating, validate,
                            verify_decomposition)
from carnotfas.polymat import det_poly


# -- validation -------------------------------------------------------------------

def test_validate_heisenberg():
    rep = validate(heisenberg(3))
    assert rep.ok and rep.step == 2


def test_validate_abelian_is_step_one():
    rep = validate(abelian(3))
    assert rep.ok and rep.step == 1 and rep.fundamental


def test_validate_flags_grading():
    a = make_algebra([2, 1], [(1, 2, 3, 1), (1, 3, 2, 1)])
    rep = validate(a)
    assert not rep.grading and not rep.ok


def test_validate_flags_jacobi():
    # step-3 table with a broken Jacobi identity
    a = make_algebra([2, 1, 1], [(1, 2, 3, 1), (1, 3, 4, 1), (2, 3, 4, 1)])
    assert validate(a).jacobi
    b = make_algebra([3, 1, 1], [(1, 2, 4, 1), (1, 4, 5, 1), (2, 3, 4, 1), (3, 4, 5, 1)])
    rep = validate(b)
    assert not rep.jacobi


def test_validate_flags_non_fundamental():
    a = make_algebra([2, 2], [(1, 2, 3, 1)])
    assert not validate(a).fundamental


def test_index_out_of_range_rejected():
    with pytest.raises(AlgebraError):
        make_algebra([2, 1], [(1, 5, 3, 1)])


def test_conflicting_antisymmetry_is_reported():
    a = make_algebra([2, 1], [(1, 2, 3, 1), (2, 1, 3, 1)])
    assert not validate(a).antisymmetry


# -- constructors ---------------------------------------------------------------------

def test_heisenberg_shapes():
    h = heisenberg(3)
    assert (h.m, h.d, h.c(1, 2, 3)) == (2, 1, 1)
    assert (heisenberg(5).m, heisenberg(5).d) == (4, 1)


def test_free_step2():
    assert (free_step2(3).m, free_step2(3).d) == (3, 3)
    rep = validate(free_step2(4))
    assert rep.ok and rep.step == 2
    f2 = free_step2(2)
    assert (f2.m, f2.d) == (2, 1) and abs(f2.c(1, 2, 3)) == 1


def test_direct_sum_shapes():
    s = direct_sum(heisenberg(3), heisenberg(3))
    assert (s.m, s.d) == (4, 2)
    assert direct_sum(heisenberg(3), make_algebra([0], [])).brackets == heisenberg(3).brackets
    assert validate(direct_sum(free_step2(3), heisenberg(3))).ok


def test_json_roundtrip(tmp_path):
    a = counterexample(2, Fraction(1, 3), -1)
    data = algebra_to_json(a)
    assert data["brackets"][0] == {"i": 1, "j": 2, "k": 6, "coef": "1/1"}
    p = tmp_path / "a.json"
    p.write_text(json.dumps(data))
    assert load_algebra(p).brackets == a.brackets
    with pytest.raises(AlgebraError):
        algebra_from_json({"brackets": []})


# -- ad map and generic rank ------------------------------------------------------------

def test_ad_matrix_heisenberg():
    m = ad_matrix_parametric(heisenberg(3))
    assert m == [[-Poly.var(2, 2), Poly.var(2, 1)]]


def test_ad_matrix_free3_has_vanishing_determinant():
    assert det_poly(ad_matrix_parametric(free_step2(3))) == Poly.zero(3)


def test_ad_matrix_counterexample_entries():
    b, d, l = 2, 3, 5
    m = ad_matrix_parametric(counterexample(b, d, l))
    C = [Poly.var(5, i) for i in range(1, 6)]
    assert m[2] == [-C[3], -b * C[4], -d * C[4], C[0] - l * C[4], b * C[1] + d * C[2] + l * C[3]]


@pytest.mark.parametrize("alg,r", [(heisenberg(3), 1), (free_step2(3), 2), (counterexample(1, 1, 1), 3),
                                   (direct_sum(heisenberg(3), heisenberg(3)), 2)])
def test_generic_rank_examples(alg, r):
    assert generic_rank(alg) == r
    assert generic_rank_symbolic(alg) == r


def test_is_ad_surjective_examples():
    assert is_ad_surjective(heisenberg(5)) == (True, [1, 0, 0, 0])
    ok, w = is_ad_surjective(free_step2(3))
    assert not ok and w is None
    ok, w = is_ad_surjective(direct_sum(heisenberg(3), heisenberg(3)))
    assert ok and w == [1, 0, 1, 0]


def test_find_witness_respects_generic_rank():
    a = counterexample(1, 2, 3)
    assert find_witness(a) is None
    assert rank_at(a, [1, 0, 0, 0, 0]) == 3


def test_every_x_sampler_is_heuristic_but_sane():
    assert sample_every_x_ad_generating(heisenberg(3), samples=30, rng=random.Random(0))
    assert not sample_every_x_ad_generating(free_step2(3), samples=30, rng=random.Random(0))


@pytest.mark.parametrize("seed", range(25))
def test_symbolic_and_sampled_rank_agree(seed):
    rng = random.Random(seed)
    m = rng.randint(2, 5)
    a = random_step2_algebra(rng, m, rng.randint(1, min(3, m * (m - 1) // 2)))
    assert a is not None
    r = generic_rank_symbolic(a)
    assert r == generic_rank_random(a, trials=50, rng=random.Random(seed))
    for _ in range(10):
        x = [rng.randint(-2, 2) for _ in range(a.m)]
        assert rank_at(a, x) <= r
    ok, w = is_ad_surjective(a)
    if ok:
        assert rank_at(a, w) == r == a.d


# -- center, kernels, hypotheses --------------------------------------------------------

def test_center_examples():
    c = center(heisenberg(3))
    assert c.basis.dim == 1 and c.dim_m1_intersection == 0
    hr = make_algebra([3, 1], [(1, 2, 4, 1)])
    assert center(hr).dim_m1_intersection == 1
    assert center(counterexample(2, 3, 5)).dim_m1_intersection == 0


def test_kernel_and_image():
    k, l = kernel_and_image_of_ad(heisenberg(3), [1, 0])
    assert k.dim == 1 and l.dim == 1
    k0, l0 = kernel_and_image_of_ad(free_step2(3), [0, 0, 0])
    assert k0.dim == 3 and l0.dim == 0
    k1, l1 = kernel_and_image_of_ad(free_step2(3), [1, 0, 0])
    assert k1.dim == 1 and l1.dim == 2


def test_codim3_hypotheses_examples():
    assert check_codim3_hypotheses(heisenberg(5))
    assert not check_codim3_hypotheses(free_step2(3))
    assert not check_codim3_hypotheses(counterexample(1, 1, 1))


def test_random_codim3_instances_are_ad_surjective():
    rng = random.Random(11)
    for _ in range(60):
        a = random_codim3_instance(rng)
        assert a is not None and check_codim3_hypotheses(a)
        assert is_ad_surjective(a)[0]


# -- the counterexample family --------------------------------------------------------

def test_counterexample_rank_one_locus_is_nonzero():
    # rank(ad X) <= 1 holds on the whole plane span{X4, X5}, not only at X = 0
    a = counterexample(2, 3, 5)
    for x in ([0, 0, 0, 1, 0], [0, 0, 0, 0, 1], [0, 0, 0, 2, -3]):
        assert rank_at(a, x) == 1


@pytest.mark.xfail(strict=True, reason="rank(ad X) <= 1 does not force X = 0 in this family")
def test_counterexample_rank_one_only_at_zero():
    a = counterexample(2, 3, 5)
    grid = [v for v in itertools.product(range(-1, 2), repeat=5) if any(v)]
    assert all(rank_at(a, list(v)) >= 2 for v in grid)


def test_counterexample_decomposition_fails():
    a = counterexample(1, 1, 1)
    assert not verify_decomposition(a, [[1, 2, 3, 6, 7, 9], [4, 5, 8]])
    assert find_coordinate_decomposition(a) is None


# -- decompositions -----------------------------------------------------------------

def test_decomposition_examples():
    s = direct_sum(heisenberg(3), heisenberg(3))
    # basis: X1 X2 X1' X2' Z Z'
    assert verify_decomposition(s, [[1, 2, 5], [3, 4, 6]])
    assert find_coordinate_decomposition(s) is not None
    h = heisenberg(3)
    for part in ([[1, 3], [2]], [[1], [2, 3]], [[1, 2], [3]]):
        assert not verify_decomposition(h, part)
    assert find_coordinate_decomposition(h) is None


def test_decomposition_requires_partition():
    with pytest.raises(AlgebraError):
        verify_decomposition(heisenberg(3), [[1], [2]])


@pytest.mark.parametrize("seed", range(20))
def test_direct_sum_surjectivity_is_conjunction(seed):
    rng = random.Random(seed)
    parts = []
    for _ in range(2):
        if rng.random() < 0.3:
            parts.append(free_step2(3))
        else:
            m = rng.randint(2, 4)
            a = random_step2_algebra(rng, m, rng.randint(1, min(3, m * (m - 1) // 2)))
            parts.append(a or heisenberg(3))
    s = direct_sum(*parts)
    assert is_ad_surjective(s)[0] == (is_ad_surjective(parts[0])[0] and is_ad_surjective(parts[1])[0])


def test_ad_matrix_at_matches_parametric():
    a = counterexample(1, 2, 3)
    x = [1, -1, 2, 0, 3]
    par = ad_matrix_parametric(a)
    assert [[p.eval(x) for p in row] for row in par] == ad_matrix_at(a, x)
